"""Independent reference implementations used only by the tests.

Everything here recomputes results through a different route than the
package: scores by enumerating leaves under each edge, table combines by
a literal scatter over every (row, row, split) triple, range maxima by
linear scan. Slow and obviously correct is the point.
"""

from __future__ import annotations

import numpy as np

from napx.model import Instance
from napx.solver import CladeTable


# ------------------------------------------------------------------------- #
#  Scoring
# ------------------------------------------------------------------------- #

def leaves_below(instance: Instance, eid: int) -> list[str]:
    """Taxon ids under an edge, found by walking down from it."""
    out: list[str] = []
    stack = [eid]
    while stack:
        e = instance.tree.edges[stack.pop()]
        if e.taxon is not None:
            out.append(e.taxon)
        stack.extend(e.children)
    return sorted(out)


def expected_pd_reference(instance: Instance, selected) -> float:
    """Expected diversity via per-edge leaf enumeration.

    For each edge, the survival probability is one minus the product of
    its leaves' death probabilities, recomputed from scratch; no value is
    shared between edges, unlike the package's bottom-up pass.
    """
    sel = frozenset(selected)
    total = 0.0
    for e in instance.tree.edges:
        dead = 1.0
        for tid in leaves_below(instance, e.eid):
            tx = instance.taxa[tid]
            p = tx.b if tid in sel else tx.a
            dead *= 1.0 - p
        total += e.length * (1.0 - dead)
    return total


# ------------------------------------------------------------------------- #
#  Exhaustive optimum (tiny instances)
# ------------------------------------------------------------------------- #

def exhaustive_best(instance: Instance) -> tuple[frozenset, float]:
    """Optimum by scanning all subsets; ties pick the smallest id tuple."""
    ids = sorted(instance.taxa)
    best_sel: tuple = ()
    best = expected_pd_reference(instance, ())
    for mask in range(1, 1 << len(ids)):
        sel = tuple(ids[i] for i in range(len(ids)) if mask >> i & 1)
        if sum(instance.taxa[t].c for t in sel) > instance.budget:
            continue
        score = expected_pd_reference(instance, sel)
        if score > best + 1e-12 or (score > best - 1e-12 and sel < best_sel):
            if score > best:
                best = score
            best_sel = sel
    return frozenset(best_sel), best


# ------------------------------------------------------------------------- #
#  Scatter reference for the table combine
# ------------------------------------------------------------------------- #

def product_rows(disc) -> np.ndarray:
    """Matrix of output rows: entry [j, k] for left row j, right row k."""
    rows = disc.t + 2
    return np.stack([disc._p_rows_for_k(k) for k in range(rows)], axis=1)


def combine_reference(left: CladeTable, right: CladeTable, lam: float,
                      budget: int, disc, with_backpointers: bool = False):
    """Combine two clade tables by scattering every candidate.

    For each left row j, left spend i, right row k and right spend beta,
    the candidate ``left[i, j] + right[beta, k]`` lands at budget i + beta
    in the output row that the grid's window algebra assigns to (j, k).
    Values take an unordered scatter max (max is order-free on floats).
    With ``with_backpointers``, a second pass finds, per finite cell, the
    lexicographically smallest (i, j) whose best k reaches the cell value.
    Returns scores, or (scores, bp_budget, bp_left).
    """
    rows = disc.t + 2
    nb = budget + 1
    out = np.full((nb, rows), -np.inf)
    mat = product_rows(disc)

    for j in range(rows):
        pv = mat[j]
        fin_i = np.nonzero(np.isfinite(left.scores[:, j]))[0]
        for i in fin_i:
            base = float(left.scores[i, j])
            for beta in range(nb - i):
                np.maximum.at(out[i + beta], pv, base + right.scores[beta])

    if not with_backpointers:
        out += lam * disc.grid[None, :]
        return out

    bp_i = np.full((nb, rows), -1, dtype=np.int32)
    bp_j = np.full((nb, rows), -1, dtype=np.int32)
    ks_of = [[np.nonzero(mat[j] == p)[0] for p in range(rows)]
             for j in range(rows)]
    for b in range(nb):
        for p in range(rows):
            if not np.isfinite(out[b, p]):
                continue
            found = False
            for i in range(b + 1):
                if found:
                    break
                for j in range(rows):
                    if not np.isfinite(left.scores[i, j]):
                        continue
                    ks = ks_of[j][p]
                    if ks.size == 0:
                        continue
                    vals = left.scores[i, j] + right.scores[b - i, ks]
                    hits = np.nonzero(vals == out[b, p])[0]
                    if hits.size:
                        bp_i[b, p] = i
                        bp_j[b, p] = j
                        found = True
                        break
    out += lam * disc.grid[None, :]
    return out, bp_i, bp_j


# ------------------------------------------------------------------------- #
#  Window scan
# ------------------------------------------------------------------------- #

def k_range_scan(disc, p_idx: int, j_idx: int) -> list[int]:
    """Right rows k with pi(j + k - j*k) = p, by direct evaluation."""
    j = float(disc.grid[j_idx])
    hits = []
    for k in range(disc.t + 2):
        kv = float(disc.grid[k])
        q = j + (1.0 - j) * kv
        if disc.pi_index(q) == p_idx:
            hits.append(k)
    return hits


# ------------------------------------------------------------------------- #
#  Range max by scan
# ------------------------------------------------------------------------- #

def range_max_scan(values: np.ndarray, lo: int, hi: int) -> tuple[float, int]:
    """Max and smallest argmax of values[lo..hi], inclusive, by loop.

    An all-minus-infinity window reports its first position, matching the
    argmax convention of the package (such indices are never dereferenced
    for infeasible cells).
    """
    best = float(values[lo])
    arg = lo
    for i in range(lo + 1, hi + 1):
        if values[i] > best:
            best = float(values[i])
            arg = i
    return best, arg


# ------------------------------------------------------------------------- #
#  Per-clade greedy (a deliberately flawed strategy)
# ------------------------------------------------------------------------- #

def per_clade_greedy(instance: Instance) -> frozenset:
    """Bottom-up selection keeping one best set per (clade, budget).

    Each clade remembers, for every budget, only the selection maximizing
    the expected diversity of the edges inside that clade. Without
    tracking the clade's survival probability this can lock in locally
    attractive picks that starve shallower edges, so it is not optimal;
    the tests use it as the regression foil.
    """
    tree = instance.tree
    nb = instance.budget + 1

    def clade_edges(eid: int) -> list[int]:
        got, stack = [], [eid]
        while stack:
            e = tree.edges[stack.pop()]
            got.append(e.eid)
            stack.extend(e.children)
        return got

    def local_score(eid: int, sel: frozenset) -> float:
        total = 0.0
        for sub in clade_edges(eid):
            e = tree.edges[sub]
            dead = 1.0
            for tid in leaves_below(instance, sub):
                tx = instance.taxa[tid]
                p = tx.b if tid in sel else tx.a
                dead *= 1.0 - p
            total += e.length * (1.0 - dead)
        return total

    best: dict[int, list[frozenset]] = {}
    for e in tree.edges:
        table: list[frozenset] = []
        if e.taxon is not None:
            tx = instance.taxa[e.taxon]
            for b in range(nb):
                if tx.c <= b and local_score(e.eid, frozenset({tx.id})) \
                        > local_score(e.eid, frozenset()):
                    table.append(frozenset({tx.id}))
                else:
                    table.append(frozenset())
        elif len(e.children) == 1:
            table = best[e.children[0]]
        else:
            l, r = e.children
            for b in range(nb):
                cand_best = None
                val_best = -np.inf
                for i in range(b + 1):
                    sel = best[l][i] | best[r][b - i]
                    v = local_score(e.eid, sel)
                    if v > val_best:
                        val_best = v
                        cand_best = sel
                table.append(cand_best)
        best[e.eid] = table
    return best[tree.root][instance.budget]

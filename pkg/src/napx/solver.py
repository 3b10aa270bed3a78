"""The budgeted-diversity dynamic program over discretized probabilities.

Every edge e of the (normalized, binary) tree gets a clade table
``T_e[b, p]``: the best expected diversity collectible strictly below the
top of e, over selections that cost at most b within e's clade and give
the clade a survival probability that rounds to grid row p. The table of
a pendant edge has exactly one finite cell per budget row, since the only
choice at a leaf is whether the allocated budget covers its cost:

    T_s[b, pi(a)] = a * length(e)   for b < c,
    T_s[b, pi(b)] = b * length(e)   for b >= c.

An interior edge e with children l and r combines child tables and then
collects its own survival term:

    T_e[b, p] = p * length(e)
                + max { T_l[i, j] + T_r[b - i, k] :
                        i + beta = b,  pi(v_j + v_k - v_j v_k) = row p }.

The key to speed is that for a fixed left row j, the right rows k that
land on output row p form a contiguous index window (see
:meth:`napx.discretization.Discretization.k_range`), and those windows
partition the k axis as p varies. So the inner maximum over k is a range
maximum query on the right child's budget column, batched here across all
(budget, output row) pairs at once with one flat sparse table per combine.

When one child is a pendant edge, its table carries at most two distinct
(row, value) configurations over the whole budget axis, and the combine
collapses to sliding-window maxima over the budget dimension instead of a
sweep over left rows. Both fast variants enumerate exactly the candidate
set of the general sweep in the same order, so the resulting tables,
backpointers included, are identical; only the arithmetic route differs.

Ties everywhere resolve lexicographically: the smallest left budget i
first, then the smallest left row index j, then the smallest right row
index k. The table values are lower bounds on true expected diversity
(rounding only ever shrinks probabilities), which is what makes the final
re-evaluation check in :func:`solve` a real invariant rather than a
tolerance guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import Discretization, derive_k, select_params
from .errors import (DegenerateInstanceError, InternalError, ParameterError)
from .model import (ConservationSet, Instance, Taxon, make_conservation_set,
                    min_conserved_survival, normalize)
from .rmq import RangeMaxIndex

__all__ = [
    "CladeTable",
    "NapxSolution",
    "build_pendant_table",
    "combine_tables",
    "build_tables",
    "backtrace",
    "solve",
]


@dataclass
class CladeTable:
    """Dynamic-program table for one edge.

    ``scores`` has one row per budget 0..B and one column per grid row;
    unreachable cells hold -inf. Interior tables carry backpointers: the
    left child's budget share and row. The right child's row is not
    stored; it is recomputed during backtracking by replaying the
    range-maximum query for the winning cell, which is cheaper than
    carrying a third full array. Pendant tables instead record their two
    possible (row, value) configurations and the conservation cost.
    """

    edge_id: int
    kind: str  # "pendant", "internal" or "unary"
    scores: np.ndarray
    bp_budget: np.ndarray | None = None
    bp_left: np.ndarray | None = None
    taxon: str | None = None
    cost: int = 0
    row_uncons: int = -1
    row_cons: int = -1
    val_uncons: float = 0.0
    val_cons: float = 0.0


def build_pendant_table(eid: int, taxon: Taxon, lam: float, budget: int,
                        disc: Discretization) -> CladeTable:
    """Table for a pendant edge: conserve exactly when the budget allows."""
    rows = disc.t + 2
    scores = np.full((budget + 1, rows), -np.inf)
    ra = disc.pi_index(taxon.a)
    rb = disc.pi_index(taxon.b)
    va = taxon.a * lam
    vb = taxon.b * lam
    cut = min(int(taxon.c), budget + 1)
    scores[:cut, ra] = va
    if taxon.c <= budget:
        scores[taxon.c:, rb] = vb
    return CladeTable(edge_id=eid, kind="pendant", scores=scores,
                      taxon=taxon.id, cost=int(taxon.c),
                      row_uncons=ra, row_cons=rb,
                      val_uncons=va, val_cons=vb)


def _batched_window_max(rmq: RangeMaxIndex, disc: Discretization, j_row: int,
                        n_budgets: int) -> np.ndarray:
    """Max of the right table over the k-window of (j_row, p), for every
    (right budget, output row p) pair, via one vectorized query."""
    rows = disc.t + 2
    lo, hi = disc._k_row(j_row)
    offs = (np.arange(n_budgets, dtype=np.int64) * rows)[:, None]
    vals, _ = rmq.query_many((offs + lo[None, :]).ravel(),
                             (offs + hi[None, :]).ravel())
    return vals.reshape(n_budgets, rows)


def _combine_general(eid: int, left: CladeTable, right: CladeTable, lam: float,
                     budget: int, disc: Discretization) -> CladeTable:
    """Reference combine: sweep every finite left (budget, row) cell."""
    rows = disc.t + 2
    nb = budget + 1
    out = np.full((nb, rows), -np.inf)
    bp_i = np.full((nb, rows), -1, dtype=np.int32)
    bp_j = np.full((nb, rows), -1, dtype=np.int32)
    rmq = RangeMaxIndex(right.scores.ravel())
    finite_j = np.nonzero(np.isfinite(left.scores).any(axis=0))[0]
    for j in finite_j:
        j = int(j)
        m_j = _batched_window_max(rmq, disc, j, nb)
        col = left.scores[:, j]
        for i in np.nonzero(np.isfinite(col))[0]:
            i = int(i)
            cand = col[i] + m_j[:nb - i]
            seg = out[i:]
            bpi_seg = bp_i[i:]
            # lexicographic tie rule: a later candidate with an equal value
            # wins only with a strictly smaller left budget
            upd = (cand > seg) | ((cand == seg) & np.isfinite(cand)
                                  & (i < bpi_seg))
            if upd.any():
                seg[upd] = cand[upd]
                bpi_seg[upd] = i
                bp_j[i:][upd] = j
    out += lam * disc.grid[None, :]
    return CladeTable(edge_id=eid, kind="internal", scores=out,
                      bp_budget=bp_i, bp_left=bp_j)


def _combine_left_pendant(eid: int, pend: CladeTable, right: CladeTable,
                          lam: float, budget: int,
                          disc: Discretization) -> CladeTable:
    """Fast combine when the left child is a pendant edge.

    The pendant contributes one of two (row, value) configurations
    depending on its budget share i: unconserved for i < c, conserved for
    i >= c. Grouping by configuration turns the sweep over i into two
    window maxima over the right child's budget axis: a sliding window of
    width c for the unconserved block, a growing prefix for the conserved
    one.
    """
    rows = disc.t + 2
    nb = budget + 1
    grid = disc.grid
    c = pend.cost
    out = np.full((nb, rows), -np.inf)
    bp_i = np.full((nb, rows), -1, dtype=np.int32)
    bp_j = np.full((nb, rows), -1, dtype=np.int32)
    rmq = RangeMaxIndex(right.scores.ravel())

    window_max: dict[int, np.ndarray] = {}

    def wmax(row: int) -> np.ndarray:
        if row not in window_max:
            window_max[row] = _batched_window_max(rmq, disc, row, nb)
        return window_max[row]

    a_vals = pend.val_uncons + wmax(pend.row_uncons) if c > 0 else None
    b_vals = pend.val_cons + wmax(pend.row_cons) if c <= budget else None

    run_val = np.full(rows, -np.inf)
    run_beta = np.full(rows, -1, dtype=np.int64)
    cols = np.arange(rows)
    for b in range(nb):
        # unconserved block: i in [0, min(c, b+1)-1], i.e. beta in
        # [b-c+1, b]; reversing makes the argmax index equal i, so the
        # first maximum is the smallest i, matching the general sweep
        if c > 0:
            blo = max(b - c + 1, 0)
            block = a_vals[blo:b + 1][::-1]
            am = np.argmax(block, axis=0)
            vals = block[am, cols]
            fin = np.isfinite(vals)
            out[b][fin] = vals[fin]
            bp_i[b][fin] = am[fin]
            bp_j[b][fin] = pend.row_uncons
        # conserved block: i in [c, b], beta in [0, b-c]. The newest beta
        # carries the smallest i (= c), so it wins ties in the running max.
        if c <= b and b_vals is not None:
            nv = b_vals[b - c]
            newer = nv >= run_val
            run_val = np.where(newer, nv, run_val)
            run_beta = np.where(newer, b - c, run_beta)
            better = run_val > out[b]
            if better.any():
                out[b][better] = run_val[better]
                bp_i[b][better] = (b - run_beta[better]).astype(np.int32)
                bp_j[b][better] = pend.row_cons
    out += lam * grid[None, :]
    return CladeTable(edge_id=eid, kind="internal", scores=out,
                      bp_budget=bp_i, bp_left=bp_j)


def _grouped_left_max(left: CladeTable, disc: Discretization, k_row: int,
                      k_val: float, n_budgets: int) -> tuple[np.ndarray, np.ndarray]:
    """For a fixed right row k of value ``k_val``: per (left budget,
    output row p), the max of ``left + k_val`` over left rows j that
    combine with k onto p, and the smallest such argmax j. Groups come
    from the same windows the general sweep uses, and ``k_val`` is folded
    in before the maximum so candidate values, and therefore ties, are
    bit-identical to the general sweep's ``left[i, j] + right[beta, k]``."""
    rows = disc.t + 2
    p_of_j = disc._p_rows_for_k(k_row)
    order = np.argsort(p_of_j, kind="stable")
    sorted_p = p_of_j[order]
    # distinct output rows hit, each owning one contiguous segment
    groups, seg_starts = np.unique(sorted_p, return_index=True)
    perm = left.scores[:, order] + k_val
    seg_max = np.maximum.reduceat(perm, seg_starts, axis=1)
    # first in-segment position achieving the max = smallest original j,
    # because the stable sort keeps equal-group columns in j order
    counts = np.diff(np.append(seg_starts, rows))
    seg_of_pos = np.repeat(np.arange(groups.size), counts)
    at_max = perm == seg_max[:, seg_of_pos]
    pos = np.where(at_max, np.arange(rows)[None, :], rows)
    first = np.minimum.reduceat(pos, seg_starts, axis=1)
    vals = np.full((n_budgets, rows), -np.inf)
    jarg = np.full((n_budgets, rows), -1, dtype=np.int32)
    vals[:, groups] = seg_max
    jarg[:, groups] = order[first]
    return vals, jarg


def _combine_right_pendant(eid: int, left: CladeTable, pend: CladeTable,
                           lam: float, budget: int,
                           disc: Discretization) -> CladeTable:
    """Fast combine when the right child is a pendant edge.

    Here the pendant's configuration is fixed by the residual budget
    b - i, so left rows are grouped by the output row they reach with the
    pendant's row, and the sweep over i becomes a growing-prefix maximum
    (pendant conserved, small i) plus a short sliding window (pendant
    unconserved, large i).
    """
    rows = disc.t + 2
    nb = budget + 1
    c = pend.cost
    out = np.full((nb, rows), -np.inf)
    bp_i = np.full((nb, rows), -1, dtype=np.int32)
    bp_j = np.full((nb, rows), -1, dtype=np.int32)

    best_a = best_a_j = None
    if c > 0:
        best_a, best_a_j = _grouped_left_max(left, disc, pend.row_uncons,
                                             pend.val_uncons, nb)
    best_b = best_b_j = None
    if c <= budget:
        best_b, best_b_j = _grouped_left_max(left, disc, pend.row_cons,
                                             pend.val_cons, nb)

    run_val = np.full(rows, -np.inf)
    run_i = np.full(rows, -1, dtype=np.int32)
    run_j = np.full(rows, -1, dtype=np.int32)
    cols = np.arange(rows)
    for b in range(nb):
        # conserved block first: i in [0, b-c]. New entries carry the
        # largest i so far, so ties keep the old (smaller) i.
        if c <= b and best_b is not None:
            nv = best_b[b - c]
            newer = nv > run_val
            run_val = np.where(newer, nv, run_val)
            run_i = np.where(newer, b - c, run_i).astype(np.int32)
            run_j = np.where(newer, best_b_j[b - c], run_j)
            fin = np.isfinite(run_val)
            out[b][fin] = run_val[fin]
            bp_i[b][fin] = run_i[fin]
            bp_j[b][fin] = run_j[fin]
        # unconserved block: i in [max(0, b-c+1), b], forward argmax keeps
        # the smallest i; it may only strictly beat the conserved block
        if c > 0:
            ilo = max(0, b - c + 1)
            block = best_a[ilo:b + 1]
            am = np.argmax(block, axis=0)
            vals = block[am, cols]
            better = vals > out[b]
            if better.any():
                out[b][better] = vals[better]
                bp_i[b][better] = (ilo + am[better]).astype(np.int32)
                bp_j[b][better] = best_a_j[ilo + am, cols][better]
    out += lam * disc.grid[None, :]
    return CladeTable(edge_id=eid, kind="internal", scores=out,
                      bp_budget=bp_i, bp_left=bp_j)


def _combine_unary(eid: int, child: CladeTable, lam: float,
                   disc: Discretization) -> CladeTable:
    """Root edge over a single pendant: rows pass through unchanged."""
    scores = child.scores + lam * disc.grid[None, :]
    return CladeTable(edge_id=eid, kind="unary", scores=scores)


def combine_tables(eid: int, left: CladeTable, right: CladeTable, lam: float,
                   budget: int, disc: Discretization, *,
                   force_general: bool = False) -> tuple[CladeTable, str]:
    """Combine two child tables, picking the fastest exact route.

    Returns the table and which route ran ("fast" or "general"). All
    routes produce identical tables; ``force_general`` pins the reference
    sweep for benchmarking and for differential tests.
    """
    if not force_general and left.kind == "pendant":
        return _combine_left_pendant(eid, left, right, lam, budget, disc), "fast"
    if not force_general and right.kind == "pendant":
        return _combine_right_pendant(eid, left, right, lam, budget, disc), "fast"
    return _combine_general(eid, left, right, lam, budget, disc), "general"


def build_tables(instance: Instance, disc: Discretization, *,
                 force_general: bool = False) -> tuple[dict[int, CladeTable], dict]:
    """Build every edge's table in postorder.

    The instance must be normalized (binary tree, costs within budget).
    Returns the tables keyed by edge id and counters for how many combines
    took each route.
    """
    tree = instance.tree
    budget = int(instance.budget)
    tables: dict[int, CladeTable] = {}
    stats = {"fast_combines": 0, "general_combines": 0}
    for e in tree.edges:
        if e.taxon is not None:
            tables[e.eid] = build_pendant_table(
                e.eid, instance.taxa[e.taxon], e.length, budget, disc)
        elif len(e.children) == 1:
            tables[e.eid] = _combine_unary(
                e.eid, tables[e.children[0]], e.length, disc)
        elif len(e.children) == 2:
            left, right = e.children
            tab, route = combine_tables(e.eid, tables[left], tables[right],
                                        e.length, budget, disc,
                                        force_general=force_general)
            tables[e.eid] = tab
            stats[route + "_combines"] += 1
        else:
            raise InternalError(
                f"edge {e.eid} has {len(e.children)} children; "
                "tables need a normalized binary tree")
    return tables, stats


def backtrace(instance: Instance, tables: dict[int, CladeTable],
              disc: Discretization, budget: int, row: int) -> frozenset[str]:
    """Recover the selection behind a root table cell.

    The right child's row is reconstructed by replaying the winning
    cell's window maximum, with the same smallest-index tie rule the
    table build used.
    """
    tree = instance.tree
    selected: list[str] = []
    stack: list[tuple[int, int, int]] = [(tree.root, int(budget), int(row))]
    while stack:
        eid, b, p = stack.pop()
        tab = tables[eid]
        if not np.isfinite(tab.scores[b, p]):
            raise InternalError(
                f"backtrace hit an unreachable cell (edge {eid}, budget {b}, row {p})")
        if tab.kind == "pendant":
            if b >= tab.cost and p == tab.row_cons:
                selected.append(tab.taxon)
        elif tab.kind == "unary":
            stack.append((tree.edges[eid].children[0], b, p))
        else:
            i = int(tab.bp_budget[b, p])
            j = int(tab.bp_left[b, p])
            if i < 0 or j < 0:
                raise InternalError(
                    f"missing backpointer (edge {eid}, budget {b}, row {p})")
            left, right = tree.edges[eid].children
            beta = b - i
            lo, hi = disc._k_row(j)
            lw, hw = int(lo[p]), int(hi[p])
            if lw > hw:
                raise InternalError(
                    f"empty window during backtrace (edge {eid}, row {p})")
            seg = tables[right].scores[beta, lw:hw + 1]
            k = lw + int(np.argmax(seg))
            if not np.isfinite(tables[right].scores[beta, k]):
                raise InternalError(
                    f"non-finite window maximum during backtrace (edge {eid})")
            stack.append((left, i, j))
            stack.append((right, beta, k))
    return frozenset(selected)


@dataclass(frozen=True)
class NapxSolution:
    """Result of :func:`solve`.

    ``reported_score`` is the root table's optimum, a provable lower
    bound; ``selection.score`` re-evaluates the chosen taxa exactly on the
    original instance and is never smaller (up to float slack). ``params``
    is None when the instance is degenerate (no taxon can be helped) and
    the empty selection is returned without building tables.
    """

    selection: ConservationSet
    reported_score: float
    epsilon: float
    params: Discretization | None
    stats: dict


def solve(instance: Instance, epsilon: float = 0.1, *,
          force_general: bool = False) -> NapxSolution:
    """Approximately maximize expected diversity under the budget.

    Guarantees a selection whose true expected diversity is at least
    (1 - epsilon) times the optimum, in time polynomial in the instance
    size and 1/epsilon.

    The instance is normalized internally; the returned selection refers
    to the original taxa, is always affordable, and taxa whose cost
    exceeds the whole budget are never reported even though normalization
    keeps them around as unconservable placeholders.
    """
    if not (0.0 < epsilon < 1.0):
        raise ParameterError(
            f"epsilon must be strictly between 0 and 1, got {epsilon!r}")
    norm = normalize(instance)
    n = norm.tree.n_leaves
    try:
        min_b = min_conserved_survival(norm)
    except DegenerateInstanceError:
        sel = make_conservation_set(instance, frozenset())
        return NapxSolution(selection=sel, reported_score=sel.score,
                            epsilon=epsilon, params=None,
                            stats={"fast_combines": 0, "general_combines": 0})
    k = derive_k(n, min_b)
    disc = select_params(n, norm.tree.height, epsilon, k)
    tables, stats = build_tables(norm, disc, force_general=force_general)
    root_scores = tables[norm.tree.root].scores[norm.budget]
    m = int(np.argmax(root_scores))
    reported = float(root_scores[m])
    if not np.isfinite(reported):
        raise InternalError("no feasible root table entry; this cannot happen "
                            "on a validated instance")
    ids = backtrace(norm, tables, disc, norm.budget, m)
    kept = frozenset(t for t in ids if instance.taxa[t].c <= instance.budget)
    selection = make_conservation_set(instance, kept)
    if selection.total_cost > instance.budget:
        raise InternalError(
            f"selection cost {selection.total_cost} exceeds budget {instance.budget}")
    if selection.score < reported - 1e-6:
        raise InternalError(
            f"evaluated score {selection.score!r} fell below the reported "
            f"bound {reported!r}")
    return NapxSolution(selection=selection, reported_score=reported,
                        epsilon=epsilon, params=disc, stats=stats)

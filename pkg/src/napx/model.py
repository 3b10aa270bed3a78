"""Data model for budgeted conservation of phylogenetic diversity.

An instance couples a rooted edge-weighted tree with one taxon record per
leaf and an integer budget. Each taxon ``s`` carries an initial survival
probability ``a``, a survival probability ``b`` it would enjoy if conserved,
and an integer cost ``c``. Selecting a set S of taxa with total cost within
the budget yields the expected phylogenetic diversity

    E(PD | S) = sum over edges e of length(e) * P_e(S),

where P_e(S) is the probability that at least one leaf below e survives,
leaves surviving independently with probability ``b`` (inside S) or ``a``
(outside S).

Trees are represented as edges rather than vertices: every edge is
identified with the vertex at its lower end, and a distinguished top edge
(the "root edge", normally of length zero) sits above the root so that the
whole tree is itself a clade. Pendant edges end in a leaf and carry that
leaf's taxon id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Integral
from typing import Iterable

from .errors import DegenerateInstanceError, InputError, ValidationError

__all__ = [
    "Taxon",
    "TreeNode",
    "Edge",
    "PhyloTree",
    "Instance",
    "ConservationSet",
    "leaf",
    "inner",
    "validate_instance",
    "total_pd",
    "expected_pd",
    "edge_survival",
    "make_conservation_set",
    "normalize",
    "min_conserved_survival",
]


# ------------------------------------------------------------------------- #
#  Taxa
# ------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Taxon:
    """One leaf's conservation data.

    Parameters
    ----------
    id:
        Leaf label. Must match a pendant edge of the tree.
    a:
        Survival probability if the taxon is left alone, in [0, 1].
    b:
        Survival probability if the taxon is conserved, in [a, 1].
    c:
        Integer cost of conserving the taxon, at least 0.
    """

    id: str
    a: float
    b: float
    c: int


# ------------------------------------------------------------------------- #
#  Trees
# ------------------------------------------------------------------------- #

@dataclass
class TreeNode:
    """Mutable builder node used while assembling or rewriting a tree.

    The finished, read-only representation is :class:`PhyloTree`; parsers,
    generators and the normalizer all shape their work as ``TreeNode``
    structures first and convert once at the end.
    """

    length: float = 0.0
    children: list["TreeNode"] = field(default_factory=list)
    taxon: str | None = None


def leaf(taxon: str, length: float) -> TreeNode:
    """Builder shorthand for a pendant edge."""
    return TreeNode(length=float(length), taxon=str(taxon))


def inner(length: float, *children: TreeNode) -> TreeNode:
    """Builder shorthand for an interior edge with the given child edges."""
    return TreeNode(length=float(length), children=list(children))


@dataclass(frozen=True)
class Edge:
    """One edge of a finished tree.

    ``children`` holds the ids of the edges directly below this one; a
    pendant edge has no children and carries the ``taxon`` id of its leaf.
    ``height`` counts edges on the longest downward path, so pendants have
    height 1 and the root edge's height is the height of the whole tree.
    """

    eid: int
    length: float
    children: tuple[int, ...]
    taxon: str | None
    height: int


def _contract_below(top: TreeNode) -> None:
    """Collapse unary interior chains below ``top``, summing lengths.

    Exact for expected diversity: an edge of length u over an edge of
    length v with the same clade contributes (u + v) times one survival
    probability. Iterative so deep caterpillars stay within recursion
    limits.
    """
    stack = [top]
    while stack:
        cur = stack.pop()
        new_children = []
        for ch in cur.children:
            while ch.taxon is None and len(ch.children) == 1:
                only = ch.children[0]
                only.length += ch.length
                ch = only
            new_children.append(ch)
        cur.children = new_children
        stack.extend(new_children)


def _min_labels(top: TreeNode) -> dict[int, str]:
    """Smallest leaf label below each node, keyed by ``id(node)``."""
    lab: dict[int, str] = {}
    stack: list[tuple[TreeNode, bool]] = [(top, False)]
    while stack:
        node, done = stack.pop()
        if not done:
            stack.append((node, True))
            stack.extend((ch, False) for ch in node.children)
        elif node.taxon is not None:
            lab[id(node)] = node.taxon
        else:
            lab[id(node)] = min((lab[id(ch)] for ch in node.children), default="")
    return lab


@dataclass(eq=True)
class PhyloTree:
    """A rooted tree stored as a flat tuple of edges in postorder.

    Edge ids are postorder positions, so iterating ``edges`` in order always
    visits children before parents. The last edge is the root edge.
    """

    edges: tuple[Edge, ...]
    root: int

    @staticmethod
    def from_node(top: TreeNode) -> "PhyloTree":
        """Build a tree from nested :class:`TreeNode` structures.

        The top node becomes the root edge. Unary chains are contracted
        with their lengths summed (this never changes expected diversity);
        a bare leaf at the top is wrapped under a zero-length root edge.

        The result is canonical: children are ordered by the smallest leaf
        label in their subtree and edge ids are assigned by a postorder
        walk in that order, so two builder trees that differ only in child
        order produce equal ``PhyloTree`` values.
        """
        if top.taxon is not None:
            top = TreeNode(length=0.0, children=[top])
        _contract_below(top)
        while top.taxon is None and len(top.children) == 1 and top.children[0].taxon is None:
            only = top.children[0]
            top.length += only.length
            top.children = only.children

        lab = _min_labels(top)
        edges: list[Edge] = []
        eid_of: dict[int, int] = {}
        stack: list[tuple[TreeNode, bool]] = [(top, False)]
        while stack:
            node, done = stack.pop()
            ordered = sorted(node.children, key=lambda ch: lab[id(ch)])
            if not done:
                stack.append((node, True))
                stack.extend((ch, False) for ch in reversed(ordered))
            else:
                child_ids = tuple(eid_of[id(ch)] for ch in ordered)
                if child_ids:
                    height = 1 + max(edges[c].height for c in child_ids)
                else:
                    height = 1
                eid_of[id(node)] = len(edges)
                edges.append(Edge(
                    eid=len(edges),
                    length=float(node.length),
                    children=child_ids,
                    taxon=node.taxon,
                    height=height,
                ))
        return PhyloTree(edges=tuple(edges), root=len(edges) - 1)

    def to_node(self) -> TreeNode:
        """Inverse of :meth:`from_node`; used by rewriting passes."""
        nodes: list[TreeNode] = []
        for e in self.edges:
            nodes.append(TreeNode(
                length=e.length,
                children=[nodes[c] for c in e.children],
                taxon=e.taxon,
            ))
        return nodes[self.root]

    @cached_property
    def leaf_edges(self) -> dict[str, int]:
        """Taxon id to pendant edge id. Duplicate labels raise."""
        out: dict[str, int] = {}
        for e in self.edges:
            if e.taxon is not None:
                if e.taxon in out:
                    raise InputError(f"duplicate leaf label {e.taxon!r}")
                out[e.taxon] = e.eid
        return out

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_edges)

    @property
    def height(self) -> int:
        """Height of the tree in edges, root edge included."""
        return self.edges[self.root].height

    @property
    def root_edge(self) -> Edge:
        return self.edges[self.root]

    def is_binary(self) -> bool:
        """True when every interior edge has two children.

        The root edge may have a single child only in the one-leaf tree.
        """
        for e in self.edges:
            n = len(e.children)
            if n == 0:
                continue
            if n == 2:
                continue
            if e.eid == self.root and n == 1 and self.n_leaves == 1:
                continue
            return False
        return True


# ------------------------------------------------------------------------- #
#  Instances and selections
# ------------------------------------------------------------------------- #

@dataclass(eq=True)
class Instance:
    """A conservation problem: tree, taxa and an integer budget."""

    tree: PhyloTree
    taxa: dict[str, Taxon]
    budget: int


@dataclass(frozen=True)
class ConservationSet:
    """A chosen set of taxa with its cost and expected diversity."""

    selected: frozenset[str]
    total_cost: int
    score: float


def _coerce_ids(selected: "ConservationSet | Iterable[str]") -> frozenset[str]:
    if isinstance(selected, ConservationSet):
        return selected.selected
    return frozenset(selected)


def validate_instance(instance: Instance) -> None:
    """Check semantic validity, reporting every violation at once.

    Raises
    ------
    ValidationError
        Listing all problems found: negative branch lengths, probabilities
        out of range or ordered a > b, non-integer or negative costs, a
        non-integer or negative budget, and any mismatch between the
        tree's leaf labels and the taxon table.
    """
    problems: list[str] = []
    tree = instance.tree

    try:
        bound = tree.leaf_edges
    except InputError as exc:
        raise ValidationError([str(exc)]) from exc

    for e in tree.edges:
        if not math.isfinite(e.length) or e.length < 0:
            problems.append(f"edge {e.eid}: negative or non-finite length {e.length!r}")
        if e.taxon is None and not e.children:
            problems.append(f"edge {e.eid}: interior edge with no children")

    for tid, tx in instance.taxa.items():
        if tid != tx.id:
            problems.append(f"taxon {tid!r}: key does not match record id {tx.id!r}")
        if not (0.0 <= tx.a <= 1.0):
            problems.append(f"taxon {tx.id!r}: a={tx.a!r} outside [0, 1]")
        if not (0.0 <= tx.b <= 1.0):
            problems.append(f"taxon {tx.id!r}: b={tx.b!r} outside [0, 1]")
        if tx.a > tx.b:
            problems.append(f"taxon {tx.id!r}: a={tx.a!r} exceeds b={tx.b!r}")
        if not isinstance(tx.c, Integral) or isinstance(tx.c, bool) or tx.c < 0:
            problems.append(f"taxon {tx.id!r}: cost {tx.c!r} is not a non-negative integer")

    missing = sorted(set(bound) - set(instance.taxa))
    extra = sorted(set(instance.taxa) - set(bound))
    for tid in missing:
        problems.append(f"leaf {tid!r} has no taxon record")
    for tid in extra:
        problems.append(f"taxon {tid!r} is not a leaf of the tree")

    if not isinstance(instance.budget, Integral) or isinstance(instance.budget, bool) \
            or instance.budget < 0:
        problems.append(f"budget {instance.budget!r} is not a non-negative integer")

    if problems:
        raise ValidationError(problems)


# ------------------------------------------------------------------------- #
#  Scoring
# ------------------------------------------------------------------------- #

def total_pd(instance: Instance) -> float:
    """Sum of all branch lengths, the diversity of the full tree.

    The root edge is included; it normally contributes zero.
    """
    return float(sum(e.length for e in instance.tree.edges))


def _death_products(instance: Instance, selected: frozenset[str]) -> list[float]:
    """Per-edge probability that every leaf below the edge dies.

    Computed bottom-up: a pendant's death probability is one minus its
    leaf's survival, and an interior edge dies exactly when all its child
    edges die, so products multiply up the tree.
    """
    taxa = instance.taxa
    unknown = sorted(selected - set(taxa))
    if unknown:
        raise InputError("unknown taxon ids: " + ", ".join(repr(u) for u in unknown))
    death = [0.0] * len(instance.tree.edges)
    for e in instance.tree.edges:
        if e.taxon is not None:
            tx = taxa[e.taxon]
            p = tx.b if e.taxon in selected else tx.a
            death[e.eid] = 1.0 - p
        else:
            d = 1.0
            for c in e.children:
                d *= death[c]
            death[e.eid] = d
    return death


def expected_pd(instance: Instance, selected: "ConservationSet | Iterable[str]") -> float:
    """Expected phylogenetic diversity of the tree given a selection.

    Parameters
    ----------
    instance:
        The problem instance. Feasibility of the selection is not checked
        here; this is a pure scoring function.
    selected:
        Taxon ids to treat as conserved, or a :class:`ConservationSet`.

    Returns
    -------
    float
        A value between 0 and :func:`total_pd` of the instance.
    """
    sel = _coerce_ids(selected)
    death = _death_products(instance, sel)
    return float(sum(e.length * (1.0 - death[e.eid]) for e in instance.tree.edges))


def edge_survival(instance: Instance, selected: "ConservationSet | Iterable[str]",
                  edge: "Edge | int") -> float:
    """Probability that the clade below ``edge`` keeps at least one leaf."""
    sel = _coerce_ids(selected)
    eid = edge.eid if isinstance(edge, Edge) else int(edge)
    if not (0 <= eid < len(instance.tree.edges)):
        raise InputError(f"no edge with id {eid}")
    death = _death_products(instance, sel)
    return 1.0 - death[eid]


def make_conservation_set(instance: Instance,
                          selected: "ConservationSet | Iterable[str]") -> ConservationSet:
    """Bundle a selection with its total cost and evaluated score."""
    sel = _coerce_ids(selected)
    unknown = sorted(sel - set(instance.taxa))
    if unknown:
        raise InputError("unknown taxon ids: " + ", ".join(repr(u) for u in unknown))
    cost = sum(instance.taxa[t].c for t in sel)
    return ConservationSet(selected=sel, total_cost=int(cost),
                           score=expected_pd(instance, sel))


# ------------------------------------------------------------------------- #
#  Normalization
# ------------------------------------------------------------------------- #

def _binarize(top: TreeNode) -> TreeNode:
    """Resolve polytomies by repeatedly pairing the first two children
    under a fresh zero-length edge. Expected diversity is unchanged."""
    stack = [top]
    while stack:
        node = stack.pop()
        while len(node.children) > 2:
            merged = TreeNode(length=0.0, children=node.children[:2])
            node.children = [merged] + node.children[2:]
        stack.extend(node.children)
    return top


def normalize(instance: Instance) -> Instance:
    """Put an instance into the solver's canonical form.

    Steps, in order:

    1. validate (see :func:`validate_instance`);
    2. every taxon priced above the budget becomes unconservable:
       its cost drops to 0 and its conserved survival is clamped to ``a``,
       so selecting it is a no-op rather than an impossibility;
    3. costs are divided by their collective gcd and the budget is scaled
       by the same factor, rounding down (this never excludes a feasible
       selection, since feasible totals are multiples of the gcd);
    4. polytomies are resolved with zero-length edges.

    The root edge is a structural constant of :class:`PhyloTree`, so no
    separate attachment step is needed. Normalizing twice returns an
    instance equal to normalizing once.
    """
    validate_instance(instance)
    budget = int(instance.budget)

    taxa = {}
    for tid, tx in instance.taxa.items():
        if tx.c > budget:
            taxa[tid] = Taxon(id=tx.id, a=tx.a, b=tx.a, c=0)
        else:
            taxa[tid] = Taxon(id=tx.id, a=tx.a, b=tx.b, c=int(tx.c))

    positive = [tx.c for tx in taxa.values() if tx.c > 0]
    if positive:
        g = math.gcd(*positive)
        if g > 1:
            taxa = {tid: Taxon(id=tx.id, a=tx.a, b=tx.b, c=tx.c // g)
                    for tid, tx in taxa.items()}
            budget //= g

    tree = instance.tree
    if not tree.is_binary():
        tree = PhyloTree.from_node(_binarize(tree.to_node()))

    return Instance(tree=tree, taxa=taxa, budget=budget)


def min_conserved_survival(instance: Instance) -> float:
    """Smallest positive conserved survival among the taxa.

    Raises
    ------
    DegenerateInstanceError
        When every taxon has b = 0, so conservation cannot help anything.
    """
    positive = [tx.b for tx in instance.taxa.values() if tx.b > 0]
    if not positive:
        raise DegenerateInstanceError("every taxon has zero conserved survival")
    return min(positive)

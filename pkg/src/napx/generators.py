"""Seeded random instance generators.

Two topology families are supported:

``yule``
    A Yule (pure-birth) tree: starting from a two-leaf cherry, a uniformly
    random extant leaf is repeatedly split into a cherry until ``n`` leaves
    exist.  Expected height grows logarithmically in ``n``, so these trees
    are shallow and well balanced on average.

``caterpillar``
    The deterministic maximally unbalanced comb ``((...(t0,t1),t2)...)``,
    which stresses worst-case table depth.

Determinism contract
--------------------
All randomness flows through one ``numpy`` Philox generator keyed by
``seed``, and draws happen in a fixed, documented order:

1. topology (Yule leaf choices; none for caterpillar),
2. edge lengths, in preorder over the built tree, each drawn as
   ``1 - U[0, 1)`` so lengths lie in ``(0, 1]`` (the root edge keeps
   length 0),
3. per-taxon attributes in label order: survival floor ``a``, then
   conserved survival ``b`` (forced to be at least ``a``), then an
   integer cost ``c``.

Leaves are labelled ``t00, t01, ...`` in builder preorder, zero padded so
label order equals draw order.  Lengths and probabilities are rounded to
12 significant digits so generated instances survive a serialization
round trip bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import Instance, PhyloTree, Taxon, TreeNode, validate_instance
from .newick import round12

TOPOLOGIES = ("yule", "caterpillar")


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one generated instance.

    Parameters
    ----------
    n : int
        Number of leaves, at least 1.
    topology : str
        One of ``"yule"`` or ``"caterpillar"``.
    seed : int
        Philox key; equal specs generate equal instances.
    a_range, b_range : (float, float)
        Closed ranges for the unconserved and conserved survival
        probabilities.  ``b`` is drawn from ``[max(a, b_lo), b_hi]`` so
        that ``a <= b`` always holds, which requires ``a_hi <= b_hi``.
    c_range : (int, int)
        Inclusive range for integer protection costs.
    budget : int or None
        Total budget; ``None`` means a third of the summed costs,
        rounded up.
    """

    n: int
    topology: str
    seed: int
    a_range: tuple[float, float] = (0.0, 0.3)
    b_range: tuple[float, float] = (0.5, 1.0)
    c_range: tuple[int, int] = (1, 5)
    budget: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"need at least one leaf, got n={self.n}")
        if self.topology not in TOPOLOGIES:
            raise InputError(f"unknown topology {self.topology!r}")
        a_lo, a_hi = self.a_range
        b_lo, b_hi = self.b_range
        if not (0.0 <= a_lo <= a_hi <= 1.0):
            raise InputError(f"bad a_range {self.a_range!r}")
        if not (0.0 <= b_lo <= b_hi <= 1.0):
            raise InputError(f"bad b_range {self.b_range!r}")
        if a_hi > b_hi:
            raise InputError(
                "a_range upper bound exceeds b_range upper bound, "
                "cannot guarantee a <= b"
            )
        c_lo, c_hi = self.c_range
        if not (0 <= c_lo <= c_hi):
            raise InputError(f"bad c_range {self.c_range!r}")
        if self.budget is not None and self.budget < 0:
            raise InputError(f"budget must be nonnegative, got {self.budget}")

    @property
    def name(self) -> str:
        return f"{self.topology}-n{self.n}-s{self.seed}"


def _yule_topology(n: int, rng: np.random.Generator) -> TreeNode:
    root = TreeNode()
    if n == 1:
        root.children.append(TreeNode())
        return root
    first, second = TreeNode(), TreeNode()
    root.children.extend([first, second])
    leaves = [first, second]
    while len(leaves) < n:
        idx = int(rng.integers(0, len(leaves)))
        node = leaves[idx]
        new_a, new_b = TreeNode(), TreeNode()
        node.children.extend([new_a, new_b])
        leaves[idx] = new_a
        leaves.append(new_b)
    return root


def _caterpillar_topology(n: int) -> TreeNode:
    if n == 1:
        root = TreeNode()
        root.children.append(TreeNode())
        return root
    spine = TreeNode()
    spine.children.extend([TreeNode(), TreeNode()])
    for _ in range(n - 2):
        parent = TreeNode()
        parent.children.extend([spine, TreeNode()])
        spine = parent
    return spine


def _preorder(root: TreeNode) -> list[TreeNode]:
    out: list[TreeNode] = []
    stack = [root]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(node.children))
    return out


def generate(spec: GenSpec) -> Instance:
    """Build the instance determined by ``spec``.

    Returns a validated :class:`~napx.model.Instance`; its canonical tree
    may reorder children relative to the raw builder topology, but labels,
    lengths, and taxa are unaffected.
    """

    rng = np.random.Generator(np.random.Philox(key=spec.seed))

    if spec.topology == "yule":
        root = _yule_topology(spec.n, rng)
    else:
        root = _caterpillar_topology(spec.n)

    order = _preorder(root)
    for node in order[1:]:
        node.length = round12(1.0 - float(rng.uniform()))

    leaf_nodes = [node for node in order if not node.children]
    width = max(2, len(str(spec.n - 1)))
    a_lo, a_hi = spec.a_range
    b_lo, b_hi = spec.b_range
    c_lo, c_hi = spec.c_range
    taxa: dict[str, Taxon] = {}
    for i, node in enumerate(leaf_nodes):
        label = f"t{i:0{width}d}"
        a = round12(float(rng.uniform(a_lo, a_hi)))
        b = round12(float(rng.uniform(max(a, b_lo), b_hi)))
        c = int(rng.integers(c_lo, c_hi + 1))
        node.taxon = label
        taxa[label] = Taxon(id=label, a=a, b=b, c=c)

    if spec.budget is not None:
        budget = spec.budget
    else:
        total = sum(t.c for t in taxa.values())
        budget = (total + 2) // 3

    instance = Instance(
        tree=PhyloTree.from_node(root), taxa=taxa, budget=budget
    )
    validate_instance(instance)
    return instance


def gen_yule(n: int, seed: int, **kwargs) -> Instance:
    """Shorthand for ``generate(GenSpec(n, "yule", seed, **kwargs))``."""

    return generate(GenSpec(n=n, topology="yule", seed=seed, **kwargs))


def gen_caterpillar(n: int, seed: int, **kwargs) -> Instance:
    """Shorthand for ``generate(GenSpec(n, "caterpillar", seed, **kwargs))``."""

    return generate(GenSpec(n=n, topology="caterpillar", seed=seed, **kwargs))

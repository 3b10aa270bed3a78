"""Instance builders shared by the test modules."""

from __future__ import annotations

from pathlib import Path

from napx.model import Instance, PhyloTree, Taxon, inner, leaf

DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str) -> str:
    return str(DATA_DIR / name)


def make_instance(top, taxa_rows, budget: int) -> Instance:
    """Build an instance from a builder tree and (id, a, b, c) rows."""
    taxa = {tid: Taxon(id=tid, a=a, b=b, c=c) for tid, a, b, c in taxa_rows}
    return Instance(tree=PhyloTree.from_node(top), taxa=taxa, budget=budget)


def cherry() -> Instance:
    """Two leaves, distinct values; optimum under budget 1 is {y}."""
    return make_instance(
        inner(0.0, leaf("x", 1.0), leaf("y", 2.0)),
        [("x", 0.5, 0.9, 1), ("y", 0.5, 0.8, 1)],
        budget=1,
    )


def tie_cherry() -> Instance:
    """Symmetric cherry: {x} and {y} score the same, budget allows one."""
    return make_instance(
        inner(0.0, leaf("x", 1.0), leaf("y", 1.0)),
        [("x", 0.5, 0.9, 1), ("y", 0.5, 0.9, 1)],
        budget=1,
    )


def pg_example() -> Instance:
    """Unary stem over a cherry; the stem folds into the root edge."""
    return make_instance(
        inner(0.0, inner(2.0, leaf("x", 5.0), leaf("y", 1.0))),
        [("x", 0.0, 1.0, 1), ("y", 0.0, 1.0, 1)],
        budget=1,
    )


def fig1_instance() -> Instance:
    """Four-leaf caterpillar where local per-clade choices go wrong.

    The optimum under budget 3 is {w, y} with expected diversity 230;
    a per-clade greedy locks in z (its pendant edge is long) and lands on
    {w, z} with 190.
    """
    top = inner(
        0.0,
        leaf("w", 120.0),
        inner(
            100.0,
            leaf("x", 1.0),
            inner(10.0, leaf("y", 0.0), leaf("z", 30.0)),
        ),
    )
    rows = [
        ("w", 0.0, 1.0, 2),
        ("x", 0.0, 1.0, 2),
        ("y", 0.0, 1.0, 1),
        ("z", 0.0, 0.5, 1),
    ]
    return make_instance(top, rows, budget=3)


def polytomy_instance() -> Instance:
    """One root with three children; normalization must binarize it."""
    return make_instance(
        inner(0.0, leaf("a", 1.0), leaf("b", 2.0), leaf("c", 3.0)),
        [("a", 0.1, 0.9, 1), ("b", 0.2, 0.8, 2), ("c", 0.3, 0.7, 3)],
        budget=3,
    )

"""Tests for the seeded instance generators."""

import numpy as np
import pytest

from napx.errors import InputError
from napx.generators import GenSpec, gen_caterpillar, gen_yule, generate
from napx.model import validate_instance


def test_determinism():
    a = gen_yule(12, 7)
    b = gen_yule(12, 7)
    assert a == b
    assert gen_yule(12, 8) != a


def test_labels_and_count():
    inst = gen_yule(11, 0)
    assert sorted(inst.taxa) == [f"t{i:02d}" for i in range(11)]
    assert inst.tree.n_leaves == 11
    wide = gen_yule(120, 0)
    assert "t000" in wide.taxa and "t119" in wide.taxa


def test_caterpillar_shape():
    inst = gen_caterpillar(6, 0)
    assert inst.tree.height == 6          # root edge plus the full spine
    assert inst.tree.is_binary()


def test_single_leaf():
    inst = gen_yule(1, 3)
    assert inst.tree.n_leaves == 1
    validate_instance(inst)


def test_attribute_ranges():
    inst = gen_yule(40, 5)
    for tx in inst.taxa.values():
        assert 0.0 <= tx.a <= 0.3
        assert tx.a <= tx.b <= 1.0
        assert tx.b >= 0.5
        assert 1 <= tx.c <= 5
    for e in inst.tree.edges:
        if e.eid != inst.tree.root:
            assert 0.0 < e.length <= 1.0
    assert inst.tree.root_edge.length == 0.0


def test_default_budget_is_third_of_cost():
    inst = gen_yule(9, 2)
    total = sum(tx.c for tx in inst.taxa.values())
    assert inst.budget == (total + 2) // 3


def test_budget_override():
    assert gen_yule(5, 1, budget=17).budget == 17


def test_generated_instances_validate():
    for seed in range(5):
        validate_instance(gen_yule(10, seed))
        validate_instance(gen_caterpillar(10, seed))


def test_custom_ranges():
    inst = generate(GenSpec(n=6, topology="yule", seed=0,
                            a_range=(0.0, 0.0), b_range=(1.0, 1.0),
                            c_range=(2, 2)))
    for tx in inst.taxa.values():
        assert tx.a == 0.0 and tx.b == 1.0 and tx.c == 2


@pytest.mark.parametrize("kwargs", [
    dict(n=0),
    dict(n=3, topology="star"),
    dict(n=3, a_range=(0.5, 0.2)),
    dict(n=3, a_range=(0.0, 0.9), b_range=(0.1, 0.5)),
    dict(n=3, c_range=(-1, 2)),
    dict(n=3, budget=-1),
])
def test_bad_specs_rejected(kwargs):
    base = dict(n=4, topology="yule", seed=0)
    base.update(kwargs)
    with pytest.raises(InputError):
        generate(GenSpec(**base))


def test_yule_heights_stay_logarithmic():
    heights = [gen_yule(50, seed).tree.height for seed in range(30)]
    assert float(np.mean(heights)) <= 4 * np.log2(50)

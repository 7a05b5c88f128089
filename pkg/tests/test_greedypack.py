import random
from math import log2

import pytest

from packminer.depgraph import DependencyGraph
from packminer.dataset import BinaryDataset
from packminer.dtree import TreeModel, split_tree, trivial_tree
from packminer.greedypack import GreedyTrace, best_split_for_tree, greedy_pack
from packminer.mdlcost import model_cost, tree_cost
from packminer.synth import chain_toy, independent_toy

from conftest import A, B, C, correlated_dataset, random_dataset
from oracles import brute_force_depth1_model, leaf_bits


def test_d0_stays_trivial(d0):
    model, cost = greedy_pack(d0)
    assert all(t.is_trivial() for t in model.trees)
    assert cost.total == pytest.approx(3 * 6.6865005271832184, abs=1e-9)


def test_d0_best_split_does_not_pay(d0):
    tree = trivial_tree(d0, B)
    assert tree_cost(tree, 3).total == pytest.approx(6.6865005271832184, abs=1e-9)
    split = split_tree(d0, tree, (), A)
    assert tree_cost(split, 3).total == pytest.approx(1 + log2(3) + 2 * leaf_bits([0, 1], [1, 0]), abs=1e-9)
    assert best_split_for_tree(d0, tree, DependencyGraph(3)) is None


def test_single_attribute_has_no_split():
    ds = BinaryDataset.from_matrix([[1], [0], [1]])
    assert best_split_for_tree(ds, trivial_tree(ds, 0), DependencyGraph(1)) is None
    model, _ = greedy_pack(ds)
    assert model.trees[0].is_trivial()


def test_gain_matches_full_recomputation():
    ds = chain_toy(seed=3)
    tree = trivial_tree(ds, 2)
    cand = best_split_for_tree(ds, tree, DependencyGraph(ds.n_attrs))
    assert cand is not None and cand.attr in (1, 3)
    after = split_tree(ds, tree, cand.leaf, cand.attr)
    K = ds.n_attrs
    assert cand.gain == pytest.approx(tree_cost(after, K).total - tree_cost(tree, K).total, abs=1e-9)


def test_blocked_attribute_is_skipped():
    ds = chain_toy(seed=3)
    g = DependencyGraph(ds.n_attrs, [(1, 2), (3, 2)])
    cand = best_split_for_tree(ds, trivial_tree(ds, 2), g)
    assert cand is None or cand.attr not in (1, 3)


def test_random_models_are_acyclic_and_consistent():
    rng = random.Random(2)
    for _ in range(12):
        ds = correlated_dataset(rng, rng.randint(30, 200), rng.randint(2, 7))
        model, cost = greedy_pack(ds, check=True)
        assert model.graph().is_acyclic()
        assert cost.total == pytest.approx(model_cost(model).total)
        assert cost.total <= model_cost(TreeModel.trivial(ds)).total + 1e-9


def test_two_attributes_reach_the_optimum():
    rng = random.Random(7)
    full = {(), (0,), (1,), (0, 1)}
    for _ in range(15):
        ds = correlated_dataset(rng, rng.randint(10, 80), 2)
        _, cost = greedy_pack(ds)
        best = brute_force_depth1_model(ds.rows(), 2, full)
        assert cost.total == pytest.approx(best, abs=1e-6)


def test_cache_does_not_change_the_result():
    rng = random.Random(4)
    datasets = [correlated_dataset(rng, 150, 8) for _ in range(5)] + [chain_toy(seed=1)]
    for ds in datasets:
        t_on, t_off = GreedyTrace([]), GreedyTrace([])
        m_on, c_on = greedy_pack(ds, use_cache=True, trace=t_on)
        m_off, c_off = greedy_pack(ds, use_cache=False, trace=t_off)
        assert m_on.to_json() == m_off.to_json()
        assert c_on.total == c_off.total
        assert t_on.evaluations <= t_off.evaluations


def test_independent_toy_compresses_nothing():
    ds = independent_toy(seed=0)
    model, cost = greedy_pack(ds)
    trivial = model_cost(TreeModel.trivial(ds)).total
    assert cost.total <= trivial
    assert cost.total / trivial > 0.99


def test_chain_toy_compresses_about_half():
    model, cost = greedy_pack(chain_toy(seed=0))
    trivial = model_cost(TreeModel.trivial(chain_toy(seed=0))).total
    assert 0.45 < cost.total / trivial < 0.6
    assert model.n_nontrivial() >= 8

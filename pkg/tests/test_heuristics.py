import itertools
import random

import pytest

from bsf.errors import DisconnectedGraph, NotATree
from bsf.graph import WeightedGraph, forest_from_edges, kruskal_mst
from bsf.heuristics import (ColumnPool, heuristic_bnb, k_approx, mskf_of_spanning_tree, pool_target, seed_columns,
                            seeding_time_limit, tree_mskf)
from bsf.instances import (InstanceSpec, bad_family, complete_graph, example_graph, generate, path_graph, spider,
                           star_graph)
from bsf.models import forest_lower_bound
from bsf.oracle import enumerate_dominant_trees, exact_minmax

from conftest import small_suite


def test_k_approx_examples():
    assert k_approx(path_graph([5, 1, 5]), 2).value_minmax == 6
    f = k_approx(example_graph(), 2)
    assert f.k == 2 and f.value_minmax == 6 <= 2 * 4


@pytest.mark.parametrize("k", range(2, 7))
def test_spider_is_tight(k):
    g = spider(k)
    assert k_approx(g, k).value_minmax == 2 * k
    assert exact_minmax(g, k, max_n=18)[0] == 2


def test_k_approx_rejects_disconnected():
    with pytest.raises(DisconnectedGraph):
        k_approx(WeightedGraph(4, ((0, 1, 1), (2, 3, 1))), 2)


def _removal_optimum(t, k):
    return min(forest_from_edges(t, set(range(t.m)) - set(c)).value_minmax
               for c in itertools.combinations(range(t.m), k - 1))


def test_tree_mskf_examples():
    assert tree_mskf(path_graph([1, 1, 1]), 2).value_minmax == 1
    assert tree_mskf(star_graph([3, 1, 1]), 2).value_minmax == 2
    with pytest.raises(NotATree):
        tree_mskf(complete_graph(3), 2)


def _random_tree(rng, n):
    edges = [(rng.randrange(v), v, rng.randint(0, 20)) for v in range(1, n)]
    perm = list(range(n))
    rng.shuffle(perm)
    return WeightedGraph(n, tuple((perm[u], perm[v], w) for u, v, w in edges))


def test_tree_mskf_matches_removal_enumeration():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(2, 12)
        t = _random_tree(rng, n)
        k = rng.randint(1, min(4, n))
        f = tree_mskf(t, k)
        assert f.k == k
        assert f.value_minmax == _removal_optimum(t, k)


@pytest.mark.parametrize("k", (4, 6))
@pytest.mark.parametrize("tau", (2, 10, 100))
def test_bad_family_mst_partition(k, tau):
    g = bad_family(k, tau)
    f = mskf_of_spanning_tree(g, kruskal_mst(g), k)
    assert f.value_minmax == k * (tau + 1) // 2 + 1


def test_heuristic_examples():
    h = heuristic_bnb(example_graph(), 2)
    assert h.ub == 4 and h.exhausted
    h.forest.validate(example_graph(), 2)
    g = path_graph([4, 2, 7, 1, 3])
    assert heuristic_bnb(g, 3).ub == tree_mskf(g, 3).value_minmax
    g, _ = generate(InstanceSpec(8, 0.5, 1, seed=2))
    h = heuristic_bnb(g, 1)
    assert h.ub == kruskal_mst(g).weight and h.nodes == 1


def test_heuristic_is_not_always_exact():
    # a concrete instance where no MST of an edge-deleted subgraph splits optimally
    g, k = generate(InstanceSpec(8, 0.5, 3, seed=4))
    assert heuristic_bnb(g, k).ub == 53
    assert exact_minmax(g, k)[0] == 51


def test_bounds_on_small_suite():
    for _, g, k in small_suite(count=40, ns=range(5, 10)):
        opt = exact_minmax(g, k)[0]
        assert forest_lower_bound(g, k) <= opt
        h = heuristic_bnb(g, k)
        assert opt <= h.ub <= k_approx(g, k).value_minmax
        # pool trees obey the UB active when they were stored, which never exceeds the first forest's value
        first = mskf_of_spanning_tree(g, kruskal_mst(g), k).value_minmax
        for t in h.pool:
            t.validate(g)
            assert t.weight <= first


def test_mst_share_is_not_a_lower_bound():
    # a k-forest drops k-1 edges, so w(MST)/k can exceed the optimum; the search uses it only to order nodes
    g = WeightedGraph(5, ((0, 1, 63), (0, 3, 52), (1, 2, 39), (1, 4, 62), (3, 4, 46)))
    assert -(-kruskal_mst(g).weight // 2) == 100
    assert exact_minmax(g, 2)[0] == 98 >= forest_lower_bound(g, 2)


def test_pool_deduplicates_and_respects_ub():
    pool = ColumnPool()
    t = kruskal_mst(example_graph())
    assert pool.add(t) and not pool.add(t)
    assert not pool.add(t, ub=t.weight - 1)
    assert len(pool) == 1 and t in pool


def test_pool_target_and_time_limit():
    assert pool_target(20, 2) == 8192
    assert pool_target(50, 10) == 4096
    assert seeding_time_limit(20) == 1.0
    assert seeding_time_limit(30) == pytest.approx(3.0)
    assert seeding_time_limit(50) == pytest.approx(27.0)


def test_seeding_saturates_on_k4():
    g = WeightedGraph(4, ((0, 1, 1), (0, 2, 2), (0, 3, 3), (1, 2, 4), (1, 3, 5), (2, 3, 6)))
    h = heuristic_bnb(g, 2)
    pool = seed_columns(g, 2, h.ub, h.pool, rng_seed=0)
    want = {t.key for t in enumerate_dominant_trees(g, h.ub)}
    got = {t.key for t in pool}
    assert got <= want
    # every dominant tree within the bound is reachable by single-vertex moves
    assert got == want
    assert all(t.weight <= h.ub for t in pool)


def test_seeding_is_deterministic():
    g, k = generate(InstanceSpec(12, 0.4, 3, seed=5))
    a = seed_columns(g, k, 10**6, heuristic_bnb(g, k).pool, rng_seed=3, target=300)
    b = seed_columns(g, k, 10**6, heuristic_bnb(g, k).pool, rng_seed=3, target=300)
    assert [t.key for t in a] == [t.key for t in b]
    assert len(a) == 300

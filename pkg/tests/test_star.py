import itertools
import random

import pytest

from bbext.star import NOSTAR, PartyGraph, StarResult, derive_fe, max_matching, star


def brute_force_max_matching(g: PartyGraph) -> int:
    """Recursive enumeration of all matchings; exponential, test oracle only."""
    edges = g.edges()

    def rec(idx: int, used: frozenset[int]) -> int:
        best = 0
        for i in range(idx, len(edges)):
            u, v = edges[i]
            if u not in used and v not in used:
                best = max(best, 1 + rec(i + 1, used | {u, v}))
        return best

    return rec(0, frozenset())


def random_graph(n: int, p: float, rng: random.Random) -> PartyGraph:
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
             if rng.random() < p]
    return PartyGraph.from_edges(n, edges)


def test_graph_validation():
    with pytest.raises(ValueError):
        PartyGraph(n=2, rows=(1, 0))  # self loop on vertex 1
    with pytest.raises(ValueError):
        PartyGraph(n=2, rows=(2, 0))  # asymmetric
    with pytest.raises(ValueError):
        PartyGraph.from_edges(2, [(1, 1)])


def test_empty_graph_empty_matching():
    g = PartyGraph.from_edges(4, [])
    assert max_matching(g) == frozenset()


def test_odd_cycle_matching_size_two():
    c5 = PartyGraph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)])
    assert len(max_matching(c5)) == 2


def test_matching_cardinality_vs_brute_force():
    rng = random.Random(0)
    for trial in range(300):
        n = rng.randint(1, 10)
        g = random_graph(n, rng.choice([0.15, 0.3, 0.5, 0.8]), rng)
        m = max_matching(g)
        used = [v for e in m for v in e]
        assert len(set(used)) == len(used), "matching edges must be disjoint"
        for u, v in m:
            assert g.has_edge(u, v)
        assert len(m) == brute_force_max_matching(g)


def test_matching_is_lexicographically_canonical():
    rng = random.Random(5)
    for trial in range(60):
        n = rng.randint(2, 7)
        g = random_graph(n, 0.5, rng)
        got = tuple(sorted(max_matching(g)))
        best = len(got)
        candidates = []
        edges = g.edges()
        for subset in itertools.combinations(edges, best):
            used = [v for e in subset for v in e]
            if len(set(used)) == len(used):
                candidates.append(tuple(sorted(subset)))
        if candidates:
            assert got == min(candidates)
        else:
            assert best == 0


def test_star_on_complete_graph_returns_everyone():
    n, t = 6, 1
    g = PartyGraph.from_edges(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)])
    result = star(g, n, t)
    assert isinstance(result, StarResult)
    assert result.C == frozenset(range(1, n + 1))
    assert result.D == frozenset(range(1, n + 1))


def brute_force_star_exists(g: PartyGraph, n: int, t: int) -> bool:
    vertices = list(range(1, n + 1))
    for c_size in range(n - 2 * t, n + 1):
        for c_set in itertools.combinations(vertices, c_size):
            rest = [v for v in vertices]
            for d_size in range(max(n - t, c_size), n + 1):
                for d_set in itertools.combinations(rest, d_size):
                    if not set(c_set) <= set(d_set):
                        continue
                    if all(g.has_edge(ci, dj) for ci in c_set for dj in d_set if ci != dj):
                        return True
    return False


def test_empty_graph_has_no_star():
    g = PartyGraph.from_edges(4, [])
    assert star(g, 4, 1) == NOSTAR
    assert not brute_force_star_exists(g, 4, 1)


def test_star_validity_on_random_graphs():
    rng = random.Random(3)
    found = 0
    for trial in range(400):
        n = rng.randint(4, 10)
        t = (n - 1) // 3
        g = random_graph(n, rng.choice([0.2, 0.5, 0.8, 0.95]), rng)
        result = star(g, n, t)
        if result is not NOSTAR:
            found += 1
            assert result.C <= result.D
            assert len(result.C) >= n - 2 * t
            assert len(result.D) >= n - t
            for c in result.C:
                for d in result.D:
                    if c != d:
                        assert g.has_edge(c, d)
        else:
            if n <= 7:
                # the procedure may miss stars, but never invents one;
                # confirm emptiness only on graphs where none exists
                if not brute_force_star_exists(g, n, t):
                    assert result == NOSTAR
    assert found > 50


def test_honest_clique_never_nostar():
    # any graph whose honest 2t+1 parties form a clique yields a star with at
    # most t honest parties excluded from C
    rng = random.Random(9)
    for t in (1, 2, 3):
        n = 3 * t + 1
        honest = set(range(1, 2 * t + 2))
        for trial in range(40):
            edges = [(u, v) for u, v in itertools.combinations(sorted(honest), 2)]
            for u in range(1, n + 1):
                for v in range(u + 1, n + 1):
                    if (u not in honest or v not in honest) and rng.random() < 0.4:
                        edges.append((u, v))
            g = PartyGraph.from_edges(n, edges)
            result = star(g, n, t)
            assert result is not NOSTAR
            assert len(honest - result.C) <= t


def test_derive_fe_on_complete_graph():
    n, t = 4, 1
    g = PartyGraph.from_edges(n, [(u, v) for u in range(1, 5) for v in range(u + 1, 5)])
    result = star(g, n, t)
    fe = derive_fe(g, result.C, result.D, n, t)
    assert fe is not None
    f, e = fe
    assert f == frozenset(range(1, 5))
    assert e == frozenset(range(1, 5))


def test_derive_fe_clique_contains_honest():
    t = 2
    n = 3 * t + 1
    honest = list(range(1, 2 * t + 2))
    edges = list(itertools.combinations(honest, 2))
    g = PartyGraph.from_edges(n, edges)
    result = star(g, n, t)
    assert result is not NOSTAR
    fe = derive_fe(g, result.C, result.D, n, t)
    assert fe is not None
    assert set(honest) <= fe[1]
    assert len(fe[1]) >= 2 * t + 1


def test_derive_fe_sparse_star_yields_none():
    # a thin but valid star: C x D edges only, nothing else; every D member
    # reaches F, but outside C nobody has 2t+1 self-inclusive F-neighbors,
    # so the extended set stays below 2t+1 and the derivation reports none
    n, t = 7, 2
    c = frozenset({1, 2, 3})
    d = frozenset({1, 2, 3, 4, 5})
    edges = [(ci, dj) for ci in sorted(c) for dj in sorted(d) if ci < dj]
    g = PartyGraph.from_edges(n, edges)
    for ci in c:
        for dj in d:
            if ci != dj:
                assert g.has_edge(ci, dj)
    assert derive_fe(g, c, d, n, t) is None


def test_self_neighbor_rule_keeps_clique_in_core_sets():
    # star over a 5-clique inside n=7: vertices outside the clique have no
    # neighbors at all and stay out of F; clique members count themselves
    n, t = 7, 2
    clique = [1, 2, 3, 4, 5]
    g = PartyGraph.from_edges(n, list(itertools.combinations(clique, 2)))
    result = star(g, n, t)
    fe = derive_fe(g, result.C, result.D, n, t)
    assert fe is not None
    f, e = fe
    assert f == frozenset(clique)
    # each clique member has 4 neighbors in F plus itself = 5 >= 2t+1
    assert e == frozenset(clique)


def test_debug_format_roundtrip():
    g = PartyGraph.from_edges(4, [(1, 2), (3, 4)])
    text = g.to_text()
    assert text.splitlines()[0] == "0100"
    assert PartyGraph.from_text(text) == g
    with pytest.raises(ValueError):
        PartyGraph.from_text("01\n10\n00")


def test_star_deterministic():
    rng = random.Random(11)
    g = random_graph(8, 0.5, rng)
    assert star(g, 8, 2) == star(g, 8, 2)
    assert max_matching(g) == max_matching(g)


def test_large_graph_fallback_matching_is_valid():
    rng = random.Random(0)
    g = random_graph(16, 0.3, rng)
    m = max_matching(g)
    used = [v for e in m for v in e]
    assert len(set(used)) == len(used)
    for u, v in m:
        assert g.has_edge(u, v)
    assert m == max_matching(g)

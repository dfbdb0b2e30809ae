"""Maximum matching and star extraction on party graphs.

Vertices are party ids 1..n. The star procedure finds vertex sets (C, D)
with C subseteq D, |C| >= n-2t, |D| >= n-t, and every C x D pair adjacent,
by taking a maximum matching of the complement graph and pruning.

Matching is exact: a subset DP (deterministic, with lexicographically
smallest edge-set tie-breaking) for n <= 14, and the general-graph matching
from networkx beyond that. A recursive brute-force oracle for tests lives
in the test suite, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

_DP_LIMIT = 14


@dataclass(frozen=True)
class PartyGraph:
    """Undirected graph on parties 1..n; rows[i] is a bitmask over 0-based ids."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError("row count must equal n")
        for i, r in enumerate(self.rows):
            if r >> self.n:
                raise ValueError("adjacency bits out of range")
            if r & (1 << i):
                raise ValueError("self-loops not allowed")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if bool(self.rows[i] & (1 << j)) != bool(self.rows[j] & (1 << i)):
                    raise ValueError("adjacency must be symmetric")

    @staticmethod
    def from_edges(n: int, edges) -> "PartyGraph":
        rows = [0] * n
        for u, v in edges:
            if u == v or not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"bad edge ({u},{v})")
            rows[u - 1] |= 1 << (v - 1)
            rows[v - 1] |= 1 << (u - 1)
        return PartyGraph(n=n, rows=tuple(rows))

    def with_edge(self, u: int, v: int) -> "PartyGraph":
        rows = list(self.rows)
        rows[u - 1] |= 1 << (v - 1)
        rows[v - 1] |= 1 << (u - 1)
        return PartyGraph(n=self.n, rows=tuple(rows))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] & (1 << (v - 1)))

    def edges(self) -> list[tuple[int, int]]:
        return [
            (i + 1, j + 1)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.rows[i] & (1 << j)
        ]

    def complement(self) -> "PartyGraph":
        full = (1 << self.n) - 1
        return PartyGraph(
            n=self.n,
            rows=tuple((full ^ r ^ (1 << i)) for i, r in enumerate(self.rows)),
        )

    def neighbors(self, v: int) -> frozenset[int]:
        r = self.rows[v - 1]
        return frozenset(j + 1 for j in range(self.n) if r & (1 << j))

    def to_text(self) -> str:
        return "\n".join(
            "".join("1" if r & (1 << j) else "0" for j in range(self.n)) for r in self.rows
        )

    @staticmethod
    def from_text(text: str) -> "PartyGraph":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        n = len(lines)
        rows = []
        for ln in lines:
            if len(ln) != n or set(ln) - {"0", "1"}:
                raise ValueError("debug format rows must be 0/1 strings of length n")
            rows.append(sum(1 << j for j, ch in enumerate(ln) if ch == "1"))
        return PartyGraph(n=n, rows=tuple(rows))


NOSTAR = "noSTAR"


@dataclass(frozen=True)
class StarResult:
    C: frozenset[int]
    D: frozenset[int]


def _dp_best_table(n: int, rows: tuple[int, ...]) -> list[int]:
    best = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        v = low.bit_length() - 1
        rest = mask ^ low
        b = best[rest]
        m = rows[v] & rest
        while m:
            u = m & -m
            cand = best[rest ^ u] + 1
            if cand > b:
                b = cand
            m ^= u
        best[mask] = b
    return best


@lru_cache(maxsize=4096)
def _matching_cached(n: int, rows: tuple[int, ...]) -> frozenset[tuple[int, int]]:
    if n <= _DP_LIMIT:
        best = _dp_best_table(n, rows)
        mask = (1 << n) - 1
        chosen = []
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rows[i] & (1 << j)]
        for i, j in edges:
            bi, bj = 1 << i, 1 << j
            if mask & bi and mask & bj and best[mask ^ bi ^ bj] + 1 == best[mask]:
                chosen.append((i + 1, j + 1))
                mask ^= bi | bj
        return frozenset(chosen)
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(
        (i, j) for i in range(n) for j in range(i + 1, n) if rows[i] & (1 << j)
    )
    m = nx.max_weight_matching(g, maxcardinality=True)
    return frozenset((min(u, v) + 1, max(u, v) + 1) for u, v in m)


def max_matching(g: PartyGraph) -> frozenset[tuple[int, int]]:
    """Maximum-cardinality matching; deterministic for a fixed graph."""
    return _matching_cached(g.n, g.rows)


@lru_cache(maxsize=65536)
def _star_cached(n: int, rows: tuple[int, ...], t: int):
    g = PartyGraph(n=n, rows=rows)
    h = g.complement()
    matching = max_matching(h)
    matched = set()
    for u, v in matching:
        matched.add(u)
        matched.add(v)
    unmatched = [v for v in range(1, n + 1) if v not in matched]
    t_set = {
        i
        for i in unmatched
        if any(h.has_edge(i, j) and h.has_edge(i, k) for j, k in matching)
    }
    c = frozenset(i for i in unmatched if i not in t_set)
    b_set = {j for j in matched if any(h.has_edge(j, k) for k in c)}
    d = frozenset(v for v in range(1, n + 1) if v not in b_set)
    if len(c) >= n - 2 * t and len(d) >= n - t:
        _assert_star(g, c, d, n, t)
        return StarResult(C=c, D=d)
    return NOSTAR


def star(g: PartyGraph, n: int, t: int):
    """Extract a star (C, D) from g, or NOSTAR when the pruning falls short."""
    if g.n != n:
        raise ValueError("graph size mismatch")
    return _star_cached(n, g.rows, t)


def _assert_star(g: PartyGraph, c: frozenset[int], d: frozenset[int], n: int, t: int) -> None:
    assert c <= d, "C must be contained in D"
    assert len(c) >= n - 2 * t and len(d) >= n - t
    for ci in c:
        for dj in d:
            if ci != dj:
                assert g.has_edge(ci, dj), f"missing edge ({ci},{dj}) across C x D"


def derive_fe(g: PartyGraph, c: frozenset[int], d: frozenset[int], n: int, t: int):
    """Core/extended sets: F has >= t+1 neighbors in C; E has >= 2t+1 in F.

    A vertex counts as its own neighbor in both tallies. (With strict
    neighbors a C of size exactly t+1 strands its own members at t neighbors
    and the all-honest-clique guarantee fails, e.g. a 5-clique in n=7, t=2.)
    Returns (F, E) or None when either set is smaller than 2t+1.
    """
    f = frozenset(
        v for v in range(1, n + 1) if len((g.neighbors(v) | {v}) & c) >= t + 1
    )
    if len(f) < 2 * t + 1:
        return None
    e = frozenset(
        v for v in range(1, n + 1) if len((g.neighbors(v) | {v}) & f) >= 2 * t + 1
    )
    if len(e) < 2 * t + 1:
        return None
    return f, e

"""Simple graphs, their packing corners, and exact combinatorial parameters.

Vertex sets are Python ``int`` bitmasks internally; public functions return
sorted tuples of vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .corner import DiagonalCorner
from .entropy import as_distribution
from .errors import DimensionMismatch, MissingOperand, TooLarge
from .optcore import SolverConfig, Status, entropy_min_simplex_diag, lp_solve

MAX_VERTICES = 25


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=bool)
        if a.shape != (self.n, self.n):
            raise DimensionMismatch(f"adjacency shape {a.shape} for n={self.n}")
        if np.any(a != a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise ValueError("graphs have no loops")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and bool(np.all(self.adjacency == other.adjacency))

    def __hash__(self):
        return hash((self.n, self.adjacency.tobytes()))

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad edge ({i}, {j}) for n={n}")
            a[i, j] = a[j, i] = True
        return cls(n, a)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(i.tolist(), j.tolist()))

    def neighbor_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << int(j) for j in np.flatnonzero(row)) for row in self.adjacency)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, obj: dict) -> Graph:
        return cls.from_edges(int(obj["n"]), [tuple(e) for e in obj["edges"]])


def parse_graph_text(text: str) -> Graph:
    """Graph JSON, or DIMACS-style lines ``p edge n m`` / ``e i j`` (1-indexed)."""
    stripped = text.strip()
    if stripped.startswith("{"):
        return Graph.from_json(json.loads(stripped))
    n, edges = None, []
    for line in stripped.splitlines():
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            n = int(parts[2])
        elif parts[0] == "e":
            edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(n, edges)


def empty_graph(n: int) -> Graph:
    return Graph(n, np.zeros((n, n), dtype=bool))


def complete_graph(n: int) -> Graph:
    return Graph(n, ~np.eye(n, dtype=bool))


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def complement(g: Graph) -> Graph:
    return Graph(g.n, ~g.adjacency & ~np.eye(g.n, dtype=bool))


def _closed(g: Graph) -> np.ndarray:
    return g.adjacency | np.eye(g.n, dtype=bool)


def strong_product(g: Graph, h: Graph) -> Graph:
    """``(i,k) ~ (j,l)`` iff i, j equal or adjacent and k, l equal or adjacent; vertex ``i*n_h + k``."""
    a = np.kron(_closed(g), _closed(h))
    np.fill_diagonal(a, False)
    return Graph(g.n * h.n, a)


def disjunctive_product(g: Graph, h: Graph) -> Graph:
    """``(i,k) ~ (j,l)`` iff i ~ j or k ~ l."""
    ones_g = np.ones((g.n, g.n), dtype=bool)
    ones_h = np.ones((h.n, h.n), dtype=bool)
    a = np.kron(g.adjacency, ones_h) | np.kron(ones_g, h.adjacency)
    np.fill_diagonal(a, False)
    return Graph(g.n * h.n, a)


def combine(g: Graph, h: Graph | None = None, kind: str = "complement") -> Graph:
    if kind == "complement":
        return complement(g)
    if h is None:
        raise MissingOperand(f"{kind} product needs two graphs")
    if kind == "strong":
        return strong_product(g, h)
    if kind == "disjunctive":
        return disjunctive_product(g, h)
    raise ValueError(f"unknown combinator {kind!r}")


def strong_power(g: Graph, k: int) -> Graph:
    out = g
    for _ in range(k - 1):
        out = strong_product(out, g)
    return out


def _guard(g: Graph):
    if g.n > MAX_VERTICES:
        raise TooLarge(f"{g.n} vertices exceeds the enumeration limit {MAX_VERTICES}")


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _maximal_cliques_masks(nbrs: tuple[int, ...], n: int) -> list[int]:
    """Bron-Kerbosch with Tomita pivoting, on neighbor bitmasks."""
    out: list[int] = []

    def expand(r: int, p: int, x: int):
        if not p and not x:
            out.append(r)
            return
        pivot_pool = p | x
        pivot = max(_bits(pivot_pool), key=lambda u: bin(p & nbrs[u]).count("1"))
        cand = p & ~nbrs[pivot]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            expand(r | low, p & nbrs[v], x & nbrs[v])
            p &= ~low
            x |= low
            cand &= ~low

    expand(0, (1 << n) - 1, 0)
    return out


@lru_cache(maxsize=256)
def _mis_masks(g: Graph) -> tuple[int, ...]:
    return tuple(sorted(_maximal_cliques_masks(complement(g).neighbor_masks(), g.n)))


@lru_cache(maxsize=256)
def _clique_masks(g: Graph) -> tuple[int, ...]:
    return tuple(sorted(_maximal_cliques_masks(g.neighbor_masks(), g.n)))


def independent_sets(g: Graph, maximal_only: bool = True) -> list[tuple[int, ...]]:
    _guard(g)
    if g.n == 0:
        return [()]
    if maximal_only:
        return sorted(_bits(m) for m in _mis_masks(g))
    nbrs = g.neighbor_masks()
    out = []

    def grow(current: int, allowed: int):
        out.append(_bits(current))
        while allowed:
            low = allowed & -allowed
            v = low.bit_length() - 1
            allowed &= ~low
            grow(current | low, allowed & ~nbrs[v])

    grow(0, (1 << g.n) - 1)
    return sorted(out)


def maximal_cliques(g: Graph) -> list[tuple[int, ...]]:
    _guard(g)
    return sorted(_bits(m) for m in _clique_masks(g))


def alpha(g: Graph) -> int:
    _guard(g)
    return max((bin(m).count("1") for m in _mis_masks(g)), default=0)


def omega(g: Graph) -> int:
    _guard(g)
    return max((bin(m).count("1") for m in _clique_masks(g)), default=0)


def chi_exact(g: Graph) -> int:
    """Chromatic number as a minimum cover of the vertices by maximal independent sets."""
    _guard(g)
    if g.n == 0:
        return 0
    sets = _mis_masks(g)
    full = (1 << g.n) - 1
    covering = [[s for s in sets if s >> v & 1] for v in range(g.n)]
    big = max(bin(s).count("1") for s in sets)
    best = [_greedy_cover(sets, full)]

    def search(covered: int, used: int):
        if covered == full:
            best[0] = min(best[0], used)
            return
        remaining = bin(full & ~covered).count("1")
        if used + math.ceil(remaining / big) >= best[0]:
            return
        free = _bits(full & ~covered)
        v = min(free, key=lambda u: len(covering[u]))
        for s in sorted(covering[v], key=lambda s: -bin(s & ~covered).count("1")):
            search(covered | s, used + 1)

    search(0, 0)
    return best[0]


def _greedy_cover(sets, full: int) -> int:
    covered, used = 0, 0
    while covered != full:
        covered |= max(sets, key=lambda s: bin(s & ~covered).count("1"))
        used += 1
    return used


def clique_cover_number(g: Graph) -> int:
    return chi_exact(complement(g))


@dataclass
class FractionalResult:
    value: float
    weights: dict
    dual: np.ndarray

    @property
    def rational(self) -> Fraction:
        return Fraction(self.value).limit_denominator(1000)


def chi_f_lp(g: Graph) -> FractionalResult:
    """Fractional chromatic number over maximal independent sets; ``dual`` holds the fractional clique weights."""
    _guard(g)
    sets = _mis_masks(g)
    inc = np.array([[s >> v & 1 for s in sets] for v in range(g.n)], dtype=float)
    primal = lp_solve(np.ones(len(sets)), [(inc[v], ">=", 1.0) for v in range(g.n)])
    dual = lp_solve(np.ones(g.n), [(inc[:, k], "<=", 1.0) for k in range(len(sets))], sense="max")
    if primal.status != Status.CONVERGED or dual.status != Status.CONVERGED:
        raise RuntimeError("fractional chromatic LP did not solve")
    if abs(primal.value - dual.value) > 1e-7 * (1 + primal.value):
        raise RuntimeError(f"LP duality mismatch {primal.value} vs {dual.value}")
    weights = {_bits(s): float(w) for s, w in zip(sets, primal.point) if w > 1e-12}
    return FractionalResult(primal.value, weights, dual.point)


def vp_corner(g: Graph) -> DiagonalCorner:
    _guard(g)
    rows = np.array([[m >> v & 1 for v in range(g.n)] for m in _mis_masks(g)], dtype=float)
    return DiagonalCorner.from_vertices(rows)


def fvp_polytope(g: Graph) -> DiagonalCorner:
    _guard(g)
    rows = np.array([[m >> v & 1 for v in range(g.n)] for m in _clique_masks(g)], dtype=float)
    return DiagonalCorner.from_inequalities(rows)


def korner_entropy(g: Graph, p, cfg: SolverConfig | None = None) -> float:
    p = as_distribution(p)
    if p.shape != (g.n,):
        raise DimensionMismatch(f"distribution of length {p.shape[0]} for n={g.n}")
    return entropy_min_simplex_diag(vp_corner(g).vgen, p, cfg).value


@dataclass
class RateSequences:
    alpha_seq: list
    chi_seq: list
    chi_f_floor: list
    truncated: bool


def rate_sequences(g: Graph, n_max: int = 2) -> RateSequences:
    """Finite prefixes of the capacity and Witsenhausen-rate sequences along strong powers.

    Powers beyond the enumeration limit are skipped and ``truncated`` is set.
    """
    if not 1 <= n_max <= 3:
        raise ValueError("n_max must be between 1 and 3")
    a_seq, c_seq, f_seq = [], [], []
    truncated = False
    for k in range(1, n_max + 1):
        if g.n ** k > MAX_VERTICES:
            truncated = True
            break
        gk = strong_power(g, k)
        a_seq.append(alpha(gk) ** (1.0 / k))
        c_seq.append(chi_exact(gk) ** (1.0 / k))
        f_seq.append(chi_f_lp(gk).value ** (1.0 / k))
    return RateSequences(a_seq, c_seq, f_seq, truncated)

"""Operator systems as non-commutative graphs.

An :class:`OperatorSystem` is stored through a Hermitian basis of a unital,
self-adjoint subspace of ``M_d``. Projection families (abelian, clique, full)
come from graph combinatorics, from closed forms for the ``ci``/``t``/``s``
builtins, or from a seeded randomized search whose results are only inner
approximations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .corner import GeneratedCorner, N_DEGENERATE, frame_corner, gamma, gamma_f_cover, n_param, snap_projection
from .entropy import EntropyResult, corner_entropy
from .errors import DimensionMismatch, InvalidOperatorSystem, TooLarge, UnknownName
from .graphs import (
    Graph,
    alpha as graph_alpha,
    chi_exact,
    clique_cover_number,
    complement,
    korner_entropy,
    maximal_cliques,
    independent_sets,
    strong_power,
    strong_product,
    MAX_VERTICES,
)
from .hermlin import as_hermitian, as_state, matrix_from_json, matrix_to_json
from .optcore import SolverConfig

SPAN_TOL = 1e-7
COMMUTE_TOL = 1e-7
MAX_TENSOR_DIM = 64


class Kind(str, enum.Enum):
    ABELIAN = "abelian"
    CLIQUE = "clique"
    FULL = "full"


class Provenance(str, enum.Enum):
    COMBINATORIAL = "Combinatorial"
    CLOSED_FORM = "ClosedForm"
    SEARCHED = "Searched"
    USER = "UserSupplied"


@dataclass(frozen=True, eq=False)
class OperatorSystem:
    basis: tuple
    graph: Graph | None = None
    name: str | None = None
    dim: int = field(init=False)
    _span: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.basis:
            raise InvalidOperatorSystem("empty basis")
        mats = tuple(as_hermitian(b) for b in self.basis)
        d = mats[0].shape[0]
        if any(m.shape != (d, d) for m in mats):
            raise DimensionMismatch("basis elements must share a dimension")
        vecs = np.array([m.reshape(-1) for m in mats]).T
        q, r = np.linalg.qr(vecs)
        diag = np.abs(np.diag(r))
        if diag.min() <= 1e-10 * max(diag.max(), 1.0):
            raise InvalidOperatorSystem("basis is linearly dependent")
        object.__setattr__(self, "basis", mats)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "_span", q)
        if self.residual(np.eye(d)) > 1e-9:
            raise InvalidOperatorSystem("the identity is not in the span")

    def residual(self, m) -> float:
        v = np.asarray(m, dtype=complex).reshape(-1)
        return float(np.linalg.norm(v - self._span @ (self._span.conj().T @ v)))

    def residuals(self, mats: np.ndarray) -> np.ndarray:
        v = np.asarray(mats, dtype=complex).reshape(len(mats), -1).T
        return np.linalg.norm(v - self._span @ (self._span.conj().T @ v), axis=0)

    def contains(self, m, tol: float = SPAN_TOL) -> bool:
        return self.residual(m) <= tol

    def to_json(self) -> dict:
        return {"dim": self.dim, "basis": [matrix_to_json(b) for b in self.basis]}

    @classmethod
    def from_json(cls, obj: dict) -> OperatorSystem:
        s = cls(tuple(matrix_from_json(b) for b in obj["basis"]))
        if "dim" in obj and int(obj["dim"]) != s.dim:
            raise DimensionMismatch(f"declared dim {obj['dim']} vs basis dim {s.dim}")
        return s


def _unit(d: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def _offdiag_pair(d: int, i: int, j: int) -> list[np.ndarray]:
    e = _unit(d, i, j)
    return [e + e.T, 1j * (e - e.T)]


def opsys_from_graph(g: Graph) -> OperatorSystem:
    if g.n > MAX_VERTICES:
        raise TooLarge(f"{g.n} vertices exceeds {MAX_VERTICES}")
    basis = [_unit(g.n, i, i) for i in range(g.n)]
    for i, j in g.edges():
        basis.extend(_offdiag_pair(g.n, i, j))
    return OperatorSystem(tuple(basis), graph=g)


def full_system(d: int) -> OperatorSystem:
    from .graphs import complete_graph
    return opsys_from_graph(complete_graph(d))


def diagonal_system(d: int) -> OperatorSystem:
    from .graphs import empty_graph
    return opsys_from_graph(empty_graph(d))


def builtin_system(name: str, d: int | None = None) -> OperatorSystem:
    """``ci:d`` (scalars), ``t:d`` (span of I and J) or ``s:d`` (constant diagonal)."""
    if d is None:
        if ":" not in name:
            raise UnknownName(f"expected 'family:d', got {name!r}")
        name, dstr = name.split(":", 1)
        try:
            d = int(dstr)
        except ValueError:
            raise UnknownName(f"bad dimension {dstr!r}") from None
    key = name.lower()
    if d < 1:
        raise UnknownName("dimension must be positive")
    eye = np.eye(d, dtype=complex)
    if key == "ci":
        basis = [eye]
    elif key == "t":
        basis = [eye] if d == 1 else [eye, np.ones((d, d), dtype=complex)]
    elif key == "s":
        basis = [eye]
        for i in range(d):
            for j in range(i + 1, d):
                basis.extend(_offdiag_pair(d, i, j))
    else:
        raise UnknownName(f"unknown builtin family {name!r}")
    return OperatorSystem(tuple(basis), name=f"{key}:{d}")


def tensor_system(a: OperatorSystem, b: OperatorSystem) -> OperatorSystem:
    d = a.dim * b.dim
    if d > MAX_TENSOR_DIM:
        raise TooLarge(f"tensor dimension {d} exceeds {MAX_TENSOR_DIM}")
    if a.graph is not None and b.graph is not None:
        return opsys_from_graph(strong_product(a.graph, b.graph))
    kept: list[np.ndarray] = []
    q = np.zeros((d * d, 0), dtype=complex)
    for x in a.basis:
        for y in b.basis:
            k = np.kron(x, y)
            v = k.reshape(-1)
            rest = v - q @ (q.conj().T @ v)
            nrm = np.linalg.norm(rest)
            if nrm > 1e-9 * max(np.linalg.norm(v), 1.0):
                kept.append(k)
                q = np.hstack([q, (rest / nrm)[:, None]])
    name = f"{a.name}*{b.name}" if a.name and b.name else None
    return OperatorSystem(tuple(kept), name=name)


# projection classification


@dataclass
class ProjectionClass:
    abelian: bool
    full: bool
    clique_certified: bool
    rank: int


def _range_frame(p: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(p)
    return u[:, w > 0.5]


def _compressions(s: OperatorSystem, v: np.ndarray) -> np.ndarray:
    return np.einsum("ji,kjl,lm->kim", v.conj(), np.array(s.basis), v)


def commutator_residual(s: OperatorSystem, v: np.ndarray) -> float:
    c = _compressions(s, v)
    worst = 0.0
    for k in range(len(c)):
        comm = np.einsum("ij,ljk->lik", c[k], c[k + 1:]) - np.einsum("lij,jk->lik", c[k + 1:], c[k])
        if comm.size:
            worst = max(worst, float(np.linalg.norm(comm, axis=(1, 2)).max()))
    return worst


def _pair_products(v: np.ndarray, offdiag: bool) -> np.ndarray:
    r = v.shape[1]
    pairs = [(i, j) for i in range(r) for j in range(r) if not (offdiag and i == j)]
    if not pairs:
        return np.zeros((0, v.shape[0], v.shape[0]), dtype=complex)
    return np.array([np.outer(v[:, i], v[:, j].conj()) for i, j in pairs])


def frame_residual(s: OperatorSystem, v: np.ndarray, offdiag: bool) -> float:
    prods = _pair_products(v, offdiag)
    return 0.0 if len(prods) == 0 else float(s.residuals(prods).max())


def classify_projection(s: OperatorSystem, p, frame=None) -> ProjectionClass:
    p = snap_projection(p)
    if p.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"{p.shape} vs system dim {s.dim}")
    v = _range_frame(p) if frame is None else np.asarray(frame, dtype=complex)
    rank = v.shape[1]
    if rank == 0:
        return ProjectionClass(True, True, True, 0)
    abelian = commutator_residual(s, v) <= COMMUTE_TOL
    full = frame_residual(s, v, offdiag=False) <= SPAN_TOL
    clique = full or frame_residual(s, v, offdiag=True) <= SPAN_TOL
    return ProjectionClass(abelian, full, clique, rank)


@dataclass
class ProjectionFamily:
    dim: int
    projections: list
    kind: Kind
    provenance: Provenance

    @property
    def exact(self) -> bool:
        return self.provenance in (Provenance.COMBINATORIAL, Provenance.CLOSED_FORM)

    def corner(self) -> GeneratedCorner | None:
        return GeneratedCorner(tuple(self.projections)) if self.projections else None

    def max_rank(self) -> int:
        return max((int(round(np.trace(p).real)) for p in self.projections), default=0)


def _diag_projector(d: int, verts) -> np.ndarray:
    x = np.zeros(d)
    x[list(verts)] = 1.0
    return np.diag(x).astype(complex)


def _basis_projectors(d: int) -> list[np.ndarray]:
    return [_diag_projector(d, [i]) for i in range(d)]


def _flat_projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def _closed_form(name: str, d: int, kind: Kind) -> list[np.ndarray]:
    eye = np.eye(d, dtype=complex)
    if name == "ci":
        if kind == Kind.ABELIAN:
            return [eye]
        if kind == Kind.CLIQUE:
            return _basis_projectors(d)
        return [eye] if d == 1 else []
    if name == "t":
        if kind == Kind.ABELIAN or d == 1:
            return [eye]
        if kind == Kind.CLIQUE:
            return _basis_projectors(d)
        if d == 2:
            return [_flat_projector([1, 1]), _flat_projector([1, -1])]
        return [np.ones((d, d), dtype=complex) / d]
    if name == "s":
        if kind == Kind.ABELIAN:
            return _basis_projectors(d)
        if kind == Kind.CLIQUE or d == 1:
            return [eye]
        if d == 2:
            return [_flat_projector(v) for v in ([1, 1], [1, -1], [1, 1j], [1, -1j])]
        k = np.arange(d)
        return [_flat_projector(np.exp(2j * np.pi * j * k / d)) for j in range(d)]
    raise UnknownName(name)


def _accepts(s: OperatorSystem, p: np.ndarray, kind: Kind) -> bool:
    c = classify_projection(s, p)
    return {Kind.ABELIAN: c.abelian, Kind.CLIQUE: c.clique_certified, Kind.FULL: c.full}[kind]


def projection_families(s: OperatorSystem, kind: Kind | str, budget: int = 200,
                        rng: np.random.Generator | None = None) -> ProjectionFamily:
    kind = Kind(kind)
    d = s.dim
    if s.graph is not None:
        g = s.graph
        sets = independent_sets(g) if kind == Kind.ABELIAN else maximal_cliques(g)
        projs = [_diag_projector(d, verts) for verts in sets]
        prov = Provenance.COMBINATORIAL
    elif s.name is not None and ":" in s.name and "*" not in s.name:
        key, dstr = s.name.split(":")
        projs = _closed_form(key, int(dstr), kind)
        prov = Provenance.CLOSED_FORM
    else:
        projs = search_projections(s, kind, budget, rng or np.random.default_rng(0))
        prov = Provenance.SEARCHED
    for p in projs:
        if not _accepts(s, p, kind):
            raise InvalidOperatorSystem(f"family member fails the {kind.value} test")
    return ProjectionFamily(d, projs, kind, prov)


# randomized search


def _frame_from_params(x: np.ndarray, d: int, r: int) -> np.ndarray:
    a = (x[: d * r] + 1j * x[d * r:]).reshape(d, r)
    q, _ = np.linalg.qr(a)
    return q


def _search_objective(s: OperatorSystem, kind: Kind, d: int, r: int):
    def f(x):
        v = _frame_from_params(x, d, r)
        if kind == Kind.ABELIAN:
            return commutator_residual(s, v) ** 2
        return frame_residual(s, v, offdiag=(kind == Kind.CLIQUE)) ** 2
    return f


def search_frame(s: OperatorSystem, kind: Kind | str, rank: int, budget: int, rng: np.random.Generator,
                 accept: float = 1e-9):
    """Best frame of the given rank found by random restarts; returns ``(frame, residual)``."""
    kind = Kind(kind)
    d = s.dim
    f = _search_objective(s, kind, d, rank)
    best_v, best_val = None, math.inf
    for _ in range(budget):
        x0 = rng.normal(size=2 * d * rank)
        res = minimize(f, x0, method="L-BFGS-B", options={"maxiter": 500, "ftol": 1e-20, "gtol": 1e-12})
        val = math.sqrt(max(res.fun, 0.0))
        if val < best_val:
            best_v, best_val = _frame_from_params(res.x, d, rank), val
        if best_val <= accept:
            break
    return best_v, best_val


def search_projections(s: OperatorSystem, kind: Kind, budget: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Inner-approximate family: basis projectors or identity where valid, plus searched frames."""
    d = s.dim
    out: list[np.ndarray] = []
    if _accepts(s, np.eye(d, dtype=complex), kind):
        return [np.eye(d, dtype=complex)]
    if kind != Kind.FULL:
        out.extend(_basis_projectors(d))
    for rank in range(d - 1, 0 if kind == Kind.FULL else 1, -1):
        v, val = search_frame(s, kind, rank, budget, rng)
        if v is not None and val <= 1e-9:
            p = v @ v.conj().T
            if _accepts(s, p, kind):
                out.append(p)
                break
    return out


# parameters


@dataclass
class NcParams:
    alpha: float
    omega: float
    omega_tilde: float
    chi: float
    chi_f: float
    omega_f: float
    Omega: float
    Omega_f: float
    Omega_tilde: float
    Omega_tilde_f: float
    flags: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("alpha", "omega", "omega_tilde", "chi", "chi_f", "omega_f",
                                             "Omega", "Omega_f", "Omega_tilde", "Omega_tilde_f")}
        out["flags"] = dict(self.flags)
        return out


def _closed_integer_covers(name: str, d: int) -> dict:
    """Integer PVM covers ``chi``, ``Omega``, ``Omega_tilde`` for the builtins."""
    if name == "ci":
        return {"chi": 1, "Omega": d, "Omega_tilde": 1 if d == 1 else math.inf}
    if name == "t":
        if d == 1:
            return {"chi": 1, "Omega": 1, "Omega_tilde": 1}
        return {"chi": 1, "Omega": d, "Omega_tilde": 2 if d == 2 else math.inf}
    if name == "s":
        return {"chi": d, "Omega": 1, "Omega_tilde": d}
    raise UnknownName(name)


def _cover_or_inf(fam: ProjectionFamily, cfg) -> float:
    corner = fam.corner()
    if corner is None or n_param(corner, cfg) <= 1e-9:
        return math.inf
    return gamma_f_cover(corner, cfg)


def nc_params(s: OperatorSystem, cfg: SolverConfig | None = None, budget: int = 50,
              rng: np.random.Generator | None = None) -> NcParams:
    cfg = cfg or SolverConfig()
    rng = rng or np.random.default_rng(cfg.seed)
    ap = projection_families(s, Kind.ABELIAN, budget, rng)
    cp = projection_families(s, Kind.CLIQUE, budget, rng)
    fp = projection_families(s, Kind.FULL, budget, rng)
    ap_corner = ap.corner()
    flags = {"ap": ap.provenance.value, "cp": cp.provenance.value, "fp": fp.provenance.value}
    alpha = gamma(ap_corner)
    omega = gamma(cp.corner()) if cp.projections else 0.0
    omega_tilde = gamma(fp.corner()) if fp.projections else 0.0
    chi_f = gamma_f_cover(ap_corner, cfg)
    n_ap = n_param(ap_corner, cfg)
    omega_f = math.inf if n_ap < N_DEGENERATE else 1.0 / n_ap
    if abs(chi_f - omega_f) > 1e-4 * max(1.0, chi_f):
        raise AssertionError(f"fractional chromatic {chi_f} and fractional clique {omega_f} disagree")
    Omega_f = _cover_or_inf(cp, cfg)
    Omega_tilde_f = _cover_or_inf(fp, cfg)
    if s.graph is not None:
        cc = clique_cover_number(s.graph)
        covers = {"chi": chi_exact(s.graph), "Omega": cc, "Omega_tilde": cc}
        flags["covers"] = "Exact"
    elif ap.provenance == Provenance.CLOSED_FORM:
        key, dstr = s.name.split(":")
        covers = _closed_integer_covers(key, int(dstr))
        flags["covers"] = "Exact"
    else:
        # a basis PVM of rank-one projections always qualifies as abelian and as clique
        covers = {"chi": 1 if alpha == s.dim else s.dim, "Omega": 1 if omega == s.dim else s.dim,
                  "Omega_tilde": 1 if omega_tilde == s.dim else math.inf}
        flags["covers"] = "Heuristic"
    return NcParams(alpha, omega, omega_tilde, covers["chi"], chi_f, omega_f, covers["Omega"], Omega_f,
                    covers["Omega_tilde"], Omega_tilde_f, flags)


def nc_graph_entropy(s: OperatorSystem, rho, cfg: SolverConfig | None = None, budget: int = 50,
                     check_classical: bool = True) -> EntropyResult:
    """Entropy of ``rho`` over the abelian-projection corner of ``s``.

    Rank-one projections are always abelian, so the eigenprojectors of
    ``rho`` are added to the generators.
    """
    rho = as_state(rho)
    if rho.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"state {rho.shape} vs system dim {s.dim}")
    ap = projection_families(s, Kind.ABELIAN, budget, np.random.default_rng((cfg or SolverConfig()).seed))
    _, u = np.linalg.eigh(rho)
    corner = GeneratedCorner(tuple(ap.projections) + frame_corner(u).generators)
    res = corner_entropy(corner, rho, cfg)
    is_diag = np.linalg.norm(rho - np.diag(np.diag(rho))) <= 1e-12
    if check_classical and s.graph is not None and is_diag:
        ref = korner_entropy(s.graph, np.real(np.diag(rho)), cfg)
        if abs(ref - res.value) > 1e-3:
            raise AssertionError(f"graph-system entropy {res.value} differs from the classical value {ref}")
    return res


@dataclass
class CapacityReport:
    lower: list
    Omega_f: float
    Omega_tilde_f: float
    exact_lower: bool
    consistent: bool


def capacity_bounds(s: OperatorSystem, n_max: int = 2, cfg: SolverConfig | None = None) -> CapacityReport:
    """Lower sequence ``alpha(S^k)^(1/k)`` against the upper bounds ``Omega_f`` and ``Omega~_f``."""
    if not 1 <= n_max <= 2:
        raise ValueError("n_max must be 1 or 2")
    params = nc_params(s, cfg)
    lower = []
    exact = True
    for k in range(1, n_max + 1):
        if s.dim ** k > MAX_TENSOR_DIM:
            break
        if s.graph is not None:
            if s.graph.n ** k > MAX_VERTICES:
                break
            lower.append(graph_alpha(strong_power(s.graph, k)) ** (1.0 / k))
        else:
            # products of abelian projections stay abelian, so alpha is supermultiplicative
            lower.append(params.alpha)
            exact = exact and params.flags["ap"] != Provenance.SEARCHED.value and k == 1
    top = max(lower) if lower else 0.0
    consistent = top <= params.Omega_f + 1e-6 and top <= params.Omega_tilde_f + 1e-6
    return CapacityReport(lower, params.Omega_f, params.Omega_tilde_f, exact, consistent)

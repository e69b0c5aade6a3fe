"""Finitely generated convex corners and their parameters.

A :class:`GeneratedCorner` stands for ``her(conv(G))``: every PSD matrix
dominated by a convex combination of the generators. Nothing is materialized;
every query is answered from the generator list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DimensionMismatch,
    EmptyInterior,
    NonOrthonormalBasis,
    NotProjection,
    NotPSD,
    RepresentationMismatch,
)
from .hermlin import as_hermitian, as_psd, matrix_from_json, matrix_to_json, random_psd
from .optcore import (
    Membership,
    OptResult,
    SolverConfig,
    Status,
    classify_margin,
    cone_cover_value,
    lp_solve,
    max_min_eig_simplex,
)

GEN_PSD_TOL = 1e-10
PROJ_TOL = 1e-8
AB_TOL = 1e-9
# below this N the cover value 1/N is too ill-conditioned to report as exact
N_DEGENERATE = 1e-6


@dataclass(frozen=True)
class GeneratedCorner:
    generators: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        gens = tuple(_psd_generator(g, k) for k, g in enumerate(self.generators))
        if not gens:
            raise DimensionMismatch("a corner needs at least one generator")
        d = gens[0].shape[0]
        if any(g.shape != (d, d) for g in gens):
            raise DimensionMismatch("generators must share a dimension")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "dim", d)

    @property
    def stack(self) -> np.ndarray:
        return np.array(self.generators)

    def is_zero(self) -> bool:
        return all(np.linalg.norm(g) == 0 for g in self.generators)

    def to_json(self) -> dict:
        return {"dim": self.dim, "generators": [matrix_to_json(g) for g in self.generators]}

    @classmethod
    def from_json(cls, obj: dict) -> GeneratedCorner:
        gens = [matrix_from_json(m) for m in obj["generators"]]
        corner = cls(tuple(gens))
        if "dim" in obj and int(obj["dim"]) != corner.dim:
            raise DimensionMismatch(f"declared dim {obj['dim']} vs generator dim {corner.dim}")
        return corner


def _psd_generator(g, k: int) -> np.ndarray:
    m = as_hermitian(g)
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -GEN_PSD_TOL * (1 + np.linalg.norm(m)):
        raise NotPSD(f"generator {k} has minimum eigenvalue {lo:.3e}")
    return m


def corner_of(*gens) -> GeneratedCorner:
    return GeneratedCorner(tuple(gens))


def unit_corner(c) -> GeneratedCorner:
    """``B_C``: everything below the single positive matrix ``C``."""
    return GeneratedCorner((np.asarray(c, dtype=complex),))


def trace_corner(d: int, extra_vectors=()) -> GeneratedCorner:
    """Basis-frame generators of the trace-one corner, plus optional rank-one extras.

    The full trace-one corner is generated by every rank-one projection; the
    basis projectors already give the exact ``gamma``, ``N`` and ``M`` and the
    exact entropy at states diagonal in that basis.
    """
    gens = [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
    for v in extra_vectors:
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        gens.append(np.outer(v, v.conj()))
    return GeneratedCorner(tuple(gens))


def frame_corner(frame: np.ndarray) -> GeneratedCorner:
    """Rank-one projectors onto the columns of an orthonormal frame."""
    return GeneratedCorner(tuple(np.outer(frame[:, i], frame[:, i].conj()) for i in range(frame.shape[1])))


def random_standard_corner(rng: np.random.Generator, d: int | None = None, m: int | None = None,
                           n_floor: float = 1e-2) -> GeneratedCorner:
    """Random corner with a strictly positive element (N bounded below by ``n_floor``)."""
    while True:
        dd = int(rng.integers(2, 6)) if d is None else d
        mm = int(rng.integers(2, 7)) if m is None else m
        gens = []
        for _ in range(mm):
            g = random_psd(rng, dd, int(rng.integers(1, dd + 1)))
            gens.append(g / np.trace(g).real * rng.uniform(0.5, 1.5))
        lo = np.linalg.eigvalsh(sum(gens) / mm)[0]
        if lo > n_floor:
            return GeneratedCorner(tuple(gens))


# parameters


def gamma(corner: GeneratedCorner) -> float:
    return float(max(np.trace(g).real for g in corner.generators))


def n_param_result(corner: GeneratedCorner, cfg: SolverConfig | None = None) -> OptResult:
    return max_min_eig_simplex(corner.generators, None, cfg)


def n_param(corner: GeneratedCorner, cfg: SolverConfig | None = None) -> float:
    if corner.is_zero():
        return 0.0
    return max(n_param_result(corner, cfg).value, 0.0)


def m_param(corner: GeneratedCorner, cfg: SolverConfig | None = None) -> float:
    if corner.is_zero():
        return math.inf
    return cone_cover_value(corner.generators, np.eye(corner.dim), cfg)


def ab_gamma_support(corner: GeneratedCorner, restarts: int = 2, seed: int = 0) -> float:
    """``gamma`` of the anti-blocker, by direct minimization over states.

    ``sup{Tr N : Tr(N G_i) <= 1}`` equals ``1 / min_sigma max_i <sigma, G_i>``
    over density matrices ``sigma``; the inner min-max is solved in epigraph
    form with SLSQP on the parametrization ``sigma = B B^* / Tr(B B^*)``.
    This route shares no code with the eigenvalue engine.
    """
    d = corner.dim
    Gs = corner.stack
    n = d * d
    rng = np.random.default_rng(seed)

    def unpack(x):
        return (x[:n] + 1j * x[n:2 * n]).reshape(d, d)

    def pairings(z):
        b = unpack(z[:-1])
        gb = Gs @ b
        a = np.real(np.einsum("ij,kij->k", b.conj(), gb))
        return a / np.real(np.vdot(b, b))

    def cons(z):
        return z[-1] - pairings(z)

    def cons_jac(z):
        b = unpack(z[:-1])
        nb = np.real(np.vdot(b, b))
        gb = Gs @ b
        a = np.real(np.einsum("ij,kij->k", b.conj(), gb))
        grad = 2 * gb / nb - (2 * a / nb**2)[:, None, None] * b[None]
        jac = np.concatenate([grad.real.reshape(len(Gs), n), grad.imag.reshape(len(Gs), n)], axis=1)
        return np.hstack([-jac, np.ones((len(Gs), 1))])

    obj_grad = np.zeros(2 * n + 1)
    obj_grad[-1] = 1.0
    best = math.inf
    for _ in range(restarts):
        x0 = rng.normal(size=2 * n)
        z0 = np.append(x0, pairings(np.append(x0, 0.0)).max())
        res = minimize(lambda z: z[-1], z0, jac=lambda z: obj_grad, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                       options={"ftol": 1e-15, "maxiter": 3000})
        best = min(best, float(pairings(res.x).max()))
    return math.inf if best <= 0 else 1.0 / best


@dataclass
class ParamReport:
    gamma: float
    n_param: float
    m_param: float
    gamma_ab: float
    certificates: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "n_param": self.n_param, "m_param": self.m_param,
                "gamma_ab": self.gamma_ab, "flags": dict(self.flags),
                "certificates": {k: np.asarray(v).real.tolist() for k, v in self.certificates.items()}}


def param_report(corner: GeneratedCorner, cfg: SolverConfig | None = None, support_route: bool = False) -> ParamReport:
    """gamma, N, M and gamma of the anti-blocker with their certificates.

    ``gamma_ab`` defaults to ``1/N``; ``support_route`` recomputes it
    independently with :func:`ab_gamma_support`.
    """
    if corner.is_zero():
        return ParamReport(0.0, 0.0, math.inf, math.inf, flags={"degenerate": "zero_corner"})
    res = n_param_result(corner, cfg)
    n = max(res.value, 0.0)
    m = m_param(corner, cfg)
    flags = {"n_status": res.status.value}
    if 0 < n < N_DEGENERATE:
        flags["m_param"] = Membership.INDETERMINATE.value
    if support_route and n > 0:
        gab = ab_gamma_support(corner, seed=(cfg or SolverConfig()).seed)
    else:
        gab = math.inf if n <= 0 else 1.0 / n
    return ParamReport(gamma(corner), n, m, gab,
                       certificates={"n_weights": res.point, "dual_state": res.extras["dual_state"]},
                       flags=flags)


# membership


def membership_value(corner: GeneratedCorner, a, cfg: SolverConfig | None = None) -> OptResult:
    return max_min_eig_simplex(corner.generators, -np.asarray(a, dtype=complex), cfg)


def membership(corner: GeneratedCorner, a, cfg: SolverConfig | None = None) -> Membership:
    a = as_hermitian(a)
    if a.shape != (corner.dim, corner.dim):
        raise DimensionMismatch(f"{a.shape} vs corner dim {corner.dim}")
    lo = np.linalg.eigvalsh(a)[0]
    if lo < -GEN_PSD_TOL * (1 + np.linalg.norm(a)):
        return Membership.OUTSIDE
    if np.linalg.norm(a) == 0:
        return Membership.INSIDE
    res = membership_value(corner, a, cfg)
    verdict = classify_margin(res.value)
    if verdict == Membership.INDETERMINATE and res.extras["upper"] <= -1e-5:
        return Membership.OUTSIDE
    return verdict


def ab_membership(corner: GeneratedCorner, n_mat) -> bool:
    n_mat = as_hermitian(n_mat)
    if np.linalg.eigvalsh(n_mat)[0] < -GEN_PSD_TOL * (1 + np.linalg.norm(n_mat)):
        return False
    pair = np.real(np.einsum("ij,kji->k", n_mat, corner.stack))
    return bool(np.all(pair <= 1 + AB_TOL))


def ab_ray_scale(corner: GeneratedCorner, n0) -> float:
    n0 = as_psd(n0)
    if np.linalg.norm(n0) == 0:
        raise NotPSD("ray direction must be nonzero")
    top = float(np.real(np.einsum("ij,kji->k", n0, corner.stack)).max())
    return math.inf if top <= AB_TOL * 1e-3 else 1.0 / top


def ray_scale(corner: GeneratedCorner, n0, cfg: SolverConfig | None = None) -> float:
    """``sup{t : t N0 in A}`` for a positive definite ray, in one eigenvalue solve.

    With ``N0 = R R``, ``t N0 <= sum w_i G_i`` iff ``t I <= R^-1 (sum w_i G_i) R^-1``.
    """
    w, u = np.linalg.eigh(as_psd(n0))
    if w[0] <= 1e-12 * w[-1]:
        raise NotPSD("ray direction must be positive definite here")
    rinv = (u / np.sqrt(w)) @ u.conj().T
    res = max_min_eig_simplex([rinv @ g @ rinv for g in corner.generators], None, cfg)
    return max(res.value, 0.0)


@dataclass
class ReflexivityReport:
    t_a: list
    t_aa: list
    max_discrepancy: float
    passed: bool


def reflexivity_ray_check(corner: GeneratedCorner, trials: int = 50, cfg: SolverConfig | None = None,
                          rng: np.random.Generator | None = None, threshold: float = 1e-3) -> ReflexivityReport:
    """Compare the boundary of A and of its second anti-blocker along random rays.

    ``t_A`` comes from the corner itself; ``t_AA = 1 / sup{<N, N0> : N in A#}``
    uses the cover value as the support function of the anti-blocker.
    """
    cfg = cfg or SolverConfig()
    rng = rng or np.random.default_rng(cfg.seed)
    if n_param(corner, cfg) < N_DEGENERATE:
        raise EmptyInterior("reflexivity check needs a strictly positive element")
    cover_cfg = SolverConfig(tol=cfg.tol, max_iters=cfg.max_iters, smoothing_start=cfg.smoothing_start,
                             smoothing_end=cfg.smoothing_end, bisection_tol=max(cfg.bisection_tol, 1e-8),
                             seed=cfg.seed)
    t_a, t_aa = [], []
    worst = 0.0
    for _ in range(trials):
        n0 = random_psd(rng, corner.dim)
        ta = ray_scale(corner, n0, cfg)
        taa = 1.0 / cone_cover_value(corner.generators, n0, cover_cfg)
        t_a.append(ta)
        t_aa.append(taa)
        worst = max(worst, abs(ta - taa) / max(abs(ta), 1e-12))
    return ReflexivityReport(t_a, t_aa, worst, worst <= threshold)


# diagonal expectation and lifts


def _check_frame(basis) -> np.ndarray:
    v = np.asarray(basis, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise NonOrthonormalBasis("frame must be a square matrix of column vectors")
    if np.linalg.norm(v.conj().T @ v - np.eye(v.shape[0])) > 1e-9:
        raise NonOrthonormalBasis("frame columns are not orthonormal")
    return v


def diag_expectation(a, basis=None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if basis is None:
        return np.diag(np.diag(a))
    v = _check_frame(basis)
    if v.shape[0] != a.shape[0]:
        raise DimensionMismatch("frame and matrix dimensions differ")
    weights = np.real(np.einsum("ji,jk,ki->i", v.conj(), a, v))
    return (v * weights) @ v.conj().T


@dataclass(frozen=True)
class DiagonalCorner:
    """Corner of nonnegative vectors, by vertex generators or by packing inequalities."""

    dim: int
    vgen: np.ndarray | None = None
    hpoly: np.ndarray | None = None

    def __post_init__(self):
        if (self.vgen is None) == (self.hpoly is None):
            raise RepresentationMismatch("give exactly one of vgen / hpoly")
        arr = np.atleast_2d(np.asarray(self.vgen if self.vgen is not None else self.hpoly, dtype=float))
        if arr.shape[1] != self.dim:
            raise DimensionMismatch(f"rows have length {arr.shape[1]}, dim is {self.dim}")
        if np.any(arr < 0):
            raise NotPSD("diagonal corner data must be nonnegative")
        object.__setattr__(self, "vgen" if self.vgen is not None else "hpoly", arr)

    @classmethod
    def from_vertices(cls, rows) -> DiagonalCorner:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return cls(rows.shape[1], vgen=rows)

    @classmethod
    def from_inequalities(cls, rows) -> DiagonalCorner:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return cls(rows.shape[1], hpoly=rows)

    @property
    def is_vgen(self) -> bool:
        return self.vgen is not None

    def flat_anti_blocker(self) -> DiagonalCorner:
        """Swap representations: ``{x >= 0 : <x, v> <= 1 for all v}`` and back."""
        if self.is_vgen:
            return DiagonalCorner(self.dim, hpoly=self.vgen.copy())
        return DiagonalCorner(self.dim, vgen=self.hpoly.copy())

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"point has shape {x.shape}")
        if np.any(x < -tol):
            return False
        x = np.clip(x, 0, None)
        if not self.is_vgen:
            return bool(np.all(self.hpoly @ x <= 1 + tol))
        # exists w in simplex with w @ V >= x
        m = self.vgen.shape[0]
        cons = [(np.ones(m), "=", 1.0)] + [(self.vgen[:, i], ">=", float(x[i]) - tol) for i in range(self.dim)]
        return lp_solve(np.zeros(m), cons).status == Status.CONVERGED

    def lifted(self) -> GeneratedCorner:
        if not self.is_vgen:
            raise RepresentationMismatch("lifting needs vertex generators")
        return GeneratedCorner(tuple(np.diag(v).astype(complex) for v in self.vgen))

    def to_json(self) -> dict:
        key = "vgen" if self.is_vgen else "hpoly"
        return {"dim": self.dim, key: getattr(self, key).tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> DiagonalCorner:
        if "vgen" in obj:
            return cls(int(obj["dim"]), vgen=np.asarray(obj["vgen"], dtype=float))
        if "hpoly" in obj:
            return cls(int(obj["dim"]), hpoly=np.asarray(obj["hpoly"], dtype=float))
        raise RepresentationMismatch("diagonal corner JSON needs 'vgen' or 'hpoly'")


def cube_corner(d: int) -> DiagonalCorner:
    return DiagonalCorner.from_vertices(np.ones((1, d)))


def simplex_corner(d: int) -> DiagonalCorner:
    return DiagonalCorner.from_vertices(np.eye(d))


def lift_membership(diag: DiagonalCorner, m, kind: str = "min", cfg: SolverConfig | None = None) -> Membership:
    """Membership in the smallest (``"min"``) or largest (``"max"``) lift of a diagonal corner.

    The smallest lift is ``her`` of the diagonal matrices; the largest is the
    set of PSD matrices whose diagonal lies in the corner.
    """
    m = as_hermitian(m)
    if m.shape != (diag.dim, diag.dim):
        raise DimensionMismatch(f"{m.shape} vs dim {diag.dim}")
    if kind == "min":
        if not diag.is_vgen:
            raise RepresentationMismatch("the smallest lift needs vertex generators")
        return membership(diag.lifted(), m, cfg)
    if kind != "max":
        raise ValueError(f"unknown lift kind {kind!r}")
    if np.linalg.eigvalsh(m)[0] < -GEN_PSD_TOL * (1 + np.linalg.norm(m)):
        return Membership.OUTSIDE
    return Membership.INSIDE if diag.contains(np.real(np.diag(m))) else Membership.OUTSIDE


def is_projection(p, tol: float = PROJ_TOL) -> bool:
    p = np.asarray(p, dtype=complex)
    return bool(np.linalg.norm(p @ p - p) <= tol and np.linalg.norm(p - p.conj().T) <= tol)


def snap_projection(p, tol: float = PROJ_TOL) -> np.ndarray:
    """Validate a projection and snap its spectrum to exact zeros and ones."""
    p = np.asarray(p, dtype=complex)
    if not is_projection(p, tol):
        raise NotProjection(f"||P^2 - P|| = {np.linalg.norm(p @ p - p):.3e}")
    w, u = np.linalg.eigh((p + p.conj().T) / 2)
    keep = u[:, w > 0.5]
    return keep @ keep.conj().T


def gamma_f_cover(proj_corner: GeneratedCorner, cfg: SolverConfig | None = None) -> float:
    """Fractional projection cover number; equals M for projection-generated corners."""
    for p in proj_corner.generators:
        if not is_projection(p):
            raise NotProjection("every generator must be a projection")
    return m_param(proj_corner, cfg)

"""Entropy of a state over a convex corner, and its classical (diagonal) special cases."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corner import DiagonalCorner, GeneratedCorner, N_DEGENERATE, gamma, membership_value, n_param_result
from .errors import DimensionMismatch, EmptyInterior, NotPSD, NotState, RepresentationMismatch, UnboundedDirection
from .hermlin import as_hermitian, as_state, rho_log_trace
from .optcore import (
    Membership,
    SolverConfig,
    Status,
    classify_margin,
    entropy_min_simplex,
    entropy_min_simplex_diag,
    lp_solve,
)


@dataclass
class EntropyResult:
    value: float
    minimizer: np.ndarray | None
    gap: float
    status: Status = Status.CONVERGED


def shannon(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def as_distribution(p, tol: float = 1e-10) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < -tol) or abs(p.sum() - 1) > tol:
        raise NotState("expected a probability vector")
    return np.clip(p, 0, None)


def von_neumann(rho) -> float:
    return shannon(np.clip(np.linalg.eigvalsh(as_state(rho)), 0, None))


def relative_entropy(rho, sigma) -> float:
    rho = as_state(rho)
    sigma = as_hermitian(sigma)
    if np.linalg.eigvalsh(sigma)[0] < -1e-8 * (1 + np.linalg.norm(sigma)):
        raise NotPSD("second argument must be positive semidefinite")
    cross = rho_log_trace(rho, sigma)
    if cross == -math.inf:
        return math.inf
    return -von_neumann(rho) - cross


def corner_entropy(corner: GeneratedCorner, rho, cfg: SolverConfig | None = None) -> EntropyResult:
    rho = as_state(rho)
    if rho.shape != (corner.dim, corner.dim):
        raise DimensionMismatch(f"state {rho.shape} vs corner dim {corner.dim}")
    res = entropy_min_simplex(corner.generators, rho, cfg)
    return EntropyResult(res.value, res.extras.get("minimizer"), res.gap, res.status)


def max_entropy_state(corner: GeneratedCorner, cfg: SolverConfig | None = None, verify: bool = True):
    """Largest entropy over the corner, ``-log N``, and a state attaining it.

    The state is the dual Gibbs state of the N solve. It nearly minimizes
    ``max_i <s, G_i>``, which pins the entropy at ``-log N``. It stays valid
    when the minimal eigenspace at the optimum is degenerate, where a single
    eigenvector would not.
    """
    res = n_param_result(corner, cfg)
    if res.value < N_DEGENERATE:
        raise EmptyInterior(f"N = {res.value:.3e}; the corner has no strictly positive element")
    value = -math.log(res.value)
    state = res.extras["dual_state"]
    state = (state + state.conj().T) / 2
    state = state / np.trace(state).real
    if verify:
        achieved = corner_entropy(corner, state, cfg).value
        if achieved < value - 1e-2:
            raise RuntimeError(f"certificate state reaches {achieved:.6g}, expected {value:.6g}")
    return value, state


def _coordinate_bounds(poly: DiagonalCorner) -> np.ndarray:
    return np.max(poly.hpoly, axis=0)


def polytope_entropy_diag(poly: DiagonalCorner, p, cfg: SolverConfig | None = None, max_rounds: int = 500) -> EntropyResult:
    """``min -sum p_i log v_i`` over ``{v >= 0 : A v <= 1}``.

    Column generation: the diagonal simplex engine runs over the vertices
    found so far, and an LP supplies the next vertex from the current
    gradient until the Frank-Wolfe gap closes.
    """
    cfg = cfg or SolverConfig()
    if poly.is_vgen:
        raise RepresentationMismatch("expected an inequality description")
    p = as_distribution(p)
    if p.shape != (poly.dim,):
        raise DimensionMismatch(f"distribution {p.shape} vs dim {poly.dim}")
    bounds = _coordinate_bounds(poly)
    supp = p > 0
    if np.any(bounds[supp] <= 0):
        bad = int(np.flatnonzero(supp & (bounds <= 0))[0])
        raise UnboundedDirection(f"coordinate {bad} is unbounded and carries weight")
    d = poly.dim
    verts = [np.eye(d)[i] / bounds[i] for i in range(d) if bounds[i] > 0]
    rows = [(row, "<=", 1.0) for row in poly.hpoly]
    gap = math.inf
    res = None
    for _ in range(max_rounds):
        res = entropy_min_simplex_diag(np.array(verts), p, cfg)
        x = res.extras["minimizer"]
        c = np.where(supp, p / np.where(supp, x, 1.0), 0.0)
        lp = lp_solve(c, rows, sense="max")
        if lp.status == Status.UNBOUNDED:
            raise UnboundedDirection("linear oracle is unbounded")
        gap = lp.value - 1.0
        if gap <= cfg.tol:
            break
        verts.append(np.clip(lp.point, 0, None))
    return EntropyResult(res.value, np.diag(res.extras["minimizer"]), max(gap, 0.0), res.status)


def vertex_entropy_diag(vgen: DiagonalCorner, p, cfg: SolverConfig | None = None) -> EntropyResult:
    if not vgen.is_vgen:
        raise RepresentationMismatch("expected vertex generators")
    p = as_distribution(p)
    res = entropy_min_simplex_diag(vgen.vgen, p, cfg)
    return EntropyResult(res.value, np.diag(res.extras["minimizer"]), res.gap, res.status)


@dataclass
class SplitReport:
    h: float
    h_corner: float
    h_anti: float
    residual: float
    passed: bool


def entropy_split_check(diag_gen: DiagonalCorner, p, cfg: SolverConfig | None = None, threshold: float = 1e-3) -> SplitReport:
    """Check ``H(p) = H_A(p) + H_{A flat}(p)`` on a vertex-generated diagonal corner."""
    p = as_distribution(p)
    if not diag_gen.is_vgen:
        raise RepresentationMismatch("expected vertex generators")
    supp = p > 0
    if np.any(diag_gen.vgen.sum(axis=0)[supp] <= 0):
        raise EmptyInterior("no generator combination is positive on the support of p")
    h = shannon(p)
    h1 = vertex_entropy_diag(diag_gen, p, cfg).value
    h2 = polytope_entropy_diag(diag_gen.flat_anti_blocker(), p, cfg).value
    residual = abs(h - h1 - h2)
    return SplitReport(h, h1, h2, residual, residual <= threshold)


@dataclass
class LowerBoundReport:
    entropy: float
    bound: float
    holds: bool
    equality: bool


def entropy_lower_bound_check(corner: GeneratedCorner, p, cfg: SolverConfig | None = None) -> LowerBoundReport:
    """``H_A(p) >= H(p) - log gamma(A)`` for diagonal generators, with the equality test ``gamma * p in A``."""
    p = as_distribution(p)
    for g in corner.generators:
        if np.linalg.norm(g - np.diag(np.diag(g))) > 1e-12:
            raise RepresentationMismatch("generators must be diagonal")
    rho = np.diag(p).astype(complex)
    h = corner_entropy(corner, rho, cfg).value
    g = gamma(corner)
    bound = shannon(p) - math.log(g)
    verdict = classify_margin(membership_value(corner, g * rho, cfg).value, inside=-1e-6)
    return LowerBoundReport(h, bound, h >= bound - 1e-4, verdict == Membership.INSIDE)

"""Convex engines over the probability simplex, plus a dense LP solver.

* :func:`max_min_eig_simplex` maximizes ``lambda_min(C + sum_i w_i F_i)`` over
  the simplex through a log-sum-exp smoothing annealed towards zero; each
  smoothed problem is solved by projected Newton steps on the exact Hessian.
* :func:`cone_cover_value` finds the least ``t`` with ``t * sum_i w_i G_i >= D``.
* :func:`entropy_min_simplex` minimizes ``-Tr(rho log sum_i w_i G_i)``.
* :func:`lp_solve` is a two-phase tableau simplex with Bland's rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, NotPSD, NotState
from .hermlin import PSD_TOL, log_divided_differences


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class Membership(str, enum.Enum):
    INSIDE = "Inside"
    OUTSIDE = "Outside"
    INDETERMINATE = "Indeterminate"


INSIDE_MARGIN = -1e-7
OUTSIDE_MARGIN = -1e-5


def classify_margin(value: float, inside: float = INSIDE_MARGIN, outside: float = OUTSIDE_MARGIN) -> Membership:
    if value >= inside:
        return Membership.INSIDE
    if value <= outside:
        return Membership.OUTSIDE
    return Membership.INDETERMINATE


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_iters: int = 20000
    smoothing_start: float = 1.0
    smoothing_end: float = 1e-6
    bisection_tol: float = 1e-9
    seed: int = 42

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.smoothing_end > self.smoothing_start:
            raise ValueError("smoothing_end must not exceed smoothing_start")


@dataclass
class OptResult:
    value: float
    point: np.ndarray
    gap: float
    iterations: int
    status: Status
    extras: dict = field(default_factory=dict)


def _stack(mats, dim: int | None = None) -> np.ndarray:
    if len(mats) == 0:
        raise DimensionMismatch("empty matrix family")
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if len({m.shape for m in mats}) != 1:
        raise DimensionMismatch(f"mixed matrix shapes {sorted({m.shape for m in mats})}")
    arr = np.array(mats)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch("matrices must be square and share a dimension")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.shape[1]}")
    return arr


def _gibbs(x: np.ndarray, tau: float):
    w, u = np.linalg.eigh(x)
    z = np.exp(-(w - w[0]) / tau)
    return w, u, z / z.sum()


def _anneal(cfg: SolverConfig) -> list[float]:
    taus = []
    tau = cfg.smoothing_start
    while tau > cfg.smoothing_end * (1 + 1e-12):
        taus.append(tau)
        tau *= 0.1
    taus.append(cfg.smoothing_end)
    # one extra decade below the configured end sharpens the certificate
    taus.append(cfg.smoothing_end * 0.1)
    return taus


def max_min_eig_simplex(F, C=None, cfg: SolverConfig | None = None, lam0=None, sign_only: bool = False) -> OptResult:
    """Maximize the minimum eigenvalue of ``C + sum_i w_i F_i`` over the simplex.

    The returned ``gap`` is a certified bound: for the Gibbs state ``s`` of the
    final iterate, ``<s, C> + max_i <s, F_i>`` bounds the optimum from above and
    the exact ``lambda_min`` at the returned weights bounds it from below.
    ``extras`` holds the minimal eigenvector (``eigvec``), the dual state
    (``dual_state``) and the upper bound. With ``sign_only`` the solve stops as
    soon as the sign of the optimum is certified.
    """
    cfg = cfg or SolverConfig()
    Fs = _stack(F)
    m, d = Fs.shape[0], Fs.shape[1]
    C = np.zeros((d, d), dtype=complex) if C is None else np.asarray(C, dtype=complex)
    if C.shape != (d, d):
        raise DimensionMismatch(f"offset has shape {C.shape}, family dimension {d}")
    lam = np.full(m, 1.0 / m) if lam0 is None else np.clip(np.asarray(lam0, dtype=float), 0, None)
    lam = lam / lam.sum()
    iters = 0
    status = Status.CONVERGED
    taus = _anneal(cfg)
    best = None
    for tau in taus:
        for _ in range(cfg.max_iters):
            iters += 1
            sm = _smoothed(Fs, C, lam, tau, hessian=True)
            if sign_only:
                lower, upper = sm.w[0], sm.upper(C)
                if lower > 0 or upper < 0:
                    return OptResult(float(lower), lam, float(upper - lower), iters, Status.CONVERGED, {"upper": float(upper)})
            active = lam > 0
            spread = sm.g.max() - sm.g[active].min()
            if spread <= 1e-3 * tau or spread < 1e-15:
                break
            nxt = _newton_step(Fs, C, lam, tau, sm)
            if np.abs(nxt - lam).max() <= 1e-15:
                break
            lam = nxt
        else:
            status = Status.MAX_ITERS
        cand = _smoothed(Fs, C, lam, tau)
        if best is None or cand.upper(C) - cand.w[0] < best[1].upper(C) - best[1].w[0]:
            best = (lam.copy(), cand)
    lam, sm = best
    sigma = (sm.u * sm.p) @ sm.u.conj().T
    upper = float(sm.upper(C))
    lower = float(sm.w[0])
    gap = max(upper - lower, 0.0)
    if status == Status.CONVERGED and gap > max(cfg.tol, 1e-6) * (1 + abs(lower)):
        status = Status.MAX_ITERS
    return OptResult(lower, lam, gap, iters, status, {"eigvec": sm.u[:, 0], "dual_state": sigma, "upper": upper})


class _Smoothed:
    """Value and derivatives of ``-tau log Tr exp(-X/tau)`` along the weights."""

    __slots__ = ("w", "u", "p", "ft", "g", "value", "hess")

    def upper(self, C):
        return float(np.real(np.sum(self.p * np.einsum("ji,jk,ki->i", self.u.conj(), C, self.u)))) + float(self.g.max())


def _smoothed(Fs, C, lam, tau, hessian: bool = False) -> _Smoothed:
    out = _Smoothed()
    x = C + np.tensordot(lam, Fs, 1)
    w, u, p = _gibbs(x, tau)
    ft = np.einsum("ji,kjl,lm->kim", u.conj(), Fs, u)
    out.w, out.u, out.p, out.ft = w, u, p, ft
    out.g = np.real(np.einsum("k,ikk->i", p, ft))
    out.value = _smoothed_value(w, tau)
    out.hess = None
    if hessian:
        m, d = Fs.shape[0], Fs.shape[1]
        kern = _second_kernel(w, p, tau)
        a = ft.reshape(m, d * d)
        out.hess = np.real((a * kern.reshape(-1)) @ a.conj().T) + np.outer(out.g, out.g) / tau
    return out


def _smoothed_value(w, tau):
    return float(w[0] - tau * np.log(np.sum(np.exp(-(w - w[0]) / tau))))


def _second_kernel(w, p, tau):
    dw = w[:, None] - w[None, :]
    dp = p[:, None] - p[None, :]
    close = np.abs(dw) <= 1e-12 * max(1.0, np.abs(w).max())
    return np.where(close, -(p[:, None] + p[None, :]) / (2 * tau), dp / np.where(close, 1.0, dw))


def _newton_step(Fs, C, lam, tau, sm: _Smoothed):
    """Projected Newton step: simplex QP on the local model, then backtracking."""
    m = lam.shape[0]
    q = -(sm.hess + sm.hess.T) / 2
    q += (1e-12 * max(np.trace(q), 1e-300) / m) * np.eye(m)
    x = simplex_qp(q, -sm.g - q @ lam, lam)
    direction = x - lam
    slope = float(sm.g @ direction)
    if slope <= 0:
        return lam
    t = 1.0
    while t > 1e-12:
        w = np.linalg.eigvalsh(C + np.tensordot(lam + t * direction, Fs, 1))
        if _smoothed_value(w, tau) >= sm.value + 1e-4 * t * slope:
            break
        t *= 0.5
    out = np.clip(lam + t * direction, 0.0, None)
    return out / out.sum()


def simplex_qp(Q, c, x0, max_iter: int = 1000) -> np.ndarray:
    """Minimize ``c.x + x'Qx/2`` over the simplex by a primal active-set method.

    ``Q`` must be positive semidefinite; ``x0`` is a feasible starting point.
    """
    m = c.shape[0]
    x = np.asarray(x0, dtype=float).copy()
    free = x > 0
    scale = 1.0 + np.abs(c).max() + np.abs(Q).max()
    for _ in range(max_iter):
        idx = np.flatnonzero(free)
        k = idx.shape[0]
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = Q[np.ix_(idx, idx)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        sol = np.linalg.lstsq(kkt, np.append(-c[idx], 1.0), rcond=None)[0]
        y = np.zeros(m)
        y[idx] = sol[:k]
        step = y - x
        if np.abs(step).max() <= 1e-13:
            out = np.flatnonzero(~free)
            if out.shape[0] == 0:
                break
            grad = c + Q @ x
            mult = grad[out] - grad[idx].mean()
            j = int(np.argmin(mult))
            if mult[j] >= -1e-12 * scale:
                break
            free[out[j]] = True
            continue
        neg = free & (step < 0)
        alpha, block = 1.0, -1
        if np.any(neg):
            ratios = -x[neg] / step[neg]
            jj = int(np.argmin(ratios))
            if ratios[jj] < 1.0:
                alpha, block = float(ratios[jj]), int(np.flatnonzero(neg)[jj])
        x = x + alpha * step
        if block >= 0:
            x[block] = 0.0
            free[block] = False
        x = np.clip(x, 0.0, None)
        x /= x.sum()
    return x


def _check_psd_family(mats, what: str = "generator"):
    for k, g in enumerate(mats):
        w = np.linalg.eigvalsh(g)
        if w[0] < -PSD_TOL * (1 + np.linalg.norm(g)):
            raise NotPSD(f"{what} {k} has minimum eigenvalue {w[0]:.3e}")


def cone_cover_value(G, D, cfg: SolverConfig | None = None) -> float:
    """Least ``t >= 0`` such that ``t * sum_i w_i G_i >= D`` for some simplex point.

    Returns ``math.inf`` when no finite ``t`` up to ``1 / bisection_tol`` works.
    The root of the monotone feasibility function is bracketed by doubling and
    located with Brent's method.
    """
    cfg = cfg or SolverConfig()
    Gs = _stack(G)
    D = np.asarray(D, dtype=complex)
    _check_psd_family(Gs)
    _check_psd_family([D], "target")
    if np.linalg.norm(D) == 0:
        return 0.0
    state = {"lam": None}

    def feas(t: float, sign_only: bool = False) -> float:
        res = max_min_eig_simplex(t * Gs, -D, cfg, lam0=state["lam"], sign_only=sign_only)
        state["lam"] = res.point
        return res.value

    t_max = 1.0 / cfg.bisection_tol
    hi = 1.0
    while feas(hi, sign_only=True) < 0:
        hi *= 2.0
        if hi > t_max:
            return math.inf
    lo = hi / 2.0
    while lo > 1e-12 and feas(lo, sign_only=True) >= 0:
        hi, lo = lo, lo / 2.0
    if lo <= 1e-12:
        return 0.0
    return float(brentq(feas, lo, hi, xtol=cfg.bisection_tol * hi, rtol=4 * np.finfo(float).eps, maxiter=200))


def _log_objective(rho_t, w):
    """-Tr(rho log A) given A's spectrum ``w`` and rho in A's eigenbasis."""
    return -float(np.real(np.sum(np.diag(rho_t) * np.log(w))))


def entropy_min_simplex(G, rho, cfg: SolverConfig | None = None, eps: float = 1e-9) -> OptResult:
    """Minimize ``-Tr(rho log sum_i w_i G_i)`` over the simplex.

    Returns value ``math.inf`` with status Infeasible when rho has weight on
    the common kernel of the generators. Otherwise the problem is solved on
    the range of ``sum_i G_i`` with iterates mixed towards the barycentre by
    ``eps``, which keeps every iterate strictly positive there.
    """
    cfg = cfg or SolverConfig()
    Gs = _stack(G)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != Gs.shape[1:]:
        raise DimensionMismatch(f"state shape {rho.shape} vs generators {Gs.shape[1:]}")
    _check_psd_family(Gs)
    wr = np.linalg.eigvalsh(rho)
    if wr[0] < -1e-10 or abs(np.trace(rho).real - 1) > 1e-8:
        raise NotState("rho must be a density matrix")
    m = Gs.shape[0]
    bary = Gs.mean(axis=0)
    wb, ub = np.linalg.eigh(bary)
    keep = wb > 1e-12 * max(1.0, wb.max())
    kernel = ub[:, ~keep]
    if kernel.shape[1] and np.real(np.trace(kernel.conj().T @ rho @ kernel)) > 1e-10:
        return OptResult(math.inf, np.full(m, 1.0 / m), 0.0, 0, Status.INFEASIBLE)
    basis = ub[:, keep]
    Gr = np.einsum("ji,kjl,lm->kim", basis.conj(), Gs, basis)
    rr = basis.conj().T @ rho @ basis
    bary_r = Gr.mean(axis=0)

    def mix(lam):
        return (1 - eps) * np.tensordot(lam, Gr, 1) + eps * bary_r

    def evaluate(lam):
        a = mix(lam)
        w, u = np.linalg.eigh(a)
        rt = u.conj().T @ rr @ u
        val = _log_objective(rt, w)
        grad_t = log_divided_differences(w) * rt
        gt = np.einsum("ji,kjl,lm->kim", u.conj(), Gr, u)
        # derivative of the objective w.r.t. w_k, scaled by (1 - eps)
        g = -(1 - eps) * np.real(np.einsum("ij,kji->k", grad_t, gt))
        return val, g

    lam = np.full(m, 1.0 / m)
    val, g = evaluate(lam)
    history = [val]
    iters = 0
    gap = math.inf
    status = Status.MAX_ITERS
    for iters in range(1, cfg.max_iters + 1):
        active = np.flatnonzero(lam > 0)
        i = int(np.argmin(g))
        j = int(active[np.argmax(g[active])])
        gap = float(g @ lam - g[i])
        if gap <= cfg.tol:
            status = Status.CONVERGED
            break
        lam = _pairwise_line_search(lam, i, j, g[i] - g[j], _slice_slope(lam, i, j, Gr, rr, bary_r, eps))
        val, g = evaluate(lam)
        history.append(val)
    a = np.tensordot(lam, Gs, 1)
    return OptResult(val, lam, max(gap, 0.0), iters, status, {"minimizer": a, "history": history})


def _pairwise_line_search(lam, i, j, slope0, slope):
    """Exact line search on a convex slice: root of the directional derivative.

    ``slope(t)`` is the derivative of the objective at ``lam + t (e_i - e_j)``.
    """
    tmax = lam[j]
    if slope0 >= 0:
        return lam
    end = slope(tmax)
    if end <= 0:
        t = tmax
    else:
        t = brentq(slope, 0.0, tmax, xtol=1e-15 * max(tmax, 1e-300), rtol=1e-14, maxiter=100)
    out = lam.copy()
    out[i] += t
    out[j] = 0.0 if t >= tmax else max(out[j] - t, 0.0)
    return out / out.sum()


def _slice_slope(lam, i, j, Gr, rr, bary_r, eps):
    base = (1 - eps) * np.tensordot(lam, Gr, 1) + eps * bary_r
    e = (1 - eps) * (Gr[i] - Gr[j])

    def slope(t):
        w, u = np.linalg.eigh(base + t * e)
        kern = log_divided_differences(w) * (u.conj().T @ rr @ u)
        return -float(np.real(np.vdot(u.conj().T @ e @ u, kern)))

    return slope


def entropy_min_simplex_diag(V, p, cfg: SolverConfig | None = None, eps: float = 1e-12) -> OptResult:
    """Vector specialization: minimize ``-sum_i p_i log (w @ V)_i`` over the simplex.

    ``V`` has one nonnegative generator per row.
    """
    cfg = cfg or SolverConfig()
    V = np.asarray(V, dtype=float)
    p = np.asarray(p, dtype=float)
    if V.ndim != 2 or V.shape[1] != p.shape[0]:
        raise DimensionMismatch(f"generators {V.shape} vs distribution {p.shape}")
    m = V.shape[0]
    supp = p > 0
    bary = V.mean(axis=0)
    if np.any(bary[supp] <= 0):
        return OptResult(math.inf, np.full(m, 1.0 / m), 0.0, 0, Status.INFEASIBLE)
    Vs, ps, bs = V[:, supp], p[supp], bary[supp]

    def evaluate(lam):
        x = (1 - eps) * (lam @ Vs) + eps * bs
        return -float(ps @ np.log(x)), -(1 - eps) * (Vs @ (ps / x))

    lam = np.full(m, 1.0 / m)
    val, g = evaluate(lam)
    status = Status.MAX_ITERS
    gap = math.inf
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        active = np.flatnonzero(lam > 0)
        i = int(np.argmin(g))
        j = int(active[np.argmax(g[active])])
        gap = float(g @ lam - g[i])
        if gap <= cfg.tol:
            status = Status.CONVERGED
            break
        step = np.zeros(m)
        step[i], step[j] = 1.0, -1.0
        lam = _pairwise_line_search(lam, i, j, g[i] - g[j], lambda t, base=lam, e=step: float(evaluate(base + t * e)[1] @ e))
        val, g = evaluate(lam)
    return OptResult(val, lam, max(gap, 0.0), iters, status, {"minimizer": lam @ V})


def lp_solve(c, constraints, sense: str = "min", pivot_tol: float = 1e-9, max_pivots: int = 100000) -> OptResult:
    """Dense two-phase simplex with Bland's rule; variables are implicitly ``>= 0``.

    ``constraints`` is a list of ``(row, relation, rhs)`` with relation one of
    ``"<="``, ``">="``, ``"="``.
    """
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    if n < 1:
        raise DimensionMismatch("need at least one variable")
    if sense not in ("min", "max"):
        raise ValueError(f"unknown sense {sense!r}")
    rows, rels, rhs = [], [], []
    for row, rel, b in constraints:
        row = np.asarray(row, dtype=float)
        if row.shape != (n,):
            raise DimensionMismatch(f"constraint row has shape {row.shape}, expected ({n},)")
        if rel not in ("<=", ">=", "="):
            raise ValueError(f"unknown relation {rel!r}")
        if b < 0:
            row, b = -row, -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append(row)
        rels.append(rel)
        rhs.append(float(b))
    cost = c if sense == "min" else -c
    mrows = len(rows)
    n_slack = sum(r != "=" for r in rels)
    n_art = sum(r != "<=" for r in rels)
    total = n + n_slack + n_art
    T = np.zeros((mrows, total + 1))
    basis = []
    s_col, a_col = n, n + n_slack
    art_cols = []
    for k, (row, rel, b) in enumerate(zip(rows, rels, rhs)):
        T[k, :n] = row
        T[k, -1] = b
        if rel == "<=":
            T[k, s_col] = 1.0
            basis.append(s_col)
            s_col += 1
        else:
            if rel == ">=":
                T[k, s_col] = -1.0
                s_col += 1
            T[k, a_col] = 1.0
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
    pivots = 0

    def run(obj_row, allowed):
        nonlocal pivots
        while True:
            reduced = obj_row[:-1]
            entering = next((jj for jj in range(total) if allowed[jj] and reduced[jj] < -pivot_tol), None)
            if entering is None:
                return Status.CONVERGED
            col = T[:, entering]
            ratios = [(T[r, -1] / col[r], basis[r], r) for r in range(mrows) if col[r] > pivot_tol]
            if not ratios:
                return Status.UNBOUNDED
            best = min(rt for rt, _, _ in ratios)
            leave = min((b_, r) for rt, b_, r in ratios if rt <= best + pivot_tol)[1]
            _pivot(T, obj_row, leave, entering)
            basis[leave] = entering
            pivots += 1
            if pivots > max_pivots:
                return Status.MAX_ITERS

    allowed = np.ones(total, dtype=bool)
    if art_cols:
        obj = np.zeros(total + 1)
        obj[art_cols] = 1.0
        for r in range(mrows):
            if basis[r] in art_cols:
                obj -= T[r]
        st = run(obj, allowed)
        if st == Status.MAX_ITERS:
            return OptResult(math.nan, np.zeros(n), math.inf, pivots, st)
        if -obj[-1] > 1e-7 * (1 + max(rhs, default=0.0)):
            return OptResult(math.nan, np.zeros(n), math.inf, pivots, Status.INFEASIBLE)
        # drive remaining artificials out of the basis where possible
        for r in range(mrows):
            if basis[r] in art_cols:
                cand = next((jj for jj in range(n + n_slack) if abs(T[r, jj]) > pivot_tol), None)
                if cand is not None:
                    _pivot(T, obj, r, cand)
                    basis[r] = cand
        allowed[art_cols] = False
    obj = np.zeros(total + 1)
    obj[:n] = cost
    for r in range(mrows):
        if obj[basis[r]] != 0:
            obj -= obj[basis[r]] * T[r]
    st = run(obj, allowed)
    x = np.zeros(total)
    for r in range(mrows):
        x[basis[r]] = T[r, -1]
    x = x[:n]
    if st == Status.UNBOUNDED:
        return OptResult(math.inf if sense == "max" else -math.inf, x, math.inf, pivots, st)
    value = float(c @ x)
    return OptResult(value, x, 0.0, pivots, st)


def _pivot(T, obj, r, col):
    T[r] /= T[r, col]
    for k in range(T.shape[0]):
        if k != r and T[k, col] != 0:
            T[k] -= T[k, col] * T[r]
    if obj[col] != 0:
        obj -= obj[col] * T[r]

"""Named numerical check suites shared by ``selftest``, the acceptance run and the scripts.

Each suite returns a :class:`SuiteResult` with a pass flag and the worst
observed metrics, so callers can print one line per suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import corner as cn
from . import entropy as en
from . import graphs as gr
from . import ncgraphs as nc
from .hermlin import eigh, log_trace_gradient, random_psd, random_state, rho_log_trace
from .optcore import SolverConfig
from .tensorprod import max_tensor, product_entropy_check


@dataclass
class SuiteResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} ({shown}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.3g}"
    return str(v)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# reference table for the builtin families


@dataclass
class Row:
    system: str
    parameter: str
    computed: float
    expected: float
    delta: float
    passed: bool


def _builtin_expectations(name: str) -> dict:
    key, dstr = name.split(":")
    d = int(dstr)
    if key == "ci":
        return {"alpha": d, "omega": 1, "chi_f": 1, "Omega_f": d, "omega_tilde": 0 if d >= 2 else 1,
                "Omega_tilde_f": math.inf if d >= 2 else 1}
    if key == "t":
        if d == 2:
            return {"Omega_tilde_f": 2, "Omega_tilde": 2, "omega_tilde": 1}
        return {"omega_tilde": 1, "Omega_tilde_f": math.inf}
    if key == "s":
        out = {"Omega_f": 1, "Omega": 1}
        if d == 2:
            out["Omega_tilde_f"] = 2
        return out
    raise KeyError(name)


BUILTIN_FAMILIES = ("ci:2", "ci:3", "ci:4", "t:2", "t:3", "t:4", "s:2", "s:3", "s:4")


def builtin_rows(families=BUILTIN_FAMILIES, cfg: SolverConfig | None = None) -> list[Row]:
    rows = []
    for name in families:
        params = nc.nc_params(nc.builtin_system(name), cfg)
        for key, want in _builtin_expectations(name).items():
            got = float(getattr(params, key))
            if math.isinf(want) or math.isinf(got):
                delta = 0.0 if got == want else math.inf
                ok = got == want
            else:
                delta = abs(got - want)
                ok = delta <= 1e-4
            rows.append(Row(name, key, got, float(want), delta, ok))
    return rows


@_timed
def builtin_table_suite(cfg: SolverConfig | None = None) -> SuiteResult:
    rows = builtin_rows(cfg=cfg)
    bad = [f"{r.system}/{r.parameter}" for r in rows if not r.passed]
    return SuiteResult("builtin-table", not bad, {"rows": len(rows), "failed": len(bad)})


@_timed
def duality_suite(n: int = 50, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_mn, worst_sup = 0.0, 0.0
    for _ in range(n):
        c = cn.random_standard_corner(rng)
        rep = cn.param_report(c, cfg, support_route=True)
        worst_mn = max(worst_mn, abs(rep.m_param * rep.n_param - 1))
        worst_sup = max(worst_sup, abs(rep.m_param - rep.gamma_ab))
    return SuiteResult("duality", worst_mn <= 1e-4 and worst_sup <= 1e-4,
                       {"corners": n, "max|MN-1|": worst_mn, "max|M-gamma_ab|": worst_sup})


@_timed
def reflexivity_suite(n: int = 20, rays: int = 50, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        c = cn.random_standard_corner(rng)
        worst = max(worst, cn.reflexivity_ray_check(c, rays, cfg, rng).max_discrepancy)
    return SuiteResult("reflexivity", worst <= 1e-3, {"corners": n, "rays": rays, "max_discrepancy": worst})


@_timed
def max_entropy_suite(n: int = 20, states: int = 100, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_cert, worst_excess = 0.0, -math.inf
    in_window = True
    for _ in range(n):
        c = cn.random_standard_corner(rng)
        value, state = en.max_entropy_state(c, cfg, verify=False)
        h = en.corner_entropy(c, state, cfg).value
        worst_cert = max(worst_cert, abs(h - value))
        in_window &= value - 1e-2 <= h <= value + 1e-3
        for _ in range(states):
            r = random_state(rng, c.dim, int(rng.integers(1, c.dim + 1)))
            worst_excess = max(worst_excess, en.corner_entropy(c, r, cfg).value - value)
    return SuiteResult("max-entropy", in_window and worst_excess <= 1e-3,
                       {"corners": n, "states": states, "max|H(cert)+logN|": worst_cert,
                        "max excess": worst_excess})


def splitting_corners() -> dict:
    return {
        "vp(C5)": gr.vp_corner(gr.cycle_graph(5)),
        "vp(C4)": gr.vp_corner(gr.cycle_graph(4)),
        "vp(K3)": gr.vp_corner(gr.complete_graph(3)),
        "cube3": cn.cube_corner(3),
        "simplex3": cn.simplex_corner(3),
    }


@_timed
def splitting_suite(n: int = 20, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for corner in splitting_corners().values():
        for _ in range(n):
            p = rng.dirichlet(np.ones(corner.dim))
            worst = max(worst, en.entropy_split_check(corner, p, cfg).residual)
    return SuiteResult("splitting", worst <= 1e-3, {"corners": 5, "per_corner": n, "max_residual": worst})


def bridge_graphs() -> dict:
    return {"C5": gr.cycle_graph(5), "C4": gr.cycle_graph(4), "K3": gr.complete_graph(3),
            "Petersen": gr.petersen_graph()}


@_timed
def bridge_suite(n: int = 10, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    """Graph systems against classical graphs: entropy, chi_f, and the chi_f = omega_f runtime check."""
    rng = np.random.default_rng(seed)
    worst_h, worst_chi = 0.0, 0.0
    for g in bridge_graphs().values():
        s = nc.opsys_from_graph(g)
        params = nc.nc_params(s, cfg)
        worst_chi = max(worst_chi, abs(params.chi_f - gr.chi_f_lp(g).value))
        for _ in range(n):
            p = rng.dirichlet(np.ones(g.n))
            h_nc = nc.nc_graph_entropy(s, np.diag(p).astype(complex), cfg, check_classical=False).value
            worst_h = max(worst_h, abs(h_nc - gr.korner_entropy(g, p, cfg)))
    c5 = gr.chi_f_lp(gr.cycle_graph(5)).rational
    ok = worst_h <= 1e-3 and worst_chi <= 1e-4 and c5 == 2.5
    return SuiteResult("classical-bridge", ok, {"max|dH|": worst_h, "max|dchi_f|": worst_chi, "chi_f(C5)": str(c5)})


@_timed
def fractional_duality_suite(cfg: SolverConfig | None = None) -> SuiteResult:
    worst = 0.0
    systems = [nc.builtin_system(n) for n in BUILTIN_FAMILIES] + [nc.opsys_from_graph(g) for g in bridge_graphs().values()]
    for s in systems:
        p = nc.nc_params(s, cfg)
        worst = max(worst, abs(p.chi_f - p.omega_f))
    return SuiteResult("chi_f=omega_f", worst <= 1e-4, {"systems": len(systems), "max_diff": worst})


@_timed
def tensor_suite(n: int = 20, states: int = 20, seed: int = 42, cfg: SolverConfig | None = None) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    pairs = []
    for _ in range(n):
        a = cn.random_standard_corner(rng, d=int(rng.integers(2, 4)), m=int(rng.integers(2, 5)))
        b = cn.random_standard_corner(rng, d=int(rng.integers(2, 4)), m=int(rng.integers(2, 5)))
        pairs.append((a, b))
        ra, rb, rp = cn.param_report(a, cfg), cn.param_report(b, cfg), cn.param_report(max_tensor(a, b), cfg)
        for key in ("gamma", "n_param", "m_param"):
            x, y, z = getattr(ra, key), getattr(rb, key), getattr(rp, key)
            worst = max(worst, abs(z - x * y) / (1 + x * y))
    worst_violation = -math.inf
    for k in range(states):
        a, b = pairs[k % len(pairs)]
        rho = random_state(rng, a.dim * b.dim)
        rep = product_entropy_check(a, b, rho, cfg)
        worst_violation = max(worst_violation, rep.left - rep.right)
    return SuiteResult("tensor", worst <= 1e-3 and worst_violation <= 1e-3,
                       {"max_rel_mult": worst, "max_violation": worst_violation})


@_timed
def sequences_suite(cfg: SolverConfig | None = None) -> SuiteResult:
    seq = gr.rate_sequences(gr.cycle_graph(5), 2)
    alpha_ok = seq.alpha_seq[1] == math.sqrt(5)
    floor_ok = all(c >= f - 1e-9 for c, f in zip(seq.chi_seq, seq.chi_f_floor))
    worst = -math.inf
    for name in BUILTIN_FAMILIES:
        rep = nc.capacity_bounds(nc.builtin_system(name), 2, cfg)
        worst = max(worst, max(rep.lower) - rep.Omega_tilde_f)
    return SuiteResult("rate-sequences", alpha_ok and floor_ok and worst <= 1e-6,
                       {"alpha(C5^2)^(1/2)": seq.alpha_seq[1], "chi_seq": seq.chi_seq,
                        "max(lower - Omega~_f)": worst})


@_timed
def numerics_suite(n: int = 100, seed: int = 42) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_grad, worst_rec = 0.0, 0.0
    for _ in range(n):
        d = int(rng.integers(1, 6))
        rho = random_state(rng, d)
        a = random_psd(rng, d) + 0.2 * np.eye(d)
        h = random_psd(rng, d) - random_psd(rng, d)
        g = log_trace_gradient(rho, a)
        step = 1e-5
        fd = (rho_log_trace(rho, a + step * h) - rho_log_trace(rho, a - step * h)) / (2 * step)
        an = float(np.real(np.vdot(h, g)))
        worst_grad = max(worst_grad, abs(fd - an) / max(abs(an), 1e-3))
        x = random_psd(rng, d) - random_psd(rng, d)
        for method in ("lapack", "jacobi"):
            w, u = eigh(x, method)
            rec = np.linalg.norm((u * w) @ u.conj().T - x) / (1 + np.linalg.norm(x))
            worst_rec = max(worst_rec, rec)
    return SuiteResult("numerics", worst_grad <= 1e-5 and worst_rec <= 1e-9,
                       {"max_grad_rel": worst_grad, "max_reconstruction": worst_rec})


def selftest_suites(cfg: SolverConfig | None = None, seed: int = 42):
    """Reduced-size runs of every suite; full sizes live in the acceptance test."""
    yield numerics_suite(20, seed)
    yield builtin_table_suite(cfg)
    yield duality_suite(8, seed, cfg)
    yield reflexivity_suite(3, 10, seed, cfg)
    yield max_entropy_suite(3, 10, seed, cfg)
    yield splitting_suite(5, seed, cfg)
    yield bridge_suite(3, seed, cfg)
    yield fractional_duality_suite(cfg)
    yield tensor_suite(4, 4, seed, cfg)
    yield sequences_suite(cfg)

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog, minimize

from cornerlab.errors import DimensionMismatch, NotPSD
from cornerlab.hermlin import random_psd, random_state
from cornerlab.optcore import (
    Membership,
    SolverConfig,
    Status,
    classify_margin,
    cone_cover_value,
    entropy_min_simplex,
    entropy_min_simplex_diag,
    lp_solve,
    max_min_eig_simplex,
    simplex_qp,
)

seeds = st.integers(0, 2**32 - 1)
E1 = np.diag([1.0, 0.0]).astype(complex)
E2 = np.diag([0.0, 1.0]).astype(complex)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(smoothing_start=1e-3, smoothing_end=1e-2)


def test_margin_rule():
    assert classify_margin(-1e-8) == Membership.INSIDE
    assert classify_margin(-1e-6) == Membership.INDETERMINATE
    assert classify_margin(-1e-4) == Membership.OUTSIDE


def test_max_min_eig_symmetric_pair():
    res = max_min_eig_simplex([E1, E2])
    assert res.value == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(res.point, [0.5, 0.5], atol=1e-6)
    assert res.status == Status.CONVERGED


def test_max_min_eig_identity():
    assert max_min_eig_simplex([np.eye(4)]).value == pytest.approx(1.0)


def test_max_min_eig_against_grid():
    plus = 0.5 * np.ones((2, 2))
    fam = [E1, E2, plus]
    h = 1e-3
    a = np.arange(0, 1 + h / 2, h)
    best = -np.inf
    for x in a:
        y = a[a <= 1 - x + 1e-12]
        z = 1 - x - y
        # closed-form minimum eigenvalue of [[x + z/2, z/2], [z/2, y + z/2]]
        tr = x + y + z
        det = (x + z / 2) * (y + z / 2) - z * z / 4
        best = max(best, float(np.max(tr / 2 - np.sqrt(np.maximum(tr * tr / 4 - det, 0)))))
    res = max_min_eig_simplex(fam)
    assert abs(res.value - best) <= 2e-3


@given(seed=seeds, d=st.integers(2, 5), m=st.integers(1, 6))
def test_max_min_eig_certificate(seed, d, m):
    rng = np.random.default_rng(seed)
    fam = [random_psd(rng, d, int(rng.integers(1, d + 1))) for _ in range(m)]
    c = -random_psd(rng, d) * 0.3
    res = max_min_eig_simplex(fam, c)
    x = c + np.tensordot(res.point, np.array(fam), 1)
    assert np.linalg.eigvalsh(x)[0] >= res.value - 1e-12
    assert res.gap >= 0
    assert res.gap <= 1e-5
    # the dual state bounds the optimum from above at every simplex point
    sigma = res.extras["dual_state"]
    for w in rng.dirichlet(np.ones(m), size=20):
        val = np.linalg.eigvalsh(c + np.tensordot(w, np.array(fam), 1))[0]
        assert val <= res.extras["upper"] + 1e-9
    assert abs(np.trace(sigma).real - 1) < 1e-10


def test_max_min_eig_degenerate_optimum():
    # the optimum has a doubly degenerate minimal eigenspace
    rng = np.random.default_rng(1)
    from cornerlab.corner import random_standard_corner
    corner = random_standard_corner(rng)
    res = max_min_eig_simplex(corner.generators)
    assert res.gap < 1e-6


def test_max_min_eig_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        max_min_eig_simplex([np.eye(2), np.eye(3)])
    with pytest.raises(DimensionMismatch):
        max_min_eig_simplex([np.eye(2)], np.eye(3))


def test_cone_cover_examples():
    assert cone_cover_value([np.eye(3)], np.eye(3)) == pytest.approx(1.0, abs=1e-8)
    assert cone_cover_value([E1, E2], np.eye(2)) == pytest.approx(2.0, abs=1e-7)
    assert cone_cover_value([E1], np.eye(2)) == math.inf
    assert cone_cover_value([E1, E2], np.zeros((2, 2))) == 0.0


def test_cone_cover_rejects_non_psd():
    with pytest.raises(NotPSD):
        cone_cover_value([np.diag([1.0, -1.0])], np.eye(2))


@given(seed=seeds, d=st.integers(2, 4))
def test_cover_times_n_is_one(seed, d):
    rng = np.random.default_rng(seed)
    fam = [random_psd(rng, d, int(rng.integers(1, d + 1))) for _ in range(int(rng.integers(2, 6)))]
    n = max_min_eig_simplex(fam).value
    if n >= 1e-4:
        assert cone_cover_value(fam, np.eye(d)) * n == pytest.approx(1.0, abs=1e-5)


def _slsqp_entropy(fam, rho):
    m = len(fam)
    stack = np.array(fam)

    def f(w):
        a = np.tensordot(w, stack, 1)
        ev, u = np.linalg.eigh(a)
        ev = np.maximum(ev, 1e-300)
        weights = np.real(np.einsum("ji,jk,ki->i", u.conj(), rho, u))
        return -float(weights @ np.log(ev))

    best = np.inf
    for start in [np.full(m, 1 / m)] + list(np.random.default_rng(0).dirichlet(np.ones(m), 3)):
        res = minimize(f, start, method="SLSQP", bounds=[(1e-9, 1)] * m,
                       constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
                       options={"ftol": 1e-14, "maxiter": 1000})
        best = min(best, res.fun)
    return best


@given(seed=seeds, d=st.integers(2, 4), m=st.integers(1, 5))
def test_entropy_engine_against_slsqp(seed, d, m):
    rng = np.random.default_rng(seed)
    fam = [random_psd(rng, d) for _ in range(m)]
    rho = random_state(rng, d)
    res = entropy_min_simplex(fam, rho)
    assert res.status == Status.CONVERGED
    assert res.value <= _slsqp_entropy(fam, rho) + 1e-6


def test_entropy_engine_examples():
    rng = np.random.default_rng(7)
    d = 3
    fam = [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
    for _ in range(2 * d):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        fam.append(np.outer(v, v.conj()))
    assert entropy_min_simplex(fam, np.eye(d) / d).value == pytest.approx(math.log(d), abs=1e-3)
    assert entropy_min_simplex([np.eye(d)], random_state(rng, d)).value == pytest.approx(0, abs=1e-12)


def test_entropy_engine_c5_independent_sets():
    sets = [(0, 2), (1, 3), (2, 4), (3, 0), (4, 1)]
    fam = [np.diag([1.0 if i in s else 0.0 for i in range(5)]).astype(complex) for s in sets]
    assert entropy_min_simplex(fam, np.eye(5) / 5).value == pytest.approx(math.log(2.5), abs=1e-3)


def test_entropy_engine_infeasible():
    res = entropy_min_simplex([E1], np.eye(2) / 2)
    assert res.value == math.inf and res.status == Status.INFEASIBLE
    # kernel contained in the kernel of rho: finite
    assert entropy_min_simplex([E1], E1).value == pytest.approx(0, abs=1e-9)


@given(seed=seeds)
def test_entropy_duplicate_and_dominated_generators(seed):
    rng = np.random.default_rng(seed)
    fam = [random_psd(rng, 3) for _ in range(3)]
    rho = random_state(rng, 3)
    base = entropy_min_simplex(fam, rho).value
    assert entropy_min_simplex(fam + [fam[0]], rho).value == pytest.approx(base, abs=1e-6)
    smaller = 0.5 * fam[1]
    assert entropy_min_simplex(fam + [smaller], rho).value == pytest.approx(base, abs=1e-6)


def test_entropy_history_monotone():
    rng = np.random.default_rng(11)
    fam = [random_psd(rng, 4, 2) for _ in range(6)]
    hist = entropy_min_simplex(fam, random_state(rng, 4)).extras["history"]
    tail = np.array(hist[10:])
    assert np.all(np.diff(tail) <= 1e-12)


def test_diag_engine_matches_closed_form():
    # simplex corner: optimum at x = p
    p = np.array([0.5, 0.25, 0.25])
    res = entropy_min_simplex_diag(np.eye(3), p)
    assert res.value == pytest.approx(-np.sum(p * np.log(p)), abs=1e-9)
    assert entropy_min_simplex_diag(np.eye(2)[:1], np.array([0.5, 0.5])).status == Status.INFEASIBLE


def test_lp_examples():
    res = lp_solve([1, 1], [([1, 0], "<=", 1), ([0, 1], "<=", 1)], sense="max")
    assert res.value == pytest.approx(2)
    k3 = lp_solve(np.ones(3), [(np.eye(3)[i], ">=", 1) for i in range(3)])
    assert k3.value == pytest.approx(3)


def test_lp_c5_against_rational_enumeration():
    sets = [(0, 2), (1, 3), (2, 4), (0, 3), (1, 4)]
    inc = np.array([[1.0 if v in s else 0.0 for s in sets] for v in range(5)])
    lp = lp_solve(np.ones(5), [(inc[v], ">=", 1) for v in range(5)])
    grid = np.array(list(itertools.product(range(11), repeat=5))) / 10.0
    feasible = np.all(grid @ inc.T >= 1 - 1e-12, axis=1)
    assert lp.value == pytest.approx(grid[feasible].sum(axis=1).min(), abs=1e-12)
    assert lp.value == pytest.approx(2.5, abs=1e-12)


def test_lp_statuses():
    assert lp_solve([1, 1], [([1, -1], "<=", 1)], sense="max").status == Status.UNBOUNDED
    assert lp_solve([1, 1], [([1, 1], "<=", 1), ([1, 1], ">=", 2)]).status == Status.INFEASIBLE
    with pytest.raises(DimensionMismatch):
        lp_solve([1, 1], [([1], "<=", 1)])


@given(seed=seeds, n=st.integers(1, 5), k=st.integers(1, 6))
def test_lp_matches_linprog(seed, n, k):
    rng = np.random.default_rng(seed)
    a = rng.integers(-3, 4, size=(k, n)).astype(float)
    b = rng.integers(-2, 6, size=k).astype(float)
    rels = rng.choice(["<=", ">=", "="], size=k, p=[0.6, 0.3, 0.1])
    c = rng.integers(-3, 4, size=n).astype(float)
    ours = lp_solve(c, list(zip(a, rels, b)))
    ub_a = [row if r == "<=" else -row for row, r in zip(a, rels) if r != "="]
    ub_b = [v if r == "<=" else -v for v, r in zip(b, rels) if r != "="]
    eq_a = [row for row, r in zip(a, rels) if r == "="]
    eq_b = [v for v, r in zip(b, rels) if r == "="]
    ref = linprog(c, A_ub=ub_a or None, b_ub=ub_b or None, A_eq=eq_a or None, b_eq=eq_b or None,
                  bounds=[(0, None)] * n, method="highs")
    if ref.status == 0:
        assert ours.status == Status.CONVERGED
        assert ours.value == pytest.approx(ref.fun, abs=1e-7)
    elif ref.status == 2:
        assert ours.status == Status.INFEASIBLE
    elif ref.status == 3:
        assert ours.status == Status.UNBOUNDED


@given(seed=seeds, m=st.integers(1, 6))
def test_simplex_qp_kkt(seed, m):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(m, m))
    q = b @ b.T
    c = rng.normal(size=m)
    x = simplex_qp(q, c, np.full(m, 1 / m))
    assert abs(x.sum() - 1) < 1e-12 and np.all(x >= 0)
    grad = c + q @ x
    support = x > 1e-10
    level = grad[support].mean()
    assert np.all(np.abs(grad[support] - level) < 1e-7)
    assert np.all(grad >= level - 1e-7)

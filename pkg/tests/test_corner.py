from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from cornerlab.corner import (
    DiagonalCorner,
    GeneratedCorner,
    ab_gamma_support,
    ab_membership,
    ab_ray_scale,
    corner_of,
    cube_corner,
    diag_expectation,
    gamma,
    gamma_f_cover,
    lift_membership,
    m_param,
    membership,
    n_param,
    param_report,
    random_standard_corner,
    ray_scale,
    reflexivity_ray_check,
    simplex_corner,
    snap_projection,
    trace_corner,
    unit_corner,
)
from cornerlab.errors import (
    DimensionMismatch,
    EmptyInterior,
    NonOrthonormalBasis,
    NotProjection,
    NotPSD,
    RepresentationMismatch,
)
from cornerlab.graphs import cycle_graph, vp_corner
from cornerlab.hermlin import random_psd
from cornerlab.optcore import Membership

seeds = st.integers(0, 2**32 - 1)
PLUS = 0.5 * np.ones((2, 2), dtype=complex)


def c5_independent_projectors():
    # brute-force enumeration, independent of the clique machinery
    edges = {(i, (i + 1) % 5) for i in range(5)} | {((i + 1) % 5, i) for i in range(5)}
    sets = [s for r in range(1, 6) for s in itertools.combinations(range(5), r)
            if not any((a, b) in edges for a in s for b in s)]
    return [np.diag([1.0 if v in s else 0.0 for v in range(5)]).astype(complex) for s in sets]


def chi_f_c5_linprog():
    projs = c5_independent_projectors()
    inc = np.array([np.real(np.diag(p)) for p in projs]).T
    return linprog(np.ones(len(projs)), A_ub=-inc, b_ub=-np.ones(5), bounds=(0, None), method="highs").fun


@pytest.mark.parametrize("d", [1, 2, 4])
def test_basic_parameters(d):
    b = unit_corner(np.eye(d))
    a = trace_corner(d)
    assert gamma(b) == pytest.approx(d)
    assert gamma(a) == pytest.approx(1)
    assert n_param(b) == pytest.approx(1, abs=1e-9)
    assert n_param(a) == pytest.approx(1 / d, abs=1e-8)
    assert m_param(b) == pytest.approx(1, abs=1e-7)
    assert m_param(a) == pytest.approx(d, abs=1e-6)


def test_c5_independent_set_corner():
    corner = GeneratedCorner(tuple(c5_independent_projectors()))
    assert gamma(corner) == 2
    assert n_param(corner) == pytest.approx(1 / chi_f_c5_linprog(), abs=1e-7)
    assert n_param(corner) == pytest.approx(0.4, abs=1e-7)
    assert gamma_f_cover(corner) == pytest.approx(2.5, abs=1e-6)


def test_rank_one_flat_corner_has_infinite_cover():
    j = np.ones((3, 3), dtype=complex) / 3
    assert m_param(unit_corner(j)) == math.inf
    w = np.array([1, -1, 0], dtype=complex)
    assert ab_ray_scale(unit_corner(j), np.outer(w, w)) == math.inf


def test_zero_corner_conventions():
    z = unit_corner(np.zeros((2, 2)))
    rep = param_report(z)
    assert rep.gamma == 0 and rep.n_param == 0 and rep.m_param == math.inf
    assert ab_membership(z, 100 * np.eye(2))


def test_membership_examples():
    b2 = unit_corner(np.eye(2))
    a2 = trace_corner(2)
    assert membership(b2, np.zeros((2, 2))) == Membership.INSIDE
    assert membership(b2, np.diag([1, 1.1])) == Membership.OUTSIDE
    # direct construction: (e1e1* + e2e2*)/2 = I/2 dominates PLUS/2
    assert np.linalg.eigvalsh(np.eye(2) / 2 - PLUS / 2)[0] >= 0
    assert membership(a2, PLUS / 2) == Membership.INSIDE
    assert membership(a2, np.diag([1.0, -0.1])) == Membership.OUTSIDE


def test_membership_dimension_check():
    with pytest.raises(DimensionMismatch):
        membership(trace_corner(2), np.eye(3))


def test_ab_membership_examples():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        s = random_psd(rng, d)
        s /= np.trace(s).real
        assert ab_membership(unit_corner(np.eye(d)), s)
        assert not ab_membership(trace_corner(d), np.eye(d) + 0.1 * np.diag(np.eye(d)[0]))


def test_ab_ray_scale_examples():
    assert ab_ray_scale(unit_corner(np.eye(3)), np.eye(3)) == pytest.approx(1 / 3)
    assert ab_ray_scale(trace_corner(3), np.diag([1.0, 0, 0])) == pytest.approx(1)
    with pytest.raises(NotPSD):
        ab_ray_scale(trace_corner(2), np.zeros((2, 2)))


def test_reflexivity_examples():
    assert ray_scale(unit_corner(np.eye(2)), np.eye(2)) == pytest.approx(1, abs=1e-8)
    assert ray_scale(trace_corner(2), np.eye(2)) == pytest.approx(0.5, abs=1e-8)
    rep = reflexivity_ray_check(random_standard_corner(np.random.default_rng(0), d=3, m=3), trials=20)
    assert rep.passed and rep.max_discrepancy <= 1e-3
    with pytest.raises(EmptyInterior):
        reflexivity_ray_check(unit_corner(np.diag([1.0, 0.0])), trials=1)


@given(seed=seeds)
def test_ray_scale_against_membership(seed):
    rng = np.random.default_rng(seed)
    corner = random_standard_corner(rng, d=3)
    n0 = random_psd(rng, 3) + 0.1 * np.eye(3)
    t = ray_scale(corner, n0)
    assert membership(corner, 0.999 * t * n0) == Membership.INSIDE
    assert membership(corner, 1.01 * t * n0) == Membership.OUTSIDE


def test_diag_expectation_examples():
    d = np.diag([1.0, 2.0, 3.0])
    assert np.allclose(diag_expectation(d), d)
    assert np.allclose(diag_expectation(PLUS), np.eye(2) / 2)
    rng = np.random.default_rng(5)
    for _ in range(100):
        m, n = random_psd(rng, 3), random_psd(rng, 3)
        assert abs(np.trace(diag_expectation(m) @ n) - np.trace(m @ diag_expectation(n))) < 1e-10


def test_diag_expectation_in_rotated_frame():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    m = random_psd(rng, 3)
    e = diag_expectation(m, q)
    assert np.allclose(diag_expectation(e, q), e)
    assert np.trace(e) == pytest.approx(np.trace(m))
    with pytest.raises(NonOrthonormalBasis):
        diag_expectation(m, 2 * q)


def test_lift_examples():
    vp_k2 = simplex_corner(2)
    assert lift_membership(vp_k2, PLUS, "max") == Membership.INSIDE
    assert lift_membership(vp_k2, PLUS, "min") == Membership.OUTSIDE
    for kind in ("min", "max"):
        assert lift_membership(vp_k2, np.zeros((2, 2)), kind) == Membership.INSIDE
    with pytest.raises(RepresentationMismatch):
        lift_membership(vp_k2.flat_anti_blocker(), PLUS, "min")


@given(seed=seeds)
def test_min_lift_inside_max_lift(seed):
    rng = np.random.default_rng(seed)
    diag = DiagonalCorner.from_vertices(rng.uniform(0, 1, size=(3, 3)))
    m = random_psd(rng, 3) * rng.uniform(0.05, 1)
    if lift_membership(diag, m, "min") == Membership.INSIDE:
        assert lift_membership(diag, m, "max") == Membership.INSIDE


def test_gamma_f_cover_examples():
    assert gamma_f_cover(unit_corner(np.eye(3))) == pytest.approx(1, abs=1e-7)
    assert gamma_f_cover(trace_corner(3)) == pytest.approx(3, abs=1e-6)
    with pytest.raises(NotProjection):
        gamma_f_cover(unit_corner(np.diag([0.5, 1.0])))


def test_snap_projection():
    p = PLUS + 1e-10 * np.eye(2)
    snapped = snap_projection(p)
    assert np.allclose(snapped @ snapped, snapped, atol=1e-14)
    with pytest.raises(NotProjection):
        snap_projection(np.diag([0.5, 1]))


def test_generator_validation():
    with pytest.raises(NotPSD):
        corner_of(np.diag([1.0, -0.5]))
    with pytest.raises(DimensionMismatch):
        corner_of(np.eye(2), np.eye(3))


def test_json_round_trip():
    corner = random_standard_corner(np.random.default_rng(2))
    back = GeneratedCorner.from_json(corner.to_json())
    assert all(np.allclose(a, b) for a, b in zip(corner.generators, back.generators))
    diag = cube_corner(3).flat_anti_blocker()
    assert np.allclose(DiagonalCorner.from_json(diag.to_json()).hpoly, diag.hpoly)


# properties


@given(seed=seeds)
def test_duality(seed):
    rng = np.random.default_rng(seed)
    corner = random_standard_corner(rng)
    rep = param_report(corner)
    if rep.n_param >= 1e-4:
        assert abs(rep.m_param * rep.n_param - 1) <= 1e-4
        assert abs(rep.m_param - ab_gamma_support(corner, seed=seed % 1000)) <= 1e-4 * rep.m_param


@given(seed=seeds)
def test_anti_blocker_antitone(seed):
    rng = np.random.default_rng(seed)
    gens = [random_psd(rng, 3) for _ in range(4)]
    small, big = corner_of(*gens[:2]), corner_of(*gens)
    for _ in range(10):
        n = random_psd(rng, 3) * rng.uniform(0, 0.5)
        if ab_membership(big, n):
            assert ab_membership(small, n)


@given(seed=seeds)
def test_hereditary(seed):
    rng = np.random.default_rng(seed)
    corner = random_standard_corner(rng, d=3)
    a = random_psd(rng, 3)
    a *= 0.9 * ray_scale(corner, a + 1e-3 * np.eye(3))
    if membership(corner, a) == Membership.INSIDE:
        # 0 <= B <= A via a contraction
        c = rng.normal(size=(3, 3))
        c /= np.linalg.norm(c, 2) * 1.01
        root = np.linalg.cholesky(a + 1e-14 * np.eye(3))
        b = root @ c @ c.T @ root.conj().T
        assert np.linalg.eigvalsh(a - b)[0] >= -1e-12
        assert membership(corner, b) == Membership.INSIDE


@given(seed=seeds)
def test_diag_contraction(seed):
    rng = np.random.default_rng(seed)
    corner = corner_of(*[np.diag(rng.uniform(0, 1, 3)) for _ in range(3)])
    m = random_psd(rng, 3) * rng.uniform(0.01, 0.5)
    if membership(corner, m) == Membership.INSIDE:
        assert membership(corner, diag_expectation(m)) == Membership.INSIDE


@given(seed=seeds)
def test_perturbation_stability(seed):
    rng = np.random.default_rng(seed)
    corner = random_standard_corner(rng)
    pert = []
    for g in corner.generators:
        e = random_psd(rng, corner.dim)
        pert.append(g + 1e-4 * e / np.linalg.norm(e))
    other = GeneratedCorner(tuple(pert))
    assert abs(gamma(corner) - gamma(other)) <= 1e-2
    assert abs(n_param(corner) - n_param(other)) <= 1e-2
    assert abs(m_param(corner) - m_param(other)) <= 1e-2 * max(1, m_param(corner))


def test_vp_c5_lifted_parameters():
    corner = vp_corner(cycle_graph(5)).lifted()
    assert n_param(corner) == pytest.approx(0.4, abs=1e-7)

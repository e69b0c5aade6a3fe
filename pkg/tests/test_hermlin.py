from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cornerlab.errors import NonHermitianInput, NotPSD, SingularPoint
from cornerlab.hermlin import (
    as_state,
    eigh,
    jacobi_eigh,
    log_trace_gradient,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    random_psd,
    random_state,
    rho_log_trace,
)

seeds = st.integers(0, 2**32 - 1)


def herm(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def test_eigh_identity():
    w, u = eigh(np.eye(3))
    assert np.allclose(w, 1)
    assert np.allclose(u.conj().T @ u, np.eye(3))


def test_eigh_diagonal_sorted():
    w, _ = eigh(np.diag([2.0, -1.0]))
    assert np.allclose(w, [-1, 2])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eigh_pauli_x(method):
    w, u = eigh(np.array([[0, 1], [1, 0]]), method)
    assert np.allclose(w, [-1, 1], atol=1e-12)
    # eigenvectors up to phase: (1, -1)/sqrt2 and (1, 1)/sqrt2
    assert abs(abs(np.vdot(u[:, 0], [1, -1])) / math.sqrt(2) - 1) < 1e-12
    assert abs(abs(np.vdot(u[:, 1], [1, 1])) / math.sqrt(2) - 1) < 1e-12


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        eigh(np.array([[0, 1], [0, 0]]))


@given(seed=seeds, d=st.integers(1, 12))
def test_jacobi_matches_lapack(seed, d):
    rng = np.random.default_rng(seed)
    a = herm(rng, d)
    w, u = jacobi_eigh(a)
    assert np.linalg.norm((u * w) @ u.conj().T - a) <= 1e-9 * (1 + np.linalg.norm(a))
    assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10)


def test_jacobi_degenerate_spectrum():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    a = q @ np.diag([1, 1, 1, 2, 2, 3.0]) @ q.conj().T
    w, u = jacobi_eigh(a)
    assert np.allclose(w, [1, 1, 1, 2, 2, 3], atol=1e-11)
    assert np.linalg.norm((u * w) @ u.conj().T - a) < 1e-10


def test_rho_log_trace_examples():
    rho = random_state(np.random.default_rng(1), 3)
    assert rho_log_trace(rho, np.eye(3)) == pytest.approx(0, abs=1e-14)
    half = np.diag([0.5, 0.5])
    assert rho_log_trace(half, half) == pytest.approx(-math.log(2))
    assert rho_log_trace(np.diag([1.0, 0]), np.diag([0, 1.0])) == -math.inf


def test_rho_log_trace_kernel_inside_kernel_of_rho():
    # ker A = span(e2) lies inside ker rho, so the value stays finite
    assert rho_log_trace(np.diag([1.0, 0]), np.diag([0.5, 0])) == pytest.approx(math.log(0.5))


def test_rho_log_trace_rejects_negative():
    with pytest.raises(NotPSD):
        rho_log_trace(np.eye(2) / 2, np.diag([1, -0.1]))


@given(seed=seeds, d=st.integers(1, 5))
def test_rho_log_trace_operator_monotone(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, d)
    a = random_psd(rng, d) + 1e-3 * np.eye(d)
    b = a + random_psd(rng, d, 1)
    assert rho_log_trace(rho, a) <= rho_log_trace(rho, b) + 1e-12


def test_gradient_closed_forms():
    g = log_trace_gradient(np.eye(3) / 3, np.eye(3))
    assert np.allclose(g, np.eye(3) / 3)
    p, a = np.array([0.2, 0.8]), np.array([0.5, 3.0])
    assert np.allclose(log_trace_gradient(np.diag(p), np.diag(a)), np.diag(p / a))


def test_gradient_plus_state_finite_difference():
    plus = np.full((2, 2), 0.5)
    a = np.diag([1.0, 2.0])
    g = log_trace_gradient(plus, a)
    step = 1e-5
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
    for h in paulis:
        fd = (rho_log_trace(plus, a + step * h) - rho_log_trace(plus, a - step * h)) / (2 * step)
        assert abs(fd - np.real(np.vdot(h, g))) < 1e-6


@given(seed=seeds, d=st.integers(1, 5))
def test_gradient_matches_finite_differences(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, d)
    a = random_psd(rng, d) + 0.2 * np.eye(d)
    h = herm(rng, d)
    step = 1e-5
    fd = (rho_log_trace(rho, a + step * h) - rho_log_trace(rho, a - step * h)) / (2 * step)
    an = np.real(np.vdot(h, log_trace_gradient(rho, a)))
    assert abs(fd - an) <= 1e-5 * max(abs(an), 1e-3)


def test_gradient_singular():
    with pytest.raises(SingularPoint):
        log_trace_gradient(np.eye(2) / 2, np.diag([1.0, 0.0]))


def test_partial_trace_of_product():
    rng = np.random.default_rng(3)
    r1, r2 = random_state(rng, 2), random_state(rng, 3)
    rho = np.kron(r1, r2)
    assert np.allclose(partial_trace(rho, (2, 3), 0), r1)
    assert np.allclose(partial_trace(rho, (2, 3), 1), r2)


def test_matrix_json_round_trip():
    rng = np.random.default_rng(4)
    a = herm(rng, 3)
    assert np.allclose(matrix_from_json(matrix_to_json(a)), a)
    assert "im" not in matrix_to_json(np.eye(2))


def test_state_validation():
    with pytest.raises(Exception):
        as_state(np.eye(2))

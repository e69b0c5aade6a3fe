"""Hermitian matrix numerics.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the helpers here
validate and symmetrize them, diagonalize them, and evaluate the
``Tr(rho log A)`` family of functions with the usual kernel conventions.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, NotPSD, NotState, SingularPoint

HERM_TOL = 1e-8
PSD_TOL = 1e-8
STATE_TOL = 1e-10
ZERO_EIG = 1e-12


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns, orthonormal


def as_hermitian(a, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``a`` as a symmetrized complex square matrix.

    Raises NonHermitianInput when the anti-Hermitian part exceeds ``tol``
    (Frobenius, relative to ``1 + ||a||``).
    """
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    resid = np.linalg.norm(m - m.conj().T)
    if resid > tol * (1.0 + np.linalg.norm(m)):
        raise NonHermitianInput(f"symmetrization residual {resid:.3e}")
    return (m + m.conj().T) / 2


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(a)[0] >= -tol * (1.0 + np.linalg.norm(a)))


def as_psd(a, tol: float = PSD_TOL) -> np.ndarray:
    m = as_hermitian(a)
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -tol * (1.0 + np.linalg.norm(m)):
        raise NotPSD(f"minimum eigenvalue {lo:.3e}")
    return m


def as_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    m = as_hermitian(rho)
    lo = np.linalg.eigvalsh(m)[0]
    tr = np.trace(m).real
    if lo < -tol or abs(tr - 1.0) > tol:
        raise NotState(f"min eigenvalue {lo:.3e}, trace {tr:.12f}")
    return m


def eigh(a, method: str = "lapack") -> SpectralDecomposition:
    """Spectral decomposition with ascending eigenvalues.

    ``method="jacobi"`` runs the in-house cyclic Jacobi solver; the default
    defers to LAPACK, which the optimizers call in their inner loops.
    """
    m = as_hermitian(a)
    if method == "jacobi":
        return jacobi_eigh(m)
    w, u = np.linalg.eigh(m)
    return SpectralDecomposition(w, u)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60) -> SpectralDecomposition:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                # unitary phase makes the (p, q) entry real, then a real rotation zeroes it
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * math.atan2(2.0 * mag, aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                # columns p, q then rows p, q:  a <- R^* a R  with R acting on span{p, q}
                cols = a[:, [p, q]] @ rot
                a[:, [p, q]] = cols
                rows = rot.conj().T @ a[[p, q], :]
                a[[p, q], :] = rows
                v[:, [p, q]] = v[:, [p, q]] @ rot
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order])


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Real trace pairing ``Re Tr(a b^*)`` (equal to ``Tr(ab)`` for Hermitian pairs)."""
    return float(np.real(np.vdot(b, a)))


def mat_fn(a: np.ndarray, fn) -> np.ndarray:
    w, u = np.linalg.eigh(a)
    return (u * fn(w)) @ u.conj().T


def rho_log_trace(rho, a) -> float:
    """``Tr(rho log A)`` with the convention ``-inf`` when ker A is not inside ker rho."""
    rho = np.asarray(rho, dtype=complex)
    a = as_hermitian(a)
    if rho.shape != a.shape:
        raise DimensionMismatch(f"{rho.shape} vs {a.shape}")
    w, u = np.linalg.eigh(a)
    if w[0] < -PSD_TOL * (1.0 + np.linalg.norm(a)):
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e}")
    weights = np.real(np.einsum("ij,jk,ki->i", u.conj().T, rho, u))
    zero = w <= ZERO_EIG * (1.0 + np.abs(w).max())
    if np.any(weights[zero] > ZERO_EIG):
        return -math.inf
    return float(np.sum(weights[~zero] * np.log(w[~zero])))


def log_divided_differences(w: np.ndarray) -> np.ndarray:
    """First divided differences of ``log`` on the spectrum ``w`` (all positive)."""
    dw = w[:, None] - w[None, :]
    lw = np.log(w)
    dl = lw[:, None] - lw[None, :]
    close = np.abs(dw) <= 1e-10 * np.maximum(w[:, None], w[None, :])
    safe = np.where(close, 1.0, dw)
    # log-mean formula on near-coincident pairs avoids cancellation
    mean_inv = 2.0 / (w[:, None] + w[None, :])
    return np.where(close, mean_inv, dl / safe)


def log_trace_gradient(rho, a) -> np.ndarray:
    """Gradient of ``A -> Tr(rho log A)`` at a strictly positive ``A``.

    Daleckii-Krein: in the eigenbasis of A the derivative in direction H is
    ``Tr(rho U (L o U^*HU) U^*)`` with L the divided-difference kernel, so the
    gradient is ``U (L o U^* rho U) U^*``.
    """
    rho = np.asarray(rho, dtype=complex)
    a = as_hermitian(a)
    w, u = np.linalg.eigh(a)
    if w[0] <= 1e-10:
        raise SingularPoint(f"minimum eigenvalue {w[0]:.3e}")
    kernel = log_divided_differences(w)
    rt = u.conj().T @ rho @ u
    g = u @ (kernel * rt) @ u.conj().T
    return (g + g.conj().T) / 2


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced matrix on factor ``keep`` (0 or 1) of a bipartite operator."""
    d1, d2 = dims
    t = np.asarray(rho).reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None, real: bool = False) -> np.ndarray:
    rank = d if rank is None else rank
    b = rng.normal(size=(d, rank))
    if not real:
        b = b + 1j * rng.normal(size=(d, rank))
    m = b @ b.conj().T / rank
    return (m + m.conj().T) / 2


def random_state(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    m = random_psd(rng, d, rank)
    return m / np.trace(m).real


def haar_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    out = {"d": int(a.shape[0]), "re": a.real.tolist()}
    if np.any(a.imag != 0):
        out["im"] = a.imag.tolist()
    return out


def matrix_from_json(obj: dict) -> np.ndarray:
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj["im"], dtype=float) if "im" in obj else np.zeros_like(re)
    d = int(obj.get("d", re.shape[0]))
    if re.shape != (d, d) or im.shape != (d, d):
        raise DimensionMismatch(f"matrix JSON declares d={d}, got {re.shape}")
    return re + 1j * im

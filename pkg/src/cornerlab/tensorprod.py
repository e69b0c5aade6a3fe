"""Maximal and minimal tensor products of generated corners."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corner import GeneratedCorner, ab_ray_scale
from .entropy import corner_entropy
from .errors import DimOverflow, DimensionMismatch, NotPSD
from .hermlin import as_hermitian, as_state, partial_trace, random_psd
from .optcore import Membership, SolverConfig

MAX_PRODUCT_DIM = 64


def max_tensor(a: GeneratedCorner, b: GeneratedCorner) -> GeneratedCorner:
    """Corner generated by all Kronecker products of generators."""
    if a.dim * b.dim > MAX_PRODUCT_DIM:
        raise DimOverflow(f"product dimension {a.dim * b.dim} exceeds {MAX_PRODUCT_DIM}")
    return GeneratedCorner(tuple(np.kron(x, y) for x in a.generators for y in b.generators))


@dataclass
class MinMembership:
    verdict: Membership
    approximate: bool
    witness: tuple | None = None


def _ray_points(corner: GeneratedCorner, rays):
    """Boundary points of the anti-blocker along each ray; unbounded rays come back flagged."""
    out = []
    for r in rays:
        t = ab_ray_scale(corner, r)
        out.append((r, t))
    return out


def _default_rays(d: int, rng: np.random.Generator, samples: int):
    rays = [np.eye(d, dtype=complex)]
    rays += [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
    rays += [random_psd(rng, d, int(rng.integers(1, d + 1))) for _ in range(samples)]
    return rays


def min_tensor_membership(a: GeneratedCorner, b: GeneratedCorner, m, cfg: SolverConfig | None = None,
                          samples: int = 40, rng: np.random.Generator | None = None) -> MinMembership:
    """Necessary test for membership in the minimal tensor product.

    The minimal product is the anti-blocker of the products ``N1 (x) N2`` of
    anti-blocker points. Sampled pairs of such points can certify Outside;
    an Inside answer only means no violated pair was found.
    """
    m = as_hermitian(m)
    d = a.dim * b.dim
    if m.shape != (d, d):
        raise DimensionMismatch(f"{m.shape} vs product dimension {d}")
    if np.linalg.eigvalsh(m)[0] < -1e-10 * (1 + np.linalg.norm(m)):
        raise NotPSD("candidate must be positive semidefinite")
    rng = rng or np.random.default_rng((cfg or SolverConfig()).seed)
    pa = _ray_points(a, _default_rays(a.dim, rng, samples))
    pb = _ray_points(b, _default_rays(b.dim, rng, samples))
    m4 = m.reshape(a.dim, b.dim, a.dim, b.dim)
    for ra, ta in pa:
        # <M, X (x) Y> = Tr(Y^T-contracted partial pairing)
        partial = np.einsum("ikjl,ji->kl", m4, ra)
        for rb, tb in pb:
            val = float(np.real(np.einsum("kl,lk->", partial, rb)))
            scale = ta * tb
            if val > 1e-12 and (math.isinf(scale) or scale * val > 1 + 1e-9):
                return MinMembership(Membership.OUTSIDE, False, (ra * min(ta, 1e12), rb * min(tb, 1e12)))
    return MinMembership(Membership.INSIDE, True)


@dataclass
class ProductEntropyReport:
    left: float
    right: float
    holds: bool
    equality_expected: bool
    equality: bool | None


def _is_diag(x: np.ndarray) -> bool:
    return bool(np.linalg.norm(x - np.diag(np.diag(x))) <= 1e-12)


def product_entropy_check(a: GeneratedCorner, b: GeneratedCorner, rho, cfg: SolverConfig | None = None,
                          tol: float = 1e-3) -> ProductEntropyReport:
    """Subadditivity of corner entropy over the maximal product.

    Equality is also checked for products of diagonal states over
    diagonal-generator corners.
    """
    rho = as_state(rho)
    dims = (a.dim, b.dim)
    if rho.shape != (a.dim * b.dim,) * 2:
        raise DimensionMismatch(f"state {rho.shape} vs factors {dims}")
    r1 = partial_trace(rho, dims, keep=0)
    r2 = partial_trace(rho, dims, keep=1)
    left = corner_entropy(max_tensor(a, b), rho, cfg).value
    right = corner_entropy(a, r1, cfg).value + corner_entropy(b, r2, cfg).value
    holds = left <= right + tol
    is_product = np.linalg.norm(rho - np.kron(r1, r2)) <= 1e-10
    expected = (is_product and _is_diag(r1) and _is_diag(r2)
                and all(_is_diag(g) for g in a.generators + b.generators))
    equality = abs(left - right) <= tol if expected else None
    return ProductEntropyReport(left, right, holds, expected, equality)

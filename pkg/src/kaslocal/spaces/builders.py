"""Kernel constructors: ball averages, heat semigroups, Levy subordination.

Semigroup-based kernels are computed through one symmetric eigendecomposition
of M^(-1/2) A M^(-1/2) per backend; heat kernels take e^(-t lambda) on the
spectrum and Levy kernels take the subordinated power lambda^alpha, with the
zero mode dropping out off-diagonally.  No iterative quadrature is involved,
so repeated construction is deterministic.
"""

from __future__ import annotations

from math import pi

import numpy as np

from ..kernels import DenseKernel, KernelError
from .product import ProductHeatKernel, ProductSG
from .torus import TorusBallKernel, TorusGrid, UNIT_BALL_VOLUME

SPECTRAL_SIZE_CAP = 4096


def ball_kernel(backend, r: float, ambient_dim: int | None = None):
    """Uniform kernel (n+2)/(nu_n r^(n+2)) 1{dist < r} mu(dy)."""
    if r <= 0:
        raise KernelError("ball radius must be positive")
    if isinstance(backend, TorusGrid):
        return TorusBallKernel(backend, r)
    n = ambient_dim if ambient_dim is not None else getattr(backend, "ambient_dim", 1)
    if n not in UNIT_BALL_VOLUME:
        raise KernelError(f"no unit-ball volume for dimension {n}")
    scale = (n + 2) / (UNIT_BALL_VOLUME[n] * r ** (n + 2))
    dist = backend.dist_matrix()
    mu = backend.point_weights
    j = scale * (dist < r) * mu[None, :]
    np.fill_diagonal(j, 0.0)
    return DenseKernel(backend, j, label=f"ball r={r:g}")


def _spectral(backend):
    cache = getattr(backend, "_spectral_cache", None)
    if cache is not None:
        return cache
    a = np.asarray(backend.stiffness(), dtype=float)
    m = np.asarray(backend.mass_weights(), dtype=float)
    n = a.shape[0]
    if n > SPECTRAL_SIZE_CAP:
        raise KernelError(f"spectral kernels need n <= {SPECTRAL_SIZE_CAP}, got {n}")
    if m.min() <= 0:
        raise KernelError("mass weights must be strictly positive")
    root = np.sqrt(m)
    sym = a / root[:, None] / root[None, :]
    lam, vec = np.linalg.eigh(0.5 * (sym + sym.T))
    if lam.min() < -1e-8 * max(lam.max(), 1.0):
        raise KernelError(f"stiffness is not positive semidefinite: {lam.min():g}")
    lam = np.maximum(lam, 0.0)
    cache = (lam, vec, root)
    try:
        backend._spectral_cache = cache
    except AttributeError:
        pass
    return cache


def transition_matrix(backend, t: float) -> np.ndarray:
    """P_t = exp(-t M^(-1) A) through the symmetrized eigendecomposition."""
    lam, vec, root = _spectral(backend)
    core = (vec * np.exp(-t * lam)) @ vec.T
    return core / root[:, None] * root[None, :]


def heat_kernel(backend, t: float) -> DenseKernel:
    """j_t(x, {y}) = P_t(x, {y}) / (2t) off the diagonal."""
    if t <= 0:
        raise KernelError("time must be positive")
    p = transition_matrix(backend, t)
    j = p / (2.0 * t)
    np.fill_diagonal(j, 0.0)
    j = np.maximum(j, 0.0)
    return DenseKernel(backend, j, label=f"heat t={t:g}")


def levy_kernel(backend, alpha: float) -> DenseKernel:
    """Subordinated kernel j_alpha = (1/2) int P_t nu_alpha(dt).

    Spectrally, the off-diagonal part of -(1/2) (M^(-1) A)^alpha: the Laplace
    exponent of the alpha-stable subordinator turns each nonzero eigenvalue
    lambda into lambda^alpha, and the divergent mass of the Levy measure
    cancels off-diagonally against the t -> 0 identity.
    """
    if not 0.0 < alpha < 1.0:
        raise KernelError(f"alpha must lie in (0, 1), got {alpha}")
    lam, vec, root = _spectral(backend)
    core = (vec * lam**alpha) @ vec.T
    frac = core / root[:, None] * root[None, :]
    j = -0.5 * frac
    np.fill_diagonal(j, 0.0)
    floor = j.min()
    if floor < -1e-10 * max(np.abs(j).max(), 1e-300):
        raise KernelError(f"negative subordinated mass {floor:g}")
    j = np.maximum(j, 0.0)
    return DenseKernel(backend, j, label=f"levy a={alpha:g}")


def product_heat(t: float, backend: ProductSG) -> ProductHeatKernel:
    """Kronecker heat kernel on a gasket product, kept in factor form."""
    if t <= 0:
        raise KernelError("time must be positive")
    p1 = transition_matrix(backend.factor1, t)
    p2 = transition_matrix(backend.factor2, t)
    return ProductHeatKernel(backend, t, p1, p2)


def unit_ball_volume(n: int) -> float:
    if n == 1:
        return 2.0
    if n == 2:
        return pi
    raise KernelError(f"unsupported dimension {n}")

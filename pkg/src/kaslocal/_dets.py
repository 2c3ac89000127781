"""Small-matrix determinants with explicit formulas.

Degrees up to three get cofactor expansions so that exact dtypes (Fraction,
int) stay exact and antisymmetry cancellations hold bit-for-bit in floats;
larger sizes fall back to LAPACK.
"""

from __future__ import annotations

import numpy as np


def det_stack(mats: np.ndarray):
    """Determinants of a (..., p, p) stack; explicit for p <= 3."""
    mats = np.asarray(mats)
    p = mats.shape[-1]
    if mats.shape[-2] != p:
        raise ValueError(f"expected square matrices, got {mats.shape[-2:]}")
    if p == 0:
        return np.ones(mats.shape[:-2], dtype=float)
    if p == 1:
        return mats[..., 0, 0]
    if p == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    if p == 3:
        a, b, c = mats[..., 0, 0], mats[..., 0, 1], mats[..., 0, 2]
        d, e, f = mats[..., 1, 0], mats[..., 1, 1], mats[..., 1, 2]
        g, h, i = mats[..., 2, 0], mats[..., 2, 1], mats[..., 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if mats.dtype == object:
        raise ValueError("exact determinants only implemented for p <= 3")
    return np.linalg.det(mats)

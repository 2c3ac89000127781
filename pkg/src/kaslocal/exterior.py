"""Exterior algebra over finite-dimensional real inner-product spaces.

A fiber is described by the Gram matrix of a fixed generating family; it may
be rank deficient (null directions of the Gram matrix contribute zero to
every determinant, so the quotient by the kernel of the seminorm never needs
to be formed explicitly).  Decomposable p-vectors are stored as linear
combinations of factor lists, and inner products of degree p are cross-Gram
determinants, det[(<v_i, w_j>)].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._dets import det_stack

TOL_PSD = 1e-10
NORM_ROUNDOFF = 1e-12


class ExteriorError(ValueError):
    pass


@dataclass(frozen=True)
class InnerSpace:
    """A real inner-product space given by the Gram matrix of its generators."""

    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ExteriorError(f"gram must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, atol=1e-12, rtol=1e-12):
            raise ExteriorError("gram matrix is not symmetric")
        lo = float(np.linalg.eigvalsh(0.5 * (g + g.T)).min())
        if lo < -TOL_PSD:
            raise ExteriorError(f"gram matrix is not PSD: min eigenvalue {lo:g}")
        object.__setattr__(self, "gram", 0.5 * (g + g.T))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ self.gram @ b)


@dataclass(frozen=True)
class PVector:
    """Formal sum of decomposable p-vectors over a generating family.

    ``terms`` is a list of (coefficient, factors) pairs where ``factors`` is a
    (p, dim) array holding the coordinates of the p factors.  Degree-0 vectors
    are scalars: factor arrays with zero rows.
    """

    degree: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.degree < 0:
            raise ExteriorError("degree must be nonnegative")
        norm_terms = []
        for coeff, factors in self.terms:
            f = np.asarray(factors, dtype=float)
            if f.ndim == 1:
                f = f.reshape(1, -1)
            if f.size == 0:
                f = f.reshape(0, 0) if self.degree == 0 else f.reshape(self.degree, -1)
            if f.shape[0] != self.degree:
                raise ExteriorError(
                    f"term has {f.shape[0]} factors, expected degree {self.degree}"
                )
            norm_terms.append((float(coeff), f))
        object.__setattr__(self, "terms", tuple(norm_terms))

    @property
    def ambient_dim(self) -> int | None:
        for _, f in self.terms:
            if f.shape[0] > 0:
                return f.shape[1]
        return None

    def __add__(self, other: "PVector") -> "PVector":
        if self.degree != other.degree:
            raise ExteriorError("degree mismatch in sum")
        return PVector(self.degree, self.terms + other.terms)

    def __rmul__(self, c: float) -> "PVector":
        return PVector(self.degree, tuple((c * a, f) for a, f in self.terms))


def decomposable(*factors) -> PVector:
    """The p-vector v_1 ^ ... ^ v_p with coefficient one."""
    f = np.atleast_2d(np.asarray(factors, dtype=float))
    return PVector(f.shape[0], ((1.0, f),))


def scalar_pvector(c: float) -> PVector:
    return PVector(0, ((float(c), np.zeros((0, 0))),))


def _check_compatible(v: PVector, w: PVector, space: InnerSpace) -> None:
    if v.degree != w.degree:
        raise ExteriorError(f"degree mismatch: {v.degree} vs {w.degree}")
    for u in (v, w):
        d = u.ambient_dim
        if d is not None and d != space.dim:
            raise ExteriorError(f"factor length {d} does not match space dim {space.dim}")


def wedge_inner(v: PVector, w: PVector, space: InnerSpace) -> float:
    """<v, w> extended bilinearly over terms via cross-Gram determinants."""
    _check_compatible(v, w, space)
    total = 0.0
    for a, vf in v.terms:
        for b, wf in w.terms:
            if v.degree == 0:
                total += a * b
                continue
            cross = vf @ space.gram @ wf.T
            total += a * b * float(det_stack(cross))
    return total


def wedge_product(v: PVector, w: PVector) -> PVector:
    """v ^ w: termwise concatenation of factor lists, coefficients multiplied."""
    dv, dw = v.ambient_dim, w.ambient_dim
    if dv is not None and dw is not None and dv != dw:
        raise ExteriorError(f"ambient dimension mismatch: {dv} vs {dw}")
    dim = dv if dv is not None else dw
    terms = []
    for a, vf in v.terms:
        for b, wf in w.terms:
            if vf.shape[0] == 0 and vf.shape[1] == 0 and dim is not None:
                vf = vf.reshape(0, dim)
            if wf.shape[0] == 0 and wf.shape[1] == 0 and dim is not None:
                wf = wf.reshape(0, dim)
            terms.append((a * b, np.vstack([vf, wf]) if dim is not None else vf))
    return PVector(v.degree + w.degree, tuple(terms))


def pvector_norm(v: PVector, space: InnerSpace) -> float:
    """sqrt(<v, v>), clamping tiny negative round-off to zero."""
    sq = wedge_inner(v, v, space)
    if sq < -NORM_ROUNDOFF:
        raise ArithmeticError(f"squared norm {sq:g} below round-off tolerance")
    return float(np.sqrt(max(sq, 0.0)))

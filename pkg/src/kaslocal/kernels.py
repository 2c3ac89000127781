"""Kernel families on finite spaces and the nonlocal inner products they induce.

A kernel stores the masses j(x, {y}) of a family of nonnegative measures with
zero diagonal, mu-symmetric in the sense j(x,{y}) mu(x) = j(y,{x}) mu(y).
Energies Gamma_theta(f)(x) = sum_y (f(x)-f(y))^2 j(x,{y}) approximate the
carre du champ, and degree-p pairings of antisymmetric cochains against
p-fold kernel products approximate Gram determinants of degree-p forms.

The degree-p pairing carries a p! factor: the elementary cochain built from
(f_1..f_p) evaluates through (1/p!) det[...], and the plain product-kernel
sum of two such factors converges to (1/p!) det[(Gamma(f_i,h_j))]; the p!
restores the determinant normalization used for exterior products, so the
nonlocal pairing and the fiberwise Gram determinant share one limit.  For
p = 1 nothing changes.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .kas import Cochain, ElementaryCochain

SYMMETRY_RTOL = 1e-10


class KernelError(ValueError):
    pass


class KernelBase:
    """Interface shared by dense and structured kernels."""

    space = None
    label = ""

    def row(self, x: int) -> np.ndarray:
        raise NotImplementedError

    def dense(self) -> np.ndarray:
        raise NotImplementedError

    def gamma(self, fvals: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gamma_eps(self, fvals: np.ndarray, eps: float) -> np.ndarray:
        raise NotImplementedError


class DenseKernel(KernelBase):
    """Kernel with an explicit n x n mass matrix."""

    def __init__(self, space, j: np.ndarray, label: str = ""):
        j = np.asarray(j, dtype=float)
        n = space.n_points
        if j.shape != (n, n):
            raise KernelError(f"kernel matrix shape {j.shape}, expected {(n, n)}")
        if np.abs(np.diag(j)).max() > 0:
            raise KernelError("kernel diagonal must be zero")
        if j.min() < 0:
            raise KernelError(f"negative kernel mass {j.min():g}")
        mu = space.point_weights
        weighted = j * mu[:, None]
        scale = max(np.abs(weighted).max(), 1e-300)
        asym = np.abs(weighted - weighted.T).max() / scale
        if asym > SYMMETRY_RTOL:
            raise KernelError(f"kernel is not mu-symmetric (relative defect {asym:g})")
        self.space = space
        self.j = j
        self.label = label

    def row(self, x: int) -> np.ndarray:
        return self.j[x]

    def dense(self) -> np.ndarray:
        return self.j

    def gamma(self, fvals: np.ndarray) -> np.ndarray:
        diff = fvals[:, None] - fvals[None, :]
        return (diff * diff * self.j).sum(axis=1)

    def gamma_eps(self, fvals: np.ndarray, eps: float) -> np.ndarray:
        diff = fvals[:, None] - fvals[None, :]
        mask = self.space.dist_matrix() < eps
        return (diff * diff * self.j * mask).sum(axis=1)


def _values(f, space) -> np.ndarray:
    from .kas import as_point_values

    return as_point_values(f, space).astype(float)


def gamma_theta(f, kernel: KernelBase) -> np.ndarray:
    """Gamma_theta(f)(x) = sum_y (f(x) - f(y))^2 j(x, {y})."""
    return kernel.gamma(_values(f, kernel.space))


def gamma_theta_eps(f, kernel: KernelBase, eps: float) -> np.ndarray:
    """Gamma_theta with the sum truncated to the open ball B(x, eps)."""
    return kernel.gamma_eps(_values(f, kernel.space), eps)


def energy_theta(f, kernel: KernelBase) -> float:
    return float(gamma_theta(f, kernel) @ kernel.space.point_weights)


def tail_energy(f, kernel: KernelBase, eps: float) -> float:
    """Energy carried by pairs at distance >= eps; vanishes as kernels localize."""
    full = gamma_theta(f, kernel)
    near = gamma_theta_eps(f, kernel, eps)
    return float((full - near) @ kernel.space.point_weights)


# ---------------------------------------------------------------------------
# nonlocal inner products of degree-p cochains


def _check_pairing(F, H, kernels):
    if F.degree != H.degree:
        raise KernelError(f"degree mismatch: {F.degree} vs {H.degree}")
    p = F.degree
    if p < 1:
        raise KernelError("pairing requires degree >= 1")
    if len(kernels) != p:
        raise KernelError(f"{len(kernels)} kernels supplied for degree {p}")
    return p


def _candidate_tuples(space, x0: int, p: int, eps: float) -> np.ndarray:
    """Ordered p-tuples of distinct indices != x0, all pairwise-and-to-x0 < eps."""
    d = space.dist_matrix()
    near = np.flatnonzero(d[x0] < eps)
    near = near[near != x0]
    if p == 1:
        return near.reshape(-1, 1)
    if p == 2:
        a, b = np.meshgrid(near, near, indexing="ij")
        a, b = a.ravel(), b.ravel()
        keep = (a != b) & (d[a, b] < eps)
        return np.column_stack([a[keep], b[keep]])
    tuples = []
    for combo in _ordered_tuples(near, p):
        idx = np.asarray(combo)
        if (d[np.ix_(idx, idx)] < eps).all():
            tuples.append(combo)
    return np.asarray(tuples, dtype=int).reshape(-1, p)


def _ordered_tuples(pool, p):
    import itertools

    return itertools.permutations(pool, p) if p > 1 else ((x,) for x in pool)


def nonlocal_inner_at(x0: int, F, H, kernels, eps: float) -> float:
    """Degree-p pairing of F and H at base point x0.

    p! * sum over tuples (x_1..x_p), all indices distinct and within eps of
    each other and of x0, of F(x0,x..) H(x0,x..) prod_i j_i(x0, {x_i}).
    """
    p = _check_pairing(F, H, kernels)
    space = kernels[0].space
    tuples = _candidate_tuples(space, x0, p, eps)
    if tuples.shape[0] == 0:
        return 0.0
    fv = F.eval_tuples(space, x0, tuples)
    hv = fv if H is F else H.eval_tuples(space, x0, tuples)
    weight = np.ones(tuples.shape[0])
    for i, k in enumerate(kernels):
        weight *= k.row(x0)[tuples[:, i]]
    return factorial(p) * float(np.sum(fv * hv * weight))


def nonlocal_inner_profile(F, H, kernels, eps: float) -> np.ndarray:
    """nonlocal_inner_at for every base point, as an array.

    Dispatches to a backend fast path when one is available (periodic grids
    with ball kernels); otherwise loops over base points.
    """
    p = _check_pairing(F, H, kernels)
    space = kernels[0].space
    fast = getattr(space, "elementary_ball_profile", None)
    if (
        fast is not None
        and isinstance(F, ElementaryCochain)
        and isinstance(H, ElementaryCochain)
        and all(hasattr(k, "radius") for k in kernels)
        and 2.0 * max(k.radius for k in kernels) <= eps
        and p <= 2
    ):
        return fast(F, H, kernels)
    return np.array([nonlocal_inner_at(x, F, H, kernels, eps) for x in range(space.n_points)])


def nonlocal_inner_total(F, H, kernels, eps: float) -> float:
    """Integrated pairing against the symmetrized product-kernel measure.

    The symmetrization averages over which tuple slot carries the base-point
    integration; for antisymmetric F and H every slot contributes the same
    value, so one base-point sum suffices.
    """
    space = kernels[0].space
    profile = nonlocal_inner_profile(F, H, kernels, eps)
    return float(profile @ space.point_weights)


def _coboundary_of(F, space):
    if isinstance(F, ElementaryCochain):
        return F.coboundary_representation()
    if isinstance(F, Cochain):
        return F.coboundary(space)
    raise KernelError(f"unsupported cochain type {type(F)!r}")


def hodge_form(F, H, kernels, eps: float) -> float:
    """Quadratic form <delta_p F, delta_p H> in the degree-(p+1) pairing."""
    if F.degree + 1 != len(kernels):
        raise KernelError(f"{len(kernels)} kernels supplied for degree {F.degree} + 1")
    space = kernels[0].space
    dF = _coboundary_of(F, space)
    dH = dF if H is F else _coboundary_of(H, space)
    return nonlocal_inner_total(dF, dH, kernels, eps)

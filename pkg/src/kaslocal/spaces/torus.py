"""Flat unit-torus grids with a trigonometric function algebra.

The algebra is finite Fourier sums with exact gradients, so the carre du
champ Gamma(f,g) = grad f . grad g is available analytically at every grid
point.  Ball kernels are stored as offset stencils; kernel sums over balls
are periodic correlations and run either by shift-accumulation or by FFT.
"""

from __future__ import annotations

from math import ceil, pi

import numpy as np

from ..kernels import KernelBase, KernelError

UNIT_BALL_VOLUME = {1: 2.0, 2: pi}


class TrigPoly:
    """Finite Fourier sum sum_k c_k exp(2 pi i k.x) with Hermitian coefficients."""

    def __init__(self, dim: int, coeffs: dict):
        self.dim = dim
        clean = {}
        for k, c in coeffs.items():
            k = tuple(int(v) for v in k)
            if len(k) != dim:
                raise ValueError(f"frequency {k} has wrong arity for dim {dim}")
            c = complex(c)
            if c != 0:
                clean[k] = clean.get(k, 0) + c
        self.coeffs = {k: c for k, c in clean.items() if c != 0}

    @classmethod
    def const(cls, dim: int, c: float) -> "TrigPoly":
        return cls(dim, {(0,) * dim: complex(c)})

    @classmethod
    def sin(cls, dim: int, freq) -> "TrigPoly":
        k = tuple(int(v) for v in np.atleast_1d(freq))
        mk = tuple(-v for v in k)
        return cls(dim, {k: -0.5j, mk: 0.5j})

    @classmethod
    def cos(cls, dim: int, freq) -> "TrigPoly":
        k = tuple(int(v) for v in np.atleast_1d(freq))
        mk = tuple(-v for v in k)
        return cls(dim, {k: 0.5, mk: 0.5})

    @property
    def is_constant(self) -> bool:
        return all(all(v == 0 for v in k) for k in self.coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return TrigPoly(self.dim, out)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self + (-1.0) * self._coerce(other)

    def __mul__(self, other):
        if np.isscalar(other):
            return TrigPoly(self.dim, {k: c * other for k, c in self.coeffs.items()})
        other = self._coerce(other)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        return TrigPoly(self.dim, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def _coerce(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        if np.isscalar(other):
            return TrigPoly.const(self.dim, other)
        raise TypeError(f"cannot combine TrigPoly with {type(other)!r}")

    def partial(self, axis: int) -> "TrigPoly":
        return TrigPoly(
            self.dim, {k: c * (2j * pi * k[axis]) for k, c in self.coeffs.items()}
        )

    def values_on_axes(self, axes: list[np.ndarray]) -> np.ndarray:
        shape = tuple(len(a) for a in axes)
        out = np.zeros(shape, dtype=complex)
        for k, c in self.coeffs.items():
            term = np.asarray(c)
            for kd, ax in zip(k, axes):
                term = np.multiply.outer(term, np.exp(2j * pi * kd * ax))
            out += term
        return out.real

    def point_values(self, backend) -> np.ndarray:
        return backend.field_values(self).ravel()


class TorusGrid:
    """Uniform grid on the unit torus in one or two dimensions."""

    def __init__(self, n_axes: int, res: int):
        if n_axes not in (1, 2):
            raise ValueError("torus backends support one or two axes")
        if res < 2:
            raise ValueError("grid needs at least two points per axis")
        self.n_axes = n_axes
        self.res = res
        self.shape = (res,) * n_axes
        self.spacing = 1.0 / res
        self.axes = [np.arange(res) / res for _ in range(n_axes)]
        self._dist = None

    @property
    def n_points(self) -> int:
        return self.res**self.n_axes

    @property
    def point_weights(self) -> np.ndarray:
        return np.full(self.n_points, 1.0 / self.n_points)

    @property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    # -- function evaluation ------------------------------------------------

    def field_values(self, f) -> np.ndarray:
        """Values of a function handle as an array shaped like the grid."""
        if isinstance(f, TrigPoly):
            return f.values_on_axes(self.axes)
        arr = np.asarray(f, dtype=float)
        if arr.ndim == 0:
            return np.full(self.shape, float(arr))
        if arr.shape == self.shape:
            return arr
        if arr.ndim == 1 and arr.size == self.n_points:
            return arr.reshape(self.shape)
        raise ValueError(f"cannot interpret values of shape {arr.shape} on grid {self.shape}")

    def point_values(self, f) -> np.ndarray:
        return self.field_values(f).ravel()

    # -- carre du champ (analytic) ------------------------------------------

    def gamma(self, f, g) -> np.ndarray:
        """Gamma(f,g) = grad f . grad g at every grid point (flat array)."""
        if np.isscalar(f) or np.isscalar(g):
            return np.zeros(self.n_points)
        if not isinstance(f, TrigPoly) or not isinstance(g, TrigPoly):
            raise TypeError("analytic carre du champ requires trigonometric handles")
        out = np.zeros(self.shape)
        for a in range(self.n_axes):
            out += self.field_values(f.partial(a)) * self.field_values(g.partial(a))
        return out.ravel()

    def dirichlet_energy(self, f) -> float:
        return float(self.gamma(f, f) @ self.point_weights)

    # -- site interface (sites are the grid points) --------------------------

    @property
    def n_sites(self) -> int:
        return self.n_points

    @property
    def site_weights(self) -> np.ndarray:
        return self.point_weights

    def site_values(self, f) -> np.ndarray:
        return self.point_values(f)

    # -- metric --------------------------------------------------------------

    def dist_matrix(self) -> np.ndarray:
        if self.n_points > 6000:
            raise MemoryError(
                f"dense distance matrix for {self.n_points} grid points; "
                "use offset-based kernels instead"
            )
        if self._dist is None:
            pts = self.points
            d2 = np.zeros((self.n_points, self.n_points))
            for a in range(self.n_axes):
                diff = np.abs(pts[:, a][:, None] - pts[:, a][None, :])
                diff = np.minimum(diff, 1.0 - diff)
                d2 += diff**2
            self._dist = np.sqrt(d2)
        return self._dist

    # -- graph Laplacian (for semigroup kernels) ------------------------------

    def stiffness(self) -> np.ndarray:
        """Nearest-neighbour quadratic form matching the Dirichlet integral."""
        n = self.n_points
        if n > 6000:
            raise MemoryError(f"dense stiffness for {n} grid points")
        a = np.zeros((n, n))
        idx = np.arange(n).reshape(self.shape)
        w = self.spacing ** (self.n_axes - 2)
        for axis in range(self.n_axes):
            nb = np.roll(idx, -1, axis=axis)
            for i, j in zip(idx.ravel(), nb.ravel()):
                a[i, i] += w
                a[j, j] += w
                a[i, j] -= w
                a[j, i] -= w
        return a

    def mass_weights(self) -> np.ndarray:
        return self.point_weights

    # -- fast pairing profile -------------------------------------------------

    def elementary_ball_profile(self, F, H, kernels) -> np.ndarray:
        return _elementary_ball_profile(self, F, H, kernels)


class TorusBallKernel(KernelBase):
    """Uniform averaging kernel (n+2)/(nu_n r^(n+2)) on the open ball B(x, r)."""

    def __init__(self, grid: TorusGrid, r: float):
        if r <= 0:
            raise KernelError("ball radius must be positive")
        if r >= 0.5:
            raise KernelError(f"ball radius {r} is at least half the torus width")
        self.space = grid
        self.radius = float(r)
        n = grid.n_axes
        self.scale = (n + 2) / (UNIT_BALL_VOLUME[n] * r ** (n + 2))
        self.mass_per_point = 1.0 / grid.n_points
        self.offsets = self._enumerate_offsets(grid, r)
        self.label = f"ball r={r:g}"

    @staticmethod
    def _enumerate_offsets(grid: TorusGrid, r: float):
        res = grid.res
        h = grid.spacing
        kmax = min(int(ceil(r / h)), res // 2)
        rng = range(-kmax, kmax + 1)
        offs = []
        if grid.n_axes == 1:
            for d in rng:
                if d != 0 and abs(d) * h < r:
                    offs.append((d,))
        else:
            for d0 in rng:
                for d1 in rng:
                    if (d0, d1) != (0, 0) and np.hypot(d0, d1) * h < r:
                        offs.append((d0, d1))
        return tuple(offs)

    @property
    def weight(self) -> float:
        """Mass j(x,{y}) carried by each grid point inside the ball."""
        return self.scale * self.mass_per_point

    def _flat_indices(self, x: int) -> np.ndarray:
        coords = np.unravel_index(x, self.space.shape)
        res = self.space.res
        idx = []
        for off in self.offsets:
            shifted = tuple((c + o) % res for c, o in zip(coords, off))
            idx.append(np.ravel_multi_index(shifted, self.space.shape))
        return np.asarray(idx, dtype=int)

    def row(self, x: int) -> np.ndarray:
        out = np.zeros(self.space.n_points)
        out[self._flat_indices(x)] = self.weight
        return out

    def dense(self) -> np.ndarray:
        n = self.space.n_points
        if n > 6000:
            raise MemoryError(f"dense kernel for {n} grid points")
        out = np.zeros((n, n))
        for x in range(n):
            out[x, self._flat_indices(x)] = self.weight
        return out

    def ball_sum(self, field: np.ndarray, offsets=None) -> np.ndarray:
        """sum_y j(x,{y}) field(y) over the grid, as a shaped array."""
        offsets = self.offsets if offsets is None else offsets
        field = np.asarray(field, dtype=float)
        if len(offsets) > 48:
            return self.weight * _correlate_indicator(field, offsets, self.space.shape)
        out = np.zeros_like(field)
        for off in offsets:
            out += np.roll(field, tuple(-o for o in off), axis=tuple(range(field.ndim)))
        return self.weight * out

    def _offsets_within(self, eps: float):
        h = self.space.spacing
        return tuple(
            o for o in self.offsets if np.sqrt(sum(v * v for v in o)) * h < eps
        )

    def gamma(self, fvals: np.ndarray) -> np.ndarray:
        return self._gamma_offsets(fvals, self.offsets)

    def gamma_eps(self, fvals: np.ndarray, eps: float) -> np.ndarray:
        return self._gamma_offsets(fvals, self._offsets_within(eps))

    def _gamma_offsets(self, fvals: np.ndarray, offsets) -> np.ndarray:
        field = self.space.field_values(fvals)
        # Gamma(f)(x) = w * sum_d (f(x) - f(x+d))^2
        #             = w * (|D| f^2 - 2 f B[f] + B[f^2]) with unweighted sums B
        card = len(offsets)
        if card == 0:
            return np.zeros(self.space.n_points)
        bsum_f = self.ball_sum(field, offsets) / self.weight
        bsum_f2 = self.ball_sum(field * field, offsets) / self.weight
        out = self.weight * (card * field * field - 2.0 * field * bsum_f + bsum_f2)
        return out.ravel()


def _correlate_indicator(field: np.ndarray, offsets, shape) -> np.ndarray:
    """sum_d field(x + d) via FFT cross-correlation with the offset indicator."""
    ind = np.zeros(shape)
    for off in offsets:
        ind[tuple(o % s for o, s in zip(off, shape))] = 1.0
    f_hat = np.fft.rfftn(field)
    k_hat = np.fft.rfftn(ind)
    return np.fft.irfftn(f_hat * np.conj(k_hat), s=shape, axes=tuple(range(len(shape))))


# ---------------------------------------------------------------------------
# fast degree-1 / degree-2 pairing profiles for ball kernels


class _FieldCache:
    """Named grid fields, their products, and per-kernel ball sums.

    Constant handles are folded into scalar multipliers so they never inflate
    the set of convolved fields; field spectra and kernel spectra are cached,
    so each distinct field costs one forward FFT and each (kernel, field)
    pair one inverse FFT.
    """

    def __init__(self, grid: TorusGrid, kernels):
        self.grid = grid
        self.kernels = kernels
        self.fields = {(): np.ones(grid.shape)}
        self.consts = {}
        self.sums = {}
        self.hats = {}
        self.kernel_hats = {}

    def register(self, name: str, handle):
        field = self.grid.field_values(handle)
        if np.ptp(field) == 0.0:
            self.consts[name] = float(field.flat[0])
        else:
            self.fields[(name,)] = field

    def _reduce(self, names: tuple):
        scalar = 1.0
        kept = []
        for nm in names:
            if nm in self.consts:
                scalar *= self.consts[nm]
            else:
                kept.append(nm)
        return scalar, tuple(sorted(kept))

    def field(self, names: tuple) -> np.ndarray:
        scalar, key = self._reduce(names)
        if key not in self.fields:
            out = np.ones(self.grid.shape)
            for nm in key:
                out = out * self.fields[(nm,)]
            self.fields[key] = out
        return scalar * self.fields[key] if scalar != 1.0 else self.fields[key]

    def _field_hat(self, key: tuple) -> np.ndarray:
        if key not in self.hats:
            self.hats[key] = np.fft.rfftn(self.field(key))
        return self.hats[key]

    def _kernel_hat(self, kernel) -> np.ndarray:
        key = id(kernel)
        if key not in self.kernel_hats:
            ind = np.zeros(self.grid.shape)
            for off in kernel.offsets:
                ind[tuple(o % s for o, s in zip(off, self.grid.shape))] = 1.0
            self.kernel_hats[key] = np.conj(np.fft.rfftn(ind))
        return self.kernel_hats[key]

    def bsum(self, kernel, names: tuple) -> np.ndarray:
        scalar, key = self._reduce(names)
        cache_key = (id(kernel), key)
        if cache_key not in self.sums:
            if len(kernel.offsets) > 48:
                axes = tuple(range(len(self.grid.shape)))
                raw = np.fft.irfftn(
                    self._field_hat(key) * self._kernel_hat(kernel),
                    s=self.grid.shape,
                    axes=axes,
                )
                self.sums[cache_key] = kernel.weight * raw
            else:
                self.sums[cache_key] = kernel.ball_sum(self.fields.get(key, self.field(key)))
        out = self.sums[cache_key]
        return scalar * out if scalar != 1.0 else out


def _shifted_ball_sum(cache: _FieldCache, kernel, fa: str, hb: str, chi: tuple) -> np.ndarray:
    """Ball sum of (f_a(y) - f_a(x))(h_b(y) - h_b(x)) chi(y), as a field of x."""
    fa0 = cache.field((fa,))
    hb0 = cache.field((hb,))
    return (
        cache.bsum(kernel, (fa, hb) + chi)
        - hb0 * cache.bsum(kernel, (fa,) + chi)
        - fa0 * cache.bsum(kernel, (hb,) + chi)
        + fa0 * hb0 * cache.bsum(kernel, chi)
    )


def _elementary_ball_profile(grid: TorusGrid, F, H, kernels) -> np.ndarray:
    """Degree p in {1,2} pairing profile; algebraically equal to the tuple sum.

    Tuples with coinciding entries carry a vanishing determinant, so the
    factorized kernel sums need no diagonal corrections.
    """
    p = F.degree
    total = np.zeros(grid.shape)
    for g, fs in F.terms:
        for k, hs in H.terms:
            cache = _FieldCache(grid, kernels)
            cache.register("g", g)
            cache.register("k", k)
            for i, f in enumerate(fs, start=1):
                cache.register(f"f{i}", f)
            for j, h in enumerate(hs, start=1):
                cache.register(f"h{j}", h)
            if p == 1:
                total += _profile_p1(cache)
            elif p == 2:
                total += _profile_p2(cache)
            else:
                raise KernelError("fast ball profile implemented for degree <= 2")
    return total.ravel()


def _profile_p1(cache: _FieldCache) -> np.ndarray:
    g0 = cache.field(("g",))
    k0 = cache.field(("k",))
    ker = cache.kernels[0]
    acc = g0 * k0 * _shifted_ball_sum(cache, ker, "f1", "h1", ())
    acc = acc + g0 * _shifted_ball_sum(cache, ker, "f1", "h1", ("k",))
    acc = acc + k0 * _shifted_ball_sum(cache, ker, "f1", "h1", ("g",))
    acc = acc + _shifted_ball_sum(cache, ker, "f1", "h1", ("g", "k"))
    return acc / 4.0


_DET_TERMS_P2 = (
    (1, 1, 2, 2, 1.0),
    (1, 2, 2, 1, -1.0),
    (2, 1, 1, 2, -1.0),
    (2, 2, 1, 1, 1.0),
)


def _profile_p2(cache: _FieldCache) -> np.ndarray:
    g0 = cache.field(("g",))
    k0 = cache.field(("k",))
    acc = np.zeros_like(g0)
    for alpha in range(3):
        for beta in range(3):
            pref = 1.0
            if alpha == 0:
                pref = pref * g0
            if beta == 0:
                pref = pref * k0
            chi1 = (("g",) if alpha == 1 else ()) + (("k",) if beta == 1 else ())
            chi2 = (("g",) if alpha == 2 else ()) + (("k",) if beta == 2 else ())
            inner = np.zeros_like(acc)
            for a, b, c, d, sign in _DET_TERMS_P2:
                w1 = _shifted_ball_sum(cache, cache.kernels[0], f"f{a}", f"h{b}", chi1)
                w2 = _shifted_ball_sum(cache, cache.kernels[1], f"f{c}", f"h{d}", chi2)
                inner += sign * w1 * w2
            acc += pref * inner
    # 1/9 from the gbar.kbar expansion, 1/4 from the two 1/p! factors,
    # and p! = 2 restoring the determinant normalization of the pairing.
    return acc / 18.0

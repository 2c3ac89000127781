"""Level-m Sierpinski gasket graphs.

Cells are the 3^m small triangles of the m-th subdivision; the resistance
form is the (5/3)^m-scaled sum of squared differences over cell vertex
pairs.  Harmonic extension follows the midpoint rule: the new vertex between
corners a and b of a cell (opposite corner c) receives (2a + 2b + c)/5.
The Kusuoka measure is the sum of the energy measures of the two harmonic
coordinates, kept as per-cell weights; the carre du champ of vertex
functions is the cell density of their polarized energy measure against it.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class SGPoly:
    """Cylinder function: a polynomial in the two harmonic coordinates."""

    def __init__(self, coeffs: dict):
        clean = {}
        for (i, j), c in coeffs.items():
            c = float(c)
            if c != 0.0:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), 0.0) + c
        self.coeffs = clean

    @classmethod
    def const(cls, c: float) -> "SGPoly":
        return cls({(0, 0): c})

    @classmethod
    def h1(cls) -> "SGPoly":
        return cls({(1, 0): 1.0})

    @classmethod
    def h2(cls) -> "SGPoly":
        return cls({(0, 1): 1.0})

    @property
    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self.coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return SGPoly(out)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self + (-1.0) * self._coerce(other)

    def __mul__(self, other):
        if np.isscalar(other):
            return SGPoly({k: c * other for k, c in self.coeffs.items()})
        other = self._coerce(other)
        out = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0.0) + c1 * c2
        return SGPoly(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def _coerce(self, other) -> "SGPoly":
        if isinstance(other, SGPoly):
            return other
        if np.isscalar(other):
            return SGPoly.const(other)
        raise TypeError(f"cannot combine SGPoly with {type(other)!r}")

    def evaluate(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u, dtype=float)
        for (i, j), c in self.coeffs.items():
            out += c * (u**i) * (v**j)
        return out

    def point_values(self, backend) -> np.ndarray:
        return self.evaluate(backend.h1_values, backend.h2_values)


class SGLevel:
    """Vertices, cells, resistance form, and Kusuoka weights at level m."""

    ENERGY_SCALE = 5.0 / 3.0

    def __init__(self, m: int):
        if m < 0:
            raise ValueError("level must be nonnegative")
        self.m = m
        self._build(m)
        self.h1_values = self.harmonic((0.0, 1.0, 0.0))
        self.h2_values = self.harmonic((0.0, 0.0, 1.0))
        ce1 = self.cell_energies_bilinear(self.h1_values, self.h1_values)
        ce2 = self.cell_energies_bilinear(self.h2_values, self.h2_values)
        self.cell_weights = ce1 + ce2
        vw = np.zeros(self.n_points)
        np.add.at(vw, self.cells.ravel(), np.repeat(self.cell_weights / 3.0, 3))
        self.vertex_weights = vw
        self._dist = None
        self._stiffness = None

    def _build(self, m: int):
        scale = 2**m
        verts: dict = {}
        lattice = []

        def vid(ij):
            if ij not in verts:
                verts[ij] = len(lattice)
                lattice.append(ij)
            return verts[ij]

        corners = [vid((0, 0)), vid((scale, 0)), vid((0, scale))]
        cells = [tuple(corners)]
        cell_coords = [((0, 0), (scale, 0), (0, scale))]
        splits = []
        for _ in range(m):
            new_cells, new_coords, level_splits = [], [], []
            for (ia, ib, ic), (A, B, C) in zip(cells, cell_coords):
                AB = ((A[0] + B[0]) // 2, (A[1] + B[1]) // 2)
                BC = ((B[0] + C[0]) // 2, (B[1] + C[1]) // 2)
                AC = ((A[0] + C[0]) // 2, (A[1] + C[1]) // 2)
                iab, ibc, iac = vid(AB), vid(BC), vid(AC)
                level_splits.append((ia, ib, ic, iab, ibc, iac))
                new_cells += [(ia, iab, iac), (iab, ib, ibc), (iac, ibc, ic)]
                new_coords += [(A, AB, AC), (AB, B, BC), (AC, BC, C)]
            splits.append(np.asarray(level_splits, dtype=int))
            cells, cell_coords = new_cells, new_coords
        self.boundary = np.asarray(corners, dtype=int)
        self.cells = np.asarray(cells, dtype=int)
        self.splits = splits
        lat = np.asarray(lattice, dtype=float) / scale
        self.coords = np.column_stack(
            [lat[:, 0] + 0.5 * lat[:, 1], (np.sqrt(3.0) / 2.0) * lat[:, 1]]
        )

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    @property
    def point_weights(self) -> np.ndarray:
        return self.vertex_weights

    # -- harmonic extension ----------------------------------------------------

    def harmonic(self, boundary) -> np.ndarray:
        """Energy-minimizing extension of the three corner values."""
        vals = np.zeros(self.n_points)
        vals[self.boundary] = np.asarray(boundary, dtype=float)
        for level_splits in self.splits:
            a, b, c, ab, bc, ac = (level_splits[:, k] for k in range(6))
            vals[ab] = (2 * vals[a] + 2 * vals[b] + vals[c]) / 5.0
            vals[bc] = (2 * vals[b] + 2 * vals[c] + vals[a]) / 5.0
            vals[ac] = (2 * vals[a] + 2 * vals[c] + vals[b]) / 5.0
        return vals

    # -- resistance form ---------------------------------------------------------

    def point_values(self, f) -> np.ndarray:
        if isinstance(f, SGPoly):
            return f.point_values(self)
        arr = np.asarray(f, dtype=float)
        if arr.ndim == 0:
            return np.full(self.n_points, float(arr))
        if arr.shape != (self.n_points,):
            raise ValueError(f"values of shape {arr.shape}, expected ({self.n_points},)")
        return arr

    def cell_energies_bilinear(self, f, g) -> np.ndarray:
        fv = self.point_values(f)
        gv = self.point_values(g)
        a, b, c = self.cells[:, 0], self.cells[:, 1], self.cells[:, 2]
        acc = (fv[a] - fv[b]) * (gv[a] - gv[b])
        acc += (fv[b] - fv[c]) * (gv[b] - gv[c])
        acc += (fv[a] - fv[c]) * (gv[a] - gv[c])
        return (self.ENERGY_SCALE**self.m) * acc

    def energy_bilinear(self, f, g) -> float:
        return float(self.cell_energies_bilinear(f, g).sum())

    def energy(self, f) -> float:
        return self.energy_bilinear(f, f)

    def dirichlet_energy(self, f) -> float:
        return self.energy(f)

    def stiffness(self) -> np.ndarray:
        if self._stiffness is None:
            n = self.n_points
            a = np.zeros((n, n))
            w = self.ENERGY_SCALE**self.m
            for i, j in ((0, 1), (1, 2), (0, 2)):
                vi, vj = self.cells[:, i], self.cells[:, j]
                np.add.at(a, (vi, vi), w)
                np.add.at(a, (vj, vj), w)
                np.add.at(a, (vi, vj), -w)
                np.add.at(a, (vj, vi), -w)
            self._stiffness = a
        return self._stiffness

    def mass_weights(self) -> np.ndarray:
        return self.vertex_weights

    # -- metric (effective resistance) -------------------------------------------

    def dist_matrix(self) -> np.ndarray:
        """Effective-resistance metric R(x, y) between vertices."""
        if self._dist is None:
            g = np.linalg.pinv(self.stiffness())
            d = np.diag(g)
            r = d[:, None] + d[None, :] - 2.0 * g
            r = np.maximum(0.5 * (r + r.T), 0.0)
            np.fill_diagonal(r, 0.0)
            self._dist = r
        return self._dist

    def diameter(self) -> float:
        return float(self.dist_matrix().max())

    # -- carre du champ on cells ---------------------------------------------------

    @property
    def n_sites(self) -> int:
        return self.cells.shape[0]

    @property
    def site_weights(self) -> np.ndarray:
        return self.cell_weights

    def site_values(self, f) -> np.ndarray:
        fv = self.point_values(f)
        return fv[self.cells].mean(axis=1)

    def gamma(self, f, g) -> np.ndarray:
        """Cell density of the polarized energy measure against Kusuoka weights."""
        num = self.cell_energies_bilinear(f, g)
        out = np.zeros_like(num)
        ok = self.cell_weights > 0
        out[ok] = num[ok] / self.cell_weights[ok]
        return out


@lru_cache(maxsize=None)
def sg_level(m: int) -> SGLevel:
    return SGLevel(m)


def harmonic_extension(boundary, m: int) -> np.ndarray:
    return sg_level(m).harmonic(boundary)


def sg_energy(f, m: int) -> float:
    return sg_level(m).energy(f)


def sg_energy_bilinear(f, g, m: int) -> float:
    return sg_level(m).energy_bilinear(f, g)


def kusuoka_weights(m: int):
    """Kusuoka cell weights and their equal-split vertex lumping."""
    lvl = sg_level(m)
    return lvl.cell_weights.copy(), lvl.vertex_weights.copy()

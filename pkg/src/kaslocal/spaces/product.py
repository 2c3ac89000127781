"""Products of two Sierpinski gasket levels.

Functions are finite sums of tensors f (x) g of factor cylinder functions.
The product carre du champ of pure tensors is
Gamma(f1 (x) f2) = f1^2 Gamma2(f2) + f2^2 Gamma1(f1), extended bilinearly.
Heat kernels factor through the two semigroups, P_t = P_t1 (x) P_t2; product
quantities are evaluated through the factor matrices so the Kronecker matrix
never needs to be materialized on larger levels.
"""

from __future__ import annotations

import numpy as np

from ..kernels import KernelBase, KernelError
from .sg import SGLevel, SGPoly


class ProductFunction:
    """Finite sum of tensors (f, g) of factor function handles."""

    def __init__(self, terms):
        self.terms = [(f, g) for f, g in terms]

    @classmethod
    def tensor(cls, f, g) -> "ProductFunction":
        return cls([(f, g)])

    @classmethod
    def const(cls, c: float) -> "ProductFunction":
        return cls([(SGPoly.const(c), SGPoly.const(1.0))])

    @property
    def is_constant(self) -> bool:
        return all(
            getattr(f, "is_constant", False) and getattr(g, "is_constant", False)
            for f, g in self.terms
        )

    def __add__(self, other):
        other = self._coerce(other)
        return ProductFunction(self.terms + other.terms)

    def __radd__(self, other):
        return self.__add__(other)

    def __mul__(self, other):
        if np.isscalar(other):
            return ProductFunction([(f * other, g) for f, g in self.terms])
        other = self._coerce(other)
        out = []
        for f1, g1 in self.terms:
            for f2, g2 in other.terms:
                out.append((f1 * f2, g1 * g2))
        return ProductFunction(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def _coerce(self, other) -> "ProductFunction":
        if isinstance(other, ProductFunction):
            return other
        if np.isscalar(other):
            return ProductFunction.const(other)
        raise TypeError(f"cannot combine ProductFunction with {type(other)!r}")

    def vertex_matrix(self, backend: "ProductSG") -> np.ndarray:
        out = np.zeros((backend.factor1.n_points, backend.factor2.n_points))
        for f, g in self.terms:
            out += np.outer(backend.factor1.point_values(f), backend.factor2.point_values(g))
        return out

    def point_values(self, backend: "ProductSG") -> np.ndarray:
        return self.vertex_matrix(backend).ravel()


class ProductSG:
    """Two gasket factors with the product measure and product carre du champ."""

    def __init__(self, factor1: SGLevel, factor2: SGLevel):
        if factor1.m != factor2.m:
            raise ValueError("factors must be at the same level")
        self.factor1 = factor1
        self.factor2 = factor2

    @property
    def n_points(self) -> int:
        return self.factor1.n_points * self.factor2.n_points

    @property
    def point_weights(self) -> np.ndarray:
        return np.outer(self.factor1.vertex_weights, self.factor2.vertex_weights).ravel()

    @property
    def n_sites(self) -> int:
        return self.factor1.n_sites * self.factor2.n_sites

    @property
    def site_weights(self) -> np.ndarray:
        return np.outer(self.factor1.site_weights, self.factor2.site_weights).ravel()

    def _coerce(self, f) -> ProductFunction:
        if isinstance(f, ProductFunction):
            return f
        if np.isscalar(f):
            return ProductFunction.const(f)
        raise TypeError(f"product backend requires tensor-sum handles, got {type(f)!r}")

    def point_values(self, f) -> np.ndarray:
        if isinstance(f, np.ndarray) and f.shape == (self.n_points,):
            return f
        return self._coerce(f).point_values(self)

    def site_values(self, f) -> np.ndarray:
        f = self._coerce(f)
        out = np.zeros((self.factor1.n_sites, self.factor2.n_sites))
        for a, b in f.terms:
            out += np.outer(self.factor1.site_values(a), self.factor2.site_values(b))
        return out.ravel()

    def gamma(self, F, G) -> np.ndarray:
        """Product carre du champ on product cells, bilinear over tensor terms."""
        F = self._coerce(F)
        G = self._coerce(G)
        s1, s2 = self.factor1.n_sites, self.factor2.n_sites
        out = np.zeros((s1, s2))
        for fa, fb in F.terms:
            for ga, gb in G.terms:
                gamma1 = self.factor1.gamma(fa, ga)
                gamma2 = self.factor2.gamma(fb, gb)
                vals_b = self.factor2.site_values(fb * gb)
                vals_a = self.factor1.site_values(fa * ga)
                out += np.outer(gamma1, vals_b) + np.outer(vals_a, gamma2)
        return out.ravel()

    def dirichlet_energy(self, F) -> float:
        return float(self.gamma(F, F) @ self.site_weights)


def product_carre(F, G, backend: ProductSG) -> np.ndarray:
    """Gamma(F, G) on product cells; pure tensors follow the two-term product rule."""
    return backend.gamma(F, G)


class ProductHeatKernel(KernelBase):
    """Heat kernel P_t1 (x) P_t2 / (2t), evaluated through the factor matrices."""

    def __init__(self, backend: ProductSG, t: float, p1: np.ndarray, p2: np.ndarray):
        self.space = backend
        self.t = float(t)
        self.p1 = p1
        self.p2 = p2
        self.label = f"product heat t={t:g}"

    def conservativity_defect(self) -> float:
        rs1 = self.p1.sum(axis=1)
        rs2 = self.p2.sum(axis=1)
        return float(np.abs(np.outer(rs1, rs2) - 1.0).max())

    def symmetry_defect(self) -> float:
        """Exact max relative mu-symmetry defect over all product entries."""
        w1 = self.p1 * self.space.factor1.vertex_weights[:, None]
        w2 = self.p2 * self.space.factor2.vertex_weights[:, None]
        u, ut = w1.ravel(), w1.T.ravel()
        v, vt = w2.ravel(), w2.T.ravel()
        scale = max(np.abs(u).max() * np.abs(v).max(), 1e-300)
        worst = 0.0
        step = 4096
        for lo in range(0, u.size, step):
            hi = min(lo + step, u.size)
            block = np.abs(np.outer(u[lo:hi], v) - np.outer(ut[lo:hi], vt)).max()
            worst = max(worst, float(block))
        return worst / scale

    def transition(self, F) -> np.ndarray:
        """P_t F as a factor1 x factor2 matrix."""
        mat = self.space._coerce(F).vertex_matrix(self.space) if not isinstance(F, np.ndarray) else F
        return self.p1 @ mat @ self.p2.T

    def gamma(self, fvals) -> np.ndarray:
        if isinstance(fvals, np.ndarray) and fvals.ndim == 1:
            mat = fvals.reshape(self.space.factor1.n_points, self.space.factor2.n_points)
        else:
            mat = self.space._coerce(fvals).vertex_matrix(self.space)
        pt_f = self.p1 @ mat @ self.p2.T
        pt_f2 = self.p1 @ (mat * mat) @ self.p2.T
        out = (mat * mat - 2.0 * mat * pt_f + pt_f2) / (2.0 * self.t)
        return out.ravel()

    def gamma_eps(self, fvals, eps: float) -> np.ndarray:
        raise KernelError("truncated energies are not implemented on product backends")

    def row(self, x: int) -> np.ndarray:
        n2 = self.space.factor2.n_points
        i, j = divmod(x, n2)
        out = np.outer(self.p1[i], self.p2[j]).ravel() / (2.0 * self.t)
        out[x] = 0.0
        return out

    def dense(self) -> np.ndarray:
        n = self.space.n_points
        if n > 4000:
            raise MemoryError(f"dense product kernel for {n} points")
        out = np.kron(self.p1, self.p2) / (2.0 * self.t)
        np.fill_diagonal(out, 0.0)
        return out

"""Exact identity suite for the coboundary calculus.

Each check draws random integer-valued functions on a small point set and
verifies one algebraic identity of the antisymmetrizer/coboundary calculus.
Checks are phrased with factorial scalings cleared, so integer inputs stay
integer-valued in float64 and the comparisons are exact (residual 0.0); the
same code paths also accept Fraction-valued object arrays for literal
rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._dets import det_stack
from .kas import alt, coboundary_tensor, gbar_tensor, tensor


@dataclass
class IdentityResult:
    name: str
    fixtures: int
    max_residual: float
    exact: bool


def _rand_functions(rng, count: int, n: int, lo=-9, hi=9):
    return [rng.integers(lo, hi + 1, size=n).astype(float) for _ in range(count)]


def _residual(lhs, rhs) -> float:
    return float(np.max(np.abs(lhs - rhs))) if np.asarray(lhs).size else 0.0


def check_delta_delta_null(rng, n: int, p: int) -> float:
    """delta_p(delta_{p-1} F) = 0 for any p-variate F."""
    f = rng.integers(-9, 10, size=(n,) * p).astype(float)
    dd = coboundary_tensor(coboundary_tensor(f))
    return float(np.max(np.abs(dd)))


def check_alt_commute(rng, n: int, p: int) -> float:
    """delta(Alt_p F) = Alt_{p+1}(delta F), cleared of the 1/k! factors."""
    f = rng.integers(-9, 10, size=(n,) * p).astype(float)
    lhs = (p + 1) * coboundary_tensor(alt(f, normalized=False))
    rhs = alt(coboundary_tensor(f), normalized=False)
    return _residual(lhs, rhs)


def check_delta_alt_tensor(rng, n: int, p: int) -> float:
    """delta Alt_p(f_1 (x) .. (x) f_p) = (p+1) Alt_{p+1}(1 (x) f_1 (x) .. (x) f_p)."""
    fs = _rand_functions(rng, p, n)
    lhs = coboundary_tensor(alt(tensor(*fs), normalized=False))
    ones = np.ones(n)
    rhs = alt(tensor(ones, *fs), normalized=False)
    return _residual(lhs, rhs)


def _sum_tensor(g: np.ndarray, arity: int) -> np.ndarray:
    """sum_i g(x_i) over the tuple entries; (p+1) gbar without any division."""
    n = g.shape[0]
    out = np.zeros((n,) * arity, dtype=g.dtype)
    for i in range(arity):
        shape = [1] * arity
        shape[i] = n
        out = out + g.reshape(shape)
    return out


def check_determinant(rng, n: int, p: int) -> float:
    """delta Alt_p(f_1 (x) .. (x) f_p) evaluates to (1/p!) det[(f_i(x_j) - f_i(x_0))]."""
    fs = _rand_functions(rng, p, n)
    lhs = coboundary_tensor(alt(tensor(*fs), normalized=False))
    shape = (n,) * (p + 1)
    mats = np.zeros(shape + (p, p))
    for i, f in enumerate(fs):
        for j in range(p):
            col = f.reshape((1,) * (j + 1) + (n,) + (1,) * (p - 1 - j))
            base = f.reshape((n,) + (1,) * p)
            mats[..., i, j] = np.broadcast_to(col - base, shape)
    rhs = det_stack(mats)
    return _residual(lhs, rhs)


def check_pullout(rng, n: int, p: int) -> float:
    """Alt_{p+1}(f_0 (x) .. (x) f_p) peels each factor out with alternating signs.

    Cleared of normalizations: sum_sigma sgn F o sigma over p+1 slots equals
    sum_ell (-1)^ell f_ell (x) (sum over the remaining p slots).
    """
    fs = _rand_functions(rng, p + 1, n)
    lhs = alt(tensor(*fs), normalized=False)
    shape = (n,) * (p + 1)
    rhs = np.zeros(shape)
    for ell in range(p + 1):
        rest = fs[:ell] + fs[ell + 1 :]
        inner = alt(tensor(*rest), normalized=False)
        sign = -1.0 if ell % 2 else 1.0
        rhs += sign * np.multiply.outer(fs[ell], inner)
    return _residual(lhs, rhs)


def check_gbar_split(rng, n: int, p: int) -> float:
    """gbar delta Alt_p(f..) = Alt_{p+1}(g (x) f..) + sum_k Alt_{p+1}(1 (x) .. (f_k g) ..).

    Setting g = 1 recovers delta Alt_p = (p+1) Alt_{p+1}(1 (x) ..), so no
    extra degree factor can appear on the left.  Both sides are multiplied by
    (p+1)! so integer inputs compare exactly; the left then reads
    (sum_i g(x_i)) delta(sum_sigma sgn F o sigma).
    """
    fs = _rand_functions(rng, p, n)
    g = rng.integers(-9, 10, size=n).astype(float)
    ones = np.ones(n)
    gsum = _sum_tensor(g, p + 1)
    lhs = gsum * coboundary_tensor(alt(tensor(*fs), normalized=False))
    rhs = alt(tensor(g, *fs), normalized=False)
    for k in range(p):
        mixed = list(fs)
        mixed[k] = fs[k] * g
        rhs = rhs + alt(tensor(ones, *mixed), normalized=False)
    return _residual(lhs, rhs)


def check_delta_action(rng, n: int, p: int) -> float:
    """delta_p(gbar delta Alt_p(f..)) = delta_p Alt_{p+1}(g (x) f..), cleared by (p+1)!."""
    fs = _rand_functions(rng, p, n)
    g = rng.integers(-9, 10, size=n).astype(float)
    gsum = _sum_tensor(g, p + 1)
    inner = gsum * coboundary_tensor(alt(tensor(*fs), normalized=False))
    lhs = coboundary_tensor(inner)
    rhs = coboundary_tensor(alt(tensor(g, *fs), normalized=False))
    return _residual(lhs, rhs)


CHECKS = {
    "delta-delta-null": check_delta_delta_null,
    "alt-commute": check_alt_commute,
    "delta-alt-tensor": check_delta_alt_tensor,
    "determinant": check_determinant,
    "pullout": check_pullout,
    "gbar-split": check_gbar_split,
    "delta-action": check_delta_action,
}


def run_identity(name: str, fixtures: int = 200, seed: int = 0, n_max: int = 8, p_max: int = 3):
    """Run one named identity over random fixtures; returns an IdentityResult."""
    check = CHECKS[name]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(fixtures):
        p = int(rng.integers(1, p_max + 1))
        n = int(rng.integers(3, n_max + 1))
        if p >= 3:
            n = min(n, 6)  # keeps the (p+2)-variate tensors small
        worst = max(worst, check(rng, n, p))
    return IdentityResult(name, fixtures, worst, exact=(worst == 0.0))


def run_all(fixtures: int = 200, seed: int = 0):
    return [run_identity(name, fixtures=fixtures, seed=seed + i) for i, name in enumerate(CHECKS)]


def run_rational_spotcheck(seed: int = 0, fixtures: int = 5):
    """Re-run the suite in exact fractions on a few fixtures; residuals must be 0."""
    rng = np.random.default_rng(seed)
    worst = Fraction(0)
    for _ in range(fixtures):
        n = int(rng.integers(3, 6))
        p = int(rng.integers(1, 3))
        fs = [
            np.array([Fraction(int(v)) for v in rng.integers(-9, 10, size=n)], dtype=object)
            for _ in range(p)
        ]
        g = np.array([Fraction(int(v)) for v in rng.integers(-9, 10, size=n)], dtype=object)
        ones = np.array([Fraction(1)] * n, dtype=object)
        lhs = coboundary_tensor(alt(tensor(*fs)))
        rhs = (p + 1) * alt(tensor(ones, *fs))
        worst = max(worst, max(abs(v) for v in (lhs - rhs).ravel()))
        dd = coboundary_tensor(coboundary_tensor(tensor(*fs, g)))
        worst = max(worst, max(abs(v) for v in dd.ravel()))
        gbar = gbar_tensor(g, p + 1)
        lhs2 = coboundary_tensor(gbar * coboundary_tensor(alt(tensor(*fs))))
        rhs2 = coboundary_tensor(alt(tensor(g, *fs)))
        worst = max(worst, max(abs(v) for v in (lhs2 - rhs2).ravel()))
    return worst == 0

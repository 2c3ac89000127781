"""Kolmogorov-Alexander-Spanier machinery on finite metric measure spaces.

Functions of p+1 variables are held as dense tensors (axis k = variable k),
or sparsely as antisymmetric cochains keyed by strictly increasing index
tuples.  The coboundary is the alternating sum over variable omissions and
all tensor operations preserve exact dtypes, so identity checks can run in
rational arithmetic by passing object arrays of fractions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from ._dets import det_stack

DEFAULT_TUPLE_CAP = 2_000_000


class SpaceError(ValueError):
    pass


class TupleCapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"neighborhood tuple count {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


@dataclass
class FiniteMetricMeasureSpace:
    """A finite set with a metric given as a matrix and strictly positive weights."""

    dist: np.ndarray
    mu: np.ndarray
    stiffness_matrix: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise SpaceError(f"dist must be square, got {d.shape}")
        n = d.shape[0]
        if not np.allclose(d, d.T, atol=1e-12):
            raise SpaceError("dist is not symmetric")
        if np.abs(np.diag(d)).max() > 0:
            raise SpaceError("dist diagonal is not zero")
        if d.min() < 0:
            raise SpaceError("negative distances")
        # triangle inequality with a round-off allowance
        viol = (d[:, :, None] + d[None, :, :]).min(axis=1) - d - 1e-12
        if viol.min() < -1e-12:
            raise SpaceError("triangle inequality violated")
        m = np.asarray(self.mu, dtype=float)
        if m.shape != (n,) or m.min() <= 0:
            raise SpaceError("mu must be strictly positive of length n")
        self.dist = d
        self.mu = m
        if self.stiffness_matrix is not None:
            a = np.asarray(self.stiffness_matrix, dtype=float)
            if a.shape != (n, n) or not np.allclose(a, a.T, atol=1e-12):
                raise SpaceError("stiffness must be a symmetric n x n matrix")
            self.stiffness_matrix = a

    @classmethod
    def from_points(cls, coords, mu=None, stiffness=None) -> "FiniteMetricMeasureSpace":
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.shape[0] == 1 and coords.shape[1] > 1 and coords.ndim == 2:
            pass
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.sqrt((diff**2).sum(axis=-1))
        np.fill_diagonal(d, 0.0)
        mu = np.ones(len(coords)) if mu is None else np.asarray(mu, dtype=float)
        return cls(d, mu, stiffness)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def n_points(self) -> int:
        return self.n

    @property
    def point_weights(self) -> np.ndarray:
        return self.mu

    def diameter(self) -> float:
        return float(self.dist.max())

    def point_values(self, f) -> np.ndarray:
        """Coerce a function handle (array, scalar, or object with point values)."""
        return as_point_values(f, self)

    def stiffness(self) -> np.ndarray:
        """Stiffness for heat/Levy constructions and Dirichlet energies.

        Defaults to the unit-conductance complete-graph Laplacian, so a
        two-point space gets E(f) = (f(a) - f(b))^2.
        """
        if self.stiffness_matrix is not None:
            return self.stiffness_matrix
        n = self.n
        a = -np.ones((n, n))
        np.fill_diagonal(a, n - 1.0)
        return a

    def mass_weights(self) -> np.ndarray:
        return self.mu

    def dirichlet_energy(self, f) -> float:
        vals = self.point_values(f)
        a = self.stiffness()
        return float(vals @ a @ vals)

    def dist_matrix(self) -> np.ndarray:
        return self.dist


def as_point_values(f, space) -> np.ndarray:
    if hasattr(f, "point_values"):
        return np.asarray(f.point_values(space))
    arr = np.asarray(f)
    n = space.n_points
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape[0] != n:
        raise SpaceError(f"function values of length {arr.shape[0]}, expected {n}")
    return arr


# ---------------------------------------------------------------------------
# dense tensor operators


def signed_permutations(k: int):
    """All permutations of range(k) with their signs."""
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        yield perm, -1 if inv % 2 else 1


def tensor(*functions) -> np.ndarray:
    """f_1 (x) ... (x) f_k as a dense k-variate tensor."""
    out = None
    for f in functions:
        f = np.asarray(f)
        out = f if out is None else np.multiply.outer(out, f)
    return out


def alt(values: np.ndarray, normalized: bool = True) -> np.ndarray:
    """Antisymmetrize a k-variate tensor: (1/k!) sum_sigma sgn(sigma) F o sigma.

    With ``normalized=False`` the 1/k! factor is dropped, which keeps integer
    inputs exactly integer.
    """
    values = np.asarray(values)
    k = values.ndim
    out = np.zeros_like(values)
    for perm, sign in signed_permutations(k):
        out = out + sign * np.transpose(values, perm)
    if normalized:
        out = out / factorial(k)
    return out


def coboundary_tensor(values: np.ndarray) -> np.ndarray:
    """Alternating sum over variable omissions; k-variate in, (k+1)-variate out."""
    values = np.asarray(values)
    k = values.ndim
    n = values.shape[0]
    shape = (n,) * (k + 1)
    out = np.zeros(shape, dtype=values.dtype)
    for i in range(k + 1):
        term = np.expand_dims(values, axis=i)
        if i % 2 == 0:
            out = out + term
        else:
            out = out - term
    return out


def gbar_tensor(g: np.ndarray, arity: int) -> np.ndarray:
    """Arithmetic mean of g over the tuple entries, as an arity-variate tensor."""
    g = np.asarray(g)
    n = g.shape[0]
    out = np.zeros((n,) * arity, dtype=g.dtype)
    for i in range(arity):
        shape = [1] * arity
        shape[i] = n
        out = out + g.reshape(shape)
    if isinstance(out.flat[0], Fraction):
        return out * Fraction(1, arity)
    return out / arity


# ---------------------------------------------------------------------------
# neighborhoods


def in_neighborhood(tup, eps: float, space) -> bool:
    """True iff all pairwise distances inside the tuple are strictly below eps."""
    idx = np.asarray(tup, dtype=int)
    if idx.size <= 1:
        return True
    sub = space.dist_matrix()[np.ix_(idx, idx)]
    return bool(sub.max() < eps)


def neighborhood_tuples(space, eps: float, p: int, cap: int = DEFAULT_TUPLE_CAP):
    """Strictly increasing (p+1)-tuples with all pairwise distances < eps.

    Enumerated in lexicographic order by extending cliques of the dist < eps
    graph, so the result is a canonical basis ordering.
    """
    n = space.n_points
    adj = space.dist_matrix() < eps
    tuples = []

    def extend(prefix, allowed):
        if len(tuples) > cap:
            raise TupleCapExceeded(len(tuples), cap)
        if len(prefix) == p + 1:
            tuples.append(tuple(prefix))
            return
        start = prefix[-1] + 1 if prefix else 0
        for j in range(start, n):
            if allowed is None or allowed[j]:
                nxt = adj[j] if allowed is None else (allowed & adj[j])
                extend(prefix + [j], nxt)

    extend([], None)
    if len(tuples) > cap:
        raise TupleCapExceeded(len(tuples), cap)
    return tuples


# ---------------------------------------------------------------------------
# cochains


def _tuple_sign_and_key(tup):
    """Sort a tuple, returning (sign, sorted tuple); sign 0 on repeats."""
    tup = tuple(tup)
    order = sorted(range(len(tup)), key=lambda i: tup[i])
    key = tuple(tup[i] for i in order)
    for a, b in zip(key, key[1:]):
        if a == b:
            return 0, key
    inv = sum(
        1
        for i in range(len(order))
        for j in range(i + 1, len(order))
        if order[i] > order[j]
    )
    return (-1 if inv % 2 else 1), key


@dataclass
class Cochain:
    """Antisymmetric degree-p function on N_p(eps), stored on increasing tuples."""

    p: int
    eps: float
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for tup, v in self.values.items():
            tup = tuple(int(i) for i in tup)
            if len(tup) != self.p + 1:
                raise ValueError(f"tuple {tup} has arity {len(tup)}, expected {self.p + 1}")
            if any(a >= b for a, b in zip(tup, tup[1:])):
                raise ValueError(f"tuple {tup} is not strictly increasing")
            clean[tup] = v
        self.values = clean

    @property
    def degree(self) -> int:
        return self.p

    def __call__(self, tup):
        sign, key = _tuple_sign_and_key(tup)
        if sign == 0:
            return 0.0
        return sign * self.values.get(key, 0.0)

    def eval_tuples(self, space, x0: int, tuples: np.ndarray) -> np.ndarray:
        tuples = np.atleast_2d(np.asarray(tuples, dtype=int))
        return np.array([self((x0,) + tuple(row)) for row in tuples], dtype=float)

    def coboundary(self, space) -> "Cochain":
        """delta_p: values on increasing (p+2)-tuples inside N_{p+1}(eps)."""
        out = {}
        for tup in neighborhood_tuples(space, self.eps, self.p + 1):
            acc = 0.0
            for i in range(len(tup)):
                sub = tup[:i] + tup[i + 1 :]
                term = self.values.get(sub, 0.0)
                acc = acc + (term if i % 2 == 0 else -term)
            out[tup] = acc
        return Cochain(self.p + 1, self.eps, out)

    @classmethod
    def from_tensor(cls, space, eps: float, values: np.ndarray) -> "Cochain":
        values = np.asarray(values)
        p = values.ndim - 1
        out = {}
        for tup in neighborhood_tuples(space, eps, p):
            out[tup] = values[tup]
        return cls(p, eps, out)


def eval_elementary(space, g, fs, tup) -> float:
    """Value of the elementary term (g, [f_1..f_p]) at a (p+1)-tuple.

    gbar(tuple) * (1/p!) * det[(f_i(x_j) - f_i(x_0))], which agrees with
    evaluating gbar * delta_{p-1} Alt_p(f_1 (x) ... (x) f_p) directly.
    """
    tup = tuple(int(i) for i in tup)
    p = len(fs)
    gv = as_point_values(g, space)
    gbar = sum(gv[i] for i in tup) / (p + 1)
    if p == 0:
        return float(gbar)
    fv = [as_point_values(f, space) for f in fs]
    mat = np.array([[fv[i][tup[j + 1]] - fv[i][tup[0]] for j in range(p)] for i in range(p)])
    return float(gbar * det_stack(mat) / factorial(p))


@dataclass
class ElementaryCochain:
    """Linear combination of terms (g, [f_1..f_p]) read through eval_elementary.

    ``g`` and the ``f_i`` may be value arrays, scalars, or backend function
    handles exposing ``point_values``; handles are kept so the term structure
    can later be localized to a differential form.
    """

    p: int
    terms: list
    backend: object = None

    def __post_init__(self):
        for g, fs in self.terms:
            if len(fs) != self.p:
                raise ValueError(f"term has {len(fs)} functions, expected {self.p}")

    @property
    def degree(self) -> int:
        return self.p

    def _value_terms(self, space):
        out = []
        for g, fs in self.terms:
            out.append(
                (
                    as_point_values(g, space).astype(float),
                    [as_point_values(f, space).astype(float) for f in fs],
                )
            )
        return out

    def eval_tuple(self, space, tup) -> float:
        return sum(eval_elementary(space, g, fs, tup) for g, fs in self.terms)

    def eval_tuples(self, space, x0: int, tuples: np.ndarray) -> np.ndarray:
        """Values at (x0, t) for each row t of ``tuples``, vectorized."""
        tuples = np.atleast_2d(np.asarray(tuples, dtype=int))
        m = tuples.shape[0]
        total = np.zeros(m)
        p = self.p
        for gv, fvs in self._value_terms(space):
            gbar = (gv[x0] + gv[tuples].sum(axis=1)) / (p + 1)
            if p == 0:
                total += gbar
                continue
            mats = np.empty((m, p, p))
            for i, fv in enumerate(fvs):
                mats[:, i, :] = fv[tuples] - fv[x0]
            total += gbar * det_stack(mats) / factorial(p)
        return total

    def coboundary_representation(self) -> "ElementaryCochain":
        """delta_p of the cochain: term (g, [f..]) becomes (1, [g, f..])."""
        new_terms = [(1.0, [g] + list(fs)) for g, fs in self.terms]
        return ElementaryCochain(self.p + 1, new_terms, backend=self.backend)

    def restrict(self, space, eps: float) -> Cochain:
        vals = {}
        for tup in neighborhood_tuples(space, eps, self.p):
            vals[tup] = self.eval_tuple(space, tup)
        return Cochain(self.p, eps, vals)


# ---------------------------------------------------------------------------
# cohomology in exact rational arithmetic


def _sparse_rank_fractions(rows) -> int:
    """Rank over the rationals of a matrix given as sparse rows {col: value}."""
    pivots = {}  # pivot col -> reduced row
    rank = 0
    for row in rows:
        row = {c: Fraction(v) for c, v in row.items() if v != 0}
        while row:
            lead = min(row)
            if lead not in pivots:
                inv = 1 / row[lead]
                row = {c: v * inv for c, v in row.items()}
                pivots[lead] = row
                rank += 1
                break
            factor = row[lead]
            prow = pivots[lead]
            new = {}
            for c, v in row.items():
                w = v - factor * prow.get(c, 0)
                if w != 0:
                    new[c] = w
            for c, v in prow.items():
                if c not in row:
                    w = -factor * v
                    if w != 0:
                        new[c] = w
            row = new
    return rank


def _coboundary_rows(tuples_lo, tuples_hi):
    """Rows of delta_p on the increasing-tuple bases (one row per high tuple)."""
    index = {t: i for i, t in enumerate(tuples_lo)}
    rows = []
    for tup in tuples_hi:
        row = {}
        for i in range(len(tup)):
            sub = tup[:i] + tup[i + 1 :]
            col = index.get(sub)
            if col is not None:
                row[col] = row.get(col, 0) + (1 if i % 2 == 0 else -1)
        rows.append(row)
    return rows


def kas_cohomology_dims(space, eps: float, p_max: int, cap: int = DEFAULT_TUPLE_CAP):
    """Dimensions of H^p at scale eps for p = 0..p_max.

    The basis in degree p is the set of strictly increasing (p+1)-tuples whose
    pairwise distances are all < eps; antisymmetric functions on N_p(eps) are
    determined by their values there.  Ranks are exact (rational Gaussian
    elimination), so no tolerance enters the dimension count.
    """
    levels = [neighborhood_tuples(space, eps, p, cap=cap) for p in range(p_max + 2)]
    total = sum(len(t) for t in levels)
    if total > cap:
        raise TupleCapExceeded(total, cap)
    ranks = []
    for p in range(p_max + 1):
        rows = _coboundary_rows(levels[p], levels[p + 1])
        ranks.append(_sparse_rank_fractions(rows))
    dims = []
    for p in range(p_max + 1):
        below = ranks[p - 1] if p >= 1 else 0
        dims.append(len(levels[p]) - ranks[p] - below)
    return dims

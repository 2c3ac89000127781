"""Elementary differential forms over a carre du champ backend.

A backend supplies evaluation sites (grid points, gasket cells, or product
cells), site weights for mu-integration, site values of algebra functions,
and the carre du champ gamma(f, g) as a site array.  A degree-p elementary
form is a linear combination of terms (g, [f_1..f_p]) read as
g d0f_1 ^ ... ^ d0f_p; pointwise inner products are Gram determinants
det[(gamma(f_i, h_j))] weighted by g(x) k(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._dets import det_stack
from .kas import Cochain, ElementaryCochain


class FormError(ValueError):
    pass


def _is_constant(f) -> bool:
    if np.isscalar(f):
        return True
    if hasattr(f, "is_constant"):
        return bool(f.is_constant)
    arr = np.asarray(f, dtype=float)
    return bool(np.ptp(arr) == 0.0) if arr.ndim else True


@dataclass
class ElementaryForm:
    """Linear combination of terms g d0f_1 ^ ... ^ d0f_p on a backend."""

    backend: object
    degree: int
    terms: list

    def __post_init__(self):
        for g, fs in self.terms:
            if len(fs) != self.degree:
                raise FormError(f"term has {len(fs)} factors, expected {self.degree}")

    def __add__(self, other: "ElementaryForm") -> "ElementaryForm":
        if other.degree != self.degree:
            raise FormError("degree mismatch in sum")
        return ElementaryForm(self.backend, self.degree, self.terms + other.terms)


def form_inner_sites(omega: ElementaryForm, eta: ElementaryForm) -> np.ndarray:
    """<omega, eta> at every site: bilinear sum of g k det[(gamma(f_i, h_j))]."""
    if omega.degree != eta.degree:
        raise FormError(f"degree mismatch: {omega.degree} vs {eta.degree}")
    backend = omega.backend
    p = omega.degree
    out = np.zeros(backend.n_sites)
    for g, fs in omega.terms:
        gv = backend.site_values(g)
        for k, hs in eta.terms:
            kv = backend.site_values(k)
            if p == 0:
                out += gv * kv
                continue
            gram = np.empty((backend.n_sites, p, p))
            for i, f in enumerate(fs):
                for j, h in enumerate(hs):
                    gram[:, i, j] = backend.gamma(f, h)
            out += gv * kv * det_stack(gram)
    return out


def form_inner_at(omega: ElementaryForm, eta: ElementaryForm, site: int) -> float:
    return float(form_inner_sites(omega, eta)[site])


def form_l2_inner(omega: ElementaryForm, eta: ElementaryForm) -> float:
    """mu-integral of the pointwise inner product."""
    backend = omega.backend
    return float(form_inner_sites(omega, eta) @ backend.site_weights)


def form_l2_norm(omega: ElementaryForm) -> float:
    sq = form_l2_inner(omega, omega)
    return float(np.sqrt(max(sq, 0.0)))


def exterior_d(omega: ElementaryForm) -> ElementaryForm:
    """d_p(g d0f_1 ^ ... ^ d0f_p) = d0g ^ d0f_1 ^ ... ^ d0f_p; constants die."""
    new_terms = []
    for g, fs in omega.terms:
        if _is_constant(g):
            continue
        new_terms.append((1.0, [g] + list(fs)))
    return ElementaryForm(omega.backend, omega.degree + 1, new_terms)


def localize(F: ElementaryCochain) -> ElementaryForm:
    """Termwise localization (g, [f..]) -> g d0f_1 ^ ... ^ d0f_p.

    Defined on elementary representations only; a raw cochain carries no term
    structure to localize.
    """
    if isinstance(F, Cochain):
        raise FormError(
            "localization needs an elementary representation; raw cochain values "
            "are unsupported input"
        )
    if F.backend is None or not hasattr(F.backend, "gamma"):
        raise FormError("cochain backend does not carry a carre du champ")
    return ElementaryForm(F.backend, F.p, [(g, list(fs)) for g, fs in F.terms])


def chain_map_residual(F: ElementaryCochain, backend=None) -> float:
    """L2 norm of d_p(localize(F)) - localize(delta_p F).

    Both sides reduce to the terms (1, [g, f..]); the residual is zero up to
    round-off for every elementary combination.
    """
    if backend is not None and F.backend is None:
        F = ElementaryCochain(F.p, F.terms, backend=backend)
    a = exterior_d(localize(F))
    b = localize(F.coboundary_representation())
    sq = form_l2_inner(a, a) - 2.0 * form_l2_inner(a, b) + form_l2_inner(b, b)
    return float(np.sqrt(max(sq, 0.0)))

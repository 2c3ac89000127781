"""Nonlocal cochain complexes, local differential forms, and their localization.

Two differential complexes on finite metric measure spaces: the nonlocal
coboundary complex of antisymmetric multivariate functions on diagonal
neighborhoods, and the local complex of elementary forms built from a carre
du champ.  Kernel families (ball averages, heat semigroups, subordinated
Levy kernels) connect the two: degree-p kernel pairings of elementary
cochains converge to Gram-determinant inner products of the localized forms.
"""

from .exterior import InnerSpace, PVector, decomposable, pvector_norm, wedge_inner, wedge_product
from .kas import (
    Cochain,
    ElementaryCochain,
    FiniteMetricMeasureSpace,
    alt,
    coboundary_tensor,
    eval_elementary,
    in_neighborhood,
    kas_cohomology_dims,
    neighborhood_tuples,
    tensor,
)
from .kernels import (
    DenseKernel,
    energy_theta,
    gamma_theta,
    gamma_theta_eps,
    hodge_form,
    nonlocal_inner_at,
    nonlocal_inner_profile,
    nonlocal_inner_total,
    tail_energy,
)
from .forms import (
    ElementaryForm,
    chain_map_residual,
    exterior_d,
    form_inner_at,
    form_inner_sites,
    form_l2_inner,
    form_l2_norm,
    localize,
)

__version__ = "0.1.0"

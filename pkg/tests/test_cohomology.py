import numpy as np
import pytest

from kaslocal.kas import TupleCapExceeded, kas_cohomology_dims
from conftest import random_space
from oracles import graph_components, rips_betti


def test_circle_detects_loop(circle_space):
    dims = kas_cohomology_dims(circle_space, 0.8, 2)
    assert dims == [1, 1, 0]


def test_circle_matches_rips_oracle(circle_space):
    # nudge the oracle scale to keep conventions off tie boundaries
    for eps in (0.6, 0.8, 1.1):
        dims = kas_cohomology_dims(circle_space, eps, 2)
        betti = rips_betti(circle_space.dist, eps + 1e-9, 2)
        assert dims == betti


def test_large_scale_trivial(rng):
    for _ in range(5):
        sp = random_space(rng, 7)
        dims = kas_cohomology_dims(sp, sp.diameter() + 1.0, 2)
        assert dims == [1, 0, 0]


def test_tiny_scale_counts_points(rng):
    sp = random_space(rng, 6)
    eps = 0.5 * sp.dist[sp.dist > 0].min()
    dims = kas_cohomology_dims(sp, eps, 2)
    assert dims == [6, 0, 0]


def test_h0_counts_components(rng):
    for _ in range(10):
        sp = random_space(rng, 8)
        eps = float(np.quantile(sp.dist[sp.dist > 0], 0.3))
        dims = kas_cohomology_dims(sp, eps, 1)
        assert dims[0] == graph_components(sp.dist, eps)


def generic_scale(dist, rng, lo=0.2, hi=0.9):
    """A scale strictly between two consecutive pairwise distances, so the
    strict-inequality convention cannot interact with ties."""
    vals = np.unique(dist[dist > 0])
    k = int(rng.integers(int(lo * len(vals)), max(int(hi * len(vals)), 1)))
    k = min(k, len(vals) - 2)
    return float(0.5 * (vals[k] + vals[k + 1]))


def test_random_spaces_match_oracle(rng):
    for _ in range(10):
        sp = random_space(rng, 7)
        eps = generic_scale(sp.dist, rng)
        dims = kas_cohomology_dims(sp, eps, 2)
        betti = rips_betti(sp.dist, eps + 1e-9, 2)
        assert dims == betti


def test_cap_raises(circle_space):
    with pytest.raises(TupleCapExceeded) as err:
        kas_cohomology_dims(circle_space, 3.0, 3, cap=50)
    assert err.value.count > 50


def test_two_points(two_point_space):
    assert kas_cohomology_dims(two_point_space, 2.0, 1) == [1, 0]
    assert kas_cohomology_dims(two_point_space, 0.5, 1) == [2, 0]

import itertools
from fractions import Fraction

import numpy as np
import pytest

from kaslocal.kas import (
    Cochain,
    ElementaryCochain,
    FiniteMetricMeasureSpace,
    SpaceError,
    alt,
    coboundary_tensor,
    eval_elementary,
    in_neighborhood,
    neighborhood_tuples,
    tensor,
)
from conftest import random_space
from oracles import eval_elementary_oracle


class TestSpaceValidation:
    def test_from_points(self, rng):
        sp = random_space(rng, 6)
        assert sp.n == 6
        assert sp.dist[2, 2] == 0.0

    def test_rejects_asymmetric(self):
        d = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(SpaceError):
            FiniteMetricMeasureSpace(d, np.ones(2))

    def test_rejects_triangle_violation(self):
        d = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 5.0], [1.0, 5.0, 0.0]])
        with pytest.raises(SpaceError):
            FiniteMetricMeasureSpace(d, np.ones(3))

    def test_rejects_nonpositive_mu(self):
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(SpaceError):
            FiniteMetricMeasureSpace(d, np.array([1.0, 0.0]))


class TestAlt:
    def test_two_variable_expansion(self, rng):
        f, g = rng.normal(size=(2, 5))
        got = alt(tensor(f, g))
        expect = 0.5 * (np.multiply.outer(f, g) - np.multiply.outer(g, f))
        np.testing.assert_allclose(got, expect, atol=1e-14)

    def test_idempotent(self, rng):
        raw = rng.normal(size=(4, 4, 4))
        once = alt(raw)
        np.testing.assert_allclose(alt(once), once, atol=1e-14)

    def test_symmetric_input_dies(self, rng):
        f = rng.normal(size=6)
        assert np.abs(alt(tensor(f, f))).max() < 1e-14


class TestCoboundary:
    def test_degree_zero(self, rng):
        f = rng.normal(size=5)
        df = coboundary_tensor(f)
        expect = f[None, :] - f[:, None]
        np.testing.assert_allclose(df, expect)

    def test_constant_dies(self):
        assert np.abs(coboundary_tensor(np.ones(4))).max() == 0.0

    def test_delta_delta_zero_rational(self):
        rng = np.random.default_rng(7)
        vals = np.array(
            [[Fraction(int(v)) for v in row] for row in rng.integers(-9, 10, (4, 4))],
            dtype=object,
        )
        dd = coboundary_tensor(coboundary_tensor(vals))
        assert all(v == 0 for v in dd.ravel())


class TestNeighborhoods:
    def test_singleton_always_inside(self, rng):
        sp = random_space(rng, 5)
        assert in_neighborhood((3,), 1e-9, sp)

    def test_large_eps_all_inside(self, rng):
        sp = random_space(rng, 5)
        assert in_neighborhood((0, 1, 2, 3, 4), sp.diameter() + 1.0, sp)

    def test_strict_boundary(self, two_point_space):
        assert not in_neighborhood((0, 1), 1.0, two_point_space)
        assert in_neighborhood((0, 1), 1.0 + 1e-9, two_point_space)

    def test_tuples_are_cliques(self, rng):
        sp = random_space(rng, 7)
        eps = np.median(sp.dist[sp.dist > 0])
        for tup in neighborhood_tuples(sp, eps, 2):
            assert list(tup) == sorted(tup)
            assert in_neighborhood(tup, eps, sp)


class TestEvalElementary:
    def test_degree_one_difference(self, rng):
        sp = random_space(rng, 6)
        f = rng.normal(size=6)
        got = eval_elementary(sp, 1.0, [f], (2, 5))
        assert got == pytest.approx(f[5] - f[2])

    def test_repeated_function_vanishes(self, rng):
        sp = random_space(rng, 6)
        f = rng.integers(-9, 10, 6).astype(float)
        assert eval_elementary(sp, 1.0, [f, f], (0, 2, 4)) == 0.0

    def test_matches_full_permutation_sum(self, rng):
        sp = random_space(rng, 6)
        for p in (1, 2, 3):
            g = rng.normal(size=6)
            fs = [rng.normal(size=6) for _ in range(p)]
            for tup in itertools.combinations(range(6), p + 1):
                got = eval_elementary(sp, g, fs, tup)
                want = eval_elementary_oracle(g, fs, tup)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-13)

    def test_matches_permutation_sum_exactly_in_rationals(self, rng):
        # both routes stay in exact fractions until the final float cast
        sp = random_space(rng, 6)
        for p in (1, 2, 3):
            g = np.array([Fraction(int(v)) for v in rng.integers(-9, 10, 6)], dtype=object)
            fs = [
                np.array([Fraction(int(v)) for v in rng.integers(-9, 10, 6)], dtype=object)
                for _ in range(p)
            ]
            for tup in itertools.combinations(range(6), p + 1):
                got = eval_elementary(sp, g, fs, tup)
                want = eval_elementary_oracle(g, fs, tup)
                assert got == float(want)

    def test_vectorized_matches_scalar(self, rng):
        sp = random_space(rng, 7)
        g = rng.normal(size=7)
        fs = [rng.normal(size=7) for _ in range(2)]
        F = ElementaryCochain(2, [(g, fs)], backend=sp)
        tuples = np.array([[1, 2], [3, 5], [6, 2]])
        vec = F.eval_tuples(sp, 0, tuples)
        for row, v in zip(tuples, vec):
            assert v == pytest.approx(F.eval_tuple(sp, (0, *row)), rel=1e-12, abs=1e-14)


class TestCochain:
    def test_sign_reconstruction(self):
        c = Cochain(1, 2.0, {(0, 1): 3.0})
        assert c((0, 1)) == 3.0
        assert c((1, 0)) == -3.0
        assert c((1, 1)) == 0.0

    def test_rejects_unsorted_keys(self):
        with pytest.raises(ValueError):
            Cochain(1, 1.0, {(1, 0): 2.0})

    def test_coboundary_matches_tensor_route(self, rng):
        sp = random_space(rng, 6)
        eps = sp.diameter() + 1.0
        raw = rng.normal(size=(6, 6))
        raw = raw - raw.T  # antisymmetric degree-1 values
        c = Cochain.from_tensor(sp, eps, raw)
        dc = c.coboundary(sp)
        dt = coboundary_tensor(raw)
        for tup, v in dc.values.items():
            assert v == pytest.approx(dt[tup], rel=1e-12, abs=1e-14)

    def test_elementary_restrict_roundtrip(self, rng):
        sp = random_space(rng, 5)
        g = rng.normal(size=5)
        fs = [rng.normal(size=5) for _ in range(2)]
        F = ElementaryCochain(2, [(g, fs)], backend=sp)
        eps = sp.diameter() + 1.0
        c = F.restrict(sp, eps)
        for tup in neighborhood_tuples(sp, eps, 2):
            assert c(tup) == pytest.approx(F.eval_tuple(sp, tup), rel=1e-12, abs=1e-14)

    def test_coboundary_representation_evaluates_like_delta(self, rng):
        # delta of (g, [f..]) agrees pointwise with the term (1, [g, f..])
        sp = random_space(rng, 6)
        g = rng.integers(-5, 6, 6).astype(float)
        fs = [rng.integers(-5, 6, 6).astype(float) for _ in range(2)]
        F = ElementaryCochain(2, [(g, fs)], backend=sp)
        dF = F.coboundary_representation()
        eps = sp.diameter() + 1.0
        dense = F.restrict(sp, eps)
        ddense = dense.coboundary(sp)
        for tup in neighborhood_tuples(sp, eps, 3):
            assert dF.eval_tuple(sp, tup) == pytest.approx(ddense(tup), rel=1e-10, abs=1e-10)

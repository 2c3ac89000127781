import numpy as np
import pytest

from kaslocal import forms, kernels
from kaslocal.kas import ElementaryCochain
from kaslocal.spaces import ProductFunction, ProductSG, product_carre, product_heat
from kaslocal.spaces.sg import SGPoly, sg_level


@pytest.fixture(scope="module")
def prod2():
    return ProductSG(sg_level(2), sg_level(2))


def test_level_mismatch_rejected():
    with pytest.raises(ValueError):
        ProductSG(sg_level(2), sg_level(3))


def test_weights_are_products(prod2):
    assert prod2.point_weights.sum() == pytest.approx(16.0, rel=1e-12)
    assert prod2.site_weights.sum() == pytest.approx(16.0, rel=1e-12)


class TestProductCarre:
    def test_pure_tensor_formula(self, prod2):
        # Gamma(f1 (x) f2) = f1^2 Gamma2(f2) + f2^2 Gamma1(f1) on cells
        f1 = SGPoly({(1, 0): 1.0, (0, 1): 0.3})
        f2 = SGPoly({(0, 1): 1.0, (2, 0): -0.5})
        F = ProductFunction.tensor(f1, f2)
        got = product_carre(F, F, prod2).reshape(prod2.factor1.n_sites, -1)
        v1 = prod2.factor1.site_values(f1 * f1)
        v2 = prod2.factor2.site_values(f2 * f2)
        g1 = prod2.factor1.gamma(f1, f1)
        g2 = prod2.factor2.gamma(f2, f2)
        expect = np.outer(v1, g2) + np.outer(g1, v2)
        np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-14)

    def test_lift_of_first_factor(self, prod2):
        F = ProductFunction.tensor(SGPoly.h1(), SGPoly.const(1.0))
        got = prod2.gamma(F, F).reshape(prod2.factor1.n_sites, -1)
        g1 = prod2.factor1.gamma(SGPoly.h1(), SGPoly.h1())
        np.testing.assert_allclose(got, np.broadcast_to(g1[:, None], got.shape), atol=1e-14)

    def test_cross_term_vanishes(self, prod2):
        F = ProductFunction.tensor(SGPoly.h1(), SGPoly.const(1.0))
        G = ProductFunction.tensor(SGPoly.const(1.0), SGPoly.h1())
        assert np.abs(prod2.gamma(F, G)).max() < 1e-14


class TestProductHeat:
    def test_gamma_matches_dense_kron(self, prod2, rng):
        K = product_heat(0.05, prod2)
        F = ProductFunction(
            [(SGPoly.h1(), SGPoly({(0, 1): 1.0})), (SGPoly({(2, 0): 1.0}), SGPoly.const(1.0))]
        )
        vals = prod2.point_values(F)
        dense = K.dense()
        expect = ((vals[:, None] - vals[None, :]) ** 2 * dense).sum(axis=1)
        np.testing.assert_allclose(K.gamma(F), expect, rtol=1e-10, atol=1e-12)

    def test_conservative_and_symmetric(self, prod2):
        for t in (1.0, 0.1, 0.01):
            K = product_heat(t, prod2)
            assert K.conservativity_defect() < 1e-10
            assert K.symmetry_defect() < 1e-10

    def test_dense_matches_rows(self, prod2):
        K = product_heat(0.2, prod2)
        dense = K.dense()
        for x in (0, 7, 100):
            np.testing.assert_allclose(K.row(x), dense[x], rtol=1e-12)

    def test_sup_bound_of_tensor_gamma(self, prod2):
        from kaslocal.spaces import heat_kernel

        f1 = SGPoly.h1()
        f2 = SGPoly({(0, 1): 1.0, (2, 0): 0.5})
        F = ProductFunction.tensor(f1, f2)
        for t in (1.0, 0.1, 0.01):
            K = product_heat(t, prod2)
            lhs = np.abs(K.gamma(F)).max()
            k1 = heat_kernel(prod2.factor1, t)
            k2 = heat_kernel(prod2.factor2, t)
            g1 = np.abs(kernels.gamma_theta(prod2.factor1.point_values(f1), k1)).max()
            g2 = np.abs(kernels.gamma_theta(prod2.factor2.point_values(f2), k2)).max()
            b1 = np.abs(prod2.factor1.point_values(f1)).max() ** 2 * g2
            b2 = np.abs(prod2.factor2.point_values(f2)).max() ** 2 * g1
            assert lhs <= 2 * b1 + 2 * b2 + 1e-12


class TestProductForms:
    def test_two_dimensional_fiber_positive(self, prod2):
        one = SGPoly.const(1.0)
        F = ElementaryCochain(
            2,
            [(1.0, [ProductFunction.tensor(SGPoly.h1(), one), ProductFunction.tensor(one, SGPoly.h1())])],
            backend=prod2,
        )
        w = forms.localize(F)
        sq = forms.form_l2_inner(w, w)
        assert sq == pytest.approx(4.0, rel=1e-10)  # E(h1) * E(h1)
        assert sq > 0

    def test_product_algebra(self, prod2):
        a = ProductFunction.tensor(SGPoly.h1(), SGPoly.h2())
        b = ProductFunction.tensor(SGPoly.h2(), SGPoly.const(2.0))
        lhs = prod2.point_values(a * b)
        rhs = prod2.point_values(a) * prod2.point_values(b)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-14)

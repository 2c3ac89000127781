"""Random-fixture checks of the coboundary-calculus identities.

The full 200-fixture-per-identity run lives in the acceptance suite; here a
shorter pass guards each identity plus the exact rational arithmetic route.
"""

import pytest

from kaslocal.identities import CHECKS, run_all, run_identity, run_rational_spotcheck


@pytest.mark.parametrize("name", sorted(CHECKS))
def test_identity_exact_on_integer_fixtures(name):
    result = run_identity(name, fixtures=40, seed=11)
    assert result.max_residual == 0.0
    assert result.exact


def test_run_all_covers_every_identity():
    results = run_all(fixtures=5, seed=3)
    assert {r.name for r in results} == set(CHECKS)


def test_rational_spotcheck():
    assert run_rational_spotcheck(seed=5)

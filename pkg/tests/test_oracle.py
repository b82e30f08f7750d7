import math

import numpy as np
import pytest

from hcn.mp import FactorKind, and_update, or_update, pool_update
from hcn.mp.oracle import ArityTooLargeError, oracle_factor_update


def test_oracle_and_spec_value():
    out = oracle_factor_update(FactorKind.AND, [0.0, 5.0, 3.0])
    assert out[0] == pytest.approx(3.0)


def test_oracle_pool_spec_value():
    out = oracle_factor_update(FactorKind.POOL, [0.0, 1.0, -2.0])
    assert out[0] == pytest.approx(1.0 - math.log(2))


def test_oracle_or_spec_value():
    out = oracle_factor_update(FactorKind.OR, [1.0, -3.0, 0.0])
    assert out[-1] == pytest.approx(1.0)


def test_oracle_rejects_large_arity():
    with pytest.raises(ArityTooLargeError):
        oracle_factor_update(FactorKind.OR, [0.0] * 21)


def test_and_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(300):
        inc = rng.uniform(-5, 5, size=3)
        got = and_update(*inc)
        want = oracle_factor_update(FactorKind.AND, list(inc))
        np.testing.assert_allclose(got, want, atol=1e-9)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_or_matches_oracle(m):
    rng = np.random.default_rng(11 + m)
    for _ in range(200):
        inc = rng.uniform(-5, 5, size=m + 1)
        out_tops, out_b = or_update(list(inc[:-1]), inc[-1])
        want = oracle_factor_update(FactorKind.OR, list(inc))
        np.testing.assert_allclose(out_tops + [out_b], want, atol=1e-9)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 9])
def test_pool_matches_oracle(m):
    rng = np.random.default_rng(23 + m)
    for _ in range(200):
        inc = rng.uniform(-5, 5, size=m + 1)
        out_t, out_bottoms = pool_update(inc[0], list(inc[1:]))
        want = oracle_factor_update(FactorKind.POOL, list(inc))
        np.testing.assert_allclose([out_t] + out_bottoms, want, atol=1e-9)

import math

import pytest

from hcn.mp import (
    INF,
    IndeterminateFormError,
    and_update,
    damped_assign,
    or_update,
    pool_update,
    sat_add,
)


def test_and_all_zero_incoming():
    out_t1, out_t2, out_b = and_update(0.0, 0.0, 0.0)
    assert out_t1 == 0.0 and out_t2 == 0.0 and out_b == 0.0


def test_and_spec_values():
    # exhaustive max-marginalization over the 4 valid AND configurations
    out_t1, _, _ = and_update(0.0, 5.0, 3.0)
    assert out_t1 == pytest.approx(3.0)
    _, _, out_b = and_update(2.0, -1.0, 0.0)
    assert out_b == pytest.approx(-1.0)


def test_or_single_top_passthrough():
    out_tops, out_b = or_update([7.5], -1.25)
    assert out_b == 7.5
    assert out_tops == [-1.25]


def test_or_spec_values():
    _, out_b = or_update([1.0, -3.0], 0.0)
    assert out_b == pytest.approx(1.0)
    out_tops, _ = or_update([1.0, 0.5], 2.0)
    assert out_tops[1] == pytest.approx(0.0)


def test_pool_m1_zeros():
    out_t, out_bottoms = pool_update(0.0, [0.0])
    assert out_t == 0.0
    assert out_bottoms == [0.0]


def test_pool_spec_values():
    out_t, _ = pool_update(0.0, [1.0, -2.0])
    assert out_t == pytest.approx(1.0 - math.log(2))
    _, out_bottoms = pool_update(0.5, [1.0, -2.0])
    assert out_bottoms[0] == pytest.approx(0.5 - math.log(2))


def test_damped_assign():
    assert damped_assign(-7.0, 4.0, 1.0) == 4.0
    assert damped_assign(0.0, 4.0, 0.5) == pytest.approx(2.0)
    assert damped_assign(-1.0, 3.0, 0.8) == pytest.approx(2.2)


def test_damped_assign_fixed_point():
    for alpha in (0.1, 0.5, 0.9, 1.0):
        assert damped_assign(1.25, 1.25, alpha) == 1.25


def test_damped_assign_replaces_infinite_old():
    assert damped_assign(-INF, 2.0, 0.5) == 2.0


def test_damped_assign_rejects_bad_alpha():
    with pytest.raises(ValueError):
        damped_assign(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        damped_assign(0.0, 1.0, 1.5)


def test_sat_add_saturates():
    assert sat_add(INF, -5.0) == INF
    assert sat_add(-INF, 123.0) == -INF
    with pytest.raises(IndeterminateFormError):
        sat_add(INF, -INF)


def test_and_rejects_pos_inf_top():
    with pytest.raises(IndeterminateFormError):
        and_update(0.0, INF, 1.0)


def test_and_neg_inf_top_limits():
    # a -inf top kills the bottom and mutes the other top
    out_t1, _, out_b = and_update(1.5, -INF, 0.7)
    assert out_t1 == 0.0
    assert out_b <= -INF / 2


def test_or_clamped_bottom_kills_tops():
    out_tops, _ = or_update([0.3, -0.2], -INF)
    assert all(t <= -INF / 2 for t in out_tops)


def test_pool_clamped_top_kills_bottoms():
    _, out_bottoms = pool_update(-INF, [0.4, 0.1, -0.3])
    assert all(b <= -INF / 2 for b in out_bottoms)


def test_pool_clamped_top_on_makes_bottoms_compete():
    _, out_bottoms = pool_update(INF, [2.0, -1.0])
    assert out_bottoms[0] == pytest.approx(1.0)
    assert out_bottoms[1] == pytest.approx(-2.0)


def test_or_tie_breaks_to_lowest_index():
    # both tops equal: the argmax must pick index 0, so top 0 sees the
    # "excluding itself" best at index 1 and vice versa; outputs are equal
    out_tops, out_b = or_update([1.0, 1.0], 0.0)
    assert out_b == pytest.approx(2.0)
    assert out_tops[0] == pytest.approx(out_tops[1])

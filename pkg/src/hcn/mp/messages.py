"""Log-domain message scalars.

A message on a directed factor->variable edge is a single float: the value of
the unnormalized message at 1 minus its value at 0.  Hard evidence is encoded
with a large sentinel instead of IEEE infinity so that ordinary float compares
and additions keep working; the absorption of small floats into the sentinel
(1e30 + x == 1e30 in double precision) is exactly the saturation we want.
"""

import math

INF = 1e30
INF_THRESHOLD = 1e29


class IndeterminateFormError(ArithmeticError):
    """An update hit inf - inf (or inf + -inf); the graph is over-constrained."""

    def __init__(self, msg="indeterminate form", factor=None):
        if factor is not None:
            msg = f"{msg} (factor {factor})"
        super().__init__(msg)
        self.factor = factor


def is_pos_inf(v):
    return v >= INF_THRESHOLD


def is_neg_inf(v):
    return v <= -INF_THRESHOLD


def is_inf(v):
    return v >= INF_THRESHOLD or v <= -INF_THRESHOLD


def sat_add(a, b):
    """Saturating addition of two extended reals.

    Opposite-sign infinities are rejected: a legal update never adds hard
    evidence of both polarities.
    """
    if a >= INF_THRESHOLD:
        if b <= -INF_THRESHOLD:
            raise IndeterminateFormError("inf + (-inf)")
        return INF
    if a <= -INF_THRESHOLD:
        if b >= INF_THRESHOLD:
            raise IndeterminateFormError("(-inf) + inf")
        return -INF
    if b >= INF_THRESHOLD:
        return INF
    if b <= -INF_THRESHOLD:
        return -INF
    return a + b


def sat_sub_const(v, c):
    """v - c for finite c, saturating: an infinite v is unchanged."""
    if is_inf(v):
        return v
    return v - c


def damped_assign(old, fresh, alpha):
    """Blend a stored message with its recomputed value.

    alpha = 1 replaces outright.  An infinite stored value is always replaced:
    blending a sentinel would slowly leak it back into the finite range, and
    the only infinite stored messages are initialization values that the first
    real update is meant to overwrite.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"damping must be in (0, 1], got {alpha}")
    if alpha == 1.0 or is_inf(old) or is_inf(fresh):
        return fresh
    if fresh == old:
        return old
    return (1.0 - alpha) * old + alpha * fresh


def log_odds(p):
    """log(p / (1 - p)) for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    return math.log(p) - math.log1p(-p)

"""Closed-form max-product updates for the AND, OR and POOL factors.

Every function takes the incoming message for each neighbor (the sum of all
messages into that variable except the one from this factor) and returns the
fresh outgoing message for each neighbor.  All values are normalized log-domain
scalars; the sentinel conventions of :mod:`hcn.mp.messages` apply, and the
infinite cases are evaluated as the limits of the finite expressions.

Factor semantics (log potentials):

* ``AND(b | t1, t2)``: 0 when b == t1 AND t2, else -inf.
* ``OR(b | t1..tM)``: 0 when b == t1 OR ... OR tM, else -inf.
* ``POOL(b1..bM | t)``: -log M when t == 1 and exactly one bottom is 1,
  0 when t == 0 and all bottoms are 0, else -inf.
"""

import enum
import math

from .messages import (
    INF,
    INF_THRESHOLD,
    IndeterminateFormError,
    is_inf,
    is_neg_inf,
    is_pos_inf,
    sat_add,
)


class FactorKind(enum.Enum):
    AND = "and"
    OR = "or"
    POOL = "pool"
    AND_OR_TREE = "and-or-tree"
    CLASS_TREE = "class-tree"


def and_update(m_in_t1, m_in_t2, m_in_b):
    """Messages out of an AND factor: (to t1, to t2, to b)."""
    return (
        _and_top(m_in_t2, m_in_b),
        _and_top(m_in_t1, m_in_b),
        min(sat_add(m_in_t1, m_in_t2), m_in_t1, m_in_t2),
    )


def _and_top(other_top, bottom):
    # max(0, other + b) - max(0, other).  A +inf other top makes this
    # inf - inf; such factors must be rewired to a pass-through instead.
    if is_pos_inf(other_top):
        raise IndeterminateFormError("AND update with +inf top incoming")
    both = sat_add(other_top, bottom)
    return max(0.0, both) - max(0.0, other_top)


def _top_two(values):
    """(best value, its index, second-best value) with lowest-index ties."""
    i1 = 0
    v1 = values[0]
    v2 = -INF
    for i in range(1, len(values)):
        v = values[i]
        if v > v1:
            v2 = v1
            v1 = v
            i1 = i
        elif v > v2:
            v2 = v
    return v1, i1, v2


def or_update(m_in_tops, m_in_b):
    """Messages out of an OR factor: (list to tops, to b)."""
    m = len(m_in_tops)
    if m < 1:
        raise ValueError("OR factor needs at least one top")
    n_pos_inf = 0
    tot_fin = 0.0
    for t in m_in_tops:
        if is_pos_inf(t):
            n_pos_inf += 1
        elif t > 0.0:
            tot_fin += t

    def sum_pos_excluding(j):
        t = m_in_tops[j]
        if is_pos_inf(t):
            return INF if n_pos_inf > 1 else tot_fin
        if n_pos_inf > 0:
            return INF
        return tot_fin - t if t > 0.0 else tot_fin

    v1, i1, v2 = _top_two(m_in_tops)
    out_b = sat_add(m_in_tops[i1], sum_pos_excluding(i1))

    out_tops = []
    for j in range(m):
        on_score = sat_add(m_in_b, sum_pos_excluding(j))
        best_other = v2 if j == i1 else v1
        # lim of max(0, v) - v: 0 for v -> +inf, +inf for v -> -inf.
        if is_pos_inf(best_other):
            off_gap = 0.0
        elif is_neg_inf(best_other):
            off_gap = INF
        else:
            off_gap = max(0.0, best_other) - best_other
        out_tops.append(min(on_score, off_gap))
    return out_tops, out_b


def pool_update(m_in_t, m_in_bottoms):
    """Messages out of a POOL factor: (to t, list to bottoms)."""
    m = len(m_in_bottoms)
    if m < 1:
        raise ValueError("POOL factor needs at least one bottom")
    log_m = math.log(m)
    v1, i1, v2 = _top_two(m_in_bottoms)
    out_t = v1 if is_inf(v1) else v1 - log_m
    t_shifted = m_in_t if is_inf(m_in_t) else m_in_t - log_m

    out_bottoms = []
    for j in range(m):
        best_other = v2 if j == i1 else v1
        if is_pos_inf(best_other):
            neg = -INF
        elif is_neg_inf(best_other):
            neg = INF
        else:
            neg = -best_other
        out_bottoms.append(min(t_shifted, neg))
    return out_t, out_bottoms

"""Exact updates for the two composite tree factors.

A convolution output element R is the OR of one AND per (feature, offset)
pair; that OR with its AND children is a tree, so its outgoing messages have
a closed two-pass form: AND bottom-ups into the OR, one OR update, AND
top-downs back out.  The class layer is a two-level POOL tree (categories,
then templates within the category) whose own top is clamped on; it also
updates in closed form.

These are the reference implementations; the array engine repeats the same
arithmetic over flat layouts and is tested against them.
"""

import numpy as np

from ..mp.factors import FactorKind
from ..mp.messages import INF, INF_THRESHOLD, IndeterminateFormError


def _gap(v):
    """lim max(0, x) - x: 0 at +inf, +inf at -inf, else the finite value."""
    out = np.where(v >= INF_THRESHOLD, 0.0, np.maximum(0.0, v) - v)
    return np.where(v <= -INF_THRESHOLD, INF, out)


def _top_two(values, axis=-1):
    """(max, argmax, second max) along axis; ties resolve to lowest index."""
    v1 = values.max(axis=axis)
    i1 = values.argmax(axis=axis)
    masked = np.array(values, dtype=np.float64, copy=True)
    np.put_along_axis(masked, np.expand_dims(i1, axis), -INF, axis=axis)
    return v1, i1, masked.max(axis=axis)


def andor_tree_update(s_in, w_in, r_in):
    """Messages out of one AND-OR tree.

    s_in, w_in: incoming messages for the sparsification / weight leaf of
    each AND child (same length M >= 1); r_in: incoming for the OR's output
    element.  Returns (msg_to_r, msgs_to_s, msgs_to_w).
    """
    s_in = np.asarray(s_in, dtype=np.float64)
    w_in = np.asarray(w_in, dtype=np.float64)
    if s_in.shape != w_in.shape or s_in.ndim != 1 or s_in.size < 1:
        raise ValueError("need matched non-empty message vectors")
    s_inf = s_in >= INF_THRESHOLD
    w_inf = w_in >= INF_THRESHOLD
    if (s_inf & w_inf).any():
        raise IndeterminateFormError("AND-OR tree child with both leaves clamped on")

    # one +inf leaf turns its AND into a pass-through of the other leaf;
    # the plain arithmetic below already takes that limit for y_up
    y_up = np.minimum(s_in + w_in, np.minimum(s_in, w_in))
    pos = np.maximum(y_up, 0.0)
    tot = pos.sum()
    v1, i1, v2 = _top_two(y_up)
    msg_r = v1 + (tot - pos[i1])

    best_other = np.full(s_in.size, v1)
    best_other[i1] = v2
    y_down = np.minimum(r_in + (tot - pos), _gap(best_other))
    msg_s = np.where(w_inf, y_down,
                     np.maximum(0.0, w_in + y_down) - np.maximum(0.0, w_in))
    msg_w = np.where(s_inf, y_down,
                     np.maximum(0.0, s_in + y_down) - np.maximum(0.0, s_in))
    return float(msg_r), msg_s, msg_w


def class_tree_update(c_in, s_in):
    """Messages out of the class tree.

    c_in: (K,) incoming for the category variables (their clamp evidence);
    s_in: (K, J) incoming for the template variables.  Returns
    (msgs_to_c (K,), msgs_to_s (K, J)).  The tree's own top is clamped to 1,
    so exactly one template is active in every legal configuration.
    """
    c_in = np.asarray(c_in, dtype=np.float64)
    s_in = np.asarray(s_in, dtype=np.float64)
    if s_in.ndim != 2 or c_in.shape != (s_in.shape[0],):
        raise ValueError("c_in must be (K,), s_in must be (K, J)")
    if (s_in <= -INF_THRESHOLD).any() or (s_in >= INF_THRESHOLD).any():
        raise IndeterminateFormError("class tree with infinite template incoming")
    k, j = s_in.shape
    log_j = np.log(j)

    up = s_in.max(axis=1) - log_j  # template pool k -> c_k
    in_k = c_in + up
    v1, i1, v2 = _top_two(in_k)
    best_other = np.full(k, v1)
    best_other[i1] = v2
    # top pool -> c_k; its own top is clamped on, so only the competition
    # between categories survives (-log K cancels against the clamp)
    down = np.where(best_other >= INF_THRESHOLD, -INF,
                    np.where(best_other <= -INF_THRESHOLD, INF, -best_other))
    msg_c = up + down
    local_c = c_in + down

    base = np.where(np.abs(local_c) >= INF_THRESHOLD, local_c, local_c - log_j)
    v1s, i1s, v2s = _top_two(s_in, axis=1)
    best_other_tpl = np.where(
        np.arange(j)[None, :] == i1s[:, None], v2s[:, None], v1s[:, None]
    )
    msg_s = np.minimum(base[:, None], -best_other_tpl)
    return msg_c, msg_s


class AndOrTreeFactor:
    """Composite factor for the generic graph; neighbors are
    (s_1, w_1, ..., s_M, w_M, r)."""

    kind = FactorKind.AND_OR_TREE

    def __init__(self, s_vars, w_vars, r_var):
        if len(s_vars) != len(w_vars):
            raise ValueError("one weight leaf per sparsification leaf")
        self.neighbors = [v for pair in zip(s_vars, w_vars) for v in pair] + [r_var]
        self.m = len(s_vars)

    def update(self, incoming):
        s_in = np.array(incoming[0:2 * self.m:2])
        w_in = np.array(incoming[1:2 * self.m:2])
        msg_r, msg_s, msg_w = andor_tree_update(s_in, w_in, incoming[-1])
        out = []
        for k in range(self.m):
            out.extend((msg_s[k], msg_w[k]))
        out.append(msg_r)
        return out


class ClassTreeFactor:
    """Composite factor for the generic graph; neighbors are
    (c_1..c_K, s_11..s_J1, ..., s_1K..s_JK), templates grouped by class."""

    kind = FactorKind.CLASS_TREE

    def __init__(self, c_vars, s_vars_by_class):
        self.k = len(c_vars)
        self.j = len(s_vars_by_class[0])
        if any(len(row) != self.j for row in s_vars_by_class):
            raise ValueError("every class needs the same number of templates")
        self.neighbors = list(c_vars) + [v for row in s_vars_by_class for v in row]

    def update(self, incoming):
        c_in = np.array(incoming[: self.k])
        s_in = np.array(incoming[self.k:]).reshape(self.k, self.j)
        msg_c, msg_s = class_tree_update(c_in, s_in)
        return list(msg_c) + list(msg_s.ravel())

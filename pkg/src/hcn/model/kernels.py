"""Sequential tree-update kernels.

The convolution-layer factors are visited one at a time in random order, and
every visit must see the beliefs left by the previous one, so these loops are
inherently serial; numba keeps them fast.  The arithmetic mirrors
``trees.andor_tree_update`` exactly (same tie-breaking, same sentinel
conventions) and the tests hold the two implementations together.

Array layout: per layer, each image's messages are one row of a 2-d array.
`order` enumerates (image, tree) pairs as flat codes `image * nt + tree`.
"""

import numba as nb
import numpy as np

from ..mp.messages import INF, INF_THRESHOLD


@nb.njit(cache=True, inline="always")
def _gap(v):
    # lim max(0, x) - x
    if v >= INF_THRESHOLD:
        return 0.0
    if v <= -INF_THRESHOLD:
        return INF
    return (v if v > 0.0 else 0.0) - v


@nb.njit(cache=True)
def forward_trees(order, nt, ptr, s_idx, w_idx, msg_s, msg_w, p2r, s_fin,
                  down2s, w_fin, s_buf, w_buf, y_buf):
    """Refresh each visited tree's messages to its S and W leaves."""
    delta = 0.0
    for oi in range(order.size):
        code = order[oi]
        i = code // nt
        t = code - i * nt
        lo, hi = ptr[t], ptr[t + 1]
        n = hi - lo
        if n == 0:
            continue
        r_in = p2r[i, t]
        tot = 0.0
        v1 = -INF
        i1 = 0
        v2 = -INF
        for k in range(n):
            e = lo + k
            si = s_idx[e]
            s_v = s_fin[i, si] - msg_s[i, e] + down2s[i, si]
            w_v = w_fin[w_idx[e]] - msg_w[i, e]
            s_buf[k] = s_v
            w_buf[k] = w_v
            y = s_v + w_v
            if s_v < y:
                y = s_v
            if w_v < y:
                y = w_v
            y_buf[k] = y
            if y > 0.0:
                tot += y
            if y > v1:
                v2 = v1
                v1 = y
                i1 = k
            elif y > v2:
                v2 = y
        gap1 = _gap(v1)
        gap2 = _gap(v2)
        for k in range(n):
            e = lo + k
            y = y_buf[k]
            pos = y if y > 0.0 else 0.0
            y_down = r_in + (tot - pos)
            d = gap2 if k == i1 else gap1
            if d < y_down:
                y_down = d
            s_v = s_buf[k]
            w_v = w_buf[k]
            if w_v >= INF_THRESHOLD:
                new_s = y_down  # AND is a pass-through around a clamped leaf
            else:
                ws = w_v + y_down
                new_s = (ws if ws > 0.0 else 0.0) - (w_v if w_v > 0.0 else 0.0)
            if s_v >= INF_THRESHOLD:
                new_w = y_down
            else:
                sw = s_v + y_down
                new_w = (sw if sw > 0.0 else 0.0) - (s_v if s_v > 0.0 else 0.0)
            ds = new_s - msg_s[i, e]
            if ds < 0.0:
                ds = -ds
            if ds > delta:
                delta = ds
            dw = new_w - msg_w[i, e]
            if dw < 0.0:
                dw = -dw
            if dw > delta:
                delta = dw
            s_fin[i, s_idx[e]] += new_s - msg_s[i, e]
            msg_s[i, e] = new_s
            w_fin[w_idx[e]] += new_w - msg_w[i, e]
            msg_w[i, e] = new_w
    return delta


@nb.njit(cache=True)
def backward_trees(order, nt, ptr, s_idx, w_idx, msg_s, msg_w, msg_r, s_fin,
                   down2s, w_fin):
    """Refresh each visited tree's message to its R element."""
    delta = 0.0
    for oi in range(order.size):
        code = order[oi]
        i = code // nt
        t = code - i * nt
        lo, hi = ptr[t], ptr[t + 1]
        if hi == lo:
            new = -INF
        else:
            tot = 0.0
            v1 = -INF
            for k in range(lo, hi):
                si = s_idx[k]
                s_v = s_fin[i, si] - msg_s[i, k] + down2s[i, si]
                w_v = w_fin[w_idx[k]] - msg_w[i, k]
                y = s_v + w_v
                if s_v < y:
                    y = s_v
                if w_v < y:
                    y = w_v
                if y > 0.0:
                    tot += y
                if y > v1:
                    v1 = y
            new = v1 + (tot - (v1 if v1 > 0.0 else 0.0))
        old = msg_r[i, t]
        msg_r[i, t] = new
        old_inf = old >= INF_THRESHOLD or old <= -INF_THRESHOLD
        new_inf = new >= INF_THRESHOLD or new <= -INF_THRESHOLD
        if old_inf or new_inf:
            if (old >= INF_THRESHOLD) != (new >= INF_THRESHOLD) or \
               (old <= -INF_THRESHOLD) != (new <= -INF_THRESHOLD):
                delta = INF
        else:
            d = new - old
            if d < 0.0:
                d = -d
            if d > delta:
                delta = d
    return delta


@nb.njit(cache=True)
def forward_ors_frozen(order, nt, ptr, s_idx, msg_s, p2r, s_fin, down2s, t_buf):
    """Frozen-weight layer: each R element's OR sends to its S members."""
    delta = 0.0
    for oi in range(order.size):
        code = order[oi]
        i = code // nt
        t = code - i * nt
        lo, hi = ptr[t], ptr[t + 1]
        n = hi - lo
        if n == 0:
            continue
        r_in = p2r[i, t]
        tot = 0.0
        v1 = -INF
        i1 = 0
        v2 = -INF
        for k in range(n):
            e = lo + k
            si = s_idx[e]
            tv = s_fin[i, si] - msg_s[i, e] + down2s[i, si]
            t_buf[k] = tv
            if tv > 0.0:
                tot += tv
            if tv > v1:
                v2 = v1
                v1 = tv
                i1 = k
            elif tv > v2:
                v2 = tv
        gap1 = _gap(v1)
        gap2 = _gap(v2)
        for k in range(n):
            e = lo + k
            tv = t_buf[k]
            pos = tv if tv > 0.0 else 0.0
            new = r_in + (tot - pos)
            d = gap2 if k == i1 else gap1
            if d < new:
                new = d
            diff = new - msg_s[i, e]
            ad = diff if diff >= 0.0 else -diff
            if ad > delta:
                delta = ad
            s_fin[i, s_idx[e]] += new - msg_s[i, e]
            msg_s[i, e] = new
    return delta


@nb.njit(cache=True)
def backward_ors_frozen(order, nt, ptr, s_idx, msg_s, msg_r, s_fin, down2s):
    """Frozen-weight layer: each OR sends to its R element."""
    delta = 0.0
    for oi in range(order.size):
        code = order[oi]
        i = code // nt
        t = code - i * nt
        lo, hi = ptr[t], ptr[t + 1]
        if hi == lo:
            new = -INF
        else:
            tot = 0.0
            v1 = -INF
            for k in range(lo, hi):
                si = s_idx[k]
                tv = s_fin[i, si] - msg_s[i, k] + down2s[i, si]
                if tv > 0.0:
                    tot += tv
                if tv > v1:
                    v1 = tv
            new = v1 + (tot - (v1 if v1 > 0.0 else 0.0))
        old = msg_r[i, t]
        msg_r[i, t] = new
        old_inf = old >= INF_THRESHOLD or old <= -INF_THRESHOLD
        new_inf = new >= INF_THRESHOLD or new <= -INF_THRESHOLD
        if old_inf or new_inf:
            if (old >= INF_THRESHOLD) != (new >= INF_THRESHOLD) or \
               (old <= -INF_THRESHOLD) != (new <= -INF_THRESHOLD):
                delta = INF
        else:
            d = new - old
            if d < 0.0:
                d = -d
            if d > delta:
                delta = d
    return delta

"""Array-based message-passing engine for the full image model.

One HcnGraph holds the messages of a whole batch: per layer, each directed
message family lives in one dense array with the image index as the leading
axis, so the parallel steps of a pass are whole-array operations and the
sequential tree visits run through the numba kernels.

Message families per layer l (shapes R = (F, H, W) of R^l, S = (F', H', W')
of S^l, n_shifts = pool window size):

* ``msg_s``, ``msg_w``   tree -> sparsification / weight leaves (flat children)
* ``msg_r``              tree -> its R element                  (init -inf)
* ``p2r``                pool -> R element, damped, bottom-up   (init 0)
* ``o2u`` / ``p2u``      or -> U (up, init 0) / pool -> U (down, init -inf)
* ``or2s``               or -> S^{l-1}, top-down                (init -inf)

Per-variable beliefs are sums of a few of these arrays; S^l (many factors)
keeps a running finite sum ``s_fin`` that the kernels maintain incrementally.
The single possibly-infinite contribution into S^l comes from above (pool OR
or class tree) and stays in its own plane, so no per-variable infinity
counters are needed here.
"""

import numpy as np

from ..mp.messages import INF, INF_THRESHOLD, log_odds
from . import kernels
from .arch import Architecture, Hyperparams
from .tensors import as_bits3, as_bits4


def channel_unaries(x, p01, p10, mask=None):
    """Constant bottom-up evidence for S^0 from an observed image.

    m = (k1 - k0) * x + k0 with k1 = log((1-p01)/p10), k0 = log(p01/(1-p10)).
    Masked-out pixels (mask == 0) carry no evidence.
    """
    x = as_bits3(x).astype(np.float64)
    k1 = np.log(1.0 - p01) - np.log(p10)
    k0 = np.log(p01) - np.log(1.0 - p10)
    u = (k1 - k0) * x + k0
    if mask is not None:
        u = np.where(as_bits3(mask) > 0, u, 0.0)
    return u


def pooling_connectivity(r_shape, pool_h, pool_w):
    """Geometry of one pooling stage.

    Returns (shifts, valid, arity): `shifts` lists the (dr, dc) offsets of the
    centered pool window in row-major order; U[s, f, r, c] moves the activation
    at (r, c) to (r + dr, c + dc).  `valid[s, r, c]` marks shifts whose target
    stays inside the plane (border pools shrink), and `arity[r, c]` counts the
    surviving members of the pool at each position.
    """
    if pool_h % 2 == 0 or pool_w % 2 == 0:
        raise ValueError("pool dims must be odd")
    _, h, w = r_shape
    shifts = [(dr, dc)
              for dr in range(-(pool_h // 2), pool_h // 2 + 1)
              for dc in range(-(pool_w // 2), pool_w // 2 + 1)]
    valid = np.zeros((len(shifts), h, w), dtype=bool)
    rr = np.arange(h)[:, None]
    cc = np.arange(w)[None, :]
    for s, (dr, dc) in enumerate(shifts):
        valid[s] = (rr + dr >= 0) & (rr + dr < h) & (cc + dc >= 0) & (cc + dc < w)
    arity = valid.sum(axis=0)
    return shifts, valid, arity


def or_membership(r_shape, pool_h, pool_w):
    """For each target cell of S^{l-1}, the list of (shift, r, c) sources
    whose shifted activation lands there.  Mostly a test/debug view; the
    engine works with the shifted-plane form directly."""
    shifts, valid, _ = pooling_connectivity(r_shape, pool_h, pool_w)
    _, h, w = r_shape
    members = {}
    for s, (dr, dc) in enumerate(shifts):
        for r in range(h):
            for c in range(w):
                if valid[s, r, c]:
                    members.setdefault((r + dr, c + dc), []).append((s, r, c))
    return members


def _tree_connectivity(s_shape, w_shape):
    """Flat child arrays for the AND-OR trees of one learning-mode layer.

    Tree t is the flat (a, r, c) index into R; its children are every
    (f, dr, dc) whose source cell (r - dr, c - dc) lies inside S.  Children
    are stored sorted by (tree, f, dr, dc).
    """
    f_n, hs, ws = s_shape
    a_n, f2, hw, ww = w_shape
    assert f2 == f_n
    h, w = hs + hw - 1, ws + ww - 1
    nt = a_n * h * w

    trees, s_cols, w_cols, f_cols, dr_cols, dc_cols = [], [], [], [], [], []
    src = (np.arange(hs)[:, None] * ws + np.arange(ws)[None, :]).ravel()
    a_idx = np.arange(a_n)[:, None, None]
    f_idx = np.arange(f_n)[None, :, None]
    for dr in range(hw):
        for dc in range(ww):
            tgt = ((np.arange(hs)[:, None] + dr) * w
                   + (np.arange(ws)[None, :] + dc)).ravel()
            tree = (a_idx * (h * w) + tgt[None, None, :])
            s_i = (f_idx * (hs * ws) + src[None, None, :])
            w_i = ((a_idx * f_n + f_idx) * (hw * ww) + dr * ww + dc)
            shape = (a_n, f_n, hs * ws)
            trees.append(np.broadcast_to(tree, shape).ravel())
            s_cols.append(np.broadcast_to(s_i, shape).ravel())
            w_cols.append(np.broadcast_to(w_i, shape).ravel())
            f_cols.append(np.broadcast_to(f_idx, shape).ravel())
            dr_cols.append(np.full(a_n * f_n * hs * ws, dr))
            dc_cols.append(np.full(a_n * f_n * hs * ws, dc))
    tree = np.concatenate(trees)
    order = np.lexsort((
        np.concatenate(dc_cols), np.concatenate(dr_cols),
        np.concatenate(f_cols), tree,
    ))
    s_idx = np.concatenate(s_cols)[order].astype(np.int64)
    w_idx = np.concatenate(w_cols)[order].astype(np.int64)
    counts = np.bincount(tree, minlength=nt)
    ptr = np.zeros(nt + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, s_idx, w_idx


def _frozen_connectivity(s_shape, w_bits):
    """Flat child arrays for a frozen layer: only W == 1 links survive and
    the AND level disappears, leaving one OR over S members per R element."""
    f_n, hs, ws = s_shape
    a_n, f2, hw, ww = w_bits.shape
    assert f2 == f_n
    h, w = hs + hw - 1, ws + ww - 1
    nt = a_n * h * w
    ones = np.argwhere(w_bits > 0)
    if ones.size == 0:
        return np.zeros(nt + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    src = (np.arange(hs)[:, None] * ws + np.arange(ws)[None, :]).ravel()
    sr = np.repeat(np.arange(hs), ws)
    sc = np.tile(np.arange(ws), hs)
    a, f, dr, dc = (ones[:, 0][:, None], ones[:, 1][:, None],
                    ones[:, 2][:, None], ones[:, 3][:, None])
    tree = (a * (h * w) + (sr[None, :] + dr) * w + (sc[None, :] + dc)).ravel()
    s_i = (f * (hs * ws) + src[None, :]).ravel()
    f_b = np.broadcast_to(f, (len(ones), hs * ws)).ravel()
    dr_b = np.broadcast_to(dr, (len(ones), hs * ws)).ravel()
    dc_b = np.broadcast_to(dc, (len(ones), hs * ws)).ravel()
    order = np.lexsort((dc_b, dr_b, f_b, tree))
    s_idx = s_i[order].astype(np.int64)
    counts = np.bincount(tree, minlength=nt)
    ptr = np.zeros(nt + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, s_idx


def _negate_ext(v):
    """Elementwise -v with sentinel polarity preserved."""
    return np.where(v >= INF_THRESHOLD, -INF, np.where(v <= -INF_THRESHOLD, INF, -v))


def _gap_arr(v):
    out = np.where(v >= INF_THRESHOLD, 0.0, np.maximum(0.0, v) - v)
    return np.where(v <= -INF_THRESHOLD, INF, out)


def _top_two_axis1(values):
    v1 = values.max(axis=1)
    i1 = values.argmax(axis=1)
    masked = values.copy()
    np.put_along_axis(masked, i1[:, None], -INF, axis=1)
    v2 = masked.max(axis=1)
    return v1, i1, v2


class _LayerState:
    def __init__(self, resolved, pool_spec, n_img, frozen_w=None):
        self.resolved = resolved
        f_r, h, w = resolved.r_shape
        self.nt = f_r * h * w
        if frozen_w is None:
            self.frozen = False
            self.ptr, self.s_idx, self.w_idx = _tree_connectivity(
                resolved.s_shape, resolved.w_shape)
        else:
            self.frozen = True
            self.ptr, self.s_idx = _frozen_connectivity(resolved.s_shape, frozen_w)
            self.w_idx = None
        self.nc = int(self.s_idx.size)
        self.max_children = int((self.ptr[1:] - self.ptr[:-1]).max()) if self.nt else 0

        self.shifts, self.valid, self.arity = pooling_connectivity(
            resolved.r_shape, pool_spec.pool_h, pool_spec.pool_w)
        self.n_shifts = len(self.shifts)
        self.log_m = np.log(self.arity.astype(np.float64))
        self.eps = np.zeros(self.n_shifts)

        ns = int(np.prod(resolved.s_shape))
        self.s_fin = np.zeros((n_img, ns))
        self.msg_s = np.zeros((n_img, self.nc))
        self.msg_w = None if self.frozen else np.zeros((n_img, self.nc))
        self.msg_r = np.full((n_img, self.nt), -INF)
        self.p2r = np.zeros((n_img, f_r, h, w))
        self.o2u = np.zeros((n_img, self.n_shifts, f_r, h, w))
        self.p2u = np.full((n_img, self.n_shifts, f_r, h, w), -INF)
        self.or2s = np.full((n_img, f_r, h, w), -INF)
        self.w_prior = None
        self.w_fin = None

    def draw_eps(self, rng, amplitude, pool_h, pool_w):
        """Pool tie-break noise, largest value forced to the window center."""
        if amplitude <= 0 or self.n_shifts == 1:
            return
        eps = rng.uniform(0.0, amplitude, self.n_shifts)
        center = (pool_h // 2) * pool_w + (pool_w // 2)
        top = int(np.argmax(eps))
        eps[center], eps[top] = eps[top], eps[center]
        self.eps = eps

    @property
    def n_valid_u(self):
        return int(self.valid.sum()) * self.resolved.r_shape[0]


class HcnGraph:
    """Messages and schedule for one batch of images against one model."""

    def __init__(self, arch, hyper, images, labels=None, masks=None,
                 frozen_weights=None, rng=None, w_prior_beliefs=None,
                 pool_perturb=None):
        if not isinstance(arch, Architecture):
            raise TypeError("arch must be an Architecture")
        if not isinstance(hyper, Hyperparams):
            raise TypeError("hyper must be a Hyperparams")
        self.arch = arch
        self.hyper = hyper
        self.rng = rng if rng is not None else np.random.default_rng(hyper.seed)
        self.resolved = arch.resolve()
        self.n_layers = arch.n_layers
        self.frozen = frozen_weights is not None

        imgs = [as_bits3(x) for x in images] if images is not None else []
        self.n_img = len(imgs)
        if self.n_img:
            x = np.stack(imgs)
            if x.shape[1:] != arch.image_shape:
                raise ValueError(
                    f"images are {x.shape[1:]}, architecture wants {arch.image_shape}")
        else:
            x = np.zeros((0,) + arch.image_shape, dtype=np.uint8)
        self.images = x

        if masks is not None and len(masks) != self.n_img:
            raise ValueError("one mask per image")
        self.unary0 = np.stack([
            channel_unaries(x[i], hyper.p01, hyper.p10,
                            None if masks is None else masks[i])
            for i in range(self.n_img)
        ]) if self.n_img else np.zeros((0,) + arch.image_shape)

        if frozen_weights is not None:
            frozen_bu = [as_bits4(w) for w in reversed(list(frozen_weights))]
            if len(frozen_bu) != self.n_layers:
                raise ValueError("one weight tensor per layer")
        else:
            frozen_bu = [None] * self.n_layers

        self.layers = []
        spec_bu = list(reversed(arch.layers))
        p_w_bu = hyper.p_w_for(arch)
        for li, res in enumerate(self.resolved):
            st = _LayerState(res, spec_bu[li], self.n_img, frozen_bu[li])
            if frozen_bu[li] is not None and frozen_bu[li].shape != res.w_shape:
                raise ValueError(
                    f"layer {li + 1} weights are {frozen_bu[li].shape}, want {res.w_shape}")
            self.layers.append(st)

        # weight priors (drawn bottom-up, before the pool perturbations)
        if not self.frozen:
            for li, st in enumerate(self.layers):
                nw = int(np.prod(st.resolved.w_shape))
                if w_prior_beliefs is not None:
                    prior = np.asarray(w_prior_beliefs[li], dtype=np.float64).ravel().copy()
                    if prior.size != nw:
                        raise ValueError("weight prior beliefs have the wrong size")
                else:
                    q = self.rng.uniform(0.9 * p_w_bu[li], p_w_bu[li], nw)
                    prior = np.log(q) - np.log1p(-q)
                st.w_prior = prior
                st.w_fin = prior.copy()

        amp = hyper.pool_perturb if pool_perturb is None else pool_perturb
        for st, spec in zip(self.layers, spec_bu):
            st.draw_eps(self.rng, amp, spec.pool_h, spec.pool_w)

        # class layer or classless top prior
        self.k = arch.num_classes
        self.j = arch.templates_per_class
        if self.k > 0:
            self.ct2c = np.zeros((self.n_img, self.k))
            self.ct2s = np.full((self.n_img, self.k * self.j), -INF)
            self.c_clamp = np.zeros((self.n_img, self.k))
            if labels is not None:
                for i, lab in enumerate(labels):
                    if lab is not None:
                        self.clamp_label(i, int(lab))
        else:
            if labels is not None and any(l is not None for l in labels):
                raise ValueError("labels need a class layer (num_classes > 0)")
            self.ct2c = self.ct2s = self.c_clamp = None
            self.layers[-1].s_fin += log_odds(hyper.p_s)
        self._zero_top = np.zeros((self.n_img, int(np.prod(self.resolved[-1].s_shape))))

        m = max((st.max_children for st in self.layers), default=1)
        self._bufs = (np.empty(m), np.empty(m), np.empty(m))

    # -- structure accounting ------------------------------------------------

    @property
    def n_variables(self):
        per_image = int(np.prod(self.arch.image_shape))  # S^0
        for st in self.layers:
            per_image += int(np.prod(st.resolved.s_shape))  # S^l
            per_image += st.nt                              # R^l
            per_image += st.n_valid_u                       # U^l
        if self.k > 0:
            per_image += self.k
        n_w = 0 if self.frozen else sum(
            int(np.prod(st.resolved.w_shape)) for st in self.layers)
        return n_w + self.n_img * per_image

    @property
    def n_factors(self):
        per_image = 0
        for st in self.layers:
            per_image += st.nt                               # trees (or frozen ORs)
            per_image += st.nt                               # pools, one per R element
            per_image += int(np.prod(st.resolved.r_shape))   # ORs onto S^{l-1}
        if self.k > 0:
            per_image += 1                                   # class tree
        return self.n_img * per_image

    # -- labels ----------------------------------------------------------------

    def clamp_label(self, image, label):
        if not 0 <= label < self.k:
            raise ValueError(f"label {label} out of range for {self.k} classes")
        self.c_clamp[image, :] = 0.0
        self.c_clamp[image, label] = INF

    # -- plumbing ----------------------------------------------------------------

    def _below_plane(self, li):
        """Incoming at the bottom (S^{l-1}) of pool stage li, excluding its
        own OR messages."""
        if li == 0:
            return self.unary0
        prev = self.layers[li - 1]
        return prev.s_fin.reshape((self.n_img,) + prev.resolved.s_shape)

    def _down2s(self, li):
        """The one possibly-infinite message plane into S^l, flat."""
        if li == self.n_layers - 1:
            return self.ct2s if self.k > 0 else self._zero_top
        above = self.layers[li + 1]
        return above.or2s.reshape(self.n_img, -1)

    def _to_target(self, st, planes, fill):
        out = np.full(planes.shape, fill)
        h, w = planes.shape[-2:]
        for s, (dr, dc) in enumerate(st.shifts):
            r0, r1 = max(dr, 0), h + min(dr, 0)
            c0, c1 = max(dc, 0), w + min(dc, 0)
            out[:, s, :, r0:r1, c0:c1] = planes[:, s, :, r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        return out

    def _write_from_target(self, st, values, dst):
        h, w = values.shape[-2:]
        delta = 0.0
        for s, (dr, dc) in enumerate(st.shifts):
            r0, r1 = max(dr, 0), h + min(dr, 0)
            c0, c1 = max(dc, 0), w + min(dc, 0)
            new = values[:, s, :, r0:r1, c0:c1]
            old = dst[:, s, :, r0 - dr:r1 - dr, c0 - dc:c1 - dc]
            if new.size:
                delta = max(delta, _msg_delta(old, new))
            dst[:, s, :, r0 - dr:r1 - dr, c0 - dc:c1 - dc] = new
        return delta

    # -- the six step families ----------------------------------------------------

    def step_or_up(self, li):
        """OR -> U, in parallel (step 1)."""
        st = self.layers[li]
        t_in = self._to_target(st, st.p2u, -INF)
        pos = np.maximum(t_in, 0.0)
        tot = pos.sum(axis=1)
        v1, i1, v2 = _top_two_axis1(t_in)
        s_axis = np.arange(st.n_shifts).reshape(1, -1, 1, 1, 1)
        besto = np.where(s_axis == i1[:, None], v2[:, None], v1[:, None])
        b_in = self._below_plane(li)
        fresh = np.minimum(b_in[:, None] + (tot[:, None] - pos), _gap_arr(besto))
        return self._write_from_target(st, fresh, st.o2u)

    def step_pool_up(self, li, alpha=None):
        """POOL -> R, in parallel, damped (step 2)."""
        st = self.layers[li]
        alpha = self.hyper.alpha if alpha is None else alpha
        vals = np.where(st.valid[None, :, None], st.o2u, -INF)
        fresh = vals.max(axis=1) - st.log_m
        old = st.p2r
        if alpha >= 1.0:
            new = fresh
        else:
            new = np.where(np.abs(old) >= INF_THRESHOLD, fresh,
                           (1.0 - alpha) * old + alpha * fresh)
        delta = _msg_delta(old, new)
        st.p2r = new
        return delta

    def step_trees_up(self, li, order=None):
        """Tree -> (W, S), sequentially in random order (step 3)."""
        st = self.layers[li]
        if order is None:
            order = self.rng.permutation(self.n_img * st.nt)
        order = np.asarray(order, dtype=np.int64)
        if order.size == 0 or st.nc == 0:
            return 0.0
        down = np.ascontiguousarray(self._down2s(li))
        p2r_flat = st.p2r.reshape(self.n_img, -1)
        if st.frozen:
            return kernels.forward_ors_frozen(
                order, st.nt, st.ptr, st.s_idx, st.msg_s,
                p2r_flat, st.s_fin, down, self._bufs[2])
        return kernels.forward_trees(
            order, st.nt, st.ptr, st.s_idx, st.w_idx, st.msg_s, st.msg_w,
            p2r_flat, st.s_fin, down, st.w_fin, *self._bufs)

    def step_class(self):
        """Class-tree update (after the top layer's forward step)."""
        if self.k == 0:
            return 0.0
        s_in = self.layers[-1].s_fin.reshape(self.n_img, self.k, self.j)
        log_j = np.log(self.j)
        up = s_in.max(axis=2) - log_j
        in_k = self.c_clamp + up
        v1, i1, v2 = _top_two_axis1(in_k)
        k_axis = np.arange(self.k)[None, :]
        besto = np.where(k_axis == i1[:, None], v2[:, None], v1[:, None])
        down = _negate_ext(besto)
        new_c = up + down
        local = self.c_clamp + down
        base = np.where(np.abs(local) >= INF_THRESHOLD, local, local - log_j)
        v1s = s_in.max(axis=2)
        i1s = s_in.argmax(axis=2)
        masked = s_in.copy()
        np.put_along_axis(masked, i1s[:, :, None], -INF, axis=2)
        v2s = masked.max(axis=2)
        j_axis = np.arange(self.j)[None, None, :]
        besto_t = np.where(j_axis == i1s[:, :, None], v2s[:, :, None], v1s[:, :, None])
        new_s = np.minimum(base[:, :, None], _negate_ext(besto_t))
        delta = max(_msg_delta(self.ct2c, new_c),
                    _msg_delta(self.ct2s, new_s.reshape(self.n_img, -1)))
        self.ct2c = new_c
        self.ct2s = new_s.reshape(self.n_img, -1)
        return delta

    def step_trees_down(self, li, order=None):
        """Tree -> R, sequentially in random order (step 4)."""
        st = self.layers[li]
        if order is None:
            order = self.rng.permutation(self.n_img * st.nt)
        order = np.asarray(order, dtype=np.int64)
        if order.size == 0:
            return 0.0
        down = np.ascontiguousarray(self._down2s(li))
        if st.frozen:
            return kernels.backward_ors_frozen(
                order, st.nt, st.ptr, st.s_idx, st.msg_s, st.msg_r, st.s_fin, down)
        return kernels.backward_trees(
            order, st.nt, st.ptr, st.s_idx, st.w_idx, st.msg_s, st.msg_w,
            st.msg_r, st.s_fin, down, st.w_fin)

    def step_pool_down(self, li):
        """POOL -> U, in parallel, with the centered tie-break noise (step 5)."""
        st = self.layers[li]
        f_r, h, w = st.resolved.r_shape
        t_in = st.msg_r.reshape(self.n_img, f_r, h, w)
        eps_b = st.eps.reshape(1, -1, 1, 1, 1)
        vals = np.where(st.valid[None, :, None], st.o2u + eps_b, -INF)
        v1, i1, v2 = _top_two_axis1(vals)
        s_axis = np.arange(st.n_shifts).reshape(1, -1, 1, 1, 1)
        besto = np.where(s_axis == i1[:, None], v2[:, None], v1[:, None])
        base = np.where(np.abs(t_in) >= INF_THRESHOLD, t_in, t_in - st.log_m)
        fresh = np.minimum(base[:, None] + eps_b, eps_b + _negate_ext(besto))
        valid = st.valid[None, :, None]
        old = st.p2u
        delta = _msg_delta(np.where(valid, old, 0.0), np.where(valid, fresh, 0.0))
        st.p2u = np.where(valid, fresh, old)
        return delta

    def step_or_down(self, li):
        """OR -> S^{l-1}, in parallel (step 6)."""
        st = self.layers[li]
        t_in = self._to_target(st, st.p2u, -INF)
        pos = np.maximum(t_in, 0.0)
        tot = pos.sum(axis=1)
        v1, i1, _ = _top_two_axis1(t_in)
        pos_at = np.take_along_axis(pos, i1[:, None], axis=1)[:, 0]
        new = v1 + (tot - pos_at)
        delta = _msg_delta(st.or2s, new)
        st.or2s = new
        return delta

    # -- passes -------------------------------------------------------------------

    def forward_pass(self):
        delta = 0.0
        for li in range(self.n_layers):
            delta = max(delta, self.step_or_up(li))
            delta = max(delta, self.step_pool_up(li))
            delta = max(delta, self.step_trees_up(li))
        delta = max(delta, self.step_class())
        return delta

    def backward_pass(self, pool_iters=1):
        """Steps 4-6 top-down; pool_iters > 1 re-runs the pool stage's
        explaining-away loop (used by inpainting)."""
        delta = 0.0
        for li in reversed(range(self.n_layers)):
            delta = max(delta, self.step_trees_down(li))
            for it in range(pool_iters):
                delta = max(delta, self.step_pool_down(li))
                if it < pool_iters - 1:
                    delta = max(delta, self.step_or_up(li))
                    delta = max(delta, self.step_pool_up(li))
            delta = max(delta, self.step_or_down(li))
        return delta

    def epoch(self):
        return max(self.forward_pass(), self.backward_pass())

    def run(self, epochs, tol=1e-6):
        """(epochs_run, final_delta, converged)."""
        delta = INF
        for e in range(epochs):
            delta = self.epoch()
            if delta < tol:
                return e + 1, delta, True
        return epochs, delta, delta < tol

    # -- beliefs ----------------------------------------------------------------

    def s_beliefs(self, level):
        """Beliefs of S^level, level in 0..L, as (n_img, F, H, W)."""
        if level == 0:
            return self.unary0 + self.layers[0].or2s
        st = self.layers[level - 1]
        down = self._down2s(level - 1)
        big = np.abs(down) >= INF_THRESHOLD
        out = np.where(big, down, st.s_fin + down)
        return out.reshape((self.n_img,) + st.resolved.s_shape)

    def r_beliefs(self, layer):
        """Beliefs of R^layer, layer in 1..L."""
        st = self.layers[layer - 1]
        msg_r = st.msg_r.reshape((self.n_img,) + st.resolved.r_shape)
        big = np.abs(msg_r) >= INF_THRESHOLD
        return np.where(big, msg_r, st.p2r + msg_r)

    def w_beliefs(self, layer):
        st = self.layers[layer - 1]
        if st.frozen:
            raise ValueError("frozen layers have no weight beliefs")
        return st.w_fin.reshape(st.resolved.w_shape)

    def u_beliefs(self, layer):
        st = self.layers[layer - 1]
        tot = st.o2u + st.p2u
        big = np.abs(st.p2u) >= INF_THRESHOLD
        tot = np.where(big, st.p2u, tot)
        return np.where(st.valid[None, :, None], tot, -INF)

    def class_beliefs(self):
        if self.k == 0:
            raise ValueError("no class layer")
        return self.c_clamp + self.ct2c

    def template_beliefs(self):
        """(n_img, K, J) template beliefs after a class update."""
        if self.k == 0:
            raise ValueError("no class layer")
        s_fin = self.layers[-1].s_fin
        big = np.abs(self.ct2s) >= INF_THRESHOLD
        tot = np.where(big, self.ct2s, s_fin + self.ct2s)
        return tot.reshape(self.n_img, self.k, self.j)

    def template_evidence(self):
        """(n_img, K, J) bottom-up evidence into the templates."""
        if self.k == 0:
            raise ValueError("no class layer")
        return self.layers[-1].s_fin.reshape(self.n_img, self.k, self.j).copy()

    def all_messages_finite(self):
        for st in self.layers:
            arrays = [st.msg_s, st.msg_r, st.p2r, st.or2s,
                      st.o2u[:, st.valid], st.p2u[:, st.valid]]
            if st.msg_w is not None:
                arrays.append(st.msg_w)
            for a in arrays:
                if np.any(np.abs(a) >= INF_THRESHOLD):
                    return False
        if self.k > 0 and (np.any(np.abs(self.ct2c) >= INF_THRESHOLD)
                           or np.any(np.abs(self.ct2s) >= INF_THRESHOLD)):
            return False
        return True


def _msg_delta(old, new):
    """Sup-norm of a message change; any infinity-class flip counts as inf."""
    old_cls = np.sign(old) * (np.abs(old) >= INF_THRESHOLD)
    new_cls = np.sign(new) * (np.abs(new) >= INF_THRESHOLD)
    if np.any(old_cls != new_cls):
        return INF
    fin = old_cls == 0
    if not np.any(fin):
        return 0.0
    return float(np.abs(np.where(fin, new - old, 0.0)).max())


def build_hcn_graph(arch, hyper, images, labels=None, masks=None,
                    frozen_weights=None, rng=None, w_prior_beliefs=None,
                    pool_perturb=None):
    """Assemble the message state for a batch; see HcnGraph."""
    return HcnGraph(arch, hyper, images, labels=labels, masks=masks,
                    frozen_weights=frozen_weights, rng=rng,
                    w_prior_beliefs=w_prior_beliefs, pool_perturb=pool_perturb)

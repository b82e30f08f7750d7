"""The array engine must reproduce the object-graph reference exactly."""

import numpy as np
import pytest

from hcn.mp import FactorGraph, INF
from hcn.mp.messages import INF_THRESHOLD, log_odds
from hcn.model import Architecture, Hyperparams, LayerSpec, build_hcn_graph
from hcn.model.graph import or_membership, pooling_connectivity
from hcn.model.trees import AndOrTreeFactor, ClassTreeFactor


def test_pooling_connectivity_identity():
    shifts, valid, arity = pooling_connectivity((2, 4, 4), 1, 1)
    assert shifts == [(0, 0)]
    assert valid.all()
    assert (arity == 1).all()
    members = or_membership((2, 4, 4), 1, 1)
    assert all(len(v) == 1 for v in members.values())


def test_pooling_connectivity_borders():
    _, _, arity = pooling_connectivity((1, 5, 5), 3, 3)
    assert arity[2, 2] == 9
    assert arity[0, 0] == 4
    assert arity[0, 2] == 6
    members = or_membership((1, 5, 5), 3, 3)
    assert len(members[(2, 2)]) == 9
    assert len(members[(0, 0)]) == 4


def test_or_membership_merges_adjacent_sources():
    # two adjacent activations can shift into the same cell: the OR over that
    # cell has one member per in-window source
    members = or_membership((1, 3, 3), 3, 3)
    assert len(members[(1, 1)]) == 9


def test_variable_census_hand_count():
    arch = Architecture(image_shape=(1, 3, 3),
                        layers=[LayerSpec(2, 2, 2, 1, 1)])
    hyper = Hyperparams(p_s=0.2, p_w=0.3, epochs=1)
    g = build_hcn_graph(arch, hyper, [np.zeros((1, 3, 3), np.uint8)] * 2)
    # per image: S^0 (9) + S^1 (2*2*2=8) + R^1 (9) + U (9); shared W (1*2*2*2=8)
    assert g.n_variables == 8 + 2 * (9 + 8 + 9 + 9)
    assert g.n_factors == 2 * (9 + 9 + 9)


def test_zero_images_only_weights():
    arch = Architecture(image_shape=(1, 3, 3), layers=[LayerSpec(2, 2, 2, 1, 1)])
    g = build_hcn_graph(arch, Hyperparams(), [])
    assert g.n_variables == 8
    assert g.n_factors == 0


def _mirror_generic(eng):
    """Rebuild an HcnGraph as a plain FactorGraph with identical priors,
    initial messages and structure.  Returns the graph plus id tables."""
    g = FactorGraph()
    n_img, arch = eng.n_img, eng.arch
    tables = {"s0": [], "s": [], "r": [], "u": [], "c": [],
              "w": [], "trees": [], "pools": [], "ors": [], "ct": []}

    for li, st in enumerate(eng.layers):
        w_ids = [g.add_variable(prior=p) for p in st.w_prior]
        tables["w"].append(w_ids)

    for i in range(n_img):
        s0 = [g.add_variable(prior=p) for p in eng.unary0[i].ravel()]
        tables["s0"].append(s0)
        s_per_layer, r_per_layer, u_per_layer = [], [], []
        trees_i, pools_i, ors_i = [], [], []
        below = s0
        for li, st in enumerate(eng.layers):
            res = st.resolved
            top_prior = 0.0
            if li == eng.n_layers - 1 and eng.k == 0:
                top_prior = log_odds(eng.hyper.p_s)
            s_ids = [g.add_variable(prior=top_prior)
                     for _ in range(int(np.prod(res.s_shape)))]
            f_r, h, w = res.r_shape
            r_ids = [g.add_variable() for _ in range(st.nt)]
            u_ids = np.full((st.n_shifts, f_r, h, w), -1, dtype=int)
            for s in range(st.n_shifts):
                for f in range(f_r):
                    for r in range(h):
                        for c in range(w):
                            if st.valid[s, r, c]:
                                u_ids[s, f, r, c] = g.add_variable()

            tree_ids = []
            for t in range(st.nt):
                lo, hi = st.ptr[t], st.ptr[t + 1]
                s_vars = [s_ids[k] for k in st.s_idx[lo:hi]]
                w_vars = [tables["w"][li][k] for k in st.w_idx[lo:hi]]
                tree = AndOrTreeFactor(s_vars, w_vars, r_ids[t])
                fid = g.add_factor(tree.kind, tree.neighbors, tree.update)
                g.set_message(fid, len(tree.neighbors) - 1, -INF)
                tree_ids.append(fid)

            pool_ids = []
            for f in range(f_r):
                for r in range(h):
                    for c in range(w):
                        t = (f * h + r) * w + c
                        bottoms = [int(u_ids[s, f, r, c])
                                   for s in range(st.n_shifts) if st.valid[s, r, c]]
                        fid = g.add_pool(r_ids[t], bottoms)
                        for slot in range(1, len(bottoms) + 1):
                            g.set_message(fid, slot, -INF)
                        pool_ids.append(fid)

            or_ids = []
            for f in range(f_r):
                for rt in range(h):
                    for ct_ in range(w):
                        tops = []
                        for s, (dr, dc) in enumerate(st.shifts):
                            sr, sc = rt - dr, ct_ - dc
                            if 0 <= sr < h and 0 <= sc < w:
                                tops.append(int(u_ids[s, f, sr, sc]))
                        bottom = below[(f * h + rt) * w + ct_]
                        fid = g.add_or(tops, bottom)
                        g.set_message(fid, len(tops), -INF)
                        or_ids.append(fid)

            s_per_layer.append(s_ids)
            r_per_layer.append(r_ids)
            u_per_layer.append(u_ids)
            trees_i.append(tree_ids)
            pools_i.append(pool_ids)
            ors_i.append(or_ids)
            below = s_ids

        if eng.k > 0:
            c_ids = [g.add_variable() for _ in range(eng.k)]
            for k in range(eng.k):
                if eng.c_clamp[i, k] >= INF_THRESHOLD:
                    g.clamp(c_ids[k], 1)
            s_by_class = [[s_per_layer[-1][k * eng.j + j] for j in range(eng.j)]
                          for k in range(eng.k)]
            ct = ClassTreeFactor(c_ids, s_by_class)
            fid = g.add_factor(ct.kind, ct.neighbors, ct.update)
            for slot in range(eng.k, eng.k + eng.k * eng.j):
                g.set_message(fid, slot, -INF)
            tables["c"].append(c_ids)
            tables["ct"].append(fid)

        tables["s"].append(s_per_layer)
        tables["r"].append(r_per_layer)
        tables["u"].append(u_per_layer)
        tables["trees"].append(trees_i)
        tables["pools"].append(pools_i)
        tables["ors"].append(ors_i)
    return g, tables


def _generic_epoch(g, tables, eng, orders_fwd, orders_bwd):
    alpha = eng.hyper.alpha
    n_img = eng.n_img
    for li, st in enumerate(eng.layers):
        m_tops = {}
        for i in range(n_img):
            for fid in tables["ors"][i][li]:
                n_tops = len(g.factors[fid].neighbors) - 1
                g.update_factor(fid, slots=range(n_tops))
            for fid in tables["pools"][i][li]:
                g.update_factor(fid, alpha=alpha, slots=[0])
        for code in orders_fwd[li]:
            i, t = code // st.nt, code % st.nt
            fid = tables["trees"][i][li][t]
            n = len(g.factors[fid].neighbors)
            g.update_factor(fid, slots=range(n - 1))
    if eng.k > 0:
        for i in range(n_img):
            g.update_factor(tables["ct"][i])
    for li in reversed(range(eng.n_layers)):
        st = eng.layers[li]
        for code in orders_bwd[li]:
            i, t = code // st.nt, code % st.nt
            fid = tables["trees"][i][li][t]
            g.update_factor(fid, slots=[len(g.factors[fid].neighbors) - 1])
        for i in range(n_img):
            for fid in tables["pools"][i][li]:
                n_b = len(g.factors[fid].neighbors) - 1
                g.update_factor(fid, slots=range(1, n_b + 1))
            for fid in tables["ors"][i][li]:
                g.update_factor(fid, slots=[len(g.factors[fid].neighbors) - 1])


def _engine_epoch(eng, orders_fwd, orders_bwd):
    for li in range(eng.n_layers):
        eng.step_or_up(li)
        eng.step_pool_up(li)
        eng.step_trees_up(li, orders_fwd[li])
    eng.step_class()
    for li in reversed(range(eng.n_layers)):
        eng.step_trees_down(li, orders_bwd[li])
        eng.step_pool_down(li)
        eng.step_or_down(li)


def _compare_ext(a, b, atol=1e-8):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    cls_a = np.sign(a) * (np.abs(a) >= INF_THRESHOLD)
    cls_b = np.sign(b) * (np.abs(b) >= INF_THRESHOLD)
    np.testing.assert_array_equal(cls_a, cls_b)
    fin = cls_a == 0
    np.testing.assert_allclose(a[fin], b[fin], atol=atol)


def _check_parity(arch, hyper, images, labels=None, epochs=3, seed=17):
    rng = np.random.default_rng(seed)
    eng = build_hcn_graph(arch, hyper, images, labels=labels, pool_perturb=0.0)
    g, tables = _mirror_generic(eng)
    for _ in range(epochs):
        orders_fwd = [rng.permutation(eng.n_img * st.nt) for st in eng.layers]
        orders_bwd = [rng.permutation(eng.n_img * st.nt) for st in eng.layers]
        _engine_epoch(eng, orders_fwd, orders_bwd)
        _generic_epoch(g, tables, eng, orders_fwd, orders_bwd)

        for i in range(eng.n_img):
            _compare_ext(eng.s_beliefs(0)[i].ravel(),
                         [g.belief(v) for v in tables["s0"][i]])
            for li in range(eng.n_layers):
                _compare_ext(eng.s_beliefs(li + 1)[i].ravel(),
                             [g.belief(v) for v in tables["s"][i][li]])
                _compare_ext(eng.r_beliefs(li + 1)[i].ravel(),
                             [g.belief(v) for v in tables["r"][i][li]])
                st = eng.layers[li]
                ub = eng.u_beliefs(li + 1)[i]
                ids = tables["u"][i][li]
                _compare_ext(ub[:, :, :, :][ids >= 0],
                             [g.belief(v) for v in ids[ids >= 0]])
            if eng.k > 0:
                _compare_ext(eng.class_beliefs()[i],
                             [g.belief(v) for v in tables["c"][i]])
        for li in range(eng.n_layers):
            if not eng.layers[li].frozen:
                _compare_ext(eng.w_beliefs(li + 1).ravel(),
                             [g.belief(v) for v in tables["w"][li]])


def test_parity_single_layer_trivial_pool():
    rng = np.random.default_rng(0)
    arch = Architecture(image_shape=(1, 4, 4), layers=[LayerSpec(2, 2, 2, 1, 1)])
    hyper = Hyperparams(p_s=0.15, p_w=0.25, alpha=0.7, seed=3)
    images = [rng.integers(0, 2, (1, 4, 4)).astype(np.uint8) for _ in range(2)]
    _check_parity(arch, hyper, images)


def test_parity_single_layer_3x3_pool():
    rng = np.random.default_rng(1)
    arch = Architecture(image_shape=(1, 5, 5), layers=[LayerSpec(2, 3, 3, 3, 3)])
    hyper = Hyperparams(p_s=0.1, p_w=0.3, alpha=0.8, seed=4)
    images = [rng.integers(0, 2, (1, 5, 5)).astype(np.uint8) for _ in range(2)]
    _check_parity(arch, hyper, images)


def test_parity_two_layer_with_classes():
    rng = np.random.default_rng(2)
    arch = Architecture(
        image_shape=(1, 6, 6),
        layers=[LayerSpec(2, 3, 3, 1, 1), LayerSpec(2, 4, 4, 3, 3)],
        num_classes=2, templates_per_class=1,
    )
    hyper = Hyperparams(p_w=(0.4, 0.2), alpha=0.9, seed=5)
    images = [rng.integers(0, 2, (1, 6, 6)).astype(np.uint8) for _ in range(2)]
    _check_parity(arch, hyper, images, labels=[0, None])

"""Shared helpers for the test suite."""

import itertools

import numpy as np

from hcn.mp import FactorGraph
from hcn.mp.messages import INF


def random_tree_graph(rng, max_vars=15):
    """Random tree-structured factor graph of mixed AND/OR/POOL factors.

    Each new factor attaches to exactly one existing variable (in a random
    role) and fresh variables fill its remaining slots, so the graph stays a
    tree.  Priors are continuous uniform, which keeps ties measure-zero.
    """
    g = FactorGraph(seed=int(rng.integers(2**31)))

    def new_var():
        return g.add_variable(prior=float(rng.uniform(-2.0, 2.0)))

    new_var()
    n_target = int(rng.integers(5, max_vars + 1))
    while len(g.priors) < n_target:
        kind = rng.choice(["and", "or", "pool"])
        attach = int(rng.integers(len(g.priors)))
        if kind == "and":
            if len(g.priors) + 2 > max_vars:
                break
            others = [new_var(), new_var()]
            slots = [attach] + others
            rng.shuffle(slots)
            g.add_and(slots[0], slots[1], slots[2])
        else:
            m = int(rng.integers(1, 4))
            if len(g.priors) + m > max_vars:
                break
            role = int(rng.integers(m + 1))
            slots = [new_var() for _ in range(m)]
            slots.insert(role, attach)
            if kind == "or":
                g.add_or(slots[:-1], slots[-1])
            else:
                g.add_pool(slots[0], slots[1:])
    return g


def exhaustive_max_marginals(g):
    """Brute-force max-marginal differences plus the MAP score."""
    n = len(g.priors)
    best = np.full((n, 2), -INF)
    map_score = -INF
    for assignment in itertools.product((0, 1), repeat=n):
        s = g.score_assignment(assignment)
        if s <= -INF:
            continue
        map_score = max(map_score, s)
        for v, val in enumerate(assignment):
            if s > best[v, val]:
                best[v, val] = s
    return best[:, 1] - best[:, 0], map_score


def factor_depths(g):
    """Distance of every factor from variable 0 in the bipartite tree."""
    var_depth = {0: 0}
    depth = {}
    frontier = [0]
    seen_f = set()
    while frontier:
        nxt = []
        for v in frontier:
            for fid, _slot in g._var_factors[v]:
                if fid in seen_f:
                    continue
                seen_f.add(fid)
                depth[fid] = var_depth[v]
                for u in g.factors[fid].neighbors:
                    if u not in var_depth:
                        var_depth[u] = var_depth[v] + 1
                        nxt.append(u)
        frontier = nxt
    return depth


def leaf_root_leaf_schedule(g):
    """Factor visit order that makes one pass exact on a tree."""
    depth = factor_depths(g)
    up = sorted(depth, key=lambda f: -depth[f])
    down = sorted(depth, key=lambda f: depth[f])
    return [(f, 1.0) for f in up + down]

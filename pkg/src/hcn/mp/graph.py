"""Generic factor graph with sequential max-product message passing.

This is the reference engine: factors are objects, messages live per directed
factor->variable edge, and per-variable beliefs are kept incrementally so a
factor visit costs O(arity).  The specialized image-model engine reimplements
the same updates over dense arrays; both must agree, and tests hold them to it.
"""

import numpy as np

from .factors import FactorKind, and_update, or_update, pool_update
from .messages import INF, IndeterminateFormError, damped_assign, is_inf, is_neg_inf, is_pos_inf


class Beliefs:
    """Snapshot of per-variable max-marginal differences."""

    def __init__(self, values, clamps):
        self.values = values
        self.clamps = clamps

    def __getitem__(self, v):
        return self.values[v]

    def __len__(self):
        return len(self.values)

    def decode(self):
        """MAP guess per variable: 1 where the belief is positive, else 0."""
        return [1 if b > 0.0 else 0 for b in self.values]


class _Factor:
    __slots__ = ("kind", "neighbors", "update_fn", "out")

    def __init__(self, kind, neighbors, update_fn):
        self.kind = kind
        self.neighbors = list(neighbors)
        self.update_fn = update_fn
        self.out = [0.0] * len(neighbors)


class FactorGraph:
    def __init__(self, seed=0):
        self.priors = []
        self.clamps = []
        self.factors = []
        self._var_factors = []
        # aggregate of factor messages per variable, split into a finite part
        # and counts of +inf / -inf sentinel contributions so that removing a
        # single message is exact even in the presence of hard evidence
        self._fin = []
        self._pos = []
        self._neg = []
        self.rng = np.random.default_rng(seed)

    # -- construction -----------------------------------------------------

    def add_variable(self, prior=0.0):
        self.priors.append(float(prior))
        self.clamps.append(None)
        self._fin.append(0.0)
        self._pos.append(0)
        self._neg.append(0)
        self._var_factors.append([])
        return len(self.priors) - 1

    def add_variables(self, n, prior=0.0):
        return [self.add_variable(prior) for _ in range(n)]

    def clamp(self, v, value):
        """Pin a variable to 0/1 (or release it with None)."""
        if value not in (0, 1, None):
            raise ValueError("clamp value must be 0, 1 or None")
        self.clamps[v] = value

    def _register(self, factor):
        fid = len(self.factors)
        self.factors.append(factor)
        for slot, v in enumerate(factor.neighbors):
            self._var_factors[v].append((fid, slot))
        return fid

    def add_and(self, t1, t2, b):
        return self._register(_Factor(
            FactorKind.AND, (t1, t2, b),
            lambda inc: list(and_update(inc[0], inc[1], inc[2])),
        ))

    def add_or(self, tops, b):
        def update(inc):
            out_tops, out_b = or_update(inc[:-1], inc[-1])
            return out_tops + [out_b]
        return self._register(_Factor(FactorKind.OR, list(tops) + [b], update))

    def add_pool(self, t, bottoms):
        def update(inc):
            out_t, out_bottoms = pool_update(inc[0], inc[1:])
            return [out_t] + out_bottoms
        return self._register(_Factor(FactorKind.POOL, [t] + list(bottoms), update))

    def add_factor(self, kind, neighbors, update_fn):
        """Attach a composite factor with its own exact update rule."""
        return self._register(_Factor(kind, neighbors, update_fn))

    # -- beliefs and incoming messages -------------------------------------

    def _value(self, fin, pos, neg):
        if pos > 0 and neg > 0:
            raise IndeterminateFormError("variable receives both +inf and -inf")
        if pos > 0:
            return INF
        if neg > 0:
            return -INF
        return fin

    def belief(self, v):
        fin = self._fin[v] + self.priors[v]
        pos, neg = self._pos[v], self._neg[v]
        if self.clamps[v] == 1:
            pos += 1
        elif self.clamps[v] == 0:
            neg += 1
        return self._value(fin, pos, neg)

    def beliefs(self):
        return Beliefs([self.belief(v) for v in range(len(self.priors))], list(self.clamps))

    def incoming(self, fid, slot):
        """Messages into a neighbor from everything except this factor."""
        f = self.factors[fid]
        v = f.neighbors[slot]
        own = f.out[slot]
        fin = self._fin[v] + self.priors[v]
        pos, neg = self._pos[v], self._neg[v]
        if self.clamps[v] == 1:
            pos += 1
        elif self.clamps[v] == 0:
            neg += 1
        if is_pos_inf(own):
            pos -= 1
        elif is_neg_inf(own):
            neg -= 1
        else:
            fin -= own
        return self._value(fin, pos, neg)

    # -- updates ------------------------------------------------------------

    def _store(self, f, slot, new):
        old = f.out[slot]
        if new == old:
            return 0.0
        v = f.neighbors[slot]
        if is_pos_inf(old):
            self._pos[v] -= 1
        elif is_neg_inf(old):
            self._neg[v] -= 1
        else:
            self._fin[v] -= old
        if is_pos_inf(new):
            self._pos[v] += 1
        elif is_neg_inf(new):
            self._neg[v] += 1
        else:
            self._fin[v] += new
        f.out[slot] = new
        if is_inf(old) or is_inf(new):
            return INF
        return abs(new - old)

    def update_factor(self, fid, alpha=1.0, slots=None):
        """Recompute a factor's outgoing messages; returns the sup change.

        `slots` restricts which outgoing edges are written (directional
        schedules update a factor's two sides at different times).
        """
        f = self.factors[fid]
        try:
            inc = [self.incoming(fid, slot) for slot in range(len(f.neighbors))]
            fresh = f.update_fn(inc)
        except IndeterminateFormError as e:
            raise IndeterminateFormError(str(e), factor=fid) from None
        delta = 0.0
        chosen = range(len(fresh)) if slots is None else slots
        for slot in chosen:
            damped = damped_assign(f.out[slot], fresh[slot], alpha)
            delta = max(delta, self._store(f, slot, damped))
        return delta

    def set_message(self, fid, slot, value):
        """Force a stored outgoing message (initialization schedules)."""
        self._store(self.factors[fid], slot, value)

    def run_schedule(self, visits, iters=1):
        """Visit (factor id, damping) pairs in order, `iters` times over."""
        visits = list(visits)
        for _ in range(iters):
            for fid, alpha in visits:
                self.update_factor(fid, alpha)
        return self.beliefs()

    def run_random(self, iters, alpha=1.0):
        """`iters` sweeps, each visiting every factor once in random order."""
        delta = 0.0
        for _ in range(iters):
            delta = 0.0
            for fid in self.rng.permutation(len(self.factors)):
                delta = max(delta, self.update_factor(int(fid), alpha))
        return self.beliefs(), delta

    # -- scoring ------------------------------------------------------------

    def score_assignment(self, assignment):
        """Joint log score of a full 0/1 assignment (-inf if any factor or
        clamp is violated)."""
        score = 0.0
        for v, val in enumerate(assignment):
            if self.clamps[v] is not None and self.clamps[v] != val:
                return -INF
            if val:
                score += self.priors[v]
        for f in self.factors:
            pot = _factor_potential(f, [assignment[v] for v in f.neighbors])
            if pot <= -INF:
                return -INF
            score += pot
        return score


def _factor_potential(f, values):
    import math

    if f.kind is FactorKind.AND:
        t1, t2, b = values
        return 0.0 if b == (t1 & t2) else -INF
    if f.kind is FactorKind.OR:
        *tops, b = values
        return 0.0 if b == max(tops) else -INF
    if f.kind is FactorKind.POOL:
        t, *bottoms = values
        n_on = sum(bottoms)
        if t == 1 and n_on == 1:
            return -math.log(len(bottoms))
        if t == 0 and n_on == 0:
            return 0.0
        return -INF
    raise ValueError(f"no potential rule for factor kind {f.kind}")

"""Exhaustive factor update oracle.

Recomputes each outgoing message of a factor by brute-force max-marginalization
over every configuration the factor permits, including the factor's own log
potential.  Closed-form updates must agree with this exactly; it is the
reference the fast paths are tested against and it stays independent of them.
"""

import itertools
import math

from .factors import FactorKind
from .messages import INF


class ArityTooLargeError(ValueError):
    pass


MAX_ORACLE_VARS = 20


def _legal_configs(kind, n_vars, meta=None):
    """Yield (assignment tuple, log potential) for every legal configuration.

    Variable order matches the incoming-message order used by
    :func:`oracle_factor_update` for each kind.
    """
    if kind is FactorKind.AND:
        # order: t1, t2, b
        for t1, t2 in itertools.product((0, 1), repeat=2):
            yield (t1, t2, t1 & t2), 0.0
    elif kind is FactorKind.OR:
        # order: t1..tM, b
        m = n_vars - 1
        for tops in itertools.product((0, 1), repeat=m):
            yield tops + (max(tops),), 0.0
    elif kind is FactorKind.POOL:
        # order: t, b1..bM
        m = n_vars - 1
        yield (0,) + (0,) * m, 0.0
        for j in range(m):
            bottoms = [0] * m
            bottoms[j] = 1
            yield (1,) + tuple(bottoms), -math.log(m)
    elif kind is FactorKind.AND_OR_TREE:
        # order: s1, w1, .., sM, wM, r
        m = (n_vars - 1) // 2
        for bits in itertools.product((0, 1), repeat=2 * m):
            r = 0
            for k in range(m):
                r |= bits[2 * k] & bits[2 * k + 1]
            yield bits + (r,), 0.0
    elif kind is FactorKind.CLASS_TREE:
        # order: c1..cK, s_11..s_J1, s_12..s_JK (templates grouped by class);
        # the tree's own top is clamped to 1, so exactly one template is on.
        j_templates, k_classes = meta
        pot = -math.log(k_classes) - math.log(j_templates)
        for k in range(k_classes):
            for j in range(j_templates):
                c = [0] * k_classes
                c[k] = 1
                s = [0] * (j_templates * k_classes)
                s[k * j_templates + j] = 1
                yield tuple(c) + tuple(s), pot
    else:
        raise ValueError(f"unknown factor kind {kind}")


def oracle_factor_update(kind, incoming, meta=None):
    """Outgoing messages for `kind` by exhaustive max-marginalization.

    `incoming` lists one message per neighbor in the kind's canonical order
    (see `_legal_configs`).  Returns the normalized outgoing message per
    neighbor: max score over legal configs with the neighbor at 1, minus the
    max with it at 0, where a config's score sums the incoming messages of
    the *other* active variables plus the factor's log potential.
    """
    n = len(incoming)
    if n > MAX_ORACLE_VARS:
        raise ArityTooLargeError(f"{n} variables exceeds oracle limit {MAX_ORACLE_VARS}")
    best = [[-INF, -INF] for _ in range(n)]
    for config, pot in _legal_configs(kind, n, meta):
        for v in range(n):
            score = pot
            for u in range(n):
                if u != v and config[u]:
                    score += incoming[u]
            if score > best[v][config[v]]:
                best[v][config[v]] = score
    return [b1 - b0 for b0, b1 in best]

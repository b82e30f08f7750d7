from .messages import (
    INF,
    INF_THRESHOLD,
    IndeterminateFormError,
    damped_assign,
    is_inf,
    is_neg_inf,
    is_pos_inf,
    sat_add,
)
from .factors import FactorKind, and_update, or_update, pool_update
from .oracle import oracle_factor_update
from .graph import Beliefs, FactorGraph

__all__ = [
    "INF",
    "INF_THRESHOLD",
    "IndeterminateFormError",
    "damped_assign",
    "is_inf",
    "is_neg_inf",
    "is_pos_inf",
    "sat_add",
    "FactorKind",
    "and_update",
    "or_update",
    "pool_update",
    "oracle_factor_update",
    "Beliefs",
    "FactorGraph",
]

"""Compression accounting.

A long bit sequence that is 1 with probability p costs N*H(p) bits under an
optimal code, so sending the factorized form (features once, placements,
residual errors) can undercut sending the raw image.  The reported ratio is
compressed-cost / raw-cost as a percentage: lower is better.
"""

import warnings

import numpy as np


def binary_entropy(p):
    """H(p) in bits; H(0) = H(1) = 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-(p * np.log2(p) + (1 - p) * np.log2(1 - p)))


def encoding_cost(bits):
    """N * H(p_hat) with the empirical ones-rate p_hat."""
    a = np.asarray(bits).ravel()
    if a.size == 0:
        raise ValueError("empty bit sequence")
    return a.size * binary_entropy(a.mean())


def discard_unused_features(s_bits, w_bits):
    """Drop features that never appear in the sparsification from both
    arrays (they are not paid for when transmitting)."""
    s = np.asarray(s_bits)
    w = np.asarray(w_bits)
    if s.ndim == 3:
        used = s.sum(axis=(1, 2)) > 0
    else:
        used = s.sum(axis=(0, 2, 3)) > 0
    if not used.any():
        used = used.copy()
    s_kept = s[used] if s.ndim == 3 else s[:, used]
    return s_kept, w[:, used], used


def compression_ratio(x, s_bits, w_bits, r_bits):
    """100 * (E(S) + E(W) + E(X xor R)) / E(X), unused features removed.

    Returns +inf (with a warning) when the raw image costs nothing to send.
    """
    x = np.asarray(x)
    r = np.asarray(r_bits)
    if x.shape != r.shape:
        raise ValueError(f"image {x.shape} vs reconstruction {r.shape}")
    s_kept, w_kept, _ = discard_unused_features(s_bits, w_bits)
    raw = encoding_cost(x)
    if raw == 0.0:
        warnings.warn("raw image has zero encoding cost; ratio undefined")
        return float("inf")
    residual = (x != r).astype(np.uint8)
    compressed = encoding_cost(residual)
    if s_kept.size:
        compressed += encoding_cost(s_kept)
    if w_kept.size:
        compressed += encoding_cost(w_kept)
    return 100.0 * compressed / raw

"""Image corruption operators for robustness evaluation.

Parameters are documented defaults, overridable per call; every operator is
deterministic under its seed and returns a fresh array.
"""

import numpy as np

from ..model.tensors import as_bits3

CORRUPTION_KINDS = ("noise", "border", "patches", "grid", "line_clutter", "deletion")


def corrupt(image, kind, seed=0, **params):
    x = as_bits3(image).copy()
    rng = np.random.default_rng(seed)
    if kind == "noise":
        rate = params.get("rate", 0.10)
        flip = rng.random(x.shape) < rate
        x = np.where(flip, 1 - x, x).astype(np.uint8)
    elif kind == "border":
        width = params.get("width", 2)
        x[:, :width, :] = 1
        x[:, -width:, :] = 1
        x[:, :, :width] = 1
        x[:, :, -width:] = 1
    elif kind == "patches":
        x = _blocks(x, rng, params.get("count", 3), params.get("size", 6), value=1)
    elif kind == "grid":
        step = params.get("step", 5)
        x[:, ::step, :] = 1
        x[:, :, ::step] = 1
    elif kind == "line_clutter":
        for _ in range(params.get("count", 4)):
            if rng.integers(2) == 0:
                x[:, int(rng.integers(x.shape[1])), :] = 1
            else:
                x[:, :, int(rng.integers(x.shape[2]))] = 1
    elif kind == "deletion":
        x = _blocks(x, rng, params.get("count", 3), params.get("size", 6), value=0)
    else:
        raise ValueError(f"unknown corruption kind {kind!r}; "
                         f"choose from {CORRUPTION_KINDS}")
    return x


def _blocks(x, rng, count, size, value):
    _, h, w = x.shape
    for _ in range(count):
        r = int(rng.integers(max(h - size + 1, 1)))
        c = int(rng.integers(max(w - size + 1, 1)))
        x[:, r:r + size, c:c + size] = value
    return x

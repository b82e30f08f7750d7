"""Binary convolution: convolve and truncate above 1.

Placement convention: an active sparsification entry S[f, r, c] stamps feature
f with its (0, 0) element at output position (r, c), un-flipped.  Output is
full-size, so H_out = H_S + feat_h - 1.  Overlapping stamps OR together.
"""

import numpy as np

from .tensors import BinaryTensor3, as_bits3, as_bits4


def bconv_arrays(s, w):
    """uint8 (A, H_R, W_R) result for uint8 inputs s (F, H_S, W_S) and
    w (A, F, feat_h, feat_w)."""
    s = np.asarray(s)
    w = np.asarray(w)
    if s.ndim != 3 or w.ndim != 4:
        raise ValueError("bconv needs a 3-d sparsification and 4-d weights")
    if s.shape[0] != w.shape[1]:
        raise ValueError(
            f"feature count mismatch: S has {s.shape[0]}, W has {w.shape[1]}"
        )
    a, f, fh, fw = w.shape
    _, hs, ws = s.shape
    counts = np.zeros((a, hs + fh - 1, ws + fw - 1), dtype=np.int32)
    s16 = s.astype(np.int32)
    for dr in range(fh):
        for dc in range(fw):
            k = w[:, :, dr, dc]
            if not k.any():
                continue
            counts[:, dr:dr + hs, dc:dc + ws] += np.tensordot(
                k.astype(np.int32), s16, axes=([1], [0])
            )
    return (counts > 0).astype(np.uint8)


def bconv(s, w):
    """Binary convolution over tensor or array inputs.

    Returns a BinaryTensor3 when given tensors, a uint8 array otherwise.
    """
    wrapped = isinstance(s, BinaryTensor3)
    out = bconv_arrays(as_bits3(s), as_bits4(w))
    return BinaryTensor3.from_array(out) if wrapped else out

"""Bit-packed binary tensors.

Storage type for images, sparsifications and weights: dimensions plus a
row-major bit-packed payload.  Compute paths unpack to uint8 arrays and pack
back at the boundaries; the packed form is also the on-disk payload layout.
"""

import numpy as np


class _BinaryTensor:
    ndim = None

    def __init__(self, dims, packed):
        dims = tuple(int(d) for d in dims)
        if len(dims) != self.ndim:
            raise ValueError(f"expected {self.ndim} dims, got {dims}")
        if any(d <= 0 for d in dims):
            raise ValueError(f"dims must be positive, got {dims}")
        n = int(np.prod(dims))
        packed = np.asarray(packed, dtype=np.uint8).ravel()
        if packed.size != (n + 7) // 8:
            raise ValueError(f"payload holds {packed.size} bytes, need {(n + 7) // 8}")
        self.dims = dims
        self.packed = packed

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a)
        if a.ndim != cls.ndim:
            raise ValueError(f"expected a {cls.ndim}-d array, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        bits = a.astype(np.uint8).ravel()
        return cls(a.shape, np.packbits(bits))

    def unpack(self):
        n = int(np.prod(self.dims))
        bits = np.unpackbits(self.packed, count=n)
        return bits.reshape(self.dims)

    def count_ones(self):
        return int(np.unpackbits(self.packed, count=int(np.prod(self.dims))).sum())

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self.dims == other.dims
            and np.array_equal(self.packed, other.packed)
        )

    def __hash__(self):
        return hash((self.dims, self.packed.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims}, ones={self.count_ones()})"


class BinaryTensor3(_BinaryTensor):
    """(features-or-channels, rows, cols) bit array: X, S, R and U live here."""

    ndim = 3


class BinaryTensor4(_BinaryTensor):
    """(channels-below, features, rows, cols) bit array: the weights W."""

    ndim = 4


def as_bits3(x):
    """uint8 (F, H, W) view of a BinaryTensor3 or binary ndarray."""
    if isinstance(x, BinaryTensor3):
        return x.unpack()
    a = np.asarray(x)
    if a.ndim != 3:
        raise ValueError(f"expected 3-d, got shape {a.shape}")
    return a.astype(np.uint8)


def as_bits4(w):
    """uint8 (A, F, H, W) view of a BinaryTensor4 or binary ndarray."""
    if isinstance(w, BinaryTensor4):
        return w.unpack()
    a = np.asarray(w)
    if a.ndim != 4:
        raise ValueError(f"expected 4-d, got shape {a.shape}")
    return a.astype(np.uint8)

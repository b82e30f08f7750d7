"""Bit-exact file formats.

* Portable bitmaps, both plain (P1) and raw (P4), for single planes.
* Multi-channel tensors as a directory of bitmaps plus a small manifest.
* Weights in a simple container: magic "HCNW1", four little-endian u32 dims
  (A, F, H, W), then the row-major bit-packed payload.
* Dataset directories: images plus manifest.json (paths, labels, seeds).
* Model directories: model.json plus one weight file per layer.
* The classic IDX format for externally supplied digit data (binarized at
  half intensity on load).
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..model.arch import Architecture, Hyperparams, LayerSpec
from ..model.tensors import BinaryTensor3, BinaryTensor4

WEIGHTS_MAGIC = b"HCNW1"
MAX_TENSOR_BITS = 1 << 33


class FormatError(ValueError):
    pass


# -- portable bitmaps -------------------------------------------------------

def save_pbm(path, plane, raw=True):
    a = np.asarray(plane, dtype=np.uint8)
    if a.ndim != 2:
        raise ValueError("PBM stores a single 2-d plane")
    h, w = a.shape
    header = f"{'P4' if raw else 'P1'}\n{w} {h}\n".encode()
    with open(path, "wb") as f:
        f.write(header)
        if raw:
            f.write(np.packbits(a, axis=1).tobytes())
        else:
            for row in a:
                f.write(" ".join(str(int(v)) for v in row).encode() + b"\n")


def load_pbm(path):
    data = Path(path).read_bytes()
    tokens = _pnm_tokens(data)
    magic = next(tokens)
    if magic not in (b"P1", b"P4"):
        raise FormatError(f"not a PBM file: magic {magic!r}")
    w = int(next(tokens))
    h = int(next(tokens))
    if w <= 0 or h <= 0:
        raise FormatError(f"bad PBM dimensions {w}x{h}")
    if magic == b"P1":
        bits = []
        for tok in tokens:
            bits.extend(int(ch) for ch in tok.decode())
            if len(bits) >= w * h:
                break
        if len(bits) < w * h:
            raise FormatError("plain PBM is truncated")
        return np.array(bits[: w * h], dtype=np.uint8).reshape(h, w)
    offset = _raw_payload_offset(data)
    row_bytes = (w + 7) // 8
    need = row_bytes * h
    payload = data[offset:offset + need]
    if len(payload) < need:
        raise FormatError("raw PBM payload is truncated")
    rows = np.frombuffer(payload, dtype=np.uint8).reshape(h, row_bytes)
    return np.unpackbits(rows, axis=1)[:, :w].copy()


def _pnm_tokens(data):
    i = 0
    n = len(data)
    while i < n:
        if data[i:i + 1].isspace():
            i += 1
        elif data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j]
            i = j


def _raw_payload_offset(data):
    # payload starts after the third whitespace-delimited header token
    # (magic, width, height) plus exactly one whitespace byte
    seen = 0
    i = 0
    while seen < 3:
        while data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while data[i:i + 1] != b"\n":
                i += 1
            continue
        while not data[i:i + 1].isspace():
            i += 1
        seen += 1
    return i + 1


# -- multi-channel tensors --------------------------------------------------

def save_tensor3(dirpath, tensor, raw=True):
    t = tensor if isinstance(tensor, BinaryTensor3) else BinaryTensor3.from_array(tensor)
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    bits = t.unpack()
    files = []
    for f in range(t.dims[0]):
        name = f"c{f:03d}.pbm"
        save_pbm(d / name, bits[f], raw=raw)
        files.append(name)
    (d / "tensor.json").write_text(json.dumps(
        {"dims": list(t.dims), "channels": files}, indent=1))


def load_tensor3(dirpath):
    d = Path(dirpath)
    meta = json.loads((d / "tensor.json").read_text())
    planes = [load_pbm(d / name) for name in meta["channels"]]
    t = BinaryTensor3.from_array(np.stack(planes))
    if list(t.dims) != meta["dims"]:
        raise FormatError(f"tensor dims {t.dims} disagree with manifest {meta['dims']}")
    return t


# -- weights ------------------------------------------------------------------

def save_weights(path, weights):
    w = weights if isinstance(weights, BinaryTensor4) else BinaryTensor4.from_array(weights)
    if any(d > 0xFFFFFFFF for d in w.dims):
        raise FormatError("dimension overflows u32")
    with open(path, "wb") as f:
        f.write(WEIGHTS_MAGIC)
        f.write(struct.pack("<4I", *w.dims))
        f.write(w.packed.tobytes())


def load_weights(path):
    data = Path(path).read_bytes()
    if len(data) < 21:
        raise FormatError("weights file shorter than any valid container")
    if data[:5] != WEIGHTS_MAGIC:
        raise FormatError(f"bad magic {data[:5]!r}")
    dims = struct.unpack("<4I", data[5:21])
    if any(d == 0 for d in dims):
        raise FormatError(f"zero dimension in {dims}")
    n = int(np.prod([int(d) for d in dims], dtype=object))
    if n > MAX_TENSOR_BITS:
        raise FormatError(f"dimensions {dims} overflow the sanity cap")
    need = (n + 7) // 8
    payload = data[21:]
    if len(payload) < need:
        raise FormatError(f"payload truncated: {len(payload)} bytes, need {need}")
    return BinaryTensor4(dims, np.frombuffer(payload[:need], dtype=np.uint8))


# -- models ---------------------------------------------------------------------

def save_model(dirpath, model):
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for idx, w in enumerate(model.weights):
        name = f"weights_{idx}.hcnw"
        save_weights(d / name, w)
        files.append(name)
    arch = model.arch
    hyper = model.hyper
    meta = {
        "image_shape": list(arch.image_shape),
        "layers": [[s.num_features, s.feat_h, s.feat_w, s.pool_h, s.pool_w]
                   for s in arch.layers],
        "num_classes": arch.num_classes,
        "templates_per_class": arch.templates_per_class,
        "hyper": {
            "p01": hyper.p01, "p10": hyper.p10, "p_s": hyper.p_s,
            "p_w": list(hyper.p_w), "alpha": hyper.alpha, "lam": hyper.lam,
            "epochs": hyper.epochs, "seed": hyper.seed,
            "pool_perturb": hyper.pool_perturb,
        },
        "weight_files": files,
    }
    (d / "model.json").write_text(json.dumps(meta, indent=1))


def load_model(dirpath):
    from ..learn import TrainedModel

    d = Path(dirpath)
    meta = json.loads((d / "model.json").read_text())
    arch = Architecture(
        image_shape=tuple(meta["image_shape"]),
        layers=[LayerSpec(*vals) for vals in meta["layers"]],
        num_classes=meta["num_classes"],
        templates_per_class=meta["templates_per_class"],
    )
    h = meta["hyper"]
    hyper = Hyperparams(p01=h["p01"], p10=h["p10"], p_s=h["p_s"],
                        p_w=tuple(h["p_w"]), alpha=h["alpha"], lam=h["lam"],
                        epochs=h["epochs"], seed=h["seed"],
                        pool_perturb=h["pool_perturb"])
    weights = tuple(load_weights(d / name) for name in meta["weight_files"])
    for w, res in zip(weights, reversed(arch.resolve())):
        if tuple(w.dims) != res.w_shape:
            raise FormatError(f"weights {w.dims} do not fit layer {res.w_shape}")
    return TrainedModel(arch=arch, weights=weights, hyper=hyper)


# -- datasets --------------------------------------------------------------------

def save_dataset(dirpath, dataset, raw=True):
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, img in enumerate(dataset.images):
        img = np.asarray(img, dtype=np.uint8)
        if img.shape[0] == 1:
            name = f"img_{i:05d}.pbm"
            save_pbm(d / name, img[0], raw=raw)
        else:
            name = f"img_{i:05d}"
            save_tensor3(d / name, img, raw=raw)
        entries.append(name)
    clean_entries = None
    if dataset.clean_images is not None:
        (d / "clean").mkdir(exist_ok=True)
        clean_entries = []
        for i, img in enumerate(dataset.clean_images):
            img = np.asarray(img, dtype=np.uint8)
            if img.shape[0] == 1:
                name = f"clean/img_{i:05d}.pbm"
                save_pbm(d / name, img[0], raw=raw)
            else:
                name = f"clean/img_{i:05d}"
                save_tensor3(d / name, img, raw=raw)
            clean_entries.append(name)
    meta = {k: v for k, v in dataset.meta.items() if _json_safe(v)}
    manifest = {
        "images": entries,
        "labels": dataset.labels,
        "template_ids": dataset.template_ids,
        "clean_images": clean_entries,
        "meta": meta,
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=1))
    if dataset.planted_weights is not None:
        for idx, w in enumerate(dataset.planted_weights):
            save_weights(d / f"planted_{idx}.hcnw", np.asarray(w, dtype=np.uint8))


def _json_safe(v):
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def _load_image_entry(d, name):
    p = Path(d) / name
    if p.is_dir():
        return load_tensor3(p).unpack()
    return load_pbm(p)[None]


def load_dataset(dirpath):
    from .datasets import Dataset

    d = Path(dirpath)
    manifest = json.loads((d / "manifest.json").read_text())
    images = [_load_image_entry(d, name) for name in manifest["images"]]
    cleans = None
    if manifest.get("clean_images"):
        cleans = [_load_image_entry(d, name) for name in manifest["clean_images"]]
    planted = sorted(d.glob("planted_*.hcnw"))
    return Dataset(
        images=images,
        labels=manifest.get("labels"),
        clean_images=cleans,
        template_ids=manifest.get("template_ids"),
        planted_weights=[load_weights(p).unpack() for p in planted] or None,
        meta=manifest.get("meta", {}),
    )


# -- IDX digit files ---------------------------------------------------------------

def load_idx_images(path, threshold=128):
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise FormatError("IDX image file too short")
    magic, n, h, w = struct.unpack(">4I", data[:16])
    if magic != 2051:
        raise FormatError(f"bad IDX image magic {magic}")
    need = n * h * w
    if len(data) - 16 < need:
        raise FormatError("IDX image payload truncated")
    raw = np.frombuffer(data, dtype=np.uint8, count=need, offset=16)
    return (raw.reshape(n, 1, h, w) >= threshold).astype(np.uint8)


def load_idx_labels(path):
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError("IDX label file too short")
    magic, n = struct.unpack(">2I", data[:8])
    if magic != 2049:
        raise FormatError(f"bad IDX label magic {magic}")
    if len(data) - 8 < n:
        raise FormatError("IDX label payload truncated")
    return np.frombuffer(data, dtype=np.uint8, count=n, offset=8).astype(int)


def save_idx_images(path, images):
    """Writer for the IDX image format (round-trip tests, smoke fixtures)."""
    a = np.asarray(images, dtype=np.uint8)
    n, _, h, w = a.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">4I", 2051, n, h, w))
        f.write((a[:, 0] * 255).astype(np.uint8).tobytes())


def save_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">2I", 2049, len(labels)))
        f.write(labels.tobytes())


# -- feature sheets ------------------------------------------------------------------

def feature_grid(weights, pad=1):
    """Tile a weight tensor's features (OR over input channels) into one
    plane with separator rows, for eyeballing what was learned."""
    w = np.asarray(weights if not isinstance(weights, BinaryTensor4)
                   else weights.unpack(), dtype=np.uint8)
    a, f, h, ww = w.shape
    per_row = int(np.ceil(np.sqrt(f)))
    rows = int(np.ceil(f / per_row))
    grid = np.zeros((rows * (h + pad) + pad, per_row * (ww + pad) + pad), dtype=np.uint8)
    for i in range(f):
        r, c = divmod(i, per_row)
        tile = w[:, i].max(axis=0)
        r0 = pad + r * (h + pad)
        c0 = pad + c * (ww + pad)
        grid[r0:r0 + h, c0:c0 + ww] = tile
    return grid

"""Dataset generators.

Everything here samples from the generative story itself: draw weights and
sparsifications from their priors (or use planted fixtures), render with the
binary convolution, jitter through the pooling stages, and flip bits through
the channel.  Generators are deterministic under their seed.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..model.arch import Architecture, Hyperparams, LayerSpec
from ..model.bconv import bconv_arrays
from ..model.graph import pooling_connectivity
from . import glyphs


@dataclass
class Dataset:
    images: list
    labels: Optional[list] = None
    clean_images: Optional[list] = None
    template_ids: Optional[list] = None
    planted_weights: Optional[list] = None  # top-to-bottom, like arch.layers
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shapes = {tuple(np.asarray(x).shape) for x in self.images}
        if len(shapes) > 1:
            raise ValueError(f"images disagree on shape: {shapes}")
        if self.labels is not None and len(self.labels) != len(self.images):
            raise ValueError("one label per image")

    def __len__(self):
        return len(self.images)


def _flip_noise(bits, p01, p10, rng):
    u = rng.random(bits.shape)
    on = bits > 0
    out = np.where(on, (u >= p01), (u < p10))
    return out.astype(np.uint8)


def _pool_jitter(bits, pool_h, pool_w, rng, jitter=True):
    """Move every active cell by a uniformly chosen valid shift of the
    centered window; colliding targets merge."""
    if pool_h == 1 and pool_w == 1:
        return bits.copy()
    shifts, valid, _ = pooling_connectivity(bits.shape, pool_h, pool_w)
    out = np.zeros_like(bits)
    center = (pool_h // 2) * pool_w + (pool_w // 2)
    for f, r, c in np.argwhere(bits > 0):
        if jitter:
            options = [s for s in range(len(shifts)) if valid[s, r, c]]
            s = options[rng.integers(len(options))]
        else:
            s = center
        dr, dc = shifts[s]
        out[f, r + dr, c + dc] = 1
    return out


def sample_single_layer(arch, hyper, n, seed, weights=None):
    """Images from the standalone single-layer model: W ~ Bern(p_w),
    S ~ Bern(p_s), R = bconv(S, W), X = channel(R)."""
    if arch.n_layers != 1 or arch.num_classes != 0:
        raise ValueError("single-layer sampler wants a classless 1-layer architecture")
    rng = np.random.default_rng(seed)
    res = arch.resolve()[0]
    if weights is None:
        w = (rng.random(res.w_shape) < hyper.p_w_for(arch)[0]).astype(np.uint8)
    else:
        w = np.asarray(weights, dtype=np.uint8)
    images, cleans, sparses = [], [], []
    for _ in range(n):
        s = (rng.random(res.s_shape) < hyper.p_s).astype(np.uint8)
        r = bconv_arrays(s, w)
        images.append(_flip_noise(r, hyper.p01, hyper.p10, rng))
        cleans.append(r)
        sparses.append(s)
    return Dataset(images=images, clean_images=cleans,
                   planted_weights=[w], meta={"sparsifications": sparses,
                                              "seed": seed})


def sample_hcn(arch, hyper, n, seed, weights=None, jitter=True, labels=None):
    """Images from the full hierarchy.

    `weights` (top-to-bottom) may be planted; otherwise they are drawn from
    the per-layer priors once and shared by all images.  With classes, each
    image draws a class and template uniformly (or uses `labels`); classless
    tops draw S^L ~ Bern(p_s).
    """
    rng = np.random.default_rng(seed)
    resolved = arch.resolve()
    p_w_bu = hyper.p_w_for(arch)
    if weights is None:
        weights_bu = [(rng.random(res.w_shape) < p_w_bu[li]).astype(np.uint8)
                      for li, res in enumerate(resolved)]
    else:
        weights_bu = [np.asarray(w, dtype=np.uint8) for w in reversed(list(weights))]
    specs_bu = list(reversed(arch.layers))

    images, cleans, labs, tids = [], [], [], []
    for i in range(n):
        if arch.num_classes > 0:
            if labels is not None:
                k = int(labels[i])
            else:
                k = int(rng.integers(arch.num_classes))
            j = int(rng.integers(arch.templates_per_class))
            top = np.zeros(resolved[-1].s_shape, dtype=np.uint8)
            top[k * arch.templates_per_class + j, 0, 0] = 1
            labs.append(k)
            tids.append(k * arch.templates_per_class + j)
        else:
            top = (rng.random(resolved[-1].s_shape) < hyper.p_s).astype(np.uint8)
        s = top
        for li in reversed(range(arch.n_layers)):
            r = bconv_arrays(s, weights_bu[li])
            s = _pool_jitter(r, specs_bu[li].pool_h, specs_bu[li].pool_w, rng, jitter)
        cleans.append(s)
        images.append(_flip_noise(s, hyper.p01, hyper.p10, rng))
    return Dataset(
        images=images,
        labels=labs if arch.num_classes > 0 else None,
        clean_images=cleans,
        template_ids=tids if arch.num_classes > 0 else None,
        planted_weights=[w for w in reversed(weights_bu)],
        meta={"seed": seed},
    )


# -- the two-trait synthetic set ------------------------------------------------

SHAPES_IMAGE = (1, 15, 15)


def shapes_architecture():
    """Two classes x two templates; each template drops one shape trait and
    one diagonal trait on the template grid, both stages pool 3x3."""
    return Architecture(
        image_shape=SHAPES_IMAGE,
        layers=[LayerSpec(4, 9, 9, 3, 3), LayerSpec(4, 7, 7, 3, 3)],
        num_classes=2, templates_per_class=2,
    )


def shapes_planted_weights():
    """(w_top, w_bottom): template composition and the four trait glyphs."""
    w1 = np.zeros((1, 4, 7, 7), dtype=np.uint8)
    w1[0, 0] = glyphs.SQUARE_HOLES_7
    w1[0, 1] = glyphs.RING_7
    w1[0, 2] = glyphs.FDIAG_7
    w1[0, 3] = glyphs.BDIAG_7
    # class = XOR(shape trait, diagonal trait); channel = class * J + template
    combos = [(0, 2), (1, 3), (0, 3), (1, 2)]
    w2 = np.zeros((4, 4, 9, 9), dtype=np.uint8)
    for t, (shape_f, diag_f) in enumerate(combos):
        w2[shape_f, t, 1, 1] = 1
        w2[diag_f, t, 5, 5] = 1
    return w2, w1


def gen_shapes_dataset(n_train=100, n_test=10000, seed=0, noise=1e-3, jitter=True):
    """(train, test) splits of the two-trait set."""
    arch = shapes_architecture()
    hyper = Hyperparams(p01=max(noise, 1e-9) if noise > 0 else 1e-9,
                        p10=max(noise, 1e-9) if noise > 0 else 1e-9,
                        p_w=(0.05, 0.05))
    w2, w1 = shapes_planted_weights()
    train = sample_hcn(arch, hyper, n_train, seed, weights=[w2, w1], jitter=jitter)
    test = sample_hcn(arch, hyper, n_test, seed + 1, weights=[w2, w1], jitter=jitter)
    for ds, split in ((train, "train"), (test, "test")):
        ds.meta.update({"generator": "shapes", "noise": noise,
                        "jitter": jitter, "split": split, "seed": seed})
    return train, test


# -- single-image feature-learning canvases -------------------------------------

def _place(canvas, glyph, r, c):
    h, w = glyph.shape
    canvas[r:r + h, c:c + w] |= glyph


def _scatter_glyphs(canvas_hw, glyph_list, picks, rng):
    canvas = np.zeros(canvas_hw, dtype=np.uint8)
    placements = []
    for _ in range(picks):
        g = int(rng.integers(len(glyph_list)))
        glyph = glyph_list[g]
        r = int(rng.integers(canvas_hw[0] - glyph.shape[0] + 1))
        c = int(rng.integers(canvas_hw[1] - glyph.shape[1] + 1))
        _place(canvas, glyph, r, c)
        placements.append((g, r, c))
    return canvas, placements


def gen_two_bars(seed=0, canvas=(20, 20), n_bars=12, noise=0.03):
    rng = np.random.default_rng(seed)
    clean, placements = _scatter_glyphs(canvas, [glyphs.HBAR_7, glyphs.VBAR_7],
                                        n_bars, rng)
    clean = clean[None]
    noisy = _flip_noise(clean, noise, noise, rng) if noise > 0 else clean.copy()
    return Dataset(images=[noisy], clean_images=[clean],
                   meta={"generator": "two-bars", "placements": placements,
                         "noise": noise, "seed": seed})


def gen_symbols(seed=0, grid=(9, 9), cell=11, noise=0.0):
    """Symbol sheet: one random symbol per grid cell, jittered inside it."""
    rng = np.random.default_rng(seed)
    glyph_list = list(glyphs.SYMBOLS_9.values())
    gh, gw = grid
    canvas = np.zeros((gh * cell, gw * cell), dtype=np.uint8)
    slack = cell - 9
    placements = []
    for gr in range(gh):
        for gc in range(gw):
            g = int(rng.integers(len(glyph_list)))
            r = gr * cell + int(rng.integers(slack + 1))
            c = gc * cell + int(rng.integers(slack + 1))
            _place(canvas, glyph_list[g], r, c)
            placements.append((g, r, c))
    clean = canvas[None]
    noisy = _flip_noise(clean, noise, noise, rng) if noise > 0 else clean.copy()
    return Dataset(images=[noisy], clean_images=[clean],
                   meta={"generator": "symbols", "placements": placements,
                         "noise": noise, "seed": seed})


def gen_letters(seed=0, canvas=(48, 48), alphabet="ABCDEF", n_letters=24,
                noise=0.0, n_images=1):
    """Letter soup: `n_letters` glyphs per image from `alphabet`."""
    rng = np.random.default_rng(seed)
    glyph_list = [glyphs.FONT_5X7[ch] for ch in alphabet]
    images, cleans, placements = [], [], []
    for _ in range(n_images):
        clean, pl = _scatter_glyphs(canvas, glyph_list, n_letters, rng)
        clean = clean[None]
        images.append(_flip_noise(clean, noise, noise, rng) if noise > 0
                      else clean.copy())
        cleans.append(clean)
        placements.append(pl)
    return Dataset(images=images, clean_images=cleans,
                   meta={"generator": "letters", "alphabet": alphabet,
                         "placements": placements, "noise": noise, "seed": seed})


def gen_text(seed=0, text="THE QUICK BROWN FOX JUMPS OVER THE LAZY DOG",
             cols=9, noise=0.0):
    """Text block: fixed glyph grid with 1px spacing, line-wrapped."""
    rng = np.random.default_rng(seed)
    words = text.replace(" ", "")
    rows = int(np.ceil(len(words) / cols))
    h, w = rows * 8 + 1, cols * 6 + 1
    clean = np.zeros((h, w), dtype=np.uint8)
    for i, ch in enumerate(words):
        r, c = divmod(i, cols)
        _place(clean, glyphs.FONT_5X7[ch], 1 + r * 8, 1 + c * 6)
    clean = clean[None]
    noisy = _flip_noise(clean, noise, noise, rng) if noise > 0 else clean.copy()
    return Dataset(images=[noisy], clean_images=[clean],
                   meta={"generator": "text", "text": text, "noise": noise,
                         "seed": seed, "alphabet": "".join(sorted(set(words)))})

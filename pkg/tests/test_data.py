import numpy as np
import pytest

from hcn.model import Architecture, Hyperparams, LayerSpec
from hcn.model.bconv import bconv_arrays
from hcn.data import corrupt, encoding_cost, compression_ratio
from hcn.data.datasets import (
    gen_letters,
    gen_shapes_dataset,
    gen_symbols,
    gen_two_bars,
    gen_text,
    sample_hcn,
    sample_single_layer,
    shapes_architecture,
    shapes_planted_weights,
)
from hcn.data.metrics import binary_entropy, discard_unused_features


def _single_layer_arch(f=3, feat=3, img=8):
    return Architecture(image_shape=(1, img, img),
                        layers=[LayerSpec(f, feat, feat, 1, 1)])


def test_sample_single_layer_zero_ps_is_pure_noise():
    arch = _single_layer_arch()
    hyper = Hyperparams(p01=0.2, p10=0.2, p_s=1e-12, p_w=0.5)
    ds = sample_single_layer(arch, hyper, 50, seed=1)
    assert all(c.sum() == 0 for c in ds.clean_images)
    rate = np.mean([x.mean() for x in ds.images])
    assert 0.15 < rate < 0.25


def test_sample_single_layer_channel_statistics():
    arch = _single_layer_arch(f=2, feat=2, img=6)
    hyper = Hyperparams(p01=0.1, p10=0.06, p_s=0.05, p_w=0.5)
    ds = sample_single_layer(arch, hyper, 4000, seed=7)
    clean = np.stack(ds.clean_images).astype(bool)
    noisy = np.stack(ds.images).astype(bool)
    n_on = clean.sum()
    n_off = clean.size - n_on
    p01_hat = (~noisy[clean]).sum() / n_on
    p10_hat = noisy[~clean].sum() / n_off
    assert abs(p01_hat - 0.1) < 3 * np.sqrt(0.1 * 0.9 / n_on)
    assert abs(p10_hat - 0.06) < 3 * np.sqrt(0.06 * 0.94 / n_off)


def test_sample_single_layer_reconstruction_identity():
    arch = _single_layer_arch()
    hyper = Hyperparams(p01=0.05, p10=0.05, p_s=0.04, p_w=0.4)
    ds = sample_single_layer(arch, hyper, 5, seed=3)
    for s, clean in zip(ds.meta["sparsifications"], ds.clean_images):
        assert np.array_equal(bconv_arrays(s, ds.planted_weights[0]), clean)


def test_sample_hcn_pool_statistics():
    # uniform shift choice: each interior activation lands in each window
    # cell equally often
    arch = Architecture(image_shape=(1, 5, 5), layers=[LayerSpec(1, 1, 1, 3, 3)])
    hyper = Hyperparams(p01=1e-9, p10=1e-9, p_s=1.0 - 1e-12, p_w=0.999)
    # p_s ~ 1 puts an activation everywhere; check the center cell's source mix
    ds = sample_hcn(arch, hyper, 400, seed=11)
    rate = np.mean([img[0, 2, 2] for img in ds.images])
    assert rate > 0.99  # with everything active the center is always covered


def test_shapes_dataset_label_parity_and_distinctness():
    train, test = gen_shapes_dataset(n_train=40, n_test=10, seed=5,
                                     noise=0.0, jitter=False)
    # without jitter and noise there are exactly 4 distinct images
    uniq = {img.tobytes() for img in train.images + test.images}
    assert len(uniq) == 4
    # template channel k*J+j implies class k
    for lab, tid in zip(train.labels, train.template_ids):
        assert lab == tid // 2


def test_shapes_flip_rate():
    train, _ = gen_shapes_dataset(n_train=300, n_test=1, seed=2, noise=1e-3)
    flips = np.mean([
        (img != clean).sum() for img, clean in zip(train.images, train.clean_images)
    ])
    expect = 1e-3 * train.images[0].size
    assert flips == pytest.approx(expect, abs=3 * np.sqrt(expect / 300) + 0.05)


def test_shapes_trait_pixel_budgets_match():
    w2, w1 = shapes_planted_weights()
    counts = w1[0].sum(axis=(1, 2))
    assert counts[0] == counts[1]  # square vs ring
    assert counts[2] == counts[3]  # the two diagonals
    assert (w2.sum(axis=(0, 2, 3)) == 2).all()  # two traits per template


def test_generators_deterministic():
    a = gen_two_bars(seed=9)
    b = gen_two_bars(seed=9)
    assert np.array_equal(a.images[0], b.images[0])
    c = gen_symbols(seed=4)
    d = gen_symbols(seed=4)
    assert np.array_equal(c.images[0], d.images[0])
    e, _ = gen_shapes_dataset(8, 1, seed=3)
    f, _ = gen_shapes_dataset(8, 1, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(e.images, f.images))


def test_letters_and_text_generators():
    ds = gen_letters(seed=1, n_images=3, n_letters=5, noise=0.03)
    assert len(ds.images) == 3
    assert all(img.shape == ds.images[0].shape for img in ds.images)
    txt = gen_text(seed=0)
    assert txt.images[0].sum() > 0


def test_corrupt_deletion_only_clears():
    img = np.ones((1, 20, 20), dtype=np.uint8)
    out = corrupt(img, "deletion", seed=3)
    assert ((img == 0) | (out <= img)).all()
    assert out.sum() < img.sum()


def test_corrupt_border_touches_only_frame():
    img = np.zeros((1, 12, 12), dtype=np.uint8)
    out = corrupt(img, "border", seed=0)
    assert out[0, 2:-2, 2:-2].sum() == 0
    assert out[0, 0].all() and out[0, -1].all()


def test_corrupt_noise_rate():
    img = np.zeros((1, 100, 100), dtype=np.uint8)
    out = corrupt(img, "noise", seed=1, rate=0.1)
    flipped = (out != img).sum()
    assert abs(flipped - 1000) < 3 * np.sqrt(1000 * 0.9)


def test_corrupt_rejects_unknown_kind():
    with pytest.raises(ValueError):
        corrupt(np.zeros((1, 5, 5), np.uint8), "vignette")


def test_encoding_cost_values():
    assert encoding_cost(np.zeros(64)) == 0.0
    assert encoding_cost(np.ones(10)) == 0.0
    half = np.array([0, 1] * 50)
    assert encoding_cost(half) == pytest.approx(100.0)
    tenth = np.array([1] * 10 + [0] * 90)
    assert encoding_cost(tenth) == pytest.approx(100 * binary_entropy(0.1))
    assert encoding_cost(tenth) == pytest.approx(46.90, abs=0.01)


def test_encoding_cost_bounds():
    rng = np.random.default_rng(0)
    for _ in range(20):
        bits = rng.integers(0, 2, 37)
        e = encoding_cost(bits)
        assert 0.0 <= e <= bits.size


def test_discard_unused_features():
    s = np.zeros((3, 4, 4), dtype=np.uint8)
    s[0, 1, 1] = 1
    w = np.ones((1, 3, 2, 2), dtype=np.uint8)
    s2, w2, used = discard_unused_features(s, w)
    assert s2.shape[0] == 1 and w2.shape[1] == 1
    assert list(used) == [True, False, False]


def test_compression_ratio_direction():
    rng = np.random.default_rng(5)
    x = (rng.random((1, 30, 30)) < 0.25).astype(np.uint8)
    s = np.zeros((2, 28, 28), dtype=np.uint8)
    s[0, 0, 0] = 1
    w = np.zeros((1, 2, 3, 3), dtype=np.uint8)
    w[0, 0, 1, 1] = 1
    r = x.copy()  # pretend the reconstruction is perfect
    assert compression_ratio(x, s, w, r) < 100.0


def test_compression_ratio_zero_raw_warns():
    x = np.zeros((1, 8, 8), dtype=np.uint8)
    s = np.zeros((1, 8, 8), dtype=np.uint8)
    w = np.ones((1, 1, 1, 1), dtype=np.uint8)
    with pytest.warns(UserWarning):
        assert compression_ratio(x, s, w, x) == float("inf")

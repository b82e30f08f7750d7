import numpy as np
import pytest

from hcn.model import Architecture, Hyperparams, LayerSpec
from hcn.model.tensors import BinaryTensor3, BinaryTensor4
from hcn.learn import TrainedModel
from hcn.data import io
from hcn.data.datasets import Dataset, gen_shapes_dataset


def test_binary_tensor_roundtrip():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, (3, 5, 7)).astype(np.uint8)
    t = BinaryTensor3.from_array(a)
    assert np.array_equal(t.unpack(), a)
    assert t == BinaryTensor3(t.dims, t.packed)
    w = rng.integers(0, 2, (2, 3, 4, 5)).astype(np.uint8)
    t4 = BinaryTensor4.from_array(w)
    assert np.array_equal(t4.unpack(), w)


def test_binary_tensor_rejects_nonbinary():
    with pytest.raises(ValueError):
        BinaryTensor3.from_array(np.full((1, 2, 2), 3))


@pytest.mark.parametrize("raw", [True, False])
def test_pbm_roundtrip(tmp_path, raw):
    rng = np.random.default_rng(1)
    plane = rng.integers(0, 2, (11, 13)).astype(np.uint8)
    p = tmp_path / "img.pbm"
    io.save_pbm(p, plane, raw=raw)
    assert np.array_equal(io.load_pbm(p), plane)


def test_pbm_plain_and_raw_agree(tmp_path):
    rng = np.random.default_rng(2)
    plane = rng.integers(0, 2, (9, 17)).astype(np.uint8)
    io.save_pbm(tmp_path / "a.pbm", plane, raw=True)
    io.save_pbm(tmp_path / "b.pbm", plane, raw=False)
    assert np.array_equal(io.load_pbm(tmp_path / "a.pbm"),
                          io.load_pbm(tmp_path / "b.pbm"))


def test_pbm_rejects_garbage(tmp_path):
    p = tmp_path / "bad.pbm"
    p.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 12)
    with pytest.raises(io.FormatError):
        io.load_pbm(p)


def test_tensor_dir_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    t = BinaryTensor3.from_array(rng.integers(0, 2, (4, 6, 6)).astype(np.uint8))
    io.save_tensor3(tmp_path / "t", t)
    assert io.load_tensor3(tmp_path / "t") == t


def test_weights_container_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    w = BinaryTensor4.from_array(rng.integers(0, 2, (2, 3, 5, 4)).astype(np.uint8))
    p = tmp_path / "w.hcnw"
    io.save_weights(p, w)
    assert io.load_weights(p) == w


def test_weights_container_minimal_size(tmp_path):
    w = BinaryTensor4.from_array(np.ones((1, 1, 1, 1), dtype=np.uint8))
    p = tmp_path / "w.hcnw"
    io.save_weights(p, w)
    assert p.stat().st_size == 21  # 5 magic + 16 dims + 1 payload byte


def test_weights_container_errors(tmp_path):
    p = tmp_path / "w.hcnw"
    p.write_bytes(b"HELLO" + b"\x00" * 20)
    with pytest.raises(io.FormatError):
        io.load_weights(p)
    import struct
    p.write_bytes(b"HCNW1" + struct.pack("<4I", 2, 2, 2, 2) + b"\x00")
    with pytest.raises(io.FormatError, match="truncated"):
        io.load_weights(p)
    p.write_bytes(b"HCNW1" + struct.pack("<4I", 70000, 70000, 70000, 1) + b"\x00")
    with pytest.raises(io.FormatError, match="overflow"):
        io.load_weights(p)


def test_model_roundtrip_preserves_classification(tmp_path):
    from hcn.infer import classify_direct
    from hcn.data.datasets import shapes_planted_weights, shapes_architecture

    w2, w1 = shapes_planted_weights()
    arch = shapes_architecture()
    model = TrainedModel(
        arch=arch,
        weights=(BinaryTensor4.from_array(w2), BinaryTensor4.from_array(w1)),
        hyper=Hyperparams(p01=0.02, p10=0.02, p_w=(0.05, 0.05)),
    )
    io.save_model(tmp_path / "m", model)
    loaded = io.load_model(tmp_path / "m")
    assert loaded.arch == model.arch
    assert all(a == b for a, b in zip(loaded.weights, model.weights))

    train, _ = gen_shapes_dataset(n_train=6, n_test=1, seed=8)
    got = classify_direct(train.images, loaded)
    want = classify_direct(train.images, model)
    assert [g.class_id for g in got] == [w.class_id for w in want]
    for g, w in zip(got, want):
        np.testing.assert_array_equal(g.scores, w.scores)


def test_dataset_roundtrip(tmp_path):
    train, _ = gen_shapes_dataset(n_train=5, n_test=1, seed=6)
    io.save_dataset(tmp_path / "d", train)
    back = io.load_dataset(tmp_path / "d")
    assert len(back) == len(train)
    for a, b in zip(train.images, back.images):
        assert np.array_equal(a, b)
    assert back.labels == train.labels
    assert back.template_ids == train.template_ids
    for a, b in zip(train.clean_images, back.clean_images):
        assert np.array_equal(a, b)
    for a, b in zip(train.planted_weights, back.planted_weights):
        assert np.array_equal(np.asarray(a), b)


def test_dataset_roundtrip_multichannel(tmp_path):
    rng = np.random.default_rng(7)
    ds = Dataset(images=[rng.integers(0, 2, (3, 4, 4)).astype(np.uint8)
                         for _ in range(2)])
    io.save_dataset(tmp_path / "d", ds)
    back = io.load_dataset(tmp_path / "d")
    for a, b in zip(ds.images, back.images):
        assert np.array_equal(a, b)


def test_idx_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    imgs = rng.integers(0, 2, (10, 1, 6, 6)).astype(np.uint8)
    labels = rng.integers(0, 10, 10)
    io.save_idx_images(tmp_path / "imgs.idx", imgs)
    io.save_idx_labels(tmp_path / "labels.idx", labels)
    assert np.array_equal(io.load_idx_images(tmp_path / "imgs.idx"), imgs)
    assert np.array_equal(io.load_idx_labels(tmp_path / "labels.idx"), labels)


def test_idx_errors(tmp_path):
    p = tmp_path / "x.idx"
    p.write_bytes(b"\x00" * 4)
    with pytest.raises(io.FormatError):
        io.load_idx_images(p)


def test_feature_grid_shape():
    w = np.ones((1, 5, 3, 3), dtype=np.uint8)
    grid = io.feature_grid(w)
    assert grid.ndim == 2
    assert grid.sum() == 5 * 9

import hashlib
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnt.data.augment import (AugmentationConfig, augment_eval, augment_train, center_crop,
                              center_crop_offsets, erase_region, random_crop, random_erase, rotate,
                              sample_view, scale_jitter)
from dnt.data.manifest import DatasetManifest, Record, build_manifest, split_counts
from dnt.data.netpbm import decode_netpbm, encode_pgm, encode_ppm, load_image, save_image
from dnt.data.rng import Rng
from dnt.data.synth import grating, synth_texture_dataset
from dnt.errors import ConfigError, ImageFormatError, ImageReadError, ManifestError, UsageError
from dnt.lbp import texture_descriptor


# ----- splitmix64 -----------------------------------------------------------------------
def test_splitmix64_reference_values():
    # first outputs for seed 0 of the published splitmix64 reference
    r = Rng(0)
    assert [r.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_vectorised_draws_match_scalar():
    a, b = Rng(12345), Rng(12345)
    assert a.u64(17).tolist() == [b.next_u64() for _ in range(17)]
    assert a.state == b.state


def test_substreams_are_order_independent():
    first = Rng.substream(1, 2, 3).u64(4)
    Rng.substream(9, 9).u64(100)
    assert Rng.substream(1, 2, 3).u64(4).tolist() == first.tolist()
    assert Rng.substream(1, 2, 4).u64(4).tolist() != first.tolist()


@given(st.integers(0, 2**64 - 1), st.integers(1, 50))
def test_permutation_is_a_permutation(seed, n):
    assert sorted(Rng(seed).permutation(n)) == list(range(n))


@given(st.integers(0, 2**64 - 1), st.integers(-5, 5), st.integers(1, 10))
def test_integers_in_range(seed, low, span):
    r = Rng(seed)
    assert all(low <= r.integers(low, low + span) < low + span for _ in range(20))


def test_uniform_and_normal_moments():
    u = Rng(3).uniform(100_000)
    assert 0 <= u.min() and u.max() < 1 and abs(u.mean() - 0.5) < 0.01
    z = Rng(4).normal(100_000)
    assert abs(z.mean()) < 0.02 and abs(z.std() - 1) < 0.02


# ----- netpbm ---------------------------------------------------------------------------
def test_ascii_pgm_example():
    img = decode_netpbm(b"P2\n2 2\n255\n0 64 128 255")
    assert img.shape == (2, 2, 3)
    assert img.reshape(-1, 3).tolist() == [[0] * 3, [64] * 3, [128] * 3, [255] * 3]


def test_binary_ppm_example():
    img = decode_netpbm(b"P6\n1 1\n255\n" + bytes([10, 20, 30]))
    assert img.reshape(-1).tolist() == [10.0, 20.0, 30.0]


def test_ascii_ppm_with_comments():
    img = decode_netpbm(b"P3\n# a comment\n2 1 # trailing\n255\n1 2 3  4 5 6\n")
    assert img.reshape(-1).tolist() == [1, 2, 3, 4, 5, 6]


def test_maxval_rescaled_to_255():
    img = decode_netpbm(b"P2\n2 1\n15\n0 15\n")
    assert img[0, :, 0].tolist() == [0.0, 255.0]
    img16 = decode_netpbm(b"P5\n1 1\n65535\n" + bytes([0xFF, 0xFF]))
    assert img16.item(0) == 255.0


def test_read_errors(tmp_path):
    empty = tmp_path / "empty.pgm"
    empty.write_bytes(b"")
    with pytest.raises(ImageReadError, match="empty.pgm"):
        load_image(empty)
    with pytest.raises(ImageReadError, match="missing.pgm"):
        load_image(tmp_path / "missing.pgm")
    trunc = tmp_path / "trunc.pgm"
    trunc.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
    with pytest.raises(ImageReadError, match="trunc.pgm"):
        load_image(trunc)
    assert issubclass(ImageReadError, OSError)


def test_unsupported_format(tmp_path):
    p = tmp_path / "x.bmp"
    p.write_bytes(b"BM....")
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_pgm_ppm_round_trip(tmp_path):
    gray = np.floor(Rng(1).uniform((5, 7), 0, 256))
    np.testing.assert_array_equal(decode_netpbm(encode_pgm(gray))[..., 0], gray)
    rgb = np.floor(Rng(2).uniform((4, 3, 3), 0, 256))
    save_image(tmp_path / "c.ppm", rgb)
    np.testing.assert_array_equal(load_image(tmp_path / "c.ppm"), rgb)


# ----- erasing --------------------------------------------------------------------------
class _Draws:
    """Rng stand-in replaying fixed uniform/integer draws."""

    def __init__(self, uniforms, integers):
        self.u, self.i = list(uniforms), list(integers)

    def uniform(self, size=None, low=0.0, high=1.0):
        return self.u.pop(0)

    def integers(self, low, high):
        v = self.i.pop(0)
        assert low <= v < high
        return v


def test_erase_example_224():
    cfg = AugmentationConfig()
    img = Rng(0).uniform((224, 224, 3), 0, 255)
    out = random_erase(img, cfg, _Draws([0.5, 0.4], [10, 20]))
    region = out[10:10 + 112, 20:20 + 89]
    assert np.all(region == 127.0)
    mask = np.ones((224, 224), bool)
    mask[10:122, 20:109] = False
    np.testing.assert_array_equal(out[mask], img[mask])


def test_erase_disabled_returns_input():
    img = np.zeros((8, 8, 3))
    cfg = AugmentationConfig(erase=False)
    assert random_erase(img, cfg, Rng(0)) is img


def test_erase_contract_1000_draws():
    cfg = AugmentationConfig()
    img = Rng(5).uniform((224, 224, 3), 0, 255)
    for k in range(1000):
        top, left, eh, ew = erase_region(img.shape, cfg, Rng.substream(5, k))
        assert 0.2 <= eh / 224 <= 0.8 and 0.2 <= ew / 224 <= 0.8
        assert 0 <= top <= 224 - eh and 0 <= left <= 224 - ew
        out = random_erase(img, cfg, Rng.substream(5, k))
        inside = np.zeros((224, 224), bool)
        inside[top:top + eh, left:left + ew] = True
        assert np.all(out[inside] == 127.0)
        np.testing.assert_array_equal(out[~inside], img[~inside])


@given(st.integers(10, 300), st.floats(0.2, 0.8, exclude_max=True))
def test_erase_side_is_floor_inside_range(n, u):
    side = erase_region((n, n), AugmentationConfig(), _Draws([u, u], [0, 0]))[2]
    lo, hi = math.ceil(0.2 * n), math.floor(0.8 * n)
    assert side == min(max(math.floor(u * n), lo), hi)


def test_augmentation_config_errors():
    with pytest.raises(ConfigError):
        AugmentationConfig(erase_scale=(0.0, 0.5))
    with pytest.raises(ConfigError):
        AugmentationConfig(erase_scale=(0.5, 1.0))
    with pytest.raises(ConfigError):
        AugmentationConfig(scale_jitter=1.0)


# ----- geometric transforms -------------------------------------------------------------
def test_rotate_zero_and_full_turn_identity():
    img = Rng(1).uniform((9, 11, 3), 0, 255)
    np.testing.assert_allclose(rotate(img, 0), img, atol=1e-9)
    np.testing.assert_allclose(rotate(img, 360), img, atol=1e-9)


def test_rotate_90_is_transpose_like_and_fills_127():
    img = Rng(2).uniform((5, 5, 1), 0, 255)
    np.testing.assert_allclose(rotate(img, 90)[..., 0], np.rot90(img[..., 0]), atol=1e-9)
    wide = Rng(3).uniform((4, 10, 1), 0, 255)
    assert np.any(rotate(wide, 90) == 127.0)


def test_scale_identity_and_canvas():
    img = Rng(4).uniform((16, 16, 3), 0, 255)
    np.testing.assert_array_equal(scale_jitter(img, 1.0), img)
    assert scale_jitter(img, 0.75).shape == img.shape
    assert scale_jitter(img, 1.25).shape == img.shape
    assert scale_jitter(img, 0.5)[0, 0, 0] == 127.0


def test_center_crop_256_to_224():
    assert center_crop_offsets((256, 256), 224) == (16, 16)
    img = Rng(5).uniform((256, 256, 3), 0, 255)
    np.testing.assert_array_equal(center_crop(img, 224), img[16:240, 16:240])


def test_crop_errors():
    img = np.zeros((10, 10, 3))
    with pytest.raises(UsageError):
        center_crop(img, 11)
    with pytest.raises(UsageError):
        random_crop(img, 12, Rng(0))


def test_training_views_reproducible_in_isolation():
    cfg = AugmentationConfig(crop_size=48, seed=7)
    img = Rng(6).uniform((64, 64, 3), 0, 255)
    a = sample_view(img, cfg, epoch=3, index=11)
    for k in range(5):
        sample_view(img, cfg, epoch=3, index=k)
    np.testing.assert_array_equal(sample_view(img, cfg, epoch=3, index=11), a)
    assert not np.array_equal(sample_view(img, cfg, epoch=4, index=11), a)
    assert a.shape == (48, 48, 3)


def test_eval_view_is_deterministic_center_crop():
    cfg = AugmentationConfig(crop_size=56)
    img = Rng(7).uniform((64, 64, 3), 0, 255)
    np.testing.assert_array_equal(augment_eval(img, cfg), img[4:60, 4:60])
    np.testing.assert_array_equal(sample_view(img, cfg, 0, 0, train=False), img[4:60, 4:60])


def test_augment_train_shapes():
    cfg = AugmentationConfig(crop_size=56)
    out = augment_train(Rng(8).uniform((64, 64, 3), 0, 255), cfg, Rng(1))
    assert out.shape == (56, 56, 3) and np.all(np.isfinite(out))


# ----- manifests ------------------------------------------------------------------------
def _tree(root, classes, per_class):
    for c in range(classes):
        d = root / f"c{c}"
        d.mkdir()
        for i in range(per_class):
            (d / f"{i:03d}.pgm").write_bytes(encode_pgm(np.full((4, 4), c * 10 + i)))


def test_split_counts_examples():
    assert split_counts(10, 0.6) == (6, 4)
    assert split_counts(50, 0.6) == (30, 20)
    assert 80 * split_counts(50, 0.6)[0] == 2400 and 80 * split_counts(50, 0.6)[1] == 1600
    assert split_counts(70, 0.6) == (42, 28)
    assert split_counts(2, 0.99) == (1, 1)


def test_build_manifest_6x10(tmp_path):
    _tree(tmp_path, 6, 10)
    m = build_manifest(tmp_path, 0.6, seed=3)
    assert len(m.split("train")) == 36 and len(m.split("test")) == 24
    for k in range(6):
        assert {r.split for r in m.records if r.class_index == k} == {"train", "test"}
    again = build_manifest(tmp_path, 0.6, seed=3)
    assert again.to_csv() == m.to_csv()
    assert m.to_csv().splitlines()[0] == "path,class_name,class_index,split"
    assert build_manifest(tmp_path, 0.6, seed=4).to_csv() != m.to_csv()


def test_manifest_write_read_round_trip(tmp_path):
    _tree(tmp_path, 3, 4)
    m = build_manifest(tmp_path, 0.5, seed=0)
    m.write(tmp_path / "m.csv")
    back = DatasetManifest.read(tmp_path / "m.csv")
    assert back.records == m.records and back.classes == m.classes
    assert os.path.exists(back.resolve(back.records[0]))
    with open(tmp_path / "m.csv", "rb") as fh:
        assert b"\r\n" not in fh.read()


def test_manifest_errors(tmp_path):
    _tree(tmp_path, 2, 2)
    (tmp_path / "lonely").mkdir()
    (tmp_path / "lonely" / "a.pgm").write_bytes(encode_pgm(np.zeros((4, 4))))
    with pytest.raises(ManifestError, match="lonely"):
        build_manifest(tmp_path, 0.6)
    with pytest.raises(ManifestError):
        DatasetManifest([Record("a", "x", 1, "train")], ["x"])
    with pytest.raises(ManifestError):
        DatasetManifest([Record("a", "x", 0, "train"), Record("a", "x", 0, "test")], ["x"])
    bad = tmp_path / "bad.csv"
    bad.write_text("path,label\n")
    with pytest.raises(ManifestError):
        DatasetManifest.read(bad)


# ----- synthetic textures ---------------------------------------------------------------
def test_synth_counts_and_bytes(tmp_path):
    a = synth_texture_dataset(str(tmp_path / "a"), 4, 70, 64, 20.0, seed=1)
    m = DatasetManifest.read(a)
    assert len(m.records) == 280
    assert len(m.split("train")) == 168 and len(m.split("test")) == 112
    b = synth_texture_dataset(str(tmp_path / "b"), 4, 70, 64, 20.0, seed=1)

    def digest(root):
        h = hashlib.sha256()
        for r in m.records:
            with open(os.path.join(root, r.path), "rb") as fh:
                h.update(fh.read())
        return h.hexdigest()

    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_synth_errors(tmp_path):
    for kwargs in ({"num_classes": 1}, {"image_size": 16}, {"per_class": 1}):
        with pytest.raises(UsageError):
            synth_texture_dataset(str(tmp_path), **kwargs)


def test_noise_free_gratings_differ_only_by_phase():
    a = grating(64, 2, 4, phase=0.3)
    b = grating(64, 2, 4, phase=0.3)
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a <= 255))
    assert abs(a.mean() - 128) < 5 and a.max() - a.min() > 150


def test_lbp_class_separation(texture_set):
    """Class-mean L1 distances exceed 10x the mean distance of images to their class mean."""
    by_class = {}
    for r in texture_set.records:
        d = texture_descriptor(load_image(texture_set.resolve(r))).values
        by_class.setdefault(r.class_index, []).append(d)
    means = {k: np.mean(v, axis=0) for k, v in by_class.items()}
    within = np.mean([np.abs(d - means[k]).sum() for k, v in by_class.items() for d in v])
    between = min(np.abs(means[a] - means[b]).sum()
                  for a in means for b in means if a < b)
    assert between > 10 * within, (between, within)

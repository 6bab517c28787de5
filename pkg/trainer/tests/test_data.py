import json

import numpy as np
import pytest

from osmtrainer.data import (
    AUGMENT_KINDS,
    DatasetError,
    augment_pair,
    batches,
    expand_with_augmentations,
    load_dataset,
    split_sizes,
)
from osmtrainer.osmi import read_osmi, write_osmi

from conftest import make_dataset_tree


def test_split_sizes_basic():
    assert split_sizes(100, (0.8, 0.1, 0.1)) == (80, 10, 10)
    assert split_sizes(60000, (5 / 6, 1 / 12, 1 / 12)) == (50000, 5000, 5000)


def test_split_sizes_rejects_empty():
    with pytest.raises(DatasetError):
        split_sizes(3, (0.9, 0.05, 0.05))
    with pytest.raises(DatasetError):
        split_sizes(100, (0.5, 0.2, 0.2))


def test_load_dataset_splits(mini_manifest):
    data = load_dataset(mini_manifest, (0.8, 0.1, 0.1), seed=0)
    assert len(data.train) == 8
    assert len(data.val) == 1
    assert len(data.test) == 1
    sample = data.train[0]
    assert sample.prelim.shape == (160, 160)
    assert set(np.unique(sample.truth)) <= {0.0, 1.0}


def test_load_dataset_deterministic(mini_manifest):
    a = load_dataset(mini_manifest, seed=3)
    b = load_dataset(mini_manifest, seed=3)
    assert [s.sample_id for s in a.train] == [s.sample_id for s in b.train]
    c = load_dataset(mini_manifest, seed=4)
    assert [s.sample_id for s in a.train] != [s.sample_id for s in c.train]


def test_load_dataset_checksum_mismatch(tmp_path):
    manifest = make_dataset_tree(tmp_path / "ds", count=4)
    target = tmp_path / "ds" / "pairs" / "000001_prelim.osmi"
    raw = bytearray(target.read_bytes())
    raw[-1] ^= 0x1
    target.write_bytes(bytes(raw))
    with pytest.raises(DatasetError):
        load_dataset(manifest)


def test_load_dataset_rejects_bad_version(tmp_path):
    manifest = make_dataset_tree(tmp_path / "ds", count=2)
    doc = json.loads(manifest.read_text())
    doc["format_version"] = 9
    manifest.write_text(json.dumps(doc))
    with pytest.raises(DatasetError):
        load_dataset(manifest)


def test_load_dataset_skips_failed_records(tmp_path):
    manifest = make_dataset_tree(tmp_path / "ds", count=5)
    doc = json.loads(manifest.read_text())
    doc["samples"][0] = {"id": 0, "status": "failed", "error": "x"}
    manifest.write_text(json.dumps(doc))
    data = load_dataset(manifest, (0.5, 0.25, 0.25))
    total = len(data.train) + len(data.val) + len(data.test)
    assert total == 4


def test_augment_involutions():
    rng = np.random.default_rng(0)
    prelim = rng.uniform(size=(160, 160)).astype(np.float32)
    truth = (rng.uniform(size=(160, 160)) > 0.8).astype(np.float32)
    p1, t1 = augment_pair(prelim, truth, "hflip", rng)
    p2, t2 = augment_pair(p1, t1, "hflip", rng)
    np.testing.assert_array_equal(p2, prelim)
    np.testing.assert_array_equal(t2, truth)
    p1, t1 = augment_pair(prelim, truth, "rot90", rng)
    p2, t2 = augment_pair(p1, t1, "rot270", rng)
    np.testing.assert_array_equal(p2, prelim)


def test_augment_zoom_contract():
    rng = np.random.default_rng(1)
    prelim = rng.uniform(size=(160, 160)).astype(np.float32)
    truth = (rng.uniform(size=(160, 160)) > 0.8).astype(np.float32)
    p, t = augment_pair(prelim, truth, "zoom", rng)
    assert p.shape == (160, 160) and t.shape == (160, 160)
    assert set(np.unique(t)) <= {0.0, 1.0}
    assert p.min() >= 0.0 and p.max() <= 1.0


def test_expand_with_augmentations(mini_manifest):
    data = load_dataset(mini_manifest)
    expanded = expand_with_augmentations(data.train, seed=0)
    assert len(expanded) == 6 * len(data.train)


def test_batches_cover_everything(mini_manifest):
    data = load_dataset(mini_manifest)
    rng = np.random.default_rng(0)
    seen = 0
    for prelim, truth in batches(data.train, 3, rng):
        assert prelim.shape[1:] == (160, 160)
        assert prelim.shape == truth.shape
        seen += len(prelim)
    assert seen == len(data.train)


def test_osmi_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    img = rng.uniform(size=(32, 32)).astype(np.float32)
    write_osmi(img, tmp_path / "x.osmi")
    np.testing.assert_array_equal(read_osmi(tmp_path / "x.osmi"), img)
    with pytest.raises(ValueError):
        read_osmi(__file__)

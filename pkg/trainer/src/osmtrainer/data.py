"""Dataset loading: manifest validation, deterministic splits, augmentation.

The manifest is the upstream contract: format_version 1, per-sample records
with file paths and sha256 checksums. Loading verifies every checksum,
keeps the preliminary images as float arrays and the truths as binary
masks, and splits sample ids with a seeded shuffle.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from osmtrainer.osmi import read_osmi

MANIFEST_VERSION = 1
AUGMENT_KINDS = ("hflip", "vflip", "rot90", "rot270", "zoom")
ZOOM_FACTOR = 1.05


class DatasetError(ValueError):
    pass


@dataclass
class Sample:
    sample_id: int
    prelim: np.ndarray   # (H, W) float32 in [0, 1]
    truth: np.ndarray    # (H, W) float32 in {0, 1}


@dataclass
class Splits:
    train: list[Sample]
    val: list[Sample]
    test: list[Sample]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def split_sizes(n: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DatasetError("split fractions must sum to 1")
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) <= 0:
        raise DatasetError(f"empty split for n={n}, fractions={fractions}")
    return n_train, n_val, n_test


def load_dataset(manifest_path: str | Path,
                 fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
                 seed: int = 0,
                 validate: bool = True) -> Splits:
    """Load all pairs, verify checksums, and split deterministically."""
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    if doc.get("format_version") != MANIFEST_VERSION:
        raise DatasetError(f"unsupported manifest version {doc.get('format_version')!r}")
    root = manifest_path.parent
    samples = []
    for rec in doc["samples"]:
        if rec.get("status") != "ok":
            continue
        if validate:
            for key in ("true", "prelim"):
                path = root / rec[key]
                if not path.exists():
                    raise DatasetError(f"missing file {rec[key]}")
                if _sha256(path) != rec["sha256"][key]:
                    raise DatasetError(f"checksum mismatch for {rec[key]}")
        prelim = read_osmi(root / rec["prelim"]).astype(np.float32)
        truth = read_osmi(root / rec["true"]).astype(np.float32)
        truth = (truth >= 0.5).astype(np.float32)   # keep the target binary
        samples.append(Sample(rec["id"], prelim, truth))
    if not samples:
        raise DatasetError("manifest has no usable samples")
    n_train, n_val, _ = split_sizes(len(samples), fractions)
    order = np.random.default_rng(seed).permutation(len(samples))
    shuffled = [samples[i] for i in order]
    return Splits(train=shuffled[:n_train],
                  val=shuffled[n_train:n_train + n_val],
                  test=shuffled[n_train + n_val:])


# -- augmentation (re-implementation of the upstream pair transforms) -----------

def _bilinear_resize(values: np.ndarray, target: int) -> np.ndarray:
    n = values.shape[0]
    coords = (np.arange(target) + 0.5) * n / target - 0.5
    idx = np.clip(np.floor(coords).astype(int), 0, n - 2)
    frac = np.clip(coords - idx, 0.0, 1.0)
    return (values[np.ix_(idx, idx)] * np.outer(1 - frac, 1 - frac)
            + values[np.ix_(idx, idx + 1)] * np.outer(1 - frac, frac)
            + values[np.ix_(idx + 1, idx)] * np.outer(frac, 1 - frac)
            + values[np.ix_(idx + 1, idx + 1)] * np.outer(frac, frac))


def augment_pair(prelim: np.ndarray, truth: np.ndarray, kind: str,
                 rng: np.random.Generator):
    """One of the five shared pair transforms; the truth stays binary."""
    if kind == "hflip":
        return np.fliplr(prelim).copy(), np.fliplr(truth).copy()
    if kind == "vflip":
        return np.flipud(prelim).copy(), np.flipud(truth).copy()
    if kind == "rot90":
        return np.rot90(prelim).copy(), np.rot90(truth).copy()
    if kind == "rot270":
        return np.rot90(prelim, 3).copy(), np.rot90(truth, 3).copy()
    if kind == "zoom":
        size = prelim.shape[0]
        big = int(round(size * ZOOM_FACTOR))
        dx = int(rng.integers(0, big - size + 1))
        dy = int(rng.integers(0, big - size + 1))
        p = _bilinear_resize(prelim.astype(np.float64), big)
        t = _bilinear_resize(truth.astype(np.float64), big)
        p = np.clip(p[dy:dy + size, dx:dx + size], 0.0, 1.0)
        t = (t[dy:dy + size, dx:dx + size] >= 0.5).astype(np.float64)
        return p.astype(prelim.dtype), t.astype(truth.dtype)
    raise ValueError(f"unknown augmentation {kind!r}")


def expand_with_augmentations(samples: list[Sample], seed: int) -> list[Sample]:
    """Append the five transformed copies of every sample (6x total)."""
    rng = np.random.default_rng(seed)
    out = list(samples)
    for sample in samples:
        for kind in AUGMENT_KINDS:
            prelim, truth = augment_pair(sample.prelim, sample.truth, kind, rng)
            out.append(Sample(sample.sample_id, prelim, truth))
    return out


def batches(samples: list[Sample], batch_size: int, rng: np.random.Generator,
            shuffle: bool = True):
    """Yield (prelim, truth) float32 arrays of shape (B, H, W)."""
    order = rng.permutation(len(samples)) if shuffle else np.arange(len(samples))
    for start in range(0, len(samples), batch_size):
        chunk = [samples[i] for i in order[start:start + batch_size]]
        prelim = np.stack([s.prelim for s in chunk])
        truth = np.stack([s.truth for s in chunk])
        yield prelim, truth

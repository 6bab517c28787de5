import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from osmtrainer.osmi import write_osmi


def make_dataset_tree(root: Path, count: int, size: int = 160, seed: int = 0):
    """Synthetic dataset tree following the manifest/OSMI contract."""
    rng = np.random.default_rng(seed)
    pairs = root / "pairs"
    pairs.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(count):
        stem = f"{i:06d}"
        cx, cy = rng.uniform(40, size - 40, size=2)
        r = rng.uniform(10, 30)
        yy, xx = np.mgrid[0:size, 0:size]
        truth = (((xx - cx) ** 2 + (yy - cy) ** 2) <= r * r).astype(np.float32)
        blur = truth + 0.2 * rng.standard_normal((size, size)).astype(np.float32)
        prelim = np.clip(blur, 0.0, 1.0).astype(np.float32)
        true_path = pairs / f"{stem}_true.osmi"
        prelim_path = pairs / f"{stem}_prelim.osmi"
        meta_path = pairs / f"{stem}_meta.json"
        write_osmi(truth, true_path)
        write_osmi(prelim, prelim_path)
        meta_path.write_text(json.dumps({"id": i}))
        records.append({
            "id": i, "status": "ok",
            "true": f"pairs/{stem}_true.osmi",
            "prelim": f"pairs/{stem}_prelim.osmi",
            "meta": f"pairs/{stem}_meta.json",
            "sha256": {
                "true": hashlib.sha256(true_path.read_bytes()).hexdigest(),
                "prelim": hashlib.sha256(prelim_path.read_bytes()).hexdigest(),
                "meta": hashlib.sha256(meta_path.read_bytes()).hexdigest(),
            }})
    manifest = {"format_version": 1, "spec": {"count": count},
                "samples": records}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return root / "manifest.json"


@pytest.fixture()
def mini_manifest(tmp_path):
    return make_dataset_tree(tmp_path / "ds", count=10)

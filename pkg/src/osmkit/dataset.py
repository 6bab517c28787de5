"""Training-pair factory: random scenes to (true image, preliminary image) pairs.

Each sample runs the full pipeline: draw a scene, solve the direct problem,
synthesize Cauchy data on the measurement circle, optionally add noise,
evaluate the normalized indicator, upsample to the image contract, and
rasterize the ground truth.  Every sample derives its own generator from
(master seed, sample id), so outputs are byte-reproducible and removing a
sample never perturbs the others.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from osmkit import forward, imaging, scene as scene_mod
from osmkit.forward import CauchyData, SolverError
from osmkit.imageio import write_osmi, write_png_preview, read_osmi
from osmkit.scene import PixelImage, rasterize

MANIFEST_VERSION = 1
AUGMENT_KINDS = ("hflip", "vflip", "rot90", "rot270", "zoom")
ZOOM_FACTOR = 1.05


@dataclass
class DatasetSpec:
    """Recipe for one dataset tree; everything downstream is derived from it."""

    count: int
    out_dir: str
    master_seed: int = 0
    one_ellipse_fraction: float = 0.5
    thetas_deg: tuple[float, ...] = (90.0, 45.0)
    theta_counts: tuple[int, ...] | None = None   # None: split evenly, rest to first
    k: float = 6.0
    contrast: complex = 1.0 + 0.0j
    noise_delta: float = 0.0
    curve_radius: float = 100.0
    curve_points: int = 32
    solver_n: int = 256
    image_size: int = 160
    sampling_n: int = 64
    rho: int = 2
    write_png: bool = True

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0.0 <= self.one_ellipse_fraction <= 1.0:
            raise ValueError("one_ellipse_fraction must lie in [0, 1]")
        if self.noise_delta < 0:
            raise ValueError("noise delta must be >= 0")
        if self.theta_counts is None:
            base = self.count // len(self.thetas_deg)
            counts = [base] * len(self.thetas_deg)
            counts[0] += self.count - base * len(self.thetas_deg)
            self.theta_counts = tuple(counts)
        if len(self.theta_counts) != len(self.thetas_deg):
            raise ValueError("theta_counts must match thetas_deg")
        if sum(self.theta_counts) != self.count:
            raise ValueError("theta counts must sum to count")

    def theta_for(self, sample_id: int) -> float:
        acc = 0
        for theta, cnt in zip(self.thetas_deg, self.theta_counts):
            acc += cnt
            if sample_id < acc:
                return theta
        raise IndexError(sample_id)

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["contrast"] = [self.contrast.real, self.contrast.imag]
        doc["thetas_deg"] = list(self.thetas_deg)
        doc["theta_counts"] = list(self.theta_counts)
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DatasetSpec":
        doc = dict(doc)
        if "contrast" in doc and isinstance(doc["contrast"], (list, tuple)):
            re, im = doc["contrast"]
            doc["contrast"] = complex(re, im)
        for key in ("thetas_deg", "theta_counts"):
            if key in doc and doc[key] is not None:
                doc[key] = tuple(doc[key])
        return cls(**doc)


@dataclass
class SamplePair:
    sample_id: int
    true_image: PixelImage
    prelim_image: PixelImage
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for img in (self.true_image, self.prelim_image):
            if img.width != img.height:
                raise ValueError("sample images must be square")
        if self.true_image.width != self.prelim_image.width:
            raise ValueError("both images of a pair must have the same size")


# -- noise -------------------------------------------------------------------

def add_noise(data: CauchyData, delta: float, rng: np.random.Generator) -> CauchyData:
    """Additive complex Gaussian noise with exact relative L2 size delta.

    us and dus are perturbed independently; the noise vector is rescaled so
    that ||noisy - clean||_2 / ||clean||_2 equals delta exactly.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta == 0:
        return CauchyData(curve=data.curve, us=data.us.copy(),
                          dus=data.dus.copy(), k=data.k)

    def perturb(vec: np.ndarray) -> np.ndarray:
        zeta = rng.standard_normal(len(vec)) + 1j * rng.standard_normal(len(vec))
        scale = delta * np.linalg.norm(vec) / np.linalg.norm(zeta)
        return vec + scale * zeta

    return CauchyData(curve=data.curve, us=perturb(data.us),
                      dus=perturb(data.dus), k=data.k)


# -- augmentation ---------------------------------------------------------------

def _bilinear_resize(values: np.ndarray, target: int) -> np.ndarray:
    """Edge-clamped bilinear resampling between pixel-center lattices."""
    n = values.shape[0]
    coords = (np.arange(target) + 0.5) * n / target - 0.5
    idx = np.clip(np.floor(coords).astype(int), 0, n - 2)
    frac = np.clip(coords - idx, 0.0, 1.0)
    return (values[np.ix_(idx, idx)] * np.outer(1 - frac, 1 - frac)
            + values[np.ix_(idx, idx + 1)] * np.outer(1 - frac, frac)
            + values[np.ix_(idx + 1, idx)] * np.outer(frac, 1 - frac)
            + values[np.ix_(idx + 1, idx + 1)] * np.outer(frac, frac))


def augment(pair: SamplePair, kind: str, rng: np.random.Generator) -> SamplePair:
    """Apply one of the five pair transforms; zoom shares its crop offset.

    The zoom upscales by 5% bilinearly and crops back at a random offset;
    the true image is re-thresholded at 0.5 to stay binary.
    """
    if kind not in AUGMENT_KINDS:
        raise ValueError(f"unknown augmentation {kind!r}")
    size = pair.true_image.width
    true_vals = pair.true_image.values
    prelim_vals = pair.prelim_image.values
    if kind == "hflip":
        new = (np.fliplr(true_vals), np.fliplr(prelim_vals))
    elif kind == "vflip":
        new = (np.flipud(true_vals), np.flipud(prelim_vals))
    elif kind == "rot90":
        new = (np.rot90(true_vals, 1), np.rot90(prelim_vals, 1))
    elif kind == "rot270":
        new = (np.rot90(true_vals, 3), np.rot90(prelim_vals, 3))
    else:
        big = int(round(size * ZOOM_FACTOR))
        dx = int(rng.integers(0, big - size + 1))
        dy = int(rng.integers(0, big - size + 1))
        t_big = _bilinear_resize(true_vals, big)
        p_big = _bilinear_resize(prelim_vals, big)
        t_crop = (t_big[dy:dy + size, dx:dx + size] >= 0.5).astype(np.float64)
        p_crop = np.clip(p_big[dy:dy + size, dx:dx + size], 0.0, 1.0)
        new = (t_crop, p_crop)
    extent = pair.true_image.extent
    meta = dict(pair.meta)
    meta.setdefault("augmentations", []).append(kind)
    return SamplePair(
        sample_id=pair.sample_id,
        true_image=PixelImage(size, size, np.ascontiguousarray(new[0]), extent),
        prelim_image=PixelImage(size, size, np.ascontiguousarray(new[1]), extent),
        meta=meta)


# -- generation -----------------------------------------------------------------

def _sample_rng(master_seed: int, sample_id: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(sample_id,)))


def make_sample(spec: DatasetSpec, sample_id: int) -> SamplePair:
    """Run the full forward-and-image pipeline for one sample id."""
    rng = _sample_rng(spec.master_seed, sample_id)
    family = (scene_mod.ONE_ELLIPSE
              if rng.uniform() < spec.one_ellipse_fraction
              else scene_mod.TWO_ELLIPSE)
    sc = scene_mod.random_scene(rng, family, contrast=spec.contrast)
    theta_deg = spec.theta_for(sample_id)
    theta = math.radians(theta_deg)

    grid = forward.default_grid(spec.solver_n, sc)
    total = forward.ls_solve(grid, spec.k, theta)
    curve = forward.circle_curve(spec.curve_radius, spec.curve_points)
    data = forward.synthesize_cauchy(total, grid, curve)
    data = add_noise(data, spec.noise_delta, rng)

    sgrid = imaging.SamplingGrid(extent=sc.domain, n=spec.sampling_n)
    params = imaging.IndicatorParams(rho=spec.rho, dimension=2, normalize=True)
    result = imaging.indicator_nearfield(data, sgrid, params)
    prelim = imaging.upsample_bilinear(result, spec.image_size)
    prelim.values = np.clip(prelim.values, 0.0, 1.0)
    # the grid peak can fall between pixel centers; restore max = 1 exactly
    peak = prelim.values.max()
    if peak > 0:
        prelim.values /= peak
    truth = rasterize(sc, spec.image_size)

    meta = {
        "id": sample_id,
        "family": family,
        "theta_deg": theta_deg,
        "k": spec.k,
        "noise_delta": spec.noise_delta,
        "master_seed": spec.master_seed,
        "degenerate": result.degenerate,
        "solver_iterations": total.iterations,
        "scene": json.loads(scene_mod.scene_to_json(sc)),
    }
    return SamplePair(sample_id=sample_id, true_image=truth,
                      prelim_image=prelim, meta=meta)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def generate(spec: DatasetSpec) -> dict:
    """Write the dataset tree and return the manifest (written last)."""
    out = Path(spec.out_dir)
    pairs_dir = out / "pairs"
    pairs_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for sample_id in range(spec.count):
        stem = f"{sample_id:06d}"
        try:
            pair = make_sample(spec, sample_id)
        except SolverError as err:
            records.append({"id": sample_id, "status": "failed",
                            "error": str(err)})
            continue
        true_path = pairs_dir / f"{stem}_true.osmi"
        prelim_path = pairs_dir / f"{stem}_prelim.osmi"
        meta_path = pairs_dir / f"{stem}_meta.json"
        write_osmi(pair.true_image, true_path)
        write_osmi(pair.prelim_image, prelim_path)
        meta_path.write_text(json.dumps(pair.meta, indent=2, sort_keys=True))
        if spec.write_png:
            write_png_preview(pair.true_image, pairs_dir / f"{stem}_true.png")
            write_png_preview(pair.prelim_image, pairs_dir / f"{stem}_prelim.png")
        records.append({
            "id": sample_id,
            "status": "ok",
            "true": f"pairs/{stem}_true.osmi",
            "prelim": f"pairs/{stem}_prelim.osmi",
            "meta": f"pairs/{stem}_meta.json",
            "sha256": {
                "true": _sha256(true_path),
                "prelim": _sha256(prelim_path),
                "meta": _sha256(meta_path),
            },
        })
    manifest = {
        "format_version": MANIFEST_VERSION,
        "spec": spec.to_json_dict(),
        "samples": records,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def load_manifest(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != MANIFEST_VERSION:
        raise ValueError("unsupported manifest version")
    return doc


def validate_manifest(path: str | Path) -> list[str]:
    """Return a list of problems (missing files, checksum mismatches)."""
    path = Path(path)
    doc = load_manifest(path)
    root = path.parent
    problems = []
    for rec in doc["samples"]:
        if rec.get("status") != "ok":
            continue
        for key in ("true", "prelim", "meta"):
            fp = root / rec[key]
            if not fp.exists():
                problems.append(f"missing {rec[key]}")
            elif _sha256(fp) != rec["sha256"][key]:
                problems.append(f"checksum mismatch {rec[key]}")
    return problems


def load_pair(manifest_path: str | Path, record: dict) -> SamplePair:
    root = Path(manifest_path).parent
    true_img = read_osmi(root / record["true"])
    prelim_img = read_osmi(root / record["prelim"])
    meta = json.loads((root / record["meta"]).read_text())
    return SamplePair(sample_id=record["id"], true_image=true_img,
                      prelim_image=prelim_img, meta=meta)

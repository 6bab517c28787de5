"""Inference: preliminary OSMI image in, sigmoid map and binary mask out."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from osmtrainer.model import to_input
from osmtrainer.osmi import read_osmi, write_mask_png, write_osmi

THRESHOLD = 0.5


def predict_array(model, prelim: np.ndarray) -> np.ndarray:
    """Sigmoid map for one (H, W) preliminary image."""
    expected = model.spec.input_size
    if prelim.shape != (expected, expected):
        raise ValueError(
            f"input is {prelim.shape}, model expects {(expected, expected)}")
    with torch.inference_mode():
        pred = model(to_input(prelim[None]))[0, 0]
    return pred.numpy()


def predict_file(model, input_path: str | Path, out_dir: str | Path) -> dict:
    """Write <stem>_pred.osmi (sigmoid map) and <stem>_mask.png (threshold 0.5)."""
    input_path = Path(input_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prelim = read_osmi(input_path)
    pred = predict_array(model, prelim)
    osmi_path = out / f"{input_path.stem}_pred.osmi"
    png_path = out / f"{input_path.stem}_mask.png"
    write_osmi(pred, osmi_path)
    write_mask_png(pred >= THRESHOLD, png_path)
    return {"pred": str(osmi_path), "mask": str(png_path)}

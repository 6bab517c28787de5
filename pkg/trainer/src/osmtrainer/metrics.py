"""Loss and accuracy for binary segmentation.

The loss is the summed (not averaged) pixelwise binary cross-entropy per
pair, with batch losses summing over pairs; epoch reporting averages per
pair. Accuracy is the fraction of pixels whose 0.5-thresholded prediction
matches the truth, with the tie 0.5 rounding to 1.
"""

from __future__ import annotations

import numpy as np
import torch

EPS = 1e-7


def _as_tensor(x) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x
    return torch.from_numpy(np.asarray(x, dtype=np.float64))


def loss_sum(y_true, y_pred) -> torch.Tensor:
    """Summed pixelwise binary cross-entropy over all pixels (and pairs).

    Accumulated in float64: the sum spans 160^2 pixels per pair and the
    clip level is 1e-7, both beyond float32 resolution.
    """
    t = _as_tensor(y_true)
    p = _as_tensor(y_pred)
    if t.shape != p.shape:
        raise ValueError(f"shape mismatch: {tuple(t.shape)} vs {tuple(p.shape)}")
    t = t.double()
    p = torch.clamp(p.double(), EPS, 1.0 - EPS)
    return -(t * torch.log(p) + (1.0 - t) * torch.log(1.0 - p)).sum()


def logits_loss_sum(y_true, logits) -> torch.Tensor:
    """The same summed cross-entropy evaluated from pre-sigmoid logits.

    Equals loss_sum(y, sigmoid(logits)) in exact arithmetic but stays
    finite and keeps the gradient sigmoid(x) - y alive where float32
    sigmoids saturate; clipped probabilities stall there with exactly zero
    gradient, which freezes training at aggressive learning rates.
    """
    t = _as_tensor(y_true).double()
    x = _as_tensor(logits).double()
    if t.shape != x.shape:
        raise ValueError(f"shape mismatch: {tuple(t.shape)} vs {tuple(x.shape)}")
    return (torch.clamp(x, min=0) - x * t + torch.log1p(torch.exp(-torch.abs(x)))).sum()


def accuracy(y_true, y_pred) -> float:
    """Fraction of matching pixels after thresholding at 0.5 (0.5 -> 1)."""
    t = np.asarray(y_true.detach().cpu() if isinstance(y_true, torch.Tensor)
                   else y_true)
    p = np.asarray(y_pred.detach().cpu() if isinstance(y_pred, torch.Tensor)
                   else y_pred)
    if t.shape != p.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {p.shape}")
    return float(np.mean((p >= 0.5) == (t >= 0.5)))

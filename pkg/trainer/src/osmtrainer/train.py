"""Training loop: Adam with a reduce-on-plateau learning-rate schedule.

The learning rate starts at 1e-2 and divides by 10 whenever five epochs
pass with neither the validation loss decreasing nor the validation
accuracy increasing, down to a floor of 1e-6. The best-validation-loss
checkpoint is retained; per-epoch history goes to JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np
import torch

from osmtrainer.data import Splits, batches, expand_with_augmentations
from osmtrainer.metrics import accuracy, logits_loss_sum, loss_sum
from osmtrainer.model import ModelSpec, build_model, to_input


class TrainingDivergedError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    initial_lr: float = 1e-2
    lr_factor: float = 0.1
    lr_floor: float = 1e-6
    plateau_patience: int = 5
    seed: int = 0
    augment: bool = False

    def __post_init__(self):
        if not self.lr_floor <= self.initial_lr <= 1e-2:
            raise ValueError("learning rate must lie in [lr_floor, 1e-2]")


class PlateauSchedule:
    """Divide the rate by `factor` after `patience` epochs without either
    the loss improving (decreasing) or the accuracy improving (increasing)."""

    def __init__(self, initial_lr: float, factor: float = 0.1,
                 patience: int = 5, floor: float = 1e-6):
        self.lr = initial_lr
        self.factor = factor
        self.patience = patience
        self.floor = floor
        self.best_loss = math.inf
        self.best_acc = -math.inf
        self.wait = 0

    def step(self, val_loss: float, val_acc: float) -> float:
        improved = False
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            improved = True
        if val_acc > self.best_acc:
            self.best_acc = val_acc
            improved = True
        if improved:
            self.wait = 0
        else:
            self.wait += 1
            if self.wait >= self.patience:
                self.lr = max(self.lr * self.factor, self.floor)
                self.wait = 0
        return self.lr


@dataclass
class TrainResult:
    history: list[dict]
    checkpoint_path: str
    history_path: str
    best_epoch: int
    best_val_loss: float
    final_val_accuracy: float


def evaluate(model, samples, batch_size: int):
    """(mean per-pair loss, pixel accuracy) over a sample list."""
    model.eval()
    total_loss = 0.0
    correct = 0
    pixels = 0
    rng = np.random.default_rng(0)
    with torch.inference_mode():
        for prelim, truth in batches(samples, batch_size, rng, shuffle=False):
            logits = model.forward_logits(to_input(prelim))[:, 0]
            t = torch.from_numpy(truth)
            total_loss += float(logits_loss_sum(t, logits))
            match = (logits >= 0.0) == (t >= 0.5)
            correct += int(match.sum())
            pixels += match.numel()
    return total_loss / len(samples), correct / pixels


def train(spec: ModelSpec, config: TrainConfig, data: Splits,
          out_dir: str | Path) -> TrainResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    model = build_model(spec)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.initial_lr)
    schedule = PlateauSchedule(config.initial_lr, config.lr_factor,
                               config.plateau_patience, config.lr_floor)
    train_samples = data.train
    if config.augment:
        train_samples = expand_with_augmentations(train_samples, config.seed)

    history: list[dict] = []
    checkpoint_path = out / "checkpoint.pt"
    history_path = out / "history.json"
    best_val_loss = math.inf
    best_epoch = -1
    val_acc = 0.0

    for epoch in range(config.epochs):
        model.train()
        rng = np.random.default_rng(np.random.SeedSequence(
            config.seed, spawn_key=(epoch,)))
        epoch_loss = 0.0
        epoch_correct = 0
        epoch_pixels = 0
        for prelim, truth in batches(train_samples, config.batch_size, rng):
            optimizer.zero_grad()
            logits = model.forward_logits(to_input(prelim))[:, 0]
            t = torch.from_numpy(truth)
            loss = logits_loss_sum(t, logits)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    "non-finite training loss",
                    {"epoch": epoch, "lr": schedule.lr,
                     "history": history})
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            with torch.no_grad():
                match = (logits >= 0.0) == (t >= 0.5)
                epoch_correct += int(match.sum())
                epoch_pixels += match.numel()

        val_loss, val_acc = evaluate(model, data.val, config.batch_size)
        record = {
            "epoch": epoch,
            "lr": schedule.lr,
            "train_loss": epoch_loss / len(train_samples),
            "train_accuracy": epoch_correct / epoch_pixels,
            "val_loss": val_loss,
            "val_accuracy": val_acc,
        }
        history.append(record)
        history_path.write_text(json.dumps(history, indent=2))
        if val_loss < best_val_loss:
            best_val_loss = val_loss
            best_epoch = epoch
            torch.save({"state_dict": model.state_dict(),
                        "model_spec": asdict(spec),
                        "train_config": asdict(config),
                        "epoch": epoch,
                        "val_loss": val_loss,
                        "val_accuracy": val_acc}, checkpoint_path)
        new_lr = schedule.step(val_loss, val_acc)
        if new_lr != optimizer.param_groups[0]["lr"]:
            for group in optimizer.param_groups:
                group["lr"] = new_lr

    return TrainResult(history=history,
                       checkpoint_path=str(checkpoint_path),
                       history_path=str(history_path),
                       best_epoch=best_epoch,
                       best_val_loss=best_val_loss,
                       final_val_accuracy=val_acc)


def load_checkpoint(path: str | Path):
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    spec = ModelSpec(**{k: tuple(v) if isinstance(v, list) else v
                        for k, v in payload["model_spec"].items()})
    model = build_model(spec)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload

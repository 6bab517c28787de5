"""Command line: train on a dataset manifest, predict on OSMI images."""

from __future__ import annotations

import json
from pathlib import Path

import click

from osmtrainer.data import load_dataset
from osmtrainer.model import ModelSpec
from osmtrainer.predict import predict_file
from osmtrainer.train import TrainConfig, load_checkpoint, train


@click.group()
def main():
    """Segmentation trainer for sampling-method preliminary images."""


@main.command(name="train")
@click.option("--manifest", required=True, type=click.Path(exists=True),
              help="Dataset manifest JSON.")
@click.option("--epochs", type=int, default=10, help="Training epochs [1].")
@click.option("--batch-size", type=int, default=32, help="Batch size [pairs].")
@click.option("--lr", type=float, default=1e-2, help="Initial learning rate [1].")
@click.option("--seed", type=int, default=0, help="Split/initialization seed [1].")
@click.option("--augment/--no-augment", default=False,
              help="Expand training pairs with the five transforms.")
@click.option("--train-frac", type=float, default=0.8, help="Training fraction [1].")
@click.option("--val-frac", type=float, default=0.1, help="Validation fraction [1].")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory (checkpoint, history, report).")
def train_cmd(manifest, epochs, batch_size, lr, seed, augment,
              train_frac, val_frac, out_dir):
    """Train the segmentation network on (preliminary, true) pairs."""
    fractions = (train_frac, val_frac, 1.0 - train_frac - val_frac)
    data = load_dataset(manifest, fractions, seed)
    config = TrainConfig(epochs=epochs, batch_size=batch_size, initial_lr=lr,
                         seed=seed, augment=augment)
    result = train(ModelSpec(), config, data, out_dir)
    report = {
        "manifest": str(manifest),
        "splits": {"train": len(data.train), "val": len(data.val),
                   "test": len(data.test)},
        "config": {"epochs": epochs, "batch_size": batch_size, "lr": lr,
                   "seed": seed, "augment": augment,
                   "input_channels": "grayscale replicated to 3"},
        "determinism": ("splits and saved formats are seed-deterministic; "
                        "history is reproducible up to torch threading and "
                        "backend floating-point modes"),
        "best_epoch": result.best_epoch,
        "best_val_loss": result.best_val_loss,
        "final_val_accuracy": result.final_val_accuracy,
        "checkpoint": result.checkpoint_path,
    }
    (Path(out_dir) / "run_report.json").write_text(json.dumps(report, indent=2))
    click.echo(f"best epoch {result.best_epoch}: val_loss={result.best_val_loss:.4f} "
               f"val_acc={result.final_val_accuracy:.4f}")
    click.echo(f"checkpoint: {result.checkpoint_path}")


@main.command(name="predict")
@click.option("--checkpoint", required=True, type=click.Path(exists=True),
              help="Checkpoint file from `train`.")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Preliminary image (OSMI).")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory.")
def predict_cmd(checkpoint, input_path, out_dir):
    """Predict a mask for one preliminary image."""
    model, _ = load_checkpoint(checkpoint)
    paths = predict_file(model, input_path, out_dir)
    click.echo(f"wrote {paths['pred']} and {paths['mask']}")


if __name__ == "__main__":
    main()

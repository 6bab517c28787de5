"""Depthwise-separable encoder/decoder segmentation network.

Entry convolution at stride 2, three encoder stages of two separable
convolutions with batch norm and a strided 1x1 projection shortcut, four
decoder stages of two transposed convolutions with an upsampled projection
shortcut, and a single-channel sigmoid head. The grayscale input is
replicated to three channels by the data path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn


@dataclass(frozen=True)
class ModelSpec:
    input_size: int = 160
    in_channels: int = 3
    entry_filters: int = 32
    encoder_filters: tuple[int, ...] = (64, 128, 256)
    decoder_filters: tuple[int, ...] = (256, 128, 64, 32)

    def __post_init__(self):
        if len(self.decoder_filters) != len(self.encoder_filters) + 1:
            raise ValueError("decoder must undo the entry stride and each "
                             "encoder downsampling")
        if self.input_size % 2 ** len(self.decoder_filters):
            raise ValueError("input size must be divisible by the total stride")


class SeparableConv(nn.Module):
    def __init__(self, cin: int, cout: int):
        super().__init__()
        self.depthwise = nn.Conv2d(cin, cin, 3, padding=1, groups=cin, bias=False)
        self.pointwise = nn.Conv2d(cin, cout, 1, bias=False)

    def forward(self, x):
        return self.pointwise(self.depthwise(x))


class EncoderBlock(nn.Module):
    def __init__(self, cin: int, cout: int):
        super().__init__()
        self.sep1 = SeparableConv(cin, cout)
        self.bn1 = nn.BatchNorm2d(cout)
        self.sep2 = SeparableConv(cout, cout)
        self.bn2 = nn.BatchNorm2d(cout)
        self.pool = nn.MaxPool2d(3, stride=2, padding=1)
        self.shortcut = nn.Conv2d(cin, cout, 1, stride=2)

    def forward(self, x):
        y = self.bn1(self.sep1(torch.relu(x)))
        y = self.bn2(self.sep2(torch.relu(y)))
        return self.pool(y) + self.shortcut(x)


class DecoderBlock(nn.Module):
    def __init__(self, cin: int, cout: int):
        super().__init__()
        self.tconv1 = nn.ConvTranspose2d(cin, cout, 3, padding=1)
        self.bn1 = nn.BatchNorm2d(cout)
        self.tconv2 = nn.ConvTranspose2d(cout, cout, 3, padding=1)
        self.bn2 = nn.BatchNorm2d(cout)
        self.up = nn.Upsample(scale_factor=2, mode="nearest")
        self.shortcut = nn.Conv2d(cin, cout, 1)

    def forward(self, x):
        y = self.bn1(self.tconv1(torch.relu(x)))
        y = self.bn2(self.tconv2(torch.relu(y)))
        return self.up(y) + self.up(self.shortcut(x))


class SegmentationNet(nn.Module):
    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.entry = nn.Sequential(
            nn.Conv2d(spec.in_channels, spec.entry_filters, 3, stride=2, padding=1),
            nn.BatchNorm2d(spec.entry_filters),
            nn.ReLU())
        blocks = []
        cin = spec.entry_filters
        for f in spec.encoder_filters:
            blocks.append(EncoderBlock(cin, f))
            cin = f
        self.encoder = nn.ModuleList(blocks)
        blocks = []
        for f in spec.decoder_filters:
            blocks.append(DecoderBlock(cin, f))
            cin = f
        self.decoder = nn.ModuleList(blocks)
        self.head = nn.Conv2d(cin, 1, 3, padding=1)

    def forward_logits(self, x):
        x = self.entry(x)
        for block in self.encoder:
            x = block(x)
        for block in self.decoder:
            x = block(x)
        return self.head(x)

    def forward(self, x):
        return torch.sigmoid(self.forward_logits(x))


def build_model(spec: ModelSpec = ModelSpec(), seed: int | None = None) -> SegmentationNet:
    if seed is not None:
        torch.manual_seed(seed)
    return SegmentationNet(spec)


def to_input(prelim: np.ndarray) -> torch.Tensor:
    """(B, H, W) grayscale batch -> (B, 3, H, W) float tensor."""
    arr = np.asarray(prelim, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None]
    tensor = torch.from_numpy(arr).unsqueeze(1)
    return tensor.repeat(1, 3, 1, 1)

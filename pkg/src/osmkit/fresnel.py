"""Fresnel Institute experimental file ingestion and preprocessing.

The `.exp` files are whitespace-separated numeric tables: transmitter angle,
receiver angle, frequency in GHz, and Re/Im pairs of the measured total and
incident fields (column order configurable).  Preprocessing subtracts the
incident field, places receivers on the measurement circle rescaled by
40 mm = 1 length unit (radius 760 mm -> 19), and converts the frequency to
the wave number in rescaled units.  The measured arcs carry no normal
derivative, so imaging uses the derivative-free indicator variant.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from osmkit import imaging
from osmkit.forward import MeasurementCurve, arc_curve
from osmkit.imaging import ImagingResult, IndicatorParams, SamplingGrid
from osmkit.scene import PixelImage

SPEED_OF_LIGHT_M_PER_S = 2.99792458e8
UNIT_LENGTH_M = 0.04            # 40 mm = 1 unit
CIRCLE_RADIUS_UNITS = 0.76 / UNIT_LENGTH_M   # 760 mm -> 19

# column -> field mapping; values are 0-based column indices
DEFAULT_COLUMNS = {
    "tx_deg": 0,
    "rx_deg": 1,
    "freq_ghz": 2,
    "total_re": 3,
    "total_im": 4,
    "inc_re": 5,
    "inc_im": 6,
}


class FresnelParseError(ValueError):
    pass


@dataclass(frozen=True)
class FresnelRecord:
    tx_deg: float
    rx_deg: float
    freq_ghz: float
    total: complex
    incident: complex

    def __post_init__(self):
        if not self.freq_ghz > 0:
            raise ValueError("frequency must be positive")
        for value in (self.tx_deg, self.rx_deg):
            if not math.isfinite(value):
                raise ValueError("angles must be finite")


@dataclass
class FresnelSet:
    records: list[FresnelRecord]
    source_name: str = ""
    diagnostics: list[str] = field(default_factory=list)

    @property
    def tx_angles(self) -> np.ndarray:
        return np.unique([r.tx_deg for r in self.records])

    @property
    def rx_angles(self) -> np.ndarray:
        return np.unique([r.rx_deg for r in self.records])

    @property
    def frequencies(self) -> np.ndarray:
        return np.unique([r.freq_ghz for r in self.records])

    @property
    def ragged(self) -> bool:
        expected = len(self.tx_angles) * len(self.rx_angles) * len(self.frequencies)
        return len(self.records) != expected


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def parse(source, column_map: dict | None = None, strict: bool = True,
          name: str = "") -> FresnelSet:
    """Parse an .exp stream; header lines start with '#' or a non-numeric token.

    Malformed data lines are collected into diagnostics; in strict mode any
    malformed line raises with its line number.
    """
    columns = dict(DEFAULT_COLUMNS if column_map is None else column_map)
    needed = max(columns.values()) + 1
    if isinstance(source, (str, bytes)):
        source = io.StringIO(source.decode() if isinstance(source, bytes) else source)
    records = []
    diagnostics = []
    any_line = False
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        any_line = True
        tokens = stripped.split()
        if stripped.startswith("#") or not _looks_numeric(tokens[0]):
            continue   # header / comment
        if len(tokens) < needed:
            diagnostics.append(
                f"line {lineno}: expected at least {needed} columns, got {len(tokens)}")
            continue
        try:
            values = {key: float(tokens[idx]) for key, idx in columns.items()}
        except ValueError as err:
            diagnostics.append(f"line {lineno}: {err}")
            continue
        records.append(FresnelRecord(
            tx_deg=values["tx_deg"],
            rx_deg=values["rx_deg"],
            freq_ghz=values["freq_ghz"],
            total=complex(values["total_re"], values["total_im"]),
            incident=complex(values["inc_re"], values["inc_im"])))
    if not any_line:
        raise FresnelParseError(f"{name or 'stream'}: empty input")
    if strict and diagnostics:
        raise FresnelParseError(
            f"{name or 'stream'}: {len(diagnostics)} malformed line(s): "
            + "; ".join(diagnostics[:5]))
    return FresnelSet(records=records, source_name=name, diagnostics=diagnostics)


def serialize(dataset: FresnelSet, column_map: dict | None = None) -> str:
    """Write records back to text at 9 significant digits (round-trip safe)."""
    columns = dict(DEFAULT_COLUMNS if column_map is None else column_map)
    width = max(columns.values()) + 1
    lines = ["# tx_deg rx_deg freq_ghz total_re total_im inc_re inc_im"]
    for rec in dataset.records:
        row = [""] * width
        row[columns["tx_deg"]] = f"{rec.tx_deg:.9g}"
        row[columns["rx_deg"]] = f"{rec.rx_deg:.9g}"
        row[columns["freq_ghz"]] = f"{rec.freq_ghz:.9g}"
        row[columns["total_re"]] = f"{rec.total.real:.9g}"
        row[columns["total_im"]] = f"{rec.total.imag:.9g}"
        row[columns["inc_re"]] = f"{rec.incident.real:.9g}"
        row[columns["inc_im"]] = f"{rec.incident.imag:.9g}"
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def wave_number(freq_ghz: float) -> float:
    """Wave number in rescaled units: 2 pi f / c times 40 mm."""
    return 2.0 * math.pi * freq_ghz * 1e9 / SPEED_OF_LIGHT_M_PER_S * UNIT_LENGTH_M


def to_scattered(dataset: FresnelSet, freq_ghz: float, tx_deg: float):
    """Scattered field on the receiver arc for one frequency and transmitter.

    Returns (curve, us, k): receivers on the rescaled circle at their stated
    angles with rectangle-rule arc weights, u_sc = total - incident, and the
    wave number in rescaled units.
    """
    chosen = [r for r in dataset.records
              if abs(r.freq_ghz - freq_ghz) < 1e-9 and abs(r.tx_deg - tx_deg) < 1e-9]
    if not chosen:
        raise LookupError(
            f"no records at {freq_ghz} GHz, transmitter {tx_deg} deg")
    chosen.sort(key=lambda r: r.rx_deg)
    angles = np.array([r.rx_deg for r in chosen])
    us = np.array([r.total - r.incident for r in chosen])
    curve = arc_curve(CIRCLE_RADIUS_UNITS, angles)
    return curve, us, wave_number(freq_ghz)


def image_fresnel(dataset: FresnelSet, freq_ghz: float, tx_deg: float,
                  grid: SamplingGrid | None = None,
                  params: IndicatorParams = IndicatorParams(),
                  image_size: int = 160) -> tuple[ImagingResult, PixelImage]:
    """Normalized derivative-free indicator image from the measured arc.

    Returns both the sampling-grid result and its bilinear upsampling to the
    image contract (image_size square, max 1 unless degenerate).
    """
    grid = grid or SamplingGrid(extent=(-2.0, 2.0), n=64)
    curve, us, k = to_scattered(dataset, freq_ghz, tx_deg)
    result = imaging.indicator_farfield(curve, us, k, grid, params)
    result.provenance.update({
        "source": dataset.source_name,
        "freq_ghz": freq_ghz,
        "tx_deg": tx_deg,
        "derivative_free": True,
    })
    image = imaging.upsample_bilinear(result, image_size)
    image.values = np.clip(image.values, 0.0, 1.0)
    peak = image.values.max()
    if peak > 0:
        image.values /= peak
    return result, image

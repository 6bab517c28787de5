"""Sampling indicators from Cauchy data, far-field data, and far-field patterns.

The near-field indicator correlates the measured Cauchy pair against the
imaginary part of the Green's function (J0 kernel in 2D) and peaks on the
scatterer.  The far-field variant replaces the normal derivative by ik times
the field via the radiation condition; the plane-wave indicator applies to
far-field patterns directly.  Post-processing (max normalization, bilinear
upsampling to the image contract) lives here too.

Kernel convention: the 2D kernel is J0(kr) itself, not the analytic
Im[(i/4)H0] = J0/4.  All indicator relations and constants in this package
follow that convention; under max normalization the choice is invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from osmkit import specfun
from osmkit.forward import CauchyData, FarFieldPattern, MeasurementCurve
from osmkit.scene import PixelImage

DEFAULT_RHO = 2
FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform n x n sampling lattice over a square extent (endpoints included)."""

    extent: tuple[float, float] = (-2.0, 2.0)
    n: int = 64

    def __post_init__(self):
        lo, hi = self.extent
        if not lo < hi:
            raise ValueError("sampling extent must be nonempty")
        if self.n < 2:
            raise ValueError("sampling grid needs at least 2 points per side")

    def axes(self):
        """x (left to right) and y (top to bottom) node coordinates."""
        lo, hi = self.extent
        xs = np.linspace(lo, hi, self.n)
        ys = np.linspace(hi, lo, self.n)
        return xs, ys

    def points(self) -> np.ndarray:
        """(n*n, 2) nodes in row-major image order (top row first)."""
        xs, ys = self.axes()
        xg, yg = np.meshgrid(xs, ys)
        return np.column_stack([xg.ravel(), yg.ravel()])


@dataclass(frozen=True)
class IndicatorParams:
    rho: int = DEFAULT_RHO
    dimension: int = 2
    normalize: bool = True

    def __post_init__(self):
        if self.rho not in (1, 2):
            raise ValueError("rho must be 1 or 2")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")


@dataclass
class ImagingResult:
    """Indicator values on the sampling grid, image layout (row 0 on top)."""

    grid: SamplingGrid
    values: np.ndarray
    normalized: bool
    degenerate: bool = False
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("values must match the sampling grid")
        if np.any(self.values < 0):
            raise ValueError("indicator values must be nonnegative")


def im_phi(dimension: int, k: float, r):
    """Imaginary-part kernel: J0(kr) in 2D, (k / 4 pi) j0(kr) in 3D."""
    r = np.asarray(r, dtype=float)
    if dimension == 2:
        return specfun.bessel_j0(k * r)
    if dimension == 3:
        return (k / FOUR_PI) * specfun.spherical_j0(k * r)
    raise ValueError("dimension must be 2 or 3")


def im_phi_normal_derivative(dimension: int, k: float, x, z, nu):
    """Derivative of the kernel in x along the unit vector nu; x != z."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    nu = np.asarray(nu, dtype=float)
    diff = x - z
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r == 0):
        raise ValueError("kernel derivative is singular at x = z")
    radial = np.sum(diff * nu, axis=-1) / r
    s = k * r
    if dimension == 2:
        return -k * specfun.bessel_j1(s) * radial
    if dimension == 3:
        dj0 = (s * np.cos(s) - np.sin(s)) / (s * s)
        return (k / FOUR_PI) * k * dj0 * radial
    raise ValueError("dimension must be 2 or 3")


def _check_geometry(grid: SamplingGrid, curve: MeasurementCurve):
    lo, hi = grid.extent
    corners = np.array([[lo, lo], [lo, hi], [hi, lo], [hi, hi]])
    radius = curve.descriptor.get("radius")
    if radius is not None and np.max(np.linalg.norm(corners, axis=1)) >= radius:
        raise ValueError("sampling extent must lie strictly inside the curve")
    cell = (hi - lo) / (grid.n - 1)
    pts = grid.points()
    d2 = ((pts[:, None, :] - curve.points[None, :, :]) ** 2).sum(axis=2)
    if d2.min() < (2.0 * cell) ** 2:
        raise ValueError("sampling point too close to a measurement point")


def _boundary_pairing(points: np.ndarray, curve: MeasurementCurve,
                      k: float, us: np.ndarray, dus: np.ndarray,
                      dimension: int) -> np.ndarray:
    """sum_j w_j (dImPhi(x_j, z) us_j - ImPhi(x_j, z) dus_j) for each z."""
    diff = curve.points[None, :, :] - points[:, None, :]   # (P, M, 2)
    r = np.linalg.norm(diff, axis=2)
    radial = (diff * curve.normals[None, :, :]).sum(axis=2) / r
    s = k * r
    if dimension == 2:
        imphi = specfun.bessel_j0(s)
        dimphi = -k * specfun.bessel_j1(s) * radial
    else:
        imphi = (k / FOUR_PI) * specfun.spherical_j0(s)
        dimphi = (k / FOUR_PI) * k * ((s * np.cos(s) - np.sin(s)) / (s * s)) * radial
    w = curve.weights[None, :]
    return (w * (dimphi * us[None, :] - imphi * dus[None, :])).sum(axis=1)


def _to_result(grid: SamplingGrid, raw: np.ndarray, params: IndicatorParams,
               provenance: dict) -> ImagingResult:
    values = np.abs(raw) ** params.rho
    result = ImagingResult(grid=grid, values=values.reshape(grid.n, grid.n),
                           normalized=False, provenance=provenance)
    if not np.any(result.values):
        result.degenerate = True
    return normalize(result) if params.normalize else result


def indicator_nearfield(data: CauchyData, grid: SamplingGrid,
                        params: IndicatorParams = IndicatorParams()) -> ImagingResult:
    """Cauchy-data indicator |sum_j w_j (dImPhi us - ImPhi dus)|^rho on the grid."""
    _check_geometry(grid, data.curve)
    raw = _boundary_pairing(grid.points(), data.curve, data.k,
                            data.us, data.dus, params.dimension)
    prov = {"indicator": "nearfield", "rho": params.rho, "k": data.k,
            "curve": data.curve.descriptor}
    return _to_result(grid, raw, params, prov)


def indicator_at_points(data: CauchyData, points: np.ndarray,
                        params: IndicatorParams = IndicatorParams()) -> np.ndarray:
    """Raw (unnormalized) indicator values at arbitrary sampling points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    raw = _boundary_pairing(pts, data.curve, data.k, data.us, data.dus,
                            params.dimension)
    return np.abs(raw) ** params.rho


def indicator_farfield(curve: MeasurementCurve, us: np.ndarray, k: float,
                       grid: SamplingGrid,
                       params: IndicatorParams = IndicatorParams()) -> ImagingResult:
    """Derivative-free variant: dus replaced by ik us via the radiation condition."""
    us = np.asarray(us, dtype=complex)
    if us.shape != (len(curve.points),):
        raise ValueError("us length must match the curve")
    _check_geometry(grid, curve)
    raw = _boundary_pairing(grid.points(), curve, k, us, 1j * k * us,
                            params.dimension)
    prov = {"indicator": "farfield", "rho": params.rho, "k": k,
            "curve": curve.descriptor}
    return _to_result(grid, raw, params, prov)


def indicator_osm(ff: FarFieldPattern, grid: SamplingGrid,
                  params: IndicatorParams = IndicatorParams()) -> ImagingResult:
    """Plane-wave indicator |int e^{ikz.xhat} u_inf ds(xhat)| on the grid.

    No exponent is applied here; callers comparing against the Cauchy-data
    indicator raise to rho themselves.  Partial angular coverage is allowed
    but flagged in provenance.
    """
    m = len(ff.directions)
    angles = np.sort(np.arctan2(ff.directions[:, 1], ff.directions[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
    full_circle = m >= 8 and np.max(gaps) < 2.0 * (2.0 * np.pi / m)
    w = 2.0 * np.pi / m if full_circle else float(np.median(gaps))
    phases = np.exp(1j * ff.k * (grid.points() @ ff.directions.T))
    raw = w * (phases * ff.values[None, :]).sum(axis=1)
    values = np.abs(raw).reshape(grid.n, grid.n)
    result = ImagingResult(grid=grid, values=values, normalized=False,
                           provenance={"indicator": "osm", "k": ff.k,
                                       "directions": m,
                                       "full_coverage": bool(full_circle)})
    if not np.any(result.values):
        result.degenerate = True
    return normalize(result) if params.normalize else result


def gamma_constant(dimension: int, k: float, rho: int) -> float:
    """Constant relating the Cauchy-data indicator to the plane-wave one.

    Satisfies I(z) = gamma * |I_osm(z)|^rho with the J0 kernel convention:
    gamma = (2k/pi)^(rho/2) in 2D and (k/(4 pi))^rho in 3D.  Note this is
    the reciprocal of the constant usually quoted; the relation between two
    nonnegative quantities fixes both the magnitude and the side it lives
    on, and the numerical check in osmkit.oracles pins it down.
    """
    if rho not in (1, 2):
        raise ValueError("rho must be 1 or 2")
    if dimension == 2:
        return float((2.0 * k / np.pi) ** (rho / 2.0))
    if dimension == 3:
        return float((k / FOUR_PI) ** rho)
    raise ValueError("dimension must be 2 or 3")


def normalize(result: ImagingResult) -> ImagingResult:
    """Divide by the maximum value; all-zero input passes through flagged."""
    peak = float(result.values.max()) if result.values.size else 0.0
    if peak == 0.0:
        return ImagingResult(grid=result.grid, values=result.values.copy(),
                             normalized=True, degenerate=True,
                             provenance=dict(result.provenance))
    return ImagingResult(grid=result.grid, values=result.values / peak,
                         normalized=True, degenerate=result.degenerate,
                         provenance=dict(result.provenance))


def upsample_bilinear(result: ImagingResult, target: int) -> PixelImage:
    """Bilinear interpolation from grid nodes onto target^2 pixel centers."""
    lo, hi = result.grid.extent
    n = result.grid.n
    step_node = (hi - lo) / (n - 1)
    step_px = (hi - lo) / target
    # pixel-center coordinates in node-index units, rows count from the top
    coords = (np.arange(target) + 0.5) * step_px / step_node
    idx = np.clip(np.floor(coords).astype(int), 0, n - 2)
    frac = np.clip(coords - idx, 0.0, 1.0)
    vals = result.values
    top = (vals[np.ix_(idx, idx)] * np.outer(1 - frac, 1 - frac)
           + vals[np.ix_(idx, idx + 1)] * np.outer(1 - frac, frac)
           + vals[np.ix_(idx + 1, idx)] * np.outer(frac, 1 - frac)
           + vals[np.ix_(idx + 1, idx + 1)] * np.outer(frac, frac))
    return PixelImage(width=target, height=target, values=top,
                      extent=result.grid.extent)

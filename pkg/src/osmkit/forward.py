"""Direct scattering in 2D: Lippmann-Schwinger solver and field evaluation.

The total field solves u = u_in + k^2 V(eta u), where V is convolution with
the outgoing Helmholtz Green's function.  The kernel is cut off at half the
period and periodized on a cell whose side is four times the scatterer
half-width, so V reduces to a pair of FFTs acting on the trigonometric
interpolant of the density; the cut-off kernel's Fourier coefficients have
a closed form via the Bessel cross-product identity.  The linear system is
solved with restarted GMRES.

Scattered data on a measurement curve (values, normal derivatives, far-field
pattern) come from rectangle-rule quadrature of the volume potential over
the contrast's support.  A separation-of-variables series for the penetrable
disk provides an independent reference solution.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse.linalg as spla
import scipy.special

from osmkit import specfun

GMRES_RESTART = 50
GMRES_MAXITER = 1000
GMRES_RTOL = 1e-6

DEFAULT_ANTIALIAS = 16   # subsamples per cell side when averaging the contrast


class SolverError(RuntimeError):
    """Krylov iteration failed; carries the residual history."""

    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class ContrastGrid:
    """Contrast sampled on the n x n periodization grid.

    eta[i, j] sits at origin + (i*h, j*h).  n must be a power of two and the
    support of eta must stay inside the central half of the cell so the
    cut-off kernel sees no wrap-around.
    """

    n: int
    h: float
    origin: tuple[float, float]
    eta: np.ndarray

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("grid size must be a power of two")
        self.eta = np.asarray(self.eta, dtype=complex)
        if self.eta.shape != (self.n, self.n):
            raise ValueError("eta must be n x n")
        side = self.n * self.h
        # allow a sub-cell fringe from contrast antialiasing at the rim
        slack = 1.5 * self.h
        lo = side / 4.0 - slack
        hi = 3.0 * side / 4.0 + slack
        ii, jj = np.nonzero(self.eta)
        if ii.size:
            x_off = ii * self.h
            y_off = jj * self.h
            if (x_off.min() < lo or x_off.max() > hi
                    or y_off.min() < lo or y_off.max() > hi):
                raise ValueError(
                    "contrast support must lie in the central half of the cell")

    def node_coords(self):
        xs = self.origin[0] + np.arange(self.n) * self.h
        ys = self.origin[1] + np.arange(self.n) * self.h
        return xs, ys

    def support_points(self):
        """(m, 2) coordinates and (m,) eta values of the nonzero nodes."""
        ii, jj = np.nonzero(self.eta)
        xs = self.origin[0] + ii * self.h
        ys = self.origin[1] + jj * self.h
        return np.column_stack([xs, ys]), self.eta[ii, jj], (ii, jj)


def default_grid(n: int, scene=None, cell_half: float | None = None,
                 antialias: int = DEFAULT_ANTIALIAS) -> ContrastGrid:
    """Periodization grid sized from the scene: cell side = 4 x domain half-width.

    Scenes on [-2, 2]^2 get the cell [-4, 4]^2.  Without a scene the cell
    half-width defaults to 4.  The contrast is averaged over each cell with
    antialias^2 subsamples (pass antialias=1 for plain node sampling).
    """
    if scene is None:
        half = 4.0 if cell_half is None else cell_half
        h = 2.0 * half / n
        return ContrastGrid(n=n, h=h, origin=(-half, -half),
                            eta=np.zeros((n, n), dtype=complex))
    from osmkit.scene import sample_contrast

    lo, hi = scene.domain
    half = hi - lo if cell_half is None else cell_half   # 2 x domain half-width
    center = 0.5 * (lo + hi)
    h = 2.0 * half / n
    origin = (center - half, center - half)
    return sample_contrast(scene, n, h, origin, antialias=antialias)


@dataclass
class TotalField:
    """Total field on the solver grid for one plane-wave excitation."""

    u: np.ndarray
    k: float
    theta: float
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)


@dataclass
class MeasurementCurve:
    """Quadrature points, unit outward normals and weights on the curve."""

    points: np.ndarray    # (m, 2)
    normals: np.ndarray   # (m, 2)
    weights: np.ndarray   # (m,)
    descriptor: dict

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.normals = np.asarray(self.normals, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        m = len(self.points)
        if self.normals.shape != (m, 2) or self.weights.shape != (m,):
            raise ValueError("inconsistent curve arrays")
        norms = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise ValueError("normals must be unit vectors")


def circle_curve(radius: float, count: int) -> MeasurementCurve:
    """Uniform points on the circle |x| = radius with rectangle-rule weights."""
    angles = 2.0 * np.pi * np.arange(count) / count
    normals = np.column_stack([np.cos(angles), np.sin(angles)])
    points = radius * normals
    weights = np.full(count, 2.0 * np.pi * radius / count)
    return MeasurementCurve(points, normals, weights,
                            {"type": "circle", "radius": radius, "count": count})


def arc_curve(radius: float, angles_deg: np.ndarray) -> MeasurementCurve:
    """Points on a circular arc at the given angles, rectangle rule over the arc.

    The covered arc is taken as one step wide per point (uniform step assumed).
    """
    angles_deg = np.asarray(angles_deg, dtype=float)
    if len(angles_deg) < 2:
        raise ValueError("arc needs at least two angles")
    step = np.radians(angles_deg[1] - angles_deg[0])
    rad = np.radians(angles_deg)
    normals = np.column_stack([np.cos(rad), np.sin(rad)])
    points = radius * normals
    weights = np.full(len(angles_deg), abs(step) * radius)
    return MeasurementCurve(points, normals, weights,
                            {"type": "arc", "radius": radius,
                             "angles_deg": angles_deg.tolist()})


def curve_from_descriptor(descriptor: dict) -> MeasurementCurve:
    kind = descriptor.get("type")
    if kind == "circle":
        return circle_curve(descriptor["radius"], descriptor["count"])
    if kind == "arc":
        return arc_curve(descriptor["radius"], np.asarray(descriptor["angles_deg"]))
    raise ValueError(f"unknown curve descriptor type {kind!r}")


@dataclass
class CauchyData:
    """Scattered field and its normal derivative on a measurement curve."""

    curve: MeasurementCurve
    us: np.ndarray
    dus: np.ndarray
    k: float

    def __post_init__(self):
        self.us = np.asarray(self.us, dtype=complex)
        self.dus = np.asarray(self.dus, dtype=complex)
        m = len(self.curve.points)
        if self.us.shape != (m,) or self.dus.shape != (m,):
            raise ValueError("us/dus length must match the curve point count")


@dataclass
class FarFieldPattern:
    """Far-field pattern u_inf on unit directions."""

    directions: np.ndarray  # (m, 2), unit vectors
    values: np.ndarray      # (m,) complex
    k: float

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if not np.allclose(np.linalg.norm(self.directions, axis=1), 1.0, atol=1e-12):
            raise ValueError("directions must be unit vectors")


def unit_circle_directions(count: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


# -- incident wave and Green's function ---------------------------------------

def incident_plane_wave(k: float, theta: float, points: np.ndarray) -> np.ndarray:
    """e^{ik(x1 cos(theta) + x2 sin(theta))} at each point (theta in radians)."""
    pts = np.asarray(points, dtype=float)
    phase = pts[..., 0] * math.cos(theta) + pts[..., 1] * math.sin(theta)
    return np.exp(1j * k * phase)


def green2d(k: float, x, y):
    """Outgoing free-space kernel (i/4) H0^(1)(k |x - y|); x != y required."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x - y, axis=-1)
    if np.any(r == 0):
        raise ValueError("green2d is singular at x = y")
    return 0.25j * specfun.hankel1(0, k * r)


def green2d_normal_derivative(k: float, x, y, nu):
    """Directional derivative of green2d in x along the unit vector nu."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    diff = x - y
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r == 0):
        raise ValueError("green2d_normal_derivative is singular at x = y")
    radial = np.sum(diff * nu, axis=-1) / r
    return -0.25j * k * specfun.hankel1(1, k * r) * radial


# -- periodized kernel ---------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _kernel_hat(k: float, n: int, side: float) -> np.ndarray:
    """Fourier coefficients of the Green's kernel cut off at half the period.

    The radial transform of the truncated kernel follows from the Bessel
    cross-product identity: with R = side/2 and rho the mode frequency,

      int_0^R H0(kr) J0(rho r) r dr
        = [R (k H1(kR) J0(rho R) - rho H0(kR) J1(rho R)) + 2i/pi] / (k^2 - rho^2),

    where the 2i/pi boundary term comes from the log singularity of H0 at 0.
    Modes with rho near k take the removable limit by l'Hopital.  Scaled so
    that V f = ifft2(khat * fft2(f)) interpolates the density
    trigonometrically.
    """
    cutoff = side / 2.0
    freqs = 2.0 * np.pi * np.fft.fftfreq(n, d=side / n)
    fx, fy = np.meshgrid(freqs, freqs, indexing="ij")
    rho = np.hypot(fx, fy)
    h0_kr = specfun.hankel1(0, np.array(k * cutoff))
    h1_kr = specfun.hankel1(1, np.array(k * cutoff))
    num = (cutoff * (k * h1_kr * specfun.bessel_j0(rho * cutoff)
                     - rho * h0_kr * specfun.bessel_j1(rho * cutoff))
           + 2j / np.pi)
    den = k * k - rho * rho
    resonant = np.abs(den) < 1e-4 * k * k
    out = num / np.where(resonant, 1.0, den)
    if np.any(resonant):
        rr = rho[resonant]
        rrc = rr * cutoff
        # d(num)/d(rho) / d(k^2 - rho^2)/d(rho)
        dj1 = specfun.bessel_j0(rrc) - specfun.bessel_j1(rrc) / rrc
        dnum = cutoff * (-k * cutoff * h1_kr * specfun.bessel_j1(rrc)
                         - h0_kr * specfun.bessel_j1(rrc)
                         - rr * cutoff * h0_kr * dj1)
        out[resonant] = dnum / (-2.0 * rr)
    coeffs = (1j * np.pi / 2.0) * out
    coeffs.setflags(write=False)
    return coeffs


class _VolumePotential:
    """Periodic volume potential V f = conv(kernel, f) via FFT, cached per grid."""

    def __init__(self, grid: ContrastGrid, k: float):
        self.khat = _kernel_hat(float(k), grid.n, grid.n * grid.h)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(self.khat * np.fft.fft2(f))


# -- Lippmann-Schwinger solve ---------------------------------------------------

def ls_solve(grid: ContrastGrid, k: float, theta: float,
             rtol: float = GMRES_RTOL,
             restart: int = GMRES_RESTART,
             maxiter: int = GMRES_MAXITER) -> TotalField:
    """Solve u = u_in + k^2 V(eta u) on the grid by restarted GMRES."""
    n = grid.n
    xs, ys = grid.node_coords()
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    u_in = incident_plane_wave(k, theta, np.stack([xg, yg], axis=-1))

    if not np.any(grid.eta):
        return TotalField(u=u_in, k=k, theta=theta, iterations=0, residuals=[])

    potential = _VolumePotential(grid, k)
    eta = grid.eta
    k2 = k * k

    def matvec(v):
        w = v.reshape(n, n)
        return (w - k2 * potential.apply(eta * w)).ravel()

    op = spla.LinearOperator((n * n, n * n), matvec=matvec, dtype=complex)
    residuals: list[float] = []

    def record(pr_norm):
        residuals.append(float(pr_norm))

    solution, info = spla.gmres(
        op, u_in.ravel(), x0=u_in.ravel(), rtol=rtol, atol=0.0,
        restart=restart, maxiter=maxiter, callback=record,
        callback_type="pr_norm")
    if info != 0:
        raise SolverError(
            f"GMRES did not reach rtol={rtol} within {maxiter} iterations "
            f"(last residual {residuals[-1] if residuals else 'n/a'})",
            residuals)
    return TotalField(u=solution.reshape(n, n), k=k, theta=theta,
                      iterations=len(residuals), residuals=residuals)


# -- field evaluation -----------------------------------------------------------

def _support_or_empty(grid: ContrastGrid):
    pts, eta, _ = grid.support_points()
    return pts, eta


def _require_offset(points: np.ndarray, support: np.ndarray, h: float):
    if support.size == 0:
        return
    pts = np.atleast_2d(points)
    d2 = ((pts[:, None, :] - support[None, :, :]) ** 2).sum(axis=2)
    if np.sqrt(d2.min()) < 2.0 * h:
        raise ValueError(
            "evaluation point closer than two cells to the contrast support")


def scattered_at(total: TotalField, grid: ContrastGrid, points) -> np.ndarray:
    """Rectangle-rule volume potential k^2 h^2 sum Phi(x, y_j) eta_j u_j."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    support, eta = _support_or_empty(grid)
    if support.size == 0:
        return np.zeros(len(pts), dtype=complex)
    _require_offset(pts, support, grid.h)
    ii, jj = np.nonzero(grid.eta)
    u_vals = total.u[ii, jj]
    diff = pts[:, None, :] - support[None, :, :]
    r = np.linalg.norm(diff, axis=2)
    kern = 0.25j * specfun.hankel1(0, total.k * r)
    return (total.k ** 2) * grid.h ** 2 * (kern * (eta * u_vals)[None, :]).sum(axis=1)


def scattered_normal_derivative(total: TotalField, grid: ContrastGrid,
                                curve: MeasurementCurve) -> np.ndarray:
    """Same quadrature with the normal-derivative kernel at the curve points."""
    support, eta = _support_or_empty(grid)
    if support.size == 0:
        return np.zeros(len(curve.points), dtype=complex)
    _require_offset(curve.points, support, grid.h)
    ii, jj = np.nonzero(grid.eta)
    u_vals = total.u[ii, jj]
    diff = curve.points[:, None, :] - support[None, :, :]
    r = np.linalg.norm(diff, axis=2)
    radial = (diff * curve.normals[:, None, :]).sum(axis=2) / r
    kern = -0.25j * total.k * specfun.hankel1(1, total.k * r) * radial
    return (total.k ** 2) * grid.h ** 2 * (kern * (eta * u_vals)[None, :]).sum(axis=1)


def far_field_alpha(k: float) -> complex:
    """2D far-field normalization e^{i pi/4} / sqrt(8 pi k)."""
    return np.exp(1j * np.pi / 4.0) / math.sqrt(8.0 * np.pi * k)


def far_field(total: TotalField, grid: ContrastGrid, directions) -> FarFieldPattern:
    """u_inf(xhat) = alpha k^2 h^2 sum e^{-ik y_j . xhat} eta_j u_j."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    support, eta = _support_or_empty(grid)
    if support.size == 0:
        return FarFieldPattern(dirs, np.zeros(len(dirs), dtype=complex), total.k)
    ii, jj = np.nonzero(grid.eta)
    u_vals = total.u[ii, jj]
    phases = np.exp(-1j * total.k * (dirs @ support.T))
    values = (far_field_alpha(total.k) * total.k ** 2 * grid.h ** 2
              * (phases * (eta * u_vals)[None, :]).sum(axis=1))
    return FarFieldPattern(dirs, values, total.k)


def synthesize_cauchy(total: TotalField, grid: ContrastGrid,
                      curve: MeasurementCurve) -> CauchyData:
    """Scattered Cauchy pair (u_sc, du_sc/dnu) on the measurement curve."""
    us = scattered_at(total, grid, curve.points)
    dus = scattered_normal_derivative(total, grid, curve)
    return CauchyData(curve=curve, us=us, dus=dus, k=total.k)


# -- penetrable-disk series reference -------------------------------------------

def _mie_coefficients(k: float, radius: float, eta_const: float,
                      orders: int) -> np.ndarray:
    k1 = k * math.sqrt(1.0 + eta_const)
    m = np.arange(orders + 1)
    ka, k1a = k * radius, k1 * radius
    jm_ka = scipy.special.jv(m, ka)
    jm_k1a = scipy.special.jv(m, k1a)
    djm_ka = scipy.special.jvp(m, ka)
    djm_k1a = scipy.special.jvp(m, k1a)
    hm_ka = scipy.special.hankel1(m, ka)
    dhm_ka = scipy.special.h1vp(m, ka)
    num = k1 * djm_k1a * jm_ka - k * djm_ka * jm_k1a
    den = k * dhm_ka * jm_k1a - k1 * djm_k1a * hm_ka
    return (1j ** m) * num / den


def _mie_orders(k: float, radius: float, eta_const: float) -> int:
    k1a = k * math.sqrt(1.0 + abs(eta_const)) * radius
    return max(20, int(k1a + 10.0 * k1a ** (1.0 / 3.0) + 12))


def _mie_sum(coeffs: np.ndarray, radial: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """sum_m c_m radial_m(r) e^{i m phi} folded over +-m symmetry."""
    m = np.arange(len(coeffs))
    terms = coeffs[None, :] * radial * np.cos(np.outer(phi, m))
    terms[:, 1:] *= 2.0
    return terms.sum(axis=1)


def mie_disk_reference(k: float, radius: float, eta_const: float, points,
                       tol: float = 1e-14) -> np.ndarray:
    """Series u_sc for a centered penetrable disk, incident direction theta = 0.

    For other incident directions rotate the evaluation points; the helpers
    below do this for curves.  Truncation grows until the last retained
    order contributes less than tol of the accumulated sum.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if eta_const == 0:
        return np.zeros(len(pts), dtype=complex)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r <= radius):
        raise ValueError("evaluation points must lie outside the disk")
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    orders = _mie_orders(k, radius, eta_const)
    while True:
        coeffs = _mie_coefficients(k, radius, eta_const, orders)
        m = np.arange(orders + 1)
        radial = scipy.special.hankel1(m[None, :], k * r[:, None])
        values = _mie_sum(coeffs, radial, phi)
        tail = 2.0 * np.abs(coeffs[-1] * radial[:, -1])
        if np.all(tail <= tol * np.maximum(np.abs(values), 1e-300)) or orders >= 250:
            return values
        orders += 20


def mie_disk_cauchy(k: float, radius: float, eta_const: float,
                    curve: MeasurementCurve, theta: float = 0.0,
                    tol: float = 1e-14) -> CauchyData:
    """Series Cauchy data on a centered circle for incident direction theta."""
    desc = curve.descriptor
    if desc.get("type") not in ("circle", "arc"):
        raise ValueError("series Cauchy data needs a centered circular curve")
    rot = np.array([[math.cos(theta), math.sin(theta)],
                    [-math.sin(theta), math.cos(theta)]])
    pts = curve.points @ rot.T   # rotate so the incident direction is theta = 0
    r = np.linalg.norm(pts, axis=1)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    if eta_const == 0:
        zeros = np.zeros(len(pts), dtype=complex)
        return CauchyData(curve=curve, us=zeros, dus=zeros.copy(), k=k)
    orders = _mie_orders(k, radius, eta_const)
    while True:
        coeffs = _mie_coefficients(k, radius, eta_const, orders)
        m = np.arange(orders + 1)
        radial = scipy.special.hankel1(m[None, :], k * r[:, None])
        dradial = k * scipy.special.h1vp(m[None, :], k * r[:, None])
        us = _mie_sum(coeffs, radial, phi)
        dus = _mie_sum(coeffs, dradial, phi)
        tail = 2.0 * np.abs(coeffs[-1] * radial[:, -1])
        if np.all(tail <= tol * np.maximum(np.abs(us), 1e-300)) or orders >= 250:
            return CauchyData(curve=curve, us=us, dus=dus, k=k)
        orders += 20


def mie_disk_farfield(k: float, radius: float, eta_const: float,
                      directions, theta: float = 0.0) -> FarFieldPattern:
    """Series far-field pattern of the centered penetrable disk."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if eta_const == 0:
        return FarFieldPattern(dirs, np.zeros(len(dirs), dtype=complex), k)
    orders = _mie_orders(k, radius, eta_const) + 40
    coeffs = _mie_coefficients(k, radius, eta_const, orders)
    phi = np.arctan2(dirs[:, 1], dirs[:, 0]) - theta
    m = np.arange(orders + 1)
    # H_m(kr) ~ sqrt(2/(pi k r)) e^{i(kr - m pi/2 - pi/4)}
    radial = np.broadcast_to(
        math.sqrt(2.0 / (np.pi * k)) * np.exp(-1j * (m * np.pi / 2.0 + np.pi / 4.0)),
        (len(dirs), orders + 1)).copy()
    values = _mie_sum(coeffs, radial, phi)
    return FarFieldPattern(dirs, values, k)


# -- Cauchy-data serialization ---------------------------------------------------

CAUCHY_FORMAT_VERSION = 1


def save_cauchy(data: CauchyData, json_path: str | Path) -> None:
    """JSON header plus little-endian f64 (re, im) pairs: all us, then all dus."""
    json_path = Path(json_path)
    bin_path = json_path.with_suffix(".bin")
    header = {
        "format": "cauchy",
        "version": CAUCHY_FORMAT_VERSION,
        "k": data.k,
        "curve": data.curve.descriptor,
        "count": int(len(data.us)),
        "data_file": bin_path.name,
    }
    interleaved = np.empty(4 * len(data.us), dtype="<f8")
    interleaved[0:2 * len(data.us):2] = data.us.real
    interleaved[1:2 * len(data.us):2] = data.us.imag
    interleaved[2 * len(data.us)::2] = data.dus.real
    interleaved[2 * len(data.us) + 1::2] = data.dus.imag
    bin_path.write_bytes(interleaved.tobytes())
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True))


def load_cauchy(json_path: str | Path) -> CauchyData:
    json_path = Path(json_path)
    header = json.loads(json_path.read_text())
    if header.get("format") != "cauchy" or header.get("version") != CAUCHY_FORMAT_VERSION:
        raise ValueError("not a cauchy data header")
    count = int(header["count"])
    raw = np.frombuffer((json_path.parent / header["data_file"]).read_bytes(), dtype="<f8")
    if raw.size != 4 * count:
        raise ValueError("cauchy binary payload has the wrong size")
    us = raw[0:2 * count:2] + 1j * raw[1:2 * count:2]
    dus = raw[2 * count::2] + 1j * raw[2 * count + 1::2]
    curve = curve_from_descriptor(header["curve"])
    return CauchyData(curve=curve, us=us, dus=dus, k=float(header["k"]))

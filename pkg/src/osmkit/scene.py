"""Scatterer geometry: shape primitives, contrast scenes, rasterization.

A scene is a list of (shape, contrast) pairs living in an axis-aligned
square domain (default [-2, 2]^2).  Shapes support rotated membership
tests; overlaps behave as a union for masks and as last-listed-wins for
contrast sampling.  The random generator draws the one/two-ellipse
families used to build training scenes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SHAPE_KINDS = ("ellipse", "rectangle", "disk", "l_shape", "t_shape", "peanut")

# size-parameter names per shape kind, all strictly positive
_SIZE_FIELDS = {
    "ellipse": ("a", "b"),
    "rectangle": ("hx", "hy"),
    "disk": ("radius",),
    "l_shape": ("arm", "thickness"),
    "t_shape": ("width", "height", "thickness"),
    "peanut": ("scale", "waist"),
}

DEFAULT_DOMAIN = (-2.0, 2.0)
DEFAULT_PEANUT_WAIST = 0.25


@dataclass(frozen=True)
class ShapePrimitive:
    """One rotated primitive: kind, center, size parameters, rotation [rad]."""

    kind: str
    center: tuple[float, float]
    sizes: dict[str, float]
    rotation: float = 0.0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        expected = _SIZE_FIELDS[self.kind]
        if set(self.sizes) != set(expected):
            raise ValueError(
                f"{self.kind} needs sizes {expected}, got {tuple(self.sizes)}")
        for name, value in self.sizes.items():
            if not (value > 0):
                raise ValueError(f"{self.kind}.{name} must be > 0")
        if self.kind == "peanut" and not (0 < self.sizes["waist"] < 1):
            raise ValueError("peanut waist ratio must lie in (0, 1)")
        if not (0.0 <= self.rotation < 2.0 * math.pi):
            object.__setattr__(self, "rotation", self.rotation % (2.0 * math.pi))

    def body_frame(self, x: np.ndarray, y: np.ndarray):
        """Map world points into the shape's unrotated frame."""
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return c * dx + s * dy, -s * dx + c * dy

    def contains(self, x, y) -> np.ndarray:
        """Closed-set membership test (boundary counts as inside)."""
        u, v = self.body_frame(x, y)
        z = self.sizes
        if self.kind == "ellipse":
            return (u / z["a"]) ** 2 + (v / z["b"]) ** 2 <= 1.0
        if self.kind == "rectangle":
            return (np.abs(u) <= z["hx"]) & (np.abs(v) <= z["hy"])
        if self.kind == "disk":
            return u * u + v * v <= z["radius"] ** 2
        if self.kind == "l_shape":
            # two bars in the box [0, arm]^2, box centered on the origin
            arm, t = z["arm"], z["thickness"]
            p, q = u + arm / 2.0, v + arm / 2.0
            vertical = (0.0 <= p) & (p <= t) & (0.0 <= q) & (q <= arm)
            horizontal = (0.0 <= p) & (p <= arm) & (0.0 <= q) & (q <= t)
            return vertical | horizontal
        if self.kind == "t_shape":
            w, hgt, t = z["width"], z["height"], z["thickness"]
            p, q = u + w / 2.0, v + hgt / 2.0
            top = (0.0 <= p) & (p <= w) & (hgt - t <= q) & (q <= hgt)
            stem = (np.abs(u) <= t / 2.0) & (0.0 <= q) & (q <= hgt - t)
            return top | stem
        # peanut: (u^2 + v^2)^2 <= a^2 (u^2 + c v^2), waist along the v axis
        a, c = z["scale"], z["waist"]
        r2 = u * u + v * v
        return r2 * r2 <= a * a * (u * u + c * v * v)

    def bounding_halfwidths(self) -> tuple[float, float]:
        """Axis-aligned half-extent of the rotated shape about its center."""
        z = self.sizes
        cos_r, sin_r = abs(math.cos(self.rotation)), abs(math.sin(self.rotation))
        if self.kind == "ellipse":
            a, b = z["a"], z["b"]
            return (math.hypot(a * cos_r, b * sin_r),
                    math.hypot(a * sin_r, b * cos_r))
        if self.kind == "rectangle":
            hx, hy = z["hx"], z["hy"]
            return hx * cos_r + hy * sin_r, hx * sin_r + hy * cos_r
        if self.kind == "disk":
            return z["radius"], z["radius"]
        if self.kind == "l_shape":
            h = z["arm"] / 2.0
            return h * (cos_r + sin_r), h * (cos_r + sin_r)
        if self.kind == "t_shape":
            hx, hy = z["width"] / 2.0, z["height"] / 2.0
            return hx * cos_r + hy * sin_r, hx * sin_r + hy * cos_r
        return z["scale"], z["scale"]


def ellipse(center, a, b, rotation=0.0) -> ShapePrimitive:
    return ShapePrimitive("ellipse", tuple(center), {"a": a, "b": b}, rotation)


def rectangle(center, hx, hy, rotation=0.0) -> ShapePrimitive:
    return ShapePrimitive("rectangle", tuple(center), {"hx": hx, "hy": hy}, rotation)


def disk(center, radius) -> ShapePrimitive:
    return ShapePrimitive("disk", tuple(center), {"radius": radius})


def l_shape(center, arm=1.5, thickness=0.5, rotation=0.0) -> ShapePrimitive:
    return ShapePrimitive("l_shape", tuple(center),
                          {"arm": arm, "thickness": thickness}, rotation)


def t_shape(center, width=1.5, height=1.5, thickness=0.5, rotation=0.0) -> ShapePrimitive:
    return ShapePrimitive("t_shape", tuple(center),
                          {"width": width, "height": height, "thickness": thickness},
                          rotation)


def peanut(center, scale=1.0, waist=DEFAULT_PEANUT_WAIST, rotation=0.0) -> ShapePrimitive:
    return ShapePrimitive("peanut", tuple(center),
                          {"scale": scale, "waist": waist}, rotation)


@dataclass
class ContrastScene:
    """Shapes with complex contrast values inside a square domain.

    Overlapping shapes form a union for binary masks; contrast sampling
    resolves overlaps as last-listed-wins.  Re(contrast) >= 0 is required
    for solvability of the scattering problem.
    """

    shapes: list[tuple[ShapePrimitive, complex]] = field(default_factory=list)
    domain: tuple[float, float] = DEFAULT_DOMAIN

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError("scene domain must be a nonempty square")
        for shape, eta in self.shapes:
            if eta.real < 0:
                raise ValueError("Re(contrast) must be >= 0 for every shape")
            wx, wy = shape.bounding_halfwidths()
            cx, cy = shape.center
            if cx - wx < lo or cx + wx > hi or cy - wy < lo or cy + wy > hi:
                raise ValueError(
                    f"{shape.kind} at {shape.center} exceeds the scene domain")

    def mask(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Union membership over all shapes."""
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for shape, _ in self.shapes:
            inside |= shape.contains(x, y)
        return inside

    def contrast_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Contrast values; overlaps take the last listed shape's value."""
        eta = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for shape, value in self.shapes:
            eta[shape.contains(x, y)] = value
        return eta


@dataclass
class PixelImage:
    """Row-major real image in [0, 1]; row 0 is the top of the extent."""

    width: int
    height: int
    values: np.ndarray  # shape (height, width), float64
    extent: tuple[float, float]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.height, self.width):
            raise ValueError("values shape must be (height, width)")
        lo, hi = self.extent
        if not lo < hi:
            raise ValueError("extent must be nonempty")


def pixel_centers(extent: tuple[float, float], resolution: int):
    """x (left to right) and y (top to bottom) pixel-center coordinates."""
    lo, hi = extent
    step = (hi - lo) / resolution
    xs = lo + (np.arange(resolution) + 0.5) * step
    ys = hi - (np.arange(resolution) + 0.5) * step
    return xs, ys


def rasterize(scene: ContrastScene, resolution: int) -> PixelImage:
    """Binary mask of the scene sampled at pixel centers."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xs, ys = pixel_centers(scene.domain, resolution)
    xg, yg = np.meshgrid(xs, ys)
    values = scene.mask(xg, yg).astype(np.float64)
    return PixelImage(resolution, resolution, values, scene.domain)


def sample_contrast(scene: ContrastScene, n: int, h: float,
                    origin: tuple[float, float], antialias: int = 1):
    """Contrast on the solver's n x n periodic grid (nodes origin + i*h).

    Returns a forward.ContrastGrid.  The grid must cover the scene domain.
    With antialias=1 the contrast is evaluated at the nodes (closed-set
    membership at boundaries); antialias=s averages s^2 subsamples per cell,
    which the solver needs to represent the contrast jump at second order.
    """
    from osmkit.forward import ContrastGrid

    lo, hi = scene.domain
    ox, oy = origin
    top = ox + (n - 1) * h
    if ox > lo or top < hi - h or oy > lo or oy + (n - 1) * h < hi - h:
        raise ValueError("solver grid does not cover the scene domain")
    xs = ox + np.arange(n) * h
    ys = oy + np.arange(n) * h
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    if antialias <= 1:
        eta = scene.contrast_at(xg, yg)
    else:
        s = int(antialias)
        offsets = (np.arange(s) + 0.5) / s * h - h / 2.0
        eta = np.zeros((n, n), dtype=complex)
        for dx in offsets:
            for dy in offsets:
                eta += scene.contrast_at(xg + dx, yg + dy)
        eta /= s * s
    return ContrastGrid(n=n, h=h, origin=(ox, oy), eta=eta)


# -- random scene families ---------------------------------------------------

ONE_ELLIPSE = "one-ellipse"
TWO_ELLIPSE = "two-ellipse"


def _draw_ellipse(rng: np.random.Generator, center_half: float,
                  ax_lo: float, ax_hi: float) -> ShapePrimitive:
    cx = rng.uniform(-center_half, center_half)
    cy = rng.uniform(-center_half, center_half)
    a = rng.uniform(ax_lo, ax_hi)
    b = rng.uniform(ax_lo, ax_hi)
    rot = rng.uniform(0.0, 2.0 * math.pi)
    return ellipse((cx, cy), a, b, rot)


def random_scene(rng: np.random.Generator, family: str,
                 contrast: complex = 1.0) -> ContrastScene:
    """Draw a random one/two-ellipse scene on the default domain.

    One ellipse: center uniform in [-0.8, 0.8]^2, semi-axes in [0.1, 1].
    Two ellipses: first as above; second with center in [-1, 1]^2 and
    semi-axes in [0.1, 0.5]; overlap allowed.
    """
    if family == ONE_ELLIPSE:
        shapes = [(_draw_ellipse(rng, 0.8, 0.1, 1.0), complex(contrast))]
    elif family == TWO_ELLIPSE:
        shapes = [(_draw_ellipse(rng, 0.8, 0.1, 1.0), complex(contrast)),
                  (_draw_ellipse(rng, 1.0, 0.1, 0.5), complex(contrast))]
    else:
        raise ValueError(f"unknown scene family {family!r}")
    return ContrastScene(shapes=shapes)


# -- JSON serialization (schema version 1) ------------------------------------

def scene_to_json(scene: ContrastScene) -> str:
    doc = {
        "version": 1,
        "domain": list(scene.domain),
        "shapes": [
            {
                "variant": shape.kind,
                "center": list(shape.center),
                "sizes": dict(shape.sizes),
                "rotation": shape.rotation,
                "contrast": [eta.real, eta.imag],
            }
            for shape, eta in scene.shapes
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scene_from_json(text: str) -> ContrastScene:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported scene schema version {doc.get('version')!r}")
    shapes = []
    for entry in doc["shapes"]:
        shape = ShapePrimitive(
            kind=entry["variant"],
            center=tuple(entry["center"]),
            sizes={k: float(v) for k, v in entry["sizes"].items()},
            rotation=float(entry.get("rotation", 0.0)),
        )
        re, im = entry["contrast"]
        shapes.append((shape, complex(re, im)))
    return ContrastScene(shapes=shapes, domain=tuple(doc["domain"]))

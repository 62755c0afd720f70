"""Regions, candidate hover grids and the regulatory predicates that gate them.

All lengths are in meters.  The restricted zone is a single zone per
scenario; in ``band`` mode it is the vertical strip ``|x - center_x| < b``
that approximates the ellipse with straight edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyGrid, ValidationError


class Point3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValidationError("x_min", f"{self.x_min} must be < x_max={self.x_max}")
        if not self.y_min < self.y_max:
            raise ValidationError("y_min", f"{self.y_min} must be < y_max={self.y_max}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains_xy(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


ZONE_MODES = ("ellipse", "band")


@dataclass(frozen=True)
class RestrictedZone:
    """Restricted operating zone.

    ``b`` is the semi-axis along x and ``a`` the semi-axis along y.  In
    ``band`` mode only ``center_x`` and ``b`` are consulted.
    """

    center_x: float
    center_y: float
    a: float
    b: float
    mode: str = "band"

    def __post_init__(self):
        if self.mode not in ZONE_MODES:
            raise ValidationError("zone_mode", f"unknown mode {self.mode!r}")
        if not self.a > 0:
            raise ValidationError("zone_a_m", "must be > 0")
        if not self.b > 0:
            raise ValidationError("zone_b_m", "must be > 0")


@dataclass(frozen=True)
class AltitudeBand:
    h_min: float
    h_max: float

    def __post_init__(self):
        if not self.h_min > 0:
            raise ValidationError("h_min_m", "must be > 0")
        if self.h_min > self.h_max:
            raise ValidationError("h_min_m", f"{self.h_min} exceeds h_max_m={self.h_max}")


@dataclass(frozen=True)
class CandidateGrid:
    """Ordered candidate hover locations of one region.

    ``indices`` maps each row of ``points`` back to its position in the
    unfiltered grid.
    """

    region_id: int
    points: np.ndarray
    indices: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        if self.indices is None:
            idx = np.arange(len(pts))
        else:
            idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i) -> Point3:
        return Point3(*map(float, self.points[i]))


def distance(p: Sequence[float], q: Sequence[float]) -> float:
    return math.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2)


def outside_restricted_ellipse(p: Sequence[float], zone: RestrictedZone) -> bool:
    # boundary counts as feasible
    dx = (p[0] - zone.center_x) / zone.b
    dy = (p[1] - zone.center_y) / zone.a
    return dx * dx + dy * dy >= 1.0


def outside_restricted_band(p: Sequence[float], zone: RestrictedZone) -> bool:
    return abs(p[0] - zone.center_x) >= zone.b


def outside_restricted_zone(p: Sequence[float], zone: RestrictedZone) -> bool:
    if zone.mode == "ellipse":
        return outside_restricted_ellipse(p, zone)
    return outside_restricted_band(p, zone)


def altitude_ok(p: Sequence[float], band: AltitudeBand) -> bool:
    return band.h_min <= p[2] <= band.h_max


def position_ok(p: Sequence[float], zone: RestrictedZone, band: AltitudeBand) -> bool:
    return outside_restricted_zone(p, zone) and altitude_ok(p, band)


def filter_candidates(grid: CandidateGrid, zone: RestrictedZone, band: AltitudeBand) -> CandidateGrid:
    """Keep the candidates that pass both the zone test and the altitude test.

    Relative order is preserved and the surviving rows keep their original
    indices.  Raises :class:`EmptyGrid` when nothing survives.
    """
    keep = [i for i, p in enumerate(grid.points) if position_ok(p, zone, band)]
    if not keep:
        raise EmptyGrid(f"region {grid.region_id}: no candidate passes the regulatory filters")
    keep = np.asarray(keep, dtype=np.int64)
    return CandidateGrid(grid.region_id, grid.points[keep], grid.indices[keep])


def lattice_grid(region: Region, region_id: int, nx: int, ny: int, nz: int, band: AltitudeBand) -> CandidateGrid:
    """Regular lattice of ``nx * ny * nz`` candidates inside ``region``.

    Horizontal points sit at the centers of an ``nx`` by ``ny`` partition of
    the region; altitudes are ``nz`` equally spaced levels spanning the band.
    Index order is x-major, then y, then z.
    """
    if min(nx, ny, nz) < 1:
        raise ValidationError("grid", "nx, ny and nz must all be >= 1")
    xs = region.x_min + (np.arange(nx) + 0.5) * region.width / nx
    ys = region.y_min + (np.arange(ny) + 0.5) * region.height / ny
    zs = np.linspace(band.h_min, band.h_max, nz)
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    return CandidateGrid(region_id, pts)


def offset_grid(region: Region, region_id: int, offsets) -> CandidateGrid:
    """Candidates given as (dx, dy, z) offsets from the region's lower-left corner."""
    off = np.asarray(offsets, dtype=float).reshape(-1, 3)
    pts = off + np.array([region.x_min, region.y_min, 0.0])
    for i, p in enumerate(pts):
        if not region.contains_xy(p[0], p[1]):
            raise ValidationError("candidates_m", f"offset {i} falls outside region {region_id}")
    return CandidateGrid(region_id, pts)


def tile_regions(side: float, rows: int, cols: int) -> list[Region]:
    """Split a ``side`` x ``side`` square into ``rows * cols`` equal rectangles, row-major."""
    w, h = side / cols, side / rows
    return [
        Region(c * w, (c + 1) * w, r * h, (r + 1) * h)
        for r in range(rows)
        for c in range(cols)
    ]


def place_users(region: Region, count: int, seed) -> list[Point3]:
    """Drop ``count`` ground users uniformly at random inside ``region``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; the same
    seed always yields the same sequence.
    """
    if count < 1:
        raise ValidationError("users_per_region", "must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random((count, 2))
    xs = region.x_min + u[:, 0] * region.width
    ys = region.y_min + u[:, 1] * region.height
    # guard against round-up past the upper edge
    xs = np.minimum(xs, region.x_max)
    ys = np.minimum(ys, region.y_max)
    return [Point3(float(x), float(y), 0.0) for x, y in zip(xs, ys)]

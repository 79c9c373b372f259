"""Planar geometry on a square wrap-around region.

Scalar helpers take :class:`Point` values; the ``*_many`` variants work on
``(n, 2)`` coordinate arrays and are what the simulators use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Slack for angle comparisons so that arcs which merely touch a sector edge
# are not counted as overlapping after floating point round-off.
_ANGLE_EPS = 1e-12


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Torus:
    """Square of side ``side`` with opposite edges identified."""

    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"torus side must be positive, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def wrap(self, p) -> Point:
        return Point(float(p[0]) % self.side, float(p[1]) % self.side)


@dataclass(frozen=True)
class ProximityModel:
    """Disc-plus-angle proximity rule.

    A user seen from an RRH site occupies the arc ``bearing +/- theta``, so
    ``theta = pi`` makes every user visible in every sector.  ``sectors`` is
    the number of equal angular sectors per site and ``sector_offset`` the
    angle of the leading edge of sector 0.
    """

    r_o: float
    theta: float = math.pi
    sectors: int = 1
    sector_offset: float = 0.0

    def __post_init__(self):
        if not self.r_o > 0:
            raise ValueError(f"r_o must be positive, got {self.r_o}")
        if not 0 < self.theta <= math.pi:
            raise ValueError(f"theta must lie in (0, pi], got {self.theta}")
        if int(self.sectors) != self.sectors or self.sectors < 1:
            raise ValueError(f"sectors must be a positive integer, got {self.sectors}")

    @property
    def diameter(self) -> float:
        return 2.0 * self.r_o

    @property
    def disc_area(self) -> float:
        # D = (pi/4) d^2 = pi r_o^2
        return math.pi * self.r_o**2


def _images(t: Torus, p: Point, q: Point):
    for ox in (-t.side, 0.0, t.side):
        for oy in (-t.side, 0.0, t.side):
            yield (q.x + ox - p.x, q.y + oy - p.y)


def torus_displacement(t: Torus, p: Point, q: Point) -> tuple[float, float]:
    """Shortest displacement from ``p`` to ``q`` over the 9 periodic images.

    Ties between images at equal length go to the lexicographically smallest
    ``(dx, dy)``.
    """
    return min(_images(t, p, q), key=lambda d: (math.hypot(*d), d))


def torus_distance(t: Torus, p: Point, q: Point) -> float:
    return min(math.hypot(dx, dy) for dx, dy in _images(t, p, q))


def torus_bearing(t: Torus, src: Point, dst: Point) -> float:
    """Angle in ``[0, 2*pi)`` of the shortest displacement ``src -> dst``."""
    dx, dy = torus_displacement(t, src, dst)
    if dx == 0.0 and dy == 0.0:
        raise ValueError("undefined bearing: points coincide")
    return math.atan2(dy, dx) % TWO_PI


def in_proximity(t: Torus, m: ProximityModel, user: Point, rrh: Point) -> bool:
    return torus_distance(t, user, rrh) < m.r_o


def overlapped_sectors(m: ProximityModel, bearing: float) -> list[int]:
    """Sorted indices of the sectors whose open arc meets the user's arc."""
    S = int(m.sectors)
    if S == 1:
        return [0]
    width = TWO_PI / S
    rel = (bearing - m.sector_offset) % TWO_PI
    lo = (rel - m.theta) / width
    hi = (rel + m.theta) / width
    first = math.floor(lo + _ANGLE_EPS)
    last = math.ceil(hi - _ANGLE_EPS) - 1
    if last - first + 1 >= S:
        return list(range(S))
    return sorted({i % S for i in range(first, last + 1)})


def sector_overlap(m: ProximityModel, bearing: float, sector_index: int) -> bool:
    if not 0 <= sector_index < m.sectors:
        raise ValueError(f"sector index {sector_index} outside 0..{m.sectors - 1}")
    return sector_index in overlapped_sectors(m, bearing)


# -- array versions -----------------------------------------------------------


def min_image(delta: np.ndarray, side: float) -> np.ndarray:
    """Map coordinate differences into ``[-side/2, side/2)``.

    Exact half-period ties land on ``-side/2``, which matches the
    lexicographic tie-break of :func:`torus_displacement`.
    """
    return (delta + side / 2) % side - side / 2


def bearings_many(side: float, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Bearings of ``dst[i]`` seen from ``src[i]`` (row-wise)."""
    d = min_image(np.asarray(dst, float) - np.asarray(src, float), side)
    return np.arctan2(d[..., 1], d[..., 0]) % TWO_PI


def sector_span(m: ProximityModel, bearings: np.ndarray, offsets=None) -> tuple[np.ndarray, np.ndarray]:
    """First and last (unwrapped) sector index touched by each bearing's arc.

    A bearing touches sectors ``first, first+1, ..., last`` taken mod S.
    ``offsets`` optionally overrides ``m.sector_offset`` per bearing.
    """
    width = TWO_PI / m.sectors
    offset = m.sector_offset if offsets is None else np.asarray(offsets, float)
    rel = (np.asarray(bearings, float) - offset) % TWO_PI
    first = np.floor((rel - m.theta) / width + _ANGLE_EPS).astype(np.int64)
    last = np.ceil((rel + m.theta) / width - _ANGLE_EPS).astype(np.int64) - 1
    last = np.minimum(last, first + m.sectors - 1)
    return first, last

"""Placement of RRH sites and active users."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point, ProximityModel, Torus


@dataclass(frozen=True)
class LatticeSpec:
    """Two offset square sub-lattices of ``c x c`` points each.

    Grid spacing is ``d / sqrt(beta)``; the region is scaled to fit the
    lattice exactly, so the region side is ``c * d / sqrt(beta)``.
    """

    c: int
    beta: float

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"c must be a positive integer, got {self.c}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def size(self) -> int:
        return 2 * self.c * self.c

    def spacing(self, d: float) -> float:
        return d / math.sqrt(self.beta)

    def side(self, d: float) -> float:
        return self.c * self.spacing(d)


@dataclass
class DeploymentSnapshot:
    torus: Torus
    rrh_positions: np.ndarray
    user_positions: np.ndarray
    model: ProximityModel
    # per-RRH orientation of sector 0; None means model.sector_offset everywhere
    sector_offsets: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.rrh_positions = np.asarray(self.rrh_positions, float).reshape(-1, 2)
        self.user_positions = np.asarray(self.user_positions, float).reshape(-1, 2)

    @property
    def N(self) -> int:
        return len(self.rrh_positions)

    @property
    def K(self) -> int:
        return len(self.user_positions)


def place_random(t: Torus, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points on the torus as an ``(n, 2)`` array."""
    if n < 0:
        raise ValueError(f"point count must be non-negative, got {n}")
    return rng.uniform(0.0, t.side, size=(n, 2))


def lattice_points(spec: LatticeSpec, d: float) -> tuple[Torus, np.ndarray]:
    step = spec.spacing(d)
    torus = Torus(spec.side(d))
    i, j = np.meshgrid(np.arange(spec.c), np.arange(spec.c), indexing="ij")
    grid = np.column_stack([i.ravel(), j.ravel()]) * step
    pts = np.vstack([grid, grid + step / 2])
    return torus, pts % torus.side


def place_user_lattice(spec: LatticeSpec, d: float) -> tuple[Torus, np.ndarray]:
    """Users at the centres of the ``2 c^2`` lattice discs of diameter ``d``."""
    return lattice_points(spec, d)


def place_rrh_lattice(spec: LatticeSpec, d: float) -> tuple[Torus, np.ndarray]:
    return lattice_points(spec, d)


def lattice_for_side(c: int, side: float, d: float) -> LatticeSpec:
    """The lattice with ``2 c^2`` points whose region side equals ``side``."""
    return LatticeSpec(c, (c * d / side) ** 2)


def side_for_area_ratio(area_ratio: float, r_o: float) -> float:
    """Region side giving ``A / D == area_ratio`` for discs of radius ``r_o``."""
    if not area_ratio > 0:
        raise ValueError(f"area ratio must be positive, got {area_ratio}")
    return math.sqrt(area_ratio * math.pi * r_o**2)


def as_points(arr: np.ndarray) -> list[Point]:
    return [Point(float(x), float(y)) for x, y in np.asarray(arr).reshape(-1, 2)]

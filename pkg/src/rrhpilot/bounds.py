"""Upper bounds on the per-RE multiplexing gain from lattice scheduling.

All quantities are expressed relative to the disc area ``D = pi r_o^2`` so
only the ratio ``A/D`` enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def default_beta_grid(points: int = 128) -> np.ndarray:
    return np.geomspace(0.5, 2.0, points)


@dataclass(frozen=True)
class BoundParams:
    area_ratio: float
    N: int
    beta_grid: np.ndarray = field(default_factory=default_beta_grid)

    def __post_init__(self):
        if not self.area_ratio > 0:
            raise ValueError(f"A/D must be positive, got {self.area_ratio}")
        b = np.asarray(self.beta_grid, float)
        if b.size == 0 or b.min() <= 0 or b.max() > 2:
            raise ValueError("beta grid must be non-empty and inside (0, 2]")
        object.__setattr__(self, "beta_grid", b)


def m_max(area_ratio: float) -> float:
    """Gain of the densest lattice (beta = 2) with every user served: pi A/D."""
    if not area_ratio > 0:
        raise ValueError(f"A/D must be positive, got {area_ratio}")
    return math.pi * area_ratio


def lattice_users(beta, area_ratio: float):
    """Users scheduled by the beta-lattice: ``(pi/2) beta A/D``."""
    return 0.5 * math.pi * np.asarray(beta, float) * area_ratio


def lambda_area(beta, D: float = 1.0):
    """Area of a user's disc not overlapped by its lattice neighbours.

    Square approximation ``(4/pi) D (sqrt(2/beta) - 1)^2``, capped at ``D``;
    zero for ``beta >= 2``.
    """
    b = np.asarray(beta, float)
    if np.any(b <= 0):
        raise ValueError("beta must be positive")
    with np.errstate(invalid="ignore"):
        lam = (4 / math.pi) * D * (np.sqrt(2 / b) - 1) ** 2
    lam = np.where(b >= 2, 0.0, np.minimum(lam, D))
    return float(lam) if lam.ndim == 0 else lam


def p1(beta, N: int, area_ratio: float):
    """Probability that at least one of ``N`` uniform RRHs lands in the free area."""
    if N < 0:
        raise ValueError("N must be non-negative")
    frac = np.asarray(lambda_area(beta, 1.0)) / area_ratio
    if np.any(frac > 1):
        raise ValueError("free area exceeds the region; A/D too small")
    if N == 0:
        p = np.zeros_like(frac, dtype=float)
    else:
        # 1 - (1 - f)^N, stable for small f and large N; f == 1 gives exactly 1
        with np.errstate(divide="ignore"):
            p = -np.expm1(N * np.log1p(-frac))
    return float(p) if np.ndim(p) == 0 else p


def lattice_bound(params: BoundParams) -> tuple[float, float]:
    """``(max_beta K(beta) p1(beta, N), argmax beta)``; ties go to the smaller beta."""
    b = np.sort(params.beta_grid)
    vals = lattice_users(b, params.area_ratio) * p1(b, params.N, params.area_ratio)
    i = int(np.argmax(vals))  # first maximum == smallest beta
    return float(vals[i]), float(b[i])

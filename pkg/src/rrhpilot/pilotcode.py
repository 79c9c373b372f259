"""Constant-weight on-off pilot codes and OR-channel proximity decoding.

A code of length ``L + ell`` holds binary patterns with exactly ``L`` ones.
A node sees, per pilot RE, whether any proximate user transmitted there.
Because distinct codewords have distinct zero sets, a lone user leaves
exactly ``ell`` silent REs that name it, while two or more users leave at
most ``ell - 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Union

import numpy as np


class CapacityError(ValueError):
    """More users than the code has codewords."""


@dataclass(frozen=True)
class OnOffCode:
    L: int
    ell: int
    codewords: np.ndarray  # (K, L + ell) uint8

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=np.uint8)
        if cw.ndim != 2 or cw.shape[1] != self.length:
            raise ValueError(f"codewords must have shape (K, {self.length})")
        if cw.size and np.any(cw.sum(axis=1) != self.L):
            raise ValueError(f"every codeword must have weight {self.L}")
        if len({r.tobytes() for r in cw}) != len(cw):
            raise ValueError("codewords must be distinct")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def length(self) -> int:
        return self.L + self.ell

    @property
    def K(self) -> int:
        return len(self.codewords)

    @property
    def capacity(self) -> int:
        return comb(self.L + self.ell, self.ell)

    def zero_set(self, k: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.codewords[k] == 0).tolist())

    def to_strings(self) -> list[str]:
        """Codewords as 0/1 strings, RE 1 leftmost."""
        return ["".join(map(str, row.tolist())) for row in self.codewords]


def enumerate_codewords(L: int, ell: int, K: int) -> OnOffCode:
    """First ``K`` weight-``L`` words of length ``L + ell``.

    Words are ordered lexicographically by the (0-based) positions of their
    zeros, so with ``ell = 1`` user ``k`` is silent on RE ``k``.
    """
    if L < 1 or ell < 0:
        raise ValueError(f"need L >= 1 and ell >= 0, got L={L}, ell={ell}")
    cap = comb(L + ell, ell)
    if not 1 <= K <= cap:
        raise CapacityError(f"K={K} outside 1..{cap} for L={L}, ell={ell}")
    words = np.ones((K, L + ell), dtype=np.uint8)
    for k, zeros in enumerate(itertools.islice(itertools.combinations(range(L + ell), ell), K)):
        words[k, list(zeros)] = 0
    return OnOffCode(L, ell, words)


def or_channel(code: OnOffCode, z) -> np.ndarray:
    z = np.asarray(z, dtype=bool)
    if z.shape != (code.K,):
        raise ValueError(f"proximity vector must have length {code.K}")
    return code.codewords[z].any(axis=0).astype(np.uint8)


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Single:
    user: int
    estimation_res: frozenset[int]


@dataclass(frozen=True)
class Collision:
    pass


@dataclass(frozen=True)
class Invalid:
    zeros: frozenset[int]


DecodeOutcome = Union[Empty, Single, Collision, Invalid]


class Decoder:
    """Zero-set lookup table for one code."""

    def __init__(self, code: OnOffCode):
        self.code = code
        self._by_zeros = {code.zero_set(k): k for k in range(code.K)}

    def __call__(self, eps) -> DecodeOutcome:
        eps = np.asarray(eps)
        if eps.shape != (self.code.length,):
            raise ValueError(f"observation length {eps.shape} != ({self.code.length},)")
        zeros = frozenset(np.flatnonzero(eps == 0).tolist())
        n0 = len(zeros)
        if n0 == self.code.length:
            return Empty()
        if n0 < self.code.ell:
            return Collision()
        if n0 == self.code.ell and zeros in self._by_zeros:
            k = self._by_zeros[zeros]
            ones = frozenset(range(self.code.length)) - zeros
            return Single(k, ones)
        return Invalid(zeros)


def decode(code: OnOffCode, eps) -> DecodeOutcome:
    return Decoder(code)(eps)


def min_ell(K: int, L: int) -> int:
    """Smallest ``ell >= 1`` with ``C(L+ell, ell) >= K``; 0 when ``K == 1``."""
    if K < 1 or L < 1:
        raise ValueError(f"need K >= 1 and L >= 1, got K={K}, L={L}")
    if K == 1:
        return 0
    ell = 1
    while comb(L + ell, ell) < K:
        ell += 1
    return ell


def efficiency(K: int, L: int) -> float:
    """Best achievable share ``L / (L + ell)`` of useful pilot REs for ``K`` users."""
    return L / (L + min_ell(K, L))


def efficiency_curve(K_max: int, L: int) -> np.ndarray:
    """``efficiency(K, L)`` for ``K = 1..K_max`` in one pass."""
    if K_max < 1 or L < 1:
        raise ValueError(f"need K_max >= 1 and L >= 1, got K_max={K_max}, L={L}")
    caps = [L + 1]  # caps[i] = C(L + ell, ell) with ell = i + 1
    while caps[-1] < K_max:
        ell = len(caps) + 1
        caps.append(comb(L + ell, ell))
    ell = np.searchsorted(caps, np.arange(1, K_max + 1)) + 1
    ell[0] = 0
    return L / (L + ell)


def net_gain(m: float, K: int, L: int) -> float:
    if m < 0:
        raise ValueError("gain must be non-negative")
    return m * efficiency(K, L)

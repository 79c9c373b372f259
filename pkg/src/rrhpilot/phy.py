"""Energy-detection check of the OR-channel abstraction.

Users in proximity have large-scale gain ``g``; everyone else contributes
nothing.  Pilot observations are already scaled by ``1/sqrt(gamma_p)`` so the
noise per antenna has variance ``N_o / gamma_p``; with the default
``gamma_p = 1`` the detector threshold is ``0.5 g + N_o``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pilotcode import Decoder, OnOffCode, or_channel
from .rng import substream

CHUNK = 256  # trials per random sub-stream in or_agreement


@dataclass(frozen=True)
class PhyParams:
    M: int
    g: float
    N_o: float = 1.0
    gamma_p: float = 1.0
    taps: int | None = None
    tap_powers: tuple[float, ...] | None = None
    N_fft: int = 64

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.g < 0 or self.N_o <= 0 or self.gamma_p <= 0:
            raise ValueError("need g >= 0, N_o > 0, gamma_p > 0")
        if self.taps is not None:
            if self.taps < 1 or self.taps > self.N_fft:
                raise ValueError("taps must lie in 1..N_fft")
            if self.tap_powers is not None:
                if len(self.tap_powers) != self.taps:
                    raise ValueError("need one power per tap")
                if not math.isclose(sum(self.tap_powers), self.g, rel_tol=1e-9, abs_tol=1e-12):
                    raise ValueError("tap powers must sum to g")

    @classmethod
    def from_snr_db(cls, M: int, snr_db: float, **kw) -> PhyParams:
        """Parameters with ``N_o = 1`` and ``g / N_o`` given in dB."""
        return cls(M=M, g=10 ** (snr_db / 10), N_o=1.0, **kw)

    @property
    def noise_var(self) -> float:
        return self.N_o / self.gamma_p

    @property
    def threshold(self) -> float:
        return 0.5 * self.g + self.noise_var

    def powers(self) -> np.ndarray:
        if self.taps is None:
            raise ValueError("no tap model configured")
        if self.tap_powers is None:
            return np.full(self.taps, self.g / self.taps)
        return np.asarray(self.tap_powers, float)


@dataclass
class PhyObservation:
    y: np.ndarray       # (..., M) received vectors, one per RE
    energy: np.ndarray  # (...) per-antenna energy ||y||^2 / M


def cn(rng: np.random.Generator, var, size) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with variance ``var``."""
    s = np.sqrt(np.asarray(var, float) / 2)
    return s * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _shape(size, *tail) -> tuple:
    return (*np.atleast_1d(np.asarray(size, dtype=int)).tolist(), *tail) if np.size(size) else tail


def gen_channel_flat(params: PhyParams, rng: np.random.Generator, size=()) -> np.ndarray:
    """``CN(0, g I)`` antenna vectors, shape ``(*size, M)``."""
    return cn(rng, params.g, _shape(size, params.M))


def tone_response(taps: np.ndarray, tones, N_fft: int) -> np.ndarray:
    """Frequency response of ``taps[..., tau, :]`` on the given tones.

    ``taps`` has the tap index on axis -2 and antennas on axis -1; the result
    replaces the tap axis by one entry per tone.
    """
    tones = np.atleast_1d(tones)
    tau = np.arange(taps.shape[-2])
    phase = np.exp(-2j * np.pi * np.outer(tones, tau) / N_fft)  # (n_tones, L)
    return np.einsum("nt,...tm->...nm", phase, taps)


def gen_taps(params: PhyParams, rng: np.random.Generator, size=()) -> np.ndarray:
    return cn(rng, params.powers()[:, None], _shape(size, params.taps, params.M))


def gen_channel_taps(params: PhyParams, tone_n: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= tone_n < params.N_fft:
        raise ValueError(f"tone {tone_n} outside 0..{params.N_fft - 1}")
    return tone_response(gen_taps(params, rng), [tone_n], params.N_fft)[0]


def received_pilot(params: PhyParams, codebits, z, rng: np.random.Generator, channels=None) -> PhyObservation:
    """Observation on one pilot RE.

    ``codebits[k]`` says whether user ``k`` transmits on this RE and ``z[k]``
    whether it is in proximity (gain ``g``) or not (gain 0).  ``channels``
    optionally supplies the ``(K, M)`` user channels, each ``CN(0, g I)``.
    """
    b = np.asarray(codebits, float)
    zz = np.asarray(z, float)
    if b.shape != zz.shape:
        raise ValueError("codebits and z must have the same length")
    if channels is None:
        channels = gen_channel_flat(params, rng, size=len(b))
    y = (b * zz) @ np.asarray(channels).reshape(len(b), params.M)
    y = y + cn(rng, params.noise_var, params.M)
    return PhyObservation(y, np.array(np.vdot(y, y).real / params.M))


def detect(energy, params: PhyParams):
    """Hard decision ``energy > 0.5 g + N_o``."""
    e = np.asarray(energy)
    out = (e > params.threshold).astype(np.uint8)
    return int(out) if out.ndim == 0 else out


def expected_energy(params: PhyParams, codebits, z) -> float:
    return float(np.dot(np.asarray(codebits, float), np.asarray(z, float)) * params.g + params.noise_var)


def block_energies(params: PhyParams, code: OnOffCode, z, rng: np.random.Generator, n_trials: int,
                   tones=None) -> np.ndarray:
    """Per-antenna energies on all ``L + ell`` REs for ``n_trials`` slots.

    Only proximate users are drawn since the others have zero gain.  With a
    tap model the REs sit on ``tones`` (default: evenly spread) and share the
    user's taps within a slot; the flat model draws each RE independently.
    """
    z = np.asarray(z, bool)
    bits = code.codewords[z].astype(float)  # (P, L')
    P, n_re = bits.shape
    M = params.M
    if params.taps is None:
        h = cn(rng, params.g, (n_trials, P, n_re, M))
    else:
        if tones is None:
            tones = np.arange(n_re) * (params.N_fft // n_re)
        h = tone_response(gen_taps(params, rng, (n_trials, P)), tones, params.N_fft)
    y = np.einsum("pn,tpnm->tnm", bits, h) + cn(rng, params.noise_var, (n_trials, n_re, M))
    return (y.real**2 + y.imag**2).sum(axis=-1) / M


@dataclass
class Agreement:
    re_rate: float
    decode_rate: float
    trials: int


def or_agreement(params: PhyParams, code: OnOffCode, z, trials: int, seed: int) -> Agreement:
    """How often energy detection reproduces the ideal OR observation.

    ``re_rate`` counts matching ``(trial, RE)`` pairs; ``decode_rate`` counts
    trials whose decoded outcome equals the ideal one.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    ideal = or_channel(code, z)
    dec = Decoder(code)
    want = dec(ideal)
    re_hits = 0
    dec_hits = 0
    for c, start in enumerate(range(0, trials, CHUNK)):
        n = min(CHUNK, trials - start)
        eps_hat = detect(block_energies(params, code, z, substream(seed, c, "channel"), n), params)
        re_hits += int((eps_hat == ideal).sum())
        dec_hits += sum(dec(row) == want for row in eps_hat)
    return Agreement(re_hits / (trials * code.length), dec_hits / trials, trials)

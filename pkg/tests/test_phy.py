import math

import numpy as np
import pytest

from rrhpilot.phy import (
    PhyParams,
    block_energies,
    detect,
    expected_energy,
    gen_channel_flat,
    gen_channel_taps,
    gen_taps,
    or_agreement,
    received_pilot,
    tone_response,
)
from rrhpilot.pilotcode import enumerate_codewords
from rrhpilot.rng import substream


def rng(k=0):
    return substream(123, k, "channel")


def test_params_validation():
    with pytest.raises(ValueError):
        PhyParams(M=0, g=1)
    with pytest.raises(ValueError):
        PhyParams(M=1, g=1, N_o=0)
    with pytest.raises(ValueError):
        PhyParams(M=1, g=1, taps=3, tap_powers=(0.5, 0.5))
    with pytest.raises(ValueError):
        PhyParams(M=1, g=1, taps=2, tap_powers=(0.5, 0.6))
    p = PhyParams.from_snr_db(4, 10.0)
    assert p.g == pytest.approx(10.0) and p.threshold == pytest.approx(6.0)
    np.testing.assert_allclose(PhyParams(2, 3.0, taps=3).powers(), [1, 1, 1])


def test_flat_channel_moments_and_zero_gain():
    assert not np.any(gen_channel_flat(PhyParams(8, 0.0), rng()))
    h = gen_channel_flat(PhyParams(100_000, 1.0), rng(1))
    v = np.abs(h) ** 2
    assert abs(v.mean() - 1) < 3 * v.std() / math.sqrt(v.size)
    assert h.real.var() == pytest.approx(0.5, rel=0.02)
    np.testing.assert_array_equal(gen_channel_flat(PhyParams(5, 2.0), rng(2)),
                                  gen_channel_flat(PhyParams(5, 2.0), rng(2)))


def test_tap_channel():
    p = PhyParams(4, 2.0, taps=3, N_fft=16)
    taps = gen_taps(p, rng(3))
    np.testing.assert_allclose(tone_response(taps, [0], 16)[0], taps.sum(axis=0))
    n = 5
    manual = sum(taps[t] * np.exp(-2j * np.pi * n * t / 16) for t in range(3))
    np.testing.assert_allclose(tone_response(taps, [n], 16)[0], manual)
    with pytest.raises(ValueError):
        gen_channel_taps(p, 16, rng())


def test_single_tap_is_the_flat_model():
    a = gen_channel_taps(PhyParams(6, 2.0, taps=1), 7, rng(4))
    b = gen_taps(PhyParams(6, 2.0, taps=1), rng(4))[0]
    np.testing.assert_allclose(a, b)
    assert np.var(gen_taps(PhyParams(100_000, 2.0, taps=1), rng(5)).real) == pytest.approx(1.0, rel=0.02)


def test_tap_response_variance_per_tone():
    p = PhyParams(100_000, 3.0, taps=4, tap_powers=(1.5, 0.75, 0.5, 0.25), N_fft=32)
    h = gen_channel_taps(p, 9, rng(6))
    v = np.abs(h) ** 2
    assert abs(v.mean() - 3.0) < 3 * v.std() / math.sqrt(v.size)


def test_tap_and_flat_energies_agree():
    code = enumerate_codewords(5, 3, 56)
    z = np.zeros(56, bool)
    z[[3, 40]] = True
    flat = block_energies(PhyParams(8, 10.0), code, z, rng(7), 20_000)
    taps = block_energies(PhyParams(8, 10.0, taps=6), code, z, rng(8), 20_000)
    for n in range(8):
        a, b = flat[:, n], taps[:, n]
        se = math.hypot(a.std(), b.std()) / math.sqrt(len(a))
        assert abs(a.mean() - b.mean()) < 4 * se
        assert b.var() == pytest.approx(a.var(), rel=0.1)


def test_received_pilot_expectations():
    p = PhyParams(4, 10.0)
    for bits, z, want in [([0, 0], [1, 1], 1.0), ([1, 0], [1, 1], 11.0), ([1, 1], [1, 1], 21.0),
                          ([1, 1], [0, 1], 11.0)]:
        e = np.array([received_pilot(p, bits, z, rng(k)).energy for k in range(20_000)])
        assert expected_energy(p, bits, z) == want
        assert abs(e.mean() - want) < 3 * e.std() / math.sqrt(len(e))
    obs = received_pilot(p, [1], [1], rng(), channels=np.zeros((1, 4)))
    assert obs.y.shape == (4,) and obs.energy >= 0
    with pytest.raises(ValueError):
        received_pilot(p, [1, 0], [1], rng())


def test_detect():
    p = PhyParams(1, 10.0)
    assert detect(0.0, p) == 0
    assert detect(11.0, p) == 1
    assert detect(1.0, p) == 0
    assert detect(6.0, p) == 0  # strict
    np.testing.assert_array_equal(detect(np.array([0.0, 7.0]), p), [0, 1])


def test_energy_variance_scales_as_one_over_M():
    code = enumerate_codewords(5, 3, 56)
    z = np.zeros(56, bool)
    z[10] = True
    prev = None
    for M in (4, 8, 16, 32):
        var = block_energies(PhyParams(M, 10.0), code, z, rng(M), 10_000)[:, 0].var()
        if prev is not None:
            assert var == pytest.approx(prev / 2, rel=0.2)
        prev = var


def test_detection_errors_shrink_with_M():
    code = enumerate_codewords(5, 3, 56)
    z = np.zeros(56, bool)
    z[[2, 30]] = True
    rates = [or_agreement(PhyParams.from_snr_db(M, 10.0), code, z, 2000, 1).re_rate
             for M in (1, 2, 4, 8, 16, 32, 64)]
    assert all(a <= b for a, b in zip(rates, rates[1:]))
    assert rates[0] < rates[-1]


def test_silent_users_read_as_silence_for_large_M():
    # every user's gain g_k = z_k g is zero; the detector is still tuned for g
    code = enumerate_codewords(5, 3, 56)
    z = np.zeros(56, bool)
    rates = [or_agreement(PhyParams.from_snr_db(M, 10.0), code, z, 500, 0).re_rate for M in (1, 16, 256)]
    assert rates == sorted(rates) and rates[-1] == 1.0
    assert or_agreement(PhyParams.from_snr_db(256, 10.0), code, z, 500, 0).decode_rate == 1.0
    with pytest.raises(ValueError):
        or_agreement(PhyParams(1, 1.0), code, z, 0, 0)

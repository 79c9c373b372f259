import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from rrhpilot.deployment import (
    LatticeSpec,
    as_points,
    lattice_for_side,
    place_random,
    place_rrh_lattice,
    place_user_lattice,
    side_for_area_ratio,
)
from rrhpilot.geometry import ProximityModel, Torus, min_image
from rrhpilot.rng import substream


def _torus_pdist(pts, side):
    diff = min_image(pts[:, None, :] - pts[None, :, :], side)
    d = np.hypot(diff[..., 0], diff[..., 1])
    return d[np.triu_indices(len(pts), 1)]


def test_random_placement_basics():
    t = Torus(10.0)
    assert place_random(t, 0, substream(0, 0, "users")).shape == (0, 2)
    a = place_random(t, 3, substream(7, 2, "users"))
    b = place_random(t, 3, substream(7, 2, "users"))
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        place_random(t, -1, substream(0, 0, "users"))


def test_random_placement_mean():
    n = 100_000
    x = place_random(Torus(10.0), n, substream(11, 0, "users"))[:, 0]
    sigma = 10 / math.sqrt(12) / math.sqrt(n)
    assert abs(x.mean() - 5.0) < 3 * sigma
    assert x.min() >= 0 and x.max() < 10


def test_substreams_do_not_depend_on_order():
    forward = [substream(5, t, "users").random(4) for t in range(6)]
    backward = [substream(5, t, "users").random(4) for t in reversed(range(6))][::-1]
    np.testing.assert_array_equal(forward, backward)
    assert not np.array_equal(substream(5, 0, "users").random(4), substream(5, 0, "rrh").random(4))


def test_lattice_counts_and_small_case():
    t, pts = place_user_lattice(LatticeSpec(3, 1.0), 2.0)
    assert len(pts) == 18
    assert len(place_rrh_lattice(LatticeSpec(3, 1.0), 2.0)[1]) == 18
    t, pts = place_user_lattice(LatticeSpec(1, 2.0), 2.0)
    assert t.side == pytest.approx(math.sqrt(2))
    np.testing.assert_allclose(pts, [[0, 0], [math.sqrt(2) / 2, math.sqrt(2) / 2]])


def test_lattice_is_deterministic_with_half_step_offset():
    spec = LatticeSpec(4, 1.3)
    t1, a = place_rrh_lattice(spec, 2.0)
    t2, b = place_rrh_lattice(spec, 2.0)
    np.testing.assert_array_equal(a, b)
    step = spec.spacing(2.0)
    np.testing.assert_allclose(a[16:] - a[:16], step / 2)


@given(st.integers(1, 12), st.floats(0.3, 2.0), st.floats(0.5, 3.0))
def test_lattice_user_count_identity(c, beta, d):
    t, pts = place_user_lattice(LatticeSpec(c, beta), d)
    D = math.pi / 4 * d**2
    assert len(pts) == 2 * c * c
    assert len(pts) == pytest.approx(math.pi / 2 * beta * t.area / D, rel=1e-9)
    assert np.all((pts >= 0) & (pts < t.side))


@given(st.integers(2, 9), st.floats(0.3, 2.0), st.floats(0.5, 3.0))
def test_lattice_nearest_neighbour(c, beta, d):
    t, pts = place_user_lattice(LatticeSpec(c, beta), d)
    dists = _torus_pdist(pts, t.side)
    assert dists.min() > 0
    assert dists.min() == pytest.approx(d / math.sqrt(beta) * math.sqrt(2) / 2, rel=1e-9)


def test_lattice_for_side_and_area_ratio():
    side = side_for_area_ratio(10.0, 1.0)
    assert side**2 / ProximityModel(1.0).disc_area == pytest.approx(10.0)
    spec = lattice_for_side(8, side, 2.0)
    assert spec.side(2.0) == pytest.approx(side)
    with pytest.raises(ValueError):
        LatticeSpec(0, 1.0)
    with pytest.raises(ValueError):
        side_for_area_ratio(0, 1.0)


def test_as_points():
    pts = as_points(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert pts[1].x == 3.0 and pts[0].y == 2.0
    assert len(pdist(np.array(pts))) == 1

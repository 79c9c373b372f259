"""Proximity graphs, the pilot-collision serving rule and gain statistics.

A *node* is an RRH site when sites are omni-directional, or an
``(rrh, sector)`` pair numbered ``rrh * S + sector`` otherwise.  Users share
the ``Q`` pilot REs of a block in ``Q // q`` disjoint groups of ``q`` REs; a
node serves the proximate users of a group only when there are at most ``q``
of them, and each group is judged on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from . import geometry as geo
from .deployment import (
    DeploymentSnapshot,
    lattice_for_side,
    lattice_points,
    place_random,
    side_for_area_ratio,
)
from .geometry import ProximityModel, Torus
from .rng import substream


@dataclass(frozen=True)
class PilotGrouping:
    Q: int
    q: int
    group_of_user: np.ndarray

    def __post_init__(self):
        if self.q < 1 or self.Q < 1 or self.Q % self.q:
            raise ValueError(f"q={self.q} must be a positive divisor of Q={self.Q}")
        g = np.asarray(self.group_of_user, dtype=np.int64)
        if g.size and (g.min() < 0 or g.max() >= self.n_groups):
            raise ValueError("group index out of range")
        object.__setattr__(self, "group_of_user", g)

    @property
    def n_groups(self) -> int:
        return self.Q // self.q

    @classmethod
    def single(cls, K: int, q: int = 1) -> PilotGrouping:
        """All ``K`` users in one group of ``q`` REs (the ``q == Q`` case)."""
        return cls(q, q, np.zeros(K, dtype=np.int64))


def assign_groups(K: int, Q: int, q: int, rng: np.random.Generator, balanced=False) -> PilotGrouping:
    """Random group per user; ``balanced`` deals users round-robin after a shuffle."""
    G = Q // q
    if balanced:
        groups = rng.permutation(np.arange(K) % G) if K else np.zeros(0, np.int64)
    else:
        groups = rng.integers(0, G, size=K)
    return PilotGrouping(Q, q, groups)


@dataclass
class ProximityGraph:
    """User/node adjacency stored as parallel arrays of edges."""

    n_users: int
    n_nodes: int
    sectors: int
    users: np.ndarray
    nodes: np.ndarray

    def proximate(self, node: int) -> set[int]:
        return set(self.users[self.nodes == node].tolist())

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n_nodes)]
        for u, n in zip(self.users.tolist(), self.nodes.tolist()):
            adj[n].add(u)
        return adj


def _near_pairs(side: float, users: np.ndarray, rrhs: np.ndarray, r_o: float,
                rrh_tree: cKDTree | None = None):
    """``(user, rrh)`` index pairs at torus distance strictly below ``r_o``."""
    if len(users) == 0 or len(rrhs) == 0:
        empty = np.zeros(0, np.int64)
        return empty, empty
    # cKDTree needs coordinates in [0, side); x % side can round up to side.
    users = np.where(users >= side, 0.0, users)
    tree_u = cKDTree(users, boxsize=side)
    if rrh_tree is None:
        rrh_tree = cKDTree(np.where(rrhs >= side, 0.0, rrhs), boxsize=side)
    pairs = tree_u.sparse_distance_matrix(rrh_tree, r_o, output_type="ndarray")
    keep = pairs["v"] < r_o
    return pairs["i"][keep].astype(np.int64), pairs["j"][keep].astype(np.int64)


def build_graph(snap: DeploymentSnapshot, rrh_tree: cKDTree | None = None) -> ProximityGraph:
    m = snap.model
    S = int(m.sectors)
    u, j = _near_pairs(snap.torus.side, snap.user_positions, snap.rrh_positions, m.r_o, rrh_tree)
    if S == 1:
        return ProximityGraph(snap.K, snap.N, 1, u, j)
    bearing = geo.bearings_many(snap.torus.side, snap.rrh_positions[j], snap.user_positions[u])
    offsets = None if snap.sector_offsets is None else np.asarray(snap.sector_offsets)[j]
    first, last = geo.sector_span(m, bearing, offsets)
    reps = last - first + 1
    starts = np.repeat(np.cumsum(reps) - reps, reps)
    sector = (np.repeat(first, reps) + np.arange(reps.sum()) - starts) % S
    return ProximityGraph(snap.K, snap.N * S, S, np.repeat(u, reps), np.repeat(j, reps) * S + sector)


@dataclass
class SlotOutcome:
    """Serving decisions for one slot.

    ``edge_served[e]`` says whether the node of edge ``e`` serves its user.
    """

    graph: ProximityGraph
    grouping: PilotGrouping
    edge_served: np.ndarray
    occupied_pairs: int
    collided_pairs: int

    def served_by(self, node: int) -> set[int]:
        mask = self.edge_served & (self.graph.nodes == node)
        return set(self.graph.users[mask].tolist())

    def node_sets(self) -> list[set[int]]:
        out: list[set[int]] = [set() for _ in range(self.graph.n_nodes)]
        for u, n in zip(self.graph.users[self.edge_served].tolist(),
                        self.graph.nodes[self.edge_served].tolist()):
            out[n].add(u)
        return out

    @property
    def served_users(self) -> set[int]:
        return set(np.unique(self.graph.users[self.edge_served]).tolist())

    @property
    def size(self) -> int:
        return int(np.unique(self.graph.users[self.edge_served]).size)


def served_sets(graph: ProximityGraph, grouping: PilotGrouping) -> SlotOutcome:
    if len(grouping.group_of_user) != graph.n_users:
        raise ValueError(
            f"grouping covers {len(grouping.group_of_user)} users, graph has {graph.n_users}"
        )
    G = grouping.n_groups
    key = graph.nodes * G + grouping.group_of_user[graph.users]
    counts = np.bincount(key, minlength=graph.n_nodes * G) if key.size else np.zeros(0, np.int64)
    edge_served = counts[key] <= grouping.q if key.size else np.zeros(0, bool)
    occupied = int(np.count_nonzero(counts))
    collided = int(np.count_nonzero(counts > grouping.q))
    return SlotOutcome(graph, grouping, edge_served, occupied, collided)


# -- Monte Carlo estimation ---------------------------------------------------


@dataclass(frozen=True)
class GainConfig:
    """One point of a random-scheduling experiment.

    The region side follows from ``area_ratio`` (A/D) and ``r_o``.  RRH sites
    are drawn once and held for all slots unless ``redraw_rrh`` is set;
    ``rrh_layout="lattice"`` replaces them with a ``2 c^2`` lattice, which
    requires ``N`` of that form.
    """

    N: int
    K: int
    Q: int = 1
    q: int = 1
    area_ratio: float = 10.0
    r_o: float = 1.0
    theta: float = math.pi
    S: int = 1
    rrh_layout: str = "random"
    redraw_rrh: bool = False
    balanced_groups: bool = False
    random_offsets: bool = False

    @property
    def side(self) -> float:
        return side_for_area_ratio(self.area_ratio, self.r_o)

    @property
    def model(self) -> ProximityModel:
        return ProximityModel(self.r_o, self.theta, self.S)

    def with_(self, **kw) -> GainConfig:
        return replace(self, **kw)


@dataclass
class GainResult:
    """Per-RE multiplexing gain estimated over ``trials`` slots.

    ``sizes`` holds ``|S(t)|`` for each slot; ``gain`` is their mean divided
    by the ``Q`` pilot REs the slot consumes.
    """

    config: GainConfig
    trials: int
    sizes: np.ndarray
    gain: float
    stderr: float
    collision_prob: float
    collision_stderr: float
    node_sets: list = field(default_factory=list, repr=False)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, float)
    if x.size == 0:
        return 0.0, 0.0
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def lattice_side_c(N: int) -> int:
    c = math.isqrt(N // 2)
    if 2 * c * c != N:
        raise ValueError(f"lattice RRH layout needs N = 2 c^2, got N={N}")
    return c


def rrh_layout(cfg: GainConfig, seed: int, trial: int = 0):
    """RRH coordinates and per-site sector offsets for one slot."""
    torus = Torus(cfg.side)
    if cfg.rrh_layout == "lattice":
        c = lattice_side_c(cfg.N) if cfg.N else 0
        pts = lattice_points(lattice_for_side(c, torus.side, 2 * cfg.r_o), 2 * cfg.r_o)[1] if c else np.zeros((0, 2))
    elif cfg.rrh_layout == "random":
        pts = place_random(torus, cfg.N, substream(seed, trial, "rrh"))
    else:
        raise ValueError(f"unknown rrh layout {cfg.rrh_layout!r}")
    offsets = None
    if cfg.random_offsets and cfg.S > 1:
        offsets = substream(seed, trial, "offsets").uniform(0, geo.TWO_PI / cfg.S, size=cfg.N)
    return pts, offsets


def slot_snapshot(cfg: GainConfig, seed: int, trial: int, rrhs=None, offsets=None) -> DeploymentSnapshot:
    torus = Torus(cfg.side)
    if rrhs is None:
        rrhs, offsets = rrh_layout(cfg, seed, trial)
    users = place_random(torus, cfg.K, substream(seed, trial, "users"))
    return DeploymentSnapshot(torus, rrhs, users, cfg.model, offsets)


def measure_gain(cfg: GainConfig, trials: int, seed: int, keep_sets: bool = False) -> GainResult:
    """Estimate the per-RE gain of ``cfg`` from ``trials`` independent slots.

    Slot ``t`` draws users (and groups, and RRHs when redrawn) from sub-streams
    keyed by ``t``, so results do not depend on evaluation order and grid
    points that share a seed also share their random numbers.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sizes = np.zeros(trials)
    coll = []
    sets = []
    fixed = None
    if not cfg.redraw_rrh:
        rrhs, offsets = rrh_layout(cfg, seed, 0)
        tree = cKDTree(np.where(rrhs >= cfg.side, 0.0, rrhs), boxsize=cfg.side) if len(rrhs) else None
        fixed = (rrhs, offsets, tree)
    for t in range(trials):
        if fixed is None:
            snap = slot_snapshot(cfg, seed, t)
            graph = build_graph(snap)
        else:
            snap = slot_snapshot(cfg, seed, t, fixed[0], fixed[1])
            graph = build_graph(snap, fixed[2])
        grouping = assign_groups(cfg.K, cfg.Q, cfg.q, substream(seed, t, "groups"), cfg.balanced_groups)
        out = served_sets(graph, grouping)
        sizes[t] = out.size
        if out.occupied_pairs:
            coll.append(out.collided_pairs / out.occupied_pairs)
        if keep_sets:
            sets.append(out.node_sets())
    gain, se = _mean_se(sizes / cfg.Q)
    cp, cse = _mean_se(np.array(coll))
    return GainResult(cfg, trials, sizes, gain, se, cp, cse, sets)


def collision_probability(cfg: GainConfig, trials: int, seed: int) -> float:
    """Mean over slots of the share of occupied ``(node, group)`` pairs that collide."""
    return measure_gain(cfg, trials, seed).collision_prob


@dataclass
class OptimumResult:
    K_opt: int
    gain_opt: float
    stderr: float
    curve: list[GainResult]


def optimize_K(cfg: GainConfig, K_grid, trials: int, seed: int) -> OptimumResult:
    """Grid maximum of the gain over the user count; ties go to the smaller K."""
    grid = sorted(set(int(k) for k in K_grid))
    if not grid:
        raise ValueError("K grid is empty")
    curve = [measure_gain(cfg.with_(K=k), trials, seed) for k in grid]
    best = curve[0]
    for r in curve[1:]:
        if r.gain > best.gain:
            best = r
    return OptimumResult(best.config.K, best.gain, best.stderr, curve)


def default_K_grid(Q: int, area_ratio: float, points: int = 24) -> list[int]:
    """Geometric grid from 1 to ``8 Q A/D`` users."""
    top = max(1, int(round(8 * Q * area_ratio)))
    return sorted(set(np.unique(np.round(np.geomspace(1, top, points)).astype(int)).tolist()))

"""Sweeps over experiment grids and CSV output."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, pilotcode
from .config import ExperimentConfig
from .deployment import LatticeSpec, place_random, place_user_lattice
from .geometry import ProximityModel
from .phy import PhyParams, or_agreement
from .rng import substream
from .serving import (
    DeploymentSnapshot,
    GainConfig,
    PilotGrouping,
    build_graph,
    default_K_grid,
    optimize_K,
    served_sets,
)

AXES = ("N", "K", "q", "Q", "theta", "S", "L", "ell", "beta")
COLUMNS = ("scenario", *AXES, "metric", "value", "stderr", "trials")


@dataclass
class ResultRow:
    scenario: str
    metric: str
    value: float
    stderr: float = 0.0
    trials: int = 0
    axes: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.axes) - set(AXES)
        if unknown:
            raise ValueError(f"unknown axes {sorted(unknown)}")
        if not self.stderr >= 0:
            raise ValueError("stderr must be non-negative")

    def sort_key(self):
        return tuple((0, 0) if self.axes.get(a) is None else (1, self.axes[a]) for a in AXES) + (self.metric,)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_csv(rows, path=None) -> str:
    """Write ``rows`` sorted by their axes; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in sorted(rows, key=ResultRow.sort_key):
        w.writerow([r.scenario, *(_fmt(r.axes.get(a)) for a in AXES),
                    r.metric, _fmt(r.value), _fmt(r.stderr), _fmt(r.trials)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# -- gain scenarios -----------------------------------------------------------


def _gain_base(cfg: ExperimentConfig) -> GainConfig:
    return GainConfig(
        N=0, K=0, Q=cfg.Q, area_ratio=cfg.area_ratio, r_o=cfg.r_o,
        rrh_layout="lattice" if cfg.scenario == "lattice_rrh" else cfg.rrh_layout,
        redraw_rrh=cfg.redraw_rrh, balanced_groups=cfg.balanced_groups,
        random_offsets=cfg.random_offsets,
    )


def _gain_task(args):
    scenario, base, K_grid, trials, seed = args
    opt = optimize_K(base, K_grid, trials, seed)
    ax = dict(N=base.N, q=base.q, Q=base.Q, theta=base.theta, S=base.S)
    rows = []
    for r in opt.curve:
        rows.append(ResultRow(scenario, "gain", r.gain, r.stderr, trials, dict(ax, K=r.config.K)))
        rows.append(ResultRow(scenario, "collision_prob", r.collision_prob, r.collision_stderr,
                              trials, dict(ax, K=r.config.K)))
    rows.append(ResultRow(scenario, "gain_opt", opt.gain_opt, opt.stderr, trials, dict(ax, K=opt.K_opt)))
    return rows


def _gain_tasks(cfg: ExperimentConfig):
    base = _gain_base(cfg)
    K_grid = cfg.K or default_K_grid(cfg.Q, cfg.area_ratio)
    tasks = []
    for N in cfg.N:
        for q in cfg.q:
            for S in cfg.S:
                for theta in cfg.theta:
                    b = base.with_(N=N, q=q, S=S, theta=theta)
                    tasks.append((cfg.scenario, b, K_grid, cfg.trials, cfg.seed))
    if cfg.target_N is not None:
        for q in cfg.q:
            b = base.with_(N=cfg.target_N, q=q, S=1, theta=math.pi, rrh_layout="random")
            tasks.append(("reference", b, K_grid, cfg.trials, cfg.seed))
    return tasks


def sites_to_match(rows, scenario: str) -> list[ResultRow]:
    """Smallest grid ``N`` whose optimized gain reaches the omni reference.

    The reference is the ``gain_opt`` of the rows tagged ``"reference"``.
    Emits NaN when no grid point reaches it.
    """
    ref = {r.axes["q"]: r for r in rows if r.scenario == "reference" and r.metric == "gain_opt"}
    best: dict = {}
    for r in rows:
        if r.scenario != scenario or r.metric != "gain_opt":
            continue
        key = (r.axes["q"], r.axes["theta"], r.axes["S"])
        best.setdefault(key, []).append(r)
    out = []
    for (q, theta, S), rs in best.items():
        target = ref[q]
        hit = [r.axes["N"] for r in sorted(rs, key=lambda r: r.axes["N"]) if r.value >= target.value]
        value = hit[0] if hit else math.nan
        out.append(ResultRow(scenario, "sites_to_match", value, 0.0, target.trials,
                             dict(q=q, Q=target.axes["Q"], theta=theta, S=S, N=target.axes["N"])))
    return out


# -- other scenarios ----------------------------------------------------------


def lattice_user_gain(c: int, beta: float, N: int, r_o: float, trials: int, seed: int):
    """Per-RE gain of lattice-scheduled users (one shared pilot RE) under random RRHs."""
    d = 2 * r_o
    torus, users = place_user_lattice(LatticeSpec(c, beta), d)
    model = ProximityModel(r_o)
    grouping = PilotGrouping.single(len(users))
    sizes = np.zeros(trials)
    for t in range(trials):
        rrhs = place_random(torus, N, substream(seed, t, "rrh"))
        sizes[t] = served_sets(build_graph(DeploymentSnapshot(torus, rrhs, users, model)), grouping).size
    se = sizes.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return float(sizes.mean()), float(se)


def _lattice_user_task(args):
    cfg, beta, N = args
    gain, se = lattice_user_gain(cfg.c, beta, N, cfg.r_o, cfg.trials, cfg.seed)
    area_ratio = 4 * cfg.c**2 / (math.pi * beta)
    K = 2 * cfg.c**2
    formula = float(bounds.lattice_users(beta, area_ratio) * bounds.p1(beta, N, area_ratio))
    ax = dict(N=N, K=K, q=1, Q=1, beta=beta)
    return [
        ResultRow(cfg.scenario, "gain", gain, se, cfg.trials, ax),
        ResultRow(cfg.scenario, "bound_formula", formula, 0.0, 0, ax),
    ]


def code_rows(cfg: ExperimentConfig) -> list[ResultRow]:
    rows = []
    for L in cfg.L:
        for K in cfg.K:
            ell = pilotcode.min_ell(K, L)
            ax = dict(K=K, L=L, ell=ell)
            rows.append(ResultRow(cfg.scenario, "ell_min", ell, 0.0, 0, ax))
            rows.append(ResultRow(cfg.scenario, "efficiency", pilotcode.efficiency(K, L), 0.0, 0, ax))
    return rows


def proximity_pattern(n_users: int, weight: int, seed: int) -> np.ndarray:
    z = np.zeros(n_users, dtype=bool)
    z[substream(seed, weight, "pattern").choice(n_users, size=weight, replace=False)] = True
    return z


def _phy_task(args):
    cfg, M, L, ell, weight = args
    users = min(cfg.code_users, math.comb(L + ell, ell))
    code = pilotcode.enumerate_codewords(L, ell, users)
    z = proximity_pattern(users, min(weight, users), cfg.seed)
    params = PhyParams.from_snr_db(M, cfg.snr_db, taps=cfg.taps)
    agr = or_agreement(params, code, z, cfg.trials, cfg.seed)
    # one node only, so the N column carries its antenna count M
    ax = dict(N=M, K=weight, L=L, ell=ell)
    return [
        ResultRow(cfg.scenario, "re_agreement", agr.re_rate, 0.0, cfg.trials, ax),
        ResultRow(cfg.scenario, "decode_agreement", agr.decode_rate, 0.0, cfg.trials, ax),
    ]


def _phy_tasks(cfg: ExperimentConfig):
    weights = cfg.K if cfg.K is not None else [0, 1, 2]
    tasks = []
    for L in cfg.L:
        ells = cfg.ell or [max(1, pilotcode.min_ell(cfg.code_users, L))]
        for ell in ells:
            for M in cfg.M:
                for w in weights:
                    tasks.append((cfg, M, L, ell, w))
    return tasks


def _run(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(fn, tasks))
    else:
        results = [fn(t) for t in tasks]
    return [row for rows in results for row in rows]


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Evaluate every grid point of ``cfg``; output is independent of ``cfg.jobs``."""
    cfg.validate()
    s = cfg.scenario
    if s in ("random_random", "lattice_rrh", "sectorized"):
        rows = _run(_gain_task, _gain_tasks(cfg), cfg.jobs)
        if cfg.target_N is not None:
            rows += sites_to_match(rows, s)
    elif s == "lattice_users":
        rows = _run(_lattice_user_task, [(cfg, b, N) for b in cfg.beta for N in cfg.N], cfg.jobs)
    elif s == "code_efficiency":
        rows = code_rows(cfg)
    elif s == "phy_validation":
        rows = _run(_phy_task, _phy_tasks(cfg), cfg.jobs)
    else:  # pragma: no cover - validate() rejects these
        raise ValueError(s)
    return sorted(rows, key=ResultRow.sort_key)


def bound_rows(area_ratio: float, N_grid, beta_points: int = 128) -> list[ResultRow]:
    rows = [ResultRow("bound", "m_max", bounds.m_max(area_ratio))]
    for N in N_grid:
        val, beta = bounds.lattice_bound(bounds.BoundParams(area_ratio, N, bounds.default_beta_grid(beta_points)))
        rows.append(ResultRow("bound", "lattice_bound", val, 0.0, 0, dict(N=N, q=1, Q=1, beta=beta)))
    return rows

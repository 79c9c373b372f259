"""Command-line entry point: ``rrhpilot <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import bounds, pilotcode
from .config import ConfigError, ExperimentConfig, load
from .experiment import ResultRow, bound_rows, code_rows, emit_csv, run_experiment


_FLAGS = {
    "config": dict(help="experiment config file"),
    "seed": dict(type=int, help="master seed (overrides config and RRHPILOT_SEED)"),
    "out": dict(help="write CSV here"),
    "trials": dict(type=int, help="Monte Carlo trials per grid point"),
}


def _common(p: argparse.ArgumentParser, *names):
    for n in names or _FLAGS:
        p.add_argument(f"--{n}", **_FLAGS[n])


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rrhpilot", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an experiment config")
    _common(p)
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("bound", help="m_max and the lattice bound")
    _common(p, "out")
    p.add_argument("--area-ratio", type=float, default=10.0, help="A/D")
    p.add_argument("--N", type=_int_list, default=[16, 64, 256, 1024, 2048, 4096, 16384, 65536, 10**6],
                   help="comma-separated RRH counts")

    p = sub.add_parser("code", help="smallest ell and code efficiency")
    _common(p, "out")
    p.add_argument("--L", type=_int_list, default=[5], help="comma-separated L values")
    p.add_argument("--K", type=_int_list, default=[10], help="comma-separated user counts")
    p.add_argument("--table", type=int, metavar="KMAX",
                   help="emit the efficiency curve for K = 1..KMAX instead")

    p = sub.add_parser("phy", help="OR-channel agreement of energy detection")
    _common(p, "seed", "out", "trials")
    p.add_argument("--M", type=_int_list, default=[1, 4, 16, 64, 256, 1024])
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--L", type=int, default=5)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--users", type=int, default=56, help="codewords assigned")
    p.add_argument("--weights", type=_int_list, default=[0, 1, 2], help="users in proximity")
    p.add_argument("--taps", type=int)

    p = sub.add_parser("decode", help="decode one observed on-off pattern")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--K", type=int, help="codewords assigned (default: capacity)")
    p.add_argument("--eps", help="observed pattern as a 0/1 string, RE 1 first")
    p.add_argument("--users", type=_int_list, help="proximate users; pattern built with the OR channel")
    p.add_argument("--list", action="store_true", help="print the codewords")
    return ap


def _finish(rows: list[ResultRow], out: str | None):
    text = emit_csv(rows, out)
    if out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)


def _sweep(a) -> int:
    if not a.config:
        raise ConfigError("--config", "sweep needs a config file")
    cfg = load(a.config, seed=a.seed, trials=a.trials, output=a.out)
    if a.jobs:
        cfg.jobs = a.jobs
        cfg.validate()
    _finish(run_experiment(cfg), cfg.output)
    return 0


def _bound(a) -> int:
    print(f"m_max = {bounds.m_max(a.area_ratio):.10g}")
    rows = bound_rows(a.area_ratio, a.N)
    for r in rows[1:]:
        print(f"N = {r.axes['N']:>8d}  m_LU = {r.value:.6f}  beta* = {r.axes['beta']:.6f}")
    if a.out:
        emit_csv(rows, a.out)
    return 0


def _code(a) -> int:
    if a.table:
        cfg = ExperimentConfig("code_efficiency", L=a.L, K=list(range(1, a.table + 1)))
        _finish(code_rows(cfg), a.out)
        return 0
    for L in a.L:
        for K in a.K:
            ell = pilotcode.min_ell(K, L)
            print(f"L={L} K={K}: ell={ell}, eta={pilotcode.efficiency(K, L):.6f}")
    return 0


def _phy(a) -> int:
    cfg = ExperimentConfig(
        "phy_validation", M=a.M, snr_db=a.snr_db, L=[a.L], ell=[a.ell], code_users=a.users,
        K=a.weights, taps=a.taps, trials=a.trials or 10_000, seed=a.seed if a.seed is not None else 0,
    )
    _finish(run_experiment(cfg), a.out)
    return 0


def _decode(a) -> int:
    cap = math.comb(a.L + a.ell, a.ell)
    code = pilotcode.enumerate_codewords(a.L, a.ell, a.K or cap)
    if a.list:
        for k, w in enumerate(code.to_strings()):
            print(f"{k}\t{w}")
    if a.users is not None:
        z = np.zeros(code.K, bool)
        z[a.users] = True
        eps = pilotcode.or_channel(code, z)
    elif a.eps is not None:
        if set(a.eps) - {"0", "1"}:
            raise ValueError("--eps must be a 0/1 string")
        eps = np.array([int(ch) for ch in a.eps], dtype=np.uint8)
    else:
        return 0
    print("eps =", "".join(map(str, eps.tolist())))
    out = pilotcode.decode(code, eps)
    if isinstance(out, pilotcode.Single):
        res = ",".join(str(n + 1) for n in sorted(out.estimation_res))
        print(f"Single user={out.user} estimation REs={{{res}}}")
    else:
        print(type(out).__name__)
    return 0


COMMANDS = {"sweep": _sweep, "bound": _bound, "code": _code, "phy": _phy, "decode": _decode}


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return COMMANDS[a.command](a)
    except (ConfigError, ValueError, OSError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

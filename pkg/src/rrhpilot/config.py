"""Experiment configuration files.

One ``key = value`` per line, ``#`` starts a comment.  Values are numbers,
``true``/``false``, bare or quoted strings, lists ``[a, b, c]`` or grid
helpers:

* ``geom(a, b, n)``: ``n`` geometrically spaced integers from ``a`` to ``b``
* ``lin(a, b, n)``: ``n`` evenly spaced floats from ``a`` to ``b``
* ``range(a, b)`` / ``range(a, b, step)``: integers ``a..b`` inclusive

Arithmetic on numbers and the constant ``pi`` are allowed, e.g.
``theta = [pi/6, pi]``.  A scalar given for a grid key becomes a one-point
grid.
"""

from __future__ import annotations

import ast
import math
import operator
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

SEED_ENV = "RRHPILOT_SEED"

SCENARIOS = (
    "random_random",
    "lattice_users",
    "lattice_rrh",
    "sectorized",
    "code_efficiency",
    "phy_validation",
)


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _geom(a, b, n):
    return sorted(set(np.round(np.geomspace(a, b, int(n))).astype(int).tolist()))


def _lin(a, b, n):
    return np.linspace(a, b, int(n)).tolist()


def _range(a, b, step=1):
    return list(range(int(a), int(b) + 1, int(step)))


_FUNCS = {"geom": _geom, "lin": _lin, "range": _range}
_NAMES = {"pi": math.pi, "true": True, "false": False}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, str)):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in _NAMES:
            return _NAMES[node.id]
        return node.id  # bare word: a string
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_eval(e) for e in node.elts]
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        return _FUNCS[node.func.id](*[_eval(a) for a in node.args])
    raise ValueError(f"unsupported expression {ast.dump(node)}")


def parse_value(text: str):
    text = text.strip()
    try:
        return _eval(ast.parse(text, mode="eval").body)
    except SyntaxError:
        return text


def parse_text(text: str) -> dict[str, str]:
    """Split a config file into raw ``key -> value text`` pairs."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        out[key] = value
    return out


def _int_list(v):
    return [int(x) for x in (v if isinstance(v, list) else [v])]


def _float_list(v):
    return [float(x) for x in (v if isinstance(v, list) else [v])]


@dataclass
class ExperimentConfig:
    """Everything a sweep needs; grids are lists, one entry per point."""

    scenario: str
    area_ratio: float = 10.0
    r_o: float = 1.0
    Q: int = 8
    q: list[int] = field(default_factory=lambda: [1])
    N: list[int] = field(default_factory=lambda: [2048])
    K: list[int] | None = None  # None: default geometric grid
    theta: list[float] = field(default_factory=lambda: [math.pi])
    S: list[int] = field(default_factory=lambda: [1])
    L: list[int] = field(default_factory=lambda: [5])
    ell: list[int] | None = None  # phy: None means the smallest ell fitting code_users
    beta: list[float] = field(default_factory=lambda: [2.0])
    c: int = 3
    M: list[int] = field(default_factory=lambda: [1, 4, 16, 64, 256, 1024])
    snr_db: float = 10.0
    code_users: int = 56
    taps: int | None = None
    trials: int = 100
    seed: int = 0
    rrh_layout: str = "random"
    redraw_rrh: bool = False
    balanced_groups: bool = False
    random_offsets: bool = False
    target_N: int | None = None
    output: str | None = None
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; one of {', '.join(SCENARIOS)}")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if self.area_ratio <= 0:
            raise ConfigError("area_ratio", "must be positive")
        if self.r_o <= 0:
            raise ConfigError("r_o", "must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs", "must be at least 1")
        for name in ("q", "N", "theta", "S", "L", "beta", "M"):
            if not getattr(self, name):
                raise ConfigError(name, "grid is empty")
        if self.K is not None and not self.K:
            raise ConfigError("K", "grid is empty")
        if self.ell is not None and not self.ell:
            raise ConfigError("ell", "grid is empty")
        bad_q = [q for q in self.q if q < 1 or self.Q % q]
        if bad_q:
            raise ConfigError("q", f"{bad_q} do not divide Q={self.Q}")
        if any(t <= 0 or t > math.pi for t in self.theta):
            raise ConfigError("theta", "values must lie in (0, pi]")
        if any(s < 1 for s in self.S):
            raise ConfigError("S", "sector counts must be positive")
        if any(n < 0 for n in self.N):
            raise ConfigError("N", "must be non-negative")
        if self.K is not None and any(k < 0 for k in self.K):
            raise ConfigError("K", "must be non-negative")
        if any(b <= 0 or b > 2 for b in self.beta):
            raise ConfigError("beta", "values must lie in (0, 2]")
        if self.rrh_layout not in ("random", "lattice"):
            raise ConfigError("rrh_layout", "must be 'random' or 'lattice'")
        if self.scenario == "lattice_rrh":
            for n in self.N:
                c = math.isqrt(n // 2)
                if 2 * c * c != n:
                    raise ConfigError("N", f"lattice RRH layout needs N = 2 c^2, got {n}")
        if self.scenario == "code_efficiency" and (self.K is None or any(k < 1 for k in self.K)):
            raise ConfigError("K", "code_efficiency needs a K grid of positive counts")


_TYPES = {
    "scenario": str, "area_ratio": float, "r_o": float, "Q": int, "q": _int_list,
    "N": _int_list, "K": _int_list, "theta": _float_list, "S": _int_list,
    "L": _int_list, "ell": _int_list, "beta": _float_list, "c": int, "M": _int_list,
    "snr_db": float, "code_users": int, "taps": int, "trials": int, "seed": int,
    "rrh_layout": str, "redraw_rrh": bool, "balanced_groups": bool,
    "random_offsets": bool, "target_N": int, "output": str, "jobs": int,
}
assert set(_TYPES) == {f.name for f in fields(ExperimentConfig)}


def from_mapping(raw: dict) -> ExperimentConfig:
    """Build a config from parsed values or raw value text."""
    if "scenario" not in raw:
        raise ConfigError("scenario", "missing")
    kw = {}
    for key, value in raw.items():
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        conv = _TYPES[key]
        if isinstance(value, str):
            if conv is str:
                value = value.strip().strip("'\"")
            else:
                try:
                    value = parse_value(value)
                except (ValueError, TypeError, ZeroDivisionError) as exc:
                    raise ConfigError(key, str(exc)) from None
        if conv is bool and not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        if conv in (int, float) and (isinstance(value, (list, bool)) or isinstance(value, str)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        try:
            v = conv(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"cannot read {value!r}") from None
        if conv is int and isinstance(value, float) and value != int(value):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        kw[key] = v
    return ExperimentConfig(**kw)


def load(path, seed: int | None = None, trials: int | None = None, output: str | None = None) -> ExperimentConfig:
    """Read a config file; the seed env var, then explicit arguments, override it."""
    raw = parse_text(Path(path).read_text())
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            raw["seed"] = int(env)
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV}={env!r} is not an integer") from None
    if seed is not None:
        raw["seed"] = seed
    if trials is not None:
        raw["trials"] = trials
    if output is not None:
        raw["output"] = output
    return from_mapping(raw)

"""Run specifications: defaults, config-file loading, validation.

A RunSpec fixes every knob of a run up front.  Config files are JSON with
the command inside the file and the map family nested under "family";
values given on the command line override file values.  Validation is
aggregated: one failure report lists every bad field by path instead of
stopping at the first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .classical import OBSERVABLES
from .errors import ConfigurationError
from .model import VARIANTS

COMMANDS = ("classical", "spectrum", "sweep", "scaling", "ergodicity")

_FAMILY_KEYS = ("variant", "r")


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved parameters for one CLI run."""

    command: str
    variant: str = "chaotic"
    r: float = 0.0
    observable: str = "cos2pi_q"
    N: int = 512
    N_list: tuple = (64, 128, 256, 512)
    r0: float = 0.0
    r1: float = 3.0
    delta_r: float = 0.05
    r_grid: tuple | None = None
    T_grid: tuple | None = None
    t_max: int = 200
    samples: int = 1_000_000
    seed: int = 12345
    lyapunov_steps: int = 100_000
    lyapunov_seeds: int = 20
    subtract_mean: bool = True
    sorted_pairing: bool = False
    emit_plot: bool = False
    out_dir: str = "out"

    def as_dict(self) -> dict:
        """JSON-ready mapping with the family nested, for embedding in outputs."""
        out = {
            "command": self.command,
            "family": {"variant": self.variant, "r": self.r},
            "observable": self.observable,
            "N": self.N,
            "N_list": list(self.N_list),
            "r0": self.r0,
            "r1": self.r1,
            "delta_r": self.delta_r,
            "r_grid": None if self.r_grid is None else list(self.r_grid),
            "T_grid": None if self.T_grid is None else list(self.T_grid),
            "t_max": self.t_max,
            "samples": self.samples,
            "seed": self.seed,
            "lyapunov_steps": self.lyapunov_steps,
            "lyapunov_seeds": self.lyapunov_seeds,
            "subtract_mean": self.subtract_mean,
            "sorted_pairing": self.sorted_pairing,
            "emit_plot": self.emit_plot,
            "out_dir": self.out_dir,
        }
        return out


_FIELD_NAMES = tuple(f.name for f in fields(RunSpec))


def _check_even_N(problems: list, path: str, value) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        problems.append((path, f"expected an integer, got {value!r}"))
        return
    if value < 2:
        problems.append((path, f"N must be at least 2, got {value}"))
    elif value % 2 != 0:
        problems.append((
            path,
            f"N={value} is odd; the quadratic drift only closes on the torus "
            "for even N",
        ))


def _validate(spec: RunSpec) -> list:
    problems: list = []

    def number(path, value, lo=None, hi=None, integer=False):
        ok_type = isinstance(value, int) and not isinstance(value, bool) \
            if integer else isinstance(value, (int, float)) and not isinstance(value, bool)
        if not ok_type or (not integer and not math.isfinite(float(value))):
            kind = "an integer" if integer else "a finite number"
            problems.append((path, f"expected {kind}, got {value!r}"))
            return False
        if lo is not None and value < lo:
            problems.append((path, f"must be >= {lo}, got {value}"))
            return False
        if hi is not None and value > hi:
            problems.append((path, f"must be <= {hi}, got {value}"))
            return False
        return True

    def flag(path, value):
        if not isinstance(value, bool):
            problems.append((path, f"expected true/false, got {value!r}"))

    if spec.command not in COMMANDS:
        problems.append(("command",
                         f"unknown command {spec.command!r}; choose one of "
                         f"{', '.join(COMMANDS)}"))
    if spec.variant not in VARIANTS:
        problems.append(("family.variant",
                         f"unknown variant {spec.variant!r}; choose one of "
                         f"{', '.join(VARIANTS)}"))
    number("family.r", spec.r)
    if spec.observable not in OBSERVABLES:
        problems.append(("observable",
                         f"unknown observable {spec.observable!r}; choose one "
                         f"of {', '.join(OBSERVABLES)}"))

    _check_even_N(problems, "N", spec.N)

    if not isinstance(spec.N_list, (list, tuple)):
        problems.append(("N_list", f"expected a list, got {spec.N_list!r}"))
    else:
        for i, N in enumerate(spec.N_list):
            _check_even_N(problems, f"N_list[{i}]", N)
        values = [N for N in spec.N_list
                  if isinstance(N, int) and not isinstance(N, bool)]
        if len(values) == len(spec.N_list) and values != sorted(set(values)):
            problems.append(("N_list", "values must be strictly ascending"))
        if spec.command == "scaling" and len(spec.N_list) < 4:
            problems.append(("N_list",
                             "a scaling ladder needs at least 4 values of N"))

    ok0 = number("r0", spec.r0)
    ok1 = number("r1", spec.r1)
    if ok0 and ok1 and spec.command in ("sweep", "scaling") \
            and spec.r_grid is None and spec.r1 <= spec.r0:
        problems.append(("r1", f"must exceed r0={spec.r0}, got {spec.r1}"))
    number("delta_r", spec.delta_r, lo=1e-12)

    if spec.r_grid is not None:
        if not isinstance(spec.r_grid, (list, tuple)) or len(spec.r_grid) == 0:
            problems.append(("r_grid", "expected a non-empty list of numbers"))
        else:
            last = None
            for i, r in enumerate(spec.r_grid):
                if number(f"r_grid[{i}]", r):
                    if last is not None and r <= last:
                        problems.append((f"r_grid[{i}]",
                                         "values must be strictly ascending"))
                    last = r

    if spec.T_grid is not None:
        if not isinstance(spec.T_grid, (list, tuple)) or len(spec.T_grid) == 0:
            problems.append(("T_grid", "expected a non-empty list of numbers"))
        else:
            last = None
            for i, T in enumerate(spec.T_grid):
                if number(f"T_grid[{i}]", T, lo=0.0):
                    if last is not None and T <= last:
                        problems.append((f"T_grid[{i}]",
                                         "values must be strictly ascending"))
                    last = T

    number("t_max", spec.t_max, lo=1, integer=True)
    number("samples", spec.samples, lo=10_000, integer=True)
    number("seed", spec.seed, lo=0, integer=True)
    number("lyapunov_steps", spec.lyapunov_steps, lo=10_000, integer=True)
    number("lyapunov_seeds", spec.lyapunov_seeds, lo=5, integer=True)
    flag("subtract_mean", spec.subtract_mean)
    flag("sorted_pairing", spec.sorted_pairing)
    flag("emit_plot", spec.emit_plot)
    if not isinstance(spec.out_dir, str) or not spec.out_dir:
        problems.append(("out_dir", "expected a non-empty path"))

    return problems


def _raise_problems(source: str, problems: list) -> None:
    if problems:
        lines = [f"  - {path}: {msg}" for path, msg in problems]
        raise ConfigurationError(f"invalid {source}:\n" + "\n".join(lines))


def _flatten(raw: dict) -> tuple:
    """Nested-family mapping -> (flat RunSpec kwargs, problem list)."""
    problems: list = []
    flat: dict = {}
    for key, value in raw.items():
        if key == "family":
            if not isinstance(value, dict):
                problems.append(("family", f"expected an object, got {value!r}"))
                continue
            for fkey, fvalue in value.items():
                if fkey not in _FAMILY_KEYS:
                    problems.append((f"family.{fkey}", "unknown key"))
                else:
                    flat[fkey] = fvalue
        elif key in ("variant", "r"):
            problems.append((key, "belongs inside the \"family\" object"))
        elif key in _FIELD_NAMES:
            flat[key] = value
        else:
            problems.append((key, "unknown key"))
    for key in ("N_list", "r_grid", "T_grid"):
        if isinstance(flat.get(key), list):
            flat[key] = tuple(flat[key])
    return flat, problems


def make_runspec(config: dict | None = None, _source: str = "configuration",
                 **overrides) -> RunSpec:
    """Build and validate a RunSpec from file values plus explicit overrides.

    Every defect found, in structure or in values, is reported in a single
    ConfigurationError listing the offending fields by path.
    """
    flat, problems = ({}, []) if config is None else _flatten(config)
    for key, value in overrides.items():
        if value is not None:
            flat[key] = value
    if "command" not in flat:
        problems.append(("command", "missing (give a subcommand or put "
                                    "\"command\" in the config file)"))
        _raise_problems(_source, problems)
    spec = RunSpec(**flat)
    problems.extend(_validate(spec))
    _raise_problems(_source, problems)
    return spec


def load_config(path: str) -> RunSpec:
    """Read a JSON config file into a validated RunSpec.

    The command lives inside the file; every field is checked here so a
    bad file fails before any computation starts.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a JSON object")
    return make_runspec(raw, _source=f"config {path}")

"""YAML run configuration with fail-closed validation."""

from __future__ import annotations

import difflib
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import yaml

from .diagnostics import LEDGER_COLUMNS
from .grid import FluidParams
from .presets import PRESETS
from .solver import ADVECT_SCHEMES, VISCOUS_SCHEMES, SolverConfig

STUDIES = ("single", "refine", "threshold", "mms")
REQUIRED = ("mu", "beta", "gamma", "R", "N", "t_end")
OPTIONAL = ("cfl", "dt_max", "rho_floor", "viscous_scheme", "advect_scheme", "snapshot_every",
            "preset", "profile_path", "study", "levels", "out", "columns")
KNOWN = REQUIRED + OPTIONAL
DEFAULT_FLOOR_FACTOR = 1e-10


class ConfigError(ValueError):
    def __init__(self, key: Optional[str], message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass(frozen=True)
class RunConfig:
    params: FluidParams
    N: int
    solver: SolverConfig
    preset: Optional[str] = None
    profile_path: Optional[str] = None
    study: str = "single"
    levels: int = 3
    out: Optional[str] = None
    columns: Tuple[str, ...] = LEDGER_COLUMNS
    rho_floor_auto: bool = True

    def resolved_solver(self, rho_s: float) -> SolverConfig:
        """Solver settings with the default floor (a fixed fraction of rho_s) filled in."""
        if not self.rho_floor_auto:
            return self.solver
        return replace(self.solver, rho_floor=DEFAULT_FLOOR_FACTOR * rho_s)


def _number(doc, key, default=None, integer=False):
    if key not in doc:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(v).__name__}")
    if integer:
        if int(v) != v:
            raise ConfigError(key, f"expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _string(doc, key, default=None, choices=None):
    v = doc.get(key, default)
    if v is None:
        return None
    if not isinstance(v, str):
        raise ConfigError(key, f"expected a string, got {type(v).__name__}")
    if choices is not None and v not in choices:
        raise ConfigError(key, f"must be one of {list(choices)}, got {v!r}")
    return v


def parse_config(text: str) -> RunConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(None, f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(None, "config must be a key-value mapping")
    for key in doc:
        if key not in KNOWN:
            close = difflib.get_close_matches(str(key), KNOWN, n=1, cutoff=0.3)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            raise ConfigError(str(key), f"unknown key{hint}")
    for key in REQUIRED:
        if key not in doc:
            raise ConfigError(key, "missing required key")

    vals = {k: _number(doc, k) for k in ("mu", "beta", "gamma", "R")}
    for key, ok in (("mu", vals["mu"] > 0), ("beta", vals["beta"] > 0),
                    ("gamma", vals["gamma"] > 1), ("R", vals["R"] > 0)):
        if not ok:
            raise ConfigError(key, f"invalid value {vals[key]!r}")
    params = FluidParams(**vals)

    N = _number(doc, "N", integer=True)
    if N < 4:
        raise ConfigError("N", f"need at least 4 cells, got {N}")
    t_end = _number(doc, "t_end")
    if not t_end >= 0:
        raise ConfigError("t_end", f"must be >= 0, got {t_end}")
    cfl = _number(doc, "cfl", 0.4)
    if not 0 < cfl <= 1:
        raise ConfigError("cfl", f"must lie in (0, 1], got {cfl}")
    dt_max = _number(doc, "dt_max", 1e-2)
    if not dt_max > 0:
        raise ConfigError("dt_max", f"must be > 0, got {dt_max}")
    floor_given = "rho_floor" in doc
    rho_floor = _number(doc, "rho_floor", 0.0)
    if not rho_floor >= 0:
        raise ConfigError("rho_floor", f"must be >= 0, got {rho_floor}")
    snap = _number(doc, "snapshot_every", 1, integer=True)
    if snap < 1:
        raise ConfigError("snapshot_every", f"must be >= 1, got {snap}")
    solver = SolverConfig(
        t_end=t_end, cfl=cfl, dt_max=dt_max, rho_floor=rho_floor,
        viscous_scheme=_string(doc, "viscous_scheme", "crank_nicolson", VISCOUS_SCHEMES),
        advect_scheme=_string(doc, "advect_scheme", "muscl2", ADVECT_SCHEMES),
        snapshot_every=snap)

    preset = _string(doc, "preset", None, tuple(PRESETS))
    profile = _string(doc, "profile_path")
    if preset and profile:
        raise ConfigError("preset", "give either preset or profile_path, not both")
    study = _string(doc, "study", "single", STUDIES)
    if study in ("single", "refine") and not (preset or profile):
        raise ConfigError("preset", f"study {study!r} needs a preset or a profile_path")
    levels = _number(doc, "levels", 3, integer=True)
    if not 2 <= levels <= 6:
        raise ConfigError("levels", f"must lie in [2, 6], got {levels}")

    columns = doc.get("columns", list(LEDGER_COLUMNS))
    if not isinstance(columns, list) or not all(isinstance(c, str) for c in columns):
        raise ConfigError("columns", "expected a list of column names")
    bad = [c for c in columns if c not in LEDGER_COLUMNS]
    if bad:
        raise ConfigError("columns", f"unknown ledger columns {bad}")
    if "t" not in columns:
        columns = ["t"] + columns
    ordered = tuple(c for c in LEDGER_COLUMNS if c in columns)

    return RunConfig(params=params, N=N, solver=solver, preset=preset, profile_path=profile,
                     study=study, levels=levels, out=_string(doc, "out"), columns=ordered,
                     rho_floor_auto=not floor_given)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(None, f"cannot read {path}: {exc}") from exc
    return parse_config(text)

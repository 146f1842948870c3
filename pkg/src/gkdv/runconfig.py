"""Strict JSON run configurations: parsing, validation, builders, hashing.

Unknown keys abort before any computation; a seed is mandatory so that every
randomized experiment is reproducible.  The canonical serialization (sorted
keys, fixed separators) backs the deterministic config hash used as run id.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .probes import gaussian_field, rough_field
from .solver import IvpProblem
from .spectral import GridSpec, SpectralField, zero_field
from .symbols import DissipativeSymbol, builtin_symbol, tabulated_symbol

_GRID_KEYS = {"length", "n_points", "dealias_fraction"}
_SYMBOL_KEYS = {"name", "p", "q", "c_phi1", "eta", "table"}
_DATA_KEYS = {"type", "amplitude", "width", "center", "sobolev_index", "seed"}
_SWEEP_KEYS = {"k", "p", "s"}

_COMMON_KEYS = {"symbol", "grid", "k", "s", "mode", "seed", "output_dir"}
_ALLOWED = {
    "solve": _COMMON_KEYS | {"initial_data", "output_times", "solver"},
    "verify": _COMMON_KEYS | {"suite", "verify"},
    "sweep": _COMMON_KEYS | {"sweep", "suite", "verify", "jobs"},
}
_SOLVER_KEYS = {"max_iter", "tol", "panels", "grading"}
_VERIFY_KEYS = {
    "theta_values",
    "tau_window",
    "n_tau",
    "t_values",
    "n_seeds",
    "n_pairs",
    "hy_exponents",
    "xi_max",
    "n_times",
    "panels",
    "t_horizon",
    "data_scale",
}


def _check_keys(section: dict, allowed: set, context: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


@dataclass
class RunConfig:
    """Validated configuration for one CLI command."""

    command: str
    raw: dict

    @classmethod
    def from_dict(cls, data: dict, command: str) -> "RunConfig":
        if command not in _ALLOWED:
            raise ConfigError(f"unknown command {command!r}")
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a JSON object")
        _check_keys(data, _ALLOWED[command], f"{command} config")
        for key in ("symbol", "grid", "seed"):
            if key not in data:
                raise ConfigError(f"missing required key '{key}'")
        if not isinstance(data["seed"], int):
            raise ConfigError("seed must be an integer")
        _check_keys(data["grid"], _GRID_KEYS, "grid section")
        _check_keys(data["symbol"], _SYMBOL_KEYS, "symbol section")
        if "initial_data" in data:
            _check_keys(data["initial_data"], _DATA_KEYS, "initial_data section")
        if "solver" in data:
            _check_keys(data["solver"], _SOLVER_KEYS, "solver section")
        if "verify" in data:
            _check_keys(data["verify"], _VERIFY_KEYS, "verify section")
        if "sweep" in data:
            _check_keys(data["sweep"], _SWEEP_KEYS, "sweep section")
            if command == "sweep" and not data["sweep"]:
                raise ConfigError("sweep section must list at least one of k/p/s")
        if command == "solve" and "initial_data" not in data:
            raise ConfigError("solve config requires an initial_data section")
        return cls(command=command, raw=data)

    @classmethod
    def from_file(cls, path, command: str) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        return cls.from_dict(data, command)

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def suite(self) -> str:
        return self.raw.get("suite", "all")

    def build_grid(self) -> GridSpec:
        g = self.raw["grid"]
        try:
            return GridSpec(
                length=float(g["length"]),
                n_points=int(g["n_points"]),
                dealias_fraction=float(g.get("dealias_fraction", 2.0 / 3.0)),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid grid section: {exc}") from exc

    def build_symbol(self, p_override: float | None = None) -> DissipativeSymbol:
        sec = self.raw["symbol"]
        name = sec.get("name")
        if name is None:
            raise ConfigError("symbol section requires a name")
        eta = float(sec.get("eta", 1.0))
        try:
            if "table" in sec:
                return tabulated_symbol(
                    name=name,
                    p=float(sec["p"]),
                    q=float(sec.get("q", 0.0)),
                    c_phi1=float(sec.get("c_phi1", 0.0)),
                    eta=eta,
                    xi_table=[row[0] for row in sec["table"]],
                    phi1_table=[row[1] for row in sec["table"]],
                )
            p = p_override if p_override is not None else sec.get("p")
            return builtin_symbol(name, p=p, eta=eta)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"invalid symbol section: {exc}") from exc

    def build_initial_data(self, grid: GridSpec) -> SpectralField:
        sec = self.raw.get("initial_data", {"type": "zero"})
        kind = sec.get("type")
        if kind == "zero":
            return zero_field(grid)
        if kind == "gaussian":
            return gaussian_field(
                grid,
                amplitude=float(sec.get("amplitude", 1.0)),
                width=float(sec["width"]) if "width" in sec else None,
                center=float(sec.get("center", 0.0)),
            )
        if kind == "rough":
            return rough_field(
                grid,
                sobolev_index=float(sec.get("sobolev_index", 0.0)),
                seed=int(sec.get("seed", self.seed)),
                amplitude=float(sec.get("amplitude", 1.0)),
            )
        raise ConfigError(f"unknown initial_data type {kind!r}")

    def build_problem(self, p_override: float | None = None, **overrides) -> IvpProblem:
        grid = self.build_grid()
        symbol = self.build_symbol(p_override=p_override)
        params = dict(
            symbol=symbol,
            grid=grid,
            k=float(self.raw.get("k", 1.0)),
            mode=self.raw.get("mode", "conservative"),
            s=float(self.raw.get("s", 0.0)),
            initial_data=self.build_initial_data(grid),
        )
        params.update(overrides)
        try:
            return IvpProblem(**params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_values(self) -> list[dict]:
        """Cartesian (k, p, s) combinations for the sweep command."""
        sec = self.raw.get("sweep", {})
        ks = [float(v) for v in sec.get("k", [self.raw.get("k", 1.0)])]
        ps = sec.get("p")
        ss = [float(v) for v in sec.get("s", [self.raw.get("s", 0.0)])]
        combos = []
        for k in ks:
            for p in [None] if ps is None else [float(v) for v in ps]:
                for s in ss:
                    combos.append({"k": k, "p": p, "s": s})
        return combos

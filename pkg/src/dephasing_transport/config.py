"""Reading and writing network/run configuration files (YAML or JSON)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .network import NetworkSpec, SpecError

NETWORK_KEYS = ("n_sites", "omega", "couplings", "gamma_diss", "gamma_deph",
                "sink_site", "sink_rate")


def parse_horizon(value) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"inf", "infinity", "+inf", ".inf"}:
            return math.inf
        value = float(text)
    value = float(value)
    if not value > 0:
        raise SpecError(f"horizon must be positive or inf, got {value}")
    return value


def format_horizon(value: float):
    return "inf" if math.isinf(value) else value


def parse_free(value, n_sites: int) -> tuple[int, ...] | None:
    if value is None or (isinstance(value, str) and value.strip().lower() == "all"):
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return tuple(int(v) for v in value)


@dataclass
class RunConfig:
    spec: NetworkSpec
    initial: str = "site:1"
    horizon: float = math.inf
    optimize: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = self.spec.to_dict()
        out["initial"] = self.initial
        out["horizon"] = format_horizon(self.horizon)
        if self.optimize:
            out["optimize"] = dict(self.optimize)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise SpecError("configuration must be a mapping")
        spec = NetworkSpec.from_dict({k: data[k] for k in NETWORK_KEYS if k in data})
        optimize = data.get("optimize") or {}
        if not isinstance(optimize, dict):
            raise SpecError("'optimize' must be a mapping")
        unknown = set(optimize) - {"free", "restarts", "budget", "gamma_max", "seed"}
        if unknown:
            raise SpecError(f"unknown optimize keys {sorted(unknown)}")
        return cls(
            spec=spec,
            initial=str(data.get("initial", "site:1")),
            horizon=parse_horizon(data.get("horizon", "inf")),
            optimize=dict(optimize),
        )


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return RunConfig.from_dict(data)


def save_config(config: RunConfig | NetworkSpec, path: str | Path) -> None:
    if isinstance(config, NetworkSpec):
        config = RunConfig(config)
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)

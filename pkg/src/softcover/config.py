"""JSON experiment configs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curve import rate_grid
from .prob import InvalidDistribution, _check_pmf


class ConfigError(ValueError):
    pass


@dataclass
class SimSettings:
    enabled: bool = False
    n_list: list[int] = field(default_factory=lambda: [8, 12, 16])
    trials: int = 50
    rate: float | None = None


@dataclass
class ExperimentConfig:
    channel: np.ndarray
    input_dist: np.ndarray | None
    target_output: np.ndarray | None
    rates: np.ndarray
    qx_resolution: int = 32
    v_resolution: int = 256
    polytope_resolution: int = 33
    s_tol: float = 1e-6
    lambda_tol: float = 1e-7
    seed: int = 0
    sim: SimSettings = field(default_factory=SimSettings)

    @property
    def target(self) -> np.ndarray:
        if self.target_output is not None:
            return self.target_output
        t = self.input_dist @ self.channel
        return t / t.sum()


def _field(d: dict, key: str, where: str, default=...):
    if key in d:
        return d[key]
    if default is ...:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return default


def _prob_vector(value, where: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
        _check_pmf(v, tol=1e-9)
    except (TypeError, ValueError, InvalidDistribution) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return v


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    try:
        W = np.asarray(_field(data, "channel", "config"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"channel: {exc}") from None
    if W.ndim != 2:
        raise ConfigError("channel: must be a matrix (list of rows)")
    for x, row in enumerate(W):
        _prob_vector(row, f"channel[{x}]")

    has_in, has_out = "input_dist" in data, "target_output" in data
    if has_in == has_out:
        raise ConfigError("config: give exactly one of 'input_dist' or 'target_output'")
    px = _prob_vector(data["input_dist"], "input_dist") if has_in else None
    py = _prob_vector(data["target_output"], "target_output") if has_out else None
    if px is not None and px.size != W.shape[0]:
        raise ConfigError("input_dist: length does not match channel inputs")
    if py is not None and py.size != W.shape[1]:
        raise ConfigError("target_output: length does not match channel outputs")

    grid = _field(data, "rate_grid", "config", {"start": 0.0, "stop": 0.6, "step": 0.025})
    try:
        rates = rate_grid(float(_field(grid, "start", "rate_grid")),
                          float(_field(grid, "stop", "rate_grid")),
                          float(_field(grid, "step", "rate_grid")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"rate_grid: {exc}") from None

    res = data.get("resolutions", {})
    tol = data.get("tolerances", {})
    s = data.get("sim", {})
    try:
        sim = SimSettings(enabled=bool(s.get("enabled", False)),
                          n_list=[int(n) for n in s.get("n_list", [8, 12, 16])],
                          trials=int(s.get("trials", 50)),
                          rate=None if s.get("rate") is None else float(s["rate"]))
        cfg = ExperimentConfig(W, px, py, rates,
                               qx_resolution=int(res.get("qx", 32)),
                               v_resolution=int(res.get("v", 256)),
                               polytope_resolution=int(res.get("polytope", 33)),
                               s_tol=float(tol.get("s_tol", 1e-6)),
                               lambda_tol=float(tol.get("lambda_tol", 1e-7)),
                               seed=int(data.get("seed", 0)),
                               sim=sim)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"resolutions/tolerances/sim: {exc}") from None
    if cfg.qx_resolution < 16 or cfg.v_resolution < 16:
        raise ConfigError("resolutions: qx and v must be at least 16")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data)


FIGURE1 = {
    "channel": [[0.9, 0.1], [0.1, 0.9]],
    "input_dist": [0.48, 0.52],
    "rate_grid": {"start": 0.0, "stop": 0.6, "step": 0.025},
    "seed": 20240917,
    "sim": {"enabled": True, "n_list": [8, 12, 16], "trials": 50, "rate": 0.25},
}

"""Run configuration and its JSON form.

Config file keys (all optional)::

    {
      "decode":   {"center_threshold": 0.3, "nms_window": 7, "min_instance_px": 500},
      "boundary": {"dilation_radius": 2, "connectivity": 4},
      "fg_overlap_ratio": 0.3,
      "fg_threshold": 0.5,
      "center_sigma": 8.0,
      "parallel_workers": 1,
      "perturb": {
        "p_boundary": 0.5, "subsample_keep": [0.1, 0.5], "morph_radius_range": [1, 5],
        "p_remove": 0.15, "p_split": 0.15, "p_add_fp": 0.5, "max_added_fp": 2,
        "fp_max_overlap": 0.1, "seed": 0,
        "felz": {"k": 500, "min_size": 200, "smoothing_sigma": 0.8}
      }
    }

A perturbation config file may also hold the ``perturb`` keys at top level.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..error_maps import BoundaryConfig
from ..exceptions import ConfigError
from ..felzenszwalb import FelzParams
from ..perturb import PerturbConfig
from ..represent import DEFAULT_SIGMA, DecodeConfig


@dataclass(frozen=True)
class RunConfig:
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    fg_overlap_ratio: float = 0.3
    fg_threshold: float = 0.5
    center_sigma: float = DEFAULT_SIGMA
    parallel_workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.fg_overlap_ratio <= 1.0:
            raise ConfigError(f"fg_overlap_ratio must lie in [0, 1], got {self.fg_overlap_ratio}")
        if not 0.0 <= self.fg_threshold <= 1.0:
            raise ConfigError(f"fg_threshold must lie in [0, 1], got {self.fg_threshold}")
        if self.parallel_workers < 1:
            raise ConfigError("parallel_workers must be >= 1")


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def perturb_config_from_dict(data: dict) -> PerturbConfig:
    data = dict(data)
    if "felz" in data:
        data["felz"] = _build(FelzParams, data["felz"], "perturb.felz")
    for key in ("subsample_keep", "morph_radius_range"):
        if key in data:
            if not isinstance(data[key], (list, tuple)) or len(data[key]) != 2:
                raise ConfigError(f"perturb.{key}: expected a [low, high] pair")
            data[key] = tuple(data[key])
    return _build(PerturbConfig, data, "perturb")


def run_config_from_dict(data: dict) -> RunConfig:
    data = {k: v for k, v in data.items() if k != "perturb"}
    if "decode" in data:
        data["decode"] = _build(DecodeConfig, data["decode"], "decode")
    if "boundary" in data:
        data["boundary"] = _build(BoundaryConfig, data["boundary"], "boundary")
    return _build(RunConfig, data, "config")


def load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def split_config(data: dict) -> tuple[RunConfig, PerturbConfig]:
    """Interpret one config dict as (run config, perturbation config)."""
    perturb_keys = {f.name for f in fields(PerturbConfig)}
    if "perturb" in data:
        pdata = data["perturb"]
        rdata = data
    elif data and set(data) <= perturb_keys:
        pdata, rdata = data, {}
    else:
        pdata, rdata = {}, data
    return run_config_from_dict(rdata), perturb_config_from_dict(pdata)

#!/usr/bin/env python3
"""
Run Configuration
Resolves numeric settings from the built-in defaults, config/run_config.json,
an optional user file (--config or HOLDERREG_CONFIG) and CLI overrides.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Optional

from dotenv import load_dotenv

from config.paths import CONFIG_ENV_VAR, DEFAULT_RUN_CONFIG, RUN_CONFIG_FILE
from lib.errors import UsageError
from lib.setmap_core import (
    DirectionGrid, ScaleLadder, Tolerances, make_direction_grid, make_radii_ladder, make_scale_ladder,
)

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Tolerances, ladders, grid sizes and output location for one run."""
    tau_mem: float = DEFAULT_RUN_CONFIG['tau_mem']
    eps_pos: float = DEFAULT_RUN_CONFIG['eps_pos']
    eps_inf: float = DEFAULT_RUN_CONFIG['eps_inf']
    slack: float = DEFAULT_RUN_CONFIG['slack']
    chained_slack: float = DEFAULT_RUN_CONFIG['chained_slack']
    ladder_t0: float = DEFAULT_RUN_CONFIG['ladder_t0']
    ladder_theta: float = DEFAULT_RUN_CONFIG['ladder_theta']
    ladder_K: int = DEFAULT_RUN_CONFIG['ladder_K']
    radii_r0: float = DEFAULT_RUN_CONFIG['radii_r0']
    radii_ratio: float = DEFAULT_RUN_CONFIG['radii_ratio']
    radii_K: int = DEFAULT_RUN_CONFIG['radii_K']
    grid_size: int = DEFAULT_RUN_CONFIG['grid_size']
    graph_resolution: int = DEFAULT_RUN_CONFIG['graph_resolution']
    parallel: int = DEFAULT_RUN_CONFIG['parallel']
    seed: int = DEFAULT_RUN_CONFIG['seed']
    enc_cap: int = DEFAULT_RUN_CONFIG['enc_cap']
    lp_tol: float = DEFAULT_RUN_CONFIG['lp_tol']
    allow_high_dim: bool = DEFAULT_RUN_CONFIG['allow_high_dim']
    out_dir: str = DEFAULT_RUN_CONFIG['out_dir']

    def __post_init__(self):
        for name in ('tau_mem', 'eps_pos', 'eps_inf', 'slack', 'chained_slack', 'lp_tol',
                     'ladder_t0', 'radii_r0'):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ('ladder_K', 'radii_K', 'grid_size', 'graph_resolution', 'parallel', 'enc_cap'):
            if int(getattr(self, name)) < 1:
                raise UsageError(f"{name} must be a positive integer, got {getattr(self, name)}")
        for name in ('ladder_K', 'radii_K'):
            if int(getattr(self, name)) < 2:
                raise UsageError(f"{name} must be at least 2, got {getattr(self, name)}")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(tau_mem=self.tau_mem, eps_pos=self.eps_pos, eps_inf=self.eps_inf,
                          slack=self.slack, chained_slack=self.chained_slack)

    def ladder(self) -> ScaleLadder:
        return make_scale_ladder(self.ladder_t0, self.ladder_theta, int(self.ladder_K))

    def radii(self) -> ScaleLadder:
        return make_radii_ladder(self.radii_r0, self.radii_ratio, int(self.radii_K))

    def grid(self, n: int) -> DirectionGrid:
        return make_direction_grid(n, M=int(self.grid_size), allow_high_dim=self.allow_high_dim,
                                   seed=int(self.seed))

    def to_dict(self) -> Dict:
        return asdict(self)


def _read_json(path: Path) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise UsageError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise UsageError(f"{path}: a config file must hold a JSON object")
    return data


def _merge(target: Dict, updates: Dict, source: str):
    known = {f.name for f in fields(RunConfig)}
    for key, value in updates.items():
        if key not in known:
            logger.warning(f"Ignoring unknown config key '{key}' from {source}")
            continue
        target[key] = value


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict] = None,
                    base_file: Path = RUN_CONFIG_FILE) -> RunConfig:
    """
    Defaults → config/run_config.json → user file → overrides.

    The user file is `path` when given, else the file named by
    HOLDERREG_CONFIG (a .env file may set it).
    """
    load_dotenv()
    settings = dict(DEFAULT_RUN_CONFIG)
    if base_file is not None and Path(base_file).exists():
        _merge(settings, _read_json(Path(base_file)), Path(base_file).name)

    user_file = path or os.getenv(CONFIG_ENV_VAR)
    if user_file:
        _merge(settings, _read_json(Path(user_file)), str(user_file))
        logger.info(f"Loaded run config from {user_file}")

    if overrides:
        _merge(settings, {k: v for k, v in overrides.items() if v is not None}, "command line")
    return RunConfig(**settings)

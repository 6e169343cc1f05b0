# src/config.py
"""Planner settings: defaults, an optional YAML file, then a narrow environment overlay.

Only the log level and worker count may come from the environment (or a
``.env`` file). The master seed is taken from flags or the input document so
that it always appears in the output.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import ConfigurationError
from src.optimization.evaluator import OptimizerConfig
from src.simulation.network import SimParams

logger = logging.getLogger(__name__)

ENV_LOG_LEVEL = "CAPPLAN_LOG_LEVEL"
ENV_N_JOBS = "CAPPLAN_N_JOBS"


class PlannerSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    log_level: str = "INFO"
    n_jobs: int = 1
    simulation: SimParams = Field(default_factory=SimParams)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)

    def optimizer_config(self, seed: Optional[int] = None, **overrides: Any) -> OptimizerConfig:
        """Merges simulation settings, the seed and flag overrides into one OptimizerConfig."""
        sim_updates: Dict[str, Any] = {}
        if seed is not None:
            sim_updates["seed"] = seed
        target = overrides.pop("target_rel_half_width", None)
        if target is not None:
            sim_updates["target_rel_half_width"] = target
        try:
            sim_params = SimParams(**{**self.simulation.model_dump(), **sim_updates})
        except ValidationError as exc:
            raise ConfigurationError(f"invalid simulation settings: {exc}") from exc
        updates = {"sim_params": sim_params, "n_jobs": self.n_jobs}
        updates.update({k: v for k, v in overrides.items() if v is not None})
        return self.optimizer.model_copy(update=updates)


def _read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as exc:
        raise ConfigurationError(f"cannot read settings file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"settings file {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"settings file {path} must hold a mapping")
    return data


def load_settings(path: Optional[Union[str, Path]] = None) -> PlannerSettings:
    """Builds the settings from defaults, an optional YAML file and the environment."""
    load_dotenv()
    data: Dict[str, Any] = _read_yaml(path) if path else {}
    level = os.getenv(ENV_LOG_LEVEL)
    if level:
        data["log_level"] = level
    n_jobs = os.getenv(ENV_N_JOBS)
    if n_jobs:
        try:
            data["n_jobs"] = int(n_jobs)
        except ValueError as exc:
            raise ConfigurationError(f"{ENV_N_JOBS} must be an integer, got '{n_jobs}'") from exc

    try:
        settings = PlannerSettings.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid settings: {exc}") from exc
    logger.debug(f"Loaded settings: {settings.model_dump()}")
    return settings

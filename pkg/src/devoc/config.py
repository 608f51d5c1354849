"""Flat `key = value` configuration shared by the library and the CLI.

Unknown keys are a load error so typos never silently fall back to
defaults; an absent file means pure defaults.
"""

from __future__ import annotations

import dataclasses
import os

from .nn import TrainConfig
from .structural import StructuralConfig


class ConfigError(Exception):
    pass


class UnknownConfigKeyError(ConfigError):
    pass


class BadConfigValueError(ConfigError):
    pass


@dataclasses.dataclass
class Config:
    # structural thresholds
    step_tol: int = 2
    drift_tol_frac: float = 0.10
    full_span: float = 0.85
    partial_span: float = 0.25
    spine_height_frac: float = 0.75
    mid_mass_tol: int = 5
    max_consecutive_up: int = 100
    max_gap: int = 2
    # raster
    max_spur: int = 3
    # features
    feature_cap: float = 5.0
    # training
    learning_rate: float = 0.01
    momentum: float = 0.95
    min_gradient: float = 1e-8
    max_epochs: int = 500
    trainer: str = "scg"
    seed: int = 0
    n_hidden: int = 40
    # synthesis
    amplitude: int = 2
    per_class: int = 100

    def structural(self):
        return StructuralConfig(
            step_tol=self.step_tol,
            drift_tol_frac=self.drift_tol_frac,
            full_span=self.full_span,
            partial_span=self.partial_span,
            spine_height_frac=self.spine_height_frac,
            mid_mass_tol=self.mid_mass_tol,
            max_consecutive_up=self.max_consecutive_up,
            max_gap=self.max_gap,
        )

    def training(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            min_gradient=self.min_gradient,
            max_epochs=self.max_epochs,
            trainer=self.trainer,
            seed=self.seed,
            n_hidden=self.n_hidden,
        )


_FIELDS = {f.name: f.type for f in dataclasses.fields(Config)}


def _coerce(key, text):
    kind = _FIELDS[key]
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except ValueError:
        raise BadConfigValueError("bad value %r for key %r" % (text, key))


def load_config(path=None):
    """Parse `key = value` lines ('#' comments); None or a missing default
    path yields defaults."""
    cfg = Config()
    if path is None:
        return cfg
    if not os.path.exists(path):
        raise ConfigError("config file %s does not exist" % path)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected 'key = value'" % (path, lineno))
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise UnknownConfigKeyError("%s:%d: unknown key %r" % (path, lineno, key))
            setattr(cfg, key, _coerce(key, value.strip()))
    return cfg

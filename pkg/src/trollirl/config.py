"""Pipeline configuration: dataclasses plus an INI file loader.

Example file::

    [pipeline]
    k = 10
    seed = 7
    irl_variant = linear

    [irl]
    gamma = 0.9
    epochs = 200

    [classifier]
    rounds = 500

Every key is optional; unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from trollirl.irl import IrlConfig

VARIANTS = ("linear", "deep")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierConfig:
    rounds: int = 500
    lr: float = 0.05
    folds: int = 10
    undersample_parts: int = 5
    # Standardise rewards with training-fold statistics before boosting.
    scale: bool = True


@dataclass(frozen=True)
class SimulateConfig:
    n_troll: int = 150
    n_user: int = 750
    steps_min: int = 8
    steps_max: int = 250
    spread: float = 0.35
    gamma: float = 0.9
    temperature: float = 1.0


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.01
    scale: bool = True
    # "none" or "bonferroni" (alpha divided by the number of columns).
    correction: str = "none"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.correction not in ("none", "bonferroni"):
            raise ValueError("correction must be 'none' or 'bonferroni'")


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 10
    seed: int = 0
    irl_variant: str = "linear"
    hidden: tuple[int, ...] = (8,)
    k_values: tuple[int, ...] = (5, 10, 15, 20, 25)
    out: str = "out"
    # Inputs default to the files the upstream subcommand writes into ``out``.
    events: Optional[str] = None
    labels: Optional[str] = None
    rewards: Optional[str] = None
    irl: IrlConfig = field(default_factory=IrlConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be positive")
        if self.irl_variant not in VARIANTS:
            raise ConfigError(f"irl_variant must be one of {VARIANTS}")
        if not self.k_values or list(self.k_values) != sorted(set(self.k_values)):
            raise ConfigError("k_values must be non-empty and strictly ascending")

    def path(self, name: str, default: str) -> Path:
        value = getattr(self, name)
        return Path(value) if value else Path(self.out) / default

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


SECTIONS = {"irl": IrlConfig, "classifier": ClassifierConfig, "simulate": SimulateConfig,
            "analysis": AnalysisConfig}


def _convert(raw: str, default, name: str, type_name: str = ""):
    if default is None and raw.lower() in ("", "none"):
        return None
    if default is None and "int" in type_name:
        default = 0
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, tuple):
            return tuple(int(x) for x in raw.replace(",", " ").split())
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def _apply(obj, values: dict, section: str):
    fields = {f.name: f for f in dataclasses.fields(obj)}
    changes = {}
    for key, raw in values.items():
        if key not in fields or key in SECTIONS:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        if isinstance(raw, str):
            raw = _convert(raw, getattr(obj, key), f"{section}.{key}", str(fields[key].type))
        changes[key] = raw
    try:
        return dataclasses.replace(obj, **changes)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def load_config(path=None, overrides: Optional[dict] = None) -> PipelineConfig:
    """Read an INI file (if given) and apply ``overrides`` to [pipeline] keys."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    unknown = set(parser.sections()) - set(SECTIONS) - {"pipeline"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    nested = {}
    for name, cls in SECTIONS.items():
        values = dict(parser[name]) if parser.has_section(name) else {}
        nested[name] = _apply(cls(), values, name)
    top = dict(parser["pipeline"]) if parser.has_section("pipeline") else {}
    top.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        base = PipelineConfig(**nested)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _apply(base, top, "pipeline")

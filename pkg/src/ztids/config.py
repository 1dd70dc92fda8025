"""Layered run configuration.

Settings resolve in three layers: dataclass defaults, then a TOML config
file, then command-line flags. A flag only overrides when it was actually
given (None means absent). Unknown keys are usage errors so typos surface
instead of silently running with defaults.
"""
from __future__ import annotations

import dataclasses
import os

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .adversarial import DEFAULT_ATTACK_PARAMS, ExerciseSettings
from .errors import UsageError
from .online.automl import OnlineSettings
from .optimize import OfflineSettings

ATTACK_KEYS = ("eps", "alpha", "iters", "offset")


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise UsageError(f"malformed config {path}: {e}") from None


def _section(file_cfg: dict, name: str) -> dict:
    sec = file_cfg.get(name, {}) or {}
    if not isinstance(sec, dict):
        raise UsageError(f"config section [{name}] must be a table")
    return dict(sec)


def _merged(name: str, file_cfg: dict, overrides: dict) -> dict:
    out = _section(file_cfg, name)
    for k, v in overrides.items():
        if v is not None:
            out[k] = v
    return out


def _build(cls, name: str, cfg: dict):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(cfg) - fields)
    if unknown:
        raise UsageError(f"unknown [{name}] config keys: {', '.join(unknown)}")
    kwargs = dict(cfg)
    for key in ("kinds", "candidates"):
        if isinstance(kwargs.get(key), list):
            kwargs[key] = tuple(kwargs[key])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad [{name}] config: {e}") from None


def default_threads() -> int:
    return os.cpu_count() or 1


def offline_settings(file_cfg: dict, **overrides) -> OfflineSettings:
    cfg = _merged("offline", file_cfg, overrides)
    cfg.setdefault("threads", default_threads())
    return _build(OfflineSettings, "offline", cfg)


def online_settings(file_cfg: dict, **overrides) -> OnlineSettings:
    cfg = _merged("online", file_cfg, overrides)
    cfg.setdefault("threads", default_threads())
    return _build(OnlineSettings, "online", cfg)


def exercise_settings(file_cfg: dict, seed: int | None = None,
                      threads: int | None = None,
                      ) -> tuple[ExerciseSettings, int]:
    """Resolve the drill settings and its root seed.

    [exercise] may carry a seed of its own; the --seed flag wins. The nested
    [exercise.automl] table configures the victim-model pipeline and inherits
    the resolved seed and thread count unless it pins them itself.
    """
    cfg = _section(file_cfg, "exercise")
    file_seed = cfg.pop("seed", None)
    root = seed if seed is not None else (int(file_seed) if file_seed is not None else 0)
    automl_cfg = cfg.pop("automl", {}) or {}
    if not isinstance(automl_cfg, dict):
        raise UsageError("config section [exercise.automl] must be a table")
    automl_cfg.setdefault("seed", root)
    automl_cfg.setdefault("threads", threads if threads is not None else default_threads())
    cfg["automl"] = _build(OfflineSettings, "exercise.automl", automl_cfg)
    if "surrogate_params" in cfg and not isinstance(cfg["surrogate_params"], dict):
        raise UsageError("[exercise] surrogate_params must be a table")
    return _build(ExerciseSettings, "exercise", cfg), root


def attack_params(name: str, file_cfg: dict, **flag_overrides) -> dict:
    """Defaults for the named attack, overlaid by [attack] keys then flags.

    Keys that the chosen attack does not use are ignored, so one config or
    command line can carry eps/alpha/iters/offset for whichever attack runs.
    """
    upper = name.upper()
    if upper not in DEFAULT_ATTACK_PARAMS:
        known = ", ".join(k.lower() for k in DEFAULT_ATTACK_PARAMS)
        raise UsageError(f"unknown attack {name!r}; choose one of {known}")
    section = _section(file_cfg, "attack")
    unknown = sorted(set(section) - set(ATTACK_KEYS))
    if unknown:
        raise UsageError(f"unknown [attack] config keys: {', '.join(unknown)}")
    params = dict(DEFAULT_ATTACK_PARAMS[upper])
    for layer in (section, flag_overrides):
        for k, v in layer.items():
            if k in params and v is not None:
                params[k] = v
    return params

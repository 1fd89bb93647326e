"""Declarative run configuration: key = value files merged with CLI flags.

The file schema is one ``key = value`` pair per line, ``#`` comments, blank
lines ignored.  Flags override file values; every flag has a same-named key
(dashes become underscores).  The fully resolved configuration is echoed
into the experiment report so a run can be reproduced from its artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config_file", "resolve_config"]

_NONE_WORDS = {"", "none", "null"}
_TRUE_WORDS = {"true", "yes", "on", "1"}
_FALSE_WORDS = {"false", "no", "off", "0"}

DATASETS = ("synthetic", "salinas", "indian_pines_subset", "file")
PROJECTIONS = ("normalize", "stereographic")
ORACLES = ("truth", "replay")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE_WORDS:
        return True
    if lowered in _FALSE_WORDS:
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_opt_int(text: str):
    return None if text.strip().lower() in _NONE_WORDS else int(text)


def _parse_int_list(text: str):
    if text.strip().lower() in _NONE_WORDS:
        return None
    return tuple(int(part) for part in text.replace(" ", "").split(",") if part)


def _parse_window(text: str):
    """``r0:r1,c0:c1`` half-open row and column ranges."""
    if text.strip().lower() in _NONE_WORDS:
        return None
    try:
        row_part, col_part = text.replace(" ", "").split(",")
        r0, r1 = (int(v) for v in row_part.split(":"))
        c0, c1 = (int(v) for v in col_part.split(":"))
    except ValueError as exc:
        raise ConfigError(f"window must look like 'r0:r1,c0:c1', got {text!r}") from exc
    return ((r0, r1), (c0, c1))


def _parse_presets(text: str):
    """``index:label`` pairs separated by commas."""
    if text.strip().lower() in _NONE_WORDS:
        return ()
    pairs = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        try:
            idx, label = part.split(":")
            pairs.append((int(idx), int(label)))
        except ValueError as exc:
            raise ConfigError(
                f"preset_queries must look like 'index:label,...', got {text!r}"
            ) from exc
    return tuple(pairs)


@dataclass
class RunConfig:
    """Every knob of an experiment run, with reproducible defaults."""

    dataset: str = "synthetic"
    features: str | None = None
    labels: str | None = None
    out_dir: str = "sphereal_out"
    n: int = 32
    theta: float = 0.1
    eta_start: float = 0.05
    eta_step: float = 0.05
    eta_max: float = math.pi / 4
    pca_dim: int | None = None
    pca_var: float | None = None
    pca_cap: int = 50
    decay_s: int = 3
    seed: int = 0
    query_budget: int | None = None
    witness_n: int | None = None
    projection: str = "normalize"
    oracle: str = "truth"
    replay_log: str | None = None
    anchor_cap: int | None = None
    auto_n: bool = False
    preset_queries: tuple = ()
    # synthetic dataset knobs
    classes: int = 3
    sphere_dim: int = 2
    points_per_class: int = 200
    cap_radius: float = 0.1
    overlap_fraction: float = 0.0
    min_separation: float = 1.0
    # benchmark dataset knobs
    class_filter: tuple | None = None
    per_class_fraction: float = 1.0
    window: tuple | None = None
    grid_height: int | None = None
    grid_width: int | None = None

    def validate(self) -> None:
        if self.dataset not in DATASETS:
            raise ConfigError(
                f"dataset must be one of {', '.join(DATASETS)}, got {self.dataset!r}"
            )
        if self.projection not in PROJECTIONS:
            raise ConfigError(
                f"projection must be one of {', '.join(PROJECTIONS)}, got "
                f"{self.projection!r}"
            )
        if self.oracle not in ORACLES:
            raise ConfigError(f"oracle must be 'truth' or 'replay', got {self.oracle!r}")
        if self.oracle == "replay" and not self.replay_log:
            raise ConfigError("oracle = replay requires replay_log")
        if self.dataset != "synthetic":
            if not self.features or not self.labels:
                raise ConfigError(
                    f"dataset {self.dataset!r} requires features and labels files"
                )

    def echo(self) -> dict[str, str]:
        """Canonical text form of every resolved key, sorted by key."""
        out = {}
        for f in sorted(fields(self), key=lambda f: f.name):
            out[f.name] = _format_value(getattr(self, f.name))
        return out


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip form
    if isinstance(value, tuple):
        if not value:
            return "none"
        if isinstance(value[0], tuple):  # window or index:label pairs
            return ",".join(f"{a}:{b}" for a, b in value)
        return ",".join(str(v) for v in value)
    return str(value)


_PARSERS = {
    "dataset": str,
    "features": lambda s: None if s.strip().lower() in _NONE_WORDS else s.strip(),
    "labels": lambda s: None if s.strip().lower() in _NONE_WORDS else s.strip(),
    "out_dir": str,
    "n": int,
    "theta": float,
    "eta_start": float,
    "eta_step": float,
    "eta_max": float,
    "pca_dim": _parse_opt_int,
    "pca_var": lambda s: None if s.strip().lower() in _NONE_WORDS else float(s),
    "pca_cap": int,
    "decay_s": int,
    "seed": int,
    "query_budget": _parse_opt_int,
    "witness_n": _parse_opt_int,
    "projection": str,
    "oracle": str,
    "replay_log": lambda s: None if s.strip().lower() in _NONE_WORDS else s.strip(),
    "anchor_cap": _parse_opt_int,
    "auto_n": _parse_bool,
    "preset_queries": _parse_presets,
    "classes": int,
    "sphere_dim": int,
    "points_per_class": int,
    "cap_radius": float,
    "overlap_fraction": float,
    "min_separation": float,
    "class_filter": _parse_int_list,
    "per_class_fraction": float,
    "window": _parse_window,
    "grid_height": _parse_opt_int,
    "grid_width": _parse_opt_int,
}


def parse_config_file(path) -> dict:
    """Read a key = value file into typed values; unknown keys are errors."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, text = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _PARSERS[key](text.strip())
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(file_values: dict | None = None, overrides: dict | None = None
                   ) -> RunConfig:
    """Defaults, then file values, then flag overrides (None means unset)."""
    config = RunConfig()
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if not hasattr(config, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(config, key, value)
    config.validate()
    return config

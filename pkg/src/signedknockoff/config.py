"""Study design config files.

INI format with one required ``[design]`` section whose keys mirror the
design dataclass fields, plus ``kind = normal | t`` and an optional
one-field grid::

    [design]
    kind = normal
    n = 2000
    p1 = 0.1
    p2 = 0.1
    mu1 = -3
    mu2 = 3
    alpha = 0.1
    reps = 100
    seed = 1
    vary = p1
    values = 0.05, 0.1, 0.15

Unknown keys are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .simulate import Design, NormalDesign, TDesign

__all__ = ["DesignConfig", "load_design_config"]

_INT_FIELDS = {"n", "reps", "seed", "block_size", "n_treat", "n_control"}
_FLOAT_FIELDS = {"p1", "p2", "mu1", "mu2", "alpha", "rho"}


@dataclass(frozen=True)
class DesignConfig:
    """A base design plus an optional single-field value grid."""

    base: Design
    vary: Optional[str] = None
    values: Optional[tuple[float, ...]] = None

    def designs(self) -> list[Design]:
        if self.vary is None:
            return [self.base]
        caster = int if self.vary in _INT_FIELDS else float
        return [dataclasses.replace(self.base, **{self.vary: caster(v)}) for v in self.values]


def _convert(key: str, raw: str, path: Path):
    try:
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ValueError(f"{path}: key {key!r} has non-numeric value {raw!r}") from None


def load_design_config(path) -> DesignConfig:
    """Parse and validate a design config file."""
    path = Path(path)
    if not path.is_file():
        raise OSError(f"design config not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from exc
    if "design" not in parser:
        raise ValueError(f"{path}: missing [design] section")
    section = dict(parser["design"])

    kind = section.pop("kind", None)
    if kind not in {"normal", "t"}:
        raise ValueError(f"{path}: kind must be 'normal' or 't', got {kind!r}")
    cls = NormalDesign if kind == "normal" else TDesign
    field_names = {f.name for f in dataclasses.fields(cls)}

    vary = section.pop("vary", None)
    values_raw = section.pop("values", None)
    if (vary is None) != (values_raw is None):
        raise ValueError(f"{path}: 'vary' and 'values' must be given together")
    if vary is not None and vary not in field_names:
        raise ValueError(f"{path}: cannot vary unknown field {vary!r}")

    unknown = set(section) - field_names
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)} for kind={kind}")

    kwargs = {key: _convert(key, raw, path) for key, raw in section.items()}
    base = cls(**kwargs)

    values = None
    if values_raw is not None:
        parts = [p.strip() for p in values_raw.split(",") if p.strip()]
        if not parts:
            raise ValueError(f"{path}: 'values' is empty")
        values = tuple(_convert(vary, p, path) for p in parts)

    config = DesignConfig(base=base, vary=vary, values=values)
    config.designs()  # validate every grid point eagerly
    return config

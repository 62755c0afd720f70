"""Scenario configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored.  Omitted keys fall back to the
defaults below, which reproduce the reference simulation setup (114 m area,
four 57 m regions, five users each, 6 antennas, b = 11 m, 22-36 m altitude
band, 1 mW per UAV, -35 dBm noise).  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ConfigParseError, ValidationError

ZONE_MODES = ("band", "ellipse")
GAIN_MODES = ("deterministic", "gaussian")
POWER_MODES = ("per_uav", "per_user")


@dataclass(frozen=True)
class ScenarioConfig:
    area_side_m: float = 114.0
    region_rows: int = 2
    region_cols: int = 2
    users_per_region: int = 5
    num_uavs: int = 4
    num_antennas: int = 6
    path_loss_exponent: float = 2.0
    spacing_ratio: float = 0.5
    grid_nx: int = 2
    grid_ny: int = 2
    grid_nz: int = 5
    # "dx,dy,z; dx,dy,z; ..." offsets from each region's lower-left corner;
    # overrides the lattice when set
    candidates_m: str = ""
    h_min_m: float = 22.0
    h_max_m: float = 36.0
    zone_mode: str = "band"
    zone_a_m: float = 22.0
    zone_b_m: float = 11.0
    uav_power_mw: float = 1.0
    power_mode: str = "per_uav"
    n0_dbm: float = -35.0
    gamma_th_db: float = -6.58
    gain_mode: str = "deterministic"
    seed: Optional[int] = None

    def __post_init__(self):
        validate(self)

    @property
    def effective_seed(self) -> int:
        return 0 if self.seed is None else self.seed

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def candidate_offsets(self) -> list[tuple[float, float, float]]:
        out = []
        for chunk in self.candidates_m.split(";"):
            if not chunk.strip():
                continue
            parts = chunk.split(",")
            if len(parts) != 3:
                raise ValidationError("candidates_m", f"expected 'dx,dy,z', got {chunk.strip()!r}")
            try:
                out.append(tuple(float(p) for p in parts))
            except ValueError:
                raise ValidationError("candidates_m", f"non-numeric entry {chunk.strip()!r}") from None
        return out

    def to_text(self) -> str:
        """Canonical text form: every key, declaration order, ``repr`` values."""
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _positive(cfg, name):
    if not getattr(cfg, name) > 0:
        raise ValidationError(name, "must be > 0")


def validate(cfg: ScenarioConfig) -> None:
    for name in ("area_side_m", "spacing_ratio", "zone_a_m", "zone_b_m", "h_min_m"):
        _positive(cfg, name)
    for name in ("region_rows", "region_cols", "users_per_region", "num_uavs", "num_antennas",
                 "grid_nx", "grid_ny", "grid_nz"):
        if getattr(cfg, name) < 1:
            raise ValidationError(name, "must be >= 1")
    if cfg.num_uavs != cfg.region_rows * cfg.region_cols:
        raise ValidationError(
            "num_uavs",
            f"{cfg.num_uavs} UAVs for a {cfg.region_rows}x{cfg.region_cols} region grid; need one per region",
        )
    if cfg.h_min_m > cfg.h_max_m:
        raise ValidationError("h_min_m", f"{cfg.h_min_m} exceeds h_max_m={cfg.h_max_m}")
    if cfg.path_loss_exponent < 0:
        raise ValidationError("path_loss_exponent", "must be >= 0")
    if cfg.uav_power_mw < 0:
        raise ValidationError("uav_power_mw", "must be >= 0")
    if cfg.zone_mode not in ZONE_MODES:
        raise ValidationError("zone_mode", f"must be one of {ZONE_MODES}")
    if cfg.gain_mode not in GAIN_MODES:
        raise ValidationError("gain_mode", f"must be one of {GAIN_MODES}")
    if cfg.power_mode not in POWER_MODES:
        raise ValidationError("power_mode", f"must be one of {POWER_MODES}")
    if cfg.gain_mode == "gaussian" and cfg.seed is None:
        raise ValidationError("seed", "required when gain_mode = gaussian")
    if cfg.seed is not None and cfg.seed < 0:
        raise ValidationError("seed", "must be >= 0")
    cfg.candidate_offsets()


def _coerce(name: str, raw: str):
    typ = _FIELDS[name].type
    try:
        if typ in ("int", "Optional[int]"):
            return int(raw)
        if typ == "float":
            return float(raw)
    except ValueError:
        raise ValidationError(name, f"cannot parse {raw!r} as {typ}") from None
    return raw


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        values[key] = _coerce(key, raw)
    return ScenarioConfig(**values)


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)

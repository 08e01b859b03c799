"""Run configuration: TOML schema, validation, and round-trip serialization.

The file format is TOML restricted to scalars and nested sections; every key
maps one-to-one onto a dataclass field, and unknown keys are rejected with
their dotted path.  Serialization writes keys in a fixed order with repr
floats, so parse -> serialize -> parse is the identity and equal configs
produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import presets
from .modes import Arm
from .source import EfficiencyTable, SourceConfig
from .wavepacket import WavepacketConfig


class ConfigError(ValueError):
    """Invalid configuration; message carries the dotted key path."""


@dataclass(frozen=True)
class ScanGrid:
    delay_min_um: float = -60.0
    delay_max_um: float = 60.0
    delay_count: int = 41

    def delays(self):
        if self.delay_count < 5:
            raise ConfigError("scan.delay_count must be at least 5")
        step = (self.delay_max_um - self.delay_min_um) / (self.delay_count - 1)
        return [self.delay_min_um + k * step for k in range(self.delay_count)]


@dataclass(frozen=True)
class HomParams:
    shots: int = presets.DEFAULT_SHOTS["hom"]
    overlap_at_zero_a: float = math.sqrt(0.985)
    overlap_at_zero_b: float = math.sqrt(0.991)
    accidental_rate_a_hz: float = 0.0
    accidental_rate_b_hz: float = 0.0

    def __post_init__(self):
        if self.shots <= 0:
            raise ConfigError("hom.shots must be positive")


@dataclass(frozen=True)
class HeScanParams:
    shots: int = presets.DEFAULT_SHOTS["hescan"]
    v_path_dip: float = presets.HESCAN_V_PATH_DIP
    v_path_peak: float = presets.HESCAN_V_PATH_PEAK


@dataclass(frozen=True)
class PathScanParams:
    shots: int = presets.DEFAULT_SHOTS["pathscan"]
    v_path_dip: float = presets.PATHSCAN_V_PATH_DIP
    v_path_peak: float = presets.PATHSCAN_V_PATH_PEAK


@dataclass(frozen=True)
class TomoParams:
    shots_per_setting: int = presets.DEFAULT_SHOTS["tomo"]
    n_resamples: int = 200
    monte_carlo: bool = False


@dataclass(frozen=True)
class WitnessParams:
    shots: int = presets.DEFAULT_SHOTS["witness"]


@dataclass(frozen=True)
class GroverParams:
    shots: int = presets.DEFAULT_SHOTS["grover"]
    mode: str = "both"

    def __post_init__(self):
        if self.mode not in ("postselect", "feedforward", "both"):
            raise ConfigError("grover.mode must be postselect, feedforward or both")

    def modes(self):
        return ("postselect", "feedforward") if self.mode == "both" else (self.mode,)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 2016
    source: SourceConfig = field(default_factory=SourceConfig)
    scan: ScanGrid = field(default_factory=ScanGrid)
    hom: HomParams = field(default_factory=HomParams)
    hescan: HeScanParams = field(default_factory=HeScanParams)
    pathscan: PathScanParams = field(default_factory=PathScanParams)
    tomo: TomoParams = field(default_factory=TomoParams)
    witness: WitnessParams = field(default_factory=WitnessParams)
    grover: GroverParams = field(default_factory=GroverParams)


def default_config(command: str) -> RunConfig:
    """The calibrated paper preset for one experiment command."""
    sources = {
        "hom": presets.hescan_source,   # per-arm fields live in [hom]
        "hescan": presets.hescan_source,
        "pathscan": presets.pathscan_source,
        "tomo": presets.cluster_source,
        "witness": presets.cluster_source,
        "grover": presets.grover_source,
    }
    if command not in sources:
        raise ConfigError(f"unknown command {command!r}")
    base = RunConfig(source=sources[command]())
    if command == "hom":
        a, b = presets.hom_source(Arm.A), presets.hom_source(Arm.B)
        base = replace(base, source=replace(a, accidental_rate_hz=0.0),
                       hom=HomParams(
                           overlap_at_zero_a=a.wavepacket.overlap_at_zero,
                           overlap_at_zero_b=b.wavepacket.overlap_at_zero,
                           accidental_rate_a_hz=a.accidental_rate_hz,
                           accidental_rate_b_hz=b.accidental_rate_hz))
    return base


def ideal_override(cfg: RunConfig) -> RunConfig:
    """Zero-noise version of a run config (--ideal)."""
    return replace(
        cfg,
        source=cfg.source.ideal(),
        hom=replace(cfg.hom, overlap_at_zero_a=1.0, overlap_at_zero_b=1.0,
                    accidental_rate_a_hz=0.0, accidental_rate_b_hz=0.0),
        hescan=replace(cfg.hescan, v_path_dip=1.0, v_path_peak=1.0),
        pathscan=replace(cfg.pathscan, v_path_dip=1.0, v_path_peak=1.0),
    )


# ----------------------------------------------------------- (de)serialize --

_DATACLASS_TYPES = {SourceConfig, WavepacketConfig, EfficiencyTable, ScanGrid,
                    HomParams, HeScanParams, PathScanParams, TomoParams,
                    WitnessParams, GroverParams}


def _resolve_types(cls):
    """Dataclass field types may be strings under future annotations."""
    import typing
    return typing.get_type_hints(cls)


def parse_config(text: str, filename: str = "<config>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # TOMLDecodeError messages carry the line and column of the problem.
        raise ConfigError(f"{filename}: {exc}") from exc
    return _build_typed(RunConfig, data, "")


def _build_typed(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a section")
    hints = _resolve_types(cls)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"{path or 'config'}: unknown key(s) {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        ftype = hints[name]
        sub = f"{path}.{name}" if path else name
        if ftype in _DATACLASS_TYPES:
            kwargs[name] = _build_typed(ftype, value, sub)
        elif isinstance(value, dict):
            raise ConfigError(f"{sub}: unexpected section")
        else:
            if ftype is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if ftype in (int, float, bool, str) and not isinstance(value, ftype):
                raise ConfigError(f"{sub}: expected {ftype.__name__}, "
                                  f"got {type(value).__name__}")
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), filename=str(p))


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise ConfigError(f"cannot serialize {type(value).__name__}")


def _emit(obj, prefix, lines):
    hints = _resolve_types(type(obj))
    scalars, sections = [], []
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if hints[f.name] in _DATACLASS_TYPES:
            sections.append((f.name, value))
        else:
            scalars.append((f.name, value))
    if scalars:
        if prefix:
            lines.append(f"[{prefix}]")
        for name, value in scalars:
            lines.append(f"{name} = {_toml_scalar(value)}")
        lines.append("")
    for name, value in sections:
        _emit(value, f"{prefix}.{name}" if prefix else name, lines)


def serialize_config(cfg: RunConfig) -> str:
    lines: list[str] = []
    _emit(cfg, "", lines)
    return "\n".join(lines).rstrip() + "\n"


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(serialize_config(cfg), encoding="utf-8")

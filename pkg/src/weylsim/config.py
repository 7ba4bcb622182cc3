"""Experiment configuration files.

INI format (stdlib configparser). Recognized sections:

    [units]     hbar, mass, trap_freq, lamb_dicke, rabi (SI), or
                dimensionless = true
    [packet]    n, m, width, grid_points, half_extent
    [ion]       fock_n, eta, omega_rabi, omega_rabi_y, phases.*
    [probe]     axis, k_max, dk, shots, seed
    [run]       output_dir, overwrite
    [task:<name>]  type = trajectory | density | prepare | measure |
                   verify-identities | crosscheck, plus per-task parameters

Tasks run in file order. A task may point at an alternative packet section
with ``packet = <section>``; the reference must exist in the same file.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .grids import MomentumGrid
from .ionfock import FockConfig
from .units import DIMENSIONLESS, NaturalUnits, PhysicalParams, derive_scales
from .wavepacket import WavePacketSpec

TASK_TYPES = ("trajectory", "density", "prepare", "measure",
              "verify-identities", "crosscheck")

_UNIT_KEYS = ("hbar", "mass", "trap_freq", "lamb_dicke", "rabi")


@dataclass(frozen=True)
class PacketSection:
    spec: WavePacketSpec
    grid: MomentumGrid


@dataclass(frozen=True)
class TaskSpec:
    name: str
    type: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    units: NaturalUnits
    packet: PacketSection
    ion: FockConfig
    probe: dict
    tasks: tuple[TaskSpec, ...]
    output_dir: str = "out"
    overwrite: bool = False
    packets: dict = field(default_factory=dict)

    def packet_for(self, task: TaskSpec) -> PacketSection:
        ref = task.params.get("packet")
        return self.packets[ref] if ref else self.packet


def _get_float(section, key, default=None, *, where=""):
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r}", where)
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} must be a number, got {raw!r}", where) from None


def _get_int(section, key, default=None, *, where=""):
    value = _get_float(section, key, default, where=where)
    if value != int(value):
        raise ConfigError(f"key {key!r} must be an integer", where)
    return int(value)


def _get_bool(section, key, default=False, *, where=""):
    raw = section.get(key)
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r} must be a boolean, got {raw!r}", where)


def _parse_units(parser) -> NaturalUnits:
    if "units" not in parser:
        return DIMENSIONLESS
    section = parser["units"]
    if _get_bool(section, "dimensionless", False, where="[units]"):
        return DIMENSIONLESS
    values = {k: _get_float(section, k, where="[units]") for k in _UNIT_KEYS}
    try:
        return derive_scales(PhysicalParams(**values))
    except Exception as exc:
        raise ConfigError(str(exc), "[units]") from None


def _parse_packet(parser, name="packet") -> PacketSection:
    section = parser[name] if name in parser else {}
    where = f"[{name}]"
    spec = WavePacketSpec(
        n=_get_float(section, "n", 0.0, where=where),
        m=_get_float(section, "m", 0.0, where=where),
        width=_get_float(section, "width", 1.0, where=where))
    grid = MomentumGrid(
        half_extent=_get_float(section, "half_extent", 8.0, where=where),
        points=_get_int(section, "grid_points", 256, where=where))
    return PacketSection(spec, grid)


def _parse_ion(parser) -> FockConfig:
    section = parser["ion"] if "ion" in parser else {}
    where = "[ion]"
    rabi_y = section.get("omega_rabi_y") if hasattr(section, "get") else None
    try:
        return FockConfig(
            n_fock=_get_int(section, "fock_n", 16, where=where),
            modes=section.get("modes", "xy") if hasattr(section, "get") else "xy",
            eta=_get_float(section, "eta", 0.05, where=where),
            rabi=_get_float(section, "omega_rabi", 1.0, where=where),
            rabi_y=float(rabi_y) if rabi_y is not None else None)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc), where) from None


def _parse_probe(parser) -> dict:
    section = parser["probe"] if "probe" in parser else {}
    where = "[probe]"
    shots_raw = section.get("shots", "exact") if hasattr(section, "get") else "exact"
    shots = None if str(shots_raw).strip().lower() in ("exact", "none", "") \
        else _get_int(section, "shots", where=where)
    return {
        "axis": section.get("axis", "y") if hasattr(section, "get") else "y",
        "k_max": _get_float(section, "k_max", 10.0, where=where),
        "dk": _get_float(section, "dk", 0.05, where=where),
        "shots": shots,
        "seed": _get_int(section, "seed", 0, where=where),
    }


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from None

    units = _parse_units(parser)
    packet = _parse_packet(parser)
    ion = _parse_ion(parser)
    probe = _parse_probe(parser)

    packets = {"packet": packet}
    for name in parser.sections():
        if name.startswith("packet.") or name.startswith("packet:"):
            packets[name] = _parse_packet(parser, name)

    tasks = []
    for name in parser.sections():
        if not name.startswith("task:"):
            continue
        section = parser[name]
        where = f"[{name}]"
        task_type = section.get("type")
        if task_type not in TASK_TYPES:
            raise ConfigError(f"type must be one of {TASK_TYPES}, got {task_type!r}", where)
        params = {k: v for k, v in section.items() if k != "type"}
        ref = params.get("packet")
        if ref is not None and ref not in packets:
            raise ConfigError(f"references missing section [{ref}]", where)
        tasks.append(TaskSpec(name[len("task:"):], task_type, params))

    run = parser["run"] if "run" in parser else {}
    output_dir = run.get("output_dir", "out") if hasattr(run, "get") else "out"
    overwrite = _get_bool(run, "overwrite", False, where="[run]") if hasattr(run, "get") else False
    if not math.isfinite(probe["k_max"]) or probe["k_max"] <= 0:
        raise ConfigError("k_max must be positive", "[probe]")
    return ExperimentConfig(units, packet, ion, probe, tuple(tasks),
                            output_dir, overwrite, packets)


def bundled_config_path(name: str) -> Path:
    """Path of a configuration shipped with the package (fig1, fig2, verify)."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    concrete = Path(str(resources.files("weylsim").joinpath("configs", name)))
    if not concrete.exists():
        raise ConfigError(f"no bundled config named {name!r}")
    return concrete

"""Experiment configuration: one TOML file, one table per tool.

Example::

    seed = 7
    device = "my_device.toml"        # optional, default: bundled 12-qubit table

    [experiment]
    n_qubits = [4, 8, 12]            # or a single int
    shots = 250000
    noise = "device"                 # "device" or "none"
    readout = "device"               # "device" or "perfect"

    [noise]                          # overrides of the device's [noise] table
    cz_phase_std_rad = 0.05

    [fluctuation]
    n_qubits = [4, 8, 12]

    [pulse]
    max_iters = 400

Any scalar can also be overridden with ``--set table.key=value``.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import readout as ro
from .errors import ValidityError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValidityError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    n_qubits: list = field(default_factory=lambda: [12])
    gate_set: str = "CZ"
    shots: int = 250_000
    noise: str = "device"
    readout: str = "device"
    bootstrap: int = 0
    delta: list = field(default_factory=lambda: [0.0, 0.0])
    fluct_trials: int = 10_000
    z: float = 0.0

    def validate(self):
        _check_sizes("experiment.n_qubits", self.n_qubits, 2, 20)
        if self.gate_set.upper() not in ("CZ", "CX"):
            raise ConfigError(f"experiment.gate_set: must be 'CZ' or 'CX' (got {self.gate_set!r})")
        self.gate_set = self.gate_set.upper()
        if not (isinstance(self.shots, int) and self.shots >= 1):
            raise ConfigError(f"experiment.shots: must be an integer >= 1 (got {self.shots!r})")
        if self.noise not in ("device", "none"):
            raise ConfigError(f"experiment.noise: must be 'device' or 'none' (got {self.noise!r})")
        if self.readout not in ("device", "perfect"):
            raise ConfigError(
                f"experiment.readout: must be 'device' or 'perfect' (got {self.readout!r})")
        if not (isinstance(self.bootstrap, int) and (self.bootstrap == 0 or self.bootstrap >= 100)):
            raise ConfigError(f"experiment.bootstrap: must be 0 or >= 100 (got {self.bootstrap!r})")
        _check_delta("experiment.delta", self.delta)
        if self.fluct_trials < 100:
            raise ConfigError(f"experiment.fluct_trials: must be >= 100 (got {self.fluct_trials})")
        if self.z < 0:
            raise ConfigError(f"experiment.z: must be >= 0 (got {self.z})")


@dataclass
class FluctuationConfig:
    n_qubits: list = field(default_factory=lambda: [4, 8, 12])
    f00: float = 0.96
    f11: float = 0.87
    delta: list = field(default_factory=lambda: [0.01, 0.01])
    trials: int = 10_000
    bins: int = 40

    def validate(self):
        _check_sizes("fluctuation.n_qubits", self.n_qubits, 2, 20)
        for name in ("f00", "f11"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ConfigError(f"fluctuation.{name}: must lie in (0, 1] (got {v})")
        _check_delta("fluctuation.delta", self.delta)
        if self.trials < 100:
            raise ConfigError(f"fluctuation.trials: must be >= 100 (got {self.trials})")
        if self.bins < 1:
            raise ConfigError(f"fluctuation.bins: must be >= 1 (got {self.bins})")


@dataclass
class PulseConfig:
    tuned_idle_ghz: float = 4.996
    tuned_op_ghz: float = 4.599
    tuned_anharm_mhz: float = -246.0
    partner_idle_ghz: float = 4.258
    partner_op_ghz: float = 4.343
    partner_anharm_mhz: float = -201.0
    coupling_mhz: float = 12.0
    plateau_ns: float = 40.0
    edge_offset_ns: float = 5.0
    dt_ns: float = 0.01
    max_iters: int = 400
    calibrate: bool = True
    qpt_shots: int = 0  # 0: exact expectations

    def validate(self):
        if self.max_iters < 1:
            raise ConfigError(f"pulse.max_iters: must be >= 1 (got {self.max_iters})")
        if not self.dt_ns > 0:
            raise ConfigError(f"pulse.dt_ns: must be positive (got {self.dt_ns})")
        if not self.plateau_ns > 0 or self.edge_offset_ns < 0:
            raise ConfigError("pulse.plateau_ns must be > 0 and pulse.edge_offset_ns >= 0")
        if self.qpt_shots < 0:
            raise ConfigError(f"pulse.qpt_shots: must be >= 0 (got {self.qpt_shots})")


@dataclass
class Config:
    seed: int | None = None
    device: str | None = None
    output_dir: str = "lcsim_out"
    format: str = "text"
    workers: int = 1
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    fluctuation: FluctuationConfig = field(default_factory=FluctuationConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    noise: dict = field(default_factory=dict)
    base_dir: Path = field(default=Path("."), repr=False)
    # "table.key" entries set by the file or by overrides
    explicit: set = field(default_factory=set, repr=False)

    def validate(self, need_seed=True):
        if need_seed and self.seed is None:
            raise ConfigError("seed: a seed is required (set 'seed' or pass --seed)")
        if self.seed is not None and not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed: must be a non-negative integer (got {self.seed!r})")
        if self.format not in ("text", "json"):
            raise ConfigError(f"format: must be 'text' or 'json' (got {self.format!r})")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError(f"workers: must be an integer >= 1 (got {self.workers!r})")
        if self.device is not None and not self.device_path().exists():
            raise ConfigError(f"device: file {self.device_path()} does not exist")
        self.experiment.validate()
        self.fluctuation.validate()
        self.pulse.validate()
        return self

    def device_path(self):
        if self.device is None:
            return ro.device_file()
        p = Path(self.device)
        return p if p.is_absolute() else self.base_dir / p

    def load_device(self):
        return ro.load_device_params(self.device_path())


def _check_sizes(label, values, lo, hi):
    if not values:
        raise ConfigError(f"{label}: needs at least one value")
    for v in values:
        if not (isinstance(v, int) and lo <= v <= hi):
            raise ConfigError(f"{label}: every entry must be an integer in [{lo}, {hi}] (got {v!r})")


def _check_delta(label, delta):
    if len(delta) != 2 or any(not (d >= 0) for d in delta):
        raise ConfigError(f"{label}: must be two non-negative numbers (got {delta!r})")


_SECTIONS = {"experiment": ExperimentConfig, "fluctuation": FluctuationConfig,
             "pulse": PulseConfig}
_TOP = ("seed", "device", "output_dir", "format", "workers")


def _fill(cls, data, label):
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"{label}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for k, v in data.items():
        if k == "n_qubits" and isinstance(v, int):
            v = [v]
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def config_from_dict(data, base_dir=Path(".")):
    data = dict(data)
    unknown = set(data) - set(_TOP) - set(_SECTIONS) - {"noise"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    cfg = Config(**{k: data[k] for k in _TOP if k in data}, base_dir=Path(base_dir))
    for name, cls in _SECTIONS.items():
        setattr(cfg, name, _fill(cls, data.get(name, {}), name))
        cfg.explicit.update(f"{name}.{k}" for k in data.get(name, {}))
    noise = data.get("noise", {})
    if not isinstance(noise, dict):
        raise ConfigError("noise: must be a table")
    cfg.noise = dict(noise)
    return cfg


def load_config(path=None):
    """Read a config file (or return defaults when ``path`` is None)."""
    if path is None:
        return Config()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    return config_from_dict(data, path.parent)


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(cfg, assignment):
    """Apply ``table.key=value`` (or ``key=value`` for top-level keys)."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, text = assignment.split("=", 1)
    value = _parse_value(text.strip())
    parts = key.strip().split(".")
    if len(parts) == 1:
        if parts[0] not in _TOP:
            raise ConfigError(f"unknown top-level key {parts[0]!r}")
        setattr(cfg, parts[0], value)
        return cfg
    if len(parts) != 2:
        raise ConfigError(f"bad override key {key!r}")
    table, name = parts
    if table == "noise":
        cfg.noise[name] = value
        return cfg
    if table not in _SECTIONS:
        raise ConfigError(f"unknown table {table!r}")
    sect = getattr(cfg, table)
    if name not in {f.name for f in dataclasses.fields(sect)}:
        raise ConfigError(f"{table}: unknown key {name!r}")
    if name == "n_qubits" and isinstance(value, int):
        value = [value]
    setattr(sect, name, value)
    cfg.explicit.add(f"{table}.{name}")
    return cfg


def pulse_settings(cfg, device):
    """Pulse settings: device ``[pulse]`` table under the config's own keys."""
    base = dict(device.sections.get("pulse", {}))
    own = {k.split(".", 1)[1] for k in cfg.explicit if k.startswith("pulse.")}
    merged = dataclasses.asdict(cfg.pulse)
    for k, v in base.items():
        if k not in merged:
            raise ConfigError(f"device [pulse] table: unknown key {k!r}")
        if k not in own:
            merged[k] = v
    out = PulseConfig(**merged)
    out.validate()
    return out


def parse_range(text):
    """``"12"``, ``"4-12"`` or ``"4,8,12"`` -> list of ints."""
    out = []
    try:
        for part in str(text).split(","):
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise ConfigError(f"cannot parse qubit list {text!r}") from exc
    return out

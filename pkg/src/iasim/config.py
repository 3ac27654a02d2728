"""Experiment configuration: defaults, INI parsing, strict validation.

The config file is a plain key/value document with five sections. Every
key is optional (defaults below); unknown sections or keys are errors so
typos never silently change an experiment.

    [system]    k, n_f, n_u
    [channel]   num_taps, max_delay, power_decay, perfect_csi,
                training_symbols, ue_channels (iid | identical)
    [noise]     snr_db, inr_db  (inr_db may be -inf for no interferer)
    [policies]  baseline (max_sinr | round_robin),
                power_constraint (per_stream | total),
                per_bs_trunk (common | random)
    [protocol]  interferer_id, beacon_snr_db, decode_threshold_db,
                miss_probability, slot_cap

Powers are expressed as ratios over a unit noise floor: es = 10^(snr_db/10)
and es_interferer = 10^(inr_db/10) with sigma2 fixed at 1.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass

from .channel import ChannelProfile, NoiseModel
from .errors import ConfigError
from .ia_core import SystemConfig
from .protocol import ProtocolConfig

UE_CHANNEL_MODES = ("iid", "identical")
BASELINES = ("max_sinr", "round_robin")
POWER_CONSTRAINTS = ("per_stream", "total")
TRUNK_MODES = ("common", "random")

SWEEP_AXES = ("snr_db", "inr_db", "num_taps", "correlation_mode")


@dataclass(frozen=True)
class SimConfig:
    """Single source of truth for one experiment."""

    # [system]
    k: int = 4
    n_f: int = 1
    n_u: int = 3
    # [channel]
    num_taps: int = 4
    max_delay: float = 3.0
    power_decay: float = 0.0
    perfect_csi: bool = False
    training_symbols: int = 1
    ue_channels: str = "iid"
    # [noise]
    snr_db: float = 10.0
    inr_db: float = 10.0
    # [policies]
    baseline: str = "max_sinr"
    power_constraint: str = "per_stream"
    per_bs_trunk: str = "common"
    # [protocol]
    interferer_id: int = 1
    beacon_snr_db: float = 20.0
    decode_threshold_db: float = 3.0
    miss_probability: float = 0.0
    slot_cap: int = 10_000

    def __post_init__(self):
        if self.ue_channels not in UE_CHANNEL_MODES:
            raise ConfigError(f"ue_channels must be one of {UE_CHANNEL_MODES}")
        if self.baseline not in BASELINES:
            raise ConfigError(f"baseline must be one of {BASELINES}")
        if self.power_constraint not in POWER_CONSTRAINTS:
            raise ConfigError(f"power_constraint must be one of {POWER_CONSTRAINTS}")
        if self.per_bs_trunk not in TRUNK_MODES:
            raise ConfigError(f"per_bs_trunk must be one of {TRUNK_MODES}")
        if self.training_symbols < 1:
            raise ConfigError("training_symbols must be >= 1")
        if not 0.0 <= self.miss_probability < 1.0:
            raise ConfigError("miss_probability must be in [0, 1)")
        if math.isinf(self.snr_db):
            raise ConfigError("snr_db must be finite")
        try:
            self.system()
            self.profile()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def sigma2(self) -> float:
        return 1.0

    @property
    def es(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def es_interferer(self) -> float:
        if self.inr_db == -math.inf:
            return 0.0
        return 10.0 ** (self.inr_db / 10.0)

    def system(self) -> SystemConfig:
        return SystemConfig(k=self.k, n_f=self.n_f, n_u=self.n_u, es=self.es,
                            sigma2=self.sigma2)

    def profile(self) -> ChannelProfile:
        return ChannelProfile(num_taps=self.num_taps, max_delay=self.max_delay,
                              power_decay=self.power_decay)

    def noise(self) -> NoiseModel:
        return NoiseModel(sigma2=self.sigma2)

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(interferer_id=self.interferer_id,
                              decode_threshold=self.decode_threshold_db, n_u=self.n_u)


_SCHEMA: dict[str, dict[str, type]] = {
    "system": {"k": int, "n_f": int, "n_u": int},
    "channel": {
        "num_taps": int,
        "max_delay": float,
        "power_decay": float,
        "perfect_csi": bool,
        "training_symbols": int,
        "ue_channels": str,
    },
    "noise": {"snr_db": float, "inr_db": float},
    "policies": {"baseline": str, "power_constraint": str, "per_bs_trunk": str},
    "protocol": {
        "interferer_id": int,
        "beacon_snr_db": float,
        "decode_threshold_db": float,
        "miss_probability": float,
        "slot_cap": int,
    },
}

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


def _convert(section: str, key: str, raw: str, kind: type):
    raw = raw.strip()
    try:
        if kind is bool:
            if raw.lower() not in _BOOL_WORDS:
                raise ValueError(f"not a boolean: {raw!r}")
            return _BOOL_WORDS[raw.lower()]
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)  # accepts -inf
        return raw
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def parse_config(text: str) -> SimConfig:
    """Parse an INI document into a SimConfig; unknown content is an error."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values: dict[str, object] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp[section].items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = _convert(section, key, raw, _SCHEMA[section][key])
    return SimConfig(**values)


def load_config(path: str) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def config_to_text(cfg: SimConfig) -> str:
    """Render a SimConfig back into its INI form (all keys explicit)."""
    out = []
    for section, keys in _SCHEMA.items():
        out.append(f"[{section}]")
        for key in keys:
            value = getattr(cfg, key)
            if isinstance(value, bool):
                value = "true" if value else "false"
            out.append(f"{key} = {value}")
        out.append("")
    return "\n".join(out)


def with_axis_value(cfg: SimConfig, axis: str, value) -> SimConfig:
    """Derived config for one sweep point."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if axis == "correlation_mode":
        if value not in UE_CHANNEL_MODES:
            raise ConfigError(f"correlation_mode value must be one of {UE_CHANNEL_MODES}")
        return dataclasses.replace(cfg, ue_channels=value)
    if axis == "num_taps":
        return dataclasses.replace(cfg, num_taps=int(value))
    return dataclasses.replace(cfg, **{axis: float(value)})


def parse_axis_values(axis: str, text: str) -> list:
    """Parse the CLI's comma-separated sweep values with axis-appropriate types."""
    items = [v.strip() for v in text.split(",") if v.strip()]
    if not items:
        raise ConfigError("empty sweep value list")
    if axis == "correlation_mode":
        return items
    if axis == "num_taps":
        try:
            return [int(v) for v in items]
        except ValueError as exc:
            raise ConfigError(f"num_taps values must be integers: {exc}") from exc
    try:
        return [float(v) for v in items]
    except ValueError as exc:
        raise ConfigError(f"{axis} values must be numbers: {exc}") from exc

"""Strict JSON run configuration and the built-in figure presets."""

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from finitekey.model import ChannelModel, DeltaVariant, ProtocolConfig, SecurityBudget
from finitekey.rates import MethodId


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    num: int

    def values(self, log=False):
        if log:
            return tuple(np.logspace(math.log10(self.start), math.log10(self.stop), self.num))
        return tuple(np.linspace(self.start, self.stop, self.num))


@dataclass(frozen=True)
class RunConfig:
    block_size: float = 1e5
    asymptotic: bool = False
    estimation_fraction: float = None
    qber: float = 0.03
    gamma: float = 1.0
    attenuation_db_per_km: float = 0.2
    distance_km: float = 10.0
    eps_pe: float = 1e-10
    eps_ec: float = 1e-10
    eps_h: float = 1e-10
    eps_s: float = 1e-10
    delta_variant: str = "main"
    methods: tuple = ("FME", "AEP", "EUR")
    sweep_n: GridSpec = field(default_factory=lambda: GridSpec(1e4, 1e10, 60))
    sweep_qber: GridSpec = field(default_factory=lambda: GridSpec(0.0, 0.15, 100))
    verify_qbers: tuple = tuple(round(0.01 * k, 2) for k in range(26))
    grid_resolution: int = 2000
    out: str = None

    @property
    def method_ids(self):
        return tuple(MethodId(m) for m in self.methods)

    def protocol(self, qber=None) -> ProtocolConfig:
        """ProtocolConfig for this run; f defaults to 0.5 as a placeholder when optimized."""
        f = self.estimation_fraction if self.estimation_fraction is not None else 0.5
        return ProtocolConfig(
            block_size=math.inf if self.asymptotic else self.block_size,
            estimation_fraction=f,
            observed_qber=self.qber if qber is None else qber,
            reconciliation_gamma=self.gamma,
            channel=ChannelModel(self.attenuation_db_per_km, self.distance_km),
            budget=SecurityBudget(self.eps_pe, self.eps_ec, self.eps_h, self.eps_s),
            delta_variant=DeltaVariant(self.delta_variant),
        )

    def to_dict(self):
        return asdict(self)


PRESETS = {
    # rate-vs-N at 3% QBER; block_size is the point used by `rate`/`threshold`
    "fig1": {"qber": 0.03, "block_size": 1e8, "distance_km": 10.0},
    # rate-vs-N at 6% QBER
    "fig2": {"qber": 0.06, "block_size": 1e5, "distance_km": 10.0},
    # rate-vs-QBER at N = 1e5
    "fig3": {"block_size": 1e5, "distance_km": 10.0},
    # rate-vs-QBER in the asymptotic regime
    "fig4": {"asymptotic": True, "distance_km": 10.0},
}

_KEYS = {f.name for f in fields(RunConfig)}
_GRID_KEYS = {"start", "stop", "num"}
_PROBS = ("eps_pe", "eps_ec", "eps_h", "eps_s")


def _number(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {value!r}")
    return float(value)


def _grid(name, value):
    if isinstance(value, GridSpec):
        return value
    if not isinstance(value, dict):
        raise ConfigError(name, "expected an object with start, stop, num")
    unknown = set(value) - _GRID_KEYS
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    missing = _GRID_KEYS - set(value)
    if missing:
        raise ConfigError(f"{name}.{sorted(missing)[0]}", "missing key")
    start = _number(f"{name}.start", value["start"])
    stop = _number(f"{name}.stop", value["stop"])
    num = value["num"]
    if isinstance(num, bool) or not isinstance(num, int) or num < 1:
        raise ConfigError(f"{name}.num", f"expected a positive integer, got {num!r}")
    if num > 1 and not stop > start:
        raise ConfigError(f"{name}.stop", "must exceed start")
    return GridSpec(start, stop, num)


def build_config(data: dict) -> RunConfig:
    """Validate a mapping of config keys and build a RunConfig.

    Raises:
        ConfigError: on unknown keys or invalid values.
    """
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    vals = {}
    for key, value in data.items():
        if key in ("sweep_n", "sweep_qber"):
            vals[key] = _grid(key, value)
        elif key == "asymptotic":
            if not isinstance(value, bool):
                raise ConfigError(key, f"expected true/false, got {value!r}")
            vals[key] = value
        elif key == "methods":
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(key, "expected a non-empty list of FME/AEP/EUR")
            try:
                vals[key] = tuple(MethodId(m).value for m in value)
            except ValueError:
                raise ConfigError(key, f"unknown method in {value!r}") from None
        elif key == "delta_variant":
            try:
                vals[key] = DeltaVariant(value).value
            except ValueError:
                raise ConfigError(key, "expected 'main' or 'appendix'") from None
        elif key == "verify_qbers":
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(key, "expected a non-empty list of QBER values")
            vals[key] = tuple(_number(key, v) for v in value)
        elif key == "grid_resolution":
            if isinstance(value, bool) or not isinstance(value, int) or value < 100:
                raise ConfigError(key, f"expected an integer >= 100, got {value!r}")
            vals[key] = value
        elif key == "out":
            if value is not None and not isinstance(value, str):
                raise ConfigError(key, "expected a path string")
            vals[key] = value
        elif key == "estimation_fraction" and value is None:
            vals[key] = None
        else:
            vals[key] = _number(key, value)

    cfg = RunConfig(**vals)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    for name in _PROBS:
        if not 0 < getattr(cfg, name) < 1:
            raise ConfigError(name, f"must lie in (0, 1), got {getattr(cfg, name)!r}")
    if not 0 <= cfg.qber <= 0.5:
        raise ConfigError("qber", f"must lie in [0, 0.5], got {cfg.qber!r}")
    if not cfg.block_size > 0:
        raise ConfigError("block_size", f"must be positive, got {cfg.block_size!r}")
    if cfg.estimation_fraction is not None and not 0 < cfg.estimation_fraction < 1:
        raise ConfigError("estimation_fraction",
                          f"must lie in (0, 1), got {cfg.estimation_fraction!r}")
    if not cfg.gamma >= 1:
        raise ConfigError("gamma", f"must be >= 1, got {cfg.gamma!r}")
    if not cfg.attenuation_db_per_km >= 0:
        raise ConfigError("attenuation_db_per_km", "must be >= 0")
    if not cfg.distance_km >= 0:
        raise ConfigError("distance_km", "must be >= 0")
    if any(not 0 <= q <= 0.5 for q in cfg.verify_qbers):
        raise ConfigError("verify_qbers", "values must lie in [0, 0.5]")
    if cfg.sweep_n.start <= 0:
        raise ConfigError("sweep_n.start", "must be positive")
    if cfg.sweep_qber.start < 0 or cfg.sweep_qber.stop > 0.5:
        raise ConfigError("sweep_qber", "QBER grid must lie in [0, 0.5]")
    try:
        cfg.protocol()
    except ValueError as exc:
        raise ConfigError("block_size", str(exc)) from None


def load_config(path=None, preset=None, overrides=None) -> RunConfig:
    """Merge defaults, a named preset, a JSON file and flag overrides, in that order."""
    data = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}")
        data.update(PRESETS[preset])
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"malformed JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        data.update(loaded)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(data)

"""Physical and statistical primitives shared by every key-rate bound.

Channel loss, binary entropy, QBER estimation and the parameter-estimation
confidence interval live here, together with the small configuration types
that the rate and optimization modules consume.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_ATTENUATION_DB_PER_KM = 0.2
DEFAULT_EPSILON = 1e-10


class DeltaVariant(str, enum.Enum):
    """Which Hoeffding-type confidence width to use for the QBER."""

    MAIN_TEXT = "main"
    APPENDIX = "appendix"


def _check_probability(name, value, *, closed=False):
    lo_ok = value >= 0 if closed else value > 0
    hi_ok = value <= 1 if closed else value < 1
    if not (lo_ok and hi_ok):
        interval = "[0, 1]" if closed else "(0, 1)"
        raise ValueError(f"{name} must lie in {interval}, got {value!r}")


@dataclass(frozen=True)
class ChannelModel:
    """Fiber link described by its attenuation (dB/km) and length (km)."""

    attenuation_db_per_km: float = DEFAULT_ATTENUATION_DB_PER_KM
    distance_km: float = 0.0

    def __post_init__(self):
        if not self.attenuation_db_per_km >= 0:
            raise ValueError(
                f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km!r}")
        if not self.distance_km >= 0 or math.isinf(self.distance_km):
            raise ValueError(f"distance_km must be finite and >= 0, got {self.distance_km!r}")

    @property
    def eta(self) -> float:
        return transmittance(self)


@dataclass(frozen=True)
class SecurityBudget:
    """Failure probabilities of parameter estimation, error correction,
    hashing and smoothing."""

    eps_pe: float = DEFAULT_EPSILON
    eps_ec: float = DEFAULT_EPSILON
    eps_h: float = DEFAULT_EPSILON
    eps_s: float = DEFAULT_EPSILON

    def __post_init__(self):
        for name in ("eps_pe", "eps_ec", "eps_h", "eps_s"):
            _check_probability(name, getattr(self, name))

    @classmethod
    def uniform(cls, eps: float) -> "SecurityBudget":
        return cls(eps, eps, eps, eps)


@dataclass(frozen=True)
class EstimationOutcome:
    sample_size: float
    empirical_qber: float
    delta: float

    @property
    def effective_qber(self) -> float:
        return self.empirical_qber + self.delta

    @property
    def feasible(self) -> bool:
        # entropies are only meaningful for an effective QBER up to 1/2
        return self.effective_qber <= 0.5


@dataclass(frozen=True)
class ProtocolConfig:
    """One BB84 run: block size N, estimation fraction f, observed QBER,
    reconciliation inefficiency gamma, channel and security budget.

    ``block_size`` may be ``math.inf`` to denote the asymptotic regime.
    """

    block_size: float
    estimation_fraction: float
    observed_qber: float
    reconciliation_gamma: float = 1.0
    channel: ChannelModel = field(default_factory=ChannelModel)
    budget: SecurityBudget = field(default_factory=SecurityBudget)
    delta_variant: DeltaVariant = DeltaVariant.MAIN_TEXT

    def __post_init__(self):
        if not self.block_size > 0:
            raise ValueError(f"block_size must be positive, got {self.block_size!r}")
        if not 0 < self.estimation_fraction < 1:
            raise ValueError(
                f"estimation_fraction must lie in (0, 1), got {self.estimation_fraction!r}")
        if not 0 <= self.observed_qber <= 0.5:
            raise ValueError(f"observed_qber must lie in [0, 1/2], got {self.observed_qber!r}")
        if not self.reconciliation_gamma >= 1:
            raise ValueError(
                f"reconciliation_gamma must be >= 1, got {self.reconciliation_gamma!r}")
        object.__setattr__(self, "delta_variant", DeltaVariant(self.delta_variant))
        if self.sample_size < 1:
            raise ValueError(
                f"eta*f*N = {self.sample_size:.6g} < 1: no parameter-estimation samples")

    @property
    def eta(self) -> float:
        return self.channel.eta

    @property
    def sample_size(self) -> float:
        """Number of detected signals disclosed for estimation, m = eta f N."""
        return self.eta * self.estimation_fraction * self.block_size

    @property
    def key_signals(self) -> float:
        """Signals left for key generation, n = eta (1 - f) N."""
        return self.eta * (1 - self.estimation_fraction) * self.block_size

    def estimate(self) -> EstimationOutcome:
        """Confidence-adjusted QBER for this configuration."""
        m = self.sample_size
        delta = 0.0 if math.isinf(m) else hoeffding_delta(
            m, self.budget.eps_pe, self.delta_variant)
        return EstimationOutcome(m, self.observed_qber, delta)


def transmittance(channel: ChannelModel) -> float:
    """Fraction of signals surviving the fiber, 10^(-a d / 10)."""
    return 10.0 ** (-channel.attenuation_db_per_km * channel.distance_km / 10.0)


def binary_entropy(p):
    """Binary Shannon entropy in bits.

    Accepts scalars or arrays; the endpoints p = 0 and p = 1 return exactly 0.

    Raises:
        ValueError: if any entry lies outside [0, 1].
    """
    x = np.asarray(p, dtype=float)
    if np.any(np.isnan(x)) or np.any((x < 0) | (x > 1)):
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p!r}")
    inner = (x > 0) & (x < 1)
    safe = np.where(inner, x, 0.5)
    h = np.where(inner, -safe * np.log2(safe) - (1 - safe) * np.log2(1 - safe), 0.0)
    return float(h) if h.ndim == 0 else h


def qber_estimate(error_count: int, sample_size: float) -> float:
    if sample_size <= 0:
        raise ValueError(f"sample_size must be positive, got {sample_size!r}")
    if error_count < 0 or error_count > sample_size:
        raise ValueError(f"error_count must lie in [0, {sample_size}], got {error_count!r}")
    return error_count / sample_size


def hoeffding_delta(sample_size: float, eps_pe: float,
                    variant: DeltaVariant = DeltaVariant.MAIN_TEXT) -> float:
    """Width delta such that QBER > estimate + delta has probability <= eps_pe.

    The main-text choice is sqrt(ln(1/eps)/m); the Hoeffding appendix choice
    is sqrt(ln(1/eps)/(2m)).
    """
    if not sample_size > 0:
        raise ValueError(f"sample_size must be positive, got {sample_size!r}")
    if not 0 < eps_pe < 1:
        raise ValueError(f"eps_pe must lie in (0, 1), got {eps_pe!r}")
    variant = DeltaVariant(variant)
    denom = sample_size if variant is DeltaVariant.MAIN_TEXT else 2 * sample_size
    return math.sqrt(math.log(1 / eps_pe) / denom)

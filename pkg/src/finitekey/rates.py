"""Finite-size secret-key rates for BB84 under collective attacks.

Three bounds are provided, all per transmitted signal:

* FME: min-entropy from Eve's guessing probability;
* AEP: von Neumann entropy minus a Delta(eps_s)/sqrt(N) correction;
* EUR: uncertainty-relation bound, no sqrt(N) entropy penalty.

Each is evaluated at the confidence-adjusted QBER ``observed + delta`` and
carries the leftover-hash penalty ``(2/N) log2(sqrt(2) eps_h)``.
"""

import enum
import math
from dataclasses import dataclass

from finitekey.guessing import pg_closed_form
from finitekey.model import ProtocolConfig, SecurityBudget, binary_entropy

AEP_PREFACTOR = 4 * math.log2(2 + math.sqrt(2))


class MethodId(str, enum.Enum):
    FME = "FME"
    AEP = "AEP"
    EUR = "EUR"


METHODS = (MethodId.FME, MethodId.AEP, MethodId.EUR)


@dataclass(frozen=True)
class RatePoint:
    """One evaluated bound.

    Infeasible points (effective QBER above 1/2) have ``feasible=False``,
    a NaN raw rate and NaN leakage; their clamped rate is 0.
    """

    method: MethodId
    raw_rate: float
    effective_qber: float
    delta: float
    leak_per_signal: float
    epsilon_total: float
    n_key: float
    feasible: bool = True

    @property
    def clamped_rate(self) -> float:
        return max(self.raw_rate, 0.0) if self.feasible else 0.0


def epsilon_total(method, budget: SecurityBudget) -> float:
    method = MethodId(method)
    total = budget.eps_h + budget.eps_ec + budget.eps_pe
    if method is not MethodId.FME:
        if not budget.eps_s > 0:
            raise ValueError(f"{method.value} needs a positive smoothing parameter eps_s")
        total += budget.eps_s
    if total >= 1:
        raise ValueError(f"total failure probability {total!r} for {method.value} is not < 1")
    return total


def ec_leakage(cfg: ProtocolConfig, effective_qber: float) -> float:
    """Bits disclosed by error correction, gamma * eta (1-f) N * h2(q)."""
    if not 0 <= effective_qber <= 0.5:
        raise ValueError(f"effective_qber must lie in [0, 1/2], got {effective_qber!r}")
    return cfg.reconciliation_gamma * cfg.key_signals * binary_entropy(effective_qber)


def delta_aep(eps_s: float) -> float:
    """AEP correction 4 log2(2+sqrt2) sqrt(log2(2/eps_s^2)).

    Defined for 0 < eps_s <= sqrt(2); only (0, 1) is meaningful security-wise.
    """
    if not 0 < eps_s <= math.sqrt(2):
        raise ValueError(f"eps_s must lie in (0, sqrt(2)], got {eps_s!r}")
    return AEP_PREFACTOR * math.sqrt(max(math.log2(2 / eps_s ** 2), 0.0))


def privacy_amplification_penalty(block_size: float, eps_h: float) -> float:
    """(2/N) log2(sqrt(2) eps_h); negative for eps_h < 1/sqrt(2)."""
    if math.isinf(block_size):
        return 0.0
    return 2 / block_size * math.log2(math.sqrt(2) * eps_h)


def aep_penalty(cfg: ProtocolConfig) -> float:
    """sqrt(eta (1-f) / N) * Delta(eps_s), per transmitted signal."""
    if math.isinf(cfg.block_size):
        return 0.0
    frac = cfg.eta * (1 - cfg.estimation_fraction)
    return math.sqrt(frac / cfg.block_size) * delta_aep(cfg.budget.eps_s)


def _entropy_term(method, q):
    # per-detected-signal bits before leakage
    if method is MethodId.FME:
        return -math.log2(pg_closed_form(q))
    return 1 - binary_entropy(q)


def raw_rate(method, cfg: ProtocolConfig) -> float:
    """The bare rate expression, without the failure-budget precondition.

    Useful for limit checks where the epsilons are pushed past a valid
    budget. Returns NaN when the effective QBER exceeds 1/2.
    """
    method = MethodId(method)
    est = cfg.estimate()
    if not est.feasible:
        return math.nan
    q = est.effective_qber
    frac = cfg.eta * (1 - cfg.estimation_fraction)
    raw = frac * (_entropy_term(method, q) - cfg.reconciliation_gamma * binary_entropy(q))
    raw += privacy_amplification_penalty(cfg.block_size, cfg.budget.eps_h)
    if method is MethodId.AEP:
        raw -= aep_penalty(cfg)
    return raw


def rate(method, cfg: ProtocolConfig) -> RatePoint:
    """Evaluate one finite-size bound on ``cfg``."""
    method = MethodId(method)
    est = cfg.estimate()
    q = est.effective_qber
    eps = epsilon_total(method, cfg.budget)
    n_key = cfg.key_signals
    if not est.feasible:
        return RatePoint(method, math.nan, q, est.delta, math.nan, eps, n_key, feasible=False)
    leak = cfg.reconciliation_gamma * cfg.eta * (1 - cfg.estimation_fraction) * binary_entropy(q)
    return RatePoint(method, raw_rate(method, cfg), q, est.delta, leak, eps, n_key)


def rate_fme(cfg: ProtocolConfig) -> RatePoint:
    return rate(MethodId.FME, cfg)


def rate_aep(cfg: ProtocolConfig) -> RatePoint:
    return rate(MethodId.AEP, cfg)


def rate_eur(cfg: ProtocolConfig) -> RatePoint:
    return rate(MethodId.EUR, cfg)


def rate_asymptotic(method, p: float, eta: float, gamma: float = 1.0) -> float:
    """N -> infinity limit (f -> 0, delta -> 0, no hashing penalty)."""
    method = MethodId(method)
    if not 0 <= p <= 0.5:
        raise ValueError(f"QBER must lie in [0, 1/2], got {p!r}")
    return eta * (_entropy_term(method, p) - gamma * binary_entropy(p))


def asymptotic_point(method, cfg: ProtocolConfig) -> RatePoint:
    """RatePoint for the asymptotic regime at the observed QBER of ``cfg``."""
    method = MethodId(method)
    p = cfg.observed_qber
    raw = rate_asymptotic(method, p, cfg.eta, cfg.reconciliation_gamma)
    leak = cfg.reconciliation_gamma * cfg.eta * binary_entropy(p)
    return RatePoint(method, raw, p, 0.0, leak, epsilon_total(method, cfg.budget), math.inf)

"""Composable finite-size key rates for entanglement-based BB84.

Compares three proof techniques under collective attacks (finite-size
min-entropy, asymptotic equipartition, entropic uncertainty) and checks
the analytic guessing probability against brute-force fidelity maximization.
"""

__version__ = "0.1.0"

from finitekey.guessing import (
    BellDiagonalState, FidelityCertificate, ansatz_fidelity, bell_to_matrix,
    build_certificate, pg_closed_form, pinch_z, pinched_ansatz, restricted_pg_oracle,
    stationary_s, uhlmann_fidelity, verify_certificate,
)
from finitekey.model import (
    ChannelModel, DeltaVariant, ProtocolConfig, SecurityBudget, binary_entropy,
    hoeffding_delta, qber_estimate, transmittance,
)
from finitekey.optimize import (
    ASYMPTOTIC, Axis, SweepSpec, crossover_window, optimize_f, qber_threshold, sweep,
)
from finitekey.rates import (
    METHODS, MethodId, RatePoint, delta_aep, ec_leakage, epsilon_total, rate, rate_aep,
    rate_asymptotic, rate_eur, rate_fme, raw_rate,
)

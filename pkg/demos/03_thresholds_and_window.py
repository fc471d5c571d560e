"""Tolerable QBER per method, and where FME overtakes AEP.

The threshold is the largest QBER that still yields a positive rate once
the estimation fraction is optimized. We print it for a 1e5-signal block
and in the asymptotic limit, then scan for a range of block sizes where
FME beats AEP at 6% QBER.
"""

from finitekey import ChannelModel, ProtocolConfig, SecurityBudget
from finitekey.optimize import ASYMPTOTIC, NoKeyError, crossover_window, qber_threshold

channel = ChannelModel(0.2, 10)
budget = SecurityBudget.uniform(1e-10)

for n in (1e5, 1e6, ASYMPTOTIC):
    template = ProtocolConfig(n, 0.5, 0.0, channel=channel, budget=budget)
    parts = []
    for method in ("FME", "AEP", "EUR"):
        try:
            parts.append(f"{method} {qber_threshold(method, template).threshold_qber:.4f}")
        except NoKeyError:
            parts.append(f"{method} no key")
    print(f"N = {n:g}: " + ", ".join(parts))

template = ProtocolConfig(1e5, 0.5, 0.06, channel=channel, budget=budget)
window = crossover_window(template, (1e4, 1e7), points=60)
if window is None:
    print("\nAt 6% QBER FME never beats AEP for N in [1e4, 1e7].")
else:
    print(f"\nAt 6% QBER FME beats AEP for N in [{window[0]:.3g}, {window[1]:.3g}].")

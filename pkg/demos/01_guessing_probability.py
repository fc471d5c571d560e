"""Eve's guessing probability for a symmetric BB84 channel.

For a QBER p the optimal Bell-diagonal state is ((1-p)^2, p(1-p), p(1-p), p^2)
and her guessing probability is P_g = 1/2 + sqrt(p(1-p)). This script
compares the closed form against two numerical routes: the one-parameter
pinched ansatz and a brute-force fidelity search over the whole family of
Bell-diagonal states with the right QBER.
"""

import numpy as np

from finitekey.guessing import ansatz_max, pg_closed_form, restricted_pg_oracle

print("p      closed form   ansatz max    brute force   argmax s   1-p")
for p in np.linspace(0.0, 0.25, 6):
    s, ansatz = ansatz_max(p)
    oracle = restricted_pg_oracle(p, grid_resolution=400)
    print(f"{p:.2f}   {pg_closed_form(p):.8f}    {ansatz:.8f}    {oracle.pg:.8f}    "
          f"{oracle.s:.4f}     {1 - p:.4f}")

# The maximizing state puts weight p^2 on the fourth Bell state.
p = 0.1
oracle = restricted_pg_oracle(p, grid_resolution=400)
print(f"\nat p={p}: oracle p3 = {oracle.p3:.5f}, p^2 = {p * p:.5f}")
print("state weights:", np.round(oracle.state.weights, 5))

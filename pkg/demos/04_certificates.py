"""Checkable certificates for the Uhlmann fidelity.

The fidelity F(rho, tau) is the maximum of Re Tr X over matrices X making
[[rho, X], [X^dag, tau]] positive semidefinite. A witness X with that
property is a certificate: anyone can check the block matrix and the
objective without trusting the solver. Scaling the witness up breaks it.
"""

from dataclasses import replace

from finitekey.guessing import (
    BellDiagonalState, build_certificate, pinched_ansatz, verify_certificate,
)

for p in (0.0, 0.03, 0.11, 0.5):
    rho = BellDiagonalState.optimal(p).to_matrix()
    cert = build_certificate(rho, pinched_ansatz(1 - p))
    v = verify_certificate(cert)
    print(f"p={p:<5} objective {v.objective:.9f}  F^2 {v.objective ** 2:.9f}  "
          f"min eig {v.min_block_eigenvalue:+.1e}  {'PASS' if v.passed else 'FAIL'}")

cert = build_certificate(BellDiagonalState.optimal(0.03).to_matrix(), pinched_ansatz(0.97))
bad = verify_certificate(replace(cert, witness=1.01 * cert.witness))
print(f"\nwitness scaled by 1.01: min eig {bad.min_block_eigenvalue:+.2e}, "
      f"{'PASS' if bad.passed else 'FAIL'}")

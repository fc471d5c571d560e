"""Eve's guessing probability on Bob's Z outcome for symmetric-QBER BB84.

Three routes to the same number:

* the closed form ``1/2 + sqrt(p (1 - p))``;
* the one-parameter fidelity ansatz, maximized over ``s``;
* a brute-force maximization of ``F(rho, Z(sigma))**2`` over Bell-diagonal
  states compatible with the observed QBERs, with the fidelity evaluated on
  explicit 4x4 matrices.

Fidelity certificates (the block-matrix witness ``X``) give an independent
soundness check of any fidelity value.

All matrices act on the two-qubit space ordered as (00, 01, 10, 11), with the
first qubit belonging to Alice and the second to Bob.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg

from finitekey.search import golden_section_max

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
PSD_REJECT = 1e-8
# eigenvalues below this fraction of the largest are roundoff; their square roots are not
SPECTRAL_FLOOR = 1e-14
BLOCK_PSD_ATOL = 1e-9
OBJECTIVE_ATOL = 1e-8

_S2 = 1 / math.sqrt(2)
BELL_VECTORS = np.array([
    [_S2, 0, 0, _S2],    # Phi+
    [_S2, 0, 0, -_S2],   # Phi-
    [0, _S2, _S2, 0],    # Psi+
    [0, _S2, -_S2, 0],   # Psi-
])

Z_ERROR_PROJECTOR = np.diag([0.0, 1.0, 1.0, 0.0])
_PLUS = np.array([1.0, 1.0]) * _S2
_MINUS = np.array([1.0, -1.0]) * _S2
X_ERROR_PROJECTOR = (np.outer(np.kron(_PLUS, _MINUS), np.kron(_PLUS, _MINUS))
                     + np.outer(np.kron(_MINUS, _PLUS), np.kron(_MINUS, _PLUS)))


class CertificateError(RuntimeError):
    """A fidelity certificate could not be built within tolerance."""


def _check_qber(p):
    if not 0 <= p <= 0.5:
        raise ValueError(f"QBER must lie in [0, 1/2], got {p!r}")


@dataclass(frozen=True)
class BellDiagonalState:
    """Weights of Phi+, Phi-, Psi+, Psi- in a Bell-diagonal two-qubit state."""

    p0: float
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        weights = self.weights
        if np.any(weights < -HERMITIAN_ATOL):
            raise ValueError(f"Bell weights must be nonnegative, got {tuple(weights)}")
        if abs(weights.sum() - 1) > TRACE_ATOL:
            raise ValueError(f"Bell weights must sum to 1, got {weights.sum()!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3], dtype=float)

    @property
    def z_error_rate(self) -> float:
        return self.p2 + self.p3

    @property
    def x_error_rate(self) -> float:
        return self.p1 + self.p3

    @classmethod
    def with_symmetric_qber(cls, p: float, p3: float) -> "BellDiagonalState":
        """Member of the one-parameter family with Z and X error rates both p."""
        _check_qber(p)
        lo, hi = max(0.0, 2 * p - 1), p
        if not lo - HERMITIAN_ATOL <= p3 <= hi + HERMITIAN_ATOL:
            raise ValueError(f"p3 must lie in [{lo}, {hi}] for QBER {p}, got {p3!r}")
        p3 = min(max(p3, lo), hi)
        return cls(1 - 2 * p + p3, p - p3, p - p3, p3)

    @classmethod
    def optimal(cls, p: float) -> "BellDiagonalState":
        """Eve's optimal state at symmetric QBER p (independent bit and phase flips)."""
        return cls.with_symmetric_qber(p, p * p)

    def to_matrix(self) -> np.ndarray:
        return bell_to_matrix(self)


def bell_to_matrix(state: BellDiagonalState) -> np.ndarray:
    return np.einsum("k,ki,kj->ij", state.weights, BELL_VECTORS, BELL_VECTORS).astype(complex)


def check_density_matrix(rho, name="rho") -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"{name} must be 4x4, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=HERMITIAN_ATOL, rtol=0):
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(rho).real - 1) > TRACE_ATOL:
        raise ValueError(f"{name} has trace {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_REJECT:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def qber_z(rho) -> float:
    return float(np.trace(Z_ERROR_PROJECTOR @ rho).real)


def qber_x(rho) -> float:
    return float(np.trace(X_ERROR_PROJECTOR @ rho).real)


def reduced_state_a(rho) -> np.ndarray:
    """Partial trace over Bob."""
    return np.einsum("ajbj->ab", np.asarray(rho).reshape(2, 2, 2, 2))


def reduced_state_b(rho) -> np.ndarray:
    """Partial trace over Alice."""
    return np.einsum("iaib->ab", np.asarray(rho).reshape(2, 2, 2, 2))


def pinch_z(sigma) -> np.ndarray:
    """Erase coherences between Bob's Z outcomes: Z0 sigma Z0 + Z1 sigma Z1."""
    sigma = np.asarray(sigma)
    bob = np.arange(4) % 2
    return np.where(bob[:, None] == bob[None, :], sigma, 0)


def pinched_ansatz(s: float) -> np.ndarray:
    """Pinching of a Bell-diagonal sigma with weight s on the Phi subspace.

    Weight s/2 sits on |00> and |11>, (1 - s)/2 on |01> and |10>.
    """
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    return 0.5 * np.diag([s, 1 - s, 1 - s, s]).astype(complex)


def pg_closed_form(p: float) -> float:
    _check_qber(p)
    return 0.5 + math.sqrt(p * (1 - p))


def ansatz_fidelity(p: float, s: float) -> float:
    _check_qber(p)
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    cross = math.sqrt((1 - p) * p)
    return _S2 * (cross * math.sqrt(1 - s) + p * math.sqrt(1 - s)
                  + (1 - p) * math.sqrt(s) + cross * math.sqrt(s))


def stationary_s(p: float) -> float:
    """Maximizer of ``ansatz_fidelity(p, .)``; dF/ds = 0 at s = 1 - p."""
    _check_qber(p)
    return 1 - p


def ansatz_max(p: float, tol: float = 1e-12):
    """Golden-section maximum of the squared ansatz fidelity over s.

    Returns:
        (s, F(p, s)**2)
    """
    s, f = golden_section_max(lambda s: ansatz_fidelity(p, s), 0.0, 1.0, tol=tol)
    return s, f * f


def _clean_spectrum(w):
    top = np.max(np.abs(w), axis=-1, keepdims=True)
    return np.where(w > SPECTRAL_FLOOR * top, w, 0.0)


def psd_sqrt(m) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    if w.min() < -PSD_REJECT:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3g})")
    return (v * np.sqrt(_clean_spectrum(w))) @ v.conj().T


def uhlmann_fidelity(rho, tau) -> float:
    """Tr sqrt(sqrt(rho) tau sqrt(rho)) via Hermitian eigendecompositions."""
    rho = check_density_matrix(rho, "rho")
    tau = check_density_matrix(tau, "tau")
    root = psd_sqrt(rho)
    w = np.linalg.eigvalsh(root @ tau @ root)
    return float(np.sqrt(_clean_spectrum(w)).sum())


def _components(pattern):
    """Connected components of a symmetric boolean adjacency pattern."""
    n = len(pattern)
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.flatnonzero(pattern[i] & ~seen):
                seen[j] = True
                stack.append(j)
        comps.append(sorted(comp))
    return comps


def trace_sqrt_psd_batch(mats) -> np.ndarray:
    """Tr sqrt(M) for a stack of Hermitian PSD matrices of shape (k, d, d).

    The stack is split into the irreducible blocks of its joint sparsity
    pattern; 1x1 and 2x2 blocks use closed forms, larger ones eigvalsh.
    """
    mats = np.asarray(mats)
    pattern = np.any(np.abs(mats) > 1e-14, axis=0)
    pattern = pattern | pattern.T
    total = np.zeros(mats.shape[0])
    for comp in _components(pattern):
        blk = mats[:, comp][:, :, comp]
        if len(comp) == 1:
            total += np.sqrt(np.clip(blk[:, 0, 0].real, 0, None))
        elif len(comp) == 2:
            tr = (blk[:, 0, 0] + blk[:, 1, 1]).real
            det = (blk[:, 0, 0] * blk[:, 1, 1] - blk[:, 0, 1] * blk[:, 1, 0]).real
            # det ~ product of eigenvalues, so the floor scales with tr**2
            det = np.where(det > SPECTRAL_FLOOR * tr * tr, det, 0.0)
            # Tr sqrt(M) = sqrt(tr + 2 sqrt(det)) for a 2x2 PSD M
            total += np.sqrt(np.clip(tr + 2 * np.sqrt(det), 0, None))
        else:
            total += np.sqrt(_clean_spectrum(np.linalg.eigvalsh(blk))).sum(axis=1)
    return total


@dataclass(frozen=True)
class OracleResult:
    pg: float
    p3: float
    s: float
    tau_diagonal: tuple
    state: BellDiagonalState


def _simplex_lattice(k):
    pts = [(a, b, c, k - a - b - c)
           for a, b, c in product(range(k + 1), repeat=3) if a + b + c <= k]
    return np.array(pts, dtype=float) / k


def restricted_pg_oracle(p: float, grid_resolution: int = 2000, *,
                         extended: bool = False, refine: bool = True) -> OracleResult:
    """Brute-force max of F(rho, Z(sigma))**2 over Bell-diagonal rho with
    Z and X error rates equal to p.

    The default search uses the pinched Bell-diagonal ansatz for Z(sigma)
    (one parameter s) on a uniform ``grid_resolution`` x ``grid_resolution``
    grid in (p3, s), followed by one coordinate-wise golden-section pass
    around the best cell. With ``extended=True`` Z(sigma) ranges over all
    diagonal states on a simplex lattice (resolution capped at 40 per axis);
    ``s`` is then reported as NaN.
    """
    _check_qber(p)
    if grid_resolution < 100:
        raise ValueError(f"grid_resolution must be >= 100, got {grid_resolution!r}")
    lo, hi = max(0.0, 2 * p - 1), p

    if extended:
        k = min(grid_resolution, 40)
        taus = _simplex_lattice(k)
        p3_grid = np.unique(np.linspace(lo, hi, k + 1))
    else:
        s_grid = np.linspace(0.0, 1.0, grid_resolution)
        taus = 0.5 * np.stack([s_grid, 1 - s_grid, 1 - s_grid, s_grid], axis=1)
        p3_grid = np.unique(np.linspace(lo, hi, grid_resolution))

    weights = np.stack([1 - 2 * p + p3_grid, p - p3_grid, p - p3_grid, p3_grid], axis=1)
    rhos = np.einsum("pk,ki,kj->pij", weights, BELL_VECTORS, BELL_VECTORS)
    w, v = np.linalg.eigh(rhos)
    roots = np.einsum("pik,pk,pjk->pij", v, np.sqrt(_clean_spectrum(w)), v)
    # sqrt(rho) diag(t) sqrt(rho) = sum_k t_k c_k c_k^T over the columns c_k of sqrt(rho)
    outers = np.einsum("pik,pjk->pkij", roots, roots)

    best_f, best_i, best_j = -1.0, 0, 0
    chunk = max(1, 200_000 // len(taus))
    for start in range(0, len(p3_grid), chunk):
        block = outers[start:start + chunk]
        mats = np.einsum("sk,pkij->psij", taus, block)
        fid = trace_sqrt_psd_batch(mats.reshape(-1, 4, 4)).reshape(len(block), len(taus))
        # row-major argmax breaks ties toward the smallest (p3, s)
        i, j = np.unravel_index(int(np.argmax(fid)), fid.shape)
        if fid[i, j] > best_f:
            best_f, best_i, best_j = float(fid[i, j]), start + int(i), int(j)

    p3_best = float(p3_grid[best_i])
    tau_best = taus[best_j]
    if extended:
        state = BellDiagonalState.with_symmetric_qber(p, p3_best)
        return OracleResult(best_f ** 2, p3_best, math.nan, tuple(map(float, tau_best)), state)

    s_best = float(s_grid[best_j])
    if refine:
        def fid_at(p3, s):
            rho = BellDiagonalState.with_symmetric_qber(p, p3).to_matrix()
            return uhlmann_fidelity(rho, pinched_ansatz(s))

        ds = 1.0 / (grid_resolution - 1)
        s_ref, f_ref = golden_section_max(
            lambda s: fid_at(p3_best, s), max(0.0, s_best - ds), min(1.0, s_best + ds), tol=1e-12)
        p3_ref = p3_best
        if len(p3_grid) > 1:
            dp = p3_grid[1] - p3_grid[0]
            p3_ref, f_ref = golden_section_max(
                lambda t: fid_at(t, s_ref), max(lo, p3_best - dp), min(hi, p3_best + dp),
                tol=1e-12)
        if f_ref > best_f:
            best_f, p3_best, s_best = f_ref, float(p3_ref), float(s_ref)

    state = BellDiagonalState.with_symmetric_qber(p, p3_best)
    diag = (s_best / 2, (1 - s_best) / 2, (1 - s_best) / 2, s_best / 2)
    return OracleResult(best_f ** 2, p3_best, s_best, diag, state)


@dataclass(frozen=True)
class FidelityCertificate:
    """Witness X for the block-matrix characterization of F(rho, tau)."""

    rho: np.ndarray
    tau: np.ndarray
    witness: np.ndarray
    objective: float
    min_block_eigenvalue: float


@dataclass(frozen=True)
class CertificateVerdict:
    passed: bool
    min_block_eigenvalue: float
    objective: float
    fidelity: float

    @property
    def objective_gap(self) -> float:
        return self.objective - self.fidelity


def block_matrix(rho, tau, witness) -> np.ndarray:
    return np.block([[rho, witness], [witness.conj().T, tau]])


def build_certificate(rho, tau) -> FidelityCertificate:
    """Optimal witness X = sqrt(rho) W^dagger sqrt(tau), where W is the unitary
    polar factor of sqrt(tau) sqrt(rho).

    Raises:
        CertificateError: if the block matrix is not PSD to tolerance or the
            objective misses the fidelity by more than OBJECTIVE_ATOL.
    """
    rho = check_density_matrix(rho, "rho")
    tau = check_density_matrix(tau, "tau")
    root_rho, root_tau = psd_sqrt(rho), psd_sqrt(tau)
    unitary, _ = scipy.linalg.polar(root_tau @ root_rho)
    witness = root_rho @ unitary.conj().T @ root_tau
    objective = float(np.trace(witness).real)
    min_eig = float(np.linalg.eigvalsh(block_matrix(rho, tau, witness)).min())
    if min_eig < -BLOCK_PSD_ATOL:
        raise CertificateError(f"block matrix has eigenvalue {min_eig:.3g}")
    fid = uhlmann_fidelity(rho, tau)
    if abs(objective - fid) > OBJECTIVE_ATOL:
        raise CertificateError(f"objective {objective!r} differs from fidelity {fid!r}")
    return FidelityCertificate(rho, tau, witness, objective, min_eig)


def verify_certificate(cert: FidelityCertificate) -> CertificateVerdict:
    """Recompute block positivity and the objective from scratch."""
    rho, tau, witness = (np.asarray(m, dtype=complex) for m in (cert.rho, cert.tau, cert.witness))
    if not rho.shape == tau.shape == witness.shape == (4, 4):
        raise ValueError(
            f"dimension mismatch: rho {rho.shape}, tau {tau.shape}, witness {witness.shape}")
    min_eig = float(np.linalg.eigvalsh(block_matrix(rho, tau, witness)).min())
    objective = float(np.trace(witness).real)
    fid = uhlmann_fidelity(rho, tau)
    passed = min_eig >= -BLOCK_PSD_ATOL and objective <= fid + OBJECTIVE_ATOL
    return CertificateVerdict(passed, min_eig, objective, fid)

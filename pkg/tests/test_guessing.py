import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finitekey.guessing import (
    BELL_VECTORS, BellDiagonalState, CertificateError, ansatz_fidelity, ansatz_max,
    bell_to_matrix, build_certificate, pg_closed_form, pinch_z, pinched_ansatz, qber_x,
    qber_z, reduced_state_a, reduced_state_b, restricted_pg_oracle, stationary_s,
    trace_sqrt_psd_batch, uhlmann_fidelity, verify_certificate,
)
from finitekey.search import golden_section_max

# 30-digit mpmath values
PG_003 = 0.67058722109231980803379478538
F_003 = 0.818893900998364871833251150161

QBERS = tuple(round(0.01 * k, 2) for k in range(26))


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pure(vec):
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


class TestClosedForm:
    def test_endpoints(self):
        assert pg_closed_form(0) == 0.5
        assert pg_closed_form(0.5) == 1.0

    def test_three_percent(self):
        assert pg_closed_form(0.03) == pytest.approx(PG_003, abs=1e-15)

    def test_rejects_above_half(self):
        with pytest.raises(ValueError):
            pg_closed_form(0.51)

    def test_strictly_increasing(self):
        vals = [pg_closed_form(p) for p in np.linspace(0, 0.5, 501)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_min_entropy_of_noiseless_channel(self):
        assert -math.log2(pg_closed_form(0)) == 1


class TestAnsatz:
    @pytest.mark.parametrize("p", [0.0, 0.01, 0.07, 0.2, 0.5])
    def test_stationary_value(self, p):
        assert ansatz_fidelity(p, 1 - p) == pytest.approx(
            math.sqrt(0.5 + math.sqrt(p * (1 - p))), abs=1e-14)

    def test_noiseless(self):
        assert ansatz_fidelity(0, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_three_percent(self):
        assert ansatz_fidelity(0.03, 0.97) == pytest.approx(F_003, abs=1e-14)

    @pytest.mark.parametrize("p,expected", [(0, 1), (0.5, 0.5), (0.1, 0.9)])
    def test_stationary_s(self, p, expected):
        assert stationary_s(p) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.4, 0.5])
    def test_stationary_s_matches_golden_section(self, p):
        s, _ = golden_section_max(lambda s: ansatz_fidelity(p, s), 0, 1, tol=1e-12)
        assert s == pytest.approx(stationary_s(p), abs=1e-6)

    def test_max_over_s_matches_closed_form(self):
        for p in np.linspace(0, 0.25, 200):
            _, pg = ansatz_max(p)
            assert abs(pg - pg_closed_form(p)) <= 1e-6


class TestMatrices:
    def test_phi_plus(self):
        rho = bell_to_matrix(BellDiagonalState(1, 0, 0, 0))
        np.testing.assert_allclose(rho, pure([1, 0, 0, 1]), atol=1e-15)

    def test_maximally_mixed(self):
        rho = bell_to_matrix(BellDiagonalState(0.25, 0.25, 0.25, 0.25))
        np.testing.assert_allclose(rho, np.eye(4) / 4, atol=1e-15)

    @given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda w: sum(w) > 1e-3))
    def test_marginals_and_error_rates(self, w):
        w = np.array(w) / sum(w)
        state = BellDiagonalState(*w)
        rho = state.to_matrix()
        np.testing.assert_allclose(reduced_state_a(rho), np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(reduced_state_b(rho), np.eye(2) / 2, atol=1e-12)
        assert qber_z(rho) == pytest.approx(state.z_error_rate, abs=1e-12)
        assert qber_x(rho) == pytest.approx(state.x_error_rate, abs=1e-12)

    def test_block_structure(self):
        p0, p1, p2, p3 = 0.5, 0.2, 0.2, 0.1
        rho = bell_to_matrix(BellDiagonalState(p0, p1, p2, p3)).real
        assert rho[0, 0] == pytest.approx((p0 + p1) / 2)
        assert rho[0, 3] == pytest.approx((p0 - p1) / 2)
        assert rho[1, 1] == pytest.approx((p2 + p3) / 2)
        assert rho[1, 2] == pytest.approx((p2 - p3) / 2)
        assert rho[0, 1] == rho[0, 2] == 0

    def test_optimal_state_is_feasible(self):
        for p in QBERS:
            s = BellDiagonalState.optimal(p)
            assert s.z_error_rate == pytest.approx(p)
            assert s.x_error_rate == pytest.approx(p)

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            BellDiagonalState(0.5, 0.5, 0.5, -0.5)
        with pytest.raises(ValueError):
            BellDiagonalState(0.5, 0.2, 0.2, 0.2)

    def test_bell_vectors_orthonormal(self):
        np.testing.assert_allclose(BELL_VECTORS @ BELL_VECTORS.T, np.eye(4), atol=1e-15)


class TestPinching:
    def test_diagonal_fixed(self):
        sigma = np.diag([0.1, 0.2, 0.3, 0.4])
        np.testing.assert_array_equal(pinch_z(sigma), sigma)

    def test_phi_plus_loses_coherence(self):
        out = pinch_z(pure([1, 0, 0, 1]))
        np.testing.assert_allclose(out, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)

    def test_bell_diagonal_sigma(self):
        q = np.array([0.4, 0.3, 0.2, 0.1])
        sigma = bell_to_matrix(BellDiagonalState(*q))
        np.testing.assert_allclose(pinch_z(sigma), pinched_ansatz(q[0] + q[1]), atol=1e-15)

    @settings(max_examples=50)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_idempotent_and_trace_preserving(self, seed):
        sigma = random_density(np.random.default_rng(seed))
        once = pinch_z(sigma)
        np.testing.assert_array_equal(pinch_z(once), once)
        assert np.trace(once) == pytest.approx(np.trace(sigma), abs=1e-14)


class TestFidelity:
    @settings(max_examples=50)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
    def test_self_fidelity(self, seed, rank):
        rho = random_density(np.random.default_rng(seed), rank)
        assert uhlmann_fidelity(rho, rho) == pytest.approx(1, abs=1e-7)

    @settings(max_examples=50)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        rho, tau = random_density(rng), random_density(rng)
        assert uhlmann_fidelity(rho, tau) == pytest.approx(uhlmann_fidelity(tau, rho), abs=1e-10)

    def test_full_rank_self_fidelity_is_tight(self):
        rho = random_density(np.random.default_rng(7))
        assert uhlmann_fidelity(rho, rho) == pytest.approx(1, abs=1e-12)

    def test_orthogonal_pure_states(self):
        assert uhlmann_fidelity(pure([1, 0, 0, 0]), pure([0, 1, 0, 0])) == pytest.approx(0, abs=1e-12)

    def test_rejects_non_psd(self):
        bad = np.diag([0.6, 0.6, -0.1, -0.1])
        with pytest.raises(ValueError):
            uhlmann_fidelity(bad, np.eye(4) / 4)

    def test_optimal_pair_three_percent(self):
        rho = BellDiagonalState.optimal(0.03).to_matrix()
        f = uhlmann_fidelity(rho, pinched_ansatz(0.97))
        assert f == pytest.approx(F_003, abs=1e-12)
        assert f == pytest.approx(math.sqrt(pg_closed_form(0.03)), abs=1e-12)

    def test_matrix_engine_reproduces_ansatz(self):
        for p in np.linspace(0, 0.5, 11):
            rho = BellDiagonalState.optimal(p).to_matrix()
            for s in np.linspace(0, 1, 21):
                assert uhlmann_fidelity(rho, pinched_ansatz(s)) == pytest.approx(
                    ansatz_fidelity(p, s), abs=1e-9)

    def test_batched_trace_sqrt_matches_eigvalsh(self):
        rng = np.random.default_rng(3)
        dense = np.stack([random_density(rng) for _ in range(20)])
        blocky = np.stack([bell_to_matrix(BellDiagonalState(*w))
                           for w in rng.dirichlet(np.ones(4), size=20)])
        for mats in (dense, blocky):
            ref = [np.sqrt(np.clip(np.linalg.eigvalsh(m), 0, None)).sum() for m in mats]
            np.testing.assert_allclose(trace_sqrt_psd_batch(mats), ref, atol=1e-12)


class TestOracle:
    def test_noiseless(self):
        res = restricted_pg_oracle(0.0, 200)
        assert res.pg == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(res.state.to_matrix(), pure([1, 0, 0, 1]), atol=1e-15)

    def test_three_percent_coarse(self):
        res = restricted_pg_oracle(0.03, 200)
        assert res.pg == pytest.approx(PG_003, abs=1e-4)
        assert res.s == pytest.approx(0.97, abs=1 / 199)

    def test_agrees_with_closed_form(self, oracle_table):
        for p, res in oracle_table.items():
            assert abs(res.pg - pg_closed_form(p)) <= 1e-4

    def test_maximizer(self, oracle_table):
        for p, res in oracle_table.items():
            assert abs(res.s - (1 - p)) <= 1 / 1999
            assert res.p3 == pytest.approx(p * p, abs=p / 1999 + 1e-12)

    def test_extended_diagonal_search(self):
        res = restricted_pg_oracle(0.1, 100, extended=True)
        assert res.pg == pytest.approx(pg_closed_form(0.1), abs=1e-4)
        assert math.isnan(res.s)

    def test_rejects(self):
        with pytest.raises(ValueError):
            restricted_pg_oracle(0.6, 200)
        with pytest.raises(ValueError):
            restricted_pg_oracle(0.1, 99)

    def test_deterministic(self):
        a = restricted_pg_oracle(0.05, 300)
        b = restricted_pg_oracle(0.05, 300)
        assert (a.pg, a.p3, a.s) == (b.pg, b.p3, b.s)


class TestCertificate:
    def test_maximally_mixed(self):
        cert = build_certificate(np.eye(4) / 4, np.eye(4) / 4)
        np.testing.assert_allclose(cert.witness, np.eye(4) / 4, atol=1e-12)
        assert cert.objective == pytest.approx(1, abs=1e-12)
        assert verify_certificate(cert).passed

    def test_orthogonal_pure_states(self):
        cert = build_certificate(pure([1, 0, 0, 0]), pure([0, 0, 1, 0]))
        assert cert.objective == pytest.approx(0, abs=1e-12)
        assert verify_certificate(cert).passed

    def test_optimal_pair(self):
        rho = BellDiagonalState.optimal(0.03).to_matrix()
        cert = build_certificate(rho, pinched_ansatz(0.97))
        assert cert.objective == pytest.approx(F_003, abs=1e-8)
        assert cert.min_block_eigenvalue >= -1e-9

    @settings(max_examples=30)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.integers(1, 4))
    def test_random_pairs(self, seed, r1, r2):
        rng = np.random.default_rng(seed)
        rho, tau = random_density(rng, r1), random_density(rng, r2)
        cert = build_certificate(rho, tau)
        verdict = verify_certificate(cert)
        assert verdict.passed
        assert abs(verdict.objective_gap) <= 1e-8

    def test_scaled_witness_fails(self):
        rho = BellDiagonalState.optimal(0.03).to_matrix()
        cert = build_certificate(rho, pinched_ansatz(0.97))
        verdict = verify_certificate(replace(cert, witness=2 * cert.witness))
        assert not verdict.passed
        assert verdict.min_block_eigenvalue < -1e-3

    def test_zero_witness_passes(self):
        rho = BellDiagonalState.optimal(0.03).to_matrix()
        cert = build_certificate(rho, pinched_ansatz(0.97))
        verdict = verify_certificate(replace(cert, witness=np.zeros((4, 4))))
        assert verdict.passed
        assert verdict.objective == 0

    def test_dimension_mismatch(self):
        cert = build_certificate(np.eye(4) / 4, np.eye(4) / 4)
        with pytest.raises(ValueError):
            verify_certificate(replace(cert, witness=np.zeros((2, 2))))

    def test_certificate_error_type(self):
        assert issubclass(CertificateError, RuntimeError)

import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from relayopt.channel import ChannelEstimate, HopErrorModel, SystemDims
from relayopt.design import (
    alternating_power_allocation,
    assemble_design,
    design_naive,
    design_robust,
    eta_scaling,
    per_stream_objective,
    waterfill_f_given_p,
    waterfill_p_given_f,
    whiten_hop,
)
from relayopt.errors import NonPositiveDenominator
from relayopt.harness import brute_force_power_oracle, random_matrix_oracle
from relayopt.mse import LinkStats, compute_k1, compute_k2, compute_rx, relay_power

from conftest import crandn, random_psd, random_stats, scalar_stats


def stream_obj(p2, f2, lsr, lrd):
    a, b = p2 * lsr**2, f2 * lrd**2
    return np.log((a + b + 1) / ((a + 1) * (b + 1)))


class TestWhitenHop:
    def test_no_error(self, rng):
        h = crandn(rng, 4, 3)
        w = whiten_hop(ChannelEstimate(h, HopErrorModel(np.eye(3), 0.0, 0.25)), 1.0)
        np.testing.assert_allclose(w.lam, np.linalg.svd(h, compute_uv=False) / 0.5, rtol=1e-12)

    def test_identity_psi(self, rng):
        h = crandn(rng, 3, 3)
        w = whiten_hop(ChannelEstimate(h, HopErrorModel(np.eye(3), 0.5, 0.25)), 2.0)
        expected = np.linalg.svd(h, compute_uv=False) / np.sqrt(0.5 * 2.0 + 0.25)
        np.testing.assert_allclose(w.lam, expected, rtol=1e-12)

    def test_reconstruction(self, rng):
        h = crandn(rng, 4, 5)
        est = ChannelEstimate(h, HopErrorModel(random_psd(rng, 5) / 5, 1.0, 0.1))
        w = whiten_hop(est, 1.0)
        lam = np.zeros((4, 5))
        lam[:4, :4] = np.diag(w.lam)
        assert np.linalg.norm(w.u @ lam @ w.v.conj().T - h @ w.whitener) < 1e-9
        assert np.all(np.diff(w.lam) <= 0)


class TestScalarWaterfill:
    def test_single_stream(self):
        f2, mu = waterfill_f_given_p([2.0], [1.0], [1.0], 3.0)
        assert f2[0] == pytest.approx(3.0)

    def test_symmetric(self):
        f2, _ = waterfill_f_given_p([1.0, 1.0], [1.5, 1.5], [0.7, 0.7], 2.0)
        np.testing.assert_allclose(f2, [1.0, 1.0])
        p2, _ = waterfill_p_given_f([1.0, 1.0], [1.5, 1.5], [0.7, 0.7], 2.0)
        np.testing.assert_allclose(p2, [1.0, 1.0])

    def test_f_matches_grid(self):
        # frozen from a 2e6-point grid over f1^2 in [0, 2]
        f2, _ = waterfill_f_given_p([1.0, 1.0], [2.0, 1.0], [1.0, 2.0], 2.0)
        assert f2[0] == pytest.approx(1.390037, abs=1e-4)

    def test_p_matches_grid(self):
        # frozen from a 2e6-point grid over p1^2 in [0, 2] with f2 = (1, 1)
        p2, _ = waterfill_p_given_f([1.0, 1.0], [2.0, 1.0], [1.0, 2.0], 2.0)
        assert p2[0] == pytest.approx(0.609963, abs=1e-4)

    def test_all_dead_warns(self):
        with pytest.warns(RuntimeWarning):
            f2, mu = waterfill_f_given_p([0.0, 0.0], [1.0, 1.0], [1.0, 1.0], 1.0)
        np.testing.assert_array_equal(f2, 0)


class TestPerStreamObjective:
    def test_zero_relay_power(self):
        assert per_stream_objective(1.0, 0.0, 2.0, 3.0) == 0.0

    def test_zero_source_power(self):
        assert per_stream_objective(0.0, 1.0, 2.0, 3.0) == 0.0

    def test_unit_snrs(self):
        assert per_stream_objective(1.0, 4.0, 1.0, 0.5) == pytest.approx(np.log(0.75), abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 10), st.floats(0, 10))
    def test_nonpositive(self, p2, f2, a, b):
        assert per_stream_objective(p2, f2, a, b) <= 0.0


class TestAlternating:
    def test_single_stream(self):
        a = alternating_power_allocation([1.3], [0.4], 2.0, 3.0)
        assert a.n_iter == 1 and a.status == "converged"
        assert a.p2[0] == pytest.approx(2.0) and a.f2[0] == pytest.approx(3.0)

    def test_symmetric_fixed_point(self):
        a = alternating_power_allocation([1.0] * 3, [2.0] * 3, 3.0, 1.5)
        np.testing.assert_allclose(a.p2, 1.0)
        np.testing.assert_allclose(a.f2, 0.5)

    def test_two_stream_grid(self, rng):
        for _ in range(20):
            lsr = np.sort(rng.exponential(size=2) * 10 ** rng.uniform(-1, 1.5))[::-1]
            lrd = np.sort(rng.exponential(size=2) * 10 ** rng.uniform(-1, 1.5))[::-1]
            a = alternating_power_allocation(lsr, lrd, 1.0, 1.0)
            *_, best = brute_force_power_oracle(lsr, lrd, 1.0, 1.0, grid_points=100)
            assert a.objective_nats <= best + 1e-4

    def test_zero_gain_streams_pinned(self):
        a = alternating_power_allocation([2.0, 1.0, 0.0], [1.0, 0.0, 3.0], 1.0, 1.0)
        np.testing.assert_array_equal(a.p2[1:], 0)
        np.testing.assert_array_equal(a.f2[1:], 0)

    def test_all_dead(self):
        with pytest.warns(RuntimeWarning):
            a = alternating_power_allocation([0.0, 0.0], [1.0, 1.0], 1.0, 1.0)
        assert a.status == "dead"

    def test_trace_monotone_and_power_active(self, rng):
        for _ in range(50):
            n = 4
            lsr = np.sort(rng.exponential(size=n))[::-1] * 5
            lrd = np.sort(rng.exponential(size=n))[::-1] * 5
            a = alternating_power_allocation(lsr, lrd, 1.0, 2.0)
            assert np.all(np.diff(a.trace) <= 1e-9)
            assert a.p2.sum() == pytest.approx(1.0, rel=1e-8)
            assert a.f2.sum() == pytest.approx(2.0, rel=1e-8)
            assert a.objective_nats == pytest.approx(np.sum(stream_obj(a.p2, a.f2, lsr, lrd)), abs=1e-12)

    def test_multistart_never_worse(self, rng):
        for _ in range(20):
            lsr = rng.exponential(size=4) * 3
            lrd = rng.exponential(size=4) * 3
            single = alternating_power_allocation(lsr, lrd, 1.0, 1.0)
            multi = alternating_power_allocation(lsr, lrd, 1.0, 1.0, multistart=5, seed=1)
            assert multi.objective_nats <= single.objective_nats + 1e-12


class TestEta:
    def test_no_error(self, rng):
        v = unitary_group.rvs(3, random_state=1)
        assert eta_scaling(v, np.eye(3), 0.0, 1.0, 0.3, [0.5, 0.3, 0.2]) == pytest.approx(0.3)

    def test_identity_psi_saturated(self):
        # Psi = I and sum(lambda^2) = budget: eta must equal alpha*budget + sigma2
        alpha, budget, sigma2 = 0.8, 2.0, 0.1
        v = unitary_group.rvs(3, random_state=2)
        eta = eta_scaling(v, np.eye(3), alpha, budget, sigma2, [1.2, 0.5, 0.3])
        assert eta == pytest.approx(alpha * budget + sigma2, rel=1e-12)

    def test_fixed_point_random_psi(self, rng):
        for _ in range(20):
            psi = random_psd(rng, 4) / 4
            alpha, budget, sigma2 = 1.0, 1.0, 10 ** rng.uniform(-3, 0)
            lam2 = rng.dirichlet(np.ones(3)) * budget
            v = unitary_group.rvs(4, random_state=rng.integers(1 << 30))[:, :3]
            eta = eta_scaling(v, psi, alpha, budget, sigma2, lam2)
            w = np.linalg.inv(np.linalg.cholesky(alpha * budget * psi + sigma2 * np.eye(4)).conj().T)
            # any square root of the inverse works for the trace identity only if Hermitian;
            # build the Hermitian one explicitly
            ev, u = np.linalg.eigh(alpha * budget * psi + sigma2 * np.eye(4))
            w = (u / np.sqrt(ev)) @ u.conj().T
            x = np.sqrt(eta) * w @ (v * np.sqrt(lam2))
            assert eta == pytest.approx(alpha * np.trace(x @ x.conj().T @ psi).real + sigma2, rel=1e-8)
            assert np.trace(x @ x.conj().T).real == pytest.approx(budget, rel=1e-8)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.0, 10.0), budget=st.floats(0.01, 100.0),
           sigma2=st.floats(1e-4, 10.0), fill=st.floats(0.0, 1.0))
    def test_denominator_positive_within_budget(self, seed, alpha, budget, sigma2, fill):
        rng = np.random.default_rng(seed)
        psi = random_psd(rng, 4)
        lam2 = rng.dirichlet(np.ones(4)) * budget * fill
        v = unitary_group.rvs(4, random_state=seed % (1 << 30))
        assert eta_scaling(v, psi, alpha, budget, sigma2, lam2) > 0

    def test_over_budget_rejected(self):
        with pytest.raises(NonPositiveDenominator):
            eta_scaling(np.eye(2), np.eye(2), 1.0, 1.0, 1e-3, [50.0, 50.0])


def check_design(d, stats, tol=1e-8):
    e1, e2 = stats.hop1.error, stats.hop2.error
    P, Ft = d.P, d.F_tilde
    a = d.allocation
    assert np.trace(P @ P.conj().T).real == pytest.approx(stats.p_s, rel=tol)
    assert relay_power(P, d.F, stats) == pytest.approx(stats.p_r, rel=tol)
    w1 = e1.alpha * stats.p_s * e1.psi + e1.sigma2 * np.eye(e1.size)
    w2 = e2.alpha * stats.p_r * e2.psi + e2.sigma2 * np.eye(e2.size)
    assert np.trace(P @ P.conj().T @ w1).real / a.eta_p == pytest.approx(stats.p_s, rel=tol)
    assert np.trace(Ft @ Ft.conj().T @ w2).real / a.eta_f == pytest.approx(stats.p_r, rel=tol)
    assert compute_k1(P, stats.hop1)[0, 0].real == pytest.approx(a.eta_p, rel=tol)
    k2 = compute_k2(d.F, compute_rx(P, stats.hop1), stats.hop2)
    assert k2[0, 0].real == pytest.approx(a.eta_f, rel=tol)


class TestAssemble:
    def test_no_error_structure(self, rng):
        stats = random_stats(rng, alpha=0.0)
        d = design_robust(stats)
        w1 = whiten_hop(stats.hop1, 1.0)
        o = d.stream_order
        expected = w1.v[:, o] * np.sqrt(d.allocation.p2[o])
        np.testing.assert_allclose(d.P, expected, atol=1e-12)
        assert np.trace(d.P @ d.P.conj().T).real == pytest.approx(1.0, rel=1e-12)

    def test_scalar_closed_form(self):
        h1, h2, s1, s2, ps, pr, alpha, psi = 0.8, 1.4, 0.1, 0.3, 2.0, 1.5, 0.5, 0.2
        stats = scalar_stats(h1, h2, s1, s2, ps, pr, alpha, psi)
        d = design_robust(stats)
        a = ps * h1**2 / (alpha * ps * psi + s1)
        b = pr * h2**2 / (alpha * pr * psi + s2)
        assert d.rate_bits == pytest.approx(np.log2((a + 1) * (b + 1) / (a + b + 1)), rel=1e-12)
        check_design(d, stats)

    def test_random_constraints(self, rng):
        for _ in range(10):
            stats = random_stats(rng, snr_db=rng.uniform(0, 30), snr_est_db=rng.uniform(0, 20),
                                 random_psi=bool(rng.integers(2)))
            d = design_robust(stats)
            check_design(d, stats, tol=1e-7)
            assert d.rate_bits == pytest.approx(-d.allocation.objective_nats / np.log(2), rel=1e-7)
            w1 = whiten_hop(stats.hop1, 1.0)
            w2 = whiten_hop(stats.hop2, 1.0)
            o = d.stream_order
            g1 = d.allocation.p2[o] * w1.lam[o] ** 2
            g2 = d.allocation.f2[o] * w2.lam[o] ** 2
            assert np.all(np.diff(g1) <= 1e-12) and np.all(np.diff(g2) <= 1e-12)

    def test_v1_is_free(self, rng):
        stats = random_stats(rng, snr_est_db=5.0)
        base = design_robust(stats)
        for k in range(3):
            v1 = unitary_group.rvs(4, random_state=k)
            assert design_robust(stats, v1=v1).rate_bits == pytest.approx(base.rate_bits, abs=1e-10)


class TestDesigns:
    def test_single_stream(self, rng):
        dims = SystemDims(3, 2, 2, 3, 1)
        stats = random_stats(rng, dims, snr_db=5.0, snr_est_db=8.0)
        d = design_robust(stats)
        w1, w2 = whiten_hop(stats.hop1, 1.0), whiten_hop(stats.hop2, 1.0)
        a, b = w1.lam[0] ** 2, w2.lam[0] ** 2
        assert d.rate_bits == pytest.approx(np.log2((a + 1) * (b + 1) / (a + b + 1)), rel=1e-10)

    def test_beats_random_search_small(self, rng):
        stats = random_stats(rng, SystemDims(2, 2, 2, 2, 2))
        d = design_robust(stats)
        assert random_matrix_oracle(stats, 20_000, seed=3) <= d.rate_bits + 1e-6

    def test_naive_equals_robust_without_errors(self, rng):
        stats = random_stats(rng, alpha=0.0)
        assert design_naive(stats).rate_bits == pytest.approx(design_robust(stats).rate_bits, abs=1e-9)

    def test_naive_scalar_matches_closed_form(self):
        # one stream leaves no design freedom: with the relay rescaled to its true
        # budget the naive design coincides with the robust closed form
        h1, h2, s1, s2, alpha, psi = 0.8, 1.4, 0.1, 0.3, 0.5, 0.2
        stats = scalar_stats(h1, h2, s1, s2, 1.0, 1.0, alpha, psi)
        a = h1**2 / (alpha * psi + s1)
        b = h2**2 / (alpha * psi + s2)
        expected = np.log2((a + 1) * (b + 1) / (a + b + 1))
        assert design_naive(stats).rate_bits == pytest.approx(expected, rel=1e-12)
        unscaled = design_naive(stats, rescale_relay=False)
        assert relay_power(unscaled.P, unscaled.F, stats) > 1.0

    def test_naive_not_better_under_errors(self, rng):
        for _ in range(20):
            stats = random_stats(rng, snr_db=20.0, snr_est_db=5.0)
            assert design_naive(stats).rate_bits <= design_robust(stats).rate_bits + 1e-9

    def test_support_bounded_by_rank(self, rng):
        dims = SystemDims()
        h1 = crandn(rng, 4, 2) @ crandn(rng, 2, 4)
        stats = random_stats(rng, dims, snr_db=30.0)
        stats = LinkStats(ChannelEstimate(h1, stats.hop1.error), stats.hop2, dims)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            d = design_robust(stats)
        assert np.count_nonzero(d.allocation.p2 > 1e-12) <= 2
        assert np.count_nonzero(d.allocation.f2 > 1e-12) <= 2
        check_design(d, stats)

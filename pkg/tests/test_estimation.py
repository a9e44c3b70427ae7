"""Pilot power control, assignment, LMMSE states and empirical NMSE."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ris_cellfree import estimation as est
from ris_cellfree import scenario as sc
from ris_cellfree.geometry import LargeScaleFading


def test_fractional_power_hand_values():
    delta = np.array([[1.0, 1.0], [1.0, 0.0]])
    powers = est.fractional_pilot_power(delta, p_p=1.5)
    np.testing.assert_allclose(powers, [2.0, 1.0], rtol=1e-15)


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.float64, (3, 4),
                  elements=st.floats(min_value=1e-3, max_value=1e3)),
       st.floats(min_value=0.05, max_value=20.0))
def test_fractional_power_budget_and_scale_invariance(delta, p_p):
    powers = est.fractional_pilot_power(delta, p_p)
    assert powers.sum() == pytest.approx(4 * p_p, rel=1e-9)
    assert np.all(powers > 0)
    scaled = est.fractional_pilot_power(3.7 * delta, p_p)
    np.testing.assert_allclose(scaled, powers, rtol=1e-9)


def test_fractional_power_rejects_bad_inputs():
    good = np.ones((2, 2))
    with pytest.raises(ValueError):
        est.fractional_pilot_power(good, p_p=0.0)
    with pytest.raises(ValueError):
        est.fractional_pilot_power(-good, p_p=1.0)
    with pytest.raises(ValueError):
        est.fractional_pilot_power(np.array([[1.0, 0.0], [1.0, 0.0]]), p_p=1.0)


def test_assign_pilots_head_block_and_orthogonal_case():
    delta = np.ones((2, 3))
    snr = np.ones(3)
    np.testing.assert_array_equal(est.assign_pilots(delta, snr, tau_p=3),
                                  [0, 1, 2])
    np.testing.assert_array_equal(est.assign_pilots(delta, snr, tau_p=5),
                                  [0, 1, 2])
    assignment = est.PilotAssignment(5, est.assign_pilots(delta, snr, 5), snr)
    np.testing.assert_array_equal(assignment.same_pilot, np.eye(3, dtype=bool))


def test_assign_pilots_tie_breaks_low():
    delta = np.ones((1, 3))
    pilots = est.assign_pilots(delta, np.ones(3), tau_p=2)
    assert pilots[2] == 0


def test_assign_pilots_matches_bruteforce():
    rng = np.random.default_rng(7)
    for _ in range(5):
        delta = np.exp(rng.uniform(-2, 2, (5, 9)))
        snr = np.exp(rng.uniform(-1, 1, 9))
        tau = 3
        pilots = est.assign_pilots(delta, snr, tau)
        # replay the documented rule independently
        prime = np.argmax(delta, axis=0)
        expect = list(range(tau))
        for k in range(tau, 9):
            load = np.zeros(tau)
            for i, p in enumerate(expect):
                load[p] += snr[i] * delta[prime[k], i]
            expect.append(int(np.argmin(load)))
        np.testing.assert_array_equal(pilots, expect)


def test_assign_pilots_validation():
    with pytest.raises(ValueError):
        est.assign_pilots(np.ones((2, 3)), np.ones(3), tau_p=0)
    with pytest.raises(ValueError):
        est.assign_pilots(np.ones((2, 3)), np.ones(2), tau_p=2)


def test_scalar_lmmse_reduction():
    # one AP, one user, no panels: textbook scalar MMSE
    fading = LargeScaleFading(direct=np.array([[2.0]]),
                              ap_ris=np.zeros((1, 0)),
                              user_ris=np.zeros((1, 0)))
    state = est.two_phase_state(fading, [], tau_p=2, rho_p=3.0,
                                power_control="equal")
    snr = 2 * 3.0  # tau rho
    assert state.gain_d[0, 0] == pytest.approx(np.sqrt(snr) * 2 / (snr * 2 + 1))
    assert est.nmse_closed_form(state) == pytest.approx(1 / (1 + snr * 2),
                                                        rel=1e-12)


def test_state_invariants(desk):
    for scheme in ("two_phase", "benchmark"):
        state = sc.scheme_view(desk, scheme).state
        assert np.all(state.est <= state.power_total * (1 + 1e-9))
        assert np.all(state.est > 0)
        assert np.all(state.emi_ap >= 0)
        assert 0.0 < est.nmse_closed_form(state) < 1.0


def test_two_phase_subphases_can_disagree():
    scen = sc.desk_scenario(seed=0, k_users=5, tau_p=2)
    plan = sc.scheme_view(scen, "two_phase").state.plan
    assert not np.array_equal(plan.direct.pilots, plan.cascaded.pilots)
    assert plan.direct.snr.sum() == pytest.approx(plan.cascaded.snr.sum())


def test_degenerate_cascaded_subphase_uses_equal_power():
    scen = sc.desk_scenario(j_ris=0)
    plan = sc.scheme_view(scen, "two_phase").state.plan
    np.testing.assert_allclose(plan.cascaded.snr, scen.rho_p)


def test_benchmark_no_panels_equals_single_phase_direct():
    scen = sc.desk_scenario(j_ris=0)
    bench = sc.scheme_view(scen, "benchmark").state
    two = est.two_phase_state(scen.fading, [], scen.tau_p, scen.rho_p,
                              power_control="equal")
    np.testing.assert_allclose(bench.est, two.est, rtol=1e-12)
    assert est.nmse_closed_form(bench) == pytest.approx(
        est.nmse_closed_form(two), rel=1e-12)
    # classic correlated-pilot formula by hand
    beta = scen.fading.direct
    tau, snr = bench.assignment.tau_p, bench.assignment.snr
    load = tau * beta @ (bench.assignment.same_pilot * snr[None, :])
    np.testing.assert_allclose(bench.gain,
                               np.sqrt(tau * snr)[None, :] * beta / (load + 1),
                               rtol=1e-12)


def test_emi_never_improves_nmse(desk):
    assert (sc.nmse_closed(desk, "two_phase")
            >= sc.nmse_closed(desk, "two_phase_no_emi") - 1e-12)
    assert (sc.nmse_closed(desk, "benchmark")
            >= sc.nmse_closed(desk, "benchmark_no_emi") - 1e-12)


def test_pilot_contamination_floor(desk):
    # K > tau_p: no pilot power escapes contamination
    flooded = replace(desk, rho_p=1e9)
    assert sc.nmse_closed(flooded, "benchmark") > 0.01
    assert sc.nmse_closed(flooded, "two_phase") > 0.01
    # orthogonal pilots: error vanishes with power
    clean = replace(desk, tau_p=4, rho_p=1e9)
    assert sc.nmse_closed(clean, "two_phase") < 1e-3


def test_estimate_power_and_orthogonality(desk):
    from ris_cellfree.channel import sample_realization

    view = sc.scheme_view(desk, "two_phase")
    rng = np.random.default_rng(8)
    trials, done = 8000, 0
    power = np.zeros((desk.m_aps, desk.k_users))
    inner_sum = 0.0 + 0.0j
    inner_sq = 0.0
    while done < trials:
        t = min(256, trials - done)
        real = sample_realization(view.fading, view.panels, desk.n_antennas,
                                  rng, trials=t)
        g_hat = est.simulate_estimates(real, view.state, view.panels, rng)
        power += np.sum(np.abs(g_hat) ** 2, axis=(0, 3))
        inner = np.sum(np.conj(g_hat) * (real.aggregate - g_hat),
                       axis=(1, 2, 3))
        inner_sum += inner.sum()
        inner_sq += np.sum(np.abs(inner) ** 2)
        done += t
    ratio = power / trials / (desk.n_antennas * view.state.est)
    assert np.abs(ratio - 1.0).max() < 0.06
    mean = inner_sum / trials
    var = inner_sq / trials - abs(mean) ** 2
    assert abs(mean) / np.sqrt(var / trials) < 4.5


@pytest.mark.parametrize("scheme", sc.SCHEMES)
def test_nmse_closed_matches_empirical(desk, scheme):
    closed = sc.nmse_closed(desk, scheme)
    mc, stderr = sc.nmse_monte_carlo(desk, scheme, 4000, seed=[10, 1])
    assert abs(mc - closed) <= max(5.0 * stderr, 0.01 * closed)


def test_subtraction_modes_stay_close(desk):
    # removing the first-phase estimate instead of the exact direct channel
    # leaves a residual that the second sub-phase partially re-estimates, so
    # the two modes differ but must stay in the same range
    view = sc.scheme_view(desk, "two_phase")
    ideal, _ = est.nmse_empirical(view.fading, view.panels, desk.n_antennas,
                                  view.state, 4000, seed=[11, 1],
                                  subtraction="ideal")
    real, _ = est.nmse_empirical(view.fading, view.panels,
                                 desk.n_antennas, view.state, 4000,
                                 seed=[11, 1], subtraction="estimated")
    assert 0.0 < real < 1.0
    assert abs(real - ideal) <= 0.3 * ideal


def test_nmse_empirical_deterministic(desk):
    view = sc.scheme_view(desk, "benchmark")
    a = est.nmse_empirical(view.fading, view.panels, desk.n_antennas,
                           view.state, 1000, seed=[12, 1])
    b = est.nmse_empirical(view.fading, view.panels, desk.n_antennas,
                           view.state, 1000, seed=[12, 1])
    assert a == b


def test_inconsistent_state_rejected(desk):
    state = sc.scheme_view(desk, "two_phase").state
    bad = replace(state, est_direct=state.power_direct * 1.5)
    with pytest.raises(ValueError):
        est.nmse_closed_form(bad)


def test_unknown_modes_rejected(desk):
    view = sc.scheme_view(desk, "two_phase")
    with pytest.raises(ValueError):
        est.nmse_empirical(view.fading, view.panels, desk.n_antennas,
                           view.state, 100, seed=1, subtraction="magic")
    with pytest.raises(ValueError):
        est.two_phase_state(view.fading, view.panels, desk.tau_p,
                            desk.rho_p, power_control="magic")

"""Hull driving, the cocycle identity, and the two trajectory searches at
desk scale (small grids and short horizons; the full-size runs live in the
acceptance suite)."""

import math

import numpy as np
import pytest

from recurflow import (AnalyticSignal, ForcingField, HullElement, SolverConfig,
                       SpectralField, cocycle_check, drive, energy,
                       poisson_stable_solution_search,
                       random_divfree_field, recurrent_solution_search,
                       skew_trajectory)
from recurflow.skewprod import _phase_distance

RNG = np.random.default_rng(7)


def _qp_forcing(n, amps=(0.7, 0.5), freqs=(1.0, math.sqrt(2))):
    sig = AnalyticSignal.quasi_periodic(list(amps), list(freqs))
    return ForcingField.single_mode(n, (1, 1), sig)


def _zero(n):
    return SpectralField(n, np.zeros((2, n, n), np.complex128))


# ---------------------------------------------------------------------------
# hull elements and driving
# ---------------------------------------------------------------------------

def test_drive_group_law():
    omega = HullElement.from_forcing(_qp_forcing(16))
    a, b = 3.7, 11.25
    one = drive(omega, a + b)
    two = drive(drive(omega, a), b)
    assert _phase_distance(one, two) < 1e-12


def test_drive_matches_signal_translation():
    f = _qp_forcing(16)
    omega = HullElement.from_forcing(f)
    tau = 5.3
    driven = drive(omega, tau)
    t = np.linspace(-3, 3, 61)
    base_sig = f.temporal[0]
    driven_sig = driven.signals()[0]
    np.testing.assert_allclose(driven_sig(t), base_sig(t + tau), rtol=0, atol=1e-12)


def test_drive_poisson_offset():
    sig = AnalyticSignal.poisson_example(0.3)
    f = ForcingField.single_mode(16, (1, 1), sig)
    omega = HullElement.from_forcing(f)
    driven = drive(omega, 44.0)
    assert driven.offset == 44.0
    t = np.linspace(-2, 2, 41)
    np.testing.assert_allclose(driven.signals()[0](t), sig(t + 44.0), rtol=1e-12)
    # offset mismatch is part of the hull distance for poisson kinds
    assert _phase_distance(omega, driven) == pytest.approx(44.0)


def test_hull_forcing_reproduces_driven_forcing_values():
    f = _qp_forcing(16)
    omega = drive(HullElement.from_forcing(f), 2.5)
    f2 = omega.forcing()
    for t in (0.0, 0.1, 1.7):
        np.testing.assert_allclose(f2.hat(t), f.hat(t + 2.5), rtol=0, atol=1e-12)


def test_phases_stay_reduced():
    omega = HullElement.from_forcing(_qp_forcing(16))
    big = drive(omega, 1e4)
    for ph in big.phases:
        for p in ph:
            assert 0.0 <= p < 2 * math.pi


# ---------------------------------------------------------------------------
# skew trajectory and cocycle law
# ---------------------------------------------------------------------------

def test_skew_trajectory_base_agrees_with_closed_form():
    n = 16
    omega = HullElement.from_forcing(_qp_forcing(n, amps=(0.3, 0.2)))
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=30.0, state_stride=1000)
    straj = skew_trajectory(_zero(n), omega, cfg)
    assert straj.base_drift <= 1e-12
    states = straj.states()
    assert len(states) == 4
    assert _phase_distance(states[-1].omega, drive(omega, 30.0)) < 1e-12


def test_cocycle_check_passes_with_heun_starter():
    n = 16
    omega = HullElement.from_forcing(_qp_forcing(n, amps=(0.4, 0.3)))
    u0 = random_divfree_field(n, RNG, kmax=5, scale=0.4)
    cfg = SolverConfig(nu=0.5, n=n, dt=1e-3, t_end=0.5, first_step="heun")
    rep = cocycle_check(u0, omega, 0.25, 0.25, cfg, tol=1e-8)
    assert rep.passed
    assert rep.fiber_discrepancy <= 1e-8
    assert rep.base_discrepancy <= 1e-12


def test_cocycle_restart_transient_orders():
    # the restarted leg begins with the starter step; Euler's O(dt^2) restart
    # transient is visible, the Heun starter's O(dt^3) one is far smaller
    n = 16
    omega = HullElement.from_forcing(_qp_forcing(n, amps=(0.4, 0.3)))
    u0 = random_divfree_field(n, RNG, kmax=5, scale=0.4)
    discrepancies = {}
    for starter in ("heun", "euler"):
        cfg = SolverConfig(nu=0.5, n=n, dt=1e-3, t_end=0.5, first_step=starter)
        discrepancies[starter] = cocycle_check(u0, omega, 0.25, 0.25, cfg).fiber_discrepancy
    assert discrepancies["euler"] > 10.0 * discrepancies["heun"]


def test_cocycle_check_tau_zero_exact():
    n = 16
    omega = HullElement.from_forcing(_qp_forcing(n))
    u0 = random_divfree_field(n, RNG, kmax=5, scale=0.2)
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=0.5)
    rep = cocycle_check(u0, omega, 0.5, 0.0, cfg)
    assert rep.fiber_discrepancy == 0.0 and rep.passed


def test_cocycle_check_grid_alignment_required():
    n = 16
    omega = HullElement.from_forcing(_qp_forcing(n))
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=1.0)
    with pytest.raises(ValueError, match="multiple of dt"):
        cocycle_check(_zero(n), omega, 0.505, 0.25, cfg)


# ---------------------------------------------------------------------------
# searches (desk scale)
# ---------------------------------------------------------------------------

def test_recurrent_search_periodic_forcing_detects_periodic_solution():
    # forcing period 1.0 sits exactly on the step grid, so the post-transient
    # discrete orbit is periodic to roundoff and the classifier says so
    n = 16
    sig = AnalyticSignal.periodic(0.5, 2.0 * math.pi)
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=120.0, state_stride=12000,
                       probe_kmax=4, probe_stride=2)
    res = recurrent_solution_search(f, _zero(n), cfg, eps_ladder=(0.05, 0.02),
                                    burn_in=20.0, window_T=2.0, tau_step=0.02,
                                    base_spu=50)
    assert res.classification == "periodic"
    for eps, ss in res.joint_sets.items():
        base = set(res.base_returns[eps].times.tolist())
        assert set(ss.shifts.tolist()) <= base
        assert 1.0 in ss.shifts  # the forcing period itself
    assert res.report.provenance["experiment"] == "recurrent_solution_search"


def test_recurrent_search_quasi_periodic_forcing():
    n = 16
    f = _qp_forcing(n, amps=(0.5, 0.5))
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=260.0, state_stride=26000,
                       probe_kmax=4, probe_stride=2)
    res = recurrent_solution_search(f, _zero(n), cfg, eps_ladder=(0.1,),
                                    burn_in=20.0, window_T=2.0, tau_step=0.02,
                                    base_spu=50)
    assert res.classification == "recurrent_candidate"
    l = res.report.inclusion_lengths[0.1]
    assert l is not None and l < 240.0
    assert res.report.boundedness["stable"]


def test_recurrent_search_rejects_poisson_forcing():
    n = 16
    sig = AnalyticSignal.poisson_example()
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=100.0, state_stride=10000)
    with pytest.raises(ValueError, match="recurrent search requires"):
        recurrent_solution_search(f, _zero(n), cfg, (0.1,), burn_in=10.0)


def test_poisson_search_small_horizon():
    # burn-in 40 matters: the compact-open distance of the 44-translate is
    # window-center dependent (0.073 at center 10, 0.177 at 20, 0.017 at 40)
    n = 16
    sig = AnalyticSignal.poisson_example(0.3)
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=150.0, state_stride=15000,
                       probe_kmax=4, probe_stride=5, energy_ceiling=1e9)
    res = poisson_stable_solution_search(f, _zero(n), cfg, eps_ladder=(0.05,),
                                         burn_in=40.0, window_T=5.0,
                                         tau_step=0.25, base_spu=64,
                                         temporal_bound=1e4)
    prov = res.report.provenance
    assert prov["amplitude_scale_applied"] == 1.0
    assert prov["hypothesis_ok"]
    assert prov["enstrophy_max"] <= prov["enstrophy_ceiling"]
    # tau = 44 is reachable within this horizon and is a joint near-return
    assert 44.0 in res.base_returns[0.05].times
    assert 44.0 in res.joint_sets[0.05].shifts
    assert res.classification == "poisson_stable_positive_candidate"


def test_poisson_search_rescales_when_bound_exceeded():
    n = 16
    sig = AnalyticSignal.poisson_example(0.3)
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=120.0, state_stride=12000,
                       probe_kmax=4, probe_stride=5, energy_ceiling=1e9)
    res = poisson_stable_solution_search(f, _zero(n), cfg, eps_ladder=(0.05,),
                                         burn_in=10.0, window_T=5.0,
                                         tau_step=0.25, base_spu=64,
                                         temporal_bound=10.0)
    prov = res.report.provenance
    assert prov["temporal_sup_observed"] > 10.0
    assert 0.0 < prov["amplitude_scale_applied"] < 1.0
    assert prov["hypothesis_ok"]


def test_poisson_search_rejects_recurrent_forcing():
    n = 16
    f = _qp_forcing(n)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=100.0, state_stride=10000)
    with pytest.raises(ValueError, match="poisson search requires"):
        poisson_stable_solution_search(f, _zero(n), cfg, (0.1,), burn_in=10.0)


def test_search_requires_room_past_burn_in():
    n = 16
    f = _qp_forcing(n)
    cfg = SolverConfig(nu=1.0, n=n, dt=0.01, t_end=30.0, state_stride=3000,
                       probe_kmax=4, probe_stride=2)
    with pytest.raises(ValueError, match="horizon too short"):
        recurrent_solution_search(f, _zero(n), cfg, (0.1,), burn_in=26.0,
                                  window_T=2.0, tau_step=0.02, base_spu=50)

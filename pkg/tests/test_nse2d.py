"""Spectral solver: operator identities, exact decay, convergence order,
invariant preservation, failure modes, and persistence.

The forced-mode oracle used for the convergence test is the closed-form
Duhamel integral on the shear family (single tangential mode, for which the
advection term vanishes identically), so the measured error is purely the
AB2 time-discretization error.
"""

import math
import os

import numpy as np
import pytest

from recurflow import (AnalyticSignal, BlowUpError, ForcingField,
                       NonFiniteStateError, SolverConfig, SpectralField,
                       bilinear_term, energy, enstrophy, inner_product,
                       kolmogorov_field, leray_project, load_trajectory,
                       random_divfree_field, save_trajectory, solve, step,
                       stokes_apply)

RNG = np.random.default_rng(2024)


def _random_field(n=32, kmax=8, scale=1.0):
    return random_divfree_field(n, RNG, kmax=kmax, scale=scale)


# ---------------------------------------------------------------------------
# fields and operators
# ---------------------------------------------------------------------------

def test_spectral_field_validation():
    n = 16
    f = _random_field(n)
    f.validate(1e-12)
    with pytest.raises(ValueError):
        SpectralField(n, np.zeros((2, n, n + 1), np.complex128))
    with pytest.raises(ValueError):
        SpectralField(12, np.zeros((2, 12, 12), np.complex128))  # not a power of 2
    bad = f.copy()
    bad.coeffs[0, 0, 0] = 1.0  # nonzero mean
    with pytest.raises(ValueError, match="mean"):
        bad.validate(1e-12)
    bad2 = f.copy()
    bad2.coeffs[0, 3, 2] += 1.0  # breaks Hermitian symmetry
    with pytest.raises(ValueError):
        bad2.validate(1e-12)


def test_physical_field_is_real_and_divergence_free():
    f = _random_field(32)
    u = f.physical()
    assert u.shape == (2, 32, 32)
    # spectral divergence is zero, so the physical divergence (computed
    # spectrally) vanishes too; spot-check Parseval while at it
    assert np.mean(u[0] ** 2 + u[1] ** 2) == pytest.approx(2.0 * energy(f), rel=1e-12)


def test_leray_projection_idempotent_and_annihilates_gradients():
    n = 32
    raw = RNG.standard_normal((2, n, n)) + 1j * RNG.standard_normal((2, n, n))
    once = leray_project(raw)
    twice = leray_project(once)
    assert np.abs(once - twice).max() < 1e-14 * max(1.0, np.abs(once).max())
    # a pure gradient (u_hat parallel to k) projects to zero
    kx = np.fft.fftfreq(n, 1.0 / n)[:, None] * np.ones((1, n))
    ky = np.ones((n, 1)) * np.fft.fftfreq(n, 1.0 / n)[None, :]
    phi = RNG.standard_normal((n, n)) + 1j * RNG.standard_normal((n, n))
    grad = np.stack([kx * phi, ky * phi])
    assert np.abs(leray_project(grad)).max() < 1e-14 * np.abs(grad).max()


def test_stokes_inner_product_is_twice_enstrophy():
    for _ in range(5):
        f = _random_field(32)
        lhs = inner_product(stokes_apply(f, 0.7).coeffs, f.coeffs)
        assert lhs == pytest.approx(2.0 * 0.7 * enstrophy(f), rel=1e-13)


def test_bilinear_energy_neutral_on_bandlimited_fields():
    # <B(u,u), u> = 0: advection moves energy between modes, never creates it.
    # Exact for band-limited input (k <= n/3) since the retained band is then
    # alias-free.
    for _ in range(5):
        f = _random_field(32, kmax=10)
        b = bilinear_term(f, f)
        scale = 2.0 * energy(f) * math.sqrt(2.0 * enstrophy(f)) + 1e-300
        assert abs(inner_product(b.coeffs, f.coeffs)) / scale < 1e-12


def test_bilinear_output_is_divergence_free_and_dealiased():
    f = _random_field(64, kmax=20)
    b = bilinear_term(f, f)
    b.validate(1e-10)
    k = np.abs(np.fft.fftfreq(64, 1.0 / 64))
    outside = (k[:, None] > 64 / 3.0) | (k[None, :] > 64 / 3.0)
    assert np.abs(b.coeffs[:, outside]).max() == 0.0


def test_bilinear_vanishes_on_shear_family():
    # x-independent shear: (u . grad) u = u_x d_x u = 0; also holds for any
    # single tangential mode
    u = kolmogorov_field(32, amplitude=2.0, wavenumber=3)
    b = bilinear_term(u, u)
    assert np.abs(b.coeffs).max() < 1e-14
    f = ForcingField.single_mode(32, (2, 1), AnalyticSignal.constant(1.0))
    v = SpectralField(32, f.hat(0.0))
    bv = bilinear_term(v, v)
    assert np.abs(bv.coeffs).max() < 1e-13 * max(1.0, np.abs(v.coeffs).max())


def test_energy_enstrophy_on_single_mode():
    u = kolmogorov_field(32, amplitude=1.5, wavenumber=2)
    # |u|_H^2 = mean(a sin(2y))^2 = a^2/2 -> energy = a^2/4
    assert energy(u) == pytest.approx(1.5 ** 2 / 4.0, rel=1e-14)
    assert enstrophy(u) == pytest.approx(4.0 * energy(u), rel=1e-14)


# ---------------------------------------------------------------------------
# forcing
# ---------------------------------------------------------------------------

def test_forcing_norm_is_signal_magnitude():
    sig = AnalyticSignal.quasi_periodic([0.7, 0.2], [1.0, math.sqrt(2)])
    f = ForcingField.single_mode(32, (1, 1), sig)
    for t in (0.0, 0.37, 5.0):
        field = SpectralField(32, f.hat(t))
        assert math.sqrt(2.0 * energy(field)) == pytest.approx(abs(sig(t)), rel=1e-12, abs=1e-15)
        assert f.norm_at(t) == pytest.approx(abs(sig(t)), rel=1e-12, abs=1e-15)


def test_forcing_is_divergence_free_even_from_unprojected_amplitude():
    # request an amplitude with a gradient component; construction projects it
    f = ForcingField(32, [((2, 1), np.array([1.0 + 0j, 1.0 + 0j]))],
                     [AnalyticSignal.constant(1.0)])
    SpectralField(32, f.hat(1.23)).validate(1e-12)


def test_forcing_rejections():
    sig = AnalyticSignal.constant(1.0)
    with pytest.raises(ValueError, match="mean mode"):
        ForcingField.single_mode(32, (0, 0), sig)
    with pytest.raises(ValueError, match="resolved band"):
        ForcingField.single_mode(32, (40, 0), sig)
    with pytest.raises(ValueError, match="gradient"):
        # amplitude parallel to k is annihilated by the projection
        ForcingField(32, [((1, 0), np.array([1.0 + 0j, 0.0 + 0j]))], [sig])


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def test_free_kolmogorov_decay_is_exact():
    # single shear mode: advection vanishes, diffusion is exact by the
    # integrating factor, so the discrete solution is exact to roundoff
    n, nu, dt, T = 32, 0.5, 1e-3, 0.5
    a, w = 1.0, 2
    u0 = kolmogorov_field(n, a, w)
    cfg = SolverConfig(nu=nu, n=n, dt=dt, t_end=T, state_stride=int(T / dt))
    traj = solve(u0, None, cfg)
    decay = math.exp(-2.0 * nu * w * w * T)
    assert energy(traj.states[-1]) == pytest.approx(energy(u0) * decay, rel=1e-12)
    # the whole per-step energy record matches the exponential law
    expect = energy(u0) * np.exp(-2.0 * nu * w * w * traj.energy_t)
    np.testing.assert_allclose(traj.energy_v, expect, rtol=1e-11)


def _duhamel_sine(lam, w, T):
    # integral_0^T exp(-lam (T-s)) sin(w s) ds
    return ((lam * math.sin(w * T) - w * math.cos(w * T)) / (lam * lam + w * w)
            + math.exp(-lam * T) * w / (lam * lam + w * w))


def test_forced_mode_second_order_convergence():
    # forced shear mode from rest: u_hat' = -nu|k|^2 u_hat + sin(3t) a, B == 0,
    # so the exact solution is the Duhamel integral; halving dt must shrink
    # the error by at least 1.9 (AB2 is second order)
    n, nu, T = 16, 1.0, 1.0
    sig = AnalyticSignal.periodic(1.0, 3.0)
    f = ForcingField.single_mode(n, (0, 2), sig)
    a = f.spatial_modes[0][1]
    exact = _duhamel_sine(nu * 4.0, 3.0, T) * a
    u0 = SpectralField(n, np.zeros((2, n, n), np.complex128))
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        cfg = SolverConfig(nu=nu, n=n, dt=dt, t_end=T, state_stride=int(round(T / dt)))
        traj = solve(u0, f, cfg)
        got = traj.states[-1].coeffs[:, 0, 2]
        errs.append(float(np.abs(got - exact).max() / np.abs(exact).max()))
    assert errs[0] / errs[1] >= 1.9
    assert errs[1] / errs[2] >= 1.9


def test_invariants_preserved_through_nonlinear_run():
    n = 32
    u0 = _random_field(n, kmax=8, scale=0.5)
    sig = AnalyticSignal.quasi_periodic([0.5, 0.5], [1.0, math.sqrt(2)])
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=0.5, n=n, dt=5e-3, t_end=1.0, state_stride=40,
                       validate_every=100)
    traj = solve(u0, f, cfg)
    for s in traj.states:
        s.validate(1e-10)


def test_starter_step_variants_and_single_step_wrapper():
    n = 16
    u0 = _random_field(n, kmax=5, scale=0.3)
    for starter in ("heun", "euler"):
        cfg = SolverConfig(nu=1.0, n=n, dt=1e-3, t_end=1e-2, first_step=starter,
                           state_stride=10)
        traj = solve(u0, None, cfg)
        traj.states[-1].validate(1e-10)
    out = step(u0, 0.0, SolverConfig(nu=1.0, n=n, dt=1e-3, t_end=1e-3))
    out.validate(1e-10)
    with pytest.raises(ValueError):
        SolverConfig(nu=1.0, n=n, dt=1e-3, t_end=1.0, first_step="leapfrog")


def test_energy_balance_residual_shrinks_quadratically():
    # dE/dt = -2 nu enstrophy (unforced); the trapezoid residual of the
    # discrete step is O(dt^2)
    n = 32
    u0 = _random_field(n, kmax=8, scale=0.8)
    resid = []
    for dt in (2e-3, 1e-3):
        cfg = SolverConfig(nu=0.3, n=n, dt=dt, t_end=2 * dt, state_stride=1)
        tr = solve(u0, None, cfg)
        e0, e1 = tr.energy_v[1], tr.energy_v[2]
        mid = 0.5 * (tr.enstrophy_v[1] + tr.enstrophy_v[2])
        resid.append(abs((e1 - e0) / dt + 2.0 * 0.3 * mid))
    assert resid[0] / resid[1] > 1.9


def test_blowup_detection():
    n = 16
    sig = AnalyticSignal.constant(10.0)
    f = ForcingField.single_mode(n, (1, 0), sig)
    u0 = SpectralField(n, np.zeros((2, n, n), np.complex128))
    cfg = SolverConfig(nu=1e-3, n=n, dt=1e-2, t_end=10.0, state_stride=1000,
                       energy_ceiling=1e-4)
    with pytest.raises(BlowUpError) as exc:
        solve(u0, f, cfg)
    assert exc.value.energy > 1e-4


def test_nonfinite_detection_names_time():
    n = 16
    bad = SpectralField(n, np.zeros((2, n, n), np.complex128))
    bad.coeffs[0, 1, 0] = np.nan
    bad.coeffs[0, -1, 0] = np.nan
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-3, t_end=1e-2, state_stride=10)
    with pytest.raises(NonFiniteStateError) as exc:
        solve(bad, None, cfg)
    assert exc.value.t == pytest.approx(1e-3, rel=1e-9)


def test_stride_validation_and_steps_property():
    n = 16
    u0 = _random_field(n, kmax=4)
    with pytest.raises(ValueError, match="does not divide"):
        solve(u0, None, SolverConfig(nu=1.0, n=n, dt=1e-3, t_end=1e-2, state_stride=3))
    with pytest.raises(ValueError, match="multiple of dt"):
        SolverConfig(nu=1.0, n=n, dt=3e-3, t_end=1e-2).steps
    with pytest.raises(ValueError):
        SolverConfig(nu=-1.0, n=n, dt=1e-3, t_end=1.0)


def test_stiffness_advisory_warning():
    with pytest.warns(UserWarning, match="large"):
        SolverConfig(nu=10.0, n=64, dt=0.2, t_end=1.0)


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------

def test_probe_samples_match_full_state():
    n = 32
    u0 = _random_field(n, kmax=6, scale=0.5)
    sig = AnalyticSignal.periodic(0.5, 1.0)
    f = ForcingField.single_mode(n, (1, 1), sig)
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=0.2, state_stride=1,
                       probe_kmax=4, probe_stride=2)
    tr = solve(u0, f, cfg)
    assert tr.probe.shape == (11, 2, 9, 9)
    assert tr.probe.dtype == np.complex64
    np.testing.assert_allclose(tr.probe_times, 0.02 * np.arange(11), atol=1e-12)
    # probe sample k corresponds to the full state at step 2k
    idx = np.concatenate([np.arange(0, 5), np.arange(n - 4, n)])
    for k in (0, 3, 10):
        full = tr.states[2 * k].coeffs[:, idx[:, None], idx[None, :]]
        np.testing.assert_allclose(tr.probe[k], full.astype(np.complex64),
                                   rtol=1e-6, atol=1e-12)
    # H-norm differences computed from the probe agree with the same
    # difference taken on the full states restricted to the probe box (the
    # probe stores complex64, hence the loose relative tolerance)
    d_probe = tr.probe_norm_diffs(0, 10)
    box0 = tr.states[0].coeffs[:, idx[:, None], idx[None, :]]
    box1 = tr.states[20].coeffs[:, idx[:, None], idx[None, :]]
    d_box = math.sqrt(float(np.sum(np.abs(box0 - box1) ** 2)))
    assert d_probe == pytest.approx(d_box, rel=1e-5)
    # and with u0 band-limited inside the box, the probe captures nearly all
    # of the field: tail fraction stays at zero on this short run
    u0_small = _random_field(n, kmax=3, scale=0.2)
    tr2 = solve(u0_small, f, cfg)
    assert tr2.probe_tail_fraction == 0.0 or tr2.probe_tail_fraction < 1e-6


def test_probe_tail_fraction_zero_when_band_limited():
    n = 32
    u0 = kolmogorov_field(n, 1.0, 2)
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=5.12 * 2, state_stride=1024,
                       probe_kmax=6, probe_stride=1)
    tr = solve(u0, None, cfg)
    assert tr.probe_tail_fraction == 0.0


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_save_load_roundtrip(tmp_path):
    n = 16
    u0 = _random_field(n, kmax=4, scale=0.7)
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=0.1, state_stride=5)
    tr = solve(u0, None, cfg)
    save_trajectory(tr, tmp_path, prefix="traj")
    back = load_trajectory(os.path.join(tmp_path, "traj_manifest.json"))
    assert back.n == n and back.dt == tr.dt
    assert len(back.states) == len(tr.states)
    for a, b in zip(tr.states, back.states):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
    np.testing.assert_array_equal(back.energy_v, tr.energy_v)
    np.testing.assert_array_equal(back.state_times, tr.state_times)


def test_load_detects_tampering(tmp_path):
    n = 16
    u0 = _random_field(n, kmax=4)
    cfg = SolverConfig(nu=1.0, n=n, dt=1e-2, t_end=0.05, state_stride=5)
    tr = solve(u0, None, cfg)
    save_trajectory(tr, tmp_path, prefix="traj")
    bin_path = os.path.join(tmp_path, "traj.bin")
    blob = bytearray(open(bin_path, "rb").read())
    blob[100] ^= 0xFF
    open(bin_path, "wb").write(bytes(blob))
    with pytest.raises(ValueError, match="checksum"):
        load_trajectory(os.path.join(tmp_path, "traj_manifest.json"))


def test_save_is_deterministic(tmp_path):
    n = 16
    u0 = _random_field(n, kmax=4, scale=0.4)
    cfg = SolverConfig(nu=0.7, n=n, dt=1e-2, t_end=0.1, state_stride=10)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        tr = solve(u0, None, cfg)
        save_trajectory(tr, d, prefix="traj")
    for name in ("traj.bin", "traj_energy.csv", "traj_manifest.json"):
        assert open(d1 / name, "rb").read() == open(d2 / name, "rb").read()

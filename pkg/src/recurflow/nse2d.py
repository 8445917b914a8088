"""Pseudo-spectral 2D incompressible Navier-Stokes on the 2pi-periodic torus.

Solves the projected equation

    u' + A u + B(u, u) = F(t),      div u = 0,  mean u = 0,

with A the Stokes operator (nu |k|^2 per Fourier mode), B the Leray-projected
advection term computed pseudo-spectrally with 2/3-rule dealiasing, and F a
divergence-free forcing with prescribed spatial modes and scalar temporal
signals.  The torus replaces a no-slip domain so that Stokes eigenfunctions
are exact Fourier modes and the projection is algebraic per mode; the
compactness mechanism (bounded enstrophy implies pre-compactness in the energy
norm) has the identical spectral form.  Pressure is eliminated by the
projection and never represented.

Time stepping is IMEX: the diffusion is integrated exactly per mode by the
factor exp(-nu |k|^2 dt); the nonlinearity and forcing use second-order
Adams-Bashforth once history exists.  The starter step (also used after any
restart) defaults to an integrating-factor Heun step, which keeps the restart
transient at the local O(dt^3) level so that grid-aligned restarts reproduce
an uninterrupted run to ~1e-10 relative; a plain Euler starter is available
behind a config switch but its O(dt^2) restart transient is visible in strict
two-path comparisons.

Conventions: FFT in "forward" norm, so ``coeffs[c, kx, ky]`` is the
coefficient of exp(i k.x) of velocity component c and Parseval reads
``mean(|u|^2) = sum_k |u_hat_k|^2``.  Energy is ``0.5 * sum |u_hat|^2`` and
enstrophy ``0.5 * sum |k|^2 |u_hat|^2``; the solution norm used everywhere is
``|u|_H = sqrt(2 * energy)``.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft as sfft

from .signals import AnalyticSignal, evaluate

__all__ = [
    "SpectralField",
    "SolverConfig",
    "ForcingField",
    "EnergyRecord",
    "Trajectory",
    "BlowUpError",
    "NonFiniteStateError",
    "leray_project",
    "stokes_apply",
    "bilinear_term",
    "step",
    "solve",
    "energy",
    "enstrophy",
    "inner_product",
    "random_divfree_field",
    "kolmogorov_field",
    "save_trajectory",
    "load_trajectory",
]

INVARIANT_TOL = 1e-12


class BlowUpError(RuntimeError):
    def __init__(self, t, energy_value, ceiling):
        super().__init__("energy %.6g exceeded ceiling %.6g at t = %.6g"
                         % (energy_value, ceiling, t))
        self.t = t
        self.energy = energy_value


class NonFiniteStateError(RuntimeError):
    def __init__(self, t, component, kx, ky):
        super().__init__("nonfinite coefficient at t = %.6g, component %d, mode (%d, %d)"
                         % (t, component, kx, ky))
        self.t = t
        self.mode = (component, kx, ky)


def _wavenumbers(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers 0..n/2-1, -n/2..-1
    kx = k[:, None]
    ky = k[None, :]
    return kx, ky, kx * kx + ky * ky


def _dealias_mask(n: int) -> np.ndarray:
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    keep = k <= n / 3.0
    return keep[:, None] & keep[None, :]


@dataclass
class SpectralField:
    """Divergence-free, Hermitian-symmetric, zero-mean velocity field in
    Fourier representation: ``coeffs`` has shape (2, n, n), complex."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (2, self.n, self.n):
            raise ValueError("coeffs must have shape (2, n, n)")
        if self.n & (self.n - 1):
            raise ValueError("grid size must be a power of 2")

    def copy(self) -> "SpectralField":
        return SpectralField(self.n, self.coeffs.copy())

    def validate(self, tol: float = INVARIANT_TOL) -> None:
        """Assert the three structural invariants (divergence-free, Hermitian,
        zero mean) to relative tolerance ``tol``."""
        c = self.coeffs
        scale = float(np.abs(c).max()) or 1.0
        if abs(c[0, 0, 0]) > tol * scale or abs(c[1, 0, 0]) > tol * scale:
            raise ValueError("mean mode is not zero")
        kx, ky, _ = _wavenumbers(self.n)
        div = kx * c[0] + ky * c[1]
        if float(np.abs(div).max()) > tol * scale:
            raise ValueError("field is not divergence-free: max |k.u| = %g"
                             % float(np.abs(div).max()))
        mirror = np.conj(c[:, ::-1, ::-1])
        mirror = np.roll(mirror, 1, axis=1)
        mirror = np.roll(mirror, 1, axis=2)
        if float(np.abs(c - mirror).max()) > tol * scale:
            raise ValueError("field is not Hermitian-symmetric")

    def physical(self) -> np.ndarray:
        """Velocity on the physical grid, shape (2, n, n), real."""
        return np.real(sfft.ifft2(self.coeffs, axes=(1, 2), norm="forward"))


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration parameters.

    The product ``dt * nu * (n/2)^2`` is an advisory stiffness figure; the
    diffusion is integrated exactly so large values are stable, but a warning
    is emitted above 100 since the explicit terms then see badly resolved
    fast scales.
    """

    nu: float
    n: int
    dt: float
    t_end: float
    dealias: bool = True
    first_step: str = "heun"  # starter/restart scheme: "heun" (default) or "euler"
    state_stride: int = 1
    energy_ceiling: Optional[float] = None
    probe_kmax: Optional[int] = None
    probe_stride: int = 1
    validate_every: int = 0  # 0 disables in-run invariant checks

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError("n must be a power of 2, at least 4")
        if self.first_step not in ("heun", "euler"):
            raise ValueError("first_step must be 'heun' or 'euler'")
        stiffness = self.dt * self.nu * (self.n / 2.0) ** 2
        if stiffness > 100.0:
            warnings.warn("dt*nu*(n/2)^2 = %.3g is large; diffusion remains stable "
                          "(exact integrating factor) but explicit terms are "
                          "under-resolved" % stiffness, stacklevel=2)

    @property
    def steps(self) -> int:
        s = self.t_end / self.dt
        r = int(round(s))
        if abs(s - r) > 1e-9 * max(1.0, abs(s)) or r < 1:
            raise ValueError("t_end must be a positive multiple of dt")
        return r


@dataclass
class ForcingField:
    """Divergence-free forcing: fixed spatial Fourier modes with scalar
    temporal signals,  F_hat(t) = sum_j s_j(t) * Phi_hat_j.

    Each spatial mode is specified by an integer wavevector and a complex
    2-vector amplitude; amplitudes are Leray-projected at construction and the
    Hermitian partner at -k is added automatically.  With ``normalize=True``
    each pattern is scaled to unit energy norm, so ``|F(t)|_H = |s(t)|`` for a
    single mode.
    """

    n: int
    spatial_modes: List[Tuple[Tuple[int, int], np.ndarray]]
    temporal: List[AnalyticSignal]
    normalize: bool = True

    def __post_init__(self):
        if len(self.spatial_modes) != len(self.temporal):
            raise ValueError("one temporal signal per spatial mode required")
        kxg, kyg, k2 = _wavenumbers(self.n)
        modes = []
        for (kx, ky), amp in self.spatial_modes:
            kx, ky = int(kx), int(ky)
            if kx == 0 and ky == 0:
                raise ValueError("forcing at the mean mode is not allowed")
            # strictly inside the band: the Nyquist row is self-conjugate and
            # carries two wavevectors at once, so the per-mode projection is
            # ill-defined there
            half = self.n // 2
            if not (-half < kx < half and -half < ky < half):
                raise ValueError("mode (%d, %d) outside the resolved band" % (kx, ky))
            a = np.asarray(amp, dtype=np.complex128).reshape(2)
            kk = np.array([kx, ky], dtype=float)
            a = a - kk * (kk @ a) / (kk @ kk)  # Leray projection per mode
            if self.normalize:
                norm = math.sqrt(2.0) * float(np.linalg.norm(a))  # +k and -k partners
                if norm == 0.0:
                    raise ValueError("mode (%d, %d) amplitude is a pure gradient" % (kx, ky))
                a = a / norm
            modes.append(((kx, ky), a))
        self.spatial_modes = modes

    @staticmethod
    def single_mode(n, k, signal: AnalyticSignal, amp=None, normalize=True) -> "ForcingField":
        """Forcing on one wavevector; default amplitude is the unit tangential
        direction (-ky, kx)/|k| (real), giving a real cosine pattern."""
        kx, ky = int(k[0]), int(k[1])
        if kx == 0 and ky == 0:
            raise ValueError("forcing at the mean mode is not allowed")
        if amp is None:
            norm = math.hypot(kx, ky)
            amp = np.array([-ky / norm, kx / norm], dtype=np.complex128)
        return ForcingField(n, [((kx, ky), np.asarray(amp))], [signal], normalize=normalize)

    def norm_scale(self) -> float:
        """Energy norm of the pattern sum at unit signal values (upper bound
        via the triangle inequality; exact for a single mode)."""
        tot = 0.0
        for _, a in self.spatial_modes:
            tot += math.sqrt(2.0) * float(np.linalg.norm(a))
        return tot

    def add_hat(self, t: float, out: np.ndarray) -> None:
        """Accumulate F_hat(t) into ``out`` (shape (2, n, n), complex)."""
        n = self.n
        for ((kx, ky), a), sig in zip(self.spatial_modes, self.temporal):
            s = evaluate(sig, t)
            c = s * a
            out[:, kx % n, ky % n] += c
            out[:, (-kx) % n, (-ky) % n] += np.conj(c)

    def hat(self, t: float) -> np.ndarray:
        out = np.zeros((2, self.n, self.n), dtype=np.complex128)
        self.add_hat(t, out)
        return out

    def norm_at(self, t: float) -> float:
        """|F(t)|_H without materializing the grid array."""
        tot = 0.0
        for ((kx, ky), a), sig in zip(self.spatial_modes, self.temporal):
            s = float(evaluate(sig, t))
            tot += 2.0 * (s * s) * float(np.real(a @ np.conj(a)))
        return math.sqrt(tot)


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    energy: float
    enstrophy: float
    forcing_norm: float


def energy(u: SpectralField) -> float:
    """0.5 * sum_k |u_hat(k)|^2 (half the squared H-norm)."""
    c = u.coeffs
    return 0.5 * float(np.sum(np.real(c) ** 2 + np.imag(c) ** 2))


def enstrophy(u: SpectralField) -> float:
    """0.5 * sum_k |k|^2 |u_hat(k)|^2 (half the squared V-norm)."""
    _, _, k2 = _wavenumbers(u.n)
    c = u.coeffs
    return 0.5 * float(np.sum(k2 * (np.real(c) ** 2 + np.imag(c) ** 2)))


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Real L2 inner product of two Hermitian coefficient arrays."""
    return float(np.real(np.sum(a * np.conj(b))))


def leray_project(raw: np.ndarray) -> np.ndarray:
    """Project coefficients onto divergence-free fields:
    u_hat <- u_hat - k (k . u_hat)/|k|^2, with the mean mode zeroed.
    Idempotent; annihilates pure gradients; fixes fields with k . u_hat = 0."""
    raw = np.asarray(raw, dtype=np.complex128)
    n = raw.shape[-1]
    kx, ky, k2 = _wavenumbers(n)
    k2s = k2.copy()
    k2s[0, 0] = 1.0
    div = (kx * raw[0] + ky * raw[1]) / k2s
    out = np.empty_like(raw)
    out[0] = raw[0] - kx * div
    out[1] = raw[1] - ky * div
    out[:, 0, 0] = 0.0
    return out


def stokes_apply(u: SpectralField, nu: float) -> SpectralField:
    """A u = nu |k|^2 u_hat per mode (the Stokes operator on the torus)."""
    _, _, k2 = _wavenumbers(u.n)
    return SpectralField(u.n, nu * k2 * u.coeffs)


class _Workspace:
    """Per-solver transform buffers and mode tables (single-thread confined)."""

    def __init__(self, n: int, dealias: bool):
        self.n = n
        self.kx, self.ky, self.k2 = _wavenumbers(n)
        self.mask = _dealias_mask(n) if dealias else None

    def bilinear(self, u_hat: np.ndarray, v_hat: np.ndarray) -> np.ndarray:
        """B(u, v) = P((u . grad) v), dealiased."""
        ax = (1, 2)
        u_phys = np.real(sfft.ifft2(u_hat, axes=ax, norm="forward"))
        dvx = np.real(sfft.ifft2(1j * self.kx * v_hat, axes=ax, norm="forward"))
        dvy = np.real(sfft.ifft2(1j * self.ky * v_hat, axes=ax, norm="forward"))
        adv = u_phys[0] * dvx + u_phys[1] * dvy
        adv_hat = sfft.fft2(adv, axes=ax, norm="forward")
        if self.mask is not None:
            adv_hat *= self.mask
        return leray_project(adv_hat)


def bilinear_term(u: SpectralField, v: SpectralField, dealias: bool = True) -> SpectralField:
    """Advection term B(u, v) = P(sum_i u_i d_i v), computed pseudo-spectrally
    (transform, multiply, transform back) with 2/3-rule dealiasing: modes with
    max(|kx|, |ky|) > n/3 are zeroed before projection."""
    if u.n != v.n:
        raise ValueError("grid mismatch: %d vs %d" % (u.n, v.n))
    ws = _Workspace(u.n, dealias)
    return SpectralField(u.n, ws.bilinear(u.coeffs, v.coeffs))


class Stepper:
    """IMEX integrator: exact integrating factor for diffusion, AB2 for the
    explicit terms, Heun (or Euler) starter.  Owns its workspaces; confine one
    instance to one thread."""

    def __init__(self, cfg: SolverConfig, forcing: Optional[ForcingField]):
        self.cfg = cfg
        self.forcing = forcing
        self.ws = _Workspace(cfg.n, cfg.dealias)
        lam = cfg.nu * self.ws.k2 * cfg.dt
        self.E = np.exp(-lam)
        self.E2 = self.E * self.E
        self.n_prev: Optional[np.ndarray] = None

    def explicit_hat(self, u_hat: np.ndarray, t: float) -> np.ndarray:
        """N(u, t) = -B(u,u) + F_hat(t)."""
        nh = -self.ws.bilinear(u_hat, u_hat)
        if self.forcing is not None:
            self.forcing.add_hat(t, nh)
        return nh

    def advance(self, u_hat: np.ndarray, t: float) -> np.ndarray:
        dt = self.cfg.dt
        n_cur = self.explicit_hat(u_hat, t)
        if self.n_prev is None:
            if self.cfg.first_step == "euler":
                u_next = self.E * (u_hat + dt * n_cur)
            else:  # integrating-factor Heun: trapezoidal corrector on N
                pred = self.E * (u_hat + dt * n_cur)
                n_pred = self.explicit_hat(pred, t + dt)
                u_next = self.E * u_hat + 0.5 * dt * (self.E * n_cur + n_pred)
        else:
            u_next = self.E * u_hat + dt * (1.5 * self.E * n_cur - 0.5 * self.E2 * self.n_prev)
        self.n_prev = n_cur
        return u_next


def step(u: SpectralField, t: float, cfg: SolverConfig,
         forcing: Optional[ForcingField] = None,
         stepper: Optional[Stepper] = None) -> SpectralField:
    """One IMEX step from time ``t``.  Without a carried ``stepper`` this is
    the starter step; pass the same ``Stepper`` repeatedly to get AB2.
    Preserves divergence-freeness, Hermitian symmetry and zero mean."""
    st = stepper if stepper is not None else Stepper(cfg, forcing)
    out = st.advance(u.coeffs, t)
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise NonFiniteStateError(t + cfg.dt, int(bad[0]), *_index_to_mode(cfg.n, bad[1], bad[2]))
    return SpectralField(u.n, out)


def _index_to_mode(n, i, j):
    k = np.fft.fftfreq(n, d=1.0 / n)
    return int(k[int(i)]), int(k[int(j)])


@dataclass
class Trajectory:
    """Sampled solve output: full states at the state stride, energy records
    every step, and (optionally) a reduced spectral probe at its own stride
    for recurrence analysis of long runs."""

    n: int
    dt: float
    t0: float
    state_stride: int
    state_times: np.ndarray
    states: List[SpectralField]
    energy_t: np.ndarray
    energy_v: np.ndarray
    enstrophy_v: np.ndarray
    forcing_v: np.ndarray
    probe_kmax: Optional[int] = None
    probe_stride: int = 1
    probe_times: Optional[np.ndarray] = None
    probe: Optional[np.ndarray] = None          # (samples, 2, 2K+1, 2K+1) complex64
    probe_tail_fraction: float = 0.0            # max energy fraction outside the probe box
    config: Optional[SolverConfig] = None

    def energy_records(self) -> List[EnergyRecord]:
        return [EnergyRecord(float(t), float(e), float(z), float(f))
                for t, e, z, f in zip(self.energy_t, self.energy_v,
                                      self.enstrophy_v, self.forcing_v)]

    def probe_norm_diffs(self, i: int, j: int) -> float:
        """H-norm distance between probe samples i and j."""
        d = self.probe[i].astype(np.complex128) - self.probe[j].astype(np.complex128)
        return math.sqrt(float(np.sum(np.real(d) ** 2 + np.imag(d) ** 2)))


def _probe_indices(n: int, kmax: int) -> np.ndarray:
    idx = np.concatenate([np.arange(0, kmax + 1), np.arange(n - kmax, n)])
    return idx


def solve(u0: SpectralField, forcing: Optional[ForcingField], cfg: SolverConfig,
          t0: float = 0.0) -> Trajectory:
    """Integrate forward from ``t0`` over ``cfg.steps`` steps.

    Emits a full state every ``state_stride`` steps (the stride must divide
    the step count), an energy record every step, and optional probe samples.
    Deterministic: identical inputs produce bit-identical trajectories.
    Raises :class:`BlowUpError` when the energy passes the configured ceiling
    (default 1e6 times the initial-plus-forcing energy scale).
    """
    steps = cfg.steps
    if steps % cfg.state_stride:
        raise ValueError("state_stride %d does not divide step count %d"
                         % (cfg.state_stride, steps))
    if cfg.probe_kmax is not None and steps % cfg.probe_stride:
        raise ValueError("probe_stride %d does not divide step count %d"
                         % (cfg.probe_stride, steps))
    st = Stepper(cfg, forcing)
    u_hat = u0.coeffs.copy()

    e0 = energy(u0)
    f_scale = 0.0
    if forcing is not None:
        f0 = forcing.norm_scale()
        f_scale = 0.5 * (f0 / cfg.nu) ** 2
    ceiling = cfg.energy_ceiling
    if ceiling is None:
        ceiling = 1e6 * max(e0 + f_scale, 1e-12)

    n_e = steps + 1
    energy_t = t0 + cfg.dt * np.arange(n_e)
    energy_v = np.empty(n_e)
    enstrophy_v = np.empty(n_e)
    forcing_v = np.empty(n_e)

    _, _, k2 = _wavenumbers(cfg.n)

    def record(i, uh):
        c2 = np.real(uh) ** 2 + np.imag(uh) ** 2
        energy_v[i] = 0.5 * float(np.sum(c2))
        enstrophy_v[i] = 0.5 * float(np.sum(k2 * c2))
        forcing_v[i] = forcing.norm_at(float(energy_t[i])) if forcing is not None else 0.0

    record(0, u_hat)
    states = [SpectralField(cfg.n, u_hat.copy())]
    state_times = [t0]

    use_probe = cfg.probe_kmax is not None
    if use_probe:
        pidx = _probe_indices(cfg.n, cfg.probe_kmax)
        n_p = steps // cfg.probe_stride + 1
        probe = np.empty((n_p, 2, len(pidx), len(pidx)), dtype=np.complex64)
        probe_times = t0 + cfg.dt * cfg.probe_stride * np.arange(n_p)
        probe[0] = u_hat[:, pidx[:, None], pidx[None, :]].astype(np.complex64)
        tail_frac = 0.0
        box_mask = np.zeros((cfg.n, cfg.n), dtype=bool)
        box_mask[np.ix_(pidx, pidx)] = True

    for i in range(1, steps + 1):
        t_cur = t0 + cfg.dt * (i - 1)
        u_hat = st.advance(u_hat, t_cur)
        record(i, u_hat)
        ev = energy_v[i]
        if not math.isfinite(ev):
            bad = np.argwhere(~np.isfinite(u_hat))
            c, ii, jj = (bad[0] if len(bad) else (0, 0, 0))
            raise NonFiniteStateError(float(energy_t[i]), int(c), *_index_to_mode(cfg.n, ii, jj))
        if ev > ceiling:
            raise BlowUpError(float(energy_t[i]), ev, ceiling)
        if cfg.validate_every and i % cfg.validate_every == 0:
            SpectralField(cfg.n, u_hat).validate(1e-10)
        if i % cfg.state_stride == 0:
            states.append(SpectralField(cfg.n, u_hat.copy()))
            state_times.append(float(energy_t[i]))
        if use_probe and i % cfg.probe_stride == 0:
            probe[i // cfg.probe_stride] = u_hat[:, pidx[:, None], pidx[None, :]].astype(np.complex64)
            if i % (cfg.probe_stride * 256) == 0:
                c2 = np.real(u_hat) ** 2 + np.imag(u_hat) ** 2
                tot = float(np.sum(c2))
                if tot > 0:
                    tail_frac = max(tail_frac, 1.0 - float(np.sum(c2[:, box_mask])) / tot)

    return Trajectory(
        n=cfg.n, dt=cfg.dt, t0=t0, state_stride=cfg.state_stride,
        state_times=np.array(state_times), states=states,
        energy_t=energy_t, energy_v=energy_v, enstrophy_v=enstrophy_v,
        forcing_v=forcing_v,
        probe_kmax=cfg.probe_kmax, probe_stride=cfg.probe_stride,
        probe_times=probe_times if use_probe else None,
        probe=probe if use_probe else None,
        probe_tail_fraction=tail_frac if use_probe else 0.0,
        config=cfg,
    )


def kolmogorov_field(n: int, amplitude: float = 1.0, wavenumber: int = 1) -> SpectralField:
    """The shear u = (a sin(w y), 0): x-independent, divergence-free, and an
    exact Stokes eigenfunction with B(u, u) = 0 identically."""
    c = np.zeros((2, n, n), dtype=np.complex128)
    a = amplitude / 2.0j
    c[0, 0, wavenumber % n] = a
    c[0, 0, (-wavenumber) % n] = np.conj(a)
    return SpectralField(n, c)


def random_divfree_field(n: int, rng: np.random.Generator, kmax: int = 8,
                         scale: float = 1.0) -> SpectralField:
    """Random band-limited divergence-free field (Hermitian by construction:
    FFT of real white noise, band-cut, projected, scaled to H-norm ``scale``).

    The band is capped strictly below the Nyquist row, where the per-mode
    Leray projection would break the conjugate symmetry."""
    noise = rng.standard_normal((2, n, n))
    raw = sfft.fft2(noise, axes=(1, 2), norm="forward")
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    cap = min(float(kmax), n / 2.0 - 1.0)
    band = (k[:, None] <= cap) & (k[None, :] <= cap)
    raw *= band
    proj = leray_project(raw)
    f = SpectralField(n, proj)
    h = math.sqrt(2.0 * energy(f))
    if h > 0:
        f.coeffs *= scale / h
    return f


# ---------------------------------------------------------------------------
# persistence: manifest JSON + flat little-endian binary + energy CSV
# ---------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_trajectory(traj: Trajectory, directory, prefix: str = "trajectory") -> dict:
    """Write ``<prefix>.bin`` (states as flat little-endian complex128, sample
    major), ``<prefix>_energy.csv`` and ``<prefix>_manifest.json``; returns
    the manifest dict.  All floats are printed with 17 significant digits so
    the CSV round-trips exactly."""
    import os
    os.makedirs(directory, exist_ok=True)
    bin_path = os.path.join(directory, prefix + ".bin")
    stacked = np.stack([s.coeffs for s in traj.states]).astype("<c16")
    with open(bin_path, "wb") as fh:
        fh.write(stacked.tobytes())
    csv_path = os.path.join(directory, prefix + "_energy.csv")
    with open(csv_path, "w") as fh:
        fh.write("t,energy,enstrophy,forcing_norm\n")
        for t, e, z, f in zip(traj.energy_t, traj.energy_v, traj.enstrophy_v, traj.forcing_v):
            fh.write("%.17g,%.17g,%.17g,%.17g\n" % (t, e, z, f))
    manifest = {
        "format": "recurflow-trajectory-1",
        "grid_n": traj.n,
        "dt": traj.dt,
        "t0": traj.t0,
        "state_stride": traj.state_stride,
        "samples": len(traj.states),
        "sample_times": [float(t) for t in traj.state_times],
        "dtype": "<c16",
        "shape_per_sample": [2, traj.n, traj.n],
        "files": {
            os.path.basename(bin_path): _sha256(bin_path),
            os.path.basename(csv_path): _sha256(csv_path),
        },
        "config": None if traj.config is None else {
            "nu": traj.config.nu, "n": traj.config.n, "dt": traj.config.dt,
            "t_end": traj.config.t_end, "dealias": traj.config.dealias,
            "first_step": traj.config.first_step,
        },
        "probe": None if traj.probe is None else {
            "kmax": traj.probe_kmax, "stride": traj.probe_stride,
            "tail_fraction": traj.probe_tail_fraction,
        },
    }
    man_path = os.path.join(directory, prefix + "_manifest.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def load_trajectory(manifest_path) -> Trajectory:
    """Reload states + energy series persisted by :func:`save_trajectory`,
    verifying checksums."""
    import os
    with open(manifest_path) as fh:
        man = json.load(fh)
    directory = os.path.dirname(os.path.abspath(manifest_path))
    for name, digest in man["files"].items():
        path = os.path.join(directory, name)
        actual = _sha256(path)
        if actual != digest:
            raise ValueError("checksum mismatch for %s" % name)
    n = man["grid_n"]
    bin_name = [f for f in man["files"] if f.endswith(".bin")][0]
    raw = np.fromfile(os.path.join(directory, bin_name), dtype="<c16")
    stacked = raw.reshape(man["samples"], 2, n, n).astype(np.complex128)
    states = [SpectralField(n, s) for s in stacked]
    csv_name = [f for f in man["files"] if f.endswith(".csv")][0]
    data = np.genfromtxt(os.path.join(directory, csv_name), delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return Trajectory(
        n=n, dt=man["dt"], t0=man["t0"], state_stride=man["state_stride"],
        state_times=np.array(man["sample_times"]), states=states,
        energy_t=data[:, 0], energy_v=data[:, 1],
        enstrophy_v=data[:, 2], forcing_v=data[:, 3],
    )

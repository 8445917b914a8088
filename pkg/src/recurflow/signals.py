"""Scalar signals, the translation (shift) flow, and the compact-open metric.

A signal phi is a continuous function of real time.  The shift flow acts by
``translate(phi, tau)(t) = phi(t + tau)``; orbits of this flow are the raw
material for every recurrence notion implemented in :mod:`recurflow.recurrence`.
Closeness of two signals is measured in the compact-open topology, metrized by

    d(f, g) = sum_{n >= 1} 2^(-n) * d_n / (1 + d_n),
    d_n      = max_{|t| <= n} |f(t) - g(t)|,

truncated at a configurable level ``n_max`` (every summand is below 2^(-n), so
the truncation error is bounded by 2^(-n_max)).  Suprema over the windows
[-n, n] are approximated by maxima over uniform grids with a configurable
density; all signals in scope are smooth with bounded derivative on compacta,
so the grid maximum converges to the true supremum as the density grows.

Built-in signal kinds
---------------------
``constant``         c
``periodic``         a * sin(w t + p)
``quasi_periodic``   sum_i a_i * sin(w_i t + p_i)
``poisson_example``  a / (2 + sin t + sin(pi t))   (bounded on compacta,
                     unbounded on R; the model of a Poisson stable but
                     non-recurrent motion)
``shifted``          a translate of poisson_example, carrying the shift
                     explicitly (periodic kinds absorb shifts into phases)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "AnalyticSignal",
    "TimeGrid",
    "SampledPath",
    "CompactOpenMetricParams",
    "CoverageError",
    "evaluate",
    "translate",
    "seminorm_dn",
    "compact_open_distance",
    "window_grid",
]

SIGNAL_KINDS = ("constant", "periodic", "quasi_periodic", "poisson_example", "shifted")

# Density (samples per unit time) used for window maxima unless overridden.
DEFAULT_SAMPLES_PER_UNIT = 64


class CoverageError(ValueError):
    """A sampled input does not cover the requested time window."""


def _near_rational_ratio(r, max_den=20, tol=1e-9):
    """Return ``p/q`` if ``r`` is within ``tol`` of a rational with small
    denominator, else ``None``."""
    if not math.isfinite(r):
        return None
    frac = Fraction(r).limit_denominator(max_den)
    if abs(r - float(frac)) < tol:
        return frac
    return None


@dataclass(frozen=True)
class AnalyticSignal:
    """Closed-form scalar signal, evaluable at every real time.

    Parameters
    ----------
    kind : str
        One of ``constant``, ``periodic``, ``quasi_periodic``,
        ``poisson_example``, ``shifted``.
    amplitudes, frequencies, phase_offsets : tuple of float
        Term parameters; ``constant`` uses only ``amplitudes[0]``,
        ``poisson_example``/``shifted`` use ``amplitudes[0]`` as an overall
        scale.  Frequencies are in radians per unit time.
    base_shift : float
        Time offset applied before evaluation; the ``shifted`` kind is a
        translated ``poisson_example`` and this field carries the translation.
    output_dim : int
        Dimension of the value; all built-in kinds are scalar (1).
    """

    kind: str
    amplitudes: tuple = (1.0,)
    frequencies: tuple = ()
    phase_offsets: tuple = ()
    base_shift: float = 0.0
    output_dim: int = 1

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError("unknown signal kind %r" % (self.kind,))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        object.__setattr__(self, "phase_offsets", tuple(float(p) for p in self.phase_offsets))
        if self.kind in ("periodic", "quasi_periodic"):
            k = len(self.amplitudes)
            if k == 0 or len(self.frequencies) != k:
                raise ValueError("amplitudes and frequencies must have equal nonzero length")
            if len(self.phase_offsets) == 0:
                object.__setattr__(self, "phase_offsets", (0.0,) * k)
            elif len(self.phase_offsets) != k:
                raise ValueError("phase_offsets length mismatch")
            if self.kind == "periodic" and k != 1:
                raise ValueError("periodic kind is a single sinusoid; use quasi_periodic")
            if any(f == 0.0 for f in self.frequencies):
                raise ValueError("frequencies must be nonzero")
        if self.kind == "quasi_periodic":
            # Rationally dependent frequencies silently degrade the signal to a
            # periodic one, which changes the expected classification.  Warn,
            # do not reject.
            fs = self.frequencies
            for i in range(len(fs)):
                for j in range(i + 1, len(fs)):
                    frac = _near_rational_ratio(fs[i] / fs[j])
                    if frac is not None:
                        warnings.warn(
                            "frequency ratio %g/%g is within 1e-9 of %s; "
                            "signal is effectively periodic" % (fs[i], fs[j], frac),
                            stacklevel=2,
                        )
        if self.output_dim != 1:
            raise ValueError("built-in signal kinds are scalar (output_dim=1)")

    # -- convenience constructors -------------------------------------------------
    @staticmethod
    def constant(c):
        return AnalyticSignal("constant", amplitudes=(c,))

    @staticmethod
    def periodic(amplitude=1.0, frequency=1.0, phase=0.0):
        return AnalyticSignal("periodic", (amplitude,), (frequency,), (phase,))

    @staticmethod
    def quasi_periodic(amplitudes, frequencies, phases=None):
        phases = tuple(phases) if phases is not None else ()
        return AnalyticSignal("quasi_periodic", tuple(amplitudes), tuple(frequencies), phases)

    @staticmethod
    def poisson_example(scale=1.0):
        return AnalyticSignal("poisson_example", amplitudes=(scale,))

    def __call__(self, t):
        return evaluate(self, t)


def evaluate(s: AnalyticSignal, t):
    """Evaluate ``s`` at time(s) ``t``.

    Accepts scalars or arrays; the result has the shape of ``t``.  All kinds
    are total on the real line — in particular the poisson_example denominator
    ``2 + sin t + sin(pi t)`` is strictly positive (sin t and sin(pi t) never
    both equal -1, as that would force pi to be rational).
    """
    t = np.asarray(t, dtype=float) + s.base_shift
    if s.kind == "constant":
        return np.broadcast_to(np.float64(s.amplitudes[0]), t.shape).copy() if t.ndim else np.float64(s.amplitudes[0])
    if s.kind in ("periodic", "quasi_periodic"):
        a = np.array(s.amplitudes)
        w = np.array(s.frequencies)
        p = np.array(s.phase_offsets)
        # sum_i a_i sin(w_i t + p_i), broadcasting over trailing term axis
        return np.sin(np.multiply.outer(t, w) + p) @ a if t.ndim else float(np.dot(a, np.sin(w * t + p)))
    # poisson_example / shifted
    val = s.amplitudes[0] / (2.0 + np.sin(t) + np.sin(np.pi * t))
    return val if t.ndim else float(val)


def translate(s: AnalyticSignal, tau) -> AnalyticSignal:
    """The shift flow: a signal evaluating to ``s(t + tau)`` for every t.

    Periodic and quasi-periodic kinds absorb the shift into their phase
    offsets, so the group law ``translate(translate(s, a), b) ==
    translate(s, a + b)`` holds exactly (up to float addition) and repeated
    shifting never grows the representation.  The poisson kinds carry the
    accumulated shift in ``base_shift`` under the ``shifted`` kind.
    """
    tau = float(tau)
    if s.kind == "constant" or tau == 0.0:
        return s
    if s.kind in ("periodic", "quasi_periodic"):
        new_phases = tuple(p + w * tau for p, w in zip(s.phase_offsets, s.frequencies))
        return replace(s, phase_offsets=new_phases)
    return replace(s, kind="shifted", base_shift=s.base_shift + tau)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling times ``t0 + k*dt`` for ``k in [0, count)``."""

    t0: float
    dt: float
    count: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.count <= 0:
            raise ValueError("count must be positive")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.count)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.count - 1)


def _euclid(x, y):
    return float(np.linalg.norm(np.asarray(x) - np.asarray(y)))


@dataclass
class SampledPath:
    """A function of time known only on a finite uniform grid.

    ``values`` has shape (grid.count,) for scalar paths or (grid.count, m) for
    vector-valued ones; ``state_norm`` is the metric rho on the carrier space
    (defaults to the Euclidean distance).
    """

    grid: TimeGrid
    values: np.ndarray
    state_norm: Callable = field(default=_euclid, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.grid.count:
            raise ValueError("values length %d does not match grid count %d"
                             % (self.values.shape[0], self.grid.count))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")

    def covers(self, a, b) -> bool:
        eps = 1e-9 * max(1.0, abs(a), abs(b))
        return self.grid.t0 <= a + eps and self.grid.t_end >= b - eps

    def values_on(self, times: np.ndarray) -> np.ndarray:
        """Values at grid-aligned query times (nearest-sample lookup).

        Raises :class:`CoverageError` when the query leaves the sampled range.
        """
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < self.grid.t0 - 1e-9 or times.max() > self.grid.t_end + 1e-9):
            raise CoverageError(
                "path covers [%g, %g] but window [%g, %g] was requested"
                % (self.grid.t0, self.grid.t_end, float(times.min()), float(times.max())))
        idx = np.rint((times - self.grid.t0) / self.grid.dt).astype(np.int64)
        idx = np.clip(idx, 0, self.grid.count - 1)
        return self.values[idx]


@dataclass(frozen=True)
class CompactOpenMetricParams:
    """Truncation level and grid density for the compact-open metric.

    The series is cut at ``n_max`` (default 20); since every summand is below
    2^(-n) the truncation error is at most 2^(-n_max).
    """

    n_max: int = 20
    samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.samples_per_unit < 1:
            raise ValueError("samples_per_unit must be positive")

    @property
    def truncation_bound(self) -> float:
        return 2.0 ** (-self.n_max)


def window_grid(T, samples_per_unit=DEFAULT_SAMPLES_PER_UNIT, center=0.0):
    """Uniform grid on [center-T, center+T] with ``samples_per_unit`` density."""
    m = int(round(2.0 * T * samples_per_unit))
    return center + np.linspace(-T, T, m + 1)


SignalLike = Union[AnalyticSignal, SampledPath]


def _diff_norms(f: SignalLike, g: SignalLike, times: np.ndarray) -> np.ndarray:
    """Pointwise rho(f(t), g(t)) over ``times`` for any signal/path mix."""
    fv = f.values_on(times) if isinstance(f, SampledPath) else evaluate(f, times)
    gv = g.values_on(times) if isinstance(g, SampledPath) else evaluate(g, times)
    d = np.asarray(fv, dtype=float) - np.asarray(gv, dtype=float)
    if d.ndim == 1:
        return np.abs(d)
    return np.sqrt(np.sum(d * d, axis=-1))


def seminorm_dn(f: SignalLike, g: SignalLike, n: int,
                samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT) -> float:
    """Windowed sup-distance d_n: the maximum of rho(f(t), g(t)) over the
    uniform grid on [-n, n].

    Monotone nondecreasing in ``n``.  Sampled inputs must cover [-n, n];
    otherwise a :class:`CoverageError` is raised.
    """
    if n < 1:
        raise ValueError("level n must be a positive integer")
    times = window_grid(float(n), samples_per_unit)
    return float(_diff_norms(f, g, times).max())


def compact_open_distance(f: SignalLike, g: SignalLike,
                          params: CompactOpenMetricParams = CompactOpenMetricParams()) -> float:
    """Truncated compact-open metric sum_{n=1}^{n_max} 2^(-n) d_n/(1+d_n).

    The result lies in [0, 1); it is symmetric, vanishes iff the two inputs
    agree on the level grids, and differs from the full series by at most
    2^(-n_max).
    """
    spu = params.samples_per_unit
    times = window_grid(float(params.n_max), spu)
    diffs = _diff_norms(f, g, times)
    mid = diffs.size // 2  # index of t = 0
    total = 0.0
    for n in range(1, params.n_max + 1):
        k = n * spu
        dn = float(diffs[mid - k: mid + k + 1].max())
        total += 0.5 ** n * dn / (1.0 + dn)
    return total

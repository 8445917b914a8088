"""Recurrence taxonomy for signals and sampled trajectories.

Implements the operational ladder used throughout the package:

* epsilon-shift sets and their inclusion lengths (relative density of the
  almost-period set);
* Birkhoff-recurrence evidence = finite inclusion lengths for a ladder of
  epsilons plus a bounded-range scan (compact-hull surrogate);
* positive-direction Poisson stability evidence = nonempty return-time
  sequences, detected in the (truncated) compact-open metric;
* omega-limit sampling by deterministic greedy clustering;
* an equicontinuity probe, the almost-periodicity diagnostic for hull flows.

Every quantity is computed on finite grids over finite windows, so all
classifications are "candidate" statements; the report carries the windows,
grids and horizons used (its provenance) alongside the verdict.

Two windowing conventions coexist deliberately.  Shift sets measure the raw
windowed supremum ``sup_{|t|<=T} rho(phi(t+tau), phi(t))``.  Return-time
detection measures the truncated compact-open *metric* (levels n = 1..T),
which is the topology in which hull returns are defined; the weighted series
discounts excursions near the window edge, so the two can disagree for
marginal shifts.  Forward-only trajectories use one-sided windows
[0, 2T] since PDE paths cannot be evaluated at negative times.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .signals import (
    AnalyticSignal,
    CompactOpenMetricParams,
    CoverageError,
    SampledPath,
    DEFAULT_SAMPLES_PER_UNIT,
    evaluate,
    window_grid,
)

__all__ = [
    "ShiftSet",
    "ReturnTimes",
    "RecurrenceReport",
    "OmegaLimitSample",
    "EquicontinuityProbe",
    "ClassifyParams",
    "shift_set",
    "inclusion_length",
    "classify",
    "classify_from_evidence",
    "poisson_return_times",
    "omega_limit_sample",
    "boundedness_scan",
    "equicontinuity_probe",
]

CLASSIFICATIONS = (
    "periodic",
    "almost_periodic_candidate",
    "recurrent_candidate",
    "poisson_stable_positive_candidate",
    "unclassified",
)

NOT_FOUND = "not found within search range"

_TAU_CHUNK = 512


def _tau_grid(tau_range, tau_step):
    """Interior grid tau_min + k*tau_step, k >= 1, strictly below tau_max."""
    tau_min, tau_max = float(tau_range[0]), float(tau_range[1])
    tau_step = float(tau_step)
    if tau_step <= 0:
        raise ValueError("tau_step must be positive")
    if tau_max <= tau_min:
        raise ValueError("empty tau_range %r" % (tau_range,))
    n = int(math.floor((tau_max - tau_min) / tau_step * (1.0 + 1e-12)))
    taus = tau_min + tau_step * np.arange(1, n + 1)
    return taus[taus < tau_max - 1e-12 * max(1.0, abs(tau_max))]


def _is_forward_only(phi) -> bool:
    return isinstance(phi, SampledPath) and phi.grid.t0 > -1e-12


def _base_window(phi, window_T, samples_per_unit, one_sided):
    if one_sided is None:
        one_sided = _is_forward_only(phi)
    if one_sided:
        # forward-only: compare over [t0, t0 + 2T]
        t0 = phi.grid.t0 if isinstance(phi, SampledPath) else 0.0
        times = window_grid(window_T, samples_per_unit, center=t0 + window_T)
    else:
        times = window_grid(window_T, samples_per_unit)
    return times, bool(one_sided)


def _values_at(phi, times):
    if isinstance(phi, SampledPath):
        return phi.values_on(times)
    return evaluate(phi, times)


def _sup_diffs_over_taus(phi, taus, base_times):
    """Windowed sup of rho(phi(t+tau), phi(t)) for each tau, chunked."""
    ref = np.asarray(_values_at(phi, base_times), dtype=float)
    sups = np.empty(len(taus))
    for i0 in range(0, len(taus), _TAU_CHUNK):
        chunk = taus[i0:i0 + _TAU_CHUNK]
        shifted = _values_at(phi, base_times[None, :] + chunk[:, None])
        d = np.asarray(shifted, dtype=float) - ref[None, ...]
        if d.ndim == 3:  # vector-valued path: norm along state axis
            d = np.sqrt(np.sum(d * d, axis=-1))
        else:
            d = np.abs(d)
        sups[i0:i0 + len(chunk)] = d.max(axis=1)
    return sups


@dataclass
class ShiftSet:
    """Grid-detected epsilon-shifts of a signal.

    ``shifts`` lists every scanned tau whose windowed sup-distance to the
    original is strictly below ``epsilon``; ``member_sups`` carries those
    distances for export.  ``min_sup``/``argmin_tau`` record the best shift
    seen over the whole scan (used by the periodicity rule), whether or not
    it is a member.
    """

    epsilon: float
    window_T: float
    tau_range: Tuple[float, float]
    tau_step: float
    shifts: np.ndarray
    member_sups: np.ndarray
    one_sided: bool = False
    samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT
    min_sup: float = float("inf")
    argmin_tau: float = float("nan")

    def __post_init__(self):
        self.shifts = np.asarray(self.shifts, dtype=float)
        self.member_sups = np.asarray(self.member_sups, dtype=float)
        if self.shifts.size:
            if np.any(np.diff(self.shifts) <= 0):
                raise ValueError("shifts must be sorted ascending")
            if float(self.member_sups.max()) >= self.epsilon:
                raise ValueError("listed shift violates the epsilon bound")
            lo, hi = self.tau_range
            if self.shifts[0] < lo or self.shifts[-1] > hi:
                raise ValueError("shift outside tau_range")

    def __len__(self):
        return int(self.shifts.size)


def shift_set(phi, epsilon, window_T, tau_range, tau_step,
              samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT,
              one_sided: Optional[bool] = None) -> ShiftSet:
    """Exhaustive tau-grid scan for epsilon-shifts.

    For each candidate tau on the interior grid of ``tau_range`` the windowed
    supremum of ``rho(phi(t + tau), phi(t))`` over ``|t| <= window_T`` (or the
    one-sided window ``[t0, t0 + 2*window_T]`` for forward-only trajectories)
    is compared against ``epsilon``.  Deterministic; independent of chunking.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    taus = _tau_grid(tau_range, tau_step)
    base_times, one_sided = _base_window(phi, float(window_T), samples_per_unit, one_sided)
    if isinstance(phi, SampledPath) and taus.size:
        need_hi = float(base_times[-1] + taus[-1])
        if not phi.covers(base_times[0], need_hi):
            raise CoverageError(
                "trajectory covers [%g, %g] but the scan needs [%g, %g]"
                % (phi.grid.t0, phi.grid.t_end, base_times[0], need_hi))
    sups = _sup_diffs_over_taus(phi, taus, base_times)
    members = sups < epsilon
    i_min = int(np.argmin(sups)) if sups.size else 0
    return ShiftSet(
        epsilon=float(epsilon), window_T=float(window_T),
        tau_range=(float(tau_range[0]), float(tau_range[1])), tau_step=float(tau_step),
        shifts=taus[members], member_sups=sups[members],
        one_sided=one_sided, samples_per_unit=samples_per_unit,
        min_sup=float(sups[i_min]) if sups.size else float("inf"),
        argmin_tau=float(taus[i_min]) if sups.size else float("nan"),
    )


def inclusion_length(ss: ShiftSet) -> Optional[float]:
    """Smallest l such that every length-l subinterval of the scanned range
    contains a detected shift: the maximum gap between consecutive shifts,
    range endpoints included.  ``None`` when the set is empty or the gap
    equals the whole range (no relative density evidence).
    """
    lo, hi = ss.tau_range
    if len(ss) == 0:
        return None
    pts = np.concatenate([[lo], ss.shifts, [hi]])
    l = float(np.diff(pts).max())
    if l >= (hi - lo) * (1.0 - 1e-12):
        return None
    return l


@dataclass
class ReturnTimes:
    """Poisson return times of a signal, detected in the truncated
    compact-open metric (levels 1..n_max)."""

    epsilon: float
    window_T: float
    horizon: float
    tau_step: float
    times: np.ndarray
    distances: np.ndarray
    one_sided: bool = False
    samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.distances = np.asarray(self.distances, dtype=float)
        if self.times.size and np.any(np.diff(self.times) <= 0):
            raise ValueError("return times must be strictly increasing")

    def __len__(self):
        return int(self.times.size)


def poisson_return_times(phi, epsilon, window_T, horizon,
                         tau_step: float = 0.25,
                         samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT,
                         tau_min: float = 1.0) -> ReturnTimes:
    """All grid times t_n <= horizon whose translate is epsilon-close to
    ``phi`` in the truncated compact-open metric.

    The metric is truncated at ``n_max = round(window_T)`` levels; level n
    takes its maximum over ``|t| <= n`` (one-sided ``[t0, t0 + 2n]`` for
    forward-only trajectories).  Candidates start at ``tau_min`` (the trivial
    near-zero cluster is not a return) and must be aligned with the sampling
    grid: ``tau_step * samples_per_unit`` has to be a whole number, so that
    translated values are exact grid lookups rather than interpolation.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n_max = int(round(window_T))
    if n_max < 1 or abs(n_max - window_T) > 1e-9:
        raise ValueError("window_T must be a positive integer level count")
    if horizon <= window_T:
        raise ValueError("horizon must exceed window_T")
    steps_per_tau = tau_step * samples_per_unit
    if abs(steps_per_tau - round(steps_per_tau)) > 1e-9 or round(steps_per_tau) < 1:
        raise ValueError("tau_step must be a positive multiple of 1/samples_per_unit")
    steps_per_tau = int(round(steps_per_tau))

    one_sided = _is_forward_only(phi)
    h = 1.0 / samples_per_unit
    w = n_max * samples_per_unit  # grid points per half-window
    if one_sided:
        t_lo = phi.grid.t0
        hi_needed = t_lo + 2.0 * n_max + horizon
        if not phi.covers(t_lo, hi_needed):
            raise CoverageError(
                "trajectory covers [%g, %g] but return scan needs [%g, %g]"
                % (phi.grid.t0, phi.grid.t_end, t_lo, hi_needed))
        m_total = int(round((hi_needed - t_lo) / h))
        master_times = t_lo + h * np.arange(m_total + 1)
        base_lo = 0
    else:
        t_lo = -float(n_max)
        hi_needed = horizon + n_max
        m_total = int(round((hi_needed - t_lo) / h))
        master_times = t_lo + h * np.arange(m_total + 1)
        base_lo = 0
    master = np.asarray(_values_at(phi, master_times), dtype=float)
    vector = master.ndim == 2

    k_min = max(1, int(math.ceil(tau_min / tau_step - 1e-9)))
    k_max = int(math.floor(horizon / tau_step * (1.0 + 1e-12)))
    win_len = 2 * w + 1
    cands, dists = [], []
    for k in range(k_min, k_max + 1):
        off = k * steps_per_tau
        if base_lo + off + win_len > master.shape[0]:
            break
        d = master[base_lo + off: base_lo + off + win_len] - master[base_lo: base_lo + win_len]
        d = np.sqrt(np.sum(d * d, axis=-1)) if vector else np.abs(d)
        total = 0.0
        for n in range(1, n_max + 1):
            dn = float(d[: 2 * n * samples_per_unit + 1].max()) if one_sided \
                else float(d[w - n * samples_per_unit: w + n * samples_per_unit + 1].max())
            total += 0.5 ** n * dn / (1.0 + dn)
        if total < epsilon:
            cands.append(k * tau_step)
            dists.append(total)
    return ReturnTimes(
        epsilon=float(epsilon), window_T=float(window_T), horizon=float(horizon),
        tau_step=float(tau_step), times=np.array(cands), distances=np.array(dists),
        one_sided=one_sided, samples_per_unit=samples_per_unit,
    )


def boundedness_scan(phi, horizons: Sequence[float],
                     samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT) -> List[Tuple[float, float]]:
    """Grid maximum of |phi| over [0, H] for each horizon H (ascending).

    The estimates are monotone nondecreasing across horizons by construction
    (nested prefixes of one master grid).
    """
    horizons = sorted(float(H) for H in horizons)
    if not horizons or horizons[0] <= 0:
        raise ValueError("horizons must be positive")
    h = 1.0 / samples_per_unit
    out = []
    running = 0.0
    t_prev = 0.0
    for H in horizons:
        n0 = int(round(t_prev / h))
        n1 = int(round(H / h))
        for j0 in range(n0, n1 + 1, 1 << 20):
            j1 = min(j0 + (1 << 20), n1 + 1)
            times = h * np.arange(j0, j1)
            vals = np.asarray(_values_at(phi, times), dtype=float)
            mag = np.sqrt(np.sum(vals * vals, axis=-1)) if vals.ndim == 2 else np.abs(vals)
            if mag.size:
                running = max(running, float(mag.max()))
        out.append((H, running))
        t_prev = H
    return out


@dataclass
class EquicontinuityProbe:
    """Empirical equicontinuity modulus of a family of hull samples."""

    epsilon: float
    delta_ladder: Tuple[float, ...]
    window_T: float
    horizon: float
    t_step: float
    max_after: Dict[float, float]      # delta -> worst post-translation distance
    pair_counts: Dict[float, int]
    empirical_delta: Optional[float]   # largest ladder delta with max_after <= epsilon
    passed: bool


def equicontinuity_probe(hull_samples: Sequence, delta_ladder: Sequence[float],
                         epsilon: float, window_T: float, horizon: float,
                         t_step: float = 1.0,
                         samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT) -> EquicontinuityProbe:
    """For each delta: the worst compact-open distance, after translation by
    every scanned t <= horizon, among sample pairs whose initial distance is
    below delta.  The empirical delta(epsilon) is the largest ladder entry
    whose worst case stays within epsilon; absence of such an entry is a
    probe failure (reported, not raised).
    """
    from .signals import translate, compact_open_distance
    if len(hull_samples) < 2:
        raise ValueError("equicontinuity probe needs at least 2 hull samples")
    params = CompactOpenMetricParams(n_max=int(round(window_T)), samples_per_unit=samples_per_unit)
    n = len(hull_samples)
    d0 = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d0[i, j] = compact_open_distance(hull_samples[i], hull_samples[j], params)
    ts = np.arange(0.0, horizon + 1e-9, t_step)
    ladder = tuple(sorted((float(d) for d in delta_ladder), reverse=True))
    max_after = {d: 0.0 for d in ladder}
    pair_counts = {d: 0 for d in ladder}
    for i in range(n):
        for j in range(i + 1, n):
            worst = 0.0
            for t in ts:
                dt_ij = compact_open_distance(
                    translate(hull_samples[i], float(t)),
                    translate(hull_samples[j], float(t)), params)
                worst = max(worst, dt_ij)
            for d in ladder:
                if d0[i, j] < d:
                    pair_counts[d] += 1
                    max_after[d] = max(max_after[d], worst)
    empirical = None
    for d in ladder:  # descending: first (largest) delta that works
        if pair_counts[d] > 0 and max_after[d] <= epsilon:
            empirical = d
            break
    return EquicontinuityProbe(
        epsilon=float(epsilon), delta_ladder=ladder, window_T=float(window_T),
        horizon=float(horizon), t_step=float(t_step),
        max_after=max_after, pair_counts=pair_counts,
        empirical_delta=empirical, passed=empirical is not None,
    )


@dataclass
class OmegaLimitSample:
    """Finite sample of an omega-limit set: representative states that were
    revisited (within epsilon) at strictly increasing post-burn-in times."""

    states: List[np.ndarray]
    return_times: List[np.ndarray]
    epsilon: float
    burn_in: float

    def __post_init__(self):
        for times in self.return_times:
            t = np.asarray(times)
            if t.size < 2:
                raise ValueError("each sampled state needs at least two visits")
            if np.any(np.diff(t) <= 0):
                raise ValueError("visit times must be strictly increasing")
            if float(t[0]) <= self.burn_in:
                raise ValueError("visit before burn-in")


def omega_limit_sample(traj: SampledPath, epsilon: float, burn_in: float) -> OmegaLimitSample:
    """Cluster post-burn-in samples into epsilon-balls by greedy first-fit in
    scan order; clusters visited at least twice form the omega-limit sample.

    Greedy first-fit is deterministic: each sample joins the earliest-created
    cluster whose representative (its first member) lies within epsilon.
    """
    duration = traj.grid.t_end - traj.grid.t0
    if duration <= 2.0 * burn_in:
        raise ValueError("trajectory duration %g too short for burn_in %g" % (duration, burn_in))
    times = traj.grid.times()
    keep = times > burn_in
    times = times[keep]
    vals = traj.values[keep]
    if vals.ndim == 1:
        vals = vals[:, None]
    reps: List[np.ndarray] = []
    visits: List[List[float]] = []
    for t, v in zip(times, vals):
        for ci, rep in enumerate(reps):
            if traj.state_norm(v, rep) < epsilon:
                visits[ci].append(float(t))
                break
        else:
            reps.append(v)
            visits.append([float(t)])
    states, rtimes = [], []
    for rep, vis in zip(reps, visits):
        if len(vis) >= 2:
            states.append(rep)
            rtimes.append(np.array(vis))
    return OmegaLimitSample(states=states, return_times=rtimes,
                            epsilon=float(epsilon), burn_in=float(burn_in))


@dataclass
class ClassifyParams:
    """Search parameters for :func:`classify`; all become report provenance."""

    window_T: float = 5.0
    tau_range: Tuple[float, float] = (0.0, 200.0)
    tau_step: float = 0.25
    samples_per_unit: int = DEFAULT_SAMPLES_PER_UNIT
    horizons: Tuple[float, ...] = (1e3, 1e4, 1e5)
    growth_factor: float = 1.5
    periodic_tol: float = 1e-8
    return_horizon: float = 1e3
    return_tau_step: float = 0.25
    return_tau_min: float = 1.0
    one_sided: Optional[bool] = None


@dataclass
class RecurrenceReport:
    """Classification verdict plus all the evidence that produced it."""

    classification: str
    inclusion_lengths: Dict[float, Optional[float]]
    boundedness: Dict[str, object]
    provenance: Dict[str, object]
    shift_sets: Dict[float, ShiftSet] = field(default_factory=dict)
    return_times: Dict[float, ReturnTimes] = field(default_factory=dict)
    equicontinuity_diag: Optional[EquicontinuityProbe] = None

    def __post_init__(self):
        if self.classification not in CLASSIFICATIONS:
            raise ValueError("unknown classification %r" % (self.classification,))

    def to_json_dict(self) -> dict:
        d = {
            "classification": self.classification,
            "inclusion_lengths": {
                "%.17g" % eps: (l if l is not None else NOT_FOUND)
                for eps, l in self.inclusion_lengths.items()
            },
            "boundedness": self.boundedness,
            "provenance": self.provenance,
            "shift_sets": {
                "%.17g" % eps: {
                    "taus": [float(x) for x in ss.shifts],
                    "windowed_sups": [float(x) for x in ss.member_sups],
                    "min_sup": ss.min_sup, "argmin_tau": ss.argmin_tau,
                    "one_sided": ss.one_sided,
                }
                for eps, ss in self.shift_sets.items()
            },
            "return_times": {
                "%.17g" % eps: {
                    "times": [float(x) for x in rt.times],
                    "distances": [float(x) for x in rt.distances],
                }
                for eps, rt in self.return_times.items()
            },
        }
        if self.equicontinuity_diag is not None:
            p = self.equicontinuity_diag
            d["equicontinuity"] = {
                "empirical_delta": p.empirical_delta, "passed": p.passed,
                "max_after": {"%.17g" % k: v for k, v in p.max_after.items()},
            }
        return d

    def to_text(self) -> str:
        lines = ["classification: %s" % self.classification]
        for eps in sorted(self.inclusion_lengths, reverse=True):
            l = self.inclusion_lengths[eps]
            shown = "%.17g" % l if l is not None else NOT_FOUND
            extra = ""
            if eps in self.return_times:
                extra = "  returns: %d" % len(self.return_times[eps])
            lines.append("  eps=%-12g l(eps)=%s%s" % (eps, shown, extra))
        b = self.boundedness
        lines.append("boundedness: sups %s over horizons %s (stable=%s, growth_factor=%s)"
                     % (b.get("sups"), b.get("horizons"), b.get("stable"), b.get("growth_factor")))
        if self.equicontinuity_diag is not None:
            lines.append("equicontinuity: passed=%s empirical_delta=%s"
                         % (self.equicontinuity_diag.passed, self.equicontinuity_diag.empirical_delta))
        return "\n".join(lines) + "\n"


def classify_from_evidence(inclusion_lengths: Dict[float, Optional[float]],
                           bounded_stable: bool,
                           min_sup: float,
                           returns_nonempty: bool,
                           periodic_tol: float = 1e-8,
                           equi_passed: Optional[bool] = None) -> str:
    """The invariant table shared by signal classification and the trajectory
    experiments.

    periodic                     an exact period was found on the tau grid
    recurrent_candidate          every ladder epsilon has a finite inclusion
                                 length and the range scan is stable
                                 (almost_periodic_candidate when an
                                 equicontinuity probe also passed)
    poisson_stable_positive_...  nonempty return-time sequence per epsilon;
                                 range may grow without bound
    unclassified                 none of the above
    """
    if min_sup < periodic_tol:
        return "periodic"
    all_finite = bool(inclusion_lengths) and all(l is not None for l in inclusion_lengths.values())
    if all_finite and bounded_stable:
        if equi_passed:
            return "almost_periodic_candidate"
        return "recurrent_candidate"
    if returns_nonempty:
        return "poisson_stable_positive_candidate"
    return "unclassified"


def classify(phi, eps_ladder: Sequence[float],
             params: ClassifyParams = ClassifyParams(),
             equicontinuity: Optional[EquicontinuityProbe] = None) -> RecurrenceReport:
    """Run shift-set + inclusion-length searches per ladder epsilon, a
    boundedness scan, and (if the recurrence evidence falls through) a
    return-time search; apply the classification table.

    ``eps_ladder`` must be strictly decreasing.  Never claims more than
    "candidate" status: all evidence is finite-horizon.
    """
    ladder = [float(e) for e in eps_ladder]
    if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps_ladder must be nonempty and strictly decreasing")
    sets: Dict[float, ShiftSet] = {}
    lengths: Dict[float, Optional[float]] = {}
    for eps in ladder:
        ss = shift_set(phi, eps, params.window_T, params.tau_range, params.tau_step,
                       params.samples_per_unit, params.one_sided)
        sets[eps] = ss
        lengths[eps] = inclusion_length(ss)
    scan = boundedness_scan(phi, params.horizons, params.samples_per_unit)
    sups = [s for _, s in scan]
    stable = bool(sups[-1] <= params.growth_factor * max(sups[0], 1e-300))
    boundedness = {
        "horizons": [H for H, _ in scan],
        "sups": sups,
        "growth_factor": params.growth_factor,
        "stable": stable,
    }
    min_sup = min(ss.min_sup for ss in sets.values())

    returns: Dict[float, ReturnTimes] = {}
    all_finite = all(l is not None for l in lengths.values())
    if not (min_sup < params.periodic_tol) and not (all_finite and stable):
        for eps in ladder:
            returns[eps] = poisson_return_times(
                phi, eps, params.window_T, params.return_horizon,
                params.return_tau_step, params.samples_per_unit, params.return_tau_min)
    returns_nonempty = bool(returns) and all(len(rt) > 0 for rt in returns.values())

    cls = classify_from_evidence(
        lengths, stable, min_sup, returns_nonempty,
        periodic_tol=params.periodic_tol,
        equi_passed=None if equicontinuity is None else equicontinuity.passed)
    provenance = {
        "eps_ladder": ladder,
        "window_T": params.window_T,
        "tau_range": list(params.tau_range),
        "tau_step": params.tau_step,
        "samples_per_unit": params.samples_per_unit,
        "horizons": list(params.horizons),
        "growth_factor": params.growth_factor,
        "periodic_tol": params.periodic_tol,
        "return_horizon": params.return_horizon,
        "return_tau_step": params.return_tau_step,
        "return_tau_min": params.return_tau_min,
        "min_sup": min_sup,
        "one_sided": sets[ladder[0]].one_sided,
    }
    return RecurrenceReport(
        classification=cls, inclusion_lengths=lengths, boundedness=boundedness,
        provenance=provenance, shift_sets=sets, return_times=returns,
        equicontinuity_diag=equicontinuity,
    )

"""Experiment configuration: TOML-style sectioned key-value files.

One file describes one experiment.  Validation is collecting, not
fail-fast: every problem in the file is reported in a single pass, each
message naming the offending key.  Unknown keys are rejected so typos cannot
silently fall back to defaults.  Exactly one signal-kind block may appear
under ``[signal]`` (or ``[forcing.temporal]``); two kinds at once is an
ambiguity error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

try:  # stdlib on 3.11+, tomli backport below
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

from .signals import AnalyticSignal

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "validate_config_dict"]

EXPERIMENTS = ("classify_signal", "solver_verify", "recurrent_search",
               "poisson_search", "cocycle_check")

SIGNAL_KIND_KEYS = ("constant", "periodic", "quasi_periodic", "poisson_example", "shifted")

_SIGNAL_PARAM_KEYS = {"amplitudes", "frequencies", "phase_offsets", "base_shift", "value", "scale"}

_SOLVER_KEYS = {"nu", "n", "dt", "t_end", "dealias", "first_step", "state_stride",
                "energy_ceiling", "probe_kmax", "probe_stride", "validate_every"}

_ANALYSIS_KEYS = {"eps_ladder", "window_T", "tau_range", "tau_step", "samples_per_unit",
                  "horizons", "growth_factor", "burn_in", "return_horizon",
                  "return_tau_step", "return_tau_min", "periodic_tol",
                  "temporal_bound", "enstrophy_ceiling", "base_tau_step", "base_spu"}

_COCYCLE_KEYS = {"t", "tau", "tol"}

_EXPERIMENT_KEYS = {"name", "output_dir", "seed"}

_FORCING_KEYS = {"mode", "amplitude", "temporal"}


class ConfigError(ValueError):
    """Raised with the full list of validation problems."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join("  - " + e for e in errors))


@dataclass
class ExperimentConfig:
    experiment: str
    output_dir: str = "runs"
    seed: int = 0
    signal: Optional[AnalyticSignal] = None
    signal_kind: Optional[str] = None
    forcing_mode: Optional[Tuple[int, int]] = None
    forcing_amplitude: Optional[Tuple[float, float]] = None
    forcing_signal: Optional[AnalyticSignal] = None
    solver: Dict[str, object] = field(default_factory=dict)
    analysis: Dict[str, object] = field(default_factory=dict)
    cocycle: Dict[str, float] = field(default_factory=dict)
    raw: Dict[str, object] = field(default_factory=dict)


def _build_signal(kind: str, params: dict, errors: List[str], where: str) -> Optional[AnalyticSignal]:
    unknown = set(params) - _SIGNAL_PARAM_KEYS
    for k in sorted(unknown):
        errors.append("%s.%s: unknown key %r" % (where, kind, k))
    try:
        if kind == "constant":
            return AnalyticSignal.constant(float(params.get("value", params.get("amplitudes", [0.0])[0] if isinstance(params.get("amplitudes"), list) else 0.0)))
        if kind == "poisson_example":
            return AnalyticSignal.poisson_example(float(params.get("scale", 1.0)))
        if kind == "shifted":
            return AnalyticSignal("shifted", amplitudes=(float(params.get("scale", 1.0)),),
                                  base_shift=float(params.get("base_shift", 0.0)))
        amps = [float(a) for a in params.get("amplitudes", [])]
        freqs = [float(f) for f in params.get("frequencies", [])]
        phases = [float(p) for p in params.get("phase_offsets", [])] or None
        if kind == "periodic":
            if len(amps) != 1 or len(freqs) != 1:
                errors.append("%s.periodic: needs exactly one amplitude and frequency" % where)
                return None
            return AnalyticSignal.periodic(amps[0], freqs[0], (phases or [0.0])[0])
        return AnalyticSignal.quasi_periodic(amps, freqs, phases)
    except (ValueError, TypeError, IndexError) as exc:
        errors.append("%s.%s: %s" % (where, kind, exc))
        return None


def _pick_kind_block(section: dict, errors: List[str], where: str):
    kinds = [k for k in section if k in SIGNAL_KIND_KEYS]
    other = [k for k in section if k not in SIGNAL_KIND_KEYS]
    for k in sorted(other):
        errors.append("%s: unknown key %r" % (where, k))
    if not kinds:
        errors.append("%s: exactly one signal kind block required, found none" % where)
        return None, None
    if len(kinds) > 1:
        errors.append("%s: ambiguous - multiple kind blocks %s" % (where, sorted(kinds)))
        return None, None
    kind = kinds[0]
    return kind, section[kind]


def _check_positive(val, key, errors, allow_zero=False):
    try:
        v = float(val)
    except (TypeError, ValueError):
        errors.append("%s: expected a number, got %r" % (key, val))
        return None
    if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        errors.append("%s: must be positive, got %r" % (key, val))
        return None
    return v


def validate_config_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed TOML tree, collecting every error before raising."""
    errors: List[str] = []
    top_unknown = set(data) - {"experiment", "signal", "forcing", "solver", "analysis", "cocycle"}
    for k in sorted(top_unknown):
        errors.append("unknown top-level section %r" % k)

    exp = data.get("experiment", {})
    if not isinstance(exp, dict):
        errors.append("experiment: must be a section")
        exp = {}
    for k in sorted(set(exp) - _EXPERIMENT_KEYS):
        errors.append("experiment: unknown key %r" % k)
    name = exp.get("name")
    if name not in EXPERIMENTS:
        errors.append("experiment.name: unknown experiment %r (expected one of %s)"
                      % (name, ", ".join(EXPERIMENTS)))
    cfg = ExperimentConfig(experiment=name if name in EXPERIMENTS else "classify_signal",
                           output_dir=str(exp.get("output_dir", "runs")),
                           seed=int(exp.get("seed", 0)), raw=data)

    if "signal" in data:
        kind, params = _pick_kind_block(data["signal"], errors, "signal")
        if kind is not None:
            cfg.signal_kind = kind
            cfg.signal = _build_signal(kind, params, errors, "signal")

    if "forcing" in data:
        fsec = data["forcing"]
        for k in sorted(set(fsec) - _FORCING_KEYS):
            errors.append("forcing: unknown key %r" % k)
        mode = fsec.get("mode")
        if mode is None or not (isinstance(mode, list) and len(mode) == 2):
            errors.append("forcing.mode: expected [kx, ky]")
        else:
            cfg.forcing_mode = (int(mode[0]), int(mode[1]))
            if cfg.forcing_mode == (0, 0):
                errors.append("forcing.mode: the mean mode cannot be forced")
        if "amplitude" in fsec:
            amp = fsec["amplitude"]
            if not (isinstance(amp, list) and len(amp) == 2):
                errors.append("forcing.amplitude: expected [ax, ay]")
            else:
                cfg.forcing_amplitude = (float(amp[0]), float(amp[1]))
        tsec = fsec.get("temporal")
        if tsec is None:
            errors.append("forcing.temporal: missing temporal signal section")
        else:
            kind, params = _pick_kind_block(tsec, errors, "forcing.temporal")
            if kind is not None:
                cfg.forcing_signal = _build_signal(kind, params, errors, "forcing.temporal")

    if "solver" in data:
        ssec = data["solver"]
        for k in sorted(set(ssec) - _SOLVER_KEYS):
            errors.append("solver: unknown key %r" % k)
        for key in ("nu", "dt", "t_end"):
            if key in ssec:
                v = _check_positive(ssec[key], "solver." + key, errors)
                if v is not None:
                    cfg.solver[key] = v
        if "n" in ssec:
            n = ssec["n"]
            if not isinstance(n, int) or n < 4 or n & (n - 1):
                errors.append("solver.n: must be a power-of-2 integer >= 4, got %r" % (n,))
            else:
                cfg.solver["n"] = n
        for key in ("dealias",):
            if key in ssec:
                cfg.solver[key] = bool(ssec[key])
        if "first_step" in ssec:
            if ssec["first_step"] not in ("heun", "euler"):
                errors.append("solver.first_step: must be 'heun' or 'euler'")
            else:
                cfg.solver["first_step"] = ssec["first_step"]
        for key in ("state_stride", "probe_kmax", "probe_stride", "validate_every"):
            if key in ssec:
                v = ssec[key]
                if not isinstance(v, int) or v < 0:
                    errors.append("solver.%s: must be a nonnegative integer" % key)
                else:
                    cfg.solver[key] = v
        if "energy_ceiling" in ssec:
            v = _check_positive(ssec["energy_ceiling"], "solver.energy_ceiling", errors)
            if v is not None:
                cfg.solver["energy_ceiling"] = v

    if "analysis" in data:
        asec = data["analysis"]
        for k in sorted(set(asec) - _ANALYSIS_KEYS):
            errors.append("analysis: unknown key %r" % k)
        if "eps_ladder" in asec:
            ladder = asec["eps_ladder"]
            ok = isinstance(ladder, list) and len(ladder) > 0
            if ok:
                try:
                    ladder = [float(e) for e in ladder]
                    ok = all(e > 0 for e in ladder) and \
                        all(b < a for a, b in zip(ladder, ladder[1:]))
                except (TypeError, ValueError):
                    ok = False
            if not ok:
                errors.append("analysis.eps_ladder: must be a nonempty strictly decreasing "
                              "list of positive numbers")
            else:
                cfg.analysis["eps_ladder"] = ladder
        for key in ("window_T", "tau_step", "growth_factor", "return_horizon",
                    "return_tau_step", "return_tau_min", "periodic_tol",
                    "temporal_bound", "enstrophy_ceiling", "base_tau_step"):
            if key in asec:
                v = _check_positive(asec[key], "analysis." + key, errors)
                if v is not None:
                    cfg.analysis[key] = v
        if "burn_in" in asec:
            v = _check_positive(asec["burn_in"], "analysis.burn_in", errors, allow_zero=True)
            if v is not None:
                cfg.analysis["burn_in"] = v
        for key in ("samples_per_unit", "base_spu"):
            if key in asec:
                v = asec[key]
                if not isinstance(v, int) or v < 1:
                    errors.append("analysis.%s: must be a positive integer" % key)
                else:
                    cfg.analysis[key] = v
        if "tau_range" in asec:
            tr = asec["tau_range"]
            if not (isinstance(tr, list) and len(tr) == 2 and float(tr[0]) < float(tr[1])):
                errors.append("analysis.tau_range: expected [tau_min, tau_max] with tau_min < tau_max")
            else:
                cfg.analysis["tau_range"] = (float(tr[0]), float(tr[1]))
        if "horizons" in asec:
            hz = asec["horizons"]
            ok = isinstance(hz, list) and len(hz) > 0
            if ok:
                try:
                    hz = [float(h) for h in hz]
                    ok = all(h > 0 for h in hz) and all(a < b for a, b in zip(hz, hz[1:]))
                except (TypeError, ValueError):
                    ok = False
            if not ok:
                errors.append("analysis.horizons: must be a strictly increasing list of "
                              "positive numbers")
            else:
                cfg.analysis["horizons"] = hz

    if "cocycle" in data:
        csec = data["cocycle"]
        for k in sorted(set(csec) - _COCYCLE_KEYS):
            errors.append("cocycle: unknown key %r" % k)
        for key in ("t", "tau", "tol"):
            if key in csec:
                v = _check_positive(csec[key], "cocycle." + key, errors, allow_zero=(key == "tau"))
                if v is not None:
                    cfg.cocycle[key] = v

    # experiment-specific requirements
    if name == "classify_signal" and cfg.signal is None:
        errors.append("classify_signal: a [signal.<kind>] block is required")
    if name in ("recurrent_search", "poisson_search", "cocycle_check", "solver_verify"):
        if "solver" not in data:
            errors.append("%s: a [solver] section is required" % name)
        else:
            req = ("nu", "n", "dt", "t_end") if name.endswith("_search") else ("nu", "n", "dt")
            for key in req:
                if key not in cfg.solver:
                    errors.append("solver.%s: required for %s" % (key, name))
    if name in ("recurrent_search", "poisson_search", "cocycle_check"):
        if cfg.forcing_signal is None and not any(
                e.startswith("forcing") for e in errors):
            errors.append("%s: a [forcing] section with a temporal signal is required" % name)
    if name in ("recurrent_search", "poisson_search"):
        if "eps_ladder" not in cfg.analysis:
            errors.append("%s: analysis.eps_ladder is required" % name)
    if name == "recurrent_search" and cfg.forcing_signal is not None:
        if cfg.forcing_signal.kind not in ("constant", "periodic", "quasi_periodic"):
            errors.append("recurrent_search: forcing must be periodic or quasi-periodic, got %r"
                          % cfg.forcing_signal.kind)
    if name == "poisson_search" and cfg.forcing_signal is not None:
        if cfg.forcing_signal.kind not in ("poisson_example", "shifted"):
            errors.append("poisson_search: forcing must be a poisson kind, got %r"
                          % cfg.forcing_signal.kind)
    if name == "cocycle_check" and "cocycle" not in data:
        errors.append("cocycle_check: a [cocycle] section with t and tau is required")

    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Read and validate an experiment config file.

    Raises ``FileNotFoundError`` for a missing file, ``ConfigError`` carrying
    the complete list of validation problems otherwise.
    """
    with open(path, "rb") as fh:
        data = _toml.load(fh)
    return validate_config_dict(data)

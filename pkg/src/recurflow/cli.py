"""Command-line front end.

Subcommands:

``run <config>... [--output-dir D] [--dry-run] [--jobs N]``
    Execute the experiment(s) described by TOML config files.  Every run
    writes its numeric artifacts first and a ``manifest.json`` last, so a
    manifest's existence certifies a complete run; an aborted run leaves a
    ``<dir>/.partial`` marker instead.

``plot <manifest>``
    Re-derive plot-ready CSV series (energy traces, shift scatters,
    inclusion-length curves, return-time ladders) from a finished run.

``verify <manifest>``
    Recompute artifact checksums against the manifest; exit status reports
    integrity.

Numeric artifacts are byte-deterministic: floats are printed with 17
significant digits (round-trip exact) and no timing or host information is
embedded.  Wall-clock time lives only in the manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, parse_config
from .recurrence import ClassifyParams, classify
from .signals import AnalyticSignal
from .nse2d import (ForcingField, SolverConfig, energy,
                    kolmogorov_field, random_divfree_field, solve,
                    save_trajectory, SpectralField, _wavenumbers)
from .skewprod import (HullElement, cocycle_check, poisson_stable_solution_search,
                       recurrent_solution_search)

__all__ = ["main"]

_F = "%.17g"


def _fmt(x) -> str:
    """17-significant-digit float formatting (round-trip exact for doubles)."""
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return _F % x
    raise TypeError(type(x))


def dumps_17g(obj, indent=0) -> str:
    """Serialize to JSON with deterministic key order and %.17g floats.

    The stdlib encoder prints floats via repr (shortest round-trip); here the
    fixed 17-digit form is used so the byte stream is pinned independent of
    repr heuristics.  Non-finite floats become the strings "nan"/"inf".
    """
    pad = " " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps_17g(v, indent + 1) for v in obj]
        if not items:
            return "[]"
        inner = ",\n".join(" " * (indent + 1) + s for s in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        items = []
        for k in obj:  # insertion order: reports build keys deterministically
            items.append(" " * (indent + 1) + json.dumps(str(k)) + ": "
                         + dumps_17g(obj[k], indent + 1))
        if not items:
            return "{}"
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError("cannot serialize %r" % type(obj))


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_text(path, text) -> str:
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _write_csv(path, header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(_F % float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return _write_text(path, "\n".join(lines) + "\n")


class RunContext:
    """Tracks artifacts written by one experiment run."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.artifacts = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add(self, path):
        if isinstance(path, (list, tuple)):
            self.artifacts.extend(path)
        else:
            self.artifacts.append(path)

    def write_json(self, name, obj):
        p = _write_text(self.path(name), dumps_17g(obj) + "\n")
        self.add(p)
        return p

    def write_csv(self, name, header, rows):
        p = _write_csv(self.path(name), header, rows)
        self.add(p)
        return p

    def write_txt(self, name, text):
        p = _write_text(self.path(name), text)
        self.add(p)
        return p


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

def _analysis_params(cfg: ExperimentConfig) -> ClassifyParams:
    a = cfg.analysis
    kw = {}
    for key in ("window_T", "tau_range", "tau_step", "samples_per_unit", "horizons",
                "growth_factor", "periodic_tol", "return_horizon",
                "return_tau_step", "return_tau_min"):
        if key in a:
            kw[key] = tuple(a[key]) if isinstance(a[key], list) else a[key]
    return ClassifyParams(**kw)


def _emit_recurrence_report(ctx: RunContext, report) -> None:
    ctx.write_json("report.json", report.to_json_dict())
    ctx.write_txt("report.txt", report.to_text())
    for i, (eps, ss) in enumerate(sorted(report.shift_sets.items(), reverse=True)):
        rows = list(zip(ss.shifts, ss.member_sups))
        ctx.write_csv("shifts_eps%d.csv" % i, ["tau", "windowed_sup"], rows)
    for i, (eps, rt) in enumerate(sorted(report.return_times.items(), reverse=True)):
        rows = [(t,) for t in rt.times]
        ctx.write_csv("returns_eps%d.csv" % i, ["tau"], rows)


def run_classify_signal(cfg: ExperimentConfig, ctx: RunContext) -> dict:
    params = _analysis_params(cfg)
    ladder = tuple(cfg.analysis.get("eps_ladder", (0.1, 0.05, 0.02)))
    report = classify(cfg.signal, ladder, params)
    _emit_recurrence_report(ctx, report)
    return {"classification": report.classification}


def run_solver_verify(cfg: ExperimentConfig, ctx: RunContext) -> dict:
    """Deterministic solver shakedown: exact decay, invariant preservation,
    and an energy-balance consistency check."""
    nu = cfg.solver.get("nu", 1.0)
    n = cfg.solver.get("n", 32)
    dt = cfg.solver.get("dt", 1e-3)
    t_end = cfg.solver.get("t_end", 1.0)
    checks = {}

    # 1. Kolmogorov decay: single shear mode, nonlinear term vanishes on it,
    #    diffusion is handled exactly by the integrating factor.
    u0 = kolmogorov_field(n, amplitude=1.0, wavenumber=2)
    steps = int(round(t_end / dt))
    scfg = SolverConfig(nu=nu, n=n, dt=dt, t_end=t_end, state_stride=steps)
    traj = solve(u0, None, scfg)
    e_exact = energy(u0) * math.exp(-2.0 * nu * 4.0 * t_end)
    e_num = energy(traj.states[-1])
    decay_err = abs(e_num - e_exact) / e_exact
    checks["kolmogorov_decay_rel_error"] = decay_err
    checks["kolmogorov_decay_pass"] = bool(decay_err < 1e-6)
    rows = list(zip(traj.energy_t, traj.energy_v, traj.enstrophy_v))
    ctx.write_csv("energy_decay.csv", ["t", "energy", "enstrophy"], rows)

    # 2. Invariants on a forced random divergence-free field after 50 steps.
    rng = np.random.default_rng(cfg.seed)
    w = random_divfree_field(n, rng, kmax=max(2, n // 4), scale=0.5)
    fcg = ForcingField.single_mode(n, (1, 1), AnalyticSignal.periodic(0.5, 1.0))
    scfg2 = SolverConfig(nu=nu, n=n, dt=dt, t_end=50 * dt, state_stride=50)
    traj2 = solve(w, fcg, scfg2)
    final = traj2.states[-1]
    kx, ky, _ = _wavenumbers(n)
    c = final.coeffs
    scale = float(np.abs(c).max()) or 1.0
    mirror = np.roll(np.roll(np.conj(c[:, ::-1, ::-1]), 1, axis=1), 1, axis=2)
    checks["invariants_mean"] = float(np.abs(c[:, 0, 0]).max()) / scale
    checks["invariants_divergence"] = float(np.abs(kx * c[0] + ky * c[1]).max()) / scale
    checks["invariants_hermitian"] = float(np.abs(c - mirror).max()) / scale
    try:
        final.validate(tol=1e-10)
        checks["invariants_pass"] = True
    except ValueError:
        checks["invariants_pass"] = False

    # 3. Energy balance: dE/dt = -2 nu * enstrophy for the unforced flow; the
    #    discrete one-step residual should shrink like O(dt^2).
    resids = []
    for d in (dt, dt / 2):
        scfg3 = SolverConfig(nu=nu, n=n, dt=d, t_end=2 * d, state_stride=1,
                             first_step="heun")
        tr = solve(w, None, scfg3)
        e0, e1 = tr.energy_v[1], tr.energy_v[2]
        ens_mid = 0.5 * (tr.enstrophy_v[1] + tr.enstrophy_v[2])
        resids.append(abs((e1 - e0) / d + 2.0 * nu * ens_mid))
    checks["energy_balance_residual_dt"] = resids[0]
    checks["energy_balance_residual_dt_half"] = resids[1]
    ratio = resids[0] / resids[1] if resids[1] > 0 else float("inf")
    checks["energy_balance_ratio"] = ratio
    checks["energy_balance_pass"] = bool(ratio > 1.9 or resids[0] < 1e-12)

    checks["all_pass"] = bool(checks["kolmogorov_decay_pass"]
                              and checks["invariants_pass"]
                              and checks["energy_balance_pass"])
    ctx.write_json("report.json", checks)
    lines = ["solver verification"]
    for k, v in checks.items():
        lines.append("  %-36s %s" % (k, (_F % v) if isinstance(v, float) else v))
    ctx.write_txt("report.txt", "\n".join(lines) + "\n")
    return {"all_pass": checks["all_pass"]}


def _forcing_from_config(cfg: ExperimentConfig) -> ForcingField:
    n = cfg.solver["n"]
    amp = None
    if cfg.forcing_amplitude is not None:
        amp = np.array(cfg.forcing_amplitude, dtype=np.complex128)
    return ForcingField.single_mode(n, cfg.forcing_mode, cfg.forcing_signal, amp=amp)


def _solver_config(cfg: ExperimentConfig, **overrides) -> SolverConfig:
    kw = dict(cfg.solver)
    kw.update(overrides)
    if "state_stride" not in kw:
        # default for long runs: keep only the first and last full state
        kw["state_stride"] = int(round(kw["t_end"] / kw["dt"]))
    return SolverConfig(**kw)


def _emit_search_result(ctx: RunContext, result, save_states: bool) -> dict:
    report = result.report
    ctx.write_json("report.json", report.to_json_dict())
    ctx.write_txt("report.txt", report.to_text())
    ladder = sorted(result.joint_sets, reverse=True)
    for i, eps in enumerate(ladder):
        taus = result.base_returns[eps].times
        sups = result.fiber_sups[eps]
        joint = set(result.joint_sets[eps].shifts.tolist())
        rows = [(t, s, int(t in joint)) for t, s in zip(taus, sups)]
        ctx.write_csv("joint_eps%d.csv" % i, ["tau", "fiber_windowed_sup", "joint_member"], rows)
    tr = result.trajectory
    rows = list(zip(tr.energy_t, tr.energy_v, tr.enstrophy_v, tr.forcing_v))
    ctx.write_csv("energy.csv", ["t", "energy", "enstrophy", "forcing_norm"], rows)
    if save_states and len(tr.states) > 0:
        man = save_trajectory(tr, ctx.out_dir, prefix="trajectory")
        ctx.add([ctx.path(name) for name in man["files"]])
        ctx.add(ctx.path("trajectory_manifest.json"))
    return {"classification": report.classification}


def _zero_field(n: int) -> SpectralField:
    return SpectralField(n, np.zeros((2, n, n), dtype=np.complex128))


def run_recurrent_search(cfg: ExperimentConfig, ctx: RunContext) -> dict:
    forcing = _forcing_from_config(cfg)
    scfg = _solver_config(cfg)
    a = cfg.analysis
    u0 = _zero_field(cfg.solver["n"])
    result = recurrent_solution_search(
        forcing, u0, scfg, eps_ladder=tuple(a["eps_ladder"]),
        burn_in=a.get("burn_in", 10.0), window_T=a.get("window_T", 5.0),
        tau_step=a.get("tau_step", 0.02), base_spu=a.get("base_spu", 50),
        periodic_tol=a.get("periodic_tol", 1e-8))
    return _emit_search_result(ctx, result, save_states=cfg.solver.get("state_stride", 0) > 0)


def run_poisson_search(cfg: ExperimentConfig, ctx: RunContext) -> dict:
    forcing = _forcing_from_config(cfg)
    scfg = _solver_config(cfg)
    a = cfg.analysis
    u0 = _zero_field(cfg.solver["n"])
    result = poisson_stable_solution_search(
        forcing, u0, scfg, eps_ladder=tuple(a["eps_ladder"]),
        burn_in=a.get("burn_in", 10.0), window_T=a.get("window_T", 5.0),
        tau_step=a.get("tau_step", 0.25), base_spu=a.get("base_spu", 64),
        temporal_bound=a.get("temporal_bound", 1e4),
        enstrophy_ceiling=a.get("enstrophy_ceiling"))
    return _emit_search_result(ctx, result, save_states=cfg.solver.get("state_stride", 0) > 0)


def run_cocycle_check(cfg: ExperimentConfig, ctx: RunContext) -> dict:
    n = cfg.solver["n"]
    forcing = _forcing_from_config(cfg)
    omega0 = HullElement.from_forcing(forcing)
    rng = np.random.default_rng(cfg.seed)
    u0 = random_divfree_field(n, rng, kmax=max(2, n // 4), scale=0.5)
    scfg = _solver_config(cfg, t_end=cfg.cocycle["t"] + cfg.cocycle["tau"], state_stride=1)
    rep = cocycle_check(u0, omega0, cfg.cocycle["t"], cfg.cocycle["tau"], scfg,
                        tol=cfg.cocycle.get("tol", 1e-8))
    out = {"fiber_discrepancy": rep.fiber_discrepancy,
           "base_discrepancy": rep.base_discrepancy,
           "t": rep.t, "tau": rep.tau, "passed": bool(rep.passed)}
    ctx.write_json("report.json", out)
    ctx.write_txt("report.txt",
                  "cocycle property at t=%s tau=%s\n  fiber discrepancy %s\n"
                  "  base discrepancy  %s\n  %s\n"
                  % (_F % rep.t, _F % rep.tau, _F % rep.fiber_discrepancy,
                     _F % rep.base_discrepancy, "PASS" if rep.passed else "FAIL"))
    return out


_RUNNERS = {"classify_signal": run_classify_signal,
            "solver_verify": run_solver_verify,
            "recurrent_search": run_recurrent_search,
            "poisson_search": run_poisson_search,
            "cocycle_check": run_cocycle_check}


def run_one(config_path: str, output_dir=None, dry_run=False) -> str:
    """Run a single experiment config; returns the manifest path ('' if dry)."""
    cfg = parse_config(config_path)
    out_dir = output_dir or cfg.output_dir
    if dry_run:
        print("dry-run: %s -> %s (output %s)" % (config_path, cfg.experiment, out_dir))
        return ""
    ctx = RunContext(out_dir)
    marker = ctx.path(".partial")
    _write_text(marker, "run in progress: %s\n" % config_path)
    t0 = time.monotonic()
    try:
        summary = _RUNNERS[cfg.experiment](cfg, ctx)
    except Exception:
        # leave the marker behind: the directory holds an incomplete run
        raise
    wall = time.monotonic() - t0
    manifest = {
        "package": "recurflow",
        "version": __version__,
        "experiment": cfg.experiment,
        "config_path": os.path.abspath(config_path),
        "config": cfg.raw,
        "summary": summary,
        "artifacts": {os.path.basename(p): _sha256(p) for p in sorted(ctx.artifacts)},
        "wall_clock_seconds": wall,
        "versions": {"python": sys.version.split()[0],
                     "numpy": np.__version__},
    }
    mpath = ctx.path("manifest.json")
    _write_text(mpath, dumps_17g(manifest) + "\n")
    os.remove(marker)
    print("run complete: %s (%s) -> %s" % (cfg.experiment,
                                           summary.get("classification",
                                                       summary.get("passed",
                                                                   summary.get("all_pass", ""))),
                                           mpath))
    return mpath


def cmd_run(args) -> int:
    jobs = max(1, args.jobs)
    if jobs > 1 and len(args.config) > 1 and not args.dry_run:
        if args.output_dir and len(args.config) > 1:
            print("error: --output-dir with multiple configs would collide", file=sys.stderr)
            return 2
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(run_one, c, args.output_dir, False) for c in args.config]
            rc = 0
            for c, f in zip(args.config, futs):
                try:
                    f.result()
                except Exception as exc:
                    print("error: %s: %s" % (c, exc), file=sys.stderr)
                    rc = 1
            return rc
    rc = 0
    for c in args.config:
        try:
            run_one(c, args.output_dir, args.dry_run)
        except (ConfigError, FileNotFoundError) as exc:
            print("error: %s: %s" % (c, exc), file=sys.stderr)
            rc = 2
        except Exception as exc:
            print("error: %s: %s: %s" % (c, type(exc).__name__, exc), file=sys.stderr)
            rc = 1
    return rc


def cmd_plot(args) -> int:
    mpath = args.manifest
    try:
        with open(mpath) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        # no manifest means the run never completed; nothing trustworthy to plot
        print("error: manifest not found (incomplete run?): %s" % mpath, file=sys.stderr)
        return 2
    out_dir = os.path.dirname(os.path.abspath(mpath))

    def emit(name, header, rows):
        p = os.path.join(out_dir, name)
        _write_csv(p, header, rows)
        print("wrote %s" % p)

    wrote = 0
    for art in manifest.get("artifacts", {}):
        path = os.path.join(out_dir, art)
        if art in ("energy.csv", "energy_decay.csv") and os.path.exists(path):
            with open(path) as fh:
                lines = fh.read().strip().split("\n")
            rows = [ln.split(",")[:2] for ln in lines[1:]]
            emit("plot_energy_vs_t.csv", ["t", "energy"], rows)
            wrote += 1
        if art.startswith(("shifts_eps", "joint_eps")) and os.path.exists(path):
            with open(path) as fh:
                lines = fh.read().strip().split("\n")
            rows = [ln.split(",")[:2] for ln in lines[1:]]
            emit("plot_%s" % art.replace(".csv", "_scatter.csv"),
                 ["tau", "windowed_sup"], rows)
            wrote += 1
    rpath = os.path.join(out_dir, "report.json")
    if os.path.exists(rpath):
        with open(rpath) as fh:
            report = json.load(fh)
        incl = report.get("inclusion_lengths")
        if incl:
            rows = [(k, "" if v is None or isinstance(v, str) else v)
                    for k, v in sorted(incl.items(), key=lambda kv: -float(kv[0]))]
            emit("plot_inclusion_length_vs_eps.csv", ["epsilon", "inclusion_length"], rows)
            wrote += 1
        rts = report.get("return_times")
        if rts:
            rows = []
            for eps in sorted(rts, key=lambda e: -float(e)):
                for t in rts[eps].get("times", []):
                    rows.append((eps, t))
            emit("plot_return_times_ladder.csv", ["epsilon", "tau"], rows)
            wrote += 1
    if wrote == 0:
        print("no plottable artifacts found in manifest", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    mpath = args.manifest
    try:
        with open(mpath) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        print("error: manifest not found: %s" % mpath, file=sys.stderr)
        return 2
    out_dir = os.path.dirname(os.path.abspath(mpath))
    bad = []
    for name, digest in sorted(manifest.get("artifacts", {}).items()):
        path = os.path.join(out_dir, name)
        if not os.path.exists(path):
            bad.append("%s: missing" % name)
        elif _sha256(path) != digest:
            bad.append("%s: checksum mismatch" % name)
    if bad:
        for b in bad:
            print("FAIL %s" % b)
        return 1
    print("OK %d artifacts verified" % len(manifest.get("artifacts", {})))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="recurflow",
                                 description="recurrence analysis for nonautonomously "
                                             "forced 2-D incompressible flow")
    ap.add_argument("--version", action="version", version="recurflow " + __version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute experiment configs")
    p_run.add_argument("config", nargs="+", help="TOML experiment description(s)")
    p_run.add_argument("--output-dir", default=None, help="override the config's output dir")
    p_run.add_argument("--dry-run", action="store_true",
                       help="validate configs and print the plan without running")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers for many configs")
    p_run.set_defaults(func=cmd_run)

    p_plot = sub.add_parser("plot", help="emit plot-ready CSV series from a finished run")
    p_plot.add_argument("manifest", help="path to a run manifest.json")
    p_plot.set_defaults(func=cmd_plot)

    p_ver = sub.add_parser("verify", help="check artifact checksums against a manifest")
    p_ver.add_argument("manifest", help="path to a run manifest.json")
    p_ver.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

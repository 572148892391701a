"""Command-line front end.

    dampedwave <subcommand> --config run.toml [--out DIR] [--threads K]

Every subcommand writes ``summary.json`` (inputs, key outputs, built-in
checks and a sha256 manifest of the other files) plus its CSVs into the
output directory.  Exit status: 0 success, 2 a built-in check failed,
1 error.
"""
import argparse
from dataclasses import replace
import hashlib
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from .blowup import lifespan_sweep
from .config import EXPERIMENTS, parse_config
from .diagnostics import (alpha, fill_deviations, fit_series, lq_norm,
                          mass_functional)
from .errors import DampedWaveError, DivergentIntegral
from .evolve import data_mass, picard_solve, run
from .moduli import derivative_ratio, dini_integral, eval_mu, is_dini, psi
from .spectral import inverse_transform, save_field


class Artifacts:
    """Collects the files written for one experiment."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []

    def path(self, name):
        self.files.append(name)
        return self.dir / name

    def manifest(self):
        out = []
        for name in sorted(self.files):
            digest = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
            out.append({"file": name, "sha256": digest})
        return out


def _clean(v):
    # JSON has no inf/nan; floats are written as repr-exact numbers
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _write_summary(art, cfg, outputs, checks, status, error=None):
    summary = {
        "experiment": cfg.experiment,
        "status": status,
        "inputs": cfg.echo(),
        "outputs": outputs,
        "checks": checks,
        "manifest": art.manifest(),
    }
    if error is not None:
        summary["error"] = error
    if "dini" in outputs:
        summary["dini"] = outputs["dini"]
    with open(art.dir / "summary.json", "w", newline="\n") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- experiments ------------------------------------------------------------

def _dini_check(cfg, art, threads):
    spec = cfg.mu
    out = {"family": spec.family, "param": spec.param, "s0": spec.s0,
           "dini": is_dini(spec)}
    try:
        out["dini_integral"] = dini_integral(spec, cfg.dini_eps0)
    except DivergentIntegral:
        out["dini_integral"] = None
    s_grid = np.geomspace(1e-12, 0.999 * spec.s0, 1000)
    out["derivative_ratio"] = derivative_ratio(spec, s_grid)

    s = np.linspace(0.0, 1.0, 1001)
    mu = eval_mu(spec, s)
    slopes = np.diff(mu) / np.diff(s)
    R = np.geomspace(1.0, 1e6, 25)
    P = np.array([psi(spec, r, cfg.C, cfg.grid.n) for r in R])
    with open(art.path("psi.csv"), "w", newline="\n") as fh:
        fh.write("R,Psi\n")
        for r, p in zip(R, P):
            fh.write("%.17g,%.17g\n" % (r, p))
    checks = {
        "mu_nondecreasing": bool(np.all(slopes >= -1e-12)),
        "mu_concave": bool(np.all(np.diff(slopes) <= 1e-9 * max(1.0, np.abs(slopes).max()))),
        "psi_increasing": bool(np.all(np.diff(P) > 0)),
        "derivative_ratio_finite": math.isfinite(out["derivative_ratio"]),
    }
    return out, checks


def _simulate(cfg, art, threads):
    res = run(cfg.solver, cfg.mu, cfg.grid)
    res.series.to_csv(art.path("norms.csv"))
    if cfg.snapshot:
        u = inverse_transform(res.state.u_hat, cfg.grid)
        save_field(art.path("final.dwlf"), cfg.grid, res.state.t, u)
    out = {"status": res.status, "t_final": res.state.t, "t_detect": res.t_detect,
           "samples": len(res.series)}
    finite = all(np.all(np.isfinite(res.series.column(c))) for c in ("L2", "Linf", "H2dot"))
    return out, {"finite_norms": bool(finite)}


def _decay_targets(n):
    a = alpha(n)
    return {"Linf": -n / 2, "Lalpha": -n / 2 * (1 - 1 / a), "H2dot": -(n / 4 + 1)}


def _decay_sweep(cfg, art, threads):
    eps_list = cfg.sweep_eps or (cfg.solver.eps,)
    targets = _decay_targets(cfg.grid.n)
    dini = is_dini(cfg.mu)
    rows, checks, blown = [], {}, []
    for eps in eps_list:
        sc = replace(cfg.solver, eps=eps)
        res = run(sc, cfg.mu, cfg.grid)
        if res.blown_up:
            blown.append(eps)
            continue
        for which, target in targets.items():
            fit = fit_series(res.series, which, cfg.t_window)
            rows.append((eps, which, fit.slope, fit.intercept, fit.r2, target))
            if dini and which != "H2dot":
                checks[f"slope_{which}_eps{eps:g}"] = abs(fit.slope - target) <= cfg.decay_tol
    with open(art.path("decay.csv"), "w", newline="\n") as fh:
        fh.write("eps,norm,slope,intercept,r2,target\n")
        for eps, which, sl, ic, r2, tg in rows:
            fh.write("%.17g,%s,%.17g,%.17g,%.17g,%.17g\n" % (eps, which, sl, ic, r2, tg))
    checks["no_blowup"] = not blown or not dini
    out = {"targets": targets, "blown_up_eps": blown,
           "fits": [{"eps": r[0], "norm": r[1], "slope": r[2], "r2": r[4]} for r in rows]}
    return out, checks


def _profile_check(cfg, art, threads):
    t1, t2 = cfg.profile_times
    sc = cfg.solver
    times = sorted(set(sc.sample_times) | {t1, t2})
    sc = replace(sc, sample_times=tuple(times))
    grid = cfg.grid
    res = run(sc, cfg.mu, grid, keep_states=True)
    if res.blown_up:
        raise DampedWaveError(f"run blew up at t={res.t_detect:g}; no profile to compare")
    mass = mass_functional(res.series, data_mass(sc, grid))
    fill_deviations(res.series, res.states, grid, mass.M)
    res.series.to_csv(art.path("norms.csv"))

    def at(t):
        i = int(np.argmin(np.abs(res.series.t - t)))
        return res.series.samples[i]

    early, late = at(t1), at(t2)
    out = {"M": mass.M, "tail_increment": mass.tail_increment,
           "t_early": early.t, "t_late": late.t, "ratios": {}}
    checks = {}
    for c in ("devLalpha", "devLinf", "devH2"):
        r = getattr(late, c) / getattr(early, c)
        out["ratios"][c] = r
        checks[f"{c}_ratio"] = r <= cfg.profile_ratio
    return out, checks


def _lifespan_sweep(cfg, art, threads):
    tab = lifespan_sweep(cfg.solver, cfg.mu, cfg.grid, cfg.sweep_eps,
                         threads=threads, C=cfg.C)
    tab.to_csv(art.path("lifespan.csv"))
    fit = tab.fit_record()
    with open(art.path("fit.json"), "w", newline="\n") as fh:
        json.dump(_clean(fit), fh, indent=2, sort_keys=True)
        fh.write("\n")
    out = {"fit": fit, "rows": [{"eps": r.eps, "T": r.T, "PsiT": r.PsiT} for r in tab.rows]}
    checks = {"monotone": tab.is_monotone(), "slope_positive": tab.fit.slope > 0,
              "r2": tab.fit.r2 >= cfg.sweep_r2_min}
    return out, checks


def _picard_demo(cfg, art, threads):
    grid = cfg.grid
    sc = replace(cfg.solver, sample_times=())
    rep = picard_solve(sc, cfg.mu, grid, cfg.picard_J)
    res = run(sc, cfg.mu, grid)
    with open(art.path("picard.csv"), "w", newline="\n") as fh:
        fh.write("j,x_norm,y_diff,ratio\n")
        for j, (x, y) in enumerate(zip(rep.x_norms, rep.y_diffs), start=1):
            r = rep.ratios[j - 2] if j >= 2 else math.nan
            fh.write("%d,%.17g,%.17g,%.17g\n" % (j, x, y, r))
    out = {"ratios": rep.ratios, "x_norms": rep.x_norms, "y_diffs": rep.y_diffs,
           "run_status": res.status}
    checks = {"ratios": all(r <= cfg.picard_ratio_max for r in rep.ratios)}
    if not res.blown_up:
        a = inverse_transform(rep.final_u_hat, grid)
        b = inverse_transform(res.state.u_hat, grid)
        nb = lq_norm(b, grid, 2)
        rel = lq_norm(a - b, grid, 2) / nb if nb > 0 else lq_norm(a, grid, 2)
        out["relative_l2_vs_run"] = rel
        checks["agreement"] = rel <= cfg.picard_agreement
    else:
        checks["agreement"] = False
    return out, checks


EXPERIMENT_FUNCS = {
    "dini-check": _dini_check,
    "simulate": _simulate,
    "decay-sweep": _decay_sweep,
    "profile-check": _profile_check,
    "lifespan-sweep": _lifespan_sweep,
    "picard-demo": _picard_demo,
}


def dispatch(cfg, out_dir=None, threads=1):
    """Run one experiment and write its artifacts; returns the exit status."""
    art = Artifacts(out_dir or cfg.out_dir)
    try:
        outputs, checks = EXPERIMENT_FUNCS[cfg.experiment](cfg, art, threads)
    except (DampedWaveError, OSError) as exc:
        _write_summary(art, cfg, {}, {}, "error", f"{type(exc).__name__}: {exc}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    checks = {k: bool(v) for k, v in checks.items()}
    ok = all(checks.values())
    _write_summary(art, cfg, outputs, checks, "ok" if ok else "check-failed")
    for name, passed in sorted(checks.items()):
        print(f"{'PASS' if passed else 'FAIL'} {name}")
    print(f"wrote {len(art.files) + 1} files to {art.dir}")
    return 0 if ok else 2


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("DWL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"warning: ignoring DWL_THREADS={env!r}", file=sys.stderr)
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dampedwave",
        description="Pseudospectral experiments for the semilinear damped wave equation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML experiment file")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for sweeps (default: $DWL_THREADS or 1)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, experiment=args.command)
    except DampedWaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    threads = _threads(args.threads)
    if threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    return dispatch(cfg, args.out, threads)


if __name__ == "__main__":
    sys.exit(main())

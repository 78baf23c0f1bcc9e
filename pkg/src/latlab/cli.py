"""Command line front end: ``latlab <command> --spec FILE [options]``.

Exit codes: 0 success, 1 a conformance check failed, 2 unknown command or
bad usage, 3 malformed or missing spec, 4 conflicting or invalid scale flags.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus
from .caps import lemma1_check
from .counting import as_rational, default_threads, remainder
from .domain import SpecError, cone_axes, load_spec, predicted_exponents, volume
from .fourier import axis_asymptotics, cone_directions, decay_check
from .poisson import sandwich_check
from .remainder import compare_to_bound, fit_growth_exponent, omega_scan, omega_windows, scale_grid, sweep_remainder
from .report import write_report

COMMANDS = ("validate", "volume", "count", "sweep", "fit", "fourier-decay", "axis-asym", "caps-check", "poisson-check", "full-report")

# per-command defaults: (t_min, t_max, t_steps, tol)
DEFAULTS = {
    "sweep": (1, 100, 50, None),
    "fit": (2, 200, 200, 0.15),
    "fourier-decay": (1, 1000, 30, 0.05),
    "axis-asym": (5, 200, 30, 0.1),
    "caps-check": (10, 10000, 10, 0.05),
}


class ConfigError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    spec_path: str
    spec: object = None
    t: object = None
    t_min: object = None
    t_max: object = None
    t_steps: int = None
    axis: int = None
    seed: int = 0
    threads: int = 1
    tol: float = None
    out: str = None
    format: str = None

    def grid(self):
        lo, hi, steps, _ = DEFAULTS.get(self.command, (1, 100, 50, None))
        lo = self.t_min if self.t_min is not None else as_rational(lo)
        hi = self.t_max if self.t_max is not None else as_rational(hi)
        return scale_grid(lo, hi, self.t_steps or steps)

    def tolerance(self):
        if self.tol is not None:
            return self.tol
        return DEFAULTS.get(self.command, (None,) * 4)[3]


def build_parser():
    p = argparse.ArgumentParser(prog="latlab", description="Lattice points in block domains of finite type.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", help="spec JSON file, or the name of a bundled corpus spec")
    p.add_argument("--config", help="JSON file with default values for any of these options")
    p.add_argument("--t", help="single scale (decimal or p/q)")
    p.add_argument("--t-min", dest="t_min")
    p.add_argument("--t-max", dest="t_max")
    p.add_argument("--t-steps", dest="t_steps", type=int)
    p.add_argument("--axis", type=int, help="coordinate index, counted from 0")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    return p


def _resolve_spec(path):
    if path is None:
        raise ConfigError("no spec given (use --spec FILE)", 3)
    p = Path(path)
    try:
        if p.exists():
            return load_spec(p)
        if str(path) in corpus.NAMES:
            return corpus.load(str(path))
        raise ConfigError(f"spec file not found: {path}", 3)
    except SpecError as exc:
        where = f" (field {exc.field}, index {exc.index})" if exc.index is not None else ""
        raise ConfigError(f"malformed spec {path}: {exc}{where}", 3) from None
    except (json.JSONDecodeError, UnicodeDecodeError, OSError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed spec {path}: {exc}", 3) from None


def _rational(name, value):
    try:
        t = as_rational(str(value))
    except Exception:
        raise ConfigError(f"--{name.replace('_', '-')} must be a positive rational, got {value!r}", 4) from None
    if t <= 0:
        raise ConfigError(f"--{name.replace('_', '-')} must be positive, got {value!r}", 4)
    return t


def load_config(argv=None):
    """Parse flags, merge an optional config file underneath, and validate."""
    args = build_parser().parse_args(argv)
    merged = {}
    if args.config:
        try:
            merged.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}", 2) from None
        merged = {k.replace("-", "_"): v for k, v in merged.items()}
    for key, val in vars(args).items():
        if key not in ("command", "config") and val is not None:
            merged[key] = val

    if merged.get("t") is not None and any(merged.get(k) is not None for k in ("t_min", "t_max", "t_steps")):
        raise ConfigError("--t conflicts with --t-min/--t-max/--t-steps", 4)
    cfg = RunConfig(command=args.command, spec_path=merged.get("spec"))
    for key in ("t", "t_min", "t_max"):
        if merged.get(key) is not None:
            setattr(cfg, key, _rational(key, merged[key]))
    if cfg.t_min is not None and cfg.t_max is not None and cfg.t_min >= cfg.t_max:
        raise ConfigError("--t-min must be below --t-max", 4)
    if merged.get("t_steps") is not None:
        cfg.t_steps = int(merged["t_steps"])
        if cfg.t_steps < 2:
            raise ConfigError("--t-steps must be at least 2", 4)
    cfg.axis = merged.get("axis")
    cfg.seed = int(merged.get("seed", 0))
    cfg.threads = int(merged.get("threads") or default_threads())
    if cfg.threads < 1:
        raise ConfigError("--threads must be at least 1", 2)
    cfg.tol = merged.get("tol")
    cfg.out = merged.get("out")
    cfg.format = merged.get("format")
    cfg.spec = _resolve_spec(cfg.spec_path)
    if cfg.axis is not None and not 0 <= cfg.axis < cfg.spec.d:
        raise ConfigError(f"--axis must lie in 0..{cfg.spec.d - 1}", 2)
    return cfg


def _axes(cfg):
    return [cfg.axis] if cfg.axis is not None else cone_axes(cfg.spec)


# -- commands -----------------------------------------------------------------


def cmd_validate(cfg, emit):
    spec = cfg.spec
    rep = predicted_exponents(spec)
    tab = spec.table
    doc = {
        "spec": spec.to_json(),
        "m": tab.m_jl.tolist(),
        "nu": [str(v) for v in tab.nu],
        "eta": list(tab.eta),
        "omega_max": rep.omega_max,
        "simplified": rep.simplified,
        "overall": rep.overall,
        "terms": [{"axis": t.axis, "subset": list(t.subset), "exponent": t.exponent} for t in rep.terms()],
    }
    emit(doc, "json", "validate.json")
    print(f"valid: d={spec.d} blocks={[list(b) for b in spec.blocks]} ms={list(spec.ms)} predicted exponent {rep.overall:.4f}")
    return 0


def cmd_volume(cfg, emit):
    v = volume(cfg.spec)
    emit({"volume": v}, "json", "volume.json")
    print(f"{v:.6f}")
    return 0


def cmd_count(cfg, emit):
    if cfg.t is None:
        raise ConfigError("count needs --t", 4)
    res = remainder(cfg.spec, cfg.t, threads=cfg.threads)
    emit({"t": res.t, "count": res.count, "volume_term": res.volume_term, "remainder": res.remainder}, "json", "count.json")
    print(res.count)
    return 0


def _sweep_rows(cfg):
    grid = [cfg.t] if cfg.t is not None else cfg.grid()
    return sweep_remainder(cfg.spec, grid, threads=cfg.threads)


def cmd_sweep(cfg, emit):
    rows = _sweep_rows(cfg)
    emit(rows, "csv", "sweep.csv")
    worst = max(abs(r.normalized) for r in rows)
    print(f"{len(rows)} scales from {float(rows[0].t):g} to {float(rows[-1].t):g}, max |R|/t^theta = {worst:.4g}")
    return 0


def cmd_fit(cfg, emit):
    rows = _sweep_rows(cfg)
    rep = predicted_exponents(cfg.spec)
    fit = fit_growth_exponent(rows, rep.overall)
    verdict = compare_to_bound(fit, rep, tol=cfg.tolerance())
    doc = {
        "fitted_exponent": fit.fitted_exponent,
        "intercept": fit.intercept,
        "window": list(fit.window),
        "predicted": rep.overall,
        "tol": cfg.tolerance(),
        **verdict.to_json(),
    }
    emit(doc, "json", "fit.json")
    word = "PASS" if verdict.passed else "FAIL"
    rel = "<=" if verdict.passed else ">"
    print(f"fitted {fit.fitted_exponent:.2f} {rel} predicted {rep.overall:.2f} (+{cfg.tolerance():g}) {word}")
    return 0 if verdict.passed else 1


def cmd_fourier_decay(cfg, emit):
    t_grid = np.array([float(t) for t in cfg.grid()])
    rows, ok, worst = [], True, -np.inf
    for j in _axes(cfg):
        dirs = cone_directions(cfg.spec, j, count=12, seed=cfg.seed)
        res = decay_check(cfg.spec, j, dirs, t_grid, tol=cfg.tolerance(), threads=cfg.threads)
        ok &= res["pass"]
        worst = max(worst, res["max_slope"])
        rows += [{"axis": j, **r} for r in res["rows"]]
    emit(rows, "csv", "fourier_decay.csv")
    print(f"max top-decade slope {worst:.4f} (limit {cfg.tolerance():g}) {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_axis_asym(cfg, emit):
    t_grid = np.array([float(t) for t in cfg.grid()])
    fits, ok = [], True
    for j in _axes(cfg):
        fit = axis_asymptotics(cfg.spec, j, t_grid)
        good = abs(fit.fitted_exponent - fit.predicted_exponent) <= cfg.tolerance() and abs(fit.zero_spacing - 0.5) <= 0.01
        ok &= good
        fits.append({**fit.to_json(), "pass": good})
        print(
            f"axis {j}: fitted {fit.fitted_exponent:.3f} vs {fit.predicted_exponent:.3f}, "
            f"zero spacing {fit.zero_spacing:.4f}, phase offset {fit.phase_offset:.3g} {'PASS' if good else 'FAIL'}"
        )
    emit(fits if len(fits) > 1 else fits[0], "json", "axis_asym.json")
    return 0 if ok else 1


def cmd_caps_check(cfg, emit):
    t_grid = np.array([float(t) for t in cfg.grid()])
    rows, ok, worst = [], True, -np.inf
    for j in _axes(cfg):
        dirs = cone_directions(cfg.spec, j, count=6, seed=cfg.seed)
        res = lemma1_check(cfg.spec, j, dirs, t_grid, threads=cfg.threads, tol=cfg.tolerance())
        ok &= res["pass"]
        worst = max(worst, res["max_slope"])
        for r in res["rows"]:
            rows.append({k: r[k] for k in ("xi", "t", "delta", "extents", "measure", "bound", "ratio")} | {"axis": j})
    emit(rows, "csv", "caps.csv")
    print(f"max top-decade slope {worst:.4f} (limit {cfg.tolerance():g}) {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_poisson_check(cfg, emit):
    ts = [cfg.t] if cfg.t is not None else [as_rational(v) for v in (2, 3, 4)]
    out, ok = [], True
    for t in ts:
        v = sandwich_check(cfg.spec, float(t), poisson_eps=1.0, threads=cfg.threads)
        ok &= v.passed
        out.append(v.to_json())
        print(
            f"t={float(t):g}: {v.rhs_minus:.4f} <= {v.exact} <= {v.rhs_plus:.4f}, "
            f"poisson gap {v.poisson_gap:.2e} (allowed {v.tolerance:.2e}) {'PASS' if v.passed else 'FAIL'}"
        )
    emit(out if len(out) > 1 else out[0], "json", "poisson.json")
    return 0 if ok else 1


def cmd_full_report(cfg, emit):
    """Every check at its default size, one file per check under ``--out``."""
    import copy

    status = {}
    plan = [("validate", cmd_validate), ("volume", cmd_volume), ("sweep", cmd_sweep), ("fit", cmd_fit)]
    plan += [("fourier-decay", cmd_fourier_decay), ("axis-asym", cmd_axis_asym), ("caps-check", cmd_caps_check)]
    if cfg.spec.d == 3:
        plan.append(("poisson-check", cmd_poisson_check))
    for name, fn in plan:
        sub = copy.copy(cfg)
        sub.command = name
        sub.tol = None
        sub.t = sub.t_min = sub.t_max = sub.t_steps = None
        print(f"[{name}] ", end="")
        status[name] = fn(sub, emit) == 0
    if cfg.spec.d == 3:
        ev = omega_scan(cfg.spec, 0, omega_windows(50, 5), threads=cfg.threads)
        emit({"axis": ev.axis, "exponent": ev.exponent, "windows": ev.windows, "window_sups": ev.window_sups, "evidence": ev.evidence, "conclusive": ev.conclusive}, "json", "omega.json")
        print(f"[omega] evidence {ev.evidence:.4g} over windows in [50, 60)")
    emit({"checks": status, "pass": all(status.values())}, "json", "summary.json")
    print("full report " + ("PASS" if all(status.values()) else "FAIL"))
    return 0 if all(status.values()) else 1


HANDLERS = {
    "validate": cmd_validate,
    "volume": cmd_volume,
    "count": cmd_count,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "fourier-decay": cmd_fourier_decay,
    "axis-asym": cmd_axis_asym,
    "caps-check": cmd_caps_check,
    "poisson-check": cmd_poisson_check,
    "full-report": cmd_full_report,
}


def run_command(cfg):
    if cfg.command == "full-report":
        if cfg.out is None:
            raise ConfigError("full-report needs --out DIR", 2)

        def emit(rows, fmt, name):
            write_report(rows, fmt, Path(cfg.out) / name)
    else:

        def emit(rows, fmt, name):
            if cfg.out is not None:
                write_report(rows, cfg.format or fmt, cfg.out)

    return HANDLERS[cfg.command](cfg, emit)


def main(argv=None):
    try:
        cfg = load_config(argv)
        return run_command(cfg)
    except ConfigError as exc:
        print(f"latlab: error: {exc}", file=sys.stderr)
        return exc.code
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"latlab: error: {exc}", file=sys.stderr)
        return 2

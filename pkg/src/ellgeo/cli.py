"""Command-line driver.

    ellgeo integrate --config run.json --out results/
    ellgeo verify    --config run.json --seed 42
    ellgeo bvp       --config bvp.json
    ellgeo sample    --config run.json

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
non-convergence, 4 integrator failure. ``GEO_LOG`` sets the log level
(error, info or debug).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import model
from .bvp import ShootingProblem, solve_geodesic_bvp
from .clebsch import clebsch_at_times, integrate_clebsch
from .conserved import (
    TrajectorySample,
    drift_report,
    generating_function,
    identity_residuals,
    uhlenbeck_integrals,
)
from .direct import integrate_direct
from .errors import ConfigError, GeodesicError, IntegrationError, NumericalFailure, ValidationError
from .ode import StepControl
from .poisson import (
    antisymmetry_check,
    generating_involution_check,
    hamiltonian_flow_check,
    involution_check,
    jacobi_check,
    random_points,
    uhlenbeck_observable,
    y_generator,
    l_generator,
    hamiltonian_observable,
    sample_spectral,
)

log = logging.getLogger("ellgeo")

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_INTEGRATOR = 0, 2, 3, 4

DEFAULT_BOUNDS = {
    "identity_force": 1e-12,
    "identity_energy": 1e-12,
    "identity_commutator": 1e-12,
    "involution_F": 1e-11,
    "involution_G": 1e-10,
    "antisymmetry": 1e-14,
    "jacobi": 1e-13,
    "hamiltonian_flow": 1e-12,
    "telescoping": 1e-13,
    "partial_fraction": 1e-11,
}

COMMON = {"n", "a", "seed", "tolerances", "out"}
ALLOWED = {
    "integrate": COMMON | {"x0", "y0", "speed", "method", "integrator", "t_end", "tau_end", "stride",
                           "project_every"},
    "verify": COMMON | {"samples", "lambda_pairs", "lambda_points", "bounds"},
    "bvp": COMMON | {"p", "q", "v0", "tol_endpoint", "max_iter", "integrator"},
    "sample": COMMON | {"speed"},
}
INTEGRATOR_KEYS = {"mode", "h", "rtol", "atol", "max_steps"}
TOLERANCE_KEYS = {"constraint", "identity", "eps_B"}


@dataclass
class RunConfig:
    n: int
    a: list
    x0: Optional[list] = None
    y0: Optional[list] = None
    speed: float = 1.0
    method: str = "direct"
    integrator: dict = field(default_factory=dict)
    t_end: Optional[float] = None
    tau_end: Optional[float] = None
    stride: Optional[float] = None
    project_every: int = 1
    seed: int = 0
    out: Optional[str] = None
    tolerances: dict = field(default_factory=dict)
    samples: int = 1000
    lambda_pairs: int = 20
    lambda_points: int = 100
    bounds: dict = field(default_factory=dict)
    p: Optional[list] = None
    q: Optional[list] = None
    v0: Optional[list] = None
    tol_endpoint: float = 1e-8
    max_iter: int = 100

    def step_control(self, **defaults) -> StepControl:
        opts = {**defaults, **self.integrator}
        return StepControl(**opts)

    @property
    def tol_constraint(self) -> float:
        return self.tolerances.get("constraint", model.TOL_CONSTRAINT)

    @property
    def eps_B(self) -> float:
        return self.tolerances.get("eps_B", model.EPS_B)


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def load_config(path: str, command: str) -> RunConfig:
    """Parse and validate a JSON config; errors carry ``path:line:`` prefixes."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be an object")

    def fail(key, msg):
        raise ConfigError(f"{path}:{_line_of(text, key)}: {key}: {msg}")

    for key in raw:
        if key not in ALLOWED[command]:
            fail(key, f"unknown field for '{command}'")
    for key in ("n", "a"):
        if key not in raw:
            raise ConfigError(f"{path}:1: missing required field '{key}'")

    n = raw["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        fail("n", "must be an integer >= 2")

    def vector(key):
        v = raw.get(key)
        if v is None:
            return None
        if not isinstance(v, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
            fail(key, "must be a list of numbers")
        if len(v) != n:
            fail(key, f"has {len(v)} entries, expected n={n}")
        return [float(c) for c in v]

    def number(key, positive=True):
        v = raw.get(key)
        if v is None:
            return None
        if not isinstance(v, (int, float)) or isinstance(v, bool) or (positive and not v > 0):
            fail(key, "must be a positive number" if positive else "must be a number")
        return v

    def integer(key, minimum):
        v = raw.get(key)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            fail(key, f"must be an integer >= {minimum}")
        return v

    def table(key, allowed):
        v = raw.get(key)
        if v is None:
            return {}
        if not isinstance(v, dict):
            fail(key, "must be an object")
        for sub, val in v.items():
            if sub not in allowed:
                fail(key, f"unknown entry '{sub}'")
            if sub != "mode" and (not isinstance(val, (int, float)) or isinstance(val, bool) or not val > 0):
                fail(key, f"entry '{sub}' must be a positive number")
        return dict(v)

    cfg = RunConfig(n=n, a=vector("a"))
    cfg.x0, cfg.y0 = vector("x0"), vector("y0")
    cfg.p, cfg.q, cfg.v0 = vector("p"), vector("q"), vector("v0")
    for key in ("speed", "t_end", "tau_end", "stride", "tol_endpoint"):
        val = number(key)
        if val is not None:
            setattr(cfg, key, float(val))
    for key, minimum in (("project_every", 1), ("seed", 0), ("samples", 1), ("lambda_pairs", 1),
                         ("lambda_points", 1), ("max_iter", 1)):
        val = integer(key, minimum)
        if val is not None:
            setattr(cfg, key, val)
    cfg.integrator = table("integrator", INTEGRATOR_KEYS)
    if "mode" in cfg.integrator and cfg.integrator["mode"] not in ("fixed", "adaptive"):
        fail("integrator", "mode must be 'fixed' or 'adaptive'")
    if "max_steps" in cfg.integrator:
        if not isinstance(cfg.integrator["max_steps"], int):
            fail("integrator", "max_steps must be an integer")
    cfg.tolerances = table("tolerances", TOLERANCE_KEYS)
    cfg.bounds = table("bounds", set(DEFAULT_BOUNDS))
    if "out" in raw:
        if not isinstance(raw["out"], str):
            fail("out", "must be a path string")
        cfg.out = raw["out"]
    if "method" in raw:
        if raw["method"] not in ("direct", "clebsch", "both"):
            fail("method", "must be 'direct', 'clebsch' or 'both'")
        cfg.method = raw["method"]

    if command == "integrate":
        if (cfg.x0 is None) != (cfg.y0 is None):
            fail("x0" if cfg.x0 is not None else "y0", "x0 and y0 must be given together")
        if cfg.method in ("direct", "both"):
            if cfg.t_end is None:
                raise ConfigError(f"{path}:{_line_of(text, 'method')}: method '{cfg.method}' needs t_end")
            if cfg.tau_end is not None:
                fail("tau_end", f"not used with method '{cfg.method}' (give t_end)")
        else:
            if cfg.tau_end is None:
                raise ConfigError(f"{path}:{_line_of(text, 'method')}: method 'clebsch' needs tau_end")
            if cfg.t_end is not None:
                fail("t_end", "not used with method 'clebsch' (give tau_end)")
    if command == "bvp":
        if cfg.p is None or cfg.q is None:
            raise ConfigError(f"{path}:1: bvp needs p and q")
        if cfg.p == cfg.q:
            fail("q", "p and q must differ")
    return cfg


# -- output -----------------------------------------------------------------

def _fmt(v) -> str:
    return "" if v is None else "%.17g" % v


def csv_header(n: int) -> list[str]:
    return (["t", "tau"] + [f"x_{j}" for j in range(1, n + 1)] + [f"y_{j}" for j in range(1, n + 1)]
            + ["H", "I"] + [f"F_{j}" for j in range(1, n + 1)] + ["q0_res", "tan_res"])


def write_csv(path: Path, samples: Sequence[TrajectorySample], n: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(n))
        for s in samples:
            inv = s.invariants
            F = inv.F if inv.F is not None else [None] * n
            w.writerow([_fmt(s.t), _fmt(s.tau)] + [_fmt(v) for v in s.x] + [_fmt(v) for v in s.y]
                       + [_fmt(inv.H_free), _fmt(inv.I)] + [_fmt(v) for v in F]
                       + [_fmt(inv.q0_residual), _fmt(inv.tangency_residual)])


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


PLOT_TEMPLATE = '''"""Plot {csv} (written by ellgeo)."""
import csv
import matplotlib.pyplot as plt

with open({csv!r}) as fh:
    rows = list(csv.DictReader(fh))
t = [float(r["t"]) for r in rows]
xs = sorted(k for k in rows[0] if k.startswith("x_"))
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
for k in xs:
    ax1.plot(t, [float(r[k]) for r in rows], label=k)
ax1.legend()
ax1.set_ylabel("position")
H0, I0 = float(rows[0]["H"]), float(rows[0]["I"])
ax2.semilogy(t, [abs(float(r["H"]) - H0) / H0 + 1e-17 for r in rows], label="H drift")
ax2.semilogy(t, [abs(float(r["I"]) - I0) / I0 + 1e-17 for r in rows], label="I drift")
ax2.legend()
ax2.set_xlabel("t")
plt.show()
'''


def emit_plot_script(csv_path: Path) -> Path:
    script = csv_path.with_name(f"plot_{csv_path.stem}.py")
    script.write_text(PLOT_TEMPLATE.format(csv=csv_path.name), encoding="utf-8")
    return script


# -- commands ---------------------------------------------------------------

def _ellipsoid(cfg: RunConfig) -> model.Ellipsoid:
    return model.validate_ellipsoid(cfg.a)


def _initial_state(cfg: RunConfig, e: model.Ellipsoid) -> model.PhaseState:
    if cfg.x0 is not None:
        s = model.phase_state(cfg.x0, cfg.y0)
        model.check_constraints(e, s, cfg.tol_constraint)
        return s
    return model.sample_state(e, np.random.default_rng(cfg.seed), cfg.speed)


def run_integrate(cfg: RunConfig, out: Path, plot: bool = False) -> dict:
    e = _ellipsoid(cfg)
    s0 = _initial_state(cfg, e)
    ctl = cfg.step_control()
    written = []
    result = {}
    if cfg.method in ("direct", "both"):
        stride = cfg.stride or cfg.t_end
        direct = integrate_direct(e, s0, cfg.t_end, ctl, cfg.project_every, stride, tol=cfg.tol_constraint)
        write_csv(out / "trajectory_direct.csv", direct, e.n)
        write_json(out / "drift_direct.json", drift_report(direct))
        written.append(out / "trajectory_direct.csv")
        result["direct"] = drift_report(direct)
    if cfg.method == "clebsch":
        stride = cfg.stride or cfg.tau_end
        cl = integrate_clebsch(e, s0, cfg.tau_end, ctl, stride, tol=cfg.tol_constraint, eps_B=cfg.eps_B)
    elif cfg.method == "both":
        cl = clebsch_at_times(e, s0, [s.t for s in direct], ctl, tol=cfg.tol_constraint, eps_B=cfg.eps_B)
        dev = max(float(np.max(np.abs(a.x - b.x))) for a, b in zip(direct, cl))
        comparison = {"matched_times": len(cl), "max_abs_x_deviation": dev, "t_end": cfg.t_end,
                      "tau_end": cl[-1].tau}
        write_json(out / "comparison.json", comparison)
        result["comparison"] = comparison
    if cfg.method in ("clebsch", "both"):
        write_csv(out / "trajectory_clebsch.csv", cl, e.n)
        write_json(out / "drift_clebsch.json", drift_report(cl))
        written.append(out / "trajectory_clebsch.csv")
        result["clebsch"] = drift_report(cl)
    if plot:
        for p in written:
            emit_plot_script(p)
    return result


def verify_report(cfg: RunConfig) -> dict:
    """Numerical checks of every identity, involution and bracket property."""
    e = _ellipsoid(cfg)
    e.require_distinct()
    rng = np.random.default_rng(cfg.seed)
    n = e.n
    N = cfg.samples
    report = {"a": list(e.a), "n": n, "seed": cfg.seed, "samples": N}

    worst = [0.0, 0.0, 0.0]
    for _ in range(N):
        r = identity_residuals(e, model.sample_state(e, rng), tol=cfg.tol_constraint)
        worst = [max(w, v) for w, v in zip(worst, (r.force, r.energy, r.commutator))]
    report["identity_force"], report["identity_energy"], report["identity_commutator"] = worst

    report["involution_F"] = involution_check(e, N, rng)
    report["involution_G"] = generating_involution_check(e, cfg.lambda_pairs, cfg.lambda_points, rng)
    report["hamiltonian_flow"] = hamiltonian_flow_check(e, N, rng)
    report["jacobi"] = jacobi_check(n, min(N, 200), rng)
    obs = ([y_generator(n, i) for i in range(n)]
           + [l_generator(n, i, j) for i in range(n) for j in range(i + 1, n)]
           + [uhlenbeck_observable(e, j) for j in range(n)] + [hamiltonian_observable(e)])
    report["antisymmetry"] = antisymmetry_check(obs, random_points(n, min(N, 100), rng), n)

    tele = pf = 0.0
    lams = sample_spectral(e, N, rng)
    for u, lam in zip(random_points(n, N, rng), lams):
        y, l = u[:n], u[n:]
        F = uhlenbeck_integrals(e, y, l)
        tele = max(tele, abs(np.sum(F) - np.dot(y, y)))
        pf = max(pf, abs(generating_function(e, y, l, lam) - np.sum(F / (e.a - lam))))
    report["telescoping"], report["partial_fraction"] = tele, pf

    bounds = {**DEFAULT_BOUNDS, **cfg.bounds}
    report["bounds"] = bounds
    report["pass"] = {k: bool(report[k] < b) for k, b in bounds.items()}
    report["all_pass"] = all(report["pass"].values())
    return report


def run_bvp(cfg: RunConfig, out: Path, plot: bool = False) -> dict:
    e = _ellipsoid(cfg)
    ctl = cfg.step_control(rtol=1e-12, atol=1e-14)
    prob = ShootingProblem(e, np.array(cfg.p), np.array(cfg.q), tol_endpoint=cfg.tol_endpoint,
                           max_iter=cfg.max_iter, v0=None if cfg.v0 is None else np.array(cfg.v0), ctl=ctl)
    sol = solve_geodesic_bvp(prob)
    result = {"v": list(sol.v), "T": sol.T, "iterations": sol.iterations, "miss": sol.miss,
              "drift": drift_report(sol.trajectory)}
    write_json(out / "bvp.json", result)
    write_csv(out / "bvp_trajectory.csv", sol.trajectory, e.n)
    if plot:
        emit_plot_script(out / "bvp_trajectory.csv")
    return result


def run_sample(cfg: RunConfig, out: Path) -> dict:
    e = _ellipsoid(cfg)
    s = model.sample_state(e, np.random.default_rng(cfg.seed), cfg.speed)
    q_res, t_res = model.constraint_residuals(e, s)
    result = {"seed": cfg.seed, "speed": cfg.speed, "x": list(s.x), "y": list(s.y),
              "q0_res": q_res, "tan_res": t_res, "I": model.joachimsthal(e, s)}
    write_json(out / "sample.json", result)
    return result


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellgeo", description="Geodesics on ellipsoids via the Clebsch system.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("integrate", "integrate a geodesic (direct, clebsch or both)"),
                        ("verify", "check identities, involutions and the Poisson structure"),
                        ("bvp", "solve a two-point geodesic problem by shooting"),
                        ("sample", "draw a random state on the tangent bundle")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", help="output directory (default: config 'out' or cwd)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--emit-plot-script", action="store_true", help="write a matplotlib script per CSV")
    return ap


def _setup_logging():
    level = os.environ.get("GEO_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    out = None
    try:
        cfg = load_config(args.config, args.command)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg.seed = args.seed
        out = Path(args.out or cfg.out or ".")
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "integrate":
            run_integrate(cfg, out, args.emit_plot_script)
        elif args.command == "verify":
            report = verify_report(cfg)
            write_json(out / "verify.json", report)
            if not report["all_pass"]:
                failed = [k for k, ok in report["pass"].items() if not ok]
                print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_NOCONV
        elif args.command == "bvp":
            run_bvp(cfg, out, args.emit_plot_script)
        else:
            run_sample(cfg, out)
    except (ValidationError, OSError) as exc:
        _report_error(args.command, out, exc)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        _report_error(args.command, out, exc)
        return EXIT_NOCONV
    except (IntegrationError, GeodesicError) as exc:
        _report_error(args.command, out, exc)
        return EXIT_INTEGRATOR
    return EXIT_OK


def _report_error(command: str, out: Optional[Path], exc: Exception) -> None:
    name = type(exc).__name__
    print(f"error: {name}: {exc}", file=sys.stderr)
    if out is not None and command == "verify":
        write_json(out / "verify.json", {"error": name, "message": str(exc)})


if __name__ == "__main__":
    sys.exit(main())

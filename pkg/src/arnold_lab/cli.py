"""Command-line frontend: every analysis as a config-driven run with JSON and CSV output.

Exit codes: 0 success, 1 usage error, 2 validation failure (bad input or a
failed verify suite), 3 numerical failure (non-convergence, blow-up).
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("profile", "hardy", "spectrum", "forms", "energy", "maximize", "evolve", "verify")
COMMON_KEYS = ("profile", "grid", "seed", "out")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    from .checks import _plain

    return _plain(v)


class Output:
    def __init__(self, out: str | None, command: str, args: dict):
        self.dir = Path(out) if out else None
        self.command = command
        self.args = args
        self.tables = {}

    def table(self, name: str, header, rows):
        self.tables[name] = csv_text(header, rows)

    def raw_table(self, name: str, text: str):
        self.tables[name] = text

    def finish(self, result: dict) -> dict:
        doc = {"command": self.command, "args": self.args, "result": _jsonable(result),
               "tables": sorted(self.tables),
               "metadata": {"version": __version__, "backend": _backend(),
                            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}}
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            for name, text in self.tables.items():
                (self.dir / f"{self.command}_{name}.csv").write_text(text)
            (self.dir / f"{self.command}.json").write_text(json.dumps(doc, indent=2, allow_nan=True))
        print(json.dumps(doc["result"], indent=2, allow_nan=True))
        return doc


def _backend() -> str:
    from ._kernels import backend

    return backend()


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    return cfg


def resolve_profile(args, cfg):
    from .profiles import make_profile, profile_from_config

    if args.profile is None and "profile" in cfg:
        return profile_from_config(cfg["profile"])
    kind = args.profile or "gaussian"
    if kind == "gaussian":
        return make_profile("gaussian")
    if kind in ("algebraic", "kappa"):
        kappa = args.kappa if args.kappa is not None else cfg.get("profile", {}).get("kappa")
        return make_profile("algebraic", kappa=kappa)
    raise ValueError(f"unknown profile {kind!r}; use gaussian or algebraic")


def resolve_grid(args, cfg, profile=None, default=None):
    """Grid from flags, then the config's grid block, then a profile-aware default."""
    from .grid import grid_from_config

    user = dict(cfg.get("grid", {}))
    if args.N is not None:
        user["N"] = args.N
    if args.rmax is not None:
        user["r_max"] = args.rmax
    if args.kmax is not None:
        user["K_max"] = args.kmax
    block = dict(default or {"N": 1025, "r_max": 20.0})
    if profile is not None and profile.kind != "gaussian" and "mapping" not in user:
        # algebraic tails need a geometric grid reaching far out
        block.update({"mapping": "log_r", "r_max": 1e3, "r_min": 1e-4})
    block.update(user)
    return grid_from_config(block)


def resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_profile(args, cfg, out):
    from .profiles import eval_gaussian_BW

    p = resolve_profile(args, cfg)
    g = resolve_grid(args, cfg, p, {"N": 401, "r_max": 20.0})
    r = g.nodes
    cols = {"r": r, "omega": p.omega_star(r), "A": p.weight_A(r), "V": p.potential_V(r)}
    if p.kind == "gaussian":
        B, W = eval_gaussian_BW(r)
        cols["B"], cols["W"] = B, W
    out.table("profile", list(cols), zip(*cols.values()))
    V = cols["V"]
    vsign = "positive" if np.all(V > 0) else "negative" if np.all(V < 0) else \
        "zero" if np.max(np.abs(V)) < 1e-10 else "mixed"
    mass = 2 * np.pi * g.integrate(cols["omega"])
    return {"profile": p.kind, "kappa": getattr(p, "kappa", None), "grid": g.to_json(),
            "mass_on_grid": mass, "V_sign": vsign}


def cmd_hardy(args, cfg, out):
    from .spectral import hardy_constant

    p = resolve_profile(args, cfg)
    g = resolve_grid(args, cfg, None, {"N": 2048, "r_max": 1e4, "mapping": "log_r", "r_min": 1e-4})
    rep = hardy_constant(p, g, nev=args.nev, check=not args.no_check)
    f = rep.eigenfunctions if rep.eigenfunctions.ndim == 2 else rep.eigenfunctions[:, None]
    out.table("eigenfunctions", ["r"] + [f"f{i}" for i in range(f.shape[1])],
              (np.concatenate([[ri], fi]) for ri, fi in zip(rep.r, f)))
    return {"profile": p.kind, **rep.to_json()}


def cmd_spectrum(args, cfg, out):
    from . import spectral

    p = resolve_profile(args, cfg)
    op = args.operator
    check = not args.no_check
    if op in ("lk", "l0gen", "quasimode", "delta"):
        g = resolve_grid(args, cfg, None, {"N": 1025, "r_max": 20.0})
    elif op == "btilde1" and p.kind != "gaussian":
        g = resolve_grid(args, cfg, None, {"N": 1024, "r_max": 100.0, "mapping": "log_r", "r_min": 1e-3})
    else:
        g = resolve_grid(args, cfg, p, {"N": 1024, "r_max": 20.0})
    if op == "btilde1":
        rep = spectral.btilde1_spectrum(p, g, nev=args.nev, check=check)
    elif op == "kernel":
        rep = spectral.kernel_index(p, g, nev=args.nev, check=check)
    elif op == "lk":
        rep = spectral.lk_spectrum(args.k, g, nev=args.nev, check=check)
    elif op == "l0gen":
        rep = spectral.l0_generalized(p, g, nev=args.nev, check=check)
    elif op == "quasimode":
        rep = spectral.quasimode_analysis(g)
    else:
        res = spectral.delta_chain(g)
        out.table("delta", ["key", "value"], sorted((k, v) for k, v in res.items() if np.isscalar(v)))
        return {"operator": "delta_chain", **res}
    ev = np.atleast_1d(rep.eigenvalues)
    out.table("eigenvalues", ["index", "eigenvalue"], enumerate(ev))
    return {"profile": p.kind, "grid": g.to_json(), **rep.to_json()}


def cmd_forms(args, cfg, out):
    from . import forms
    from .grid import CONSTRAINTS

    p = resolve_profile(args, cfg)
    g = resolve_grid(args, cfg, p, {"N": 1025, "r_max": 20.0})
    seed = resolve_seed(args, cfg)
    which = [w for w in (args.constraints or "").split(",") if w]
    for w in which:
        if w not in CONSTRAINTS:
            raise ValueError(f"unknown constraint {w!r}; choose from {CONSTRAINTS}")
    gauss = p.kind == "gaussian"
    rows = []
    for i, f in enumerate(forms.sample_fields(g, args.count, seed, which, p, radial=not args.nonradial, K=args.K)):
        x = forms.x_norm(f, p)
        Q = forms.q_form(f) if gauss else float("nan")
        rows.append((i, forms.j_form(f, p), Q, forms.n_form(f, p), x, forms.grad_norm(f, p)))
    out.table("forms", ["index", "J", "Q", "N", "xnorm", "gradnorm"], rows)
    arr = np.array(rows)
    est = forms.gamma_estimate(p, resolve_grid(args, cfg, p, {"N": 1024, "r_max": 20.0}))
    res = {"profile": p.kind, "count": args.count, "seed": seed, "constraints": which,
           "gamma": est.to_json(), "min_J_over_x": float(np.min(arr[:, 1] / arr[:, 4]))}
    if gauss:
        res["delta"] = forms.delta_estimate(g)
        res["min_Q_over_x"] = float(np.min(arr[:, 2] / arr[:, 4]))
    return res


def cmd_energy(args, cfg, out):
    from . import energy
    from .grid import PolarField

    p = resolve_profile(args, cfg)
    g = resolve_grid(args, cfg, p, {"N": 2048, "r_max": 30.0})
    w = p.omega_star(g.nodes)
    e_r = energy.energy_radial(w, g)
    e_m = energy.energy_modes(PolarField.radial(g, w, K=0))
    e_h = energy.energy_via_h(energy.ConstraintProfile.from_profile(p))
    psi = energy.stream_radial(w, g)
    out.table("stream", ["r", "omega", "psi", "m"], zip(g.nodes, w, psi, energy.cumulative_mass(w, g)))
    return {"profile": p.kind, "grid": g.to_json(), "E_radial": e_r, "E_modes": e_m, "E_via_h": e_h,
            "max_rel_diff": max(abs(e_r - e_h), abs(e_m - e_h)) / abs(e_h)}


def cmd_maximize(args, cfg, out):
    from . import energy
    from .spectral import NonConvergence

    kind = args.profile or cfg.get("profile", {}).get("kind", "gaussian")
    kappa = args.kappa if args.kappa is not None else cfg.get("profile", {}).get("kappa")
    if kind == "gaussian":
        ent = energy.entropy_catalog("gaussian")
        g = resolve_grid(args, cfg, None, {"N": 1024, "r_max": 30.0})
        M = args.mass if args.mass is not None else 4 * np.pi
    else:
        ent = energy.entropy_catalog("algebraic", kappa)
        g = resolve_grid(args, cfg, None, {"N": 1024, "r_max": 1e3, "mapping": "log_r", "r_min": 1e-4})
        M = args.mass if args.mass is not None else np.pi
    res = energy.maximize_free_energy(ent, M, g, seed=resolve_seed(args, cfg), max_iter=args.max_iter)
    out.table("profile", ["r", "omega", "psi", "residual"], zip(res.r, res.omega, res.psi, res.residual))
    out.table("history", ["iteration", "F"], enumerate(res.history))
    summary = {"entropy": ent.kind, "kappa": ent.kappa, "grid": g.to_json(), **res.summary()}
    if not res.converged:
        raise NonConvergence(f"maximizer did not converge in {res.iterations} iterations")
    return summary


def cmd_evolve(args, cfg, out):
    from .evolve import run

    run_cfg = {k: v for k, v in cfg.items() if k not in COMMON_KEYS}
    run_cfg = run_cfg.get("run", run_cfg)
    for key in ("alpha", "T", "dt", "stride"):
        v = getattr(args, key)
        if v is not None:
            run_cfg[key] = v
    if args.N is not None:
        run_cfg["N"] = args.N
    if args.rmax is not None:
        run_cfg["r_max"] = args.rmax
    if args.kmax is not None:
        run_cfg["K"] = args.kmax
    if args.seed is not None or "seed" in cfg:
        init = dict(run_cfg.get("init", {"kind": "random"}))
        init["seed"] = resolve_seed(args, cfg)
        run_cfg["init"] = init
    log = run(run_cfg)
    out.raw_table("trajectory", log.to_csv())
    return {"config": vars(log.config), **log.summary()}


def cmd_verify(args, cfg, out):
    from .checks import run_suite

    results = run_suite(args.suite, threads=_threads())
    for r in results:
        print(r.line(), file=sys.stderr)
    out.table("checks", ["name", "passed", "seconds"], ((r.name, r.passed, r.seconds) for r in results))
    ok = all(r.passed for r in results)
    return {"suite": args.suite, "passed": ok, "checks": [r.to_json() for r in results]}


HANDLERS = {"profile": cmd_profile, "hardy": cmd_hardy, "spectrum": cmd_spectrum, "forms": cmd_forms,
            "energy": cmd_energy, "maximize": cmd_maximize, "evolve": cmd_evolve, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--profile", choices=["gaussian", "algebraic"], default=None)
    p.add_argument("--kappa", type=float, default=None, help="decay exponent for the algebraic profile")
    p.add_argument("--N", type=int, default=None, help="radial grid points")
    p.add_argument("--rmax", type=float, default=None, help="outer radius")
    p.add_argument("--kmax", type=int, default=None, help="angular truncation")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default=None, help="output directory for JSON and CSV files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arnold-lab", description="Stability toolkit for radial planar vortices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _common(sub.add_parser("profile", help="tabulate the profile, its weight and potential"))
    p = sub.add_parser("hardy", help="optimal weighted Hardy constant")
    _common(p)
    p.add_argument("--nev", type=int, default=1)
    p.add_argument("--no-check", action="store_true", help="skip the grid-doubling check")
    p = sub.add_parser("spectrum", help="eigenvalues of the stability operators")
    _common(p)
    p.add_argument("--operator", choices=["btilde1", "kernel", "lk", "l0gen", "quasimode", "delta"],
                   default="btilde1")
    p.add_argument("--k", type=int, default=0, help="angular mode for --operator lk")
    p.add_argument("--nev", type=int, default=3)
    p.add_argument("--no-check", action="store_true")
    p = sub.add_parser("forms", help="J, Q, N on seeded random fields")
    _common(p)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--K", type=int, default=4, help="angular modes in the random fields")
    p.add_argument("--constraints", default="mass,linear_first",
                   help="comma list from mass, angular_first, linear_first")
    p.add_argument("--nonradial", action="store_true", help="drop the k = 0 mode")
    _common(p := sub.add_parser("energy", help="kinetic energy by three routes"))
    p = sub.add_parser("maximize", help="free-energy maximizer")
    _common(p)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=10000)
    p = sub.add_parser("evolve", help="perturbation dynamics around the Oseen vortex")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--dt", type=_dt_arg, default=None)
    p.add_argument("--stride", type=int, default=None)
    p = sub.add_parser("verify", help="run a named acceptance suite")
    _common(p)
    from .checks import SUITES

    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    return parser


def _dt_arg(s):
    if s == "auto":
        return s
    return float(s)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ARNOLD_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _apply_threads():
    n = os.environ.get("ARNOLD_LAB_THREADS")
    if not n:
        return
    try:
        import numba

        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))
    except (ImportError, ValueError):
        pass


def main(argv=None) -> int:
    from .evolve import BlowUp
    from .spectral import NonConvergence

    try:
        args = build_parser().parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    _apply_threads()
    try:
        cfg = load_config(args.config)
        out = Output(args.out, args.command, {k: v for k, v in vars(args).items() if k != "command"})
        result = HANDLERS[args.command](args, cfg, out)
        out.finish(result)
    except (NonConvergence, BlowUp, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "verify" and not result["passed"]:
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

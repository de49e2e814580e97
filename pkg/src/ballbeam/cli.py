"""Command-line front end.

Exit codes: 0 all checks passed, 1 a verification failed (or the run broke
down numerically), 2 usage or configuration error.
"""
import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from . import config as cfgmod
from .cheb2d import verify_bounds
from .errors import BallBeamError, ConfigError
from .linear_scheme import estimate_suite, representation_suite
from .nonlinear_scheme import TRACE_COLUMNS, check_energy_decay, run
from .verification import convergence_study, perturbation_study

MODES = ("solve", "converge", "perturb", "verify-cheb", "verify-linear", "energy")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    ap = _Parser(prog="ballbeam", description="Three-layer scheme for the nonlinear Ball beam equation")
    ap.add_argument("--mode", required=True, choices=MODES)
    ap.add_argument("--config", help="YAML config (defaults give the Ball preset)")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config value; repeatable")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


# --------------------------------------------------------------------------
# Output helpers


def fmt(x):
    """17 significant digits for floats; ints and None pass through."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def write_json(path, payload, meta):
    doc = dict(meta)
    doc.update(_jsonable(payload))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _status(ok):
    return "PASS" if ok else "FAIL"


# --------------------------------------------------------------------------
# Modes


def mode_solve(cfg, out, meta, seed):
    sc = cfgmod.scheme_config_of(cfg)
    res = run(sc)
    tr = res.trace
    write_csv(os.path.join(out, "trace.csv"), TRACE_COLUMNS, tr.rows())
    summary = {
        "mode": "solve",
        "n": sc.n,
        "tau": sc.tau,
        "t_end": sc.t_end,
        "final_norm_u": float(np.sqrt(tr.theta[-1])),
        "final_norm_Bsqrt_u": float(np.sqrt(tr.beta[-1])),
        "max_iters": int(tr.iters.max()),
        "max_contraction": float(tr.contraction.max()),
        "contraction_warnings": int(tr.warnings.sum()),
        "energy_check": check_energy_decay(tr),
    }
    write_json(os.path.join(out, "summary.json"), summary, meta)
    print(f"solve: n={sc.n} tau={sc.tau:g} max iters={summary['max_iters']} "
          f"max contraction={summary['max_contraction']:.3g}")
    return EXIT_OK


def mode_converge(cfg, out, meta, seed):
    case = cfgmod.manufactured_of(cfg)
    sc = cfgmod.scheme_config_of(dict(cfg, model=dict(cfg["model"], forcing="manufactured")))
    rep = convergence_study(case, cfg["study"]["n_list"], sc.t_end, sc.start, sc.iteration)
    write_csv(os.path.join(out, "orders.csv"), ("n", "tau", "E", "E_final", "order"),
              [(r["n"], r["tau"], r["E"], r["E_final"], r["order"]) for r in rep.rows])
    lo, hi = rep.band
    print(f"converge: orders {', '.join(f'{p:.4f}' for p in rep.orders)} band [{lo}, {hi}] {_status(rep.passed)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def mode_perturb(cfg, out, meta, seed):
    sc = cfgmod.scheme_config_of(cfg)
    rep = perturbation_study(sc, cfg["study"]["eps_list"], seed=seed)
    write_json(os.path.join(out, "stability.json"), dict(rep.to_dict(), mode="perturb"), meta)
    print(f"perturb: quotient spread {rep.spread:.4f} (limit {rep.max_spread}) {_status(rep.passed)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def mode_verify_cheb(cfg, out, meta, seed):
    c = cfg["study"]["cheb"]
    rep = verify_bounds(k_max=int(c["k_max"]), samples=int(c["samples"]), seed=seed,
                        method=str(c["method"]), per_axis=int(c["per_axis"]))
    write_json(os.path.join(out, "bounds.json"), dict(rep.to_dict(), mode="verify-cheb"), meta)
    for r in rep.results + rep.supplementary:
        print(f"verify-cheb: {r.bound_id:6s} on {r.region:9s} min slack {r.min_slack:+.3e} "
              f"violations {r.violations} {_status(r.passed)}")
    print(f"verify-cheb: closed form vs recurrence {rep.recurrence_max_rel_dev:.2e} {_status(rep.recurrence_ok)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def mode_verify_linear(cfg, out, meta, seed):
    lin = cfg["study"]["linear"]
    runs = int(lin["runs"])
    suite = estimate_suite(runs=runs, seed=seed, s_values=tuple(float(s) for s in lin["s_values"]),
                           constants=str(lin["constants"]))
    reprep = representation_suite(runs=runs, seed=seed)
    ok = suite.passed and reprep["pass"]
    payload = dict(suite.to_dict(), mode="verify-linear", representation=reprep, overall_pass=ok)
    write_json(os.path.join(out, "estimates.json"), payload, meta)
    for row in suite.summary():
        print(f"verify-linear: ({row['estimate_id']}) s={row['s']:g} worst ratio {row['worst_ratio']:.4f} "
              f"failing runs {row['failing_runs']}/{runs} {_status(row['pass'])}")
    print(f"verify-linear: representation max deviation {reprep['max_rel_dev']:.2e} {_status(reprep['pass'])}")
    return EXIT_OK if ok else EXIT_FAIL


def mode_energy(cfg, out, meta, seed):
    sc = cfgmod.scheme_config_of(cfg)
    res = run(sc)
    tr = res.trace
    write_csv(os.path.join(out, "energy.csv"), ("step", "t", "lambda", "alpha", "beta", "mu", "nu"),
              zip(tr.step, tr.t, tr.energy, tr.alpha, tr.beta, tr.mu, tr.nu))
    rep = check_energy_decay(tr)
    if not rep["applicable"]:
        print(f"energy: {rep['reason']}")
        return EXIT_OK
    print(f"energy: max relative increase {rep['max_relative_increase']:.3e} {_status(rep['pass'])}")
    return EXIT_OK if rep["pass"] else EXIT_FAIL


DISPATCH = {
    "solve": mode_solve,
    "converge": mode_converge,
    "perturb": mode_perturb,
    "verify-cheb": mode_verify_cheb,
    "verify-linear": mode_verify_linear,
    "energy": mode_energy,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.resolve(args.config, args.overrides)
        # validate the scheme config up front so no mode starts on bad input
        cfgmod.scheme_config_of(cfg)
        os.makedirs(args.out, exist_ok=True)
    except ConfigError as exc:
        print(f"ballbeam: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ballbeam: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {"tool_version": __version__, "config_digest": cfgmod.digest(cfg), "seed": args.seed}
    try:
        return DISPATCH[args.mode](cfg, args.out, meta, args.seed)
    except ConfigError as exc:
        print(f"ballbeam: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BallBeamError as exc:
        print(f"ballbeam: {args.mode} failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command line entry point ``rwa-markov``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import RwaMarkovError
from .exact_dynamics import DEFAULT_HORIZON_CAP
from .harness.output import emit_csv
from .harness.products import density_series, gksl_summary, pair_correlations, quad_correlations
from .harness.scenario import load_scenario, random_scenario
from .harness.sweep import QUANTITIES, run_sweep
from .harness.validation import validate

log = logging.getLogger("rwa_markov")


def _load(args, check_steps=True):
    if args.scenario.startswith("random:"):
        N = int(args.scenario.split(":", 1)[1] or 3)
        sc = random_scenario(args.seed, N)
    else:
        sc = load_scenario(args.scenario, check_steps=check_steps)
    return sc.with_overrides(step=args.step, t_min=args.tmin)


def _outdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    sc = _load(args)
    path = emit_csv(density_series(sc, horizon_cap=args.horizon_cap),
                    _outdir(args.out) / f"{sc.name}_simulate.csv")
    print(path)
    return 0


def cmd_sweep(args):
    sc = _load(args)
    quantities = QUANTITIES if args.quantity == "all" else (args.quantity,)
    out = _outdir(args.out)
    for q in quantities:
        rep = run_sweep(sc, q, horizon_cap=args.horizon_cap, workers=args.workers)
        emit_csv(rep, out / f"{sc.name}_{q}.csv")
        print(f"{q}: slope={rep.fitted_slope:.4f} residual={rep.fit_residual:.2e} "
              f"errors={' '.join('%.4e' % e for e in rep.errors)}")
    return 0


def cmd_correlate(args):
    sc = _load(args)
    out = _outdir(args.out)
    if args.quad:
        path = emit_csv(quad_correlations(sc, horizon_cap=args.horizon_cap),
                        out / f"{sc.name}_three_time.csv")
    else:
        path = emit_csv(pair_correlations(sc, horizon_cap=args.horizon_cap),
                        out / f"{sc.name}_two_time.csv")
    print(path)
    return 0


def cmd_gksl(args):
    sc = _load(args)
    s = gksl_summary(sc, args.lam)
    print(f"lambda = {s['lambda']:g}")
    print(f"{'l':>3} {'epsilon':>22} {'Gamma':>22}")
    for i, (e, g) in enumerate(zip(s["epsilon"], s["gamma"])):
        print(f"{i:>3} {e:>22.15g} {g:>22.15g}")
    print(f"dissipativity margin = {s['dissipativity_margin']:.15g}")
    print(f"eigenvector gram deviation = {s['gram_deviation']:.3e}")
    return 0


def cmd_validate(args):
    sc = _load(args, check_steps=False)
    report = validate(sc, horizon_cap=args.horizon_cap, sweeps=not args.no_sweeps)
    for line in report.lines():
        print(line)
    n_fail = sum(not c.passed for c in report.checks)
    print(f"{sc.name}: {len(report.checks) - n_fail} passed, {n_fail} failed")
    return 0 if report.ok else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario TOML file, or random:N with --seed")
    common.add_argument("--step", type=float, default=None, help="override the solver step")
    common.add_argument("--tmin", type=float, default=None, help="override t_min (rescaled)")
    common.add_argument("--horizon-cap", type=float, default=DEFAULT_HORIZON_CAP,
                        help="largest physical horizon lambda^-2 t (default %(default)g)")
    common.add_argument("--seed", type=int, default=0, help="seed for random:N scenarios")

    ap = argparse.ArgumentParser(prog="rwa-markov", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="exact and asymptotic density series")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="lambda sweep with slope fit")
    p.add_argument("--quantity", choices=QUANTITIES + ("all",), default="propagator_error")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("correlate", parents=[common], help="two- or three-time correlations")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pair", action="store_true", default=True)
    g.add_argument("--quad", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("gksl", parents=[common], help="GKSL frequencies and rates")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_gksl)

    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--no-sweeps", action="store_true", help="skip the lambda-sweep slope checks")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.set_printoptions(precision=6)
    try:
        return args.func(args)
    except RwaMarkovError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: farey, reference, experiment, proofscan.

Exit codes: 0 pass, 1 threshold or property failure, 2 usage error,
3 unsupported configuration, 4 resource cap.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    CONFIG_SCHEMA,
    ExperimentConfig,
    load_thresholds,
    run_experiment,
    write_report,
)
from .farey import farey_count_asymptotic, farey_count_exact, write_farey_csv
from .lattices import ObservableSpec
from .proof_geometry import (
    ConeRegion,
    cone_volume,
    cone_volume_mc,
    disjointness_scan,
    mahler_epsilon0,
    step2_premise_batch,
    thickening_member_balls,
    thickening_member_cone,
)
from .reference_laws import build_reference, default_cache_dir, save_reference
from .sampling import chunk_rng

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNSUPPORTED = 3
EXIT_RESOURCE = 4


def _fmt(x):
    """All numeric output at 12 significant digits for diffable runs."""
    return f"{x:.12g}"


def cmd_farey(args):
    exact = farey_count_exact(args.d, int(args.Q))
    asym = farey_count_asymptotic(args.d, args.Q)
    print(f"exact count   {exact}")
    print(f"asymptotic    {_fmt(asym)}")
    print(f"ratio         {_fmt(exact / asym)}")
    if args.out:
        n = write_farey_csv(args.out, args.d, args.Q, args.theta)
        print(f"wrote {n} rows to {args.out}")
    return EXIT_PASS


def cmd_reference(args):
    spec = ObservableSpec.parse(args.observable)
    cache_dir = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
    law = build_reference(
        args.kind, spec, args.d, args.n, args.seed,
        sigma=args.sigma, t=args.t, workers=args.workers, cache_dir=cache_dir,
    )
    path = save_reference(law, cache_dir)
    print(f"kind          {law.kind}")
    print(f"samples       {len(law)}")
    for lv in (0.1, 0.25, 0.5, 0.75, 0.9):
        print(f"q{int(100 * lv):02d}           {_fmt(float(np.quantile(law.samples, lv)))}")
    print(f"cache         {path}")
    return EXIT_PASS


def cmd_experiment(args):
    if args.schema:
        print(json.dumps(CONFIG_SCHEMA, indent=2, sort_keys=True))
        return EXIT_PASS
    if not args.config:
        print("experiment: a config path is required (or --schema)", file=sys.stderr)
        return EXIT_USAGE
    with open(args.config) as fh:
        data = json.load(fh)
    # flags win over the JSON config
    for key in ("seed", "workers", "Q", "sigma", "subsample"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.out:
        data["output"] = args.out
    config = ExperimentConfig.from_dict(data)
    cache_dir = Path(args.cache_dir) if args.cache_dir else None
    report = run_experiment(config, cache_dir=cache_dir)
    out_dir = config.output or "."
    paths = write_report(report, out_dir, config=config, plot=not args.no_plot)
    print(f"case          {report.case}")
    print(f"observable    {report.observable}")
    print(f"n_empirical   {report.n_empirical}")
    print(f"ks            {_fmt(report.ks)}")
    print(f"wasserstein   {_fmt(report.wasserstein)}")
    for k, v in sorted(report.thresholds_used.items()):
        print(f"threshold     {k} = {_fmt(v)}")
    for w in report.warnings:
        print(f"warning       {w}")
    for name, p in sorted(paths.items()):
        print(f"wrote         {p}")
    print(f"verdict       {'PASS' if report.passed else 'FAIL'}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _scan_thickening(d, trials, rng):
    for i in range(trials):
        Q = int(rng.integers(3, 25))
        theta = 0.0 if rng.random() < 0.5 else float(rng.uniform(0.1, 0.8))
        # the tiny positive nudge keeps q = Q off the exact y_d = 1 boundary,
        # where the float cone test and the integer ball test could round apart
        t = math.log(Q) / (d - 1) + 1e-9
        eps_hi = min(1.5, 0.45 * Q ** (1.0 / (d - 1)))
        eps = float(rng.uniform(0.05, eps_hi))
        if rng.random() < 0.5:
            x = rng.random(d - 1)
        else:
            # perturb an actual rational so membership-true cases occur often
            q = int(rng.integers(max(2, int(theta * Q) + 1), Q + 1))
            p = rng.integers(0, q, size=d - 1)
            x = p / q + rng.normal(scale=0.5 * eps * math.exp(-d * t), size=d - 1)
            x = np.mod(x, 1.0)
        a = thickening_member_balls(x, Q, theta, eps, t)
        b = thickening_member_cone(x, Q, theta, eps, t)
        if a != b:
            return (x.tolist(), Q, theta, eps, t, a, b)
    return None


def cmd_proofscan(args):
    rng = chunk_rng(args.seed, 0)
    thresholds = load_thresholds()
    ok = True

    bad = _scan_thickening(args.d, max(args.trials // 20, 5), rng)
    if bad is None:
        print("thickening equivalence      PASS")
    else:
        x, Q, theta, eps, t, a, b = bad
        print(f"thickening equivalence      FAIL x={x} Q={Q} theta={_fmt(theta)} "
              f"eps={_fmt(eps)} t={_fmt(t)} balls={a} cone={b}")
        ok = False

    checked, violations = step2_premise_batch(args.d, args.trials, rng)
    if violations == 0 and checked > 0:
        print(f"disjointness implication    PASS ({checked} premise-satisfying trials)")
    else:
        print(f"disjointness implication    FAIL ({violations} violations of {checked})")
        ok = False

    if args.d == 2:
        eps0 = mahler_epsilon0([np.array([[math.sqrt(2.0)]])])
        clash = disjointness_scan(Q=200, theta=0.0, epsilon=0.49)
        if clash is None:
            print(f"ball disjointness scan      PASS (eps0 = {_fmt(eps0)})")
        else:
            print(f"ball disjointness scan      FAIL overlapping pair {clash}")
            ok = False

    sig = thresholds["cone_volume_sigmas"]
    n_mc = max(args.trials, 10 ** 5)
    for (eps, theta) in ((0.3, 0.2), (0.7, 0.5), (1.2, 0.8)):
        region = ConeRegion(d=args.d, epsilon=eps, theta=theta)
        closed = cone_volume(region)
        est, se = cone_volume_mc(region, n_mc, rng)
        if abs(est - closed) <= sig * se:
            print(f"cone volume eps={_fmt(eps)} theta={_fmt(theta)}  PASS "
                  f"(closed {_fmt(closed)}, mc {_fmt(est)} +- {_fmt(se)})")
        else:
            print(f"cone volume eps={_fmt(eps)} theta={_fmt(theta)}  FAIL "
                  f"(closed {_fmt(closed)}, mc {_fmt(est)} +- {_fmt(se)})")
            ok = False

    print("ALL-PASS" if ok else "COUNTEREXAMPLE FOUND")
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="horofarey",
        description="Farey ensembles on horospheres: generation, reference laws, "
                    "equidistribution experiments and proof-machinery scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("farey", help="enumerate and count a Farey set")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--Q", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.set_defaults(func=cmd_farey)

    p = sub.add_parser("reference", help="build and cache a reference law")
    p.add_argument("--kind", required=True,
                   choices=["case_b_mc", "haar_empirical_horosphere", "haar_exact_d2"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--observable", type=str, default="sv")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cache-dir", type=str, default=None)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("config", nargs="?", default=None, help="JSON config path")
    p.add_argument("--schema", action="store_true", help="print the config schema and exit")
    p.add_argument("--out", type=str, default=None, help="output directory override")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--Q", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.add_argument("--cache-dir", type=str, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("proofscan", help="property scans of the geometric machinery")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=10 ** 4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_proofscan)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except ResourceWarning as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_UNSUPPORTED if "unsupported" in msg.lower() else EXIT_USAGE
    except Exception as exc:  # jsonschema.ValidationError and kin
        if exc.__class__.__module__.startswith("jsonschema"):
            print(f"config schema violation: {exc}", file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":
    sys.exit(main())

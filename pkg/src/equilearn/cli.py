"""Command line entry point: ``python -m equilearn <command>``.

Commands: ``sweep-energy``, ``sweep-correlations``, ``theory``, ``fit-bounds``
and ``shadow-cache``.  On failure a JSON error object is written to stderr and
the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError
from .harness import (
    ExperimentConfig,
    emit_results,
    overlay_bounds,
    read_results,
    run_correlation_sweep,
    run_energy_sweep,
)
from .models import sample_params
from .quantum import solve
from .shadows import measure_shadow, shadow_count
from .theory import compute_omega, error_bound_power_law


def _load_config(args, **overrides):
    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    doc.update(overrides)
    config = ExperimentConfig.from_dict(doc)
    if args.seed is not None:
        config = dataclasses.replace(config, seeds=(args.seed,))
    return config.validate()


def _sweep(args, target, runner, name):
    config = _load_config(args, target=target)
    result = runner(config)
    path = emit_results(result, Path(args.out) / f"{name}.csv")
    print(path)


def cmd_sweep_energy(args):
    _sweep(args, "energy", run_energy_sweep, "energy")


def cmd_sweep_correlations(args):
    _sweep(args, "all_correlations", run_correlation_sweep, "correlations")


def cmd_theory(args):
    params = compute_omega(args.alpha, args.dim, args.k)
    print(f"# omega = {params.omega} ~ {float(params.omega):.6f}")
    print("n,epsilon_exact,epsilon_asymptotic")
    for e in range(args.log2_min, args.log2_max + 1, args.log2_step):
        n = 2**e
        exact = error_bound_power_law(n, params.omega, args.c, "exact")
        asym = error_bound_power_law(n, params.omega, args.c, "asymptotic")
        print(f"{n},{exact!r},{asym!r}")


def cmd_fit_bounds(args):
    rows = read_results(args.results)
    fixed = {}
    if args.kind == "power_law":
        omega = args.omega
        if omega is None:
            omega = float(compute_omega(args.alpha, 1, 2).omega)
        fixed["omega"] = omega
    elif args.d is not None:
        fixed["d"] = args.d
    curve, text = overlay_bounds(rows, args.kind, fixed, args.distance)
    out = Path(args.out) / f"bounds_{args.kind}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(json.dumps({"path": str(out), "c": curve.c, "d": curve.d, "omega": curve.omega,
                      "residual": curve.residual}))


def cmd_shadow_cache(args):
    config = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for n in config.n_values:
        spec = config.model_spec(n)
        for seed in config.seeds:
            x0 = sample_params(spec, seed)
            gs = solve(spec, x0, tol=config.solver_tol)
            T = config.shadow_T or shadow_count(n, config.shadow_C)
            record = measure_shadow(gs.state, T, seed)
            doc = {"model": spec.to_dict(seed=seed), "x0": list(map(float, x0)),
                   "shadow": record.to_dict()}
            path = out / f"shadow_{config.family}_n{n}_seed{seed}.json"
            path.write_text(json.dumps(doc))
            print(path)


def _fraction(text):
    from fractions import Fraction

    return Fraction(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="equilearn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config JSON file")
        p.add_argument("--seed", type=int, help="run a single seed instead of the config's list")
        p.add_argument("--out", default="results", help="output directory")

    for name, fn in (("sweep-energy", cmd_sweep_energy),
                     ("sweep-correlations", cmd_sweep_correlations),
                     ("shadow-cache", cmd_shadow_cache)):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("theory", help="omega and power-law error bound table as CSV")
    p.add_argument("--alpha", type=_fraction, default=_fraction("3"))
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--log2-min", type=int, default=10)
    p.add_argument("--log2-max", type=int, default=40)
    p.add_argument("--log2-step", type=int, default=5)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("fit-bounds", help="fit an error-bound curve to a sweep CSV")
    p.add_argument("--results", required=True, help="sweep CSV")
    p.add_argument("--kind", choices=("short_range", "power_law"), default="short_range")
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=_fraction, default=_fraction("3"))
    p.add_argument("--d", type=int)
    p.add_argument("--distance", type=int)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_fit_bounds)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ConfigurationError, ValueError, OSError, RuntimeError, KeyError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands:

- ``recover``: run one seeded instance and print the result with its
  residual trace.
- ``curve``: run a full recovery-frequency experiment to CSV.
- ``drip``: estimate a restricted-isometry constant for a spec's setup.
- ``locfactor``: estimate a dictionary's localization factor.
- ``bounds``: evaluate measurement bounds and convergence constants.

Exit codes: 0 success, 2 spec validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments as xp
from .dictionaries import make_gaussian_sensing
from .metrics import convergence_constants, drip_constant, localization_factor

EXIT_SPEC = 2
EXIT_IO = 3


def _load_spec(args) -> xp.ExperimentSpec:
    spec = xp.load_spec(args.spec)
    overrides = {}
    if getattr(args, "m", None):
        overrides["m_values"] = tuple(args.m)
    if getattr(args, "trials", None):
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "algos", None):
        overrides["algorithms"] = tuple(a.strip() for a in args.algos.split(","))
    if overrides:
        from dataclasses import replace
        spec = replace(spec, **overrides)
    return spec


def _cmd_recover(args) -> int:
    spec = _load_spec(args)
    m = args.m[0] if args.m else spec.m_values[-1]
    outcomes = xp.run_trial(spec, m, args.trial, measure_runtime=args.timing)
    for tag, out in outcomes.items():
        if out.error:
            print(f"{tag}: FAILED ({out.error})")
            continue
        print(f"{tag}: success={out.success} iterations={out.iterations} "
              f"rel_error={out.rel_error:.3e} residual={out.residual:.3e}")
        for i, r in enumerate(out.residual_trace):
            print(f"  iter {i}: residual {r:.6e}")
    return 0


def _cmd_curve(args) -> int:
    spec = _load_spec(args)
    print(f"dictionary={spec.dict_kind} n={spec.n} d={spec.d} k={spec.k} "
          f"support={spec.support_model.kind} (clusters may wrap) "
          f"trials={spec.trials} seed={spec.master_seed}")
    total = len(spec.m_values) * spec.trials
    try:
        from tqdm import tqdm
        bar = tqdm(total=total, unit="trial")

        def progress(done, _total):
            bar.update(done - bar.n)
    except ImportError:  # pragma: no cover - tqdm is a hard dependency
        bar = None

        def progress(done, _total):
            if done % 50 == 0 or done == _total:
                print(f"\r{done}/{_total} trials", end="", file=sys.stderr)

    records = [] if args.traces else None
    curves = xp.run_curve(spec, workers=args.workers, measure_runtime=args.timing,
                          progress=progress, collect_outcomes=records)
    if bar:
        bar.close()
    xp.export_csv(curves, args.out)
    print(f"wrote {args.out}")
    if args.traces:
        xp.write_traces(records, args.traces)
        print(f"wrote {args.traces}")
    return 0


def _cmd_drip(args) -> int:
    spec = _load_spec(args)
    D = xp.build_dictionary(spec)
    m = args.m[0] if args.m else spec.m_values[-1]
    A = make_gaussian_sensing(m, spec.n, xp.derive_seed(spec.master_seed, "sensing", m, 0))
    est = drip_constant(A, D, args.order or spec.k, method=args.method,
                        trials=args.samples, seed=spec.master_seed)
    print(f"delta_{est.k} = {est.delta:.6f} ({est.method}, "
          f"{est.supports_checked} supports checked)")
    return 0


def _cmd_locfactor(args) -> int:
    spec = _load_spec(args)
    D = xp.build_dictionary(spec)
    eta = localization_factor(D, args.order or spec.k, method=args.method,
                              samples=args.samples, seed=spec.master_seed)
    print(f"localization factor (k={args.order or spec.k}, {args.method}): {eta:.6f}")
    return 0


def _cmd_bounds(args) -> int:
    from .metrics import measurement_bound
    m_dict = measurement_bound(args.k, args.d, args.delta, args.alpha, variant="dictionary")
    m_sub = measurement_bound(args.k, args.d, args.delta, args.alpha, variant="subspace")
    print(f"measurements (all k-atom subsets of width {args.d}): {m_dict}")
    print(f"measurements (single k-dim subspace): {m_sub}")
    c1, c2 = convergence_constants(args.delta4k, args.lambda1, args.lambda2)
    print(f"convergence constants at delta_4k={args.delta4k}, "
          f"lambda1={args.lambda1}, lambda2={args.lambda2}: C1={c1:.4f} C2={c2:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigspace",
                                     description="Sparse-signal recovery toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_spec_opts(p, need_out=False):
        p.add_argument("--spec", required=True, help="key = value spec file")
        p.add_argument("--m", type=int, nargs="*", help="override m value(s)")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--algos", help="override algorithm list (comma separated)")
        if need_out:
            p.add_argument("--out", default="curves.csv", help="output CSV path")

    p = sub.add_parser("recover", help="run one instance, print residual trace")
    add_spec_opts(p)
    p.add_argument("--trial", type=int, default=0, help="trial index (default 0)")
    p.add_argument("--timing", action="store_true", help="measure wall-clock runtime")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("curve", help="run a recovery-frequency experiment")
    add_spec_opts(p, need_out=True)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true",
                   help="measure wall-clock runtime (breaks byte-reproducibility)")
    p.add_argument("--traces", help="also dump residual traces as JSON lines")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("drip", help="restricted-isometry constant")
    add_spec_opts(p)
    p.add_argument("--order", type=int, help="isometry order (default: spec k)")
    p.add_argument("--method", choices=["bruteforce", "sampled"], default="sampled")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=_cmd_drip)

    p = sub.add_parser("locfactor", help="dictionary localization factor")
    add_spec_opts(p)
    p.add_argument("--order", type=int, help="sparsity level (default: spec k)")
    p.add_argument("--method", choices=["bruteforce", "sampled"], default="sampled")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=_cmd_locfactor)

    p = sub.add_parser("bounds", help="measurement bounds and convergence constants")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--delta4k", type=float, default=0.1)
    p.add_argument("--lambda1", type=float, default=0.1)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except xp.SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

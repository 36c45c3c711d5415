"""Command-line frontend: gen | solve | count | theory | window | sweep | fit.

Exit codes: 0 success, 1 usage error, 2 computation error, 3 I/O error.
Worker-pool width for sweeps comes from the RBCSP_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import experiment, theory
from .core import RBParams, decode_instance, derive, encode_instance, fmt_float
from .errors import RBError
from .gen import generate
from .solve import Budget, count as count_models, solve as solve_instance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPUTE = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _add_param_flags(parser, require_pr: bool):
    parser.add_argument("--n", type=int, default=100, help="number of variables (default 100)")
    parser.add_argument("--k", type=int, required=True, help="constraint arity")
    parser.add_argument("--alpha", type=float, required=True, help="domain exponent (d = n^alpha)")
    # gen needs every control parameter spelled out; theory/window fill the
    # missing one of p/r from the other's threshold.
    parser.add_argument("--p", type=float, default=None, required=require_pr,
                        help="forbidden-tuple fraction")
    parser.add_argument("--r", type=float, default=None, required=require_pr,
                        help="constraint density (m = r n ln n)")
    parser.add_argument("--delta", type=float, default=0.1, help="window confidence level (default 0.1)")


def _resolve_params(args) -> RBParams:
    """Fill the missing one of p/r from the other's threshold so reports stay coherent."""
    p, r = args.p, args.r
    if p is None and r is None:
        raise ValueError("at least one of --p and --r is required")
    if r is None:
        r = -args.alpha / math.log1p(-p)
    if p is None:
        p = -math.expm1(-args.alpha / r)
    return RBParams(n=args.n, k=args.k, alpha=args.alpha, p=p, r=r, delta=args.delta)


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    params = RBParams(n=args.n, k=args.k, alpha=args.alpha, p=args.p, r=args.r, delta=args.delta)
    inst = generate(params, args.seed)
    _write_text(args.out, encode_instance(inst))
    print(f"wrote {args.out}")
    return EXIT_OK


def _read_instance(path):
    return decode_instance(Path(path).read_text(encoding="utf-8"))


def _budget_from(args) -> Budget:
    return Budget(max_nodes=args.max_nodes, max_seconds=args.max_seconds)


def _cmd_solve(args) -> int:
    outcome = solve_instance(_read_instance(args.infile), _budget_from(args))
    print(f"status={outcome.status}")
    if outcome.witness is not None:
        print("witness=" + ",".join(map(str, outcome.witness.values)))
    print(f"nodes={outcome.nodes}")
    print(f"elapsed_ms={fmt_float(1000.0 * outcome.elapsed)}")
    return EXIT_OK


def _cmd_count(args) -> int:
    outcome = count_models(_read_instance(args.infile), _budget_from(args))
    print(f"status={outcome.status}")
    print(f"count={outcome.count}")
    print(f"nodes={outcome.nodes}")
    print(f"elapsed_ms={fmt_float(1000.0 * outcome.elapsed)}")
    return EXIT_OK


def _cmd_theory(args) -> int:
    params = _resolve_params(args)
    report = theory.thresholds(params)
    sys.stdout.write(theory.threshold_report_text(report))
    print(f"log_E_N_continuous={fmt_float(theory.log_expected_solutions(params, theory.CONTINUOUS))}")
    try:
        sizes = derive(params)
        print(f"d={sizes.d}")
        print(f"m={sizes.m}")
        print(f"q={sizes.q}")
        sys.stdout.write(theory.moment_report_text(theory.log_second_moment(params, theory.INTEGERIZED)))
    except RBError as exc:
        print(f"integerized_error={exc}")
    if args.overlap_out:
        curve = theory.overlap_curve(params, args.grid_size)
        for column in ("h", "h2", "g", "logf"):
            _write_text(f"{args.overlap_out}_{column}.txt", theory.overlap_column_text(curve, column))
        print(f"overlap_files={args.overlap_out}_{{h,h2,g,logf}}.txt")
    return EXIT_OK


def _cmd_window(args) -> int:
    params = _resolve_params(args)
    report = theory.window(params, args.delta, axis=args.axis)
    sys.stdout.write(theory.window_report_text(report))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = experiment.parse_config(args.config)
    if args.out is not None:
        from dataclasses import replace

        config = replace(config, out=args.out)
    if config.out is None:
        return _usage_error("no output path: set 'out' in the config or pass --out")
    results = experiment.sweep(config)
    print(f"rows={len(results)}")
    print(f"csv={config.out}")
    if args.figdir:
        from . import plots

        base = config.params_at(config.n_list[0], config.grid[0])
        report = theory.thresholds(base)
        threshold = report.r_cr if config.axis == "r" else report.p_cr
        fig = plots.save_transition_figure(
            results, Path(args.figdir) / f"transition_{config.axis}.png", threshold=threshold
        )
        print(f"figure={fig}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    results = experiment.load_results(args.results)
    if not results:
        return _usage_error(f"{args.results}: no data rows")
    windows = []
    for n in sorted({res.n for res in results}):
        rows = [res for res in results if res.n == n]
        try:
            win = experiment.empirical_window(rows, args.delta)
        except RBError as exc:
            print(f"n={n} window_error={exc}")
            continue
        windows.append(win)
        print(
            f"n={n} lower={fmt_float(win.lower)} upper={fmt_float(win.upper)} "
            f"width={fmt_float(win.width)} residual={fmt_float(win.fit_residual)}"
        )
    fit = None
    if len(windows) >= 3:
        fit = experiment.scaling_fit([(w.n, w.width) for w in windows], epsilon=args.epsilon)
        print(f"slope={fmt_float(fit.slope)}")
        print(f"slope_stderr={fmt_float(fit.slope_stderr)}")
    if args.widths_out and windows:
        experiment_text = experiment.two_column_text([w.n for w in windows], [w.width for w in windows])
        _write_text(args.widths_out, experiment_text)
        print(f"widths={args.widths_out}")
    if args.curves_out:
        for n in sorted({res.n for res in results}):
            rows = sorted((res for res in results if res.n == n), key=lambda res: res.value)
            _write_text(
                f"{args.curves_out}_n{n}.txt",
                experiment.two_column_text([res.value for res in rows], [res.prsat for res in rows]),
            )
        print(f"curves={args.curves_out}_n*.txt")
    if args.figdir:
        from . import plots

        figdir = Path(args.figdir)
        fig_path = plots.save_transition_figure(results, figdir / f"transition_{results[0].axis}.png")
        print(f"figure={fig_path}")
        if fit is not None:
            fig_path = plots.save_width_figure(fit, figdir / "window_widths.png")
            print(f"figure={fig_path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rbcsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate one instance to an RBCSP file")
    _add_param_flags(gen, require_pr=True)
    gen.add_argument("--seed", type=int, required=True, help="64-bit generation seed")
    gen.add_argument("--out", required=True, help="output RBCSP path")
    gen.set_defaults(func=_cmd_gen)

    for name, func, help_text in (
        ("solve", _cmd_solve, "decide satisfiability of an RBCSP file"),
        ("count", _cmd_count, "count all solutions of an RBCSP file"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--in", dest="infile", required=True, help="input RBCSP path")
        cmd.add_argument("--max-nodes", type=int, default=10**8, help="node budget (default 1e8)")
        cmd.add_argument("--max-seconds", type=float, default=10.0, help="time budget (default 10s)")
        cmd.set_defaults(func=func)

    th = sub.add_parser("theory", help="thresholds, moments and probability bounds")
    _add_param_flags(th, require_pr=False)
    th.add_argument("--overlap-out", default=None, help="prefix for two-column overlap exports")
    th.add_argument("--grid-size", type=int, default=1001, help="overlap grid size (default 1001)")
    th.set_defaults(func=_cmd_theory)

    win = sub.add_parser("window", help="finite-n scaling window endpoints")
    _add_param_flags(win, require_pr=False)
    win.add_argument("--axis", choices=("r", "p"), default="r", help="window axis (default r)")
    win.set_defaults(func=_cmd_window)

    sw = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    sw.add_argument("--config", required=True, help="key=value config path")
    sw.add_argument("--out", default=None, help="override the config's output CSV path")
    sw.add_argument("--figdir", default=None, help="also render figures into this directory")
    sw.set_defaults(func=_cmd_sweep)

    fit = sub.add_parser("fit", help="empirical windows and width scaling from a results CSV")
    fit.add_argument("--results", required=True, help="sweep results CSV path")
    fit.add_argument("--delta", type=float, required=True, help="window confidence level")
    fit.add_argument("--epsilon", type=float, default=None, help="rate constant for the lower comparator")
    fit.add_argument("--widths-out", default=None, help="two-column n/width export path")
    fit.add_argument("--curves-out", default=None, help="prefix for two-column per-n curve exports")
    fit.add_argument("--figdir", default=None, help="also render figures into this directory")
    fit.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except RBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

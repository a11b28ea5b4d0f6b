"""Command-line surface: construct runs, verify them, export plot data.

Exit codes: 0 success (and verification passed), 1 verification failed,
2 invalid configuration or input files, 3 domain failure during
construction (survivor collapse without --tolerate-collapse, threshold
extraction past its resolution budget).  Errors are emitted to stderr as
single-line JSON {"error": code, "detail": text}; progress lines also go
to stderr, keeping stdout for reports and file outputs deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import _jsonio
from ._version import __version__
from .construct import (
    ConstantProfile,
    RunOptions,
    load_run,
    run,
    save_run,
)
from .errors import (
    GridTooSmall,
    LacunaError,
    LambdaCollapse,
    PlanError,
    ResolutionExceeded,
)
from .plan import PRESETS, load_plan, preset
from .trigpoly import TWO_PI, grid_eval
from .verify import build_report, format_text, save_report, theorem_rhs

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3


def _error(code: str, detail: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "detail": detail}) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="lacuna",
        description="Construct frequency-separated block sums with certified "
                    "norm brackets, and verify every recorded inequality.")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="run the construction, save a run directory")
    c.add_argument("--preset", choices=sorted(PRESETS),
                   help="plan preset name (see the presets command)")
    c.add_argument("--plan", help="path to a plan JSON file")
    c.add_argument("--N", type=int, help="number of steps to run")
    c.add_argument("--q", help="growth ratio for the geometric preset "
                               "(decimal string, read exactly)")
    c.add_argument("--m1", type=int, help="first frequency for the geometric preset")
    c.add_argument("--eps", type=float, help="width-decay exponent in [0, 1) "
                                             "for the corollary preset")
    c.add_argument("--c0", type=int, help="index offset for the corollary preset "
                                          "(default 1)")
    c.add_argument("--alpha", type=float, help="additive constant (default 316)")
    c.add_argument("--beta", type=float,
                   help="threshold coefficient; overrides the 7*sqrt(2*c_H) default")
    c.add_argument("--gamma", type=float, help="log-term coefficient (default 210)")
    c.add_argument("--c-h", type=float, dest="c_h",
                   help="majorant constant placeholder feeding beta (default 1.0)")
    c.add_argument("--a-offset", type=float, dest="a_offset",
                   help="exclusion-age offset (default 45)")
    c.add_argument("--a-slope", type=float, dest="a_slope",
                   help="exclusion-age slope (default 30)")
    c.add_argument("--norm-oversample", type=int, dest="norm_oversample",
                   help="grid density for certified sup brackets (default 16)")
    c.add_argument("--level-oversample", type=int, dest="level_oversample",
                   help="minimum grid density for threshold extraction (default 2)")
    c.add_argument("--tol-x", type=float, dest="tol_x",
                   help="boundary tolerance in radians (default 2*pi*2^-40)")
    c.add_argument("--refine-boundaries", action="store_true",
                   help="bisect threshold crossings instead of conservative "
                        "outward snapping")
    c.add_argument("--threads", type=int,
                   help="worker threads (default: LACUNA_THREADS or all cores)")
    c.add_argument("--no-sample-cache", action="store_true",
                   help="recompute dense samples instead of caching them")
    c.add_argument("--tolerate-collapse", action="store_true",
                   help="keep the partial run when the survivor set empties "
                        "instead of failing")
    c.add_argument("--config", help="JSON file of defaults merged under "
                                    "explicit flags")
    c.add_argument("--out", required=True, help="run directory to write")

    v = sub.add_parser("verify", help="check a run directory, write report.json/.txt")
    v.add_argument("rundir", help="run directory produced by construct")
    v.add_argument("--no-majorant", action="store_true",
                   help="skip the running-maximum quadrature checks")
    v.add_argument("--no-tail", action="store_true",
                   help="skip the sampled tail-decay diagnostics")

    e = sub.add_parser("export", help="export CSV data from a run directory")
    e.add_argument("rundir", help="run directory produced by construct")
    e.add_argument("--poly", choices=("S", "delta"),
                   help="export grid samples of a partial sum or one block")
    e.add_argument("--n", type=int, help="step index for --poly")
    e.add_argument("--grid", type=int, help="number of sample rows for --poly")
    e.add_argument("--bounds", action="store_true",
                   help="export per-step certified sup brackets and the "
                        "advertised global bound")
    e.add_argument("--out", required=True, help="CSV file to write")

    sub.add_parser("presets", help="list plan presets and their parameters")
    return top


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the --config JSON file (flags win)."""
    if not getattr(args, "config", None):
        return args
    obj = _jsonio.load(args.config)
    if not isinstance(obj, dict):
        raise PlanError(f"{args.config}: config must be a JSON object")
    for key, value in obj.items():
        if not hasattr(args, key):
            raise PlanError(f"{args.config}: unknown config key {key!r}")
        current = getattr(args, key)
        if current is None or current is False:
            setattr(args, key, value)
    return args


def _preset_params(args: argparse.Namespace) -> dict:
    if args.N is None:
        raise PlanError("--N is required with --preset")
    params = {"N": args.N}
    if args.preset == "geometric":
        if args.q is None or args.m1 is None:
            raise PlanError("geometric preset needs --q and --m1")
        params.update(q=args.q, m_1=args.m1)
    elif args.preset == "corollary":
        if args.eps is None:
            raise PlanError("corollary preset needs --eps")
        params.update(eps=args.eps)
        if args.c0 is not None:
            params.update(c0=args.c0)
    return params


def _cmd_construct(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    if (args.preset is None) == (args.plan is None):
        raise PlanError("exactly one of --preset or --plan is required")
    if args.preset is not None:
        plan = preset(args.preset, **_preset_params(args))
    else:
        plan = load_plan(args.plan)
    N = args.N if args.N is not None else len(plan)

    profile_kwargs = {k: getattr(args, k) for k in
                      ("alpha", "beta", "gamma", "c_h", "a_offset", "a_slope")
                      if getattr(args, k) is not None}
    profile = ConstantProfile(**profile_kwargs)

    option_kwargs = {}
    if args.norm_oversample is not None:
        option_kwargs["norm_oversample"] = args.norm_oversample
    if args.level_oversample is not None:
        option_kwargs["level_oversample_floor"] = args.level_oversample
    if args.tol_x is not None:
        option_kwargs["tol_x"] = args.tol_x
    if args.refine_boundaries:
        option_kwargs["conservative"] = False
    if args.threads is not None:
        option_kwargs["threads"] = args.threads
    if args.no_sample_cache:
        option_kwargs["keep_samples"] = False
    options = RunOptions(**option_kwargs)

    def progress(state, rec):
        d_eff = state.plan.block(rec.n).d_eff
        sys.stderr.write(
            f"[construct] step {rec.n}/{N}: "
            f"survivors {rec.survivor_count}/{d_eff}, "
            f"sup <= {rec.partial_sup.upper:.9g}\n")

    t0 = time.perf_counter()
    state = run(plan, profile, N=N, options=options, hooks=progress,
                tolerate_collapse=True)
    wall = time.perf_counter() - t0
    outdir = save_run(state, args.out, wall_clock=wall)

    if state.collapsed_at is not None:
        detail = (f"survivor set empty at step {state.collapsed_at}; "
                  f"partial run saved to {outdir}")
        if not args.tolerate_collapse:
            _error("LambdaCollapse", detail)
            return EXIT_DOMAIN
        sys.stderr.write(f"[construct] {detail}\n")
    sys.stderr.write(
        f"[construct] wrote {state.steps_completed} blocks to {outdir} "
        f"in {wall:.2f}s\n")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    rundir = Path(args.rundir)
    state = load_run(rundir)
    report = build_report(state,
                          majorant=not args.no_majorant,
                          tail=not args.no_tail)
    save_report(report, rundir / "report.json")
    text = format_text(report)
    (rundir / "report.txt").write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_export(args: argparse.Namespace) -> int:
    state = load_run(Path(args.rundir))
    out = Path(args.out)
    if args.bounds == bool(args.poly):
        raise PlanError("exactly one of --bounds or --poly is required")
    lines = []
    if args.bounds:
        lines.append("N,sup_lower,sup_upper,rhs_theorem")
        for n in range(1, state.steps_completed + 1):
            sup = state.records[n - 1].partial_sup
            rhs = theorem_rhs(state.plan, state.profile, n)
            lines.append(_jsonio.csv_row([n, sup.lower, sup.upper, rhs]))
    else:
        if args.n is None or args.grid is None:
            raise PlanError("--poly needs both --n and --grid")
        if not 1 <= args.n <= state.steps_completed:
            raise PlanError(f"--n {args.n} outside completed steps "
                            f"1..{state.steps_completed}")
        p = state.partial(args.n) if args.poly == "S" else state.delta(args.n)
        vals = grid_eval(p, args.grid)  # GridTooSmall for under-resolved grids
        lines.append("x,re,im,abs")
        for k in range(args.grid):
            x = TWO_PI * k / args.grid
            v = vals[k]
            lines.append(_jsonio.csv_row([x, float(v.real), float(v.imag),
                                          float(abs(v))]))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    sys.stderr.write(f"[export] wrote {len(lines) - 1} rows to {out}\n")
    return EXIT_OK


def _cmd_presets(args: argparse.Namespace) -> int:
    for name in sorted(PRESETS):
        entry = PRESETS[name]
        sys.stdout.write(f"{name}: {entry['doc']}\n")
        for pname, pdoc in entry["params"].items():
            sys.stdout.write(f"  {pname}: {pdoc}\n")
    return EXIT_OK


_DISPATCH = {
    "construct": _cmd_construct,
    "verify": _cmd_verify,
    "export": _cmd_export,
    "presets": _cmd_presets,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (PlanError, GridTooSmall) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        _error("FileNotFound", str(exc))
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        _error("InvalidJSON", str(exc))
        return EXIT_CONFIG
    except (LambdaCollapse, ResolutionExceeded) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_DOMAIN
    except LacunaError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

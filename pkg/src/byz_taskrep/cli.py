"""Command-line front end.

Exit codes: 0 success, 2 bad usage or parameters, 3 adversary-model
violation, 4 wrong recovery or failed verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .adversary import (
    AttackPlan,
    HonestStrategy,
    commitment_worstcase_strategy,
    constrained_symmetrization,
    random_plan,
)
from .allocation import (
    AllocationMatrix,
    SystemParams,
    build_cyclic,
    k_star_range,
    largest_uk_submatrix,
)
from .errors import AdversaryModelViolation, BudgetExceeded, ParameterError
from .protocol_commit import run_commit
from .protocol_full import run_full
from .verify import exhaustive_check, format_csv, parse_csv, ratio_point, run_trivial

log = logging.getLogger("byz_taskrep")

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_FAILURE = 0, 2, 3, 4

SWEEP_KEYS = {"version", "n", "s", "u_list", "p_min", "p_max"}
PROTOCOLS = {"full": run_full, "commit": run_commit, "trivial": run_trivial}


def _add_params(ap):
    ap.add_argument("-n", type=int, required=False, help="number of workers")
    ap.add_argument("-p", type=int, required=False, help="number of sub-tasks")
    ap.add_argument("-s", type=int, required=True, help="maximum malicious workers")
    ap.add_argument("-u", type=int, required=True, help="honest surplus per sub-task")
    ap.add_argument("--grid", type=Path, help="allocation grid file (default: cyclic)")


def _instance(args):
    """Allocation and parameters from --grid or from -n/-p (cyclic)."""
    if args.grid is not None:
        A = AllocationMatrix.from_text(args.grid.read_text())
        if args.n not in (None, A.n) or args.p not in (None, A.p):
            raise ParameterError("-n/-p disagree with the grid file")
        params = SystemParams(n=A.n, p=A.p, s=args.s, u=args.u)
        return A, params
    if args.n is None or args.p is None:
        raise ParameterError("give -n and -p, or --grid")
    params = SystemParams(n=args.n, p=args.p, s=args.s, u=args.u)
    return build_cyclic(params), params


def cmd_alloc(args) -> int:
    params = SystemParams(n=args.n, p=args.p, s=args.s, u=args.u)
    A = build_cyclic(params)
    text = A.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"rho={params.rho}")
    print(f"lambda={params.lam}")
    if params.lam >= 1:
        lo, hi = k_star_range(params)
    else:
        lo = hi = largest_uk_submatrix(A, params.u).k
    bound = min(hi, params.trivial_bound) if params.s else 0
    if lo == hi:
        print(f"k*={lo}, bound={bound}")
    else:
        print(f"k* in [{lo},{hi}], bound<={bound}")
    return EXIT_OK


def _strategy(args, A, params):
    if args.attack_file:
        plan = AttackPlan.load(args.attack_file)
        plan.validate(A, params.s)
        return plan
    if args.attack == "none":
        return HonestStrategy()
    if args.attack == "symmetrization":
        return constrained_symmetrization(A, params, largest_uk_submatrix(A, params.u))
    if args.attack == "worstcase":
        return commitment_worstcase_strategy(A, params)
    if args.attack == "random":
        return random_plan(A, params, random.Random(args.seed), args.alphabet)
    raise ParameterError(f"unknown attack {args.attack!r}")


def cmd_simulate(args) -> int:
    A, params = _instance(args)
    strategy = _strategy(args, A, params)
    runner = PROTOCOLS[args.protocol]
    kwargs = {} if args.protocol == "trivial" else {"seed": args.seed, "tie_break": args.tie_break}
    out = runner(A, params, strategy, **kwargs)
    if args.out:
        Path(args.out).write_text(out.dumps())
    print(f"c={out.c}")
    print(f"kappa_values={out.kappa_values}")
    print(f"kappa_bits={out.kappa_bits}")
    print(f"rounds={out.rounds}")
    print(f"eliminated={sorted(w + 1 for w in out.eliminated)}")
    if not out.correct:
        print("recovered values differ from the truth", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_verify(args) -> int:
    A, params = _instance(args)
    report = exhaustive_check(A, params, args.alphabet, args.budget, game=not args.no_game,
                              move_cap=args.move_cap, node_cap=args.node_cap)
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    print(f"plans={report.plans}")
    print(f"max_c_full={report.max_c_full} (bound {report.c_bound})")
    print(f"max_c_trivial={report.max_c_trivial} (bound {params.s // params.u})")
    if report.game is not None:
        g = report.game
        flag = " lower bound only" if g.truncated else ""
        print(f"commit: max_c={g.max_c} max_kappa_values={g.max_kappa_values} "
              f"(bound {report.kappa_bound}){flag}")
    for f in report.failures:
        print(f"FAIL {f['claim']}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAILURE


def load_sweep_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ParameterError("sweep config must be a JSON object")
    unknown = set(cfg) - SWEEP_KEYS
    missing = SWEEP_KEYS - set(cfg)
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    if missing:
        raise ParameterError(f"missing config keys: {sorted(missing)}")
    if cfg["version"] != 1:
        raise ParameterError(f"unsupported config version {cfg['version']!r}")
    if cfg["p_min"] > cfg["p_max"]:
        raise ParameterError("p_min exceeds p_max")
    return cfg


def _threads() -> int:
    raw = os.environ.get("BYZ_TASKREP_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ParameterError(f"BYZ_TASKREP_THREADS must be an integer, got {raw!r}")


def sweep(cfg: dict) -> list:
    points = [(p, u) for p in range(cfg["p_min"], cfg["p_max"] + 1) for u in sorted(cfg["u_list"])]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda pu: ratio_point(cfg["n"], cfg["s"], pu[1], pu[0]), points))
    return sorted(rows, key=lambda r: (r.p, r.u))


def cmd_sweep(args) -> int:
    rows = sweep(load_sweep_config(args.config))
    text = format_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        from .plotting import plot_ratio
        plot_ratio(rows, args.svg)
    return EXIT_OK


def cmd_plot(args) -> int:
    rows = parse_csv(Path(args.csv).read_text())
    if not rows:
        raise ParameterError(f"{args.csv} has no data rows")
    from .plotting import plot_ratio
    plot_ratio(rows, args.svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="byz-taskrep", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("alloc", help="build a cyclic allocation and report k*")
    a.add_argument("-n", type=int, required=True)
    a.add_argument("-p", type=int, required=True)
    a.add_argument("-s", type=int, required=True)
    a.add_argument("-u", type=int, required=True)
    a.add_argument("--out", help="grid file to write (default: stdout)")
    a.set_defaults(func=cmd_alloc)

    sm = sub.add_parser("simulate", help="run one protocol against one attack")
    _add_params(sm)
    sm.add_argument("--protocol", choices=sorted(PROTOCOLS), default="full")
    sm.add_argument("--attack", choices=["none", "symmetrization", "worstcase", "random"],
                    default="none")
    sm.add_argument("--attack-file", help="attack plan JSON (overrides --attack)")
    sm.add_argument("--alphabet", type=int, default=2, help="value alphabet for random attacks")
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--tie-break", choices=["lowest", "random"], default="lowest")
    sm.add_argument("--out", help="transcript JSON to write")
    sm.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="exhaustive bound check on a small instance")
    _add_params(v)
    v.add_argument("--alphabet", type=int, default=2)
    v.add_argument("--budget", type=int, default=10 ** 6, help="maximum enumerated plans")
    v.add_argument("--no-game", action="store_true", help="skip the adaptive game search")
    v.add_argument("--move-cap", type=int, default=4096)
    v.add_argument("--node-cap", type=int, default=500_000)
    v.add_argument("--out", help="JSON report to write")
    v.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="ratio table over a (p, u) grid")
    sw.add_argument("config", help="JSON config with version, n, s, u_list, p_min, p_max")
    sw.add_argument("--out", help="CSV file to write (default: stdout)")
    sw.add_argument("--svg", help="also render the table to this SVG file")
    sw.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="render a sweep CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("svg")
    pl.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParameterError, BudgetExceeded, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdversaryModelViolation as exc:
        print(f"adversary-model violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())

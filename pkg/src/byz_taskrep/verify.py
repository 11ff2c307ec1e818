"""Bound checking: the trivial baseline, exhaustive one-shot sweeps, adaptive
game search and the local-computation ratio table."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .adversary import AttackPlan, adversary_game_search, enumerate_one_shot
from .allocation import (
    AllocationMatrix,
    SystemParams,
    k_star_range,
    largest_uk_submatrix,
    lower_bound_local,
)
from .errors import ParameterError
from .protocol_commit import communication_bound, run_commit
from .protocol_full import Outcome, check_instance, collect_values, run_full
from .responses import (
    KnowledgeState,
    Oracle,
    ValueTable,
    apply_local_computation,
    default_truth,
    groups_of,
    resolve_small_groups,
)


def run_trivial(A: AllocationMatrix, params: SystemParams, plan, truth=None) -> Outcome:
    """Baseline: drop groups smaller than u, then query every still-contested sub-task."""
    check_instance(A, params)
    truth = default_truth(A.p) if truth is None else tuple(truth)
    view = ValueTable(A, collect_values(A, plan, truth))
    state = KnowledgeState(params.n, params.s, params.u)
    state.log("round", round=1, table=view.snapshot())
    oracle = Oracle(truth)
    resolve_small_groups(state, view)
    while True:
        contested = [i for i in view.subtasks()
                     if i not in state.solved and len(groups_of(view, i)) >= 2]
        if not contested:
            break
        apply_local_computation(state, view, contested[0], oracle, phase="trivial",
                                rules=resolve_small_groups)
    return Outcome(
        solved=[state.solved[i] for i in range(A.p)],
        c=oracle.query_count,
        kappa_values=sum(A.row_sums()),
        kappa_bits=0,
        rounds=1,
        eliminated=frozenset(state.eliminated),
        events=state.events,
        truth=truth,
    )


@dataclass
class CheckReport:
    plans: int = 0
    c_bound: int = 0
    kappa_bound: int = 0
    hist_c_full: Counter = field(default_factory=Counter)
    hist_c_trivial: Counter = field(default_factory=Counter)
    hist_kappa_full: Counter = field(default_factory=Counter)
    witness_full: AttackPlan | None = None
    game: object = None
    failures: list[dict] = field(default_factory=list)

    @property
    def max_c_full(self) -> int:
        return max(self.hist_c_full, default=0)

    @property
    def max_c_trivial(self) -> int:
        return max(self.hist_c_trivial, default=0)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, claim: str, plan=None, **detail) -> None:
        entry = {"claim": claim, **detail}
        if plan is not None:
            entry["witness"] = plan.to_json()
        self.failures.append(entry)

    def to_json(self) -> dict:
        def hist(h):
            return {str(k): h[k] for k in sorted(h)}
        return {
            "ok": self.ok,
            "plans": self.plans,
            "c_bound": self.c_bound,
            "kappa_bound": self.kappa_bound,
            "max_c_full": self.max_c_full,
            "max_c_trivial": self.max_c_trivial,
            "hist_c_full": hist(self.hist_c_full),
            "hist_c_trivial": hist(self.hist_c_trivial),
            "hist_kappa_full": hist(self.hist_kappa_full),
            "witness_full": None if self.witness_full is None else self.witness_full.to_json(),
            "game": None if self.game is None else self.game.to_json(),
            "failures": self.failures,
        }


def _check_run(report: CheckReport, name: str, runner, A, params, plan, cap: int):
    try:
        out = runner(A, params, plan)
    except Exception as exc:  # a crash on an admissible attack is itself a finding
        report.fail(f"{name} raised", plan, error=f"{type(exc).__name__}: {exc}")
        return None
    if not out.correct:
        report.fail(f"{name} recovered wrong values", plan)
    if not out.eliminated <= plan.malicious:
        report.fail(f"{name} eliminated an honest worker", plan,
                    workers=sorted(w + 1 for w in out.eliminated - plan.malicious))
    if out.c > cap:
        report.fail(f"{name} exceeded its local-computation bound", plan, c=out.c, bound=cap)
    return out


def exhaustive_check(A: AllocationMatrix, params: SystemParams, alphabet_size: int = 2,
                     budget: int = 10 ** 6, game: bool = True, move_cap: int = 4096,
                     node_cap: int = 500_000) -> CheckReport:
    check_instance(A, params)
    report = CheckReport()
    k = largest_uk_submatrix(A, params.u).k if params.s else 0
    report.c_bound = lower_bound_local(k, params.s, params.u) if params.s else 0
    report.kappa_bound = communication_bound(params)
    trivial_cap = params.s // params.u

    best = -1
    for plan in enumerate_one_shot(A, params, alphabet_size, budget):
        report.plans += 1
        full = _check_run(report, "run_full", run_full, A, params, plan, report.c_bound)
        triv = _check_run(report, "run_trivial", run_trivial, A, params, plan, trivial_cap)
        if full is not None:
            report.hist_c_full[full.c] += 1
            report.hist_kappa_full[full.kappa_values] += 1
            if full.c > best:
                best, report.witness_full = full.c, plan
        if triv is not None:
            report.hist_c_trivial[triv.c] += 1

    if game:
        res = adversary_game_search(run_commit, A, params, alphabet_size, move_cap, node_cap)
        report.game = res
        if res.max_c > report.max_c_full:
            report.fail("worst-case run_commit needs more local computations than run_full",
                        commit=res.max_c, full=report.max_c_full)
        if res.max_kappa_values > report.kappa_bound:
            report.fail("run_commit exceeded the value-symbol bound",
                        kappa=res.max_kappa_values, bound=report.kappa_bound,
                        witness={"malicious": sorted(w + 1 for w in res.witness_kappa[0]),
                                 "moves": list(res.witness_kappa[1])})
    return report


# ---------------------------------------------------------------------------
# ratio table

CSV_HEADER = ("p", "u", "lambda", "k_star", "exact", "c_bound", "trivial_bound", "ratio")


@dataclass(frozen=True)
class RatioRow:
    p: int
    u: int
    lam: int
    k_star: int
    exact: bool
    c_bound: int
    trivial_bound: int
    ratio: float


def ratio_point(n: int, s: int, u: int, p: int) -> RatioRow:
    params = SystemParams(n=n, p=p, s=s, u=u)
    if params.s == 0:
        raise ParameterError("the ratio is undefined for s = 0")
    if params.lam < 1:
        raise ParameterError(f"p={p} is smaller than n={n}")
    lo, hi = k_star_range(params)
    exact = p % n == 0
    c_bound = lower_bound_local(hi, s, u)
    return RatioRow(p, u, params.lam, hi, exact, c_bound, s // u, c_bound / (s // u))


def ratio_table(n: int, s: int, u_list: Iterable[int], p_list: Iterable[int]) -> list[RatioRow]:
    p_list = list(p_list)
    return [ratio_point(n, s, u, p) for p in sorted(p_list) for u in sorted(u_list)]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def format_csv(rows: Sequence[RatioRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(_fmt(x) for x in (r.p, r.u, r.lam, r.k_star, r.exact,
                                     r.c_bound, r.trivial_bound, r.ratio))
    return buf.getvalue()


def parse_csv(text: str) -> list[RatioRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != CSV_HEADER:
        raise ParameterError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        p, u, lam, k, exact, cb, tb = (int(x) for x in rec[:7])
        rows.append(RatioRow(p, u, lam, k, bool(exact), cb, tb, float(rec[7])))
    return rows

"""One-shot full-communication recovery.

Every worker reports every allotted sub-task.  The central node applies the
trivial rules, spends greedy local computations on the sub-tasks with the
most disagreement while any has more than u disagreeing workers, and hands
the rest to the logic engine.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from . import logic
from .adversary import Strategy
from .allocation import AllocationMatrix, SystemParams
from .errors import ParameterError
from .responses import (
    KnowledgeState,
    Oracle,
    ValueTable,
    apply_local_computation,
    corrupted,
    default_truth,
    disagreement,
    one_based,
    resolve_trivial,
)


@dataclass
class Outcome:
    solved: list[int]
    c: int
    kappa_values: int
    kappa_bits: int
    rounds: int
    eliminated: frozenset[int]
    events: list[dict] = field(default_factory=list)
    round_records: list = field(default_factory=list)
    truth: tuple[int, ...] = ()

    @property
    def correct(self) -> bool:
        return tuple(self.solved) == tuple(self.truth)

    def to_json(self) -> dict:
        out = {
            "c": self.c,
            "kappa_values": self.kappa_values,
            "kappa_bits": self.kappa_bits,
            "rounds": self.rounds,
            "solved": list(self.solved),
            "eliminated": one_based(self.eliminated),
            "events": self.events,
        }
        if self.round_records:
            out["round_records"] = [r.to_json() for r in self.round_records]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def check_instance(A: AllocationMatrix, params: SystemParams) -> None:
    if (A.p, A.n) != (params.p, params.n):
        raise ParameterError(f"allocation is {A.p}x{A.n}, params say {params.p}x{params.n}")
    A.require_balanced(params.rho)


def rank_corrupted(view, state: KnowledgeState, rng: random.Random | None = None) -> list[int]:
    """Corrupted sub-tasks by decreasing disagreement; ties by index, or shuffled by ``rng``."""
    items = corrupted(view, state)
    if rng is None:
        return sorted(items, key=lambda i: (-disagreement(view, i), i))
    keyed = {i: rng.random() for i in items}
    return sorted(items, key=lambda i: (-disagreement(view, i), keyed[i]))


def run_pipeline(view, state: KnowledgeState, oracle: Oracle,
                 rng: random.Random | None = None) -> None:
    """Rules, greedy local computations, then the logic engine, on any view."""
    while True:
        resolve_trivial(state, view)
        ranked = rank_corrupted(view, state, rng)
        if not ranked or disagreement(view, ranked[0]) <= state.u:
            break
        apply_local_computation(state, view, ranked[0], oracle, phase="greedy")
    logic.run(view, state, oracle)


def collect_values(A: AllocationMatrix, strategy: Strategy, truth: Sequence[int]):
    """Full reports: honest cells carry the truth, malicious ones come from the strategy."""
    malicious = strategy.malicious
    requests = [(w, i) for i in range(A.p) for w in sorted(A.row_support[i]) if w in malicious]
    values, _ = strategy.respond(0, requests, [], truth)
    if set(values) != set(requests):
        raise ParameterError("strategy did not answer exactly the requested cells")
    reports = {(w, i): truth[i] for i in range(A.p) for w in A.row_support[i]}
    reports.update(values)
    return reports


def _tie_rng(seed, tie_break):
    if tie_break == "lowest":
        return None
    if tie_break == "random":
        return random.Random(seed)
    raise ParameterError(f"unknown tie-break policy {tie_break!r}")


def run_full(A: AllocationMatrix, params: SystemParams, strategy: Strategy,
             seed: int | None = 0, truth: Sequence[int] | None = None,
             tie_break: str = "lowest") -> Outcome:
    check_instance(A, params)
    truth = default_truth(A.p) if truth is None else tuple(truth)
    if len(strategy.malicious) > params.s:
        raise ParameterError(f"strategy uses {len(strategy.malicious)} malicious workers, s={params.s}")
    view = ValueTable(A, collect_values(A, strategy, truth))
    state = KnowledgeState(params.n, params.s, params.u)
    state.log("round", round=1, table=view.snapshot())
    oracle = Oracle(truth)
    run_pipeline(view, state, oracle, _tie_rng(seed, tie_break))
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

"""Multi-round commitment-based recovery.

Each round one representative per unsolved sub-task sends its value; every
other active allotted worker sends a single yes/no bit.  The full-protocol
pipeline then runs on the commitment table.  A sub-task whose
representative's value is proven false without a local computation stays
unsolved and is carried into the next round with a fresh representative.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .adversary import Strategy
from .allocation import AllocationMatrix, SystemParams
from .errors import AdversaryModelViolation, ParameterError
from .protocol_full import Outcome, _tie_rng, check_instance, run_pipeline
from .responses import (
    CommitEntry,
    CommitmentTable,
    KnowledgeState,
    Oracle,
    default_truth,
    one_based,
)


@dataclass
class RoundRecord:
    index: int
    representatives: dict[int, int]
    values_sent: int
    bits_sent: int
    eliminated: list[int] = field(default_factory=list)
    newly_solved: list[int] = field(default_factory=list)
    local_computations: int = 0

    def to_json(self) -> dict:
        return {
            "round": self.index + 1,
            "representatives": {str(i + 1): w + 1 for i, w in sorted(self.representatives.items())},
            "values_sent": self.values_sent,
            "bits_sent": self.bits_sent,
            "eliminated": one_based(self.eliminated),
            "newly_solved": [i + 1 for i in self.newly_solved],
            "local_computations": self.local_computations,
        }


RepPolicy = Callable[[Sequence[int], AllocationMatrix, set, Sequence[RoundRecord]], dict]


def _served(history: Sequence[RoundRecord], i: int) -> set[int]:
    return {rec.representatives[i] for rec in history if i in rec.representatives}


def rep_policy_default(unsolved: Sequence[int], A: AllocationMatrix, eliminated: set,
                       history: Sequence[RoundRecord]) -> dict[int, int]:
    """Spread representatives: fewest-served-this-round first, lowest index on ties.

    A worker that already represented a sub-task is only reused for it when
    no other active allotted worker remains.
    """
    load: Counter = Counter()
    reps = {}
    for i in sorted(unsolved):
        active = sorted(A.row_support[i] - eliminated)
        if not active:
            raise AdversaryModelViolation(f"sub-task {i + 1} has no active allotted worker")
        served = _served(history, i)
        w = min(active, key=lambda w: (w in served, load[w], w))
        reps[i] = w
        load[w] += 1
    return reps


def rep_policy_lowest(unsolved: Sequence[int], A: AllocationMatrix, eliminated: set,
                      history: Sequence[RoundRecord]) -> dict[int, int]:
    """Lowest-indexed active allotted worker not yet a representative for that sub-task."""
    reps = {}
    for i in sorted(unsolved):
        active = sorted(A.row_support[i] - eliminated)
        if not active:
            raise AdversaryModelViolation(f"sub-task {i + 1} has no active allotted worker")
        served = _served(history, i)
        reps[i] = min(active, key=lambda w: (w in served, w))
    return reps


def communication_bound(params: SystemParams) -> int:
    """p + (floor(s/u) - 1) * u value symbols, ignoring single-bit commitments."""
    return params.p + max(params.s // params.u - 1, 0) * params.u


def run_commit(A: AllocationMatrix, params: SystemParams, strategy: Strategy,
               seed: int | None = 0, truth: Sequence[int] | None = None,
               rep_policy: RepPolicy | None = None, tie_break: str = "lowest") -> Outcome:
    check_instance(A, params)
    truth = default_truth(A.p) if truth is None else tuple(truth)
    rep_policy = rep_policy_default if rep_policy is None else rep_policy
    malicious = strategy.malicious
    if len(malicious) > params.s:
        raise ParameterError(f"strategy uses {len(malicious)} malicious workers, s={params.s}")
    rng = _tie_rng(seed, tie_break)
    state = KnowledgeState(params.n, params.s, params.u)
    oracle = Oracle(truth)
    unsolved = list(range(A.p))
    records: list[RoundRecord] = []
    # every carried round costs the adversary at least one eliminated worker
    max_rounds = params.s + 1

    while unsolved:
        r = len(records)
        if r >= max_rounds:
            raise RuntimeError(f"commitment protocol did not terminate within {max_rounds} rounds")
        reps = rep_policy(unsolved, A, set(state.eliminated), records)
        active = {i: sorted(A.row_support[i] - state.eliminated) for i in unsolved}
        for i in unsolved:
            if reps.get(i) not in active[i]:
                raise ParameterError(f"policy chose an invalid representative for sub-task {i + 1}")
        value_req = [(reps[i], i) for i in unsolved if reps[i] in malicious]
        bit_req = [(w, i, reps[i]) for i in unsolved for w in active[i]
                   if w != reps[i] and w in malicious]
        values, bits = strategy.respond(r, value_req, bit_req, truth)
        if set(values) != set(value_req) or set(bits) != {(w, i) for w, i, _ in bit_req}:
            raise ParameterError("strategy did not answer exactly the requested cells")

        entries = {}
        bits_sent = 0
        for i in unsolved:
            rep = reps[i]
            rep_value = values[(rep, i)] if rep in malicious else truth[i]
            e = CommitEntry(rep, rep_value)
            for w in active[i]:
                if w == rep:
                    continue
                bits_sent += 1
                yes = bits[(w, i)] if w in malicious else rep_value == truth[i]
                (e.yes if yes else e.no).add(w)
            entries[i] = e
        table = CommitmentTable(A, entries)
        state.log("round", round=r + 1, table=table.snapshot())

        c0, elim0 = oracle.query_count, set(state.eliminated)
        run_pipeline(table, state, oracle, rng)
        newly = [i for i in unsolved if i in state.solved]
        records.append(RoundRecord(
            index=r,
            representatives=dict(reps),
            values_sent=len(unsolved),
            bits_sent=bits_sent,
            eliminated=sorted(state.eliminated - elim0),
            newly_solved=newly,
            local_computations=oracle.query_count - c0,
        ))
        unsolved = [i for i in unsolved if i not in state.solved]

    return Outcome(
        solved=[state.solved[i] for i in range(A.p)],
        c=oracle.query_count,
        kappa_values=sum(r.values_sent for r in records),
        kappa_bits=sum(r.bits_sent for r in records),
        rounds=len(records),
        eliminated=frozenset(state.eliminated),
        events=state.events,
        round_records=records,
        truth=truth,
    )

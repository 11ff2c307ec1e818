"""The central node's view of worker responses and the deduction rules shared
by every protocol.

A *view* is either a :class:`ValueTable` (every active worker reports a full
value) or a :class:`CommitmentTable` (one representative value plus yes/no
bits).  Both expose the same surface: ``sides(i)`` returns the agreement
groups of sub-task ``i``, and in each unsolved, non-refuted sub-task exactly
one of the following holds: the true value is a side's value, or (commitment
view) the representative's value is false.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .allocation import AllocationMatrix
from .errors import AdversaryModelViolation


def default_truth(p: int) -> tuple[int, ...]:
    return (0,) * p


def one_based(workers: Iterable[int]) -> list[int]:
    return [w + 1 for w in sorted(workers)]


class Oracle:
    """Local computation: returns the true value of a sub-task and counts queries."""

    def __init__(self, truth: Sequence[int]):
        self.truth = tuple(truth)
        self.query_count = 0

    def query(self, subtask: int) -> int:
        self.query_count += 1
        return self.truth[subtask]


@dataclass(frozen=True)
class Side:
    """One agreement group of a sub-task.

    ``value`` is None for the no-side of a commitment, whose members merely
    deny the representative's value and need not agree with each other.
    """

    members: frozenset[int]
    value: int | None
    agreement_known: bool
    label: str  # "value", "rep" or "no"

    def __len__(self):
        return len(self.members)


def _order(sides: Iterable[Side]) -> list[Side]:
    return sorted(
        (sd for sd in sides if sd.members),
        key=lambda sd: (-len(sd.members), min(sd.members)),
    )


class ValueTable:
    kind = "value"

    def __init__(self, A: AllocationMatrix, reports: Mapping[tuple[int, int], int]):
        self.A = A
        self.table: dict[int, dict[int, int]] = {i: {} for i in range(A.p)}
        for (w, i), v in reports.items():
            if w not in A.row_support[i]:
                raise ValueError(f"worker {w + 1} reported on unallotted sub-task {i + 1}")
            self.table[i][w] = v

    def subtasks(self) -> list[int]:
        return sorted(self.table)

    def responders(self, i: int) -> frozenset[int]:
        return frozenset(self.table[i])

    def sides(self, i: int) -> list[Side]:
        by_value: dict[int, set[int]] = {}
        for w, v in self.table[i].items():
            by_value.setdefault(v, set()).add(w)
        return _order(Side(frozenset(ws), v, True, "value") for v, ws in by_value.items())

    def refuted(self, i: int) -> bool:
        return False

    def drop(self, workers: Iterable[int]) -> None:
        workers = set(workers)
        for row in self.table.values():
            for w in workers & row.keys():
                del row[w]

    def snapshot(self) -> dict:
        return {
            str(i + 1): {str(w + 1): v for w, v in sorted(row.items())}
            for i, row in sorted(self.table.items())
        }


@dataclass
class CommitEntry:
    rep: int | None
    rep_value: int
    yes: set[int] = field(default_factory=set)
    no: set[int] = field(default_factory=set)
    refuted: bool = False


class CommitmentTable:
    kind = "commit"

    def __init__(self, A: AllocationMatrix, entries: Mapping[int, CommitEntry]):
        self.A = A
        self.entries = dict(entries)
        for i, e in self.entries.items():
            parts = ({e.rep} if e.rep is not None else set(), e.yes, e.no)
            if parts[0] & (e.yes | e.no) or e.yes & e.no:
                raise ValueError(f"commitment sets of sub-task {i + 1} overlap")
            if not set().union(*parts) <= A.row_support[i]:
                raise ValueError(f"commitment on sub-task {i + 1} from an unallotted worker")

    def subtasks(self) -> list[int]:
        return sorted(self.entries)

    def responders(self, i: int) -> frozenset[int]:
        e = self.entries[i]
        return frozenset(({e.rep} if e.rep is not None else set()) | e.yes | e.no)

    def rep_side(self, i: int) -> Side:
        e = self.entries[i]
        members = set(e.yes)
        if e.rep is not None:
            members.add(e.rep)
        return Side(frozenset(members), e.rep_value, True, "rep")

    def no_side(self, i: int) -> Side:
        return Side(frozenset(self.entries[i].no), None, False, "no")

    def sides(self, i: int) -> list[Side]:
        if self.entries[i].refuted:
            return _order([self.no_side(i)])
        return _order([self.rep_side(i), self.no_side(i)])

    def refuted(self, i: int) -> bool:
        return self.entries[i].refuted

    def refute(self, i: int) -> None:
        self.entries[i].refuted = True

    def drop(self, workers: Iterable[int]) -> None:
        workers = set(workers)
        for e in self.entries.values():
            if e.rep in workers:
                e.rep = None
            e.yes -= workers
            e.no -= workers

    def snapshot(self) -> dict:
        out = {}
        for i, e in sorted(self.entries.items()):
            out[str(i + 1)] = {
                "rep": None if e.rep is None else e.rep + 1,
                "rep_value": e.rep_value,
                "yes": one_based(e.yes),
                "no": one_based(e.no),
            }
        return out


@dataclass
class KnowledgeState:
    """What the central node has proven so far."""

    n: int
    s: int
    u: int
    eliminated: set[int] = field(default_factory=set)
    confirmed_honest: set[int] = field(default_factory=set)
    solved: dict[int, int] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)

    @property
    def budget(self) -> int:
        return self.s - len(self.eliminated)

    def log(self, event: str, **fields) -> None:
        self.events.append({"event": event, **fields})


def eliminate(state: KnowledgeState, view, workers: Iterable[int], rule: str,
              subtask: int | None = None) -> bool:
    new = set(workers) - state.eliminated
    if not new:
        return False
    if new & state.confirmed_honest:
        raise AdversaryModelViolation(
            f"rule {rule} would eliminate confirmed-honest workers {one_based(new & state.confirmed_honest)}"
        )
    state.eliminated |= new
    if len(state.eliminated) > state.s:
        raise AdversaryModelViolation(
            f"rule {rule} implies {len(state.eliminated)} malicious workers, more than s={state.s}"
        )
    view.drop(new)
    state.log("eliminate", rule=rule, subtask=None if subtask is None else subtask + 1,
              workers=one_based(new))
    if state.budget == 0:
        state.confirmed_honest = set(range(state.n)) - state.eliminated
    return True


def solve(state: KnowledgeState, subtask: int, value: int, rule: str) -> bool:
    if subtask in state.solved:
        if state.solved[subtask] != value:
            raise AdversaryModelViolation(
                f"sub-task {subtask + 1} deduced as both {state.solved[subtask]} and {value}"
            )
        return False
    state.solved[subtask] = value
    state.log("solve", rule=rule, subtask=subtask + 1, value=value)
    return True


def groups_of(view, subtask: int) -> list[Side]:
    """Non-empty agreement groups, largest first, ties broken by smallest member."""
    return view.sides(subtask)


def disagreement(view, subtask: int) -> int:
    groups = groups_of(view, subtask)
    if not groups:
        return 0
    return sum(len(g) for g in groups) - len(groups[0])


def is_open(view, state: KnowledgeState, subtask: int) -> bool:
    return subtask not in state.solved and not view.refuted(subtask)


def corrupted(view, state: KnowledgeState) -> list[int]:
    """Open sub-tasks with responses on more than one side."""
    return [
        i for i in view.subtasks()
        if is_open(view, state, i) and len(groups_of(view, i)) > 1
    ]


def _apply_rules_once(state: KnowledgeState, view, i: int) -> bool:
    u, b = state.u, state.budget
    if view.kind == "value":
        sides = view.sides(i)
        if not sides:
            raise AdversaryModelViolation(f"sub-task {i + 1} has no surviving responders")
        small = [sd for sd in sides if len(sd) < u]
        if small:
            return eliminate(state, view, set().union(*(sd.members for sd in small)), "R1", i)
        big = [sd for sd in sides if len(sd) > b]
        if len(big) > 1:
            raise AdversaryModelViolation(f"sub-task {i + 1}: two groups exceed the budget")
        if big:
            truth = big[0]
            liars = set().union(*(sd.members for sd in sides if sd is not truth))
            eliminate(state, view, liars, "R2", i)
            solve(state, i, truth.value, "R2")
            return True
        if len(sides) == 1:
            return solve(state, i, sides[0].value, "R3")
        return False

    rep, no = view.rep_side(i), view.no_side(i)
    rep_false = len(rep) < u or len(no) > b
    rep_true = len(no) < u or len(rep) > b
    if rep_false and rep_true:
        raise AdversaryModelViolation(f"sub-task {i + 1}: commitment sides contradict")
    if rep_false:
        rule = "R1" if len(rep) < u else "R2"
        eliminate(state, view, rep.members, rule, i)
        view.refute(i)
        state.log("refute", rule=rule, subtask=i + 1)
        return True
    if rep_true:
        rule = "R1'" if len(no) < u else "R2"
        eliminate(state, view, no.members, rule, i)
        solve(state, i, rep.value, rule)
        return True
    return False


def resolve_trivial(state: KnowledgeState, view) -> bool:
    """Apply R1, R1', R2, R3 to a fixpoint.  Returns True if anything changed."""
    changed_any = False
    changed = True
    while changed:
        changed = False
        for i in view.subtasks():
            if not is_open(view, state, i):
                continue
            if _apply_rules_once(state, view, i):
                changed = changed_any = True
                break
    return changed_any


def resolve_small_groups(state: KnowledgeState, view) -> bool:
    """The baseline's rules only: drop groups smaller than u, accept unanimous sub-tasks."""
    if view.kind != "value":
        raise TypeError("the baseline works on full value tables")
    changed_any = False
    changed = True
    while changed:
        changed = False
        for i in view.subtasks():
            if i in state.solved:
                continue
            sides = view.sides(i)
            small = [sd for sd in sides if len(sd) < state.u]
            if small:
                eliminate(state, view, set().union(*(sd.members for sd in small)), "R1", i)
                changed = changed_any = True
                break
            if len(sides) == 1:
                solve(state, i, sides[0].value, "R3")
                changed = changed_any = True
                break
            if not sides:
                raise AdversaryModelViolation(f"sub-task {i + 1} has no surviving responders")
    return changed_any


def apply_local_computation(state: KnowledgeState, view, subtask: int, oracle: Oracle,
                            phase: str = "", rules=resolve_trivial) -> int:
    """Query the oracle on ``subtask``, eliminate the liars it exposes, re-run the rules."""
    wasted = subtask in state.solved
    truth = oracle.query(subtask)
    state.log("local_computation", subtask=subtask + 1, value=truth, phase=phase, wasted=wasted)
    if not wasted:
        if view.kind == "value":
            sides = view.sides(subtask)
            if sides and not any(sd.value == truth for sd in sides):
                raise AdversaryModelViolation(f"no responder of sub-task {subtask + 1} is truthful")
            liars = set().union(set(), *(sd.members for sd in sides if sd.value != truth))
        elif view.refuted(subtask):
            liars = set()
        else:
            rep = view.rep_side(subtask)
            liars = set(view.no_side(subtask).members if rep.value == truth else rep.members)
        eliminate(state, view, liars, "LC", subtask)
        solve(state, subtask, truth, "LC")
    rules(state, view)
    return truth

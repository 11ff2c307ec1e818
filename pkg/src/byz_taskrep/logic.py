"""Logic-based elimination for views in which every corrupted sub-task has
exactly two sides, the smaller of size exactly u.

After the trivial rules reach their fixpoint on such a view, every corrupted
sub-task has a majority whose size equals the remaining malicious budget.
Any assumption about which side of a sub-task is truthful therefore pins
down the remaining malicious set, and pairs of sub-tasks can often be
resolved by contradiction.  Each pair is tagged with the proof case it falls
under; the deduction applied is the one common to every hypothesis the
budget still allows, so a tag never licenses an unsound elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .errors import AdversaryModelViolation
from .responses import (
    KnowledgeState,
    Oracle,
    apply_local_computation,
    corrupted,
    eliminate,
    groups_of,
    one_based,
    resolve_trivial,
)

CASE1 = "CASE1"
CASE2A = "CASE2A"
CASE2B = "CASE2B"
CASE3A = "CASE3A"
CASE3B_I = "CASE3B_I"
CASE3B_II = "CASE3B_II"
NONE = "NONE"

LC_CASES = (CASE2A, CASE3B_I)


@dataclass(frozen=True)
class PairCase:
    tag: str
    pair: tuple[int, int]
    minorities: tuple[frozenset[int], frozenset[int]]
    majorities: tuple[frozenset[int], frozenset[int]]


def minority_majority(view, subtask: int) -> tuple[frozenset[int], frozenset[int]]:
    groups = groups_of(view, subtask)
    if len(groups) != 2:
        raise ValueError(f"sub-task {subtask + 1} does not have exactly two sides")
    return groups[1].members, groups[0].members


def precondition_check(view, state: KnowledgeState) -> bool:
    for i in corrupted(view, state):
        groups = groups_of(view, i)
        if len(groups) != 2 or len(groups[1]) != state.u:
            return False
    return True


def dedupe(view, state: KnowledgeState) -> dict[int, list[int]]:
    """Map each representative corrupted sub-task to the peers it stands for.

    Peers share both the minority and the majority set; resolving the
    representative resolves them through the trivial rules.
    """
    reps: dict[tuple[frozenset[int], frozenset[int]], int] = {}
    out: dict[int, list[int]] = {}
    for i in corrupted(view, state):
        key = minority_majority(view, i)
        if key in reps:
            out[reps[key]].append(i)
        else:
            reps[key] = i
            out[i] = [i]
    return out


def classify_pair(i: int, j: int, view) -> PairCase:
    sets = {i: minority_majority(view, i), j: minority_majority(view, j)}

    def case(tag, a=i, b=j):
        return PairCase(tag, (a, b), (sets[a][0], sets[b][0]), (sets[a][1], sets[b][1]))

    (Wi, Mi), (Wj, Mj) = sets[i], sets[j]
    if Wi == Wj:
        return case(NONE if Mi == Mj else CASE1)
    if Wi & Wj:
        return case(CASE2A if Mi == Mj else CASE2B)
    Ni, Nj = Wi | Mi, Wj | Mj
    if not Wi & Nj and Wj & Ni:
        # normalise so the first sub-task's minority meets the second sub-task
        i, j = j, i
        (Wi, Mi), (Wj, Mj) = sets[i], sets[j]
        Ni, Nj = Nj, Ni
    if Wi & Nj:
        if not Wj <= Ni:
            return case(CASE3A, i, j)
        if not Wi <= Nj:
            return case(CASE3A, j, i)
        return case(NONE, i, j)
    return case(CASE3B_I if Mi == Mj else CASE3B_II, i, j)


def consistent_hypotheses(case: PairCase, budget: int) -> list[frozenset[int]]:
    """Malicious sets forced by each admissible (side_i, side_j) truth choice.

    A hypothesis says, per sub-task, whether the minority or the majority is
    truthful; its forced set is the union of the two lying sides.
    """
    (Wi, Wj), (Mi, Mj) = case.minorities, case.majorities
    out = []
    for liar_i, liar_j in product((Wi, Mi), (Wj, Mj)):
        forced = liar_i | liar_j
        if len(forced) <= budget:
            out.append(forced)
    return out


def apply_case(case: PairCase, view, state: KnowledgeState, oracle: Oracle) -> bool:
    """Act on a tagged pair.  Returns True if the knowledge state changed."""
    if case.tag == NONE:
        return False
    hyps = consistent_hypotheses(case, state.budget)
    if not hyps:
        raise AdversaryModelViolation(
            f"{case.tag} on sub-tasks {one_based(case.pair)}: no admissible hypothesis"
        )
    i, j = case.pair
    if case.tag in LC_CASES and len(hyps) > 1:
        target = min(i, j)
        state.log("case", tag=case.tag, pair=[i + 1, j + 1], eliminated=[], lc=target + 1)
        apply_local_computation(state, view, target, oracle, phase="loop1")
        return True
    common = frozenset.intersection(*hyps)
    if not common:
        return False
    state.log("case", tag=case.tag, pair=[i + 1, j + 1], eliminated=one_based(common), lc=None)
    eliminate(state, view, common, case.tag)
    resolve_trivial(state, view)
    return True


def _loop1(view, state: KnowledgeState, oracle: Oracle) -> bool:
    groups = dedupe(view, state)
    for i, j in combinations(sorted(groups), 2):
        if apply_case(classify_pair(i, j, view), view, state, oracle):
            return True
    return False


def run(view, state: KnowledgeState, oracle: Oracle) -> KnowledgeState:
    """Loop 1 over sub-task pairs, then local computations on what is left."""
    resolve_trivial(state, view)
    if not precondition_check(view, state):
        raise ValueError("logic engine needs exactly u disagreeing workers per corrupted sub-task")
    while True:
        if _loop1(view, state, oracle):
            if not precondition_check(view, state):
                raise AssertionError("rule fixpoint broke the exactly-u structure")
            continue
        remaining = corrupted(view, state)
        if not remaining:
            return state
        apply_local_computation(state, view, remaining[0], oracle, phase="loop2")

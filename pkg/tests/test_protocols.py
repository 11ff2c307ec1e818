import pytest

from byz_taskrep.adversary import (
    AttackPlan,
    HonestStrategy,
    WorstCaseStrategy,
    commitment_worstcase_strategy,
    constrained_symmetrization,
)
from byz_taskrep.allocation import SystemParams, build_cyclic, largest_uk_submatrix
from byz_taskrep.errors import BalanceError, ParameterError
from byz_taskrep.protocol_commit import (
    communication_bound,
    rep_policy_default,
    rep_policy_lowest,
    run_commit,
)
from byz_taskrep.protocol_full import run_full, run_pipeline
from byz_taskrep.responses import CommitEntry, CommitmentTable, KnowledgeState, Oracle

MID = SystemParams(9, 9, 4, 2)
A9 = build_cyclic(MID)


def symmetrization(A, P):
    return constrained_symmetrization(A, P, largest_uk_submatrix(A, P.u))


@pytest.mark.parametrize("runner", [run_full, run_commit])
def test_no_attack(runner):
    out = runner(A9, MID, HonestStrategy())
    assert out.correct and out.c == 0 and out.rounds == 1
    assert out.kappa_values == (54 if runner is run_full else 9)


def test_full_symmetrization_mid_instance():
    out = run_full(A9, MID, symmetrization(A9, MID))
    assert out.c == 2 and out.correct and len(out.eliminated) == 4


def test_full_symmetrization_allocation_limited():
    P = SystemParams(6, 6, 4, 1)
    A = build_cyclic(P)
    out = run_full(A, P, symmetrization(A, P))
    assert out.c == 3 and out.correct


def test_random_tie_break_is_seeded():
    plan = symmetrization(A9, MID)
    a = run_full(A9, MID, plan, seed=7, tie_break="random")
    b = run_full(A9, MID, plan, seed=7, tie_break="random")
    assert a.events == b.events and a.correct
    with pytest.raises(ParameterError):
        run_full(A9, MID, plan, tie_break="bogus")


def test_unbalanced_or_mismatched_input_rejected():
    with pytest.raises(ParameterError):
        run_full(A9, SystemParams(9, 18, 4, 2), HonestStrategy())
    B = build_cyclic(SystemParams(9, 10, 4, 2), require_balanced=False)
    with pytest.raises(BalanceError):
        run_full(B, SystemParams(9, 10, 4, 2), HonestStrategy())


def test_greedy_lc_on_wide_disagreement():
    # three colluders on one sub-task: disagreement 3 > u, one greedy LC
    plan = AttackPlan(frozenset({0, 1, 2}), {(w, 0): 1 for w in (0, 1, 2)})
    out = run_full(A9, MID, plan)
    assert out.correct and out.c == 1
    assert [e["phase"] for e in out.events if e["event"] == "local_computation"] == ["greedy"]


def test_rep_policies():
    unsolved = list(range(9))
    assert rep_policy_default(unsolved, A9, set(), []) == {i: i for i in range(9)}
    low = rep_policy_lowest(unsolved, A9, set(), [])
    assert low[0] == 0 and low[4] == 0 and low[3] == 3
    # after W1 is eliminated, sub-task 1 (workers 1..6) goes to W2
    assert rep_policy_lowest([0], A9, {0}, [])[0] == 1
    assert rep_policy_default([0], A9, {0}, [])[0] == 1


def test_rep_rotation_after_serving():
    out = run_commit(A9, MID, WorstCaseStrategy({1, 2}, [frozenset({1, 2})]))
    first, second = out.round_records[:2]
    for i in second.representatives:
        assert second.representatives[i] != first.representatives[i]


def test_mutual_commitments_are_eliminated_without_lc():
    # sub-task 2 (workers 2..7) rep W3, sub-task 3 (workers 3..8) rep W4, both lying
    entries = {i: CommitEntry(i, 0, set(A9.row_support[i]) - {i}) for i in range(9)}
    entries[1] = CommitEntry(2, 1, {3}, {1, 4, 5, 6})
    entries[2] = CommitEntry(3, 1, {2}, {4, 5, 6, 7})
    view = CommitmentTable(A9, entries)
    state = KnowledgeState(9, 4, 2)
    oracle = Oracle((0,) * 9)
    run_pipeline(view, state, oracle)
    assert oracle.query_count == 0
    assert state.eliminated == {2, 3}
    assert 1 not in state.solved and 2 not in state.solved
    assert len(state.solved) == 7


def test_commit_carries_refuted_subtasks():
    out = run_commit(A9, MID, WorstCaseStrategy({2, 3}, [frozenset({2, 3})]))
    r1 = out.round_records[0]
    assert r1.local_computations == 0 and set(r1.eliminated) == {2, 3}
    assert {2, 3}.isdisjoint(r1.newly_solved)
    assert out.round_records[1].values_sent == 2
    assert out.correct and out.kappa_values == 11


def test_commit_symmetrization_costs_no_extra_lc():
    plan = symmetrization(A9, MID)
    assert run_commit(A9, MID, plan).c <= run_full(A9, MID, plan).c


def test_worstcase_strategy_construction():
    strat = commitment_worstcase_strategy(A9, MID)
    assert strat.guaranteed and strat.rounds_attacked == 2
    out = run_commit(A9, MID, strat)
    assert out.correct and out.c == 0
    records = out.round_records
    assert [r.values_sent for r in records] == [9, 2, 2]
    for prev, cur in zip(records, records[1:]):
        assert set(cur.representatives) <= set(prev.representatives)
    assert out.rounds <= MID.s // MID.u + 1
    assert all(r.bits_sent <= 9 * 5 for r in records)


def test_communication_bound_formula():
    assert communication_bound(MID) == 11
    assert communication_bound(SystemParams(9, 9, 2, 2)) == 9
    assert communication_bound(SystemParams(20, 20, 6, 2)) == 24


def test_transcript_json():
    out = run_commit(A9, MID, WorstCaseStrategy({2, 3}, [frozenset({2, 3})]))
    data = out.to_json()
    assert data["round_records"][0]["representatives"]["3"] == 3
    assert data["eliminated"] == [3, 4]
    assert out.dumps().endswith("\n")

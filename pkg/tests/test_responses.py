import pytest

from byz_taskrep.allocation import SystemParams, build_cyclic
from byz_taskrep.errors import AdversaryModelViolation
from byz_taskrep.responses import (
    CommitEntry,
    CommitmentTable,
    KnowledgeState,
    Oracle,
    ValueTable,
    apply_local_computation,
    corrupted,
    disagreement,
    eliminate,
    resolve_small_groups,
    resolve_trivial,
    solve,
)

P = SystemParams(9, 9, 4, 2)
A = build_cyclic(P)


def table(lies):
    """Value table with truth 0 everywhere except ``lies[(w, i)]``."""
    reports = {(w, i): 0 for i in range(A.p) for w in A.row_support[i]}
    reports.update(lies)
    return ValueTable(A, reports)


def fresh():
    return KnowledgeState(P.n, P.s, P.u)


def test_sides_order_and_disagreement():
    v = table({(2, 0): 1, (3, 0): 1, (4, 0): 2})
    sides = v.sides(0)
    assert [len(sd) for sd in sides] == [3, 2, 1]
    assert sides[0].value == 0
    assert disagreement(v, 0) == 3


def test_r1_eliminates_small_group():
    v, st = table({(4, 0): 1}), fresh()
    resolve_trivial(st, v)
    assert st.eliminated == {4}
    assert st.solved == {i: 0 for i in range(9)}


def test_r2_majority_beyond_budget():
    # 5 agree > s=4: they contain an honest worker
    v, st = table({(0, 0): 1}), KnowledgeState(9, 4, 1)
    resolve_trivial(st, v)
    assert st.eliminated == {0} and st.solved[0] == 0


def test_two_balanced_sides_stay_open():
    v, st = table({(0, 0): 1, (1, 0): 1}), fresh()
    resolve_trivial(st, v)
    assert 0 not in st.solved and corrupted(v, st) == [0]


def test_confirmed_honest_protected():
    v, st = table({}), fresh()
    eliminate(st, v, {0, 1, 2, 3}, "test")
    assert st.budget == 0 and 4 in st.confirmed_honest
    with pytest.raises(AdversaryModelViolation):
        eliminate(st, v, {4}, "test")


def test_solve_conflict():
    st = fresh()
    solve(st, 0, 1, "x")
    with pytest.raises(AdversaryModelViolation):
        solve(st, 0, 2, "x")


def test_local_computation_eliminates_liars():
    v, st = table({(0, 0): 1, (1, 0): 1}), fresh()
    resolve_trivial(st, v)
    o = Oracle((0,) * 9)
    apply_local_computation(st, v, 0, o)
    assert o.query_count == 1 and st.eliminated == {0, 1} and len(st.solved) == 9


def test_small_groups_baseline_ignores_budget():
    v, st = table({(0, 0): 1}), KnowledgeState(9, 4, 1)
    resolve_small_groups(st, v)
    assert 0 not in st.solved  # R2 is not part of the baseline


def commit(entries):
    full = {i: CommitEntry(i, 0, set(A.row_support[i]) - {i}) for i in range(A.p)}
    full.update(entries)
    return CommitmentTable(A, full)


def test_commit_small_no_side_solves():
    # R1': a lone dissenter is malicious and the representative is right
    v, st = commit({0: CommitEntry(0, 0, {1, 2, 3, 4}, {5})}), fresh()
    resolve_trivial(st, v)
    assert st.eliminated == {5} and st.solved[0] == 0


def test_commit_small_rep_side_refutes_without_solving():
    v, st = commit({0: CommitEntry(0, 7, set(), {1, 2, 3, 4, 5})}), fresh()
    resolve_trivial(st, v)
    assert st.eliminated == {0}
    assert v.refuted(0) and 0 not in st.solved


def test_commit_large_no_side_refutes_whole_rep_side():
    v, st = commit({0: CommitEntry(0, 7, {1}, {2, 3, 4, 5})}), KnowledgeState(9, 3, 2)
    resolve_trivial(st, v)
    assert {0, 1} <= st.eliminated and v.refuted(0)


def test_commit_lc_on_false_rep():
    v, st = commit({0: CommitEntry(0, 7, {1}, {2, 3, 4, 5})}), fresh()
    resolve_trivial(st, v)
    assert corrupted(v, st) == [0]
    apply_local_computation(st, v, 0, Oracle((0,) * 9))
    assert st.eliminated == {0, 1} and st.solved[0] == 0


def test_commit_overlap_rejected():
    with pytest.raises(ValueError):
        CommitmentTable(A, {0: CommitEntry(0, 0, {1}, {1})})

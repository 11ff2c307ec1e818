"""Byzantine behaviours: scripted attacks, enumeration and adaptive search.

Every strategy answers the same question each round: given the value
requests and commitment-bit requests addressed to its malicious workers
(and, being omniscient, the truth), what do those workers send back?
Honest responses are generated by the protocol harness.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterator, Mapping, Sequence

from .allocation import AllocationMatrix, SubmatrixWitness, SystemParams
from .errors import BudgetExceeded, ParameterError
from .responses import default_truth, one_based

ValueRequest = tuple[int, int]          # (worker, subtask)
BitRequest = tuple[int, int, int]       # (worker, subtask, representative)


class Strategy:
    """Base class; subclasses set ``malicious`` and implement :meth:`respond`."""

    malicious: frozenset[int] = frozenset()

    def respond(self, round_no: int, value_requests: Sequence[ValueRequest],
                bit_requests: Sequence[BitRequest], truth: Sequence[int]):
        raise NotImplementedError


class HonestStrategy(Strategy):
    def respond(self, round_no, value_requests, bit_requests, truth):
        return {}, {}


@dataclass(frozen=True)
class AttackPlan(Strategy):
    """A one-shot attack: fixed malicious set and a fixed value per allotted cell.

    Cells of malicious workers missing from ``reports`` are answered
    truthfully.  In commitment rounds a malicious worker says "yes" exactly
    when the representative's value equals the value it would itself report.
    """

    malicious: frozenset[int] = frozenset()
    reports: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def validate(self, A: AllocationMatrix, s: int) -> None:
        if len(self.malicious) > s:
            raise ParameterError(f"attack uses {len(self.malicious)} malicious workers, s={s}")
        if any(not 0 <= w < A.n for w in self.malicious):
            raise ParameterError("malicious worker index out of range")
        for w, i in self.reports:
            if w not in self.malicious:
                raise ParameterError(f"report from honest worker {w + 1}")
            if not 0 <= i < A.p or w not in A.row_support[i]:
                raise ParameterError(f"worker {w + 1} is not allotted sub-task {i + 1}")

    def value(self, w: int, i: int, truth: Sequence[int]) -> int:
        return self.reports.get((w, i), truth[i])

    def respond(self, round_no, value_requests, bit_requests, truth):
        values = {(w, i): self.value(w, i, truth) for w, i in value_requests}
        bits = {}
        for w, i, rep in bit_requests:
            rep_value = self.value(rep, i, truth) if rep in self.malicious else truth[i]
            bits[(w, i)] = rep_value == self.value(w, i, truth)
        return values, bits

    def to_json(self) -> dict:
        return {
            "malicious": one_based(self.malicious),
            "reports": [
                {"worker": w + 1, "subtask": i + 1, "value": v}
                for (w, i), v in sorted(self.reports.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AttackPlan":
        unknown = set(data) - {"malicious", "reports"}
        if unknown:
            raise ParameterError(f"unknown attack keys: {sorted(unknown)}")
        malicious = frozenset(int(w) - 1 for w in data.get("malicious", []))
        reports = {}
        for r in data.get("reports", []):
            reports[(int(r["worker"]) - 1, int(r["subtask"]) - 1)] = int(r["value"])
        return cls(malicious, reports)

    @classmethod
    def load(cls, path) -> "AttackPlan":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def constrained_symmetrization(A: AllocationMatrix, params: SystemParams,
                               witness: SubmatrixWitness,
                               truth: Sequence[int] | None = None) -> AttackPlan:
    """u-sized teams from the witness columns, each corrupting one witness row."""
    truth = default_truth(A.p) if truth is None else truth
    k_att = min(witness.k, params.s // params.u)
    if k_att == 0:
        return AttackPlan()
    if not witness.check(A, params.u):
        raise ParameterError("witness is not an all-ones k x uk block of A")
    rows = sorted(witness.rows)[:k_att]
    cols = sorted(witness.cols)
    reports = {}
    malicious = set()
    for t, row in enumerate(rows):
        team = cols[t * params.u:(t + 1) * params.u]
        malicious.update(team)
        for w in team:
            for i in A.col_support[w]:
                reports[(w, i)] = truth[i] + i + 1 if i == row else truth[i]
    return AttackPlan(frozenset(malicious), reports)


def one_shot_count(A: AllocationMatrix, s: int, alphabet_size: int) -> int:
    if s == 0 or alphabet_size == 1:
        return math.comb(A.n, s)
    loads = A.col_sums()
    if len(set(loads)) == 1:
        return math.comb(A.n, s) * alphabet_size ** (s * loads[0])
    return sum(alphabet_size ** sum(loads[w] for w in M) for M in combinations(range(A.n), s))


def enumerate_one_shot(A: AllocationMatrix, params: SystemParams, alphabet_size: int = 2,
                       budget: int = 10 ** 6,
                       truth: Sequence[int] | None = None) -> Iterator[AttackPlan]:
    """Every malicious set of size exactly s with every per-cell report in
    {truth, truth+1, ..., truth+alphabet_size-1}, in a fixed order.

    Raises :class:`BudgetExceeded` immediately if the stream would be too long.
    """
    if alphabet_size < 1:
        raise ParameterError("alphabet_size must be at least 1")
    truth = default_truth(A.p) if truth is None else tuple(truth)
    required = one_shot_count(A, params.s, alphabet_size)
    if required > budget:
        raise BudgetExceeded(required, budget)

    def stream():
        for M in combinations(range(A.n), params.s):
            cells = [(w, i) for w in M for i in sorted(A.col_support[w])]
            for offsets in product(range(alphabet_size), repeat=len(cells)):
                yield AttackPlan(
                    frozenset(M),
                    {(w, i): truth[i] + d for (w, i), d in zip(cells, offsets)},
                )

    return stream()


def random_plan(A: AllocationMatrix, params: SystemParams, rng: random.Random,
                alphabet_size: int = 2, truth: Sequence[int] | None = None) -> AttackPlan:
    truth = default_truth(A.p) if truth is None else truth
    M = sorted(rng.sample(range(A.n), params.s))
    reports = {(w, i): truth[i] + rng.randrange(alphabet_size)
               for w in M for i in sorted(A.col_support[w])}
    return AttackPlan(frozenset(M), reports)


# ---------------------------------------------------------------------------
# adaptive search


class NeedMove(Exception):
    """Raised by :class:`PrefixStrategy` when asked for a round beyond its script."""

    def __init__(self, round_no: int, radices: tuple[int, ...]):
        super().__init__(f"no scripted move for round {round_no}")
        self.round_no = round_no
        self.radices = radices

    @property
    def size(self) -> int:
        return math.prod(self.radices)


class PrefixStrategy(Strategy):
    """Replays one move index per round; each move fixes every malicious decision.

    Decisions in a round are the value requests (alphabet_size choices:
    truth + d) followed by the bit requests (no / yes), both in sorted order.
    """

    def __init__(self, malicious, moves: Sequence[int], alphabet_size: int = 2):
        self.malicious = frozenset(malicious)
        self.moves = tuple(moves)
        self.alphabet_size = alphabet_size

    def respond(self, round_no, value_requests, bit_requests, truth):
        vreq = sorted(value_requests)
        breq = sorted(bit_requests)
        radices = (self.alphabet_size,) * len(vreq) + (2,) * len(breq)
        if round_no >= len(self.moves):
            raise NeedMove(round_no, radices)
        digits = []
        m = self.moves[round_no]
        for r in reversed(radices):
            m, d = divmod(m, r)
            digits.append(d)
        digits.reverse()
        values = {(w, i): truth[i] + d for (w, i), d in zip(vreq, digits)}
        bits = {(w, i): bool(d) for (w, i, _), d in zip(breq, digits[len(vreq):])}
        return values, bits


@dataclass
class GameResult:
    max_c: int = 0
    max_kappa_values: int = 0
    max_kappa_bits: int = 0
    max_rounds: int = 0
    witness_c: tuple | None = None
    witness_kappa: tuple | None = None
    leaves: int = 0
    truncated: bool = False

    def replay(self, which: str = "c", alphabet_size: int = 2) -> PrefixStrategy:
        malicious, moves = self.witness_c if which == "c" else self.witness_kappa
        return PrefixStrategy(malicious, moves, alphabet_size)

    def to_json(self) -> dict:
        def wit(x):
            return None if x is None else {"malicious": one_based(x[0]), "moves": list(x[1])}
        return {
            "max_c": self.max_c,
            "max_kappa_values": self.max_kappa_values,
            "max_kappa_bits": self.max_kappa_bits,
            "max_rounds": self.max_rounds,
            "witness_c": wit(self.witness_c),
            "witness_kappa": wit(self.witness_kappa),
            "leaves": self.leaves,
            "lower_bound_only": self.truncated,
        }


def adversary_game_search(runner: Callable, A: AllocationMatrix, params: SystemParams,
                          alphabet_size: int = 2, move_cap: int = 4096,
                          node_cap: int = 500_000,
                          truth: Sequence[int] | None = None) -> GameResult:
    """Depth-first search over every malicious set of size s and every
    per-round response, maximising local computations and value symbols.

    ``runner(A, params, strategy, truth=...)`` must be deterministic given
    the strategy's moves.  If a round offers more than ``move_cap`` moves or
    the search exceeds ``node_cap`` protocol runs, the result is flagged as
    a lower bound.
    """
    truth = default_truth(A.p) if truth is None else tuple(truth)
    res = GameResult()
    nodes = 0

    def visit(M, moves):
        nonlocal nodes
        if nodes >= node_cap:
            res.truncated = True
            return
        nodes += 1
        try:
            out = runner(A, params, PrefixStrategy(M, moves, alphabet_size), truth=truth)
        except NeedMove as need:
            size = need.size
            if size > move_cap:
                res.truncated = True
                size = move_cap
            for m in range(size):
                visit(M, moves + [m])
            return
        res.leaves += 1
        key = (frozenset(M), tuple(moves))
        if res.witness_c is None or out.c > res.max_c:
            res.max_c, res.witness_c = out.c, key
        if res.witness_kappa is None or out.kappa_values > res.max_kappa_values:
            res.max_kappa_values, res.witness_kappa = out.kappa_values, key
        res.max_kappa_bits = max(res.max_kappa_bits, out.kappa_bits)
        res.max_rounds = max(res.max_rounds, out.rounds)

    for M in combinations(range(A.n), params.s):
        visit(M, [])
    return res


class WorstCaseStrategy(Strategy):
    """Per round, a team of malicious representatives lies on the sub-tasks it
    represents and yes-commits to its teammates' lies; everyone else in the
    malicious set behaves honestly."""

    def __init__(self, malicious, teams: Sequence[frozenset[int]], lie_offset: int = 1):
        self.malicious = frozenset(malicious)
        self.teams = [frozenset(t) for t in teams]
        self.lie_offset = lie_offset
        self.guaranteed = False
        self.rounds_attacked = 0

    def team(self, round_no: int) -> frozenset[int]:
        return self.teams[round_no] if round_no < len(self.teams) else frozenset()

    def respond(self, round_no, value_requests, bit_requests, truth):
        team = self.team(round_no)
        values = {(w, i): truth[i] + (self.lie_offset if w in team else 0)
                  for w, i in value_requests}
        bits = {}
        for w, i, rep in bit_requests:
            rep_lies = rep in team
            bits[(w, i)] = rep_lies if w in team else not rep_lies
        return values, bits


def commitment_worstcase_strategy(A: AllocationMatrix, params: SystemParams,
                                  rep_policy=None,
                                  truth: Sequence[int] | None = None) -> WorstCaseStrategy:
    """Plan, round by round, teams of malicious representatives whose lies are
    exposed without a local computation, so their sub-tasks stay unsolved.

    The adversary knows the (deterministic) representative policy, so it can
    simulate the protocol and pick the malicious set in advance.  Teams of
    size u are preferred; a round's team is the first candidate (in
    lexicographic order) that leaves the most of its sub-tasks unsolved.
    """
    from .protocol_commit import rep_policy_default, run_commit

    rep_policy = rep_policy_default if rep_policy is None else rep_policy
    truth = default_truth(A.p) if truth is None else tuple(truth)
    s, u = params.s, params.u
    teams: list[frozenset[int]] = []
    used: frozenset[int] = frozenset()

    def simulate(malicious, plan):
        return run_commit(A, params, WorstCaseStrategy(malicious, plan), truth=truth,
                          rep_policy=rep_policy)

    while len(used) < s:
        r = len(teams)
        base = simulate(used, teams)
        if r >= len(base.round_records):
            break
        reps = base.round_records[r].representatives
        candidates = sorted(set(reps.values()) - used)
        best, best_score = None, 0
        for size in range(min(u, s - len(used)), 0, -1):
            for team in combinations(candidates, size):
                team = frozenset(team)
                out = simulate(used | team, teams + [team])
                rec = out.round_records[r]
                targets = {i for i, w in reps.items() if w in team}
                if rec.local_computations or any(t in rec.newly_solved for t in targets):
                    continue
                if len(targets) > best_score:
                    best, best_score = team, len(targets)
            if best is not None:
                break
        if best is None:
            break
        teams.append(best)
        used |= best
    strat = WorstCaseStrategy(used, teams)
    strat.rounds_attacked = len(teams)
    strat.guaranteed = len(teams) >= s // u
    return strat

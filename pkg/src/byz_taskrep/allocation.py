"""Job allocation matrices and the k x uk all-ones sub-matrix machinery.

Rows are sub-tasks, columns are workers.  Everything is 0-indexed here;
human-facing output adds one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BalanceError, ParameterError

DEFAULT_SEARCH_CAP = 2_000_000


@dataclass(frozen=True)
class SystemParams:
    """Worker count ``n``, sub-task count ``p``, malicious budget ``s`` and surplus ``u``.

    ``s = 0`` is accepted as a degenerate no-adversary instance.
    """

    n: int
    p: int
    s: int
    u: int

    def __post_init__(self):
        for name in ("n", "p", "s", "u"):
            if not isinstance(getattr(self, name), int):
                raise ParameterError(f"{name} must be an integer")
        if self.n < 1 or self.p < 1:
            raise ParameterError("n and p must be positive")
        if self.u < 1:
            raise ParameterError("u must be at least 1")
        if self.s < 0:
            raise ParameterError("s must be non-negative")
        if self.s > 0 and self.u > self.s:
            raise ParameterError(f"u={self.u} exceeds s={self.s}")
        if self.s + self.u > self.n:
            raise ParameterError(
                f"replication s+u={self.s + self.u} exceeds worker count n={self.n}"
            )

    @property
    def rho(self) -> int:
        return self.s + self.u

    @property
    def lam(self) -> int:
        return self.p // self.n

    @property
    def trivial_bound(self) -> int:
        """Local computations needed by the sequential baseline, floor(s/u)."""
        return self.s // self.u


@dataclass(frozen=True)
class AllocationMatrix:
    """A p x n boolean assignment of sub-tasks to workers."""

    grid: tuple[tuple[bool, ...], ...]
    row_support: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    col_support: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.grid or not self.grid[0]:
            raise ParameterError("allocation must have at least one row and column")
        width = len(self.grid[0])
        if any(len(row) != width for row in self.grid):
            raise ParameterError("ragged allocation grid")
        rows = tuple(frozenset(j for j, x in enumerate(row) if x) for row in self.grid)
        cols = tuple(
            frozenset(i for i, row in enumerate(self.grid) if row[j]) for j in range(width)
        )
        object.__setattr__(self, "row_support", rows)
        object.__setattr__(self, "col_support", cols)

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], n: int) -> "AllocationMatrix":
        grid = []
        for sup in supports:
            sup = set(sup)
            if any(j < 0 or j >= n for j in sup):
                raise ParameterError(f"support {sorted(sup)} out of range for n={n}")
            grid.append(tuple(j in sup for j in range(n)))
        return cls(tuple(grid))

    @property
    def p(self) -> int:
        return len(self.grid)

    @property
    def n(self) -> int:
        return len(self.grid[0])

    def row_sums(self) -> list[int]:
        return [len(r) for r in self.row_support]

    def col_sums(self) -> list[int]:
        return [len(c) for c in self.col_support]

    def is_balanced(self) -> bool:
        return len(set(self.row_sums())) == 1 and len(set(self.col_sums())) == 1

    def require_balanced(self, rho: int | None = None) -> None:
        """Raise :class:`BalanceError` unless all row sums (== rho) and column sums agree."""
        rows = self.row_sums()
        if len(set(rows)) != 1:
            raise BalanceError(f"row loads differ: {rows}")
        if rho is not None and rows[0] != rho:
            raise BalanceError(f"row load {rows[0]} does not equal replication {rho}")
        cols = self.col_sums()
        if len(set(cols)) != 1:
            raise BalanceError(f"column loads differ: {cols}", column_loads=cols)

    def with_row(self, support: Iterable[int]) -> "AllocationMatrix":
        sup = set(support)
        return AllocationMatrix(self.grid + (tuple(j in sup for j in range(self.n)),))

    def to_text(self) -> str:
        lines = [f"{self.p} {self.n}"]
        lines += ["".join("1" if x else "0" for x in row) for row in self.grid]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AllocationMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParameterError("empty allocation file")
        try:
            p, n = (int(x) for x in lines[0].split())
        except ValueError:
            raise ParameterError(f"bad header line {lines[0]!r}, expected 'p n'") from None
        body = lines[1:]
        if len(body) != p:
            raise ParameterError(f"header says p={p} but found {len(body)} rows")
        grid = []
        for k, line in enumerate(body, start=1):
            if len(line) != n or set(line) - {"0", "1"}:
                raise ParameterError(f"row {k} must be {n} characters of 0/1: {line!r}")
            grid.append(tuple(ch == "1" for ch in line))
        return cls(tuple(grid))


@dataclass(frozen=True)
class SubmatrixWitness:
    """``k`` rows sharing the ``u*k`` columns in ``cols``.

    ``truncated`` marks a search that hit its cap; ``k`` is then only a lower bound.
    """

    k: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    truncated: bool = False

    def check(self, A: AllocationMatrix, u: int) -> bool:
        if len(self.rows) != self.k or len(self.cols) != u * self.k:
            return False
        return all(A.grid[i][j] for i in self.rows for j in self.cols)


def build_cyclic(params: SystemParams, require_balanced: bool = True) -> AllocationMatrix:
    """Cyclic allocation: row i holds workers i, i+1, ..., i+rho-1 (mod n).

    With ``require_balanced=False`` the residual block of a p that is not a
    multiple of n is kept even when column loads differ; use that only for
    sub-matrix analysis, never as input to a protocol.
    """
    n, rho = params.n, params.rho
    if rho > n:
        raise ParameterError(f"rho={rho} exceeds n={n}")
    A = AllocationMatrix.from_supports(
        (((i + t) % n for t in range(rho)) for i in range(params.p)), n
    )
    if require_balanced:
        loads = A.col_sums()
        if len(set(loads)) != 1:
            raise BalanceError(
                f"cyclic allocation with n={n}, p={params.p}, rho={rho} is unbalanced; "
                f"column loads {loads}",
                column_loads=loads,
            )
    return A


def replication_factor(A: AllocationMatrix) -> Fraction:
    return Fraction(sum(A.row_sums()), A.p)


def largest_uk_submatrix(
    A: AllocationMatrix, u: int, search_cap: int = DEFAULT_SEARCH_CAP
) -> SubmatrixWitness:
    """Exact search for the largest k with k rows sharing at least u*k columns.

    Identical rows are grouped, so stacked cyclic blocks cost no more than a
    single block.  The branch-and-bound explores subsets of distinct row
    supports; a branch is cut once ``|common columns| // u`` cannot beat the
    incumbent.  ``search_cap`` bounds the number of explored nodes.
    """
    if u < 1:
        raise ParameterError("u must be at least 1")
    groups: dict[frozenset[int], list[int]] = {}
    for i, sup in enumerate(A.row_support):
        groups.setdefault(sup, []).append(i)
    items = [(sup, rows) for sup, rows in groups.items() if len(sup) >= u]
    suffix_mult = [0] * (len(items) + 1)
    for idx in range(len(items) - 1, -1, -1):
        suffix_mult[idx] = suffix_mult[idx + 1] + len(items[idx][1])

    best = {"k": 0, "chosen": (), "inter": frozenset()}
    nodes = 0
    truncated = False

    def dfs(start: int, chosen: tuple[int, ...], inter: frozenset[int] | None, mult: int):
        nonlocal nodes, truncated
        for idx in range(start, len(items)):
            if truncated:
                return
            if mult + suffix_mult[idx] <= best["k"]:
                return
            sup, rows = items[idx]
            new_inter = sup if inter is None else inter & sup
            reach = len(new_inter) // u
            if reach <= best["k"]:
                continue
            nodes += 1
            if nodes > search_cap:
                truncated = True
                return
            new_mult = mult + len(rows)
            k = min(new_mult, reach)
            if k > best["k"]:
                best.update(k=k, chosen=chosen + (idx,), inter=new_inter)
            dfs(idx + 1, chosen + (idx,), new_inter, new_mult)

    dfs(0, (), None, 0)
    k = best["k"]
    rows_pool = sorted(r for idx in best["chosen"] for r in items[idx][1])
    return SubmatrixWitness(
        k=k,
        rows=tuple(rows_pool[:k]),
        cols=tuple(sorted(best["inter"])[: u * k]),
        truncated=truncated,
    )


def k_star_cyclic(rho: int, u: int, lam: int) -> int:
    """floor((rho + 1) / (u + 1/lam)) in exact integer arithmetic.

    This closed form assumes rho < n; for rho == n the matrix is all ones and
    :func:`k_star_range` should be used instead.
    """
    if lam < 1:
        raise ParameterError("lambda must be at least 1")
    if not 1 <= u < rho:
        raise ParameterError(f"need 1 <= u < rho, got u={u}, rho={rho}")
    return (rho + 1) * lam // (u * lam + 1)


def k_star_range(params: SystemParams) -> tuple[int, int]:
    """Bounds (lo, hi) on k* for a cyclic allocation with lam*n <= p < (lam+1)*n."""
    n, p, u, rho, lam = params.n, params.p, params.u, params.rho, params.lam
    if lam < 1:
        raise ParameterError(f"p={p} must be at least n={n}")
    if rho == n:
        # All-ones matrix; the closed form does not apply.
        k = min(p, n // u)
        return k, k
    lo = k_star_cyclic(rho, u, lam)
    if p == lam * n:
        return lo, lo
    return lo, min(lo + p - lam * n, k_star_cyclic(rho, u, lam + 1))


def lower_bound_local(k_star: int, s: int, u: int) -> int:
    if k_star < 0 or s < 0 or u < 1:
        raise ParameterError("need k* >= 0, s >= 0, u >= 1")
    return min(k_star, s // u)


def active_support(A: AllocationMatrix, subtask: int, eliminated: Sequence[int] | set[int]) -> frozenset[int]:
    return A.row_support[subtask] - frozenset(eliminated)

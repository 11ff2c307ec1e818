"""Byzantine-resilient task replication: allocations, attacks, recovery
protocols and exhaustive bound checks."""

from .allocation import (
    AllocationMatrix,
    SubmatrixWitness,
    SystemParams,
    build_cyclic,
    k_star_cyclic,
    k_star_range,
    largest_uk_submatrix,
    lower_bound_local,
    replication_factor,
)
from .adversary import (
    AttackPlan,
    HonestStrategy,
    adversary_game_search,
    commitment_worstcase_strategy,
    constrained_symmetrization,
    enumerate_one_shot,
)
from .errors import AdversaryModelViolation, BalanceError, BudgetExceeded, ParameterError
from .protocol_commit import communication_bound, run_commit
from .protocol_full import Outcome, run_full
from .verify import exhaustive_check, ratio_table, run_trivial

__version__ = "0.1.0"

"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid system parameters or allocation shape."""


class BalanceError(ParameterError):
    """An allocation whose row or column loads are not all equal."""

    def __init__(self, message, column_loads=None):
        super().__init__(message)
        self.column_loads = column_loads


class BudgetExceeded(ValueError):
    """An enumeration would exceed its configured budget."""

    def __init__(self, required, budget):
        super().__init__(f"enumeration needs {required} items, budget is {budget}")
        self.required = required
        self.budget = budget


class AdversaryModelViolation(RuntimeError):
    """Deductions imply more than ``s`` malicious workers (or an honest one eliminated)."""

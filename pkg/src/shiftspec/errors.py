"""Exception types shared across the package."""


class SpecError(ValueError):
    """Malformed sequence/model/config description."""


class ConfigError(SpecError):
    """Invalid job configuration (CLI exit code 2)."""


class DenominatorZero(ArithmeticError):
    """A forward series denominator factor (d_i - lambda) is zero."""


class WeightZero(ArithmeticError):
    """A backward series requires dividing by a zero weight."""


class BudgetExceeded(RuntimeError):
    """Adaptive refinement exceeded the configured cell budget (CLI exit code 3)."""

    def __init__(self, message: str, count: int = 0, budget: int = 0):
        super().__init__(message)
        self.count = count
        self.budget = budget

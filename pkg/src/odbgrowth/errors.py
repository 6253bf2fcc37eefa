"""Exception types shared across the package.

The CLI maps :class:`RegimeError` (and its subclass :class:`FeasibilityError`)
to exit code 2 and :class:`PrecisionError` to exit code 3.
"""


class RegimeError(ValueError):
    """Parameters fall outside the regime a computation is defined for."""


class FeasibilityError(RegimeError):
    """A sampled environment does not admit a saddle point solution."""


class PrecisionError(ArithmeticError):
    """A numerical routine could not reach its accuracy target."""

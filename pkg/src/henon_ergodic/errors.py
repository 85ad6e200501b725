"""Exception taxonomy shared across the package.

``ConfigError`` subclasses map to CLI exit code 2, ``NumericsError`` to 3.
"""


class ConfigError(ValueError):
    """Invalid configuration, family/domain definition, or argument."""


class DomainError(ConfigError):
    """A parameter point lies outside its declared domain."""


class FamilyError(ConfigError):
    """A family definition violates an invariant (e.g. vanishing a(lambda))."""


class NumericsError(RuntimeError):
    """Numeric failure: overflow without classification, budget exceeded."""


class BudgetError(NumericsError):
    """An iteration/refinement budget was exhausted before convergence."""

"""Exception hierarchy shared by all modules."""


class TreeParkError(Exception):
    """Base class for every error raised by treepark."""


class InvalidArgument(TreeParkError, ValueError):
    pass


class DomainError(TreeParkError, ValueError):
    """An argument lies outside the domain of a mathematical function."""


class NumericalFailure(TreeParkError, ArithmeticError):
    pass


class SingularityError(NumericalFailure):
    pass


class DegenerateInput(TreeParkError, ValueError):
    pass


class ValidationError(TreeParkError, ValueError):
    """Configuration validation failure carrying every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))

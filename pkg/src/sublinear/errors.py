"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Inputs live on different sample spaces or are malformed."""


class AtomLimitError(ValueError):
    """An explicit product space would exceed the atom guard."""


class HypothesisError(ValueError):
    """A theorem hypothesis or parameter domain is violated."""


class PolicyError(RuntimeError):
    """The requested action is not allowed for this input (e.g. asserting on estimated K)."""

"""Exception types shared across the library."""


class ModelError(ValueError):
    """An input model (process spec, payoff, chain) violates an invariant."""


class NumericsError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""

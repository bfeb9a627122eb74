"""Exception types shared across the solver modules."""


class InfeasibleScenarioError(ValueError):
    """The distortion or rate target cannot be met even with zero cognitive power."""


class SolverError(RuntimeError):
    """A numerical solver failed to converge; the message carries diagnostics."""

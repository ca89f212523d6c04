"""Exception types shared across solvers and linear operators."""


class NumericalError(RuntimeError):
    """A numerical routine failed (divergence, non-convergence, bad iterate)."""


class ConvergenceError(NumericalError):
    """An iterative solve did not reach its tolerance within the iteration cap."""


class SolverError(NumericalError):
    """An optimization run produced non-finite iterates or violated its contract."""

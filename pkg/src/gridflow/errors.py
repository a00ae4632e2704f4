"""Exception hierarchy shared across the package.

Two families matter to callers: validation problems (bad inputs, malformed
files, violated invariants) and numerical failures (CFL violations, solver
residuals, stagnating traces). The CLI maps them to exit codes 1 and 2.
"""


class ValidationError(Exception):
    """Bad input data, malformed file, or violated model invariant."""


class NumericalError(Exception):
    """A numerical procedure failed or left its guaranteed regime."""


class NetworkFormatError(ValidationError):
    """Network file does not parse against the documented schema."""


class CflViolationError(NumericalError):
    """Requested time step exceeds the CFL bound."""


class ConservationError(NumericalError):
    """Densities left their admissible range beyond round-off."""


class StagnationError(NumericalError):
    """A traced characteristic or streamline stopped making progress."""


class ScalingResidualError(NumericalError):
    """Scaling-field PDE residual above tolerance.

    Carries the per-cell residual fields for inspection.
    """

    def __init__(self, message, residual_alpha=None, residual_beta=None):
        super().__init__(message)
        self.residual_alpha = residual_alpha
        self.residual_beta = residual_beta


class StageError(RuntimeError):
    """Wraps a failure inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause

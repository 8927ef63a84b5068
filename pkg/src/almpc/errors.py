"""Exception hierarchy shared by all modules."""


class AlmpcError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(AlmpcError, ValueError):
    """Operands have inconsistent dimensions."""


class LpNumericalError(AlmpcError):
    """The simplex iteration limit was hit (cycling guard) or pivots broke down."""


class UnboundedDirectionError(AlmpcError):
    """A support function is infinite in the requested direction."""


class EmptyPolytopeError(AlmpcError):
    """An operation needed a nonempty polytope and got an empty one."""


class DareConvergenceError(AlmpcError):
    """Riccati value iteration did not converge."""


class NotStabilizingError(AlmpcError):
    """No power of the closed-loop matrix contracts in the infinity norm."""


class InconsistentDataError(AlmpcError):
    """The feasible parameter set became empty: data contradicts the model."""


class InfeasibleTighteningError(AlmpcError):
    """Constraint tightening consumes the whole constraint set."""


class InfeasibleInitializationError(AlmpcError):
    """No initial trajectory exists for the requested horizon."""


class NonConvergedTrajectoryError(AlmpcError):
    """A trajectory does not end at the origin and cannot enter the safe set."""


class InfeasibleMpcError(AlmpcError):
    """The receding-horizon problem became infeasible during a closed-loop run."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnsupportedSetError(AlmpcError):
    """The disturbance set is not an axis-aligned box."""


class ConfigError(AlmpcError):
    """Experiment configuration is malformed; the message names the field."""

"""Exception types shared across the workbench."""


class FepError(Exception):
    """Base class for all workbench errors."""


class ConfigurationError(FepError):
    """Invalid configuration data (bad shapes, missing keys, out-of-range values)."""


class SimulationIntegrityError(FepError):
    """A state variable became non-finite during integration.

    Carries the name of the first offending field so the failure is
    attributable.
    """

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(message or f"non-finite value in '{field}'")


class KinematicsSingularityError(FepError):
    """Pitch attitude entered the Euler-kinematics singularity margin."""

    def __init__(self, theta_rad: float):
        self.theta_rad = theta_rad
        super().__init__(f"pitch angle {theta_rad:.4f} rad is inside the kinematic singularity margin")


class TrimError(FepError):
    """Trim solver failed to converge; carries the residual report."""

    def __init__(self, message: str, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class EnvelopeError(FepError):
    """Requested flight condition is outside the model envelope."""


class ControllerError(FepError):
    """Control allocation is degenerate (rank deficiency or ill conditioning)."""

    def __init__(self, message: str, condition_number: float | None = None):
        self.condition_number = condition_number
        super().__init__(message)


class CheckpointError(FepError):
    """Checkpoint file is unreadable, truncated, or shape/version incompatible."""


class TrainingDivergedError(FepError):
    """A non-finite loss or gradient appeared during training."""

"""Exceptions raised by the reconstruction pipeline."""


class ReconstructionError(Exception):
    """Base class for all pipeline failures."""


class InsufficientData(ReconstructionError):
    """The trains cannot be ordered into a single oriented chain.

    The caller is expected to wait for more trains and retry.  ``stage``
    names the pipeline step that gave up.
    """

    def __init__(self, message: str, stage: str = "nn_crust"):
        super().__init__(message)
        self.stage = stage


class NoAxisPoint(InsufficientData):
    def __init__(self, message: str = "no train lies on the last coordinate axis"):
        super().__init__(message, stage="orient")


class MissingCoordinateData(ReconstructionError):
    """Some coordinate is zero across every ordered train."""

    def __init__(self, message: str, stage: str = "estimate_alphas"):
        super().__init__(message)
        self.stage = stage


class ConditionViolation(ReconstructionError):
    """Pulses of a stream are closer than the train time span."""

"""Exception hierarchy shared across the library."""


class QuantHellyError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(QuantHellyError):
    pass


class DegenerateInput(QuantHellyError):
    pass


class Unbounded(QuantHellyError):
    pass


class EmptyInterior(QuantHellyError):
    pass


class MaxIterations(QuantHellyError):
    pass


class VolumeInfeasible(QuantHellyError):
    pass


class NotInJohnPosition(QuantHellyError):
    pass


class DecompositionInfeasible(QuantHellyError):
    pass


class SupportOutOfRange(QuantHellyError):
    pass


class CertificateFailed(QuantHellyError):
    pass


class HypothesisViolated(QuantHellyError):
    def __init__(self, message, failure=None):
        super().__init__(message)
        self.failure = failure


class Step3Failed(QuantHellyError):
    def __init__(self, message, gaps=None):
        super().__init__(message)
        self.gaps = gaps


class WitnessContainmentFailed(QuantHellyError):
    pass


class NoWitness(QuantHellyError):
    def __init__(self, message, margins=None):
        super().__init__(message)
        self.margins = margins


class NormalizationFailed(QuantHellyError):
    pass


class InstanceError(QuantHellyError):
    pass

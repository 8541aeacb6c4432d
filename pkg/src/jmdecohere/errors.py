"""Exception hierarchy shared by all modules."""


class JMError(Exception):
    """Base class for every error raised by jmdecohere."""


class ShapeMismatch(JMError, ValueError):
    pass


class NonHermitianInput(JMError, ValueError):
    pass


class NonHermitianH(NonHermitianInput):
    pass


class ConvergenceFailure(JMError, RuntimeError):
    pass


class OverflowGuard(JMError, OverflowError):
    pass


class DimensionCap(JMError, ValueError):
    pass


class IndexOutOfRange(JMError, IndexError):
    pass


class InvalidObservable(JMError, ValueError):
    pass


class InvalidBiObservable(InvalidObservable):
    pass


class NotDiagonal(InvalidObservable):
    pass


class PartitionMismatch(JMError, ValueError):
    pass


class NotAKernel(JMError, ValueError):
    pass


class InvalidMultiplier(JMError, ValueError):
    pass


class NoSpectralGap(JMError, ValueError):
    pass


class InvalidBloch(JMError, ValueError):
    pass


class NotInEnvelope(JMError, ValueError):
    pass


class HellingerSingular(JMError, ZeroDivisionError):
    pass


class IterationCap(JMError, RuntimeError):
    pass


class NotDivisible(JMError, TypeError):
    pass


class NotRegular(JMError, ValueError):
    pass


class NontrivialAlgebra(JMError, ValueError):
    pass


class OutOfRange(JMError, ValueError):
    pass

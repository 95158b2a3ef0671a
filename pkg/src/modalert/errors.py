"""Exception hierarchy shared across the toolkit.

Every domain error derives from :class:`ModalertError` so callers can catch
the whole family at once; the CLI maps subfamilies onto exit-code categories.
"""


class ModalertError(Exception):
    """Base class for all toolkit errors."""


# --- input / ingestion -------------------------------------------------------

class InputError(ModalertError):
    """Problems with user-supplied data files or mismatched inputs."""


class MalformedInput(InputError):
    """A row or cell of an input file could not be parsed, or is non-finite."""


class IrregularSampling(InputError):
    """Time column gaps deviate from the median spacing by more than 0.1%."""


class EmptyRecord(InputError):
    """Input contains fewer than two data rows."""


class ChannelMismatch(InputError):
    """Two records (or a model and a record) disagree on channel count."""


class RateMismatch(InputError):
    """Two records disagree on sample rate."""


class LengthMismatch(InputError):
    """Record lengths differ by more than one sample."""


class GridMismatch(InputError):
    """Alert profiles were built on different threshold grids."""


class ConfigError(ModalertError):
    """Pipeline configuration is invalid."""


# --- numerical / algorithmic -------------------------------------------------

class NumericalError(ModalertError):
    """Algorithmic failures on otherwise well-formed inputs."""


class InsufficientSamples(NumericalError):
    """Statistics requested on a record with fewer than two samples."""


class RecordTooShort(NumericalError):
    """Record shorter than the configured spectral segment length."""


class NoPeaksFound(NumericalError):
    """Peak picking found no qualifying local maxima."""


class BandwidthUnresolved(NumericalError):
    """Half-power crossings not found inside the local peak basin."""


class EmptyModeSet(NumericalError):
    """Model assembly was given no modes."""


class AssemblyConflict(NumericalError):
    """Mode frequencies are not strictly ascending."""


class OverdampedModel(NumericalError):
    """A damping scale would push an effective damping ratio to 1 or above."""


class NyquistViolation(NumericalError):
    """Simulation requested below twice the highest modal frequency."""


class ZeroSimulation(NumericalError):
    """Amplitude matching against an identically zero simulation."""


class NotADistribution(NumericalError):
    """Probability vector has negative mass or does not sum to one."""


class DimensionMismatch(NumericalError):
    """Gaussian summary fields disagree on dimension."""


class EmptyCandidateList(NumericalError):
    """Model selection was given no candidates."""


class UnsortedThresholds(NumericalError):
    """Alert threshold grid is not strictly ascending and nonnegative."""


class InvalidParameter(NumericalError):
    """Synthetic system parameter out of its admissible range."""


class NonProportionalDamping(NumericalError):
    """Damping matrix is not diagonalized by the undamped mode shapes."""


class StepTooLarge(NumericalError):
    """Integration step too coarse for the fastest mode."""


class IndefiniteStiffness(NumericalError):
    """A stiffness perturbation broke positive definiteness."""

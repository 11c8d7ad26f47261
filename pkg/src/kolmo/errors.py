"""Exception types shared across the toolkit."""


class KolmoError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteError(KolmoError):
    """A computation produced NaN/Inf (e.g. unstable time step, diverging rollout)."""


class ShapeMismatchError(KolmoError):
    """Array shape incompatible with the operation's contract."""


class GridIncompatibleError(KolmoError):
    """Grid resolution incompatible with a requested symmetry operation."""


class DegeneratePhaseError(KolmoError):
    """First Fourier mode too small for the spatial phase to be defined."""


class IndicatorDegenerateError(KolmoError):
    """Symmetry indicator function is zero (or not uniquely resolvable)."""


class DegenerateDataError(KolmoError):
    """Data matrix has no usable content (e.g. rank zero)."""


class TooShortError(KolmoError):
    """Series too short for the requested window/lag structure."""


class EmptyDataError(KolmoError):
    """No samples supplied."""


class BinMismatchError(KolmoError):
    """Histogram bin edges differ between operands."""


class HorizonOutOfRangeError(KolmoError):
    """Prediction horizon incompatible with the labeled range."""


class SingleClassError(KolmoError):
    """Classifier training data contains only one class."""


class FormatError(KolmoError):
    """Binary artifact has a bad magic string or unsupported version."""

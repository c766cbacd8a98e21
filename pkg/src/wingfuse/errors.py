"""Exception hierarchy.

Every error raised by this package derives from :class:`WingfuseError`,
so callers (and the CLI) can distinguish validation failures from plain
I/O problems (``OSError``).
"""


class WingfuseError(Exception):
    """Base class for all validation and contract errors."""


class InvalidParameterError(WingfuseError):
    """An argument is outside its documented range."""


# --- embedding file format -------------------------------------------------

class BadMagicError(WingfuseError):
    """File does not start with the WING magic bytes."""


class VersionUnsupportedError(WingfuseError):
    """Header declares a version (or flag bits) this reader does not know."""


class TruncatedFileError(WingfuseError):
    """Payload length disagrees with the row/dim counts in the header."""


class InvalidHeaderError(WingfuseError):
    """Header field holds a structurally impossible value (e.g. dim 0)."""


class NonFiniteValueError(WingfuseError):
    """A NaN or infinity was found where only finite values are allowed."""


class ManifestError(WingfuseError):
    """Sidecar manifest is missing, malformed, or inconsistent with its matrix."""


class PackError(WingfuseError):
    """Class-pack directory is malformed or internally inconsistent."""


# --- text head ---------------------------------------------------------------

class EmptyDescriptionSetError(WingfuseError):
    """A class has no description embeddings to average."""


class BetaOutOfRangeError(WingfuseError):
    """Blend weight outside [0, 1]."""


class DimMismatchError(WingfuseError):
    """Operand dimensions are incompatible."""


class MissingTemplateEmbeddingsError(WingfuseError):
    """Blending requested but a class provides no template embeddings."""


# --- similarity --------------------------------------------------------------

class ZeroNormRowError(WingfuseError):
    """A row with (near-)zero norm cannot enter a cosine similarity."""


class AlphaOutOfRangeError(WingfuseError):
    """Fusion weight outside [0, 1]."""


class ShapeMismatchError(WingfuseError):
    """Matrices that must share a shape do not."""


class EmptyMatrixError(WingfuseError):
    """An operation received a matrix with no rows or no columns."""


# --- objective ---------------------------------------------------------------

class InvalidTemperatureError(WingfuseError):
    """Softmax temperature must be strictly positive."""


class LabelOutOfRangeError(WingfuseError):
    """A label index falls outside the class catalog."""


class EmptyBatchError(WingfuseError):
    """Loss over an empty batch is undefined."""


# --- trainer / evaluator -----------------------------------------------------

class AlignmentMismatchError(WingfuseError):
    """Image and caption matrices do not share ids and row order."""


class UnknownLabelError(WingfuseError):
    """A sample label does not appear in the class catalog."""


class InvalidFractionError(WingfuseError):
    """Split fraction outside the open interval (0, 1)."""


class TooFewSamplesError(WingfuseError):
    """Not enough samples to produce a non-empty split on both sides."""


class EmptyDatasetError(WingfuseError):
    """Train/eval entry points refuse matrices with zero rows."""


class EmptyPresentSetError(WingfuseError):
    """Macro-F1 over an empty class set is undefined."""

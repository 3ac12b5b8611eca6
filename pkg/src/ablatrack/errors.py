"""Exception taxonomy shared by all ablatrack modules.

Input errors (bad files, bad configs) and processing errors are kept in
separate branches so the CLI can map them to distinct exit codes.
"""


class AblatrackError(Exception):
    """Base class for all ablatrack errors."""


class InputError(AblatrackError):
    """Problems with user-supplied files or configuration (CLI exit 3)."""


class ProcessingError(AblatrackError):
    """Failures while computing on valid inputs (CLI exit 4)."""


# frames
class MissingManifest(InputError):
    pass


class MalformedManifest(InputError):
    pass


class DimensionMismatch(InputError):
    """A frame decodes to a size other than the manifest's width x height."""


class IndexOutOfRange(InputError):
    pass


class DecodeFailure(InputError):
    pass


class ConfigInvalid(InputError):
    pass


class IoFailure(AblatrackError):
    pass


# colorseg
class RoiOutOfBounds(InputError):
    pass


class EmptyRangeList(ConfigInvalid):
    pass


# edges
class EmptyRange(InputError):
    pass


class NothingSegmented(ProcessingError):
    """Both probe frames classified entirely as background."""


# timeseg
class EmptySource(InputError):
    pass


class WrongLength(InputError):
    pass


class NonFiniteInput(InputError):
    pass


class DivergedLoss(ProcessingError):
    """Training loss became non-finite; carries the report collected so far."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoOnRegion(ProcessingError):
    """The time-segmentation model labeled no frame as ON."""


class SchemaMismatch(InputError):
    pass


# outliers
class DegenerateInput(InputError):
    pass


class NonFinite(InputError):
    pass


# analysis
class MissingEdge(ProcessingError):
    pass


class NoKeptFrames(ProcessingError):
    pass


class InconsistentDimensions(InputError):
    pass


class DegenerateAbscissa(InputError):
    pass

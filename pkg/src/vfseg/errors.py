"""Exception hierarchy. Every distinct failure mode named by the file formats
and the engine contracts gets its own class so callers can dispatch on kind."""


class VfsegError(Exception):
    """Base class for all engine errors."""


# --- container / file format errors ---------------------------------------

class ContainerFormatError(VfsegError):
    """A binary container violated its format contract."""


class BadMagicError(ContainerFormatError):
    pass


class UnsupportedVersionError(ContainerFormatError):
    pass


class UnsupportedDtypeError(ContainerFormatError):
    pass


class TruncatedPayloadError(ContainerFormatError):
    """Header and payload lengths disagree (short or trailing bytes)."""


class InvalidShapeError(ContainerFormatError):
    """Zero dimension, unsupported rank, or dimension overflow."""


class TagFileError(VfsegError):
    """Malformed tag document (duplicates, empty tags, wrong types)."""


class ManifestError(VfsegError):
    pass


class DuplicateImageIdError(ManifestError):
    pass


class VocabularyMismatchError(ManifestError):
    """Vocabulary length disagrees with the text-embedding row count."""


# --- numeric / engine errors ----------------------------------------------

class DegenerateVectorError(VfsegError):
    """Zero-norm embedding vector; indicates exporter failure upstream."""


class ShapeMismatchError(VfsegError):
    pass


class UnknownClassError(VfsegError):
    """An active class name has no embedding row."""


class MissingEmbeddingError(VfsegError):
    """Assignment requested for a name absent from the sentence-embedding bank."""


class PromptError(VfsegError):
    """Invalid template or missing adjective entry."""


class PerturbationError(VfsegError):
    pass


class MetricsError(VfsegError):
    pass


class EvaluationInputError(VfsegError):
    """Misaligned image sets or missing predictions."""

"""Exception hierarchy shared across the engine."""


class TopicforgeError(Exception):
    """Base class for all engine errors."""


class InputFormatError(TopicforgeError):
    """Malformed input file or record."""


class EmptyCorpus(TopicforgeError):
    """No usable utterances or documents."""


class ProviderUnavailable(TopicforgeError):
    """External embedding/LLM service unreachable after retries."""


class DimensionMismatch(TopicforgeError):
    """Arrays whose shapes must agree do not."""


class ChecksumMismatch(TopicforgeError):
    """Binary artifact failed its integrity check."""


class ZeroVector(TopicforgeError):
    """Cosine of a zero-norm vector is undefined."""


class InsufficientData(TopicforgeError):
    """Too few points/topics for the requested operation."""


class FitDiverged(TopicforgeError):
    """Curve fit failed to converge."""


class EmptyVocabulary(TopicforgeError):
    """No term survived vocabulary construction."""


class UnknownWord(TopicforgeError):
    """Coherence requested for a word absent from the corpus."""


class UnknownTopicId(TopicforgeError):
    """Curation op references a topic id not in the model."""


class OverlappingGroups(TopicforgeError):
    """Merge groups must be disjoint."""


class NothingToUndo(TopicforgeError):
    """Undo requested on an empty curation log."""


class VersionConflict(TopicforgeError):
    """Optimistic concurrency check failed."""


class ModelNotLoaded(TopicforgeError):
    """Service operation before a model was loaded."""


class ProviderTagMismatch(Warning):
    """Models being compared were embedded by different providers."""

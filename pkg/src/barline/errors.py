"""Exception hierarchy shared across the library."""


class BarlineError(Exception):
    """Base class for all library errors."""


# --- symbolic parsing ---------------------------------------------------


class AbcError(BarlineError):
    """Base class for ABC notation errors."""


class UnbalancedChord(AbcError):
    """A chord bracket '[' was opened but never closed on its line."""


class MalformedHeader(AbcError):
    """A header line is missing its colon."""


class MissingKeyHeader(AbcError):
    """The tune has no K: header."""


class MeasureOverflow(AbcError):
    """A voice's durations exceed the active meter in a measure."""


class UnrepresentableDuration(AbcError):
    """A duration cannot be written with the chosen unit length."""


class FragmentParseError(AbcError):
    """A measure fragment failed to parse during reassembly."""

    def __init__(self, index, message):
        super().__init__(f"fragment {index}: {message}")
        self.index = index


class XmlSyntaxError(BarlineError):
    """MusicXML document is not well-formed XML."""


class UnsupportedLayout(BarlineError):
    """MusicXML document uses an unsupported layout (e.g. timewise)."""


class TruncatedFile(BarlineError):
    """A binary file ended before its declared content."""


class DanglingNoteOn(UserWarning):
    """A MIDI note-on never saw its note-off; closed at end of track."""


# --- audio --------------------------------------------------------------


class UnsupportedCodec(BarlineError):
    """WAV file uses a codec other than PCM or IEEE float."""


class EmptyAudio(BarlineError):
    """Audio stream contains no samples."""


class AudioTooShort(UserWarning):
    """Audio is shorter than the longest analysis kernel; it was zero-padded."""


class ShapeMismatch(BarlineError):
    """Paired matrices have different shapes."""


# --- alignment ----------------------------------------------------------


class DimensionMismatch(BarlineError):
    """Vector dimensionality does not match the model."""


class DegenerateData(UserWarning):
    """Data could not support the requested model; a fallback was fitted."""


class RankDeficient(UserWarning):
    """Covariance rank was lower than requested; components zero-padded."""


class NoFeasiblePath(BarlineError):
    """Every state path has probability zero."""


class EmptyMeasure(UserWarning):
    """A measure carries no score events; scores default to 1.0."""


# --- retrieval / agent / service ----------------------------------------


class DirectoryUnreadable(BarlineError):
    """Library directory cannot be read."""


class ProbeTooShort(BarlineError):
    """Retrieval probe has too few notes to fingerprint."""


class EmptyVocabulary(BarlineError):
    """Vectorizer corpus produced no vocabulary."""


class BackendTimeout(BarlineError):
    """Completion backend did not answer within the timeout."""


class ModuleFailure(BarlineError):
    """A pipeline stage failed during an agent turn."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage

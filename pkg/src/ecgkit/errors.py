"""Exception hierarchy for ecgkit.

Parsing errors carry enough context (line, field, byte offset) to point at the
offending spot in a file; everything else is a plain message.
"""


class EcgKitError(Exception):
    """Base class for all ecgkit errors."""


# --- record file parsing ---

class MalformedHeader(EcgKitError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"header line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormat(EcgKitError):
    def __init__(self, format_code):
        super().__init__(f"unsupported signal format code {format_code} "
                         f"(supported: 212, 16)")
        self.format_code = format_code


class TruncatedSignal(EcgKitError):
    pass


class LengthMismatch(EcgKitError):
    pass


class MalformedAnnotationStream(EcgKitError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"byte offset {offset}: {message}"
        super().__init__(message)
        self.offset = offset


# --- signal processing ---

class SignalTooShort(EcgKitError):
    pass


class ShapeMismatch(EcgKitError):
    pass


class InvalidCutoff(EcgKitError):
    pass


class EvenTapCount(EcgKitError):
    pass


# --- delineation / features ---

class WindowOutOfBounds(EcgKitError):
    pass


class LeadNotFound(EcgKitError):
    pass


class InvalidFiducials(EcgKitError):
    pass


# --- classifier ---

class EmptyCorpus(EcgKitError):
    pass


class UnlabeledBeat(EcgKitError):
    pass


class CyclicStructure(EcgKitError):
    pass


class ModelUntrained(EcgKitError):
    pass


# --- boxplot screen ---

class TooFewValues(EcgKitError):
    pass


class StatsUndefined(EcgKitError):
    pass


class TukeyCold(EcgKitError):
    pass


# --- evaluation ---

class NoAnnotatedBeats(EcgKitError):
    pass


class EmptyCounts(EcgKitError):
    pass


class DegenerateSplit(EcgKitError):
    pass

"""Exception types shared across the openqa package."""


class OpenQAError(Exception):
    """Base class for all openqa errors."""


class MalformedLine(OpenQAError):
    def __init__(self, line_number: int, message: str = ""):
        self.line_number = line_number
        super().__init__(f"malformed line {line_number}: {message}")


class SparqlSyntaxError(OpenQAError):
    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"syntax error at position {position}: expected {expected}")


class FilterTypeError(OpenQAError):
    """Numeric comparator applied to a non-numeric binding."""


class EmptyComponent(OpenQAError):
    """Empty subject or predicate where a non-empty string is required."""


class ShapeMismatch(OpenQAError):
    """Tensor shapes do not agree for the requested operation."""


class IndexOutOfRange(OpenQAError):
    """An index (token id, gold label) is outside the valid range."""


class EvenWidth(OpenQAError):
    """Convolution filter width must be odd."""


class EmptySequence(OpenQAError):
    """An operation requiring at least one sequence element got none."""


class EmptyQuestion(OpenQAError):
    """The question is empty after normalization."""


class EmptyPattern(OpenQAError):
    pass


class EmptyRelation(OpenQAError):
    pass


class NoCandidates(OpenQAError):
    pass


class EmptyPassage(OpenQAError):
    pass


class DuplicateDocId(OpenQAError):
    pass


class UnknownDoc(OpenQAError):
    pass


class MisalignedExample(OpenQAError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"example {index}: tags not aligned with tokens")


class NoNegatives(OpenQAError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"example {index}: at least one negative relation required")


class SpanOutOfRange(OpenQAError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"example {index}: gold span outside passage")


class GoldOutOfRange(OpenQAError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"example {index}: gold index outside candidate list")


class EmptyInput(OpenQAError):
    pass


class SequenceTooLong(OpenQAError):
    pass


class EmptyDataset(OpenQAError):
    pass


class ConfigError(OpenQAError):
    """Invalid or incomplete system configuration."""

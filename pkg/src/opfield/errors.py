"""Shared exception types."""


class StructuralError(ValueError):
    """Input data violates a structural precondition (shape, colors, indices)."""


class TruncationOverflow(RuntimeError):
    """A product left the word-length filtration stage; retry with a larger bound."""

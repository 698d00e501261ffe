"""Pluggable subject-language services.

A subject language supplies tokenization, parsing to a :class:`GenericTree`,
format normalization, and comment/null-line classification. The engine is
language-agnostic; one demonstration language ships in
:mod:`blockrepair.minilang`.
"""
from __future__ import annotations

from typing import Protocol, runtime_checkable

from .trees import GenericTree

__all__ = ["SubjectLanguage", "ParseError", "trees_equal_normalized"]


class ParseError(ValueError):
    """Raised when subject-language source does not parse."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(message)
        self.line = line


@runtime_checkable
class SubjectLanguage(Protocol):
    """Contract every pluggable subject language implements.

    ``normalize`` must be idempotent, and ``parse(normalize(x))`` must
    succeed exactly when ``parse(x)`` does.
    """

    name: str

    def tokenize(self, text: str) -> list[str]:
        """Lexical tokens of ``text``; never raises."""
        ...

    def parse(self, text: str) -> GenericTree:
        """Syntax tree of ``text``; raises :class:`ParseError` on failure."""
        ...

    def normalize(self, text: str) -> str:
        """Canonical reformatting; returns ``text`` unchanged if unparsable."""
        ...

    def is_comment_line(self, line: str) -> bool:
        ...

    def is_null_line(self, line: str) -> bool:
        """True for statements that do nothing (bare ';', empty-bodied loop)."""
        ...


def trees_equal_normalized(a: str, b: str, lang: SubjectLanguage) -> bool:
    """Structural equality of the two sources after normalization.

    False when either side fails to parse. Purely syntactic: semantically
    equal but reordered code compares unequal.
    """
    try:
        ta = lang.parse(lang.normalize(a))
        tb = lang.parse(lang.normalize(b))
    except ParseError:
        return False
    return ta.fingerprint() == tb.fingerprint()

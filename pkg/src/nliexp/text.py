"""Toolkit-wide tokenization and the label-indicator phrase."""

from __future__ import annotations

# Contiguous token subsequence marking non-entailment explanations.
INDICATOR_PHRASE = ("we", "do", "not", "know")

_DETACH = {".", ",", "!", "?"}


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, detach trailing punctuation marks.

    Rendered toolkit text already carries punctuation as separate tokens;
    detaching here lets externally produced text (model output, prose
    with "ran," or "essayist.") compare against it token-for-token.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        tail: list[str] = []
        while len(chunk) > 1 and chunk[-1] in _DETACH:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def contains_phrase(tokens: list[str], phrase: tuple[str, ...] = INDICATOR_PHRASE) -> bool:
    """True iff ``phrase`` occurs as a contiguous subsequence of ``tokens``."""
    n = len(phrase)
    if n == 0:
        return True
    return any(tuple(tokens[i : i + n]) == phrase for i in range(len(tokens) - n + 1))

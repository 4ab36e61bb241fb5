from __future__ import annotations

import pytest

from nliexp.text import INDICATOR_PHRASE, contains_phrase, tokenize


@pytest.mark.parametrize(
    "text,expected",
    [
        ("the psychologist saw the essayist.", ["the", "psychologist", "saw", "the", "essayist", "."]),
        ("if the psychologists ran, the programmers existed.",
         ["if", "the", "psychologists", "ran", ",", "the", "programmers", "existed", "."]),
        ("The Musician EXISTED .", ["the", "musician", "existed", "."]),
        ("hello", ["hello"]),
        (".", ["."]),
        ("what?!", ["what", "?", "!"]),
        ("", []),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_tokenize_idempotent_on_rendered_text():
    rendered = "the chaplains near the singer are still the chaplains ."
    once = tokenize(rendered)
    assert tokenize(" ".join(once)) == once


def test_contains_phrase():
    tokens = tokenize("the programmers existed, we do not know whether the psychologists ran.")
    assert contains_phrase(tokens, INDICATOR_PHRASE)
    assert not contains_phrase(tokenize("we know they do not."), INDICATOR_PHRASE)
    assert not contains_phrase([], INDICATOR_PHRASE)
    assert contains_phrase(["a"], ())

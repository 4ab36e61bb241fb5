"""Templated NLI corpus generation and explanation-quality evaluation."""

from importlib import resources

from .lexicon import LexemeEntry, Lexicon, LexiconError, inflect, load_lexicon
from .registry import (
    FoldSplit,
    Registry,
    RegistryError,
    load_registry,
    registry_stats,
    split_folds,
)
from .templates import (
    Binding,
    Literal,
    ParseAmbiguityError,
    SlotRef,
    SlotSpec,
    Template,
    TemplateError,
    binding_at,
    count_bindings,
    enumerate_bindings,
    render,
)
from .text import INDICATOR_PHRASE, tokenize

__version__ = "0.1.0"


def default_lexicon_path():
    """Path to the packaged starter lexicon."""
    return resources.files(__name__) / "data" / "lexicon.txt"


def default_registry_path():
    """Path to the packaged starter template registry."""
    return resources.files(__name__) / "data" / "templates.txt"

"""Word inventory: inflection tables, vocabulary partitions, entity classes.

The lexicon is a data file, not code.  Every surface form is stored
explicitly (the vocabulary is small and closed, rule-based inflection
would only add bugs).  Words are split into two disjoint partitions,
``ind`` and ``ood``, so corpora can be generated from seen or unseen
vocabulary.  Professions and locations are the entity classes counted
by the hallucination metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

POS_CLASSES = (
    "profession",
    "location",
    "transitive_verb",
    "intransitive_verb",
    "adverb",
    "adjective",
    "preposition",
    "relativizer",
    "connective",
)
PARTITIONS = ("ind", "ood")
NOUN_CLASSES = frozenset({"profession", "location"})
ENTITY_CLASSES = frozenset({"profession", "location"})

# Feature keys each class must define, and nothing else.
REQUIRED_FORMS = {
    "profession": ("singular", "plural"),
    "location": ("singular", "plural"),
    "transitive_verb": ("past", "passive_participle"),
    "intransitive_verb": ("past",),
    "adverb": ("base",),
    "adjective": ("base",),
    "preposition": ("base",),
    "relativizer": ("base",),
    "connective": ("base",),
}

# Only prepositions may surface as more than one token ("in front of").
MULTIWORD_CLASSES = frozenset({"preposition"})


class LexiconError(ValueError):
    """Malformed lexicon file or violated lexicon invariant."""


@dataclass(frozen=True)
class LexemeEntry:
    """One vocabulary item with its explicit inflection table."""

    lemma: str
    pos_class: str
    partition: str
    forms: dict[str, tuple[str, ...]]  # feature -> surface tokens

    @property
    def key(self) -> tuple[str, str]:
        return (self.lemma, self.pos_class)

    @property
    def is_entity(self) -> bool:
        return self.pos_class in ENTITY_CLASSES


def inflect(entry: LexemeEntry, feature: str) -> str:
    """Stored surface form for ``feature``, joined if multi-token."""
    try:
        return " ".join(entry.forms[feature])
    except KeyError:
        raise LexiconError(
            f"{entry.lemma}/{entry.pos_class} has no '{feature}' form"
        ) from None


class Lexicon:
    """Validated, immutable collection of lexeme entries."""

    def __init__(self, entries: list[LexemeEntry]):
        if not entries:
            raise LexiconError("no entries")
        self.entries: tuple[LexemeEntry, ...] = tuple(entries)
        self._by_key: dict[tuple[str, str], LexemeEntry] = {}
        self._by_class_partition: dict[tuple[str, str], list[LexemeEntry]] = {}
        # full surface string -> {(lemma, pos_class, feature)}
        self.surface_index: dict[str, set[tuple[str, str, str]]] = {}
        # first token -> [(entry, feature, form tokens)] for span matching
        self._span_index: dict[str, list[tuple[LexemeEntry, str, tuple[str, ...]]]] = {}

        for entry in entries:
            _check_entry(entry)
            if entry.key in self._by_key:
                raise LexiconError(f"duplicate entry {entry.lemma}/{entry.pos_class}")
            self._by_key[entry.key] = entry
            self._by_class_partition.setdefault(
                (entry.pos_class, entry.partition), []
            ).append(entry)
            for feature, tokens in entry.forms.items():
                surface = " ".join(tokens)
                self.surface_index.setdefault(surface, set()).add(
                    (entry.lemma, entry.pos_class, feature)
                )
                self._span_index.setdefault(tokens[0], []).append(
                    (entry, feature, tokens)
                )

        self._check_partition_disjoint()

    def _check_partition_disjoint(self) -> None:
        seen: dict[str, str] = {}
        for entry in self.entries:
            for tokens in entry.forms.values():
                surface = " ".join(tokens)
                prior = seen.setdefault(surface, entry.partition)
                if prior != entry.partition:
                    raise LexiconError(
                        f"surface form '{surface}' appears in both partitions"
                    )

    def get(self, lemma: str, pos_class: str) -> LexemeEntry:
        try:
            return self._by_key[(lemma, pos_class)]
        except KeyError:
            raise LexiconError(f"unknown lexeme {lemma}/{pos_class}") from None

    def entries_for(self, pos_class: str, partition: str) -> tuple[LexemeEntry, ...]:
        """Entries of one class and partition, in file order."""
        return tuple(self._by_class_partition.get((pos_class, partition), ()))

    def candidates_at(self, token: str) -> list[tuple[LexemeEntry, str, tuple[str, ...]]]:
        """All (entry, feature, form tokens) whose form starts with ``token``."""
        return self._span_index.get(token, [])

    def is_entity_token(self, token: str) -> bool:
        """True iff ``token`` is a surface form of a profession or location."""
        return any(
            pos in ENTITY_CLASSES for _, pos, _ in self.surface_index.get(token, ())
        )

    def entity_lexemes(self, token: str) -> set[tuple[str, str]]:
        """Entity (lemma, pos_class) pairs realized by ``token``, any number."""
        return {
            (lemma, pos)
            for lemma, pos, _ in self.surface_index.get(token, ())
            if pos in ENTITY_CLASSES
        }


def _check_entry(entry: LexemeEntry) -> None:
    where = f"{entry.lemma}/{entry.pos_class}"
    if entry.pos_class not in POS_CLASSES:
        raise LexiconError(f"{where}: unknown pos class")
    if entry.partition not in PARTITIONS:
        raise LexiconError(f"{where}: partition must be ind or ood")
    if not entry.lemma or entry.lemma != entry.lemma.lower() or " " in entry.lemma:
        raise LexiconError(f"{where}: lemma must be lowercase and whitespace-free")
    required = REQUIRED_FORMS[entry.pos_class]
    if set(entry.forms) != set(required):
        raise LexiconError(
            f"{where}: needs exactly the forms {', '.join(required)}"
        )
    for feature, tokens in entry.forms.items():
        if not tokens:
            raise LexiconError(f"{where}: empty '{feature}' form")
        if len(tokens) > 1 and entry.pos_class not in MULTIWORD_CLASSES:
            raise LexiconError(f"{where}: multi-word forms only allowed for prepositions")
        for token in tokens:
            if not token or token != token.lower() or not token.isalpha():
                raise LexiconError(
                    f"{where}: form token '{token}' must be lowercase letters"
                )


def parse_lexicon(lines, source: str = "<lexicon>") -> Lexicon:
    """Parse `pos_class | partition | lemma | form=surface; ...` records."""
    entries = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 4:
            raise LexiconError(f"{source}:{lineno}: expected 4 '|'-separated fields")
        pos_class, partition, lemma, forms_field = parts
        forms: dict[str, tuple[str, ...]] = {}
        for pair in forms_field.split(";"):
            pair = pair.strip()
            if not pair:
                continue
            if "=" not in pair:
                raise LexiconError(f"{source}:{lineno}: form '{pair}' is not key=value")
            feature, surface = (s.strip() for s in pair.split("=", 1))
            if feature in forms:
                raise LexiconError(f"{source}:{lineno}: duplicate form '{feature}'")
            forms[feature] = tuple(surface.split())
        try:
            entries.append(
                LexemeEntry(lemma=lemma, pos_class=pos_class, partition=partition, forms=forms)
            )
            _check_entry(entries[-1])
        except LexiconError as err:
            raise LexiconError(f"{source}:{lineno}: {err}") from None
    if not entries:
        raise LexiconError(f"{source}: no entries")
    return Lexicon(entries)


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        return parse_lexicon(handle, source=str(path))

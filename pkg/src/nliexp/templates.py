"""Sentence templates: rendering, inverse parsing, binding enumeration.

A template owns three token patterns (premise, hypothesis, explanation)
over a shared set of typed slots.  Rendering fills slots from a binding
with the declared inflection; parsing inverts it, recovering the
template and binding from a premise/hypothesis pair.  Enumeration walks
every admissible binding in a canonical order so sampling can be done
by index without materializing the space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .lexicon import (
    LexemeEntry,
    Lexicon,
    NOUN_CLASSES,
    POS_CLASSES,
    REQUIRED_FORMS,
    inflect,
)

HEURISTICS = ("lexical_overlap", "subsequence", "constituent")
LABELS = ("entailment", "non_entailment")
NUMBERS = ("singular", "plural")


class TemplateError(ValueError):
    """Ill-formed template or binding."""


class EmptyClassError(TemplateError):
    """A required pos class has no entries in the requested partition."""


class ParseAmbiguityError(TemplateError):
    """More than one (template, binding) with conflicting outputs matched."""


@dataclass(frozen=True)
class Literal:
    token: str


@dataclass(frozen=True)
class SlotRef:
    name: str
    feature: str | None = None  # None = resolved from the slot declaration


Element = Literal | SlotRef
Pattern = tuple[Element, ...]


@dataclass(frozen=True)
class SlotSpec:
    pos_class: str
    number: str | None = None  # singular/plural for noun classes, else None


@dataclass(frozen=True)
class Template:
    id: str
    heuristic: str
    subcase: str
    label: str
    premise: Pattern
    hypothesis: Pattern
    explanation: Pattern
    slots: dict[str, SlotSpec]

    def feature_of(self, ref: SlotRef) -> str:
        """Inflection feature a slot reference resolves to."""
        spec = self.slots[ref.name]
        if ref.feature is not None:
            return ref.feature
        if spec.pos_class in NOUN_CLASSES:
            return spec.number or "singular"
        if spec.pos_class in ("transitive_verb", "intransitive_verb"):
            return "past"
        return "base"

    def pattern(self, which: str) -> Pattern:
        return {"premise": self.premise, "hypothesis": self.hypothesis,
                "explanation": self.explanation}[which]


def validate_template(template: Template) -> list[str]:
    """Structural problems with one template; empty list if none."""
    problems = []
    if template.heuristic not in HEURISTICS:
        problems.append("unknown heuristic")
    if template.label not in LABELS:
        problems.append("unknown label")
    for name, spec in template.slots.items():
        if spec.pos_class not in POS_CLASSES:
            problems.append(f"slot {name}: unknown pos class {spec.pos_class}")
        elif spec.pos_class in NOUN_CLASSES:
            if spec.number not in NUMBERS:
                problems.append(f"slot {name}: noun slots need singular/plural")
        elif spec.number is not None:
            problems.append(f"slot {name}: number only applies to noun slots")

    referenced: set[str] = set()
    for which in ("premise", "hypothesis", "explanation"):
        pattern = template.pattern(which)
        if not pattern or pattern[-1] != Literal("."):
            problems.append(f"{which}: must end with the period token")
        for element in pattern:
            if isinstance(element, Literal):
                token = element.token
                if not token or token != token.lower() or " " in token:
                    problems.append(f"{which}: bad literal '{token}'")
            else:
                referenced.add(element.name)
                spec = template.slots.get(element.name)
                if spec is None:
                    problems.append(f"{which}: undeclared slot {element.name}")
                    continue
                feature = element.feature
                if feature is not None:
                    if feature not in REQUIRED_FORMS.get(spec.pos_class, ()):
                        problems.append(
                            f"{which}: slot {element.name} has no '{feature}' form"
                        )
                    if spec.pos_class in NOUN_CLASSES and feature != spec.number:
                        problems.append(
                            f"{which}: slot {element.name} must use its declared number"
                        )
    undeclared_use = referenced - set(template.slots)
    recoverable = {
        e.name
        for p in (template.premise, template.hypothesis)
        for e in p
        if isinstance(e, SlotRef)
    }
    for name in template.slots:
        if name not in recoverable:
            # Slots invisible in premise+hypothesis make rendering
            # non-injective and explanations ungrounded.
            problems.append(f"slot {name}: never appears in premise or hypothesis")
    if undeclared_use:
        problems.append(f"undeclared slots referenced: {sorted(undeclared_use)}")
    return problems


@dataclass(frozen=True)
class Binding:
    """Assignment of lexemes to a template's slots."""

    assignments: dict[str, LexemeEntry]

    def key(self) -> tuple[tuple[str, str, str], ...]:
        """Hashable identity: (slot, lemma, pos_class), slot-sorted."""
        return tuple(
            (name, entry.lemma, entry.pos_class)
            for name, entry in sorted(self.assignments.items())
        )

    def lemmas(self) -> dict[str, str]:
        return {name: entry.lemma for name, entry in sorted(self.assignments.items())}

    def __eq__(self, other) -> bool:
        return isinstance(other, Binding) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


def check_binding(template: Template, binding: Binding) -> None:
    """Raise unless ``binding`` satisfies the template's slot declarations."""
    missing = set(template.slots) - set(binding.assignments)
    extra = set(binding.assignments) - set(template.slots)
    if missing or extra:
        raise TemplateError(
            f"{template.id}: binding mismatch (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    by_class: dict[str, set[tuple[str, str]]] = {}
    for name, entry in binding.assignments.items():
        spec = template.slots[name]
        if entry.pos_class != spec.pos_class:
            raise TemplateError(
                f"{template.id}: slot {name} expects {spec.pos_class}, got {entry.pos_class}"
            )
        seen = by_class.setdefault(spec.pos_class, set())
        if entry.key in seen:
            raise TemplateError(
                f"{template.id}: slot {name} repeats {entry.lemma}; same-class slots must differ"
            )
        seen.add(entry.key)


def _render_pattern(template: Template, pattern: Pattern, binding: Binding) -> str:
    tokens: list[str] = []
    for element in pattern:
        if isinstance(element, Literal):
            tokens.append(element.token)
        else:
            entry = binding.assignments[element.name]
            tokens.append(inflect(entry, template.feature_of(element)))
    return " ".join(tokens)


def render(template: Template, binding: Binding, lexicon: Lexicon) -> tuple[str, str, str]:
    """Render (premise, hypothesis, explanation); pure and deterministic."""
    check_binding(template, binding)
    return (
        _render_pattern(template, template.premise, binding),
        _render_pattern(template, template.hypothesis, binding),
        _render_pattern(template, template.explanation, binding),
    )


# ---------------------------------------------------------------------------
# Binding enumeration.  Canonical order: slot names sorted, lexemes in lexicon
# file order, same-class slots never repeating a lexeme.

def _layout(template: Template, lexicon: Lexicon, partition: str):
    layout = []
    for name in sorted(template.slots):
        spec = template.slots[name]
        entries = lexicon.entries_for(spec.pos_class, partition)
        if not entries:
            raise EmptyClassError(
                f"{template.id}: no {partition} entries for class {spec.pos_class}"
            )
        layout.append((name, spec.pos_class, entries))
    return layout


def count_bindings(template: Template, lexicon: Lexicon, partition: str) -> int:
    """Number of admissible bindings (falling factorial per class)."""
    per_class_slots: dict[str, int] = {}
    per_class_size: dict[str, int] = {}
    for name, pos_class, entries in _layout(template, lexicon, partition):
        per_class_slots[pos_class] = per_class_slots.get(pos_class, 0) + 1
        per_class_size[pos_class] = len(entries)
    total = 1
    for pos_class, k in per_class_slots.items():
        n = per_class_size[pos_class]
        for i in range(k):
            total *= n - i
    return total


def enumerate_bindings(
    template: Template, lexicon: Lexicon, partition: str
) -> Iterator[Binding]:
    """All admissible bindings, in canonical order."""
    layout = _layout(template, lexicon, partition)

    def recurse(i: int, used: set, chosen: dict):
        if i == len(layout):
            yield Binding(dict(chosen))
            return
        name, pos_class, entries = layout[i]
        for entry in entries:
            if (pos_class, entry.lemma) in used:
                continue
            used.add((pos_class, entry.lemma))
            chosen[name] = entry
            yield from recurse(i + 1, used, chosen)
            del chosen[name]
            used.discard((pos_class, entry.lemma))

    yield from recurse(0, set(), {})


def binding_at(template: Template, lexicon: Lexicon, partition: str, index: int) -> Binding:
    """The ``index``-th binding of the canonical enumeration, O(slots * lexemes)."""
    layout = _layout(template, lexicon, partition)
    total = count_bindings(template, lexicon, partition)
    if not 0 <= index < total:
        raise TemplateError(f"{template.id}: binding index {index} out of range {total}")

    remaining: dict[str, int] = {}
    class_size: dict[str, int] = {}
    for _, pos_class, entries in layout:
        remaining[pos_class] = remaining.get(pos_class, 0) + 1
        class_size[pos_class] = len(entries)

    used: dict[str, set[str]] = {pos: set() for pos in remaining}
    chosen: dict[str, LexemeEntry] = {}
    for name, pos_class, entries in layout:
        remaining[pos_class] -= 1
        block = 1
        for pos, slots_left in remaining.items():
            avail = class_size[pos] - len(used[pos]) - (1 if pos == pos_class else 0)
            for i in range(slots_left):
                block *= avail - i
        rank, index = divmod(index, block)
        for entry in entries:
            if entry.lemma in used[pos_class]:
                continue
            if rank == 0:
                chosen[name] = entry
                used[pos_class].add(entry.lemma)
                break
            rank -= 1
    return Binding(chosen)


# ---------------------------------------------------------------------------
# Parsing: match token sequences back onto patterns.

def _match_pattern(
    template: Template,
    lexicon: Lexicon,
    pattern: Pattern,
    tokens: list[str],
    position: int,
    element_index: int,
    bound: dict[str, LexemeEntry],
    used: set[tuple[str, str]],
) -> Iterator[dict[str, LexemeEntry]]:
    if element_index == len(pattern):
        if position == len(tokens):
            yield dict(bound)
        return
    element = pattern[element_index]
    if isinstance(element, Literal):
        if position < len(tokens) and tokens[position] == element.token:
            yield from _match_pattern(
                template, lexicon, pattern, tokens, position + 1,
                element_index + 1, bound, used,
            )
        return

    spec = template.slots[element.name]
    feature = template.feature_of(element)
    already = bound.get(element.name)
    if already is not None:
        form = tuple(inflect(already, feature).split())
        end = position + len(form)
        if tuple(tokens[position:end]) == form:
            yield from _match_pattern(
                template, lexicon, pattern, tokens, end,
                element_index + 1, bound, used,
            )
        return
    if position >= len(tokens):
        return
    for entry, cand_feature, form in lexicon.candidates_at(tokens[position]):
        if entry.pos_class != spec.pos_class or cand_feature != feature:
            continue
        if (spec.pos_class, entry.lemma) in used:
            continue
        end = position + len(form)
        if tuple(tokens[position:end]) != form:
            continue
        bound[element.name] = entry
        used.add((spec.pos_class, entry.lemma))
        yield from _match_pattern(
            template, lexicon, pattern, tokens, end, element_index + 1, bound, used,
        )
        del bound[element.name]
        used.discard((spec.pos_class, entry.lemma))


def match_template(
    template: Template,
    lexicon: Lexicon,
    premise_tokens: list[str],
    hypothesis_tokens: list[str],
) -> Optional[Binding]:
    """First binding rendering exactly to the given token sequences, if any."""
    for partial in _match_pattern(
        template, lexicon, template.premise, premise_tokens, 0, 0, {}, set()
    ):
        used = {(e.pos_class, e.lemma) for e in partial.values()}
        for full in _match_pattern(
            template, lexicon, template.hypothesis, hypothesis_tokens, 0, 0,
            dict(partial), used,
        ):
            if len(full) == len(template.slots):
                return Binding(full)
    return None


def pattern_span(pattern: Pattern, template: Template, lexicon: Lexicon) -> tuple[int, int]:
    """Min and max token length a pattern can render to."""
    low = high = 0
    for element in pattern:
        if isinstance(element, Literal):
            low += 1
            high += 1
        else:
            spec = template.slots[element.name]
            feature = template.feature_of(element)
            lengths = [
                len(entry.forms[feature])
                for part in ("ind", "ood")
                for entry in lexicon.entries_for(spec.pos_class, part)
                if feature in entry.forms
            ]
            if not lengths:
                lengths = [1]
            low += min(lengths)
            high += max(lengths)
    return low, high


class TemplateMatcher:
    """Parses premise/hypothesis pairs back to (template id, binding).

    Templates are prefiltered by render-length bounds and leading literal
    anchors before the backtracking matcher runs, which keeps whole-corpus
    round-trips cheap.
    """

    def __init__(self, templates, lexicon: Lexicon):
        from .text import tokenize

        self._tokenize = tokenize
        self._lexicon = lexicon
        self._entries = []
        for template in templates:
            p_span = pattern_span(template.premise, template, lexicon)
            h_span = pattern_span(template.hypothesis, template, lexicon)
            p_first = (
                template.premise[0].token
                if isinstance(template.premise[0], Literal)
                else None
            )
            h_first = (
                template.hypothesis[0].token
                if isinstance(template.hypothesis[0], Literal)
                else None
            )
            self._entries.append((template, p_span, h_span, p_first, h_first))

    def parse(self, premise: str, hypothesis: str) -> Optional[tuple[str, Binding]]:
        """Unique parse, None when nothing matches, error on real ambiguity."""
        p_tokens = self._tokenize(premise)
        h_tokens = self._tokenize(hypothesis)
        matches: list[tuple[Template, Binding]] = []
        for template, (plo, phi), (hlo, hhi), p_first, h_first in self._entries:
            if not (plo <= len(p_tokens) <= phi and hlo <= len(h_tokens) <= hhi):
                continue
            if p_first is not None and p_tokens[0] != p_first:
                continue
            if h_first is not None and h_tokens[0] != h_first:
                continue
            binding = match_template(template, self._lexicon, p_tokens, h_tokens)
            if binding is not None:
                matches.append((template, binding))
        if not matches:
            return None
        if len(matches) > 1:
            labels = {t.label for t, _ in matches}
            explanations = {
                _render_pattern(t, t.explanation, b) for t, b in matches
            }
            if len(labels) > 1 or len(explanations) > 1:
                ids = ", ".join(sorted(t.id for t, _ in matches))
                raise ParseAmbiguityError(f"ambiguous parse across templates: {ids}")
        template, binding = min(matches, key=lambda pair: pair[0].id)
        return template.id, binding

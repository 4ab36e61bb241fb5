"""Template inventory: loading, validation, fold splits, corpus statistics.

Validation enforces the rules that make the rest of the toolkit sound:
slot classes must exist in both vocabulary partitions, non-entailment
explanations must carry the indicator phrase (and entailment ones must
not), explanations may not introduce open-class content absent from the
premise and hypothesis, and no two templates with different labels may
render an identical premise/hypothesis pair.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import rng as rnglib
from .lexicon import Lexicon, NOUN_CLASSES
from .templates import (
    Binding,
    HEURISTICS,
    LABELS,
    Literal,
    Pattern,
    SlotRef,
    SlotSpec,
    Template,
    TemplateMatcher,
    binding_at,
    count_bindings,
    render,
    validate_template,
)
from .text import INDICATOR_PHRASE, contains_phrase

FOLD_COUNT = 5


class RegistryError(ValueError):
    """Malformed template file or failed validation."""

    def __init__(self, failures: Iterable[str]):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class Registry:
    """Validated, immutable template inventory."""

    def __init__(self, templates: list[Template], lexicon: Lexicon, strict: bool = True):
        self.templates: tuple[Template, ...] = tuple(templates)
        self.by_id: dict[str, Template] = {}
        self.by_heuristic: dict[str, dict[str, list[str]]] = {}
        failures: list[str] = []
        for template in self.templates:
            if template.id in self.by_id:
                failures.append(f"{template.id}: duplicate-id")
                continue
            self.by_id[template.id] = template
            self.by_heuristic.setdefault(template.heuristic, {}).setdefault(
                template.subcase, []
            ).append(template.id)
        failures.extend(_validate(self.templates, lexicon, strict=strict))
        if failures:
            raise RegistryError(failures)
        self._matcher = TemplateMatcher(self.templates, lexicon)
        self._lexicon = lexicon

    def __len__(self) -> int:
        return len(self.templates)

    def parse(self, premise: str, hypothesis: str):
        """Recover (template id, binding), or None if nothing matches."""
        return self._matcher.parse(premise, hypothesis)

    def render_explanation(self, template_id: str, binding: Binding) -> str:
        template = self.by_id[template_id]
        return render(template, binding, self._lexicon)[2]


@dataclass(frozen=True)
class FoldSplit:
    folds: tuple[tuple[str, ...], ...]
    seed: int

    def training_ids(self, held_out_fold: int) -> tuple[str, ...]:
        return tuple(
            tid
            for i, fold in enumerate(self.folds)
            if i != held_out_fold
            for tid in fold
        )

    def held_out_ids(self, held_out_fold: int) -> tuple[str, ...]:
        return self.folds[held_out_fold]


def split_folds(registry: Registry, seed: int) -> FoldSplit:
    """Seeded shuffle of template ids, then round-robin into 5 folds."""
    ids = [t.id for t in registry.templates]
    if not ids:
        raise RegistryError(["cannot split an empty registry"])
    rnglib.stream(seed, "fold-split").shuffle(ids)
    folds = tuple(tuple(ids[i::FOLD_COUNT]) for i in range(FOLD_COUNT))
    return FoldSplit(folds=folds, seed=seed)


@dataclass(frozen=True)
class RegistryStats:
    template_count: int
    by_heuristic: dict[str, dict[str, int]]
    by_label: dict[str, int]
    mean_premise_length: float
    mean_hypothesis_length: float
    mean_explanation_length: float


def registry_stats(
    registry: Registry,
    lexicon: Lexicon,
    samples_per_template: int = 100,
    seed: int = 0,
    partition: str = "ind",
) -> RegistryStats:
    """Inventory counts plus mean token lengths over seeded renderings.

    The terminal period token does not count toward lengths.
    """
    if samples_per_template <= 0:
        raise RegistryError(["sample count must be positive"])
    totals = [0, 0, 0]
    rendered = 0
    for template in registry.templates:
        total = count_bindings(template, lexicon, partition)
        take = min(samples_per_template, total)
        stream = rnglib.stream(seed, "registry-stats", template.id)
        for index in rnglib.sample_prefix(stream, take, total):
            binding = binding_at(template, lexicon, partition, index)
            for i, text in enumerate(render(template, binding, lexicon)):
                totals[i] += len(text.split()) - 1  # drop the period token
            rendered += 1
    by_heuristic = {
        heuristic: {subcase: len(ids) for subcase, ids in sorted(subcases.items())}
        for heuristic, subcases in sorted(registry.by_heuristic.items())
    }
    by_label = {label: 0 for label in LABELS}
    for template in registry.templates:
        by_label[template.label] += 1
    return RegistryStats(
        template_count=len(registry),
        by_heuristic=by_heuristic,
        by_label=by_label,
        mean_premise_length=totals[0] / rendered,
        mean_hypothesis_length=totals[1] / rendered,
        mean_explanation_length=totals[2] / rendered,
    )


# ---------------------------------------------------------------------------
# Validation.

def _pattern_literals(pattern: Pattern) -> list[str]:
    return [e.token for e in pattern if isinstance(e, Literal)]


def _validate(templates: tuple[Template, ...], lexicon: Lexicon, strict: bool) -> list[str]:
    failures: list[str] = []
    if not templates:
        return ["registry is empty"]
    for template in templates:
        for problem in validate_template(template):
            failures.append(f"{template.id}: structure: {problem}")

    # Slot classes must be populated in both partitions.
    for template in templates:
        for pos_class in sorted({s.pos_class for s in template.slots.values()}):
            for partition in ("ind", "ood"):
                if not lexicon.entries_for(pos_class, partition):
                    failures.append(
                        f"{template.id}: lexicon-coverage: class {pos_class} "
                        f"empty in {partition} partition"
                    )

    # Indicator phrase: present as contiguous literals iff non-entailment.
    for token in INDICATOR_PHRASE:
        if token in lexicon.surface_index:
            failures.append(
                f"indicator-phrase: token '{token}' is a lexicon surface form"
            )
    for template in templates:
        literal_stream = []
        for element in template.explanation:
            literal_stream.append(
                element.token if isinstance(element, Literal) else "\x00"
            )
        has_phrase = contains_phrase(literal_stream)
        if template.label == "non_entailment" and not has_phrase:
            failures.append(f"{template.id}: indicator-phrase rule: missing")
        if template.label == "entailment" and has_phrase:
            failures.append(f"{template.id}: indicator-phrase rule: present")

    # Explanations may not use slots that are invisible in premise+hypothesis;
    # validate_template already enforces that every slot shows up there, so the
    # remaining risk is literal content.  Explanation literals are closed-class
    # by construction; flag any literal that is an entity surface form.
    for template in templates:
        for token in _pattern_literals(template.explanation):
            if lexicon.is_entity_token(token):
                failures.append(
                    f"{template.id}: explanation-content: literal '{token}' is an entity"
                )

    if strict:
        heuristics = {t.heuristic for t in templates}
        if heuristics != set(HEURISTICS):
            failures.append(
                "shape: expected exactly the heuristics "
                f"{', '.join(HEURISTICS)}; found {', '.join(sorted(heuristics))}"
            )
        labels = {t.label for t in templates}
        if labels != set(LABELS):
            failures.append("shape: both labels must be present")

    failures.extend(_check_ambiguity(templates, lexicon))
    failures.extend(_sampled_collision_check(templates, lexicon))
    return failures


def _expanded_patterns(template: Template, lexicon: Lexicon, partition: str):
    """Premise/hypothesis element lists with preposition slots spelled out.

    Prepositions are the only class with multi-token forms, so expanding
    them turns every slot into an exactly-one-token matcher and makes the
    pairwise unification below purely positional.
    """
    prep_slots = [
        name
        for name, spec in template.slots.items()
        if spec.pos_class == "preposition"
    ]
    options = [lexicon.entries_for("preposition", partition) for _ in prep_slots]
    for combo in itertools.product(*options) if prep_slots else [()]:
        if len({e.lemma for e in combo}) != len(combo):
            continue  # distinctness among preposition slots
        assignment = dict(zip(prep_slots, combo))

        def expand(pattern: Pattern):
            out = []
            for element in pattern:
                if isinstance(element, SlotRef) and element.name in assignment:
                    for token in assignment[element.name].forms["base"]:
                        out.append(Literal(token))
                else:
                    out.append(element)
            return out

        yield expand(template.premise), expand(template.hypothesis)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def _surfaces(lexicon: Lexicon, pos_class: str, feature: str, partition: str) -> dict[str, str]:
    """surface -> lemma for one (class, feature, partition)."""
    out: dict[str, str] = {}
    for entry in lexicon.entries_for(pos_class, partition):
        if feature in entry.forms and len(entry.forms[feature]) == 1:
            out[entry.forms[feature][0]] = entry.lemma
    return out


def _patterns_can_collide(
    a: Template,
    b: Template,
    pa: list,
    pb: list,
    ha: list,
    hb: list,
    lexicon: Lexicon,
    partition: str,
) -> bool:
    """Whether some binding pair renders both templates to the same pair.

    Decides satisfiability of position-wise unification together with each
    template's same-class distinctness constraint.  Assumes surface forms
    are unique within a (class, feature, partition), which the sampled
    collision check below does not assume.
    """
    if len(pa) != len(pb) or len(ha) != len(hb):
        return False
    uf = _UnionFind()
    forced: dict = {}

    def slot_node(template, name):
        return ("slot", id(template), name)

    def feature_of(template, ref):
        return template.feature_of(ref)

    for ea, eb in zip(pa + ha, pb + hb):
        a_lit = isinstance(ea, Literal)
        b_lit = isinstance(eb, Literal)
        if a_lit and b_lit:
            if ea.token != eb.token:
                return False
        elif a_lit != b_lit:
            literal, template, ref = (
                (ea.token, b, eb) if a_lit else (eb.token, a, ea)
            )
            spec = template.slots[ref.name]
            surfaces = _surfaces(lexicon, spec.pos_class, feature_of(template, ref), partition)
            if literal not in surfaces:
                return False
            node = slot_node(template, ref.name)
            root = uf.find(node)
            if root in forced and forced[root] != surfaces[literal]:
                return False
            forced[uf.find(node)] = surfaces[literal]
        else:
            spec_a = a.slots[ea.name]
            spec_b = b.slots[eb.name]
            surf_a = _surfaces(lexicon, spec_a.pos_class, feature_of(a, ea), partition)
            surf_b = _surfaces(lexicon, spec_b.pos_class, feature_of(b, eb), partition)
            if not set(surf_a) & set(surf_b):
                return False
            na, nb = slot_node(a, ea.name), slot_node(b, eb.name)
            fa, fb = forced.get(uf.find(na)), forced.get(uf.find(nb))
            if fa is not None and fb is not None and fa != fb:
                return False
            uf.union(na, nb)
            if fa is not None or fb is not None:
                forced[uf.find(na)] = fa if fa is not None else fb

    # Distinctness within each template: two same-class slots collapsing to
    # one equivalence class would have to bind the same lexeme.
    for template in (a, b):
        by_class: dict[str, list] = {}
        for name, spec in template.slots.items():
            if spec.pos_class == "preposition":
                continue  # already concrete in the expansion
            by_class.setdefault(spec.pos_class, []).append(slot_node(template, name))
        for nodes in by_class.values():
            roots = [uf.find(n) for n in nodes]
            if len(set(roots)) != len(roots):
                return False
    return True


def _check_ambiguity(templates: tuple[Template, ...], lexicon: Lexicon) -> list[str]:
    failures = []
    expanded = []
    for partition in ("ind", "ood"):
        for template in templates:
            try:
                for premise, hypothesis in _expanded_patterns(template, lexicon, partition):
                    expanded.append((partition, template, premise, hypothesis))
            except KeyError:
                continue  # lexicon-coverage failure already reported
    for i, (part_a, a, pa, ha) in enumerate(expanded):
        for part_b, b, pb, hb in expanded[i + 1 :]:
            if part_a != part_b or a.id == b.id:
                continue
            if a.label == b.label:
                continue
            if _patterns_can_collide(a, b, pa, pb, ha, hb, lexicon, part_a):
                failures.append(
                    f"{min(a.id, b.id)}: ambiguity: can render the same "
                    f"premise/hypothesis pair as {max(a.id, b.id)} with a different label"
                )
    return sorted(set(failures))


def _sampled_collision_check(
    templates: tuple[Template, ...], lexicon: Lexicon, per_template: int = 25
) -> list[str]:
    """Seeded render sampling; catches collisions the unifier might miss."""
    failures = []
    for partition in ("ind", "ood"):
        seen: dict[tuple[str, str], tuple[str, str, str]] = {}
        for template in templates:
            try:
                total = count_bindings(template, lexicon, partition)
            except Exception:
                continue
            take = min(per_template, total)
            stream = rnglib.stream(0, "ambiguity-sample", partition, template.id)
            for index in rnglib.sample_prefix(stream, take, total):
                binding = binding_at(template, lexicon, partition, index)
                premise, hypothesis, explanation = render(template, binding, lexicon)
                prior = seen.get((premise, hypothesis))
                if prior is None:
                    seen[(premise, hypothesis)] = (template.id, template.label, explanation)
                elif prior[0] != template.id and (
                    prior[1] != template.label or prior[2] != explanation
                ):
                    failures.append(
                        f"{min(prior[0], template.id)}: ambiguity: sampled collision "
                        f"with {max(prior[0], template.id)}"
                    )
    return sorted(set(failures))


# ---------------------------------------------------------------------------
# Template file format.

_HEADER_RE = re.compile(r"^template\s+(\S+)\s*\|([^|]*)\|([^|]*)\|([^|]*)$")
_SLOT_RE = re.compile(r"^(\w+)=([a-z_]+)(?::([a-z_]+))?$")
_REF_RE = re.compile(r"^\{(\w+)(?::([a-z_]+))?\}$")


def _parse_pattern(value: str, source: str, lineno: int) -> Pattern:
    elements: list = []
    for token in value.split():
        ref = _REF_RE.match(token)
        if ref:
            elements.append(SlotRef(ref.group(1), ref.group(2)))
        elif "{" in token or "}" in token:
            raise RegistryError([f"{source}:{lineno}: malformed slot reference '{token}'"])
        else:
            elements.append(Literal(token))
    return tuple(elements)


def parse_registry(lines, lexicon: Lexicon, source: str = "<registry>", strict: bool = True) -> Registry:
    """Parse the template record format and build a validated Registry."""
    templates: list[Template] = []
    header: tuple[str, str, str, str] | None = None
    fields: dict[str, tuple[Pattern, int]] = {}
    slots: dict[str, SlotSpec] = {}
    header_line = 0

    def finish():
        nonlocal header, fields, slots
        if header is None:
            return
        tid, heuristic, subcase, label = header
        missing = {"premise", "hypothesis", "explanation"} - set(fields)
        if missing:
            raise RegistryError(
                [f"{source}:{header_line}: template {tid} missing {', '.join(sorted(missing))}"]
            )
        templates.append(
            Template(
                id=tid,
                heuristic=heuristic,
                subcase=subcase,
                label=label,
                premise=fields["premise"][0],
                hypothesis=fields["hypothesis"][0],
                explanation=fields["explanation"][0],
                slots=dict(slots),
            )
        )
        header, fields, slots = None, {}, {}

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not line[0].isspace():
            match = _HEADER_RE.match(stripped)
            if not match:
                raise RegistryError([f"{source}:{lineno}: expected a template header"])
            finish()
            header = tuple(part.strip() for part in match.groups())  # type: ignore[assignment]
            header_line = lineno
            continue
        if header is None:
            raise RegistryError([f"{source}:{lineno}: field outside a template record"])
        if ":" not in stripped:
            raise RegistryError([f"{source}:{lineno}: expected 'key: value'"])
        key, value = (s.strip() for s in stripped.split(":", 1))
        if key == "slots":
            for item in value.split(","):
                item = item.strip()
                if not item:
                    continue
                match = _SLOT_RE.match(item)
                if not match:
                    raise RegistryError([f"{source}:{lineno}: malformed slot '{item}'"])
                name, pos_class, number = match.groups()
                if name in slots:
                    raise RegistryError([f"{source}:{lineno}: duplicate slot '{name}'"])
                slots[name] = SlotSpec(pos_class=pos_class, number=number)
        elif key in ("premise", "hypothesis", "explanation"):
            if key in fields:
                raise RegistryError([f"{source}:{lineno}: duplicate field '{key}'"])
            fields[key] = (_parse_pattern(value, source, lineno), lineno)
        else:
            raise RegistryError([f"{source}:{lineno}: unknown field '{key}'"])
    finish()
    return Registry(templates, lexicon, strict=strict)


def load_registry(path: str | Path, lexicon: Lexicon, strict: bool = True) -> Registry:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        return parse_registry(handle, lexicon, source=str(path), strict=strict)

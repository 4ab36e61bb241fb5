"""Corpus generation: k-shot train/dev sets and the four test quadrants.

Draws are made per template from named PRNG substreams, so output is
byte-stable, independent of generation order, and nested across k: the
k=4 training set starts with the k=1 and k=2 sets for the same seed.
Test draws come from their own substream and exclude a k-independent
reserve of training draws, so every k shares identical test files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import rng as rnglib
from .lexicon import Lexicon
from .registry import FoldSplit, Registry
from .templates import Binding, Template, binding_at, count_bindings, render

SPLITS = ("train", "dev", "test")
CONDITIONS = ("ind", "ood")
QUADRANTS = (
    ("ind", "ind"),
    ("ood", "ind"),
    ("ind", "ood"),
    ("ood", "ood"),
)

TEST_EXAMPLES_PER_TEMPLATE = 300
# Largest default k plus its dev allotment; the k-independent reserve that
# keeps IND/IND test draws disjoint from any default training set.
MAX_DEFAULT_K = 16
RESERVED_TRAIN_DRAWS = MAX_DEFAULT_K + max(1, (2 * MAX_DEFAULT_K + 5) // 10)


class CorpusError(ValueError):
    """Malformed example file or invalid generation request."""


def dev_count(k: int) -> int:
    """Per-template dev size: max(1, round(0.2 * k)), integer arithmetic."""
    return max(1, (2 * k + 5) // 10)


def quadrant_name(vocab_condition: str, template_condition: str) -> str:
    return f"{vocab_condition}vocab_{template_condition}template"


@dataclass(frozen=True)
class Example:
    id: str
    premise: str
    hypothesis: str
    explanation: str
    label: str
    template_id: str
    binding: dict[str, str]  # slot -> lemma
    vocab_condition: str
    template_condition: str
    split: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "premise": self.premise,
                "hypothesis": self.hypothesis,
                "explanation": self.explanation,
                "label": self.label,
                "template_id": self.template_id,
                "binding": dict(sorted(self.binding.items())),
                "vocab_condition": self.vocab_condition,
                "template_condition": self.template_condition,
                "split": self.split,
            },
            ensure_ascii=False,
        )


_REQUIRED_FIELDS = (
    "id", "premise", "hypothesis", "explanation", "label", "template_id",
    "binding", "vocab_condition", "template_condition", "split",
)


@dataclass(frozen=True)
class ExperimentPlan:
    fold_split: FoldSplit
    held_out_fold: int
    k: int
    master_seed: int

    def __post_init__(self):
        if not 0 <= self.held_out_fold < len(self.fold_split.folds):
            raise CorpusError(f"held_out_fold {self.held_out_fold} out of range")
        if self.k < 1:
            raise CorpusError("k must be >= 1")

    @property
    def training_template_ids(self) -> tuple[str, ...]:
        return self.fold_split.training_ids(self.held_out_fold)

    @property
    def held_out_template_ids(self) -> tuple[str, ...]:
        return self.fold_split.held_out_ids(self.held_out_fold)


@dataclass
class GenerationReport:
    """Exhaustion and overlap notes plus per-split example counts."""

    exhaustion: list[dict] = field(default_factory=list)
    overlap: list[dict] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "counts": dict(sorted(self.counts.items())),
                "exhaustion": self.exhaustion,
                "overlap": self.overlap,
            },
            ensure_ascii=False,
            indent=2,
        )

    def merge(self, other: "GenerationReport") -> None:
        self.exhaustion.extend(other.exhaustion)
        self.overlap.extend(other.overlap)
        for key, value in other.counts.items():
            self.counts[key] = self.counts.get(key, 0) + value


def _train_stream(plan: ExperimentPlan, template_id: str) -> rnglib.Rng:
    return rnglib.stream(plan.master_seed, "train-dev", template_id)


def _draw_bindings(
    template: Template,
    lexicon: Lexicon,
    partition: str,
    stream: rnglib.Rng,
    want: int,
    report: GenerationReport,
    context: str,
    exclude_indices: set[int] | None = None,
) -> list[Binding]:
    """``want`` bindings: a permutation prefix, then replacement on exhaustion."""
    total = count_bindings(template, lexicon, partition)
    exclude = exclude_indices or set()
    indices: list[int] = []
    for index in rnglib.sample_prefix(stream, min(want + len(exclude), total), total):
        if index in exclude:
            continue
        indices.append(index)
        if len(indices) == want:
            break
    if len(indices) < want:
        report.exhaustion.append(
            {
                "template_id": template.id,
                "where": context,
                "requested": want,
                "distinct_available": total - len(exclude & set(range(total))),
                "with_replacement": want - len(indices),
            }
        )
        while len(indices) < want:
            indices.append(stream.randbelow(total))
    return [binding_at(template, lexicon, partition, i) for i in indices]


def _make_example(
    template: Template,
    binding: Binding,
    lexicon: Lexicon,
    example_id: str,
    vocab_condition: str,
    template_condition: str,
    split: str,
) -> Example:
    premise, hypothesis, explanation = render(template, binding, lexicon)
    return Example(
        id=example_id,
        premise=premise,
        hypothesis=hypothesis,
        explanation=explanation,
        label=template.label,
        template_id=template.id,
        binding=binding.lemmas(),
        vocab_condition=vocab_condition,
        template_condition=template_condition,
        split=split,
    )


def generate_train_dev(
    plan: ExperimentPlan, registry: Registry, lexicon: Lexicon
) -> tuple[list[Example], list[Example], GenerationReport]:
    """k train and max(1, round(0.2k)) dev examples per training template."""
    report = GenerationReport()
    n_dev = dev_count(plan.k)
    train: list[Example] = []
    dev: list[Example] = []
    for template_id in sorted(plan.training_template_ids):
        template = registry.by_id[template_id]
        stream = _train_stream(plan, template_id)
        bindings = _draw_bindings(
            template, lexicon, "ind", stream, plan.k + n_dev, report, "train-dev"
        )
        for i, binding in enumerate(bindings[: plan.k]):
            train.append(
                _make_example(
                    template, binding, lexicon, f"{template_id}:train:{i}",
                    "ind", "ind", "train",
                )
            )
        for i, binding in enumerate(bindings[plan.k :]):
            dev.append(
                _make_example(
                    template, binding, lexicon, f"{template_id}:dev:{i}",
                    "ind", "ind", "dev",
                )
            )
    report.counts["train"] = len(train)
    report.counts["dev"] = len(dev)
    return train, dev, report


def generate_test_quadrants(
    plan: ExperimentPlan, registry: Registry, lexicon: Lexicon
) -> tuple[dict[str, list[Example]], GenerationReport]:
    """The four vocabulary x template test quadrants, 300 per template.

    Test draws are independent of k.  For the fully in-distribution
    quadrant, a reserve covering the largest default training set is
    excluded whenever at least 300 bindings remain; otherwise overlap
    with this plan's train/dev draws is permitted but reported.
    """
    report = GenerationReport()
    quadrants: dict[str, list[Example]] = {}
    train_keys: dict[str, set] | None = None

    for vocab_condition, template_condition in QUADRANTS:
        name = quadrant_name(vocab_condition, template_condition)
        template_ids = (
            plan.training_template_ids
            if template_condition == "ind"
            else plan.held_out_template_ids
        )
        examples: list[Example] = []
        for template_id in sorted(template_ids):
            template = registry.by_id[template_id]
            stream = rnglib.stream(
                plan.master_seed, "test", vocab_condition, template_id
            )
            exclude: set[int] = set()
            if vocab_condition == "ind" and template_condition == "ind":
                total = count_bindings(template, lexicon, "ind")
                if total >= TEST_EXAMPLES_PER_TEMPLATE + RESERVED_TRAIN_DRAWS:
                    reserve_stream = _train_stream(plan, template_id)
                    exclude = set(
                        rnglib.sample_prefix(
                            reserve_stream,
                            min(RESERVED_TRAIN_DRAWS, total),
                            total,
                        )
                    )
            bindings = _draw_bindings(
                template,
                lexicon,
                vocab_condition,
                stream,
                TEST_EXAMPLES_PER_TEMPLATE,
                report,
                name,
                exclude_indices=exclude,
            )
            if vocab_condition == "ind" and template_condition == "ind" and not exclude:
                if train_keys is None:
                    train, dev, _ = generate_train_dev(plan, registry, lexicon)
                    train_keys = {}
                    for example in train + dev:
                        train_keys.setdefault(example.template_id, set()).add(
                            tuple(sorted(example.binding.items()))
                        )
                drawn = {tuple(sorted(b.lemmas().items())) for b in bindings}
                shared = drawn & train_keys.get(template_id, set())
                if shared:
                    report.overlap.append(
                        {
                            "template_id": template_id,
                            "quadrant": name,
                            "overlapping_bindings": len(shared),
                        }
                    )
            for i, binding in enumerate(bindings):
                examples.append(
                    _make_example(
                        template,
                        binding,
                        lexicon,
                        f"{template_id}:test_{vocab_condition}_{template_condition}:{i}",
                        vocab_condition,
                        template_condition,
                        "test",
                    )
                )
        quadrants[name] = examples
        report.counts[f"test_{name}"] = len(examples)
    return quadrants, report


def write_examples(examples: list[Example], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(example.to_json())
            handle.write("\n")


def read_examples(path: str | Path) -> list[Example]:
    path = Path(path)
    examples: list[Example] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({err})") from None
            missing = [f for f in _REQUIRED_FIELDS if f not in record]
            if missing:
                raise CorpusError(
                    f"{path}:{lineno}: missing field {', '.join(missing)}"
                )
            if record["label"] not in ("entailment", "non_entailment"):
                raise CorpusError(f"{path}:{lineno}: bad label {record['label']!r}")
            for key in ("vocab_condition", "template_condition"):
                if record[key] not in CONDITIONS:
                    raise CorpusError(f"{path}:{lineno}: bad {key} {record[key]!r}")
            if record["split"] not in SPLITS:
                raise CorpusError(f"{path}:{lineno}: bad split {record['split']!r}")
            examples.append(
                Example(
                    id=record["id"],
                    premise=record["premise"],
                    hypothesis=record["hypothesis"],
                    explanation=record["explanation"],
                    label=record["label"],
                    template_id=record["template_id"],
                    binding=dict(record["binding"]),
                    vocab_condition=record["vocab_condition"],
                    template_condition=record["template_condition"],
                    split=record["split"],
                )
            )
    return examples

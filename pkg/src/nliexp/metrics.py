"""Scoring: corpus BLEU, hallucinated entities, indicator phrase, accuracy.

All metrics reduce to integer counts that are summed once and divided
once, so sharded computation would merge exactly; the per-quadrant
report is just the same counters grouped by test condition.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Example, quadrant_name
from .lexicon import Lexicon
from .text import INDICATOR_PHRASE, contains_phrase, tokenize

BLEU_ORDER = 4


class MetricsError(ValueError):
    """Bad metric inputs: mismatched joins, missing payloads, bad files."""


@dataclass(frozen=True)
class Prediction:
    example_id: str
    generated_explanation: str | None = None
    predicted_label: str | None = None

    def __post_init__(self):
        if self.generated_explanation is None and self.predicted_label is None:
            raise MetricsError(f"{self.example_id}: prediction carries no payload")

    def to_json(self) -> str:
        record: dict = {"example_id": self.example_id}
        if self.generated_explanation is not None:
            record["generated_explanation"] = self.generated_explanation
        if self.predicted_label is not None:
            record["predicted_label"] = self.predicted_label
        return json.dumps(record, ensure_ascii=False)


def write_predictions(predictions: list[Prediction], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for prediction in predictions:
            handle.write(prediction.to_json())
            handle.write("\n")


def read_predictions(path: str | Path) -> list[Prediction]:
    path = Path(path)
    predictions = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise MetricsError(f"{path}:{lineno}: invalid JSON ({err})") from None
            if "example_id" not in record:
                raise MetricsError(f"{path}:{lineno}: missing example_id")
            try:
                predictions.append(
                    Prediction(
                        example_id=record["example_id"],
                        generated_explanation=record.get("generated_explanation"),
                        predicted_label=record.get("predicted_label"),
                    )
                )
            except MetricsError as err:
                raise MetricsError(f"{path}:{lineno}: {err}") from None
    return predictions


# ---------------------------------------------------------------------------
# BLEU.

def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates: list[list[str]], references: list[list[str]]) -> float:
    """Corpus-level BLEU in [0, 100]: pooled clipped n-gram counts for
    n = 1..4 with uniform weights and brevity penalty exp(1 - r/c) for c <= r.

    Single reference per candidate, no smoothing; 0.0 if any pooled
    precision is zero.
    """
    if len(candidates) != len(references):
        raise MetricsError(
            f"length mismatch: {len(candidates)} candidates, {len(references)} references"
        )
    matches = [0] * BLEU_ORDER
    guesses = [0] * BLEU_ORDER
    candidate_len = 0
    reference_len = 0
    for candidate, reference in zip(candidates, references):
        if not reference:
            raise MetricsError("empty reference")
        candidate_len += len(candidate)
        reference_len += len(reference)
        for n in range(1, BLEU_ORDER + 1):
            got = _ngrams(candidate, n)
            if not got:
                continue
            want = _ngrams(reference, n)
            guesses[n - 1] += sum(got.values())
            matches[n - 1] += sum((got & want).values())
    if any(m == 0 for m in matches) or any(g == 0 for g in guesses):
        return 0.0
    log_precision = sum(math.log(m / g) for m, g in zip(matches, guesses)) / BLEU_ORDER
    brevity = 1.0
    if candidate_len <= reference_len:
        brevity = math.exp(1.0 - reference_len / candidate_len)
    return 100.0 * brevity * math.exp(log_precision)


def sentence_bleu_smoothed(candidate: list[str], reference: list[str]) -> float:
    """Add-one smoothed sentence BLEU; diagnostic only, never in reports."""
    if not reference:
        raise MetricsError("empty reference")
    if not candidate:
        return 0.0
    log_precision = 0.0
    for n in range(1, BLEU_ORDER + 1):
        got = _ngrams(candidate, n)
        want = _ngrams(reference, n)
        matched = sum((got & want).values())
        total = sum(got.values())
        log_precision += math.log((matched + 1) / (total + 1)) / BLEU_ORDER
    brevity = 1.0
    if len(candidate) <= len(reference):
        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return 100.0 * brevity * math.exp(log_precision)


# ---------------------------------------------------------------------------
# Joined per-example metrics.

def _join(
    predictions: list[Prediction], gold_examples: list[Example]
) -> list[tuple[Prediction, Example]]:
    by_id = {example.id: example for example in gold_examples}
    pairs = []
    for prediction in predictions:
        example = by_id.get(prediction.example_id)
        if example is None:
            raise MetricsError(f"prediction {prediction.example_id} has no gold example")
        pairs.append((prediction, example))
    return pairs


def input_entity_lexemes(example: Example, lexicon: Lexicon) -> set[tuple[str, str]]:
    """Entity lexemes present in the premise or hypothesis."""
    found: set[tuple[str, str]] = set()
    for token in tokenize(example.premise) + tokenize(example.hypothesis):
        found |= lexicon.entity_lexemes(token)
    return found


def is_hallucinated(explanation: str, example: Example, lexicon: Lexicon) -> bool:
    """True iff the explanation names an entity absent from the input.

    Comparison is at the lexeme level after number normalization, so a
    plural mention of a singular premise entity does not count.  Tokens
    outside the lexicon never count.
    """
    allowed = input_entity_lexemes(example, lexicon)
    for token in tokenize(explanation):
        lexemes = lexicon.entity_lexemes(token)
        if lexemes and not (lexemes & allowed):
            return True
    return False


def hallucination(
    predictions: list[Prediction], gold_examples: list[Example], lexicon: Lexicon
) -> tuple[dict[str, bool], float | None]:
    """Per-example hallucination flags and the flagged fraction."""
    flags: dict[str, bool] = {}
    for prediction, example in _join(predictions, gold_examples):
        if prediction.generated_explanation is None:
            continue
        flags[prediction.example_id] = is_hallucinated(
            prediction.generated_explanation, example, lexicon
        )
    if not flags:
        return flags, None
    return flags, sum(flags.values()) / len(flags)


@dataclass(frozen=True)
class IndicatorStats:
    generated_with_phrase: int
    gold_with_phrase: int
    both_with_phrase: int

    @property
    def precision(self) -> float | None:
        if self.generated_with_phrase == 0:
            return None
        return self.both_with_phrase / self.generated_with_phrase

    @property
    def recall(self) -> float | None:
        if self.gold_with_phrase == 0:
            return None
        return self.both_with_phrase / self.gold_with_phrase


def indicator_stats(
    predictions: list[Prediction], gold_examples: list[Example]
) -> IndicatorStats:
    """Precision/recall of generating the indicator phrase, vs gold."""
    generated_n = gold_n = both_n = 0
    for prediction, example in _join(predictions, gold_examples):
        if prediction.generated_explanation is None:
            continue
        in_generated = contains_phrase(tokenize(prediction.generated_explanation))
        in_gold = contains_phrase(tokenize(example.explanation))
        generated_n += in_generated
        gold_n += in_gold
        both_n += in_generated and in_gold
    return IndicatorStats(generated_n, gold_n, both_n)


@dataclass(frozen=True)
class AccuracyStats:
    scored: int
    correct: int
    majority_correct: int

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.scored if self.scored else None

    @property
    def majority_accuracy(self) -> float | None:
        return self.majority_correct / self.scored if self.scored else None


def accuracy(predictions: list[Prediction], gold_examples: list[Example]) -> AccuracyStats:
    """Exact-match label accuracy plus the majority-class baseline."""
    pairs = _join(predictions, gold_examples)
    for prediction, _ in pairs:
        if prediction.predicted_label is None:
            raise MetricsError(f"prediction {prediction.example_id} has no label")
    labels = Counter(example.label for _, example in pairs)
    majority = labels.most_common(1)[0][1] if labels else 0
    correct = sum(
        prediction.predicted_label == example.label for prediction, example in pairs
    )
    return AccuracyStats(scored=len(pairs), correct=correct, majority_correct=majority)


# ---------------------------------------------------------------------------
# Aggregated evaluation.

@dataclass
class GroupMetrics:
    examples: int = 0
    coverage_gaps: int = 0
    label_scored: int = 0
    label_correct: int = 0
    majority_correct: int = 0
    explanations_scored: int = 0
    hallucinated: int = 0
    indicator: IndicatorStats = field(default_factory=lambda: IndicatorStats(0, 0, 0))
    bleu: float | None = None

    def to_dict(self) -> dict:
        def ratio(num, den):
            return num / den if den else None

        return {
            "examples": self.examples,
            "coverage_gaps": self.coverage_gaps,
            "accuracy": ratio(self.label_correct, self.label_scored),
            "majority_accuracy": ratio(self.majority_correct, self.label_scored),
            "bleu": self.bleu,
            "hallucination_rate": ratio(self.hallucinated, self.explanations_scored),
            "indicator_precision": self.indicator.precision,
            "indicator_recall": self.indicator.recall,
            "counts": {
                "labels_scored": self.label_scored,
                "labels_correct": self.label_correct,
                "majority_correct": self.majority_correct,
                "explanations_scored": self.explanations_scored,
                "hallucinated": self.hallucinated,
                "indicator_generated": self.indicator.generated_with_phrase,
                "indicator_gold": self.indicator.gold_with_phrase,
                "indicator_both": self.indicator.both_with_phrase,
            },
        }


@dataclass
class EvalReport:
    overall: GroupMetrics
    quadrants: dict[str, GroupMetrics]
    unmatched_predictions: list[str]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "quadrants": {
                name: metrics.to_dict() for name, metrics in sorted(self.quadrants.items())
            },
            "unmatched_predictions": self.unmatched_predictions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def format_table(self) -> str:
        headers = (
            "group", "examples", "accuracy", "majority", "bleu",
            "halluc", "ind_prec", "ind_rec",
        )
        rows = [headers]

        def cell(value) -> str:
            if value is None:
                return "-"
            if isinstance(value, float):
                return f"{value:.4f}"
            return str(value)

        for name, metrics in [("overall", self.overall)] + sorted(self.quadrants.items()):
            data = metrics.to_dict()
            rows.append(
                (
                    name,
                    cell(data["examples"]),
                    cell(data["accuracy"]),
                    cell(data["majority_accuracy"]),
                    cell(data["bleu"]),
                    cell(data["hallucination_rate"]),
                    cell(data["indicator_precision"]),
                    cell(data["indicator_recall"]),
                )
            )
        widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
        lines = [
            "  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip()
            for row in rows
        ]
        return "\n".join(lines)


def _group_pairs(
    pairs: list[tuple[Prediction, Example]], lexicon: Lexicon
) -> GroupMetrics:
    group = GroupMetrics()
    group.examples = len(pairs)
    label_counter: Counter = Counter()
    bleu_candidates: list[list[str]] = []
    bleu_references: list[list[str]] = []
    generated_n = gold_n = both_n = 0
    for prediction, example in pairs:
        if prediction.predicted_label is not None:
            group.label_scored += 1
            group.label_correct += prediction.predicted_label == example.label
            label_counter[example.label] += 1
        if prediction.generated_explanation is not None:
            group.explanations_scored += 1
            group.hallucinated += is_hallucinated(
                prediction.generated_explanation, example, lexicon
            )
            candidate = tokenize(prediction.generated_explanation)
            reference = tokenize(example.explanation)
            bleu_candidates.append(candidate)
            bleu_references.append(reference)
            in_generated = contains_phrase(candidate)
            in_gold = contains_phrase(reference)
            generated_n += in_generated
            gold_n += in_gold
            both_n += in_generated and in_gold
    group.majority_correct = label_counter.most_common(1)[0][1] if label_counter else 0
    group.indicator = IndicatorStats(generated_n, gold_n, both_n)
    if bleu_candidates:
        group.bleu = bleu(bleu_candidates, bleu_references)
    return group


def evaluate(
    predictions: list[Prediction], gold_examples: list[Example], lexicon: Lexicon
) -> EvalReport:
    """Group by (vocab condition, template condition) and score everything."""
    by_id = {example.id: example for example in gold_examples}
    pairs: list[tuple[Prediction, Example]] = []
    unmatched: list[str] = []
    seen_ids: set[str] = set()
    for prediction in predictions:
        example = by_id.get(prediction.example_id)
        if example is None:
            unmatched.append(prediction.example_id)
            continue
        pairs.append((prediction, example))
        seen_ids.add(prediction.example_id)

    grouped: dict[str, list[tuple[Prediction, Example]]] = {}
    for prediction, example in pairs:
        name = quadrant_name(example.vocab_condition, example.template_condition)
        grouped.setdefault(name, []).append((prediction, example))

    gaps: Counter = Counter()
    for example in gold_examples:
        if example.id not in seen_ids:
            gaps[quadrant_name(example.vocab_condition, example.template_condition)] += 1

    quadrants = {}
    for name, group_pairs in sorted(grouped.items()):
        quadrants[name] = _group_pairs(group_pairs, lexicon)
        quadrants[name].coverage_gaps = gaps.get(name, 0)
    overall = _group_pairs(pairs, lexicon)
    overall.coverage_gaps = sum(gaps.values())
    return EvalReport(overall=overall, quadrants=quadrants, unmatched_predictions=unmatched)


def evaluate_files(
    predictions_path: str | Path, gold_path: str | Path, lexicon: Lexicon
) -> EvalReport:
    from .corpus import read_examples

    return evaluate(read_predictions(predictions_path), read_examples(gold_path), lexicon)

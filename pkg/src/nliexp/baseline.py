"""Deterministic explain-then-predict reference system.

Explanation step: parse the input pair against the registry and, when the
matched template is in scope, render its gold explanation under the
recovered binding.  Prediction step: classify from the explanation alone
via the indicator phrase.  With the whole registry in scope this is an
oracle; restricted to the training templates it models a learner that
has only seen those, so the in/out-of-distribution gap is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Example
from .lexicon import Lexicon
from .metrics import Prediction
from .registry import Registry
from .text import contains_phrase, tokenize

FALLBACK_EXPLANATIONS = {
    "abstain_non_entailment": "we do not know .",
    "majority_entailment": "the hypothesis follows .",
}


class BaselineError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    training_template_ids: frozenset[str]
    fallback: str = "abstain_non_entailment"
    log_fallbacks: bool = True

    def __post_init__(self):
        if self.fallback not in FALLBACK_EXPLANATIONS:
            raise BaselineError(f"unknown fallback '{self.fallback}'")


def restricted_config(
    registry: Registry, training_template_ids, fallback: str = "abstain_non_entailment"
) -> BaselineConfig:
    ids = frozenset(training_template_ids)
    unknown = ids - set(registry.by_id)
    if unknown:
        raise BaselineError(f"template ids not in registry: {sorted(unknown)}")
    return BaselineConfig(training_template_ids=ids, fallback=fallback)


def closed_book_config(registry: Registry, fallback: str = "abstain_non_entailment") -> BaselineConfig:
    return BaselineConfig(
        training_template_ids=frozenset(registry.by_id), fallback=fallback
    )


def explain(
    premise: str,
    hypothesis: str,
    config: BaselineConfig,
    registry: Registry,
    lexicon: Lexicon,
) -> tuple[str, bool]:
    """Gold explanation when the pair parses to an in-scope template,
    else the configured fallback; total function."""
    parsed = registry.parse(premise, hypothesis)
    if parsed is not None:
        template_id, binding = parsed
        if template_id in config.training_template_ids:
            return registry.render_explanation(template_id, binding), True
    return FALLBACK_EXPLANATIONS[config.fallback], False


def predict(explanation: str) -> str:
    """non_entailment iff the explanation contains the indicator phrase."""
    return "non_entailment" if contains_phrase(tokenize(explanation)) else "entailment"


def run(
    examples: list[Example],
    config: BaselineConfig,
    registry: Registry,
    lexicon: Lexicon,
) -> tuple[list[Prediction], list[str]]:
    """One prediction per example, in input order, plus fallback ids."""
    predictions: list[Prediction] = []
    fallback_ids: list[str] = []
    for example in examples:
        explanation, matched = explain(
            example.premise, example.hypothesis, config, registry, lexicon
        )
        if not matched:
            fallback_ids.append(example.id)
        predictions.append(
            Prediction(
                example_id=example.id,
                generated_explanation=explanation,
                predicted_label=predict(explanation),
            )
        )
    return predictions, fallback_ids


def run_files(
    examples_path: str | Path,
    config: BaselineConfig,
    registry: Registry,
    lexicon: Lexicon,
    out_path: str | Path,
    fallback_log_path: str | Path | None = None,
) -> tuple[list[Prediction], list[str]]:
    from .corpus import read_examples
    from .metrics import write_predictions

    examples = read_examples(examples_path)
    predictions, fallback_ids = run(examples, config, registry, lexicon)
    write_predictions(predictions, out_path)
    if config.log_fallbacks and fallback_log_path is not None:
        with Path(fallback_log_path).open("w", encoding="utf-8") as handle:
            for example_id in fallback_ids:
                handle.write(json.dumps({"example_id": example_id}) + "\n")
    return predictions, fallback_ids

from __future__ import annotations

import pytest

from nliexp.registry import (
    FOLD_COUNT,
    RegistryError,
    parse_registry,
    registry_stats,
    split_folds,
)

from .conftest import MINI_LEXICON, MINI_REGISTRY
from nliexp.lexicon import parse_lexicon


def test_starter_shape(registry):
    assert len(registry) == 118
    assert set(registry.by_heuristic) == {"lexical_overlap", "subsequence", "constituent"}
    for heuristic, subcases in registry.by_heuristic.items():
        assert len(subcases) == 10, heuristic
    labels = {t.label for t in registry.templates}
    assert labels == {"entailment", "non_entailment"}


def test_indicator_biconditional_on_patterns(registry, lexicon):
    from nliexp.templates import binding_at, count_bindings, render
    from nliexp.text import contains_phrase, tokenize

    for template in registry.templates:
        total = count_bindings(template, lexicon, "ind")
        _, _, explanation = render(
            template, binding_at(template, lexicon, "ind", total // 2), lexicon
        )
        assert contains_phrase(tokenize(explanation)) == (
            template.label == "non_entailment"
        ), template.id


def _registry_error(lines, lexicon, strict=True):
    with pytest.raises(RegistryError) as excinfo:
        parse_registry(lines, lexicon, source="inline", strict=strict)
    return excinfo.value


def test_missing_indicator_phrase_rejected(mini_lexicon):
    lines = MINI_REGISTRY.splitlines() + [
        "template bad-nonent | constituent | conditional_intransitive | non_entailment",
        "  slots: X=profession:plural, Y=profession:plural, V1=intransitive_verb, V2=intransitive_verb",
        "  premise: whenever the {X} {V1:past} , the {Y} {V2:past} .",
        "  hypothesis: the {X} {V1:past} .",
        "  explanation: the {Y} {V2:past} whenever the {X} {V1:past} .",
    ]
    err = _registry_error(lines, mini_lexicon)
    assert any("bad-nonent: indicator-phrase rule: missing" in f for f in err.failures)


def test_unexpected_indicator_phrase_rejected(mini_lexicon):
    lines = MINI_REGISTRY.splitlines() + [
        "template bad-ent | constituent | concessive_intransitive | entailment",
        "  slots: X=profession:plural, Y=profession:plural, V1=intransitive_verb, V2=intransitive_verb",
        "  premise: though the {X} {V1:past} , the {Y} {V2:past} .",
        "  hypothesis: the {Y} {V2:past} .",
        "  explanation: we do not know much , but the {Y} {V2:past} though the {X} {V1:past} .",
    ]
    err = _registry_error(lines, mini_lexicon)
    assert any("bad-ent: indicator-phrase rule: present" in f for f in err.failures)


def test_opposite_label_twins_rejected(mini_lexicon):
    twin = """
template twin-a | lexical_overlap | prepositional_phrase | entailment
  slots: X=profession:singular, Y=profession:plural, Z=profession:singular, P=preposition, V=transitive_verb
  premise: the {X} {P} the {Y} {V:past} the {Z} .
  hypothesis: the {X} {V:past} the {Z} .
  explanation: the {X} {P} the {Y} is still the {X} .

template twin-b | lexical_overlap | prepositional_phrase | non_entailment
  slots: X=profession:singular, Y=profession:plural, Z=profession:singular, P=preposition, V=transitive_verb
  premise: the {X} {P} the {Y} {V:past} the {Z} .
  hypothesis: the {X} {V:past} the {Z} .
  explanation: the {X} {P} the {Y} is still the {X} , we do not know .
"""
    err = _registry_error(
        MINI_REGISTRY.splitlines() + twin.splitlines(), mini_lexicon
    )
    assert any("twin-a: ambiguity" in f and "twin-b" in f for f in err.failures)


def test_unknown_slot_class_rejected(mini_lexicon):
    lines = MINI_REGISTRY.splitlines() + [
        "template bad-class | constituent | concessive_intransitive | entailment",
        "  slots: X=gerund:plural",
        "  premise: though the {X} .",
        "  hypothesis: the {X} .",
        "  explanation: the {X} .",
    ]
    err = _registry_error(lines, mini_lexicon)
    assert any("bad-class" in f and "unknown pos class" in f for f in err.failures)


def test_missing_lexicon_coverage_rejected(mini_lexicon):
    lines = MINI_REGISTRY.splitlines() + [
        "template bad-cover | constituent | concessive_intransitive | entailment",
        "  slots: X=profession:plural, A=adjective, V1=intransitive_verb",
        "  premise: though the {A} {X} {V1:past} , the {X} {V1:past} .",
        "  hypothesis: the {X} {V1:past} .",
        "  explanation: the {A} {X} are still the {X} .",
    ]
    err = _registry_error(lines, mini_lexicon)
    assert any("bad-cover: lexicon-coverage: class adjective" in f for f in err.failures)


def test_slot_unused_in_premise_and_hypothesis_rejected(mini_lexicon):
    lines = MINI_REGISTRY.splitlines() + [
        "template bad-unused | constituent | concessive_intransitive | entailment",
        "  slots: X=profession:plural, Y=profession:plural, V1=intransitive_verb",
        "  premise: though the {X} {V1:past} , the {X} {V1:past} .",
        "  hypothesis: the {X} {V1:past} .",
        "  explanation: the {Y} are still the {Y} .",
    ]
    err = _registry_error(lines, mini_lexicon)
    assert any(
        "bad-unused" in f and "never appears in premise or hypothesis" in f
        for f in err.failures
    )


def test_strict_shape_requires_all_heuristics(mini_lexicon):
    only_one = """
template solo | constituent | conditional_intransitive | non_entailment
  slots: X=profession:plural, Y=profession:plural, V1=intransitive_verb, V2=intransitive_verb
  premise: if the {X} {V1:past} , the {Y} {V2:past} .
  hypothesis: the {X} {V1:past} .
  explanation: the {Y} {V2:past} if the {X} {V1:past} , we do not know whether the {X} {V1:past} .
"""
    err = _registry_error(only_one.splitlines(), mini_lexicon)
    assert any("shape: expected exactly the heuristics" in f for f in err.failures)
    # non-strict loading accepts partial inventories (test fixtures)
    registry = parse_registry(only_one.splitlines(), mini_lexicon, strict=False)
    assert len(registry) == 1


def test_parse_error_reports_line():
    lexicon = parse_lexicon(MINI_LEXICON.splitlines())
    with pytest.raises(RegistryError, match=":2:"):
        parse_registry(["", "not a template header"], lexicon)


def test_fold_sizes_and_coverage(registry):
    split = split_folds(registry, seed=7)
    sizes = sorted(len(fold) for fold in split.folds)
    assert sizes == [23, 23, 24, 24, 24]
    all_ids = [tid for fold in split.folds for tid in fold]
    assert sorted(all_ids) == sorted(t.id for t in registry.templates)
    assert len(split.training_ids(0)) == 118 - len(split.folds[0])


def test_fold_split_deterministic_and_seed_sensitive(registry):
    assert split_folds(registry, 7) == split_folds(registry, 7)
    assert split_folds(registry, 7) != split_folds(registry, 8)


def test_five_templates_one_per_fold(mini_registry):
    split = split_folds(mini_registry, seed=0)
    assert [len(fold) for fold in split.folds] == [1] * FOLD_COUNT


def test_stats_counts_and_lengths(registry, lexicon):
    stats = registry_stats(registry, lexicon, samples_per_template=30, seed=0)
    assert stats.template_count == 118
    assert sum(stats.by_label.values()) == 118
    assert sum(
        count for subcases in stats.by_heuristic.values() for count in subcases.values()
    ) == 118
    assert abs(stats.mean_hypothesis_length - 4.4) <= 1.5
    assert abs(stats.mean_explanation_length - 13.3) <= 4.0


def test_stats_single_template_token_counts(registry, lexicon, mini_lexicon, mini_registry):
    from nliexp.templates import render
    from .golden import GOLDEN_TRIPLES
    from .test_templates import make_binding

    tid, lemmas = GOLDEN_TRIPLES[0][:2]
    premise, hypothesis, explanation = render(
        registry.by_id[tid], make_binding(registry, lexicon, tid, lemmas), lexicon
    )
    # period excluded from all lengths
    assert len(premise.split()) - 1 == 8
    assert len(hypothesis.split()) - 1 == 5
    assert len(explanation.split()) - 1 == 9


def test_stats_requires_positive_sample_count(registry, lexicon):
    with pytest.raises(RegistryError, match="sample count must be positive"):
        registry_stats(registry, lexicon, samples_per_template=0)

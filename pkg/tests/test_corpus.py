from __future__ import annotations

import pytest

from nliexp.corpus import (
    CorpusError,
    ExperimentPlan,
    dev_count,
    generate_test_quadrants,
    generate_train_dev,
    quadrant_name,
    read_examples,
    write_examples,
)
from nliexp.registry import split_folds


@pytest.mark.parametrize("k,expected", [(1, 1), (2, 1), (4, 1), (8, 2), (16, 3)])
def test_dev_count(k, expected):
    assert dev_count(k) == expected


@pytest.fixture(scope="module")
def mini_plan(mini_registry):
    return ExperimentPlan(
        fold_split=split_folds(mini_registry, seed=3),
        held_out_fold=0,
        k=4,
        master_seed=3,
    )


def test_train_dev_sizes(mini_plan, mini_registry, mini_lexicon):
    train, dev, report = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    n_templates = len(mini_plan.training_template_ids)
    assert len(train) == 4 * n_templates
    assert len(dev) == dev_count(4) * n_templates
    assert report.counts == {"train": len(train), "dev": len(dev)}
    assert not report.exhaustion


def test_train_dev_disjoint_per_template(mini_plan, mini_registry, mini_lexicon):
    train, dev, _ = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    seen = {}
    for example in train + dev:
        key = (example.template_id, tuple(sorted(example.binding.items())))
        assert key not in seen, key
        seen[key] = example.split


def test_examples_revalidate_against_render(mini_plan, mini_registry, mini_lexicon):
    from nliexp.templates import Binding, render

    train, dev, _ = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    for example in train + dev:
        template = mini_registry.by_id[example.template_id]
        binding = Binding(
            {
                name: mini_lexicon.get(lemma, template.slots[name].pos_class)
                for name, lemma in example.binding.items()
            }
        )
        assert render(template, binding, mini_lexicon) == (
            example.premise,
            example.hypothesis,
            example.explanation,
        )
        assert example.label == template.label


def test_k_nesting(mini_registry, mini_lexicon):
    split = split_folds(mini_registry, seed=3)

    def train_for(k):
        plan = ExperimentPlan(fold_split=split, held_out_fold=0, k=k, master_seed=3)
        train, _, _ = generate_train_dev(plan, mini_registry, mini_lexicon)
        by_template = {}
        for example in train:
            by_template.setdefault(example.template_id, []).append(example.binding)
        return by_template

    small, large = train_for(2), train_for(4)
    for template_id, bindings in small.items():
        assert large[template_id][: len(bindings)] == bindings


def test_quadrant_shapes(mini_plan, mini_registry, mini_lexicon):
    quadrants, report = generate_test_quadrants(mini_plan, mini_registry, mini_lexicon)
    assert set(quadrants) == {
        "indvocab_indtemplate",
        "oodvocab_indtemplate",
        "indvocab_oodtemplate",
        "oodvocab_oodtemplate",
    }
    n_train = len(mini_plan.training_template_ids)
    n_held = len(mini_plan.held_out_template_ids)
    assert len(quadrants["indvocab_indtemplate"]) == 300 * n_train
    assert len(quadrants["oodvocab_indtemplate"]) == 300 * n_train
    assert len(quadrants["indvocab_oodtemplate"]) == 300 * n_held
    assert len(quadrants["oodvocab_oodtemplate"]) == 300 * n_held
    # the mini lexicon cannot supply 300 distinct bindings per template
    assert report.exhaustion


def test_quadrant_conditions_and_ids(mini_plan, mini_registry, mini_lexicon):
    quadrants, _ = generate_test_quadrants(mini_plan, mini_registry, mini_lexicon)
    held = set(mini_plan.held_out_template_ids)
    for name, examples in quadrants.items():
        for example in examples:
            assert quadrant_name(example.vocab_condition, example.template_condition) == name
            assert example.split == "test"
            assert (example.template_id in held) == (example.template_condition == "ood")
            assert example.id.startswith(
                f"{example.template_id}:test_{example.vocab_condition}_{example.template_condition}:"
            )
        assert len({example.id for example in examples}) == len(examples)


def test_ood_vocab_binds_only_ood_lexemes(mini_plan, mini_registry, mini_lexicon):
    quadrants, _ = generate_test_quadrants(mini_plan, mini_registry, mini_lexicon)
    for name in ("oodvocab_indtemplate", "oodvocab_oodtemplate"):
        for example in quadrants[name]:
            template = mini_registry.by_id[example.template_id]
            for slot, lemma in example.binding.items():
                entry = mini_lexicon.get(lemma, template.slots[slot].pos_class)
                assert entry.partition == "ood", (example.id, slot, lemma)


def test_label_counts_are_template_determined(mini_plan, mini_registry, mini_lexicon):
    quadrants, _ = generate_test_quadrants(mini_plan, mini_registry, mini_lexicon)
    for examples in quadrants.values():
        template_ids = {e.template_id for e in examples}
        expected_nonent = 300 * sum(
            1 for tid in template_ids
            if mini_registry.by_id[tid].label == "non_entailment"
        )
        assert sum(e.label == "non_entailment" for e in examples) == expected_nonent


def test_generation_deterministic(mini_plan, mini_registry, mini_lexicon):
    first = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    second = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    assert first[0] == second[0]
    assert first[1] == second[1]


def test_io_round_trip(tmp_path, mini_plan, mini_registry, mini_lexicon):
    train, dev, _ = generate_train_dev(mini_plan, mini_registry, mini_lexicon)
    path = tmp_path / "train.jsonl"
    write_examples(train, path)
    assert read_examples(path) == train
    empty = tmp_path / "empty.jsonl"
    write_examples([], empty)
    assert read_examples(empty) == []


def test_read_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"id": "x:train:0", "premise": "p .", "hypothesis": "h .", '
        '"explanation": "e .", "template_id": "x", "binding": {}, '
        '"vocab_condition": "ind", "template_condition": "ind", "split": "train"}\n',
        encoding="utf-8",
    )
    with pytest.raises(CorpusError, match="bad.jsonl:1: missing field label"):
        read_examples(path)
    path.write_text("not json\n", encoding="utf-8")
    with pytest.raises(CorpusError, match=":1: invalid JSON"):
        read_examples(path)


def test_plan_validation(mini_registry):
    split = split_folds(mini_registry, seed=3)
    with pytest.raises(CorpusError, match="k must be >= 1"):
        ExperimentPlan(fold_split=split, held_out_fold=0, k=0, master_seed=3)
    with pytest.raises(CorpusError, match="out of range"):
        ExperimentPlan(fold_split=split, held_out_fold=9, k=1, master_seed=3)

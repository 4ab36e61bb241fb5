from __future__ import annotations

import itertools

import pytest

from nliexp import rng as rnglib
from nliexp.templates import (
    Binding,
    TemplateError,
    binding_at,
    count_bindings,
    enumerate_bindings,
    render,
)
from nliexp.text import tokenize

from .golden import GOLDEN_TRIPLES


def make_binding(registry, lexicon, template_id, lemmas):
    template = registry.by_id[template_id]
    return Binding(
        {
            name: lexicon.get(lemma, template.slots[name].pos_class)
            for name, lemma in lemmas.items()
        }
    )


@pytest.mark.parametrize("tid,lemmas,premise,hypothesis,explanation", GOLDEN_TRIPLES)
def test_golden_renders(registry, lexicon, tid, lemmas, premise, hypothesis, explanation):
    binding = make_binding(registry, lexicon, tid, lemmas)
    rendered = render(registry.by_id[tid], binding, lexicon)
    expected = tuple(" ".join(tokenize(text)) for text in (premise, hypothesis, explanation))
    assert rendered == expected


@pytest.mark.parametrize("tid,lemmas,premise,hypothesis,explanation", GOLDEN_TRIPLES)
def test_golden_parse_inverts(registry, lexicon, tid, lemmas, premise, hypothesis, explanation):
    parsed = registry.parse(premise, hypothesis)
    assert parsed is not None
    parsed_id, parsed_binding = parsed
    assert parsed_id == tid
    assert parsed_binding == make_binding(registry, lexicon, tid, lemmas)


def test_render_is_pure(registry, lexicon):
    tid, lemmas = GOLDEN_TRIPLES[0][:2]
    binding = make_binding(registry, lexicon, tid, lemmas)
    template = registry.by_id[tid]
    assert render(template, binding, lexicon) == render(template, binding, lexicon)


def test_render_rejects_incomplete_binding(registry, lexicon):
    tid, lemmas = GOLDEN_TRIPLES[0][:2]
    partial = dict(lemmas)
    partial.pop("Z")
    binding = make_binding(registry, lexicon, tid, partial)
    with pytest.raises(TemplateError, match="binding mismatch"):
        render(registry.by_id[tid], binding, lexicon)


def test_render_rejects_wrong_class(registry, lexicon):
    template = registry.by_id["lo-prep-sps"]
    binding = Binding(
        {
            "X": lexicon.get("psychologist", "profession"),
            "P": lexicon.get("by", "preposition"),
            "Y": lexicon.get("programmer", "profession"),
            "V": lexicon.get("run", "intransitive_verb"),  # wrong class
            "Z": lexicon.get("essayist", "profession"),
        }
    )
    with pytest.raises(TemplateError, match="expects transitive_verb"):
        render(template, binding, lexicon)


def test_render_rejects_repeated_lexeme(registry, lexicon):
    tid, lemmas = GOLDEN_TRIPLES[0][:2]
    repeated = dict(lemmas, Z=lemmas["X"])
    binding = make_binding(registry, lexicon, tid, repeated)
    with pytest.raises(TemplateError, match="must differ"):
        render(registry.by_id[tid], binding, lexicon)


def test_parse_no_match_returns_none(registry):
    assert registry.parse("hello world .", "hello .") is None
    assert registry.parse("the psychologist saw the essayist .", "the cake was good .") is None


def test_parse_requires_consistent_slots(registry):
    # hypothesis verb differs from the premise verb: no template fits
    assert (
        registry.parse(
            "the psychologist by the programmers saw the essayist .",
            "the psychologist thanked the essayist .",
        )
        is None
    )


def brute_force_bindings(template, lexicon, partition):
    names = sorted(template.slots)
    pools = [lexicon.entries_for(template.slots[n].pos_class, partition) for n in names]
    out = []
    for combo in itertools.product(*pools):
        used = set()
        ok = True
        for name, entry in zip(names, combo):
            key = (entry.pos_class, entry.lemma)
            if key in used:
                ok = False
                break
            used.add(key)
        if ok:
            out.append(Binding(dict(zip(names, combo))))
    return out


@pytest.mark.parametrize("tid", ["mini-prep-sps", "mini-ifiv-pp", "mini-npconj-pp"])
@pytest.mark.parametrize("partition", ["ind", "ood"])
def test_enumeration_matches_brute_force(mini_registry, mini_lexicon, tid, partition):
    template = mini_registry.by_id[tid]
    expected = brute_force_bindings(template, mini_lexicon, partition)
    assert count_bindings(template, mini_lexicon, partition) == len(expected)
    assert list(enumerate_bindings(template, mini_lexicon, partition)) == expected
    assert [
        binding_at(template, mini_lexicon, partition, i) for i in range(len(expected))
    ] == expected


def test_table_one_template_count_against_brute_force(registry, lexicon):
    template = registry.by_id["lo-prep-sps"]
    expected = brute_force_bindings(template, lexicon, "ind")
    assert count_bindings(template, lexicon, "ind") == len(expected)
    # spot-check the decoder against the enumeration at scattered indices
    for index in (0, 1, 17, len(expected) // 2, len(expected) - 1):
        assert binding_at(template, lexicon, "ind", index) == expected[index]


def test_permutation_counts(mini_registry, mini_lexicon):
    # 2 distinct profession slots over 4 ind professions, times verbs
    swap = mini_registry.by_id["mini-swap-sp"]
    assert count_bindings(swap, mini_lexicon, "ind") == 4 * 3 * 2
    conj = mini_registry.by_id["mini-npconj-pp"]
    assert count_bindings(conj, mini_lexicon, "ind") == 4 * 3 * 2


def test_binding_index_out_of_range(mini_registry, mini_lexicon):
    template = mini_registry.by_id["mini-swap-sp"]
    with pytest.raises(TemplateError, match="out of range"):
        binding_at(template, mini_lexicon, "ind", 24)


def test_round_trip_over_seeded_renders(registry, lexicon):
    """parse(render(t, b)) == (t.id, b) across the whole registry."""
    checked = 0
    for template in registry.templates:
        for partition in ("ind", "ood"):
            total = count_bindings(template, lexicon, partition)
            stream = rnglib.stream(99, "round-trip", partition, template.id)
            for index in rnglib.sample_prefix(stream, min(4, total), total):
                binding = binding_at(template, lexicon, partition, index)
                premise, hypothesis, _ = render(template, binding, lexicon)
                assert registry.parse(premise, hypothesis) == (template.id, binding)
                checked += 1
    assert checked >= 900

from __future__ import annotations

import pytest

from nliexp.lexicon import LexiconError, inflect, parse_lexicon


def test_starter_counts(lexicon):
    by = {}
    for entry in lexicon.entries:
        by.setdefault((entry.pos_class, entry.partition), []).append(entry)
    assert len(by[("profession", "ind")]) >= 20
    assert len(by[("profession", "ood")]) >= 10
    for partition in ("ind", "ood"):
        assert len(by[("transitive_verb", partition)]) >= 6
        assert len(by[("intransitive_verb", partition)]) >= 4
        assert len(by[("location", partition)]) >= 4


def test_inflection_examples(lexicon):
    assert inflect(lexicon.get("scientist", "profession"), "plural") == "scientists"
    assert inflect(lexicon.get("address", "transitive_verb"), "passive_participle") == "addressed"
    assert inflect(lexicon.get("run", "intransitive_verb"), "past") == "ran"
    assert inflect(lexicon.get("in_front_of", "preposition"), "base") == "in front of"


def test_inflect_missing_form(lexicon):
    with pytest.raises(LexiconError, match="run.*past_perfect|past_perfect"):
        inflect(lexicon.get("run", "intransitive_verb"), "past_perfect")


def test_is_entity_token(lexicon):
    assert lexicon.is_entity_token("psychologists")
    assert lexicon.is_entity_token("chaplain")
    assert lexicon.is_entity_token("library")
    assert not lexicon.is_entity_token("saw")
    assert not lexicon.is_entity_token("near")
    assert not lexicon.is_entity_token("qwerty")


def test_entity_flag_matches_is_entity_token(lexicon):
    for entry in lexicon.entries:
        for tokens in entry.forms.values():
            if len(tokens) > 1:
                continue
            assert lexicon.is_entity_token(tokens[0]) == entry.is_entity


def test_surface_index_round_trip(lexicon):
    for entry in lexicon.entries:
        for feature, tokens in entry.forms.items():
            surface = " ".join(tokens)
            assert (entry.lemma, entry.pos_class, feature) in lexicon.surface_index[surface]


def test_partitions_disjoint(lexicon):
    partitions: dict[str, set[str]] = {}
    for entry in lexicon.entries:
        for tokens in entry.forms.values():
            partitions.setdefault(" ".join(tokens), set()).add(entry.partition)
    assert all(len(parts) == 1 for parts in partitions.values())


def test_starter_surfaces_unique_across_lexemes(lexicon):
    # A surface may realize several forms of one lexeme (addressed is both
    # past and participle) but never two different lexemes; parsing and the
    # ambiguity checker rely on this.
    for surface, realizations in lexicon.surface_index.items():
        lexemes = {(lemma, pos) for lemma, pos, _ in realizations}
        assert len(lexemes) == 1, f"{surface} realizes {lexemes}"


def test_empty_file_rejected():
    with pytest.raises(LexiconError, match="no entries"):
        parse_lexicon(["# nothing here"])


def test_partition_overlap_rejected():
    lines = [
        "profession | ind | author | singular=author; plural=authors",
        "profession | ood | author2 | singular=author; plural=writers",
    ]
    with pytest.raises(LexiconError, match="both partitions"):
        parse_lexicon(lines)


def test_duplicate_entry_rejected():
    lines = [
        "profession | ind | author | singular=author; plural=authors",
        "profession | ind | author | singular=author; plural=authors",
    ]
    with pytest.raises(LexiconError, match="duplicate"):
        parse_lexicon(lines)


def test_missing_form_rejected():
    with pytest.raises(LexiconError, match="exactly the forms"):
        parse_lexicon(["profession | ind | author | singular=author"])


def test_multiword_only_for_prepositions():
    with pytest.raises(LexiconError, match="multi-word"):
        parse_lexicon(["profession | ind | vice_president | singular=vice president; plural=vice presidents"])


def test_malformed_line_reports_location():
    with pytest.raises(LexiconError, match=":3:"):
        parse_lexicon(["", "# ok", "profession | ind | author"])

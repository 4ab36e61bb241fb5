from __future__ import annotations

import pytest

import nliexp
from nliexp.lexicon import parse_lexicon
from nliexp.registry import parse_registry

# Small self-contained inventory for corpus edge cases and CLI tests.
MINI_LEXICON = """
profession | ind | janitor | singular=janitor; plural=janitors
profession | ind | florist | singular=florist; plural=florists
profession | ind | barista | singular=barista; plural=baristas
profession | ind | clerk | singular=clerk; plural=clerks
profession | ood | surgeon | singular=surgeon; plural=surgeons
profession | ood | pilot | singular=pilot; plural=pilots
profession | ood | farmer | singular=farmer; plural=farmers
profession | ood | judge | singular=judge; plural=judges
transitive_verb | ind | greet | past=greeted; passive_participle=greeted
transitive_verb | ind | praise | past=praised; passive_participle=praised
transitive_verb | ood | blame | past=blamed; passive_participle=blamed
transitive_verb | ood | teach | past=taught; passive_participle=taught
intransitive_verb | ind | smile | past=smiled
intransitive_verb | ind | frown | past=frowned
intransitive_verb | ood | yawn | past=yawned
intransitive_verb | ood | shrug | past=shrugged
preposition | ind | with | base=with
preposition | ood | without | base=without
"""

MINI_REGISTRY = """
template mini-prep-sps | lexical_overlap | prepositional_phrase | entailment
  slots: X=profession:singular, Y=profession:plural, Z=profession:singular, P=preposition, V=transitive_verb
  premise: the {X} {P} the {Y} {V:past} the {Z} .
  hypothesis: the {X} {V:past} the {Z} .
  explanation: the {X} {P} the {Y} is still the {X} .

template mini-swap-sp | lexical_overlap | subject_object_swap | non_entailment
  slots: X=profession:singular, Y=profession:plural, V=transitive_verb
  premise: the {X} {V:past} the {Y} .
  hypothesis: the {Y} {V:past} the {X} .
  explanation: the {X} {V:past} the {Y} , we do not know whether the {Y} {V:past} the {X} .

template mini-npconj-pp | subsequence | np_conjunction_second | entailment
  slots: X=profession:plural, Y=profession:plural, V=intransitive_verb
  premise: the {X} and the {Y} {V:past} .
  hypothesis: the {Y} {V:past} .
  explanation: the {X} and the {Y} {V:past} , so the {Y} {V:past} .

template mini-ifiv-pp | constituent | conditional_intransitive | non_entailment
  slots: X=profession:plural, Y=profession:plural, V1=intransitive_verb, V2=intransitive_verb
  premise: if the {X} {V1:past} , the {Y} {V2:past} .
  hypothesis: the {X} {V1:past} .
  explanation: the {Y} {V2:past} if the {X} {V1:past} , we do not know whether the {X} {V1:past} .

template mini-thoughiv-ss | constituent | concessive_intransitive | entailment
  slots: X=profession:singular, Y=profession:singular, V1=intransitive_verb, V2=intransitive_verb
  premise: though the {X} {V1:past} , the {Y} {V2:past} .
  hypothesis: the {X} {V1:past} .
  explanation: though suggests the {X} {V1:past} happened .
"""


@pytest.fixture(scope="session")
def lexicon():
    return nliexp.load_lexicon(nliexp.default_lexicon_path())


@pytest.fixture(scope="session")
def registry(lexicon):
    return nliexp.load_registry(nliexp.default_registry_path(), lexicon)


@pytest.fixture(scope="session")
def mini_lexicon():
    return parse_lexicon(MINI_LEXICON.splitlines(), source="mini-lexicon")


@pytest.fixture(scope="session")
def mini_registry(mini_lexicon):
    return parse_registry(
        MINI_REGISTRY.splitlines(), mini_lexicon, source="mini-registry"
    )


@pytest.fixture(scope="session")
def mini_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("mini-data")
    lexicon_path = root / "lexicon.txt"
    registry_path = root / "templates.txt"
    lexicon_path.write_text(MINI_LEXICON.strip() + "\n", encoding="utf-8")
    registry_path.write_text(MINI_REGISTRY.strip() + "\n", encoding="utf-8")
    return lexicon_path, registry_path


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """One shared full-scale generation run (seed 7, k 16, fold 0)."""
    from nliexp.cli import main

    out = tmp_path_factory.mktemp("corpus") / "run"
    code = main(
        ["generate", "--out", str(out), "--seed", "7", "--k", "16", "--fold", "0"]
    )
    assert code == 0
    return out

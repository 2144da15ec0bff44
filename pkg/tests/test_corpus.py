import random

import pytest

from molnull.corpus import (
    CorpusSpec,
    corpus_files,
    generate_corpus,
    read_ground_truth,
)
from molnull.ir import MolError, parse_program, print_program
from molnull.oracle import classify_all
from molnull.reporting import build_static_crosstab
from molnull.static import DEFINITELY, fixpoint_analyze

PURE_PD = {"pD": 1.0, "pP": 0.0, "pN": 0.0, "forward": 0.0, "recursive": 0.0}


def test_pure_definite_mix():
    spec = CorpusSpec(method_count=3, class_mix=dict(PURE_PD), seed=1, duplicate_rate=0, value_only_rate=0)
    program, truth = generate_corpus(spec)
    target = {k: c for k, c in truth.expected_method_class.items() if not k[0].startswith("drive")}
    assert target and set(target.values()) == {DEFINITELY}
    result = fixpoint_analyze(program)
    assert all(result.method_classes[k] is DEFINITELY for k in target)


def test_same_spec_same_bytes():
    spec = CorpusSpec(method_count=120, seed=11)
    a = corpus_files(*generate_corpus(spec), spec)
    b = corpus_files(*generate_corpus(CorpusSpec(method_count=120, seed=11)), spec)
    assert a == b
    c = corpus_files(*generate_corpus(CorpusSpec(method_count=120, seed=12)), spec)
    assert c["corpus.mol"] != a["corpus.mol"]


@pytest.mark.parametrize(
    "mix",
    [
        {"pD": 0.0, "pP": 0.0, "pN": 0.0, "forward": 0.5, "recursive": 0.5},
        {"pD": 0.5, "pP": 0.1, "pN": 0.1, "forward": 0.1, "recursive": 0.1},
        {"pX": 1.0},
    ],
)
def test_bad_mix_rejected(mix):
    with pytest.raises(MolError):
        generate_corpus(CorpusSpec(method_count=10, class_mix=mix))


def test_bad_rates_rejected():
    with pytest.raises(MolError):
        generate_corpus(CorpusSpec(method_count=10, loop_density=1.5))


def test_generated_text_reparses():
    program, _ = generate_corpus(CorpusSpec(method_count=80, seed=3))
    text = print_program(program)
    assert print_program(parse_program(text)) == text


@pytest.mark.parametrize("seed", [0, 5, 99])
def test_ground_truth_matches_analysis(seed):
    program, truth = generate_corpus(CorpusSpec(method_count=150, seed=seed))
    result = fixpoint_analyze(program)
    assert result.method_classes == truth.expected_method_class
    assert build_static_crosstab(result, program).cells == truth.expected_crosstab.cells


def test_default_corpus_ground_truth(default_corpus):
    _, program, truth = default_corpus
    assert len(program.methods) >= 2000
    assert fixpoint_analyze(program).method_classes == truth.expected_method_class


def test_oracle_sample_agrees(default_corpus):
    _, program, truth = default_corpus
    sample = random.Random(0).sample(list(program.methods), 50)
    got = classify_all(program, methods=sample)
    assert got == {k: truth.expected_method_class[k] for k in got}


def test_ground_truth_csv_round_trip(loop_free_corpus):
    _, program, truth = loop_free_corpus
    assert read_ground_truth(truth.to_csv()) == truth.expected_method_class
    assert len(truth.loop_free) == len({m for m, _ in truth.expected_method_class})


def test_write_corpus(tmp_path):
    from molnull.corpus import write_corpus

    spec = CorpusSpec(method_count=30, seed=2)
    paths = write_corpus(tmp_path / "c", *generate_corpus(spec), spec)
    assert sorted(p.name for p in paths) == ["corpus.mol", "expected_crosstab.csv", "ground_truth.csv", "manifest.json"]

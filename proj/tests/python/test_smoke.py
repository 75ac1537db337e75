"""Smoke tests for the python module."""

import json
import math
import os
import tempfile

import pytest

import gme


def test_med():
    assert gme.med("a b c", "a b c") == 0
    assert gme.med("a b c", "a x c") == 1
    assert gme.med("", "a b") == 2


def test_bleu_hand_values():
    assert gme.multi_ref_bleu(["a b c d"], [["a b c d"]]) == pytest.approx(100.0)
    expected = 100.0 * math.exp(1.0 - 5.0 / 4.0)
    assert gme.multi_ref_bleu(["a b c d"], [["a b c d e"]]) == pytest.approx(expected)


def test_average_and_f1():
    assert gme.average_score(60.3, 29.9) == pytest.approx(45.1)
    assert gme.unigram_f1("a b", ["a c"]) == pytest.approx(0.5)


def test_behavioral_stats_no_edit():
    stats = gme.behavioral_stats([("i like dogs .", "i like dogs .", ["i like cats"])])
    assert stats["add"] == 0.0
    assert stats["rm"] == 0.0
    assert stats["med_to_original"] == 0.0


def test_map_label():
    assert gme.map_label("entailment") == 0.5
    assert gme.map_label("neutral") == 0.0
    assert gme.map_label("contradiction") == -0.5


def test_template_ops():
    overlap = gme.overlap_set("i liked apples", ["i like apples"])
    assert overlap == {0, 1, 2}
    stops = gme.stopword_set("i like apples .")
    assert stops == {0, 3}
    labels = gme.target_mask_vector("a b c d", {1}, {2}, {2})
    assert labels == [0, 1, 0, 0]
    assert gme.merge_spans([1, 1, 0, 1]) == [(0, 2), (3, 4)]


def test_keep_count_distribution():
    p = gme.keep_count_distribution(2, 1.0)
    assert p[0] == pytest.approx(0.731, abs=1e-3)
    assert p[1] == pytest.approx(0.269, abs=1e-3)


def test_inference_template_filters_protected_words():
    rendered = gme.build_inference_template(
        "i like winter .",
        [0.1, 0.9, 0.9, 0.0],
        ["i like summer"],
        [("s1", "hello there .")],
        epsilon=0.5,
    )
    assert rendered == "i like [MASK-SPAN] ."
    assert gme.EPSILON_MAIN == 0.5
    assert gme.EPSILON_TRANSFER == 0.75


def test_synthetic_corpus_and_rule_oracle():
    with tempfile.TemporaryDirectory() as tmp:
        paths = gme.generate_synthetic_corpus(7, 30, 5, 5, tmp)
        for key in ("train", "valid", "valid_cases", "test_cases", "lexicon"):
            assert os.path.exists(paths[key])
        with open(paths["train"]) as fh:
            lines = [json.loads(line) for line in fh]
        assert len(lines) == 30
        assert all(line["persona"] for line in lines)

        oracle = gme.RuleOracle(paths["lexicon"])
        assert oracle.classify("i like apples .", "i like apples") == "entailment"
        assert oracle.classify("i like apples .", "i hate apples") == "contradiction"
        assert oracle.classify("the weather is nice .", "i like apples") == "neutral"


def test_editor_missing_checkpoints_raises():
    with pytest.raises(gme.GmeError):
        gme.Editor("/nonexistent/maskgen", "/nonexistent/recombiner")

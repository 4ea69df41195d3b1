"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The corpus-dependent end-to-end check (criterion 8) is skipped unless
STACKTAG_GUM_DIR points at a directory of per-genre CoNLL-U files.
"""

import os
import random
import struct
import time
import zlib
from fractions import Fraction

import pytest

from conftest import MockTagger, make_corpus, random_corpus, random_predictions, \
    separable_corpus, write_smoke_fixture
from stacktag import perceptron, pipeline, stacking
from stacktag.conllu import parse_conllu
from stacktag.errors import UnsupportedVersionError
from stacktag.gazetteer import EMPTY_KB, load_kb
from stacktag.gbdt import MetaHyperparams
from stacktag.metrics import evaluate
from stacktag.perceptron import TaggerHyperparams
from test_metrics import assert_matches_oracle

META_FAST = MetaHyperparams(rounds=30, max_depth=3)


def ok(n, name):
    print("[PASS] criterion {}: {}".format(n, name))


def test_criterion_1_metric_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(20240601)
    for _ in range(1000):
        gold = random_corpus(rng, max_sentences=20, max_len=30, max_tags=15)
        pred = random_predictions(rng, gold)
        vocab = {"f{}".format(i) for i in rng.sample(range(41), rng.randint(0, 41))}
        assert_matches_oracle(gold, pred, vocab)
    elapsed = time.monotonic() - start
    assert elapsed < 30, "oracle equivalence took {:.1f}s".format(elapsed)
    ok(1, "evaluate() matches the naive reference on 1000 random corpora")


def test_criterion_2_hand_counted_fixtures():
    gold = make_corpus(
        [
            [("the", "DT"), ("cat", "NN"), ("sits", "VBZ")],
            [("dog", "NN"), ("runs", "VBZ"), (".", ".")],
        ]
    )
    pred = [["DT", "NN", "VBZ"], ["NN", "VB", "."]]
    res = evaluate(gold, pred, {"the", "cat", "dog"})
    assert res.per_token == Fraction(5, 6)
    assert res.full_sentence == Fraction(1, 2)
    weighted = res.known_count * res.known_acc + res.unknown_count * res.unknown_acc
    assert Fraction(weighted, res.token_count) == res.per_token
    ok(2, "per_token 5/6, full_sentence 1/2, known/unknown decomposition exact")


def test_criterion_3_perceptron_separable_convergence():
    start = time.monotonic()
    corpus, _ = separable_corpus(n_sentences=500, n_forms=120, seed=11)
    model = perceptron.train(corpus, TaggerHyperparams(epochs=5, seed=1))
    correct = total = 0
    for s in corpus.sentences:
        for tok, tag in zip(s.tokens, model.predict(s)):
            total += 1
            correct += tok.tag == tag
    elapsed = time.monotonic() - start
    assert correct == total, "training accuracy {}/{}".format(correct, total)
    assert elapsed < 10, "convergence check took {:.1f}s".format(elapsed)
    ok(3, "100% training accuracy on 500 separable sentences within 5 epochs")


def _expert_models_and_corpora():
    """Three base models, each correct on a disjoint third of tokens and
    abstaining (tag Z) elsewhere, so no gold tag ever has a majority."""
    tags = ["A", "B", "C"]
    union = tags + ["Z"]

    def expert(idx):
        def fn(form, gold):
            return gold if int(form[1:]) % 3 == idx else "Z"

        return MockTagger(fn, union)

    def corpus(offset, n):
        sentences = []
        for si in range(n):
            sentences.append(
                [
                    ("f{}".format(offset + si * 4 + j), tags[(offset + si * 7 + j) % 3])
                    for j in range(4)
                ]
            )
        return make_corpus(sentences)

    models = {"m0": expert(0), "m1": expert(1), "m2": expert(2)}
    return models, corpus(0, 200), corpus(10000, 100)


def test_criterion_4_stacking_beats_voting():
    start = time.monotonic()
    models, train_c, test_c = _expert_models_and_corpora()
    votes = stacking.majority_vote(models, test_c)
    vote_acc = evaluate(test_c, votes, set()).per_token
    assert vote_acc <= Fraction(40, 100), "vote accuracy {} not <= 0.40".format(vote_acc)

    instances = stacking.build_instances(models, EMPTY_KB, train_c)
    meta = stacking.train_meta(instances, META_FAST)
    preds = stacking.predict_meta(meta, models, EMPTY_KB, test_c)
    meta_acc = evaluate(test_c, preds, set()).per_token
    assert meta_acc >= Fraction(95, 100), "meta accuracy {} below 0.95".format(meta_acc)
    elapsed = time.monotonic() - start
    assert elapsed < 60
    ok(4, "meta accuracy {} >= 0.95 where majority vote = {}".format(
        float(meta_acc), float(vote_acc)))


def _noise_tagger(seed, tags):
    def fn(form, gold):
        return tags[zlib.crc32("{}:{}".format(seed, form).encode()) % len(tags)]

    return MockTagger(fn, tags)


def _four_tag_corpus(offset, n):
    tags = ["DT", "JJ", "NN", "VB"]
    sentences = []
    for si in range(n):
        sentences.append(
            [("f{}".format(offset + si * 5 + j), tags[(offset + si * 3 + j) % 4])
             for j in range(5)]
        )
    return make_corpus(sentences)


def test_criterion_5_ablation_sanity():
    tags = ["DT", "JJ", "NN", "VB"]
    noise_deltas = []
    informative_drops = []
    for seed in (0, 1, 2):
        models = {
            "good": MockTagger(lambda form, gold: gold, tags),
            "noise": _noise_tagger(seed, tags),
        }
        train_c = _four_tag_corpus(seed * 50000, 160)
        test_c = _four_tag_corpus(1000000 + seed * 50000, 80)
        report = stacking.ablate(
            models, None, train_c, test_c,
            MetaHyperparams(rounds=30, max_depth=3, seed=seed),
        )
        rows = {row.removed: row.per_token for row in report.rows}
        noise_deltas.append(abs(float(rows[None]) - float(rows["noise"])) * 100)
        informative_drops.append((float(rows[None]) - float(rows["good"])) * 100)
    mean_noise_delta = sum(noise_deltas) / len(noise_deltas)
    assert mean_noise_delta <= 1.0, "noise removal moved accuracy by {:.2f} points".format(
        mean_noise_delta
    )
    assert all(d >= 20.0 for d in informative_drops), informative_drops
    ok(5, "noise removal delta {:.2f} <= 1 point; informative removal drops {:.1f}+ points".format(
        mean_noise_delta, min(informative_drops)))


def test_criterion_6_kb_feature_effect():
    # NN vs NNP decidable only through gazetteer membership: the sole base
    # model tags everything NN.
    kb = load_kb("".join("Ent{}\tPerson\n".format(i) for i in range(30)))
    sentences = []
    idx = 0
    for si in range(120):
        sent = []
        for j in range(4):
            if (si + j) % 2 == 0:
                sent.append(("Ent{}".format(idx % 30), "NNP"))
            else:
                sent.append(("plain{}".format(idx), "NN"))
            idx += 1
        sentences.append(sent)
    corpus = make_corpus(sentences)
    train_c = make_corpus(sentences[:80])
    test_c = make_corpus(sentences[80:])
    del corpus
    models = {"flat": MockTagger(lambda form, gold: "NN", ["NN", "NNP"])}

    def affected_accuracy(kb_arg):
        instances = stacking.build_instances(models, kb_arg, train_c)
        meta = stacking.train_meta(instances, META_FAST)
        preds = stacking.predict_meta(meta, models, kb_arg, test_c)
        hit = n = 0
        for sent, tags in zip(test_c.sentences, preds):
            for tok, p in zip(sent.tokens, tags):
                if tok.tag == "NNP":  # the gazetteer-decidable tokens
                    n += 1
                    hit += p == "NNP"
        return hit / n

    with_kb = affected_accuracy(kb)
    without_kb = affected_accuracy(EMPTY_KB)
    assert (with_kb - without_kb) * 100 >= 10, (with_kb, without_kb)
    ok(6, "KB features lift affected-token accuracy {:.0%} -> {:.0%}".format(
        without_kb, with_kb))


REPORTS = ("splits.tsv", "single_models.tsv", "ablation.tsv", "errors.tsv",
           "error_categories.tsv")


def test_criterion_7_pipeline_determinism(tmp_path):
    config_path = write_smoke_fixture(tmp_path)
    config = pipeline.load_config(config_path)
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        cfg = pipeline.apply_overrides(config, output_dir=str(out))
        assert pipeline.run_pipeline(cfg) == 0
        outs.append(out)
    for report in REPORTS:
        a = (outs[0] / report).read_bytes()
        b = (outs[1] / report).read_bytes()
        assert a == b, "{} differs between identical runs".format(report)
    ok(7, "two identically-seeded pipeline runs produce byte-identical reports")


GUM_DIR = os.environ.get("STACKTAG_GUM_DIR")


@pytest.mark.skipif(not GUM_DIR, reason="set STACKTAG_GUM_DIR to a directory of "
                    "per-genre CoNLL-U files (reddit.conllu required) to enable")
def test_criterion_8_real_corpus_end_to_end(tmp_path):
    genre_paths = {}
    for fname in sorted(os.listdir(GUM_DIR)):
        if fname.endswith(".conllu"):
            genre_paths[fname[: -len(".conllu")]] = os.path.join(GUM_DIR, fname)
    assert "reddit" in genre_paths, "reddit.conllu not found in STACKTAG_GUM_DIR"
    from stacktag.conllu import SplitSpec

    config = pipeline.PipelineConfig(
        genre_paths=genre_paths,
        target_genre="reddit",
        split=SplitSpec(unit="document", sizes=(5727, 2489, 2966), seed=1),
        base=TaggerHyperparams(epochs=10, seed=1),
        meta=MetaHyperparams(rounds=100, max_depth=3, learning_rate=0.3, seed=1),
        output_dir=str(tmp_path / "gum-out"),
    )
    assert pipeline.run_pipeline(config) == 0
    table = (tmp_path / "gum-out" / "single_models.tsv").read_text().strip().splitlines()
    scores = {}
    for line in table[1:]:
        cols = line.split("\t")
        scores[cols[0]] = float(cols[1])
    best_single = max(v for k, v in scores.items() if k not in ("ensemble", "reddit"))
    assert scores["ensemble"] >= best_single, scores
    ok(8, "stacked ensemble >= best single non-target base model on the target test split")


def test_criterion_9_serialization_round_trips(tmp_path):
    corpus, _ = separable_corpus(n_sentences=40)
    base = perceptron.train(corpus, TaggerHyperparams(epochs=3, seed=1))
    base_path = tmp_path / "base.model"
    perceptron.save_model(base, base_path)
    loaded = perceptron.load_model(base_path)
    for s in corpus.sentences:
        assert loaded.predict(s) == base.predict(s)

    models = {"base": base}
    instances = stacking.build_instances(models, EMPTY_KB, corpus)
    meta = stacking.train_meta(instances, META_FAST)
    meta_path = tmp_path / "meta.model"
    stacking.save_meta(meta, meta_path)
    loaded_meta = stacking.load_meta(meta_path)
    assert stacking.predict_meta(loaded_meta, models, EMPTY_KB, corpus) == \
        stacking.predict_meta(meta, models, EMPTY_KB, corpus)

    future = tmp_path / "future.model"
    future.write_bytes(perceptron.MODEL_MAGIC
                       + struct.pack(">I", perceptron.MODEL_VERSION + 1) + b"x")
    with pytest.raises(UnsupportedVersionError):
        perceptron.load_model(future)
    future_meta = tmp_path / "future.meta"
    future_meta.write_bytes(stacking.META_MAGIC
                            + struct.pack(">I", stacking.META_VERSION + 1) + b"x")
    with pytest.raises(UnsupportedVersionError):
        stacking.load_meta(future_meta)
    ok(9, "base and meta models predict identically after save/load; "
          "future versions raise")

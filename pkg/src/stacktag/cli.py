"""Command-line interface.

Subcommands are thin wrappers over the library modules; ``run`` drives the
whole pipeline from a config file. Reports are TSV; the report path also
renders PNG figures next to them.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import metrics, perceptron, pipeline, reporting, stacking
from .conllu import (
    SplitSpec,
    make_splits,
    parse_conllu,
    read_predictions,
    split_manifest,
    vocabulary,
    write_conllu,
)
from .errors import StacktagError
from .gazetteer import EMPTY_KB, load_kb
from .gbdt import MetaHyperparams
from .perceptron import TaggerHyperparams

log = logging.getLogger(__name__)


def _read(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _default_output_dir():
    return os.environ.get(pipeline.OUTPUT_DIR_ENV, "out")


def _load_models(paths):
    models = {}
    for p in paths:
        model = perceptron.load_model(p)
        if model.genre in models:
            raise StacktagError("duplicate base model genre {!r}".format(model.genre))
        models[model.genre] = model
    return models


def _load_kb_arg(args):
    if getattr(args, "no_kb", False) or not getattr(args, "kb", None):
        return EMPTY_KB
    return load_kb(_read(args.kb))


def cmd_run(args):
    config = pipeline.load_config(args.config)
    config = pipeline.apply_overrides(
        config,
        seed=args.seed,
        no_kb=args.no_kb,
        include_target_base=args.include_target_base or None,
        output_dir=args.output_dir,
        jobs=args.jobs,
    )
    return pipeline.run_pipeline(config)


def cmd_split(args):
    corpus = parse_conllu(_read(args.input), genre=args.genre)
    spec = SplitSpec(unit=args.unit, sizes=(args.train, args.dev, args.test), seed=args.seed)
    train_c, dev_c, test_c = make_splits(corpus, spec)
    out = args.output_dir
    for name, part in (("train", train_c), ("dev", dev_c), ("test", test_c)):
        _write(os.path.join(out, "{}.{}.conllu".format(args.genre, name)), write_conllu(part))
    _write(os.path.join(out, "splits.tsv"), split_manifest(train_c, dev_c, test_c, args.unit))
    print(
        "split {}: train={} dev={} test={} tokens".format(
            args.genre, train_c.token_count, dev_c.token_count, test_c.token_count
        )
    )
    return 0


def cmd_train_base(args):
    corpus = parse_conllu(_read(args.input), genre=args.genre)
    model = perceptron.train(corpus, TaggerHyperparams(epochs=args.epochs, seed=args.seed))
    perceptron.save_model(model, args.output)
    print("trained {} on {} tokens -> {}".format(args.genre, corpus.token_count, args.output))
    return 0


def cmd_predict(args):
    corpus = parse_conllu(_read(args.input), genre="input")
    model = perceptron.load_model(args.model)
    preds = [model.predict(s) for s in corpus.sentences]
    text = write_conllu(corpus, predicted=preds)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_train_ensemble(args):
    models = _load_models(args.models)
    kb = _load_kb_arg(args)
    corpus = parse_conllu(_read(args.train), genre="meta-train")
    instances = stacking.build_instances(models, kb, corpus)
    meta = stacking.train_meta(
        instances,
        MetaHyperparams(
            rounds=args.rounds,
            max_depth=args.max_depth,
            learning_rate=args.learning_rate,
            seed=args.seed,
        ),
    )
    stacking.save_meta(meta, args.output)
    print(
        "trained meta-learner on {} instances ({} features) -> {}".format(
            len(instances), meta.layout.total_len, args.output
        )
    )
    return 0


def _predictions_for_eval(args, gold):
    """Tag sequences from a base model, a meta model, or an external file."""
    if args.pred:
        pred_corpus, seqs = read_predictions(_read(args.pred))
        if [len(s) for s in pred_corpus.sentences] != [len(s) for s in gold.sentences]:
            raise StacktagError("prediction file does not mirror the gold corpus shape")
        return seqs, None
    if args.meta:
        meta = stacking.load_meta(args.meta)
        models = _load_models(args.models)
        kb = _load_kb_arg(args)
        return stacking.predict_meta(meta, models, kb, gold), None
    model = perceptron.load_model(args.model)
    return [model.predict(s) for s in gold.sentences], model.train_vocab


def cmd_evaluate(args):
    gold = parse_conllu(_read(args.gold), genre="gold")
    seqs, model_vocab = _predictions_for_eval(args, gold)
    if args.train_vocab:
        vocab = vocabulary(parse_conllu(_read(args.train_vocab), genre="vocab"))
    elif model_vocab is not None:
        vocab = model_vocab
    else:
        vocab = set()
    result = metrics.evaluate(gold, seqs, vocab)
    print("per_token\t{}".format(metrics.format_pct(result.per_token)))
    print("full_sentence\t{}".format(metrics.format_pct(result.full_sentence)))
    print("known\t{}\t{}".format(result.known_count, metrics.format_pct(result.known_acc)))
    print("unknown\t{}\t{}".format(result.unknown_count, metrics.format_pct(result.unknown_acc)))
    for (g, p), count in result.confusions[: args.top_confusions]:
        print("confusion\t{} as {}\t{}".format(g, p, count))
    return 0


def cmd_ablate(args):
    models = _load_models(args.models)
    kb = _load_kb_arg(args)
    train_c = parse_conllu(_read(args.train), genre="meta-train")
    test_c = parse_conllu(_read(args.test), genre="test")
    report = stacking.ablate(
        models,
        kb,
        train_c,
        test_c,
        MetaHyperparams(
            rounds=args.rounds,
            max_depth=args.max_depth,
            learning_rate=args.learning_rate,
            seed=args.seed,
        ),
        use_kb=not args.no_kb,
    )
    text = stacking.ablation_tsv(report)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_kb(args):
    kb = load_kb(_read(args.kb))
    if args.kb_command == "stats":
        print("entries\t{}".format(len(kb)))
        print("types\t{}".format(len(kb.type_inventory)))
        for t in kb.type_inventory:
            n = sum(1 for types in kb.entries.values() if t in types)
            print("type\t{}\t{}".format(t, n))
    return 0


def cmd_report(args):
    gold = parse_conllu(_read(args.gold), genre="gold")
    results = {}
    for pred_path in args.pred:
        name = os.path.splitext(os.path.basename(pred_path))[0]
        _, seqs = read_predictions(_read(pred_path))
        vocab = set()
        if args.train_vocab:
            vocab = vocabulary(parse_conllu(_read(args.train_vocab), genre="vocab"))
        results[name] = metrics.evaluate(gold, seqs, vocab)
    out = args.output_dir
    _write(os.path.join(out, "comparison.tsv"), metrics.compare_models(results))
    reporting.plot_known_unknown(results, os.path.join(out, "known_unknown.png"))
    reporting.plot_confusion_pairs(results, os.path.join(out, "confusion_pairs.png"))
    print("wrote comparison.tsv, known_unknown.png, confusion_pairs.png to {}".format(out))
    return 0


def _add_meta_hyper_args(p):
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="stacktag", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-kb", action="store_true")
    p.add_argument("--include-target-base", action="store_true")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("split", help="split a corpus into train/dev/test")
    p.add_argument("--input", required=True)
    p.add_argument("--genre", required=True)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--dev", type=int, default=0)
    p.add_argument("--test", type=int, default=0)
    p.add_argument("--unit", choices=("document", "sentence"), default="document")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output-dir", default=_default_output_dir())
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train-base", help="train a per-genre base tagger")
    p.add_argument("--input", required=True)
    p.add_argument("--genre", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_base)

    p = sub.add_parser("predict", help="tag a corpus with a trained base model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("train-ensemble", help="train the stacking meta-learner")
    p.add_argument("--train", required=True, help="meta-training corpus (CoNLL-U)")
    p.add_argument("--models", nargs="+", required=True, help="base model files")
    p.add_argument("--kb", default=None, help="gazetteer TSV")
    p.add_argument("--no-kb", action="store_true")
    p.add_argument("--output", required=True)
    _add_meta_hyper_args(p)
    p.set_defaults(func=cmd_train_ensemble)

    p = sub.add_parser("evaluate", help="score predictions against a gold corpus")
    p.add_argument("--gold", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="base model file")
    src.add_argument("--meta", help="meta model file (needs --models)")
    src.add_argument("--pred", help="CoNLL-U with PredXPOS= in MISC (or XPOS column)")
    p.add_argument("--models", nargs="*", default=[], help="base models for --meta")
    p.add_argument("--kb", default=None)
    p.add_argument("--no-kb", action="store_true")
    p.add_argument("--train-vocab", default=None, help="CoNLL-U defining known tokens")
    p.add_argument("--top-confusions", type=int, default=10)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="leave-one-model-out ablation report")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--kb", default=None)
    p.add_argument("--no-kb", action="store_true")
    p.add_argument("--output", default=None)
    _add_meta_hyper_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("kb", help="knowledge base utilities")
    kb_sub = p.add_subparsers(dest="kb_command", required=True)
    ps = kb_sub.add_parser("stats", help="print entry and type counts")
    ps.add_argument("--kb", required=True)
    ps.set_defaults(func=cmd_kb)

    p = sub.add_parser("report", help="comparison table and figures for prediction files")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--train-vocab", default=None)
    p.add_argument("--output-dir", default=_default_output_dir())
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (StacktagError, OSError) as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

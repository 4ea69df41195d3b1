"""End-to-end orchestration: ingest genre corpora, split the target genre,
train per-genre base taggers, stack them under the meta-learner, evaluate,
ablate, and write all reports (TSV + figures) to the output directory.

A machine-readable ``status.json`` names the current stage; on failure it
records the stage that broke so reruns can resume diagnosis.
"""

from __future__ import annotations

import configparser
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from . import metrics, perceptron, reporting, stacking
from .conllu import SplitSpec, make_splits, parse_conllu, split_manifest, vocabulary
from .errors import ConfigError, StacktagError
from .gazetteer import EMPTY_KB, load_kb
from .gbdt import MetaHyperparams
from .perceptron import TaggerHyperparams

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "STACKTAG_OUTPUT_DIR"

ARTIFACTS = (
    "splits.tsv",
    "meta.model",
    "single_models.tsv",
    "ablation.tsv",
    "errors.tsv",
    "error_categories.tsv",
    "known_unknown.png",
    "confusion_pairs.png",
    "error_categories.png",
)


@dataclass
class PipelineConfig:
    genre_paths: dict
    target_genre: str
    split: SplitSpec
    kb_path: str | None = None
    base: TaggerHyperparams = field(default_factory=TaggerHyperparams)
    meta: MetaHyperparams = field(default_factory=MetaHyperparams)
    output_dir: str = "out"
    include_target_base: bool = False
    use_kb: bool = True
    jobs: int = 1

    def validate(self):
        if self.target_genre not in self.genre_paths:
            raise ConfigError(
                "target genre {!r} is not among the configured genres {}".format(
                    self.target_genre, sorted(self.genre_paths)
                )
            )
        for genre, path in self.genre_paths.items():
            if not os.path.exists(path):
                raise ConfigError("corpus file for genre {!r} not found: {}".format(genre, path))
        if self.kb_path and not os.path.exists(self.kb_path):
            raise ConfigError("knowledge base file not found: {}".format(self.kb_path))
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


def load_config(path):
    """Read the declarative INI-style pipeline configuration."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError("config file not found: {}".format(path))
    if "genres" not in parser or not parser["genres"]:
        raise ConfigError("config needs a [genres] section mapping genre to CoNLL-U path")
    if "pipeline" not in parser or "target" not in parser["pipeline"]:
        raise ConfigError("config needs [pipeline] target = <genre>")

    base_dir = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base_dir, p)

    genres = {g: resolve(p) for g, p in parser["genres"].items()}
    pipe = parser["pipeline"]
    split_sec = parser["split"] if "split" in parser else {}
    base_sec = parser["base"] if "base" in parser else {}
    meta_sec = parser["meta"] if "meta" in parser else {}

    split = SplitSpec(
        unit=split_sec.get("unit", "document"),
        sizes=(
            int(split_sec.get("train", 0) or 0),
            int(split_sec.get("dev", 0) or 0),
            int(split_sec.get("test", 0) or 0),
        ),
        seed=int(split_sec.get("seed", 1)),
    )
    kb_path = pipe.get("kb", "") or None
    default_out = os.environ.get(OUTPUT_DIR_ENV, "out")
    return PipelineConfig(
        genre_paths=genres,
        target_genre=pipe["target"],
        split=split,
        kb_path=resolve(kb_path) if kb_path else None,
        base=TaggerHyperparams(
            epochs=int(base_sec.get("epochs", 10)), seed=int(base_sec.get("seed", 1))
        ),
        meta=MetaHyperparams(
            rounds=int(meta_sec.get("rounds", 100)),
            max_depth=int(meta_sec.get("max_depth", 3)),
            learning_rate=float(meta_sec.get("learning_rate", 0.3)),
            seed=int(meta_sec.get("seed", 1)),
        ),
        output_dir=pipe.get("output_dir", default_out),
        include_target_base=pipe.getboolean("include_target_base", False)
        if hasattr(pipe, "getboolean")
        else False,
        use_kb=pipe.getboolean("use_kb", True) if hasattr(pipe, "getboolean") else True,
        jobs=int(pipe.get("jobs", 1)),
    )


def apply_overrides(config, seed=None, no_kb=False, include_target_base=None,
                    output_dir=None, jobs=None):
    """CLI flag overrides on top of the config file."""
    if seed is not None:
        config = replace(
            config,
            split=replace(config.split, seed=seed),
            base=replace(config.base, seed=seed),
            meta=replace(config.meta, seed=seed),
        )
    if no_kb:
        config = replace(config, use_kb=False)
    if include_target_base is not None:
        config = replace(config, include_target_base=include_target_base)
    if output_dir is not None:
        config = replace(config, output_dir=output_dir)
    if jobs is not None:
        config = replace(config, jobs=jobs)
    return config


def _train_one(args):
    genre, path, hyperparams, out_path = args
    with open(path, encoding="utf-8") as f:
        corpus = parse_conllu(f.read(), genre=genre)
    model = perceptron.train(corpus, hyperparams)
    perceptron.save_model(model, out_path)
    return genre, out_path


class _Status:
    def __init__(self, out_dir):
        self.path = os.path.join(out_dir, "status.json")
        self.stage = None
        self.artifacts = []

    def enter(self, stage):
        self.stage = stage
        log.info("stage: %s", stage)
        self._write("running")

    def add(self, artifact):
        self.artifacts.append(artifact)

    def done(self):
        self._write("ok")

    def failed(self, error):
        self._write("failed", error=str(error))

    def _write(self, status, error=None):
        payload = {"status": status, "stage": self.stage, "artifacts": self.artifacts}
        if error is not None:
            payload["error"] = error
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")


def run_pipeline(config):
    """Run every stage; returns 0 on success, 1 after recording the failed stage."""
    os.makedirs(config.output_dir, exist_ok=True)
    status = _Status(config.output_dir)
    try:
        _run_stages(config, status)
    except (StacktagError, OSError) as exc:
        log.error("pipeline failed in stage %s: %s", status.stage, exc)
        status.failed(exc)
        return 1
    status.done()
    return 0


def _run_stages(config, status):
    out = config.output_dir

    status.enter("validate")
    config.validate()

    status.enter("load")
    corpora = {}
    for genre in sorted(config.genre_paths):
        with open(config.genre_paths[genre], encoding="utf-8") as f:
            corpora[genre] = parse_conllu(f.read(), genre=genre)
        log.info("loaded %s: %d tokens, %d sentences", genre,
                 corpora[genre].token_count, len(corpora[genre]))

    status.enter("split")
    target = corpora[config.target_genre]
    train_c, dev_c, test_c = make_splits(target, config.split)
    log.info("target split tokens: train=%d dev=%d test=%d",
             train_c.token_count, dev_c.token_count, test_c.token_count)
    manifest_path = os.path.join(out, "splits.tsv")
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(split_manifest(train_c, dev_c, test_c, unit=config.split.unit))
    status.add("splits.tsv")

    status.enter("train-base")
    models_dir = os.path.join(out, "models")
    os.makedirs(models_dir, exist_ok=True)
    models = {}
    # The target-genre model trains on the target train split only; every
    # other genre uses its full corpus.
    train_split_path = os.path.join(out, "target_train.conllu")
    from .conllu import write_conllu

    with open(train_split_path, "w", encoding="utf-8") as f:
        f.write(write_conllu(train_c))
    jobs = []
    for genre in sorted(corpora):
        out_path = os.path.join(models_dir, "{}.model".format(genre))
        src = train_split_path if genre == config.target_genre else config.genre_paths[genre]
        jobs.append((genre, src, config.base, out_path))
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_train_one, jobs))
    else:
        results = [_train_one(j) for j in jobs]
    for genre, path in results:
        models[genre] = perceptron.load_model(path)
        status.add(os.path.relpath(path, out))

    status.enter("kb")
    if config.use_kb and config.kb_path:
        with open(config.kb_path, encoding="utf-8") as f:
            kb = load_kb(f.read())
    else:
        kb = EMPTY_KB

    status.enter("train-ensemble")
    ensemble_bases = {g: m for g, m in models.items() if g != config.target_genre}
    if config.include_target_base:
        ensemble_bases[config.target_genre] = models[config.target_genre]
    instances = stacking.build_instances(ensemble_bases, kb, train_c)
    meta = stacking.train_meta(instances, config.meta)
    meta_path = os.path.join(out, "meta.model")
    stacking.save_meta(meta, meta_path)
    status.add("meta.model")

    status.enter("evaluate")
    results = {}
    for genre, model in models.items():
        preds = [model.predict(s) for s in test_c.sentences]
        results[genre] = metrics.evaluate(test_c, preds, model.train_vocab)
    ensemble_preds = stacking.predict_meta(meta, ensemble_bases, kb, test_c)
    train_vocab = vocabulary(train_c)
    results["ensemble"] = metrics.evaluate(test_c, ensemble_preds, train_vocab)
    with open(os.path.join(out, "single_models.tsv"), "w", encoding="utf-8") as f:
        f.write(metrics.compare_models(results))
    status.add("single_models.tsv")

    with open(os.path.join(out, "errors.tsv"), "w", encoding="utf-8") as f:
        f.write(metrics.error_dump(test_c, ensemble_preds))
    status.add("errors.tsv")
    hist = metrics.categorize_errors(test_c, ensemble_preds)
    with open(os.path.join(out, "error_categories.tsv"), "w", encoding="utf-8") as f:
        f.write("category\tcount\n")
        for cat in metrics.ERROR_CATEGORIES:
            f.write("{}\t{}\n".format(cat, hist[cat]))
    status.add("error_categories.tsv")

    status.enter("ablate")
    report = stacking.ablate(
        ensemble_bases, kb, train_c, test_c, config.meta, use_kb=config.use_kb
    )
    with open(os.path.join(out, "ablation.tsv"), "w", encoding="utf-8") as f:
        f.write(stacking.ablation_tsv(report))
    status.add("ablation.tsv")

    status.enter("report")
    single_results = {g: r for g, r in results.items() if g != "ensemble"}
    reporting.plot_known_unknown(single_results, os.path.join(out, "known_unknown.png"))
    status.add("known_unknown.png")
    reporting.plot_confusion_pairs(single_results, os.path.join(out, "confusion_pairs.png"))
    status.add("confusion_pairs.png")
    reporting.plot_category_histogram(hist, os.path.join(out, "error_categories.png"))
    status.add("error_categories.png")

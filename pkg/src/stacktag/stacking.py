"""Stacked ensemble: base-model predictions plus gazetteer bits feed a
gradient-boosted meta-learner; includes majority-vote baseline and the
leave-one-model-out ablation harness.

A base model is anything exposing ``predict(sentence) -> list[tag]`` and a
``tagset`` attribute; per-genre perceptron models and test mocks both fit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .conllu import TagSet, vocabulary
from .errors import LayoutMismatchError, ShapeMismatchError, StacktagError
from .gazetteer import EMPTY_KB, entity_features
from .gbdt import GBDTClassifier, MetaHyperparams
from .serialize import read_versioned, write_versioned

META_MAGIC = b"STKMETA"
META_VERSION = 1


@dataclass(frozen=True)
class FeatureLayout:
    """Frozen layout of the stacked feature vector.

    One one-hot block per base model (sorted by name) over the union tag
    order, then three gazetteer blocks (as-is / lowercased / capitalized)
    over the entity-type inventory.
    """

    model_order: tuple[str, ...]
    tag_order: tuple[str, ...]
    kb_types: tuple[str, ...]

    @property
    def block_len(self):
        return len(self.tag_order)

    @property
    def kb_block_len(self):
        return 3 * len(self.kb_types)

    @property
    def total_len(self):
        return len(self.model_order) * self.block_len + self.kb_block_len

    def tag_index(self, tag):
        return self.tag_order.index(tag)


@dataclass(frozen=True)
class StackedInstance:
    features: np.ndarray  # uint8, length layout.total_len
    gold: str
    provenance: tuple  # (doc_id, sent_id, position)
    layout: FeatureLayout


def build_layout(base_models, kb, corpus=None):
    """Union tag order over all base models (plus corpus gold tags, when given)."""
    tags = set()
    for model in base_models.values():
        tags.update(model.tagset)
    if corpus is not None:
        tags.update(corpus.tagset.tags)
    kb_types = kb.type_inventory if kb is not None else ()
    return FeatureLayout(
        model_order=tuple(sorted(base_models)),
        tag_order=tuple(sorted(tags)),
        kb_types=tuple(kb_types),
    )


def _predict_all(base_models, corpus):
    """name -> list of tag sequences mirroring the corpus."""
    preds = {}
    for name in sorted(base_models):
        model = base_models[name]
        seqs = []
        for sent in corpus.sentences:
            tags = model.predict(sent)
            if len(tags) != len(sent):
                raise ShapeMismatchError(
                    "model {!r} predicted {} tags for sentence {} of length {}".format(
                        name, len(tags), sent.sent_id, len(sent)
                    )
                )
            seqs.append(tags)
        preds[name] = seqs
    return preds


def _encode(layout, preds, kb, corpus):
    tag_pos = {t: i for i, t in enumerate(layout.tag_order)}
    block = layout.block_len
    kb_base = len(layout.model_order) * block
    instances = []
    for si, sent in enumerate(corpus.sentences):
        kb_bits = None
        for ti, tok in enumerate(sent.tokens):
            vec = np.zeros(layout.total_len, dtype=np.uint8)
            for mi, name in enumerate(layout.model_order):
                tag = preds[name][si][ti]
                if tag not in tag_pos:
                    raise LayoutMismatchError(
                        "model {!r} predicted tag {!r} outside the frozen tag order".format(
                            name, tag
                        )
                    )
                vec[mi * block + tag_pos[tag]] = 1
            if layout.kb_types:
                kb_bits = entity_features(kb, tok.form)
                vec[kb_base : kb_base + layout.kb_block_len] = kb_bits
            instances.append(
                StackedInstance(
                    features=vec,
                    gold=tok.tag,
                    provenance=(sent.doc_id, sent.sent_id, ti),
                    layout=layout,
                )
            )
    return instances


def build_instances(base_models, kb, corpus, layout=None):
    """One stacked instance per corpus token, in corpus order."""
    if not base_models:
        raise StacktagError("need at least one base model")
    if layout is None:
        layout = build_layout(base_models, kb, corpus)
    preds = _predict_all(base_models, corpus)
    return _encode(layout, preds, kb, corpus)


@dataclass
class MetaModel:
    """Stacking classifier plus the frozen feature layout it was trained with."""

    learner: GBDTClassifier
    layout: FeatureLayout
    tagset: TagSet
    hyperparams: MetaHyperparams

    def predict_instances(self, instances):
        X = np.stack([inst.features for inst in instances])
        ids = self.learner.predict(X)
        return [self.layout.tag_order[i] for i in ids]


def train_meta(instances, hyperparams=MetaHyperparams()):
    """Train the meta-learner on stacked instances sharing one layout."""
    if not instances:
        raise StacktagError("cannot train the meta-learner on zero instances")
    layout = instances[0].layout
    for inst in instances:
        if inst.layout != layout:
            raise LayoutMismatchError("instances carry differing feature layouts")
    tag_pos = {t: i for i, t in enumerate(layout.tag_order)}
    for inst in instances:
        if inst.gold not in tag_pos:
            raise LayoutMismatchError(
                "gold tag {!r} outside the frozen tag order".format(inst.gold)
            )
    X = np.stack([inst.features for inst in instances])
    y = np.array([tag_pos[inst.gold] for inst in instances], dtype=np.int64)
    learner = GBDTClassifier(n_classes=len(layout.tag_order), hyperparams=hyperparams)
    learner.fit(X, y)
    return MetaModel(
        learner=learner,
        layout=layout,
        tagset=TagSet(layout.tag_order),
        hyperparams=hyperparams,
    )


def _check_layout(meta, base_models, kb):
    layout = meta.layout
    if tuple(sorted(base_models)) != layout.model_order:
        raise LayoutMismatchError(
            "base model names {} do not match the trained layout {}".format(
                sorted(base_models), list(layout.model_order)
            )
        )
    kb_types = kb.type_inventory if kb is not None else ()
    if tuple(kb_types) != layout.kb_types:
        raise LayoutMismatchError(
            "gazetteer type inventory {} does not match the trained layout {}".format(
                list(kb_types), list(layout.kb_types)
            )
        )
    frozen = set(layout.tag_order)
    for name, model in base_models.items():
        extra = set(model.tagset) - frozen
        if extra:
            raise LayoutMismatchError(
                "model {!r} can emit tags outside the frozen tag order: {}".format(
                    name, sorted(extra)
                )
            )


def predict_meta(meta, base_models, kb, corpus):
    """Tag sequences mirroring the corpus; raises on any layout mismatch."""
    _check_layout(meta, base_models, kb)
    preds = _predict_all(base_models, corpus)
    instances = _encode(meta.layout, preds, kb, corpus)
    flat = meta.predict_instances(instances)
    out = []
    pos = 0
    for sent in corpus.sentences:
        out.append(flat[pos : pos + len(sent)])
        pos += len(sent)
    return out


def majority_vote(base_models, corpus):
    """Per-token modal tag across base models; ties break lexicographically."""
    if not base_models:
        raise StacktagError("need at least one base model")
    preds = _predict_all(base_models, corpus)
    names = sorted(base_models)
    out = []
    for si, sent in enumerate(corpus.sentences):
        tags = []
        for ti in range(len(sent)):
            counts = {}
            for name in names:
                t = preds[name][si][ti]
                counts[t] = counts.get(t, 0) + 1
            tags.append(min(counts, key=lambda t: (-counts[t], t)))
        out.append(tags)
    return out


@dataclass(frozen=True)
class AblationRow:
    removed: str | None  # None = full ensemble
    per_token: Fraction
    full_sentence: Fraction


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[AblationRow, ...]


def ablate(base_models, kb, train_corpus, test_corpus, hyperparams=MetaHyperparams(),
           use_kb=True):
    """Leave-one-model-out ablation; every row retrains the meta-learner.

    Base predictions are computed once per corpus and shared across rows.
    """
    from . import metrics

    if len(base_models) < 2:
        raise StacktagError("ablation needs at least 2 base models")
    kb_used = kb if (use_kb and kb is not None) else EMPTY_KB
    train_preds = _predict_all(base_models, train_corpus)
    test_preds = _predict_all(base_models, test_corpus)
    train_vocab = vocabulary(train_corpus)

    def run(subset_names):
        subset = {n: base_models[n] for n in subset_names}
        layout = build_layout(subset, kb_used, train_corpus)
        instances = _encode(layout, train_preds, kb_used, train_corpus)
        meta = train_meta(instances, hyperparams)
        test_instances = _encode(layout, test_preds, kb_used, test_corpus)
        flat = meta.predict_instances(test_instances)
        seqs = []
        pos = 0
        for sent in test_corpus.sentences:
            seqs.append(flat[pos : pos + len(sent)])
            pos += len(sent)
        result = metrics.evaluate(test_corpus, seqs, train_vocab)
        return result

    rows = []
    full = run(sorted(base_models))
    rows.append(AblationRow(None, full.per_token, full.full_sentence))
    for removed in sorted(base_models):
        rest = [n for n in sorted(base_models) if n != removed]
        res = run(rest)
        rows.append(AblationRow(removed, res.per_token, res.full_sentence))
    return AblationReport(rows=tuple(rows))


def ablation_tsv(report):
    from .metrics import format_pct

    lines = ["removed_model\tper_token\tfull_sentence"]
    for row in report.rows:
        name = row.removed if row.removed is not None else "none"
        lines.append(
            "{}\t{}\t{}".format(name, format_pct(row.per_token), format_pct(row.full_sentence))
        )
    return "\n".join(lines) + "\n"


def save_meta(meta, path):
    payload = {
        "layout": {
            "model_order": list(meta.layout.model_order),
            "tag_order": list(meta.layout.tag_order),
            "kb_types": list(meta.layout.kb_types),
        },
        "learner": meta.learner.to_payload(),
    }
    write_versioned(path, META_MAGIC, META_VERSION, payload)


def load_meta(path):
    _, payload = read_versioned(path, META_MAGIC, META_VERSION)
    layout = FeatureLayout(
        model_order=tuple(payload["layout"]["model_order"]),
        tag_order=tuple(payload["layout"]["tag_order"]),
        kb_types=tuple(payload["layout"]["kb_types"]),
    )
    learner = GBDTClassifier.from_payload(payload["learner"])
    return MetaModel(
        learner=learner,
        layout=layout,
        tagset=TagSet(layout.tag_order),
        hyperparams=learner.hyperparams,
    )

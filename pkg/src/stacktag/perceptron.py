"""Averaged-perceptron POS tagger trained per genre.

Greedy left-to-right decoding over hand-crafted surface features; ties are
broken by the lexicographically smallest tag so results are identical across
platforms. A trained model is immutable and safe for concurrent prediction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .conllu import Sentence, TagSet, vocabulary
from .errors import StacktagError
from .serialize import read_versioned, write_versioned
from .shapes import token_shape

START = "<S>"
START2 = "<S2>"
END = "</S>"

MODEL_MAGIC = b"STKPERC"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TaggerHyperparams:
    epochs: int = 10
    seed: int = 1


def extract_features(sentence, index, history):
    """Feature keys for one token position given previously predicted tags.

    ``history`` holds the predictions for positions < index; sentinel values
    stand in for out-of-sentence context.
    """
    forms = sentence.forms() if isinstance(sentence, Sentence) else list(sentence)
    if not 0 <= index < len(forms):
        raise StacktagError("feature index {} out of range".format(index))
    form = forms[index]
    lower = form.lower()
    prev_form = forms[index - 1] if index > 0 else START
    next_form = forms[index + 1] if index + 1 < len(forms) else END
    prev_tag = history[index - 1] if index > 0 else START
    prev2_tag = history[index - 2] if index > 1 else START2

    feats = {
        "bias",
        "word={}".format(form),
        "lower={}".format(lower),
        "shape={}".format(token_shape(form)),
        "prevword={}".format(prev_form),
        "nextword={}".format(next_form),
        "prevtag={}".format(prev_tag),
        "prevtags={}+{}".format(prev2_tag, prev_tag),
        "prevtag+word={}+{}".format(prev_tag, lower),
    }
    for k in range(1, 5):
        if len(lower) >= k:
            feats.add("pre{}={}".format(k, lower[:k]))
            feats.add("suf{}={}".format(k, lower[-k:]))
    if form.isupper() and len(form) > 1:
        feats.add("case=allcaps")
    elif form[:1].isupper():
        feats.add("case=initcap")
    elif form.islower():
        feats.add("case=lower")
    else:
        feats.add("case=other")
    if any(c.isdigit() for c in form):
        feats.add("hasdigit")
    return feats


@dataclass
class TaggerModel:
    """Trained per-genre tagger: averaged weights + training vocabulary."""

    weights: dict
    tagset: TagSet
    train_vocab: set
    genre: str
    hyperparams: TaggerHyperparams = field(default_factory=TaggerHyperparams)

    def predict(self, sentence):
        """Greedy left-to-right tag sequence; length mirrors the sentence."""
        forms = sentence.forms() if isinstance(sentence, Sentence) else list(sentence)
        history = []
        for i in range(len(forms)):
            feats = extract_features(forms, i, history)
            history.append(_best_tag(self.weights, self.tagset, feats))
        return history


def _best_tag(weights, tagset, feats):
    scores = dict.fromkeys(tagset.tags, 0.0)
    for f in sorted(feats):
        per_tag = weights.get(f)
        if not per_tag:
            continue
        for tag, w in per_tag.items():
            scores[tag] += w
    # Lexicographically smallest tag wins ties.
    return min(scores, key=lambda t: (-scores[t], t))


def train(corpus, hyperparams=TaggerHyperparams()):
    """Train an averaged perceptron on a corpus.

    Greedy decoding during training; a weight update on every mistaken tag;
    final weights are the running average over all per-token steps. Fully
    deterministic given (corpus, hyperparams).
    """
    if len(corpus) == 0:
        raise StacktagError("cannot train on an empty corpus")
    if hyperparams.epochs < 1:
        raise StacktagError("epochs must be >= 1")

    tagset = corpus.tagset
    weights = {}
    totals = {}
    tstamps = {}
    step = 0

    def update_feature(tag, f, delta):
        per_tag = weights.setdefault(f, {})
        w = per_tag.get(tag, 0.0)
        key = (f, tag)
        totals[key] = totals.get(key, 0.0) + (step - tstamps.get(key, 0)) * w
        tstamps[key] = step
        per_tag[tag] = w + delta

    rng = random.Random(hyperparams.seed)
    order = list(range(len(corpus.sentences)))
    for _ in range(hyperparams.epochs):
        rng.shuffle(order)
        for si in order:
            sent = corpus.sentences[si]
            forms = sent.forms()
            history = []
            for i, tok in enumerate(sent.tokens):
                feats = extract_features(forms, i, history)
                guess = _best_tag(weights, tagset, feats)
                if guess != tok.tag:
                    for f in feats:
                        update_feature(tok.tag, f, +1.0)
                        update_feature(guess, f, -1.0)
                history.append(guess)
                step += 1

    averaged = {}
    for f, per_tag in weights.items():
        for tag, w in per_tag.items():
            key = (f, tag)
            total = totals.get(key, 0.0) + (step - tstamps.get(key, 0)) * w
            avg = total / step
            if avg != 0.0:
                averaged.setdefault(f, {})[tag] = avg

    return TaggerModel(
        weights=averaged,
        tagset=tagset,
        train_vocab=vocabulary(corpus),
        genre=corpus.genre,
        hyperparams=hyperparams,
    )


def predict(model, sentence):
    return model.predict(sentence)


def save_model(model, path):
    payload = {
        "genre": model.genre,
        "tagset": list(model.tagset.tags),
        "train_vocab": sorted(model.train_vocab),
        "hyperparams": (model.hyperparams.epochs, model.hyperparams.seed),
        "weights": {f: sorted(per.items()) for f, per in sorted(model.weights.items())},
    }
    write_versioned(path, MODEL_MAGIC, MODEL_VERSION, payload)


def load_model(path):
    _, payload = read_versioned(path, MODEL_MAGIC, MODEL_VERSION)
    epochs, seed = payload["hyperparams"]
    return TaggerModel(
        weights={f: dict(per) for f, per in payload["weights"].items()},
        tagset=TagSet(payload["tagset"]),
        train_vocab=set(payload["train_vocab"]),
        genre=payload["genre"],
        hyperparams=TaggerHyperparams(epochs=epochs, seed=seed),
    )

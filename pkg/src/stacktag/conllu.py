"""CoNLL-U corpora: parsing, writing, splitting, concatenation, vocabulary.

Tags are taken from the XPOS column (fine-grained PTB-style inventory).
Corpora are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import ConlluParseError, ShapeMismatchError, StacktagError

MISSING_TAG = "X-UNK"

_BAD_FORM_CHARS = ("\t", "\n", "\r", "\0")


@dataclass(frozen=True)
class Token:
    form: str
    tag: str

    def __post_init__(self):
        if not self.form:
            raise StacktagError("token form must be non-empty")
        if any(c in self.form for c in _BAD_FORM_CHARS):
            raise StacktagError("token form contains control characters: {!r}".format(self.form))
        if not self.tag:
            raise StacktagError("token tag must be non-empty")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_id: str
    sent_id: str

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise StacktagError("sentence must contain at least one token")

    def __len__(self):
        return len(self.tokens)

    def forms(self):
        return [t.form for t in self.tokens]

    def tags(self):
        return [t.tag for t in self.tokens]


class TagSet:
    """Closed, lexicographically ordered tag inventory with stable indexing."""

    def __init__(self, tags):
        self._tags = tuple(sorted(set(tags)))
        self._index = {t: i for i, t in enumerate(self._tags)}

    @property
    def tags(self):
        return self._tags

    def index_of(self, tag):
        return self._index[tag]

    def __len__(self):
        return len(self._tags)

    def __contains__(self, tag):
        return tag in self._index

    def __iter__(self):
        return iter(self._tags)

    def __eq__(self, other):
        return isinstance(other, TagSet) and self._tags == other._tags

    def __hash__(self):
        return hash(self._tags)

    def __repr__(self):
        return "TagSet({})".format(list(self._tags))


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    genre: str
    tagset: TagSet = field(default=None)

    def __post_init__(self):
        if self.tagset is None:
            object.__setattr__(
                self, "tagset", TagSet(t.tag for s in self.sentences for t in s.tokens)
            )
        seen = set()
        for s in self.sentences:
            key = (s.doc_id, s.sent_id)
            if key in seen:
                raise StacktagError("duplicate sentence id {} in corpus".format(key))
            seen.add(key)
            for t in s.tokens:
                if t.tag not in self.tagset:
                    raise StacktagError(
                        "tag {!r} not in corpus tagset (sentence {})".format(t.tag, s.sent_id)
                    )

    @property
    def token_count(self):
        return sum(len(s) for s in self.sentences)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def parse_conllu(text, genre, allow_missing_xpos=False):
    """Parse CoNLL-U text into a Corpus.

    FORM comes from column 2, the tag from column 5 (XPOS). Multiword-token
    range lines (id "3-4") and empty-node lines (id "5.1") are skipped.
    ``# newdoc id`` / ``# sent_id`` comments populate ids; missing ids are
    synthesized as sequential integers.
    """
    sentences = []
    cur_tokens = []
    cur_sent_id = None
    cur_doc_id = None
    doc_counter = 0
    sent_counter = 0

    def flush():
        nonlocal cur_tokens, cur_sent_id, sent_counter
        if not cur_tokens:
            cur_sent_id = None
            return
        sent_counter += 1
        sid = cur_sent_id if cur_sent_id is not None else str(sent_counter)
        did = cur_doc_id if cur_doc_id is not None else "1"
        sentences.append(Sentence(tuple(cur_tokens), doc_id=did, sent_id=sid))
        cur_tokens = []
        cur_sent_id = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("newdoc id"):
                _, _, value = body.partition("=")
                doc_counter += 1
                cur_doc_id = value.strip() or str(doc_counter)
            elif body.startswith("newdoc"):
                doc_counter += 1
                cur_doc_id = str(doc_counter)
            elif body.startswith("sent_id"):
                _, _, value = body.partition("=")
                cur_sent_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) < 5:
            raise ConlluParseError(
                "expected at least 5 tab-separated columns, got {}".format(len(cols)), lineno
            )
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword range / empty node
        if not tok_id.isdigit():
            raise ConlluParseError("malformed token id {!r}".format(tok_id), lineno)
        form = cols[1]
        tag = cols[4]
        if tag == "_":
            if not allow_missing_xpos:
                raise ConlluParseError(
                    "missing XPOS tag (use the permissive flag to substitute {})".format(
                        MISSING_TAG
                    ),
                    lineno,
                )
            tag = MISSING_TAG
        cur_tokens.append(Token(form=form, tag=tag))
    flush()

    if not sentences:
        raise ConlluParseError("no sentences found in input", 1)
    return Corpus(tuple(sentences), genre=genre)


def write_conllu(corpus, predicted=None):
    """Render a corpus as CoNLL-U text.

    ``predicted``, when given, is one tag sequence per sentence and is written
    to the MISC column as ``PredXPOS=<tag>``; gold XPOS stays in column 5.
    """
    if predicted is not None and len(predicted) != len(corpus.sentences):
        raise ShapeMismatchError(
            "predictions cover {} sentences, corpus has {}".format(
                len(predicted), len(corpus.sentences)
            )
        )
    lines = []
    prev_doc = None
    for si, sent in enumerate(corpus.sentences):
        tags = None
        if predicted is not None:
            tags = predicted[si]
            if len(tags) != len(sent):
                raise ShapeMismatchError(
                    "prediction length {} != sentence length {} for sentence {}".format(
                        len(tags), len(sent), sent.sent_id
                    )
                )
        if sent.doc_id != prev_doc:
            lines.append("# newdoc id = {}".format(sent.doc_id))
            prev_doc = sent.doc_id
        lines.append("# sent_id = {}".format(sent.sent_id))
        for i, tok in enumerate(sent.tokens):
            misc = "PredXPOS={}".format(tags[i]) if tags is not None else "_"
            lines.append(
                "\t".join(
                    [str(i + 1), tok.form, "_", "_", tok.tag, "_", "_", "_", "_", misc]
                )
            )
        lines.append("")
    return "\n".join(lines) + "\n"


def read_predictions(text, genre="pred"):
    """Read tag sequences from a CoNLL-U file.

    Uses ``PredXPOS=`` in MISC when present on a token line, the XPOS column
    otherwise. Returns (corpus, tag sequences mirroring its sentences).
    """
    corpus = parse_conllu(text, genre=genre, allow_missing_xpos=True)
    sequences = [list(s.tags()) for s in corpus.sentences]
    # Second pass for MISC overrides; reuse the sentence segmentation above.
    si, ti = 0, 0
    for raw in text.splitlines():
        line = raw.rstrip("\n")
        if not line.strip():
            if ti > 0:
                si += 1
                ti = 0
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if "-" in cols[0] or "." in cols[0]:
            continue
        if len(cols) >= 10:
            for part in cols[9].split("|"):
                if part.startswith("PredXPOS="):
                    sequences[si][ti] = part[len("PredXPOS="):]
        ti += 1
    return corpus, sequences


@dataclass(frozen=True)
class SplitSpec:
    unit: str = "document"  # "document" or "sentence"
    sizes: tuple[int, int, int] = (0, 0, 0)  # target token counts (train, dev, test)
    seed: int = 1

    def __post_init__(self):
        if self.unit not in ("document", "sentence"):
            raise StacktagError("split unit must be 'document' or 'sentence'")
        if any(s < 0 for s in self.sizes) or sum(self.sizes) <= 0:
            raise StacktagError("split sizes must be non-negative with a positive sum")


def make_splits(corpus, spec):
    """Deterministically partition a corpus into (train, dev, test).

    Units (documents by default) are shuffled with the SplitSpec seed and assigned
    greedily to fill each split's share of the corpus; documents are atomic,
    so achieved sizes land within one unit of the scaled targets. The three
    splits partition the corpus exactly.
    """
    if spec.unit == "document":
        units = []
        by_doc = {}
        for s in corpus.sentences:
            if s.doc_id not in by_doc:
                by_doc[s.doc_id] = []
                units.append(s.doc_id)
            by_doc[s.doc_id].append(s)
        unit_sents = [by_doc[d] for d in units]
    else:
        unit_sents = [[s] for s in corpus.sentences]

    nonzero = sum(1 for s in spec.sizes if s > 0)
    if len(unit_sents) < nonzero:
        raise StacktagError(
            "corpus has {} {} units but {} nonzero splits were requested".format(
                len(unit_sents), spec.unit, nonzero
            )
        )

    rng = random.Random(spec.seed)
    order = list(range(len(unit_sents)))
    rng.shuffle(order)

    total = corpus.token_count
    share = sum(spec.sizes)
    targets = [total * s / share for s in spec.sizes]

    buckets = [[], [], []]
    counts = [0, 0, 0]
    queue = [unit_sents[i] for i in order]
    for split_idx in range(3):
        remaining_nonzero = sum(1 for j in range(split_idx + 1, 3) if spec.sizes[j] > 0)
        if split_idx == 2:
            buckets[2].extend(queue)
            counts[2] += sum(len(s) for u in queue for s in u)
            queue = []
            break
        while queue and counts[split_idx] < targets[split_idx]:
            if len(queue) <= remaining_nonzero:
                break
            unit = queue.pop(0)
            buckets[split_idx].append(unit)
            counts[split_idx] += sum(len(s) for s in unit)

    def build(units_list):
        sents = [s for u in units_list for s in u]
        return Corpus(tuple(sents), genre=corpus.genre, tagset=corpus.tagset)

    return build(buckets[0]), build(buckets[1]), build(buckets[2])


def split_manifest(train, dev, test, unit="document"):
    """Render the split assignment as ``unit_id<TAB>split`` lines."""
    lines = []
    for name, part in (("train", train), ("dev", dev), ("test", test)):
        seen = set()
        for s in part.sentences:
            key = s.doc_id if unit == "document" else "{}/{}".format(s.doc_id, s.sent_id)
            if key in seen:
                continue
            seen.add(key)
            lines.append("{}\t{}".format(key, name))
    return "\n".join(lines) + "\n"


def concat(corpora, genre_label):
    """Concatenate corpora in list order under a new genre label."""
    if not corpora:
        raise StacktagError("cannot concatenate an empty list of corpora")
    sentences = []
    seen = set()
    for c in corpora:
        for s in c.sentences:
            key = (s.doc_id, s.sent_id)
            if key in seen:
                # Synthesized ids from different source files may collide;
                # qualify with the source genre to keep ids unique.
                key = ("{}:{}".format(c.genre, s.doc_id), s.sent_id)
                s = Sentence(s.tokens, doc_id=key[0], sent_id=s.sent_id)
            seen.add(key)
            sentences.append(s)
    tags = set()
    for c in corpora:
        tags.update(c.tagset.tags)
    return Corpus(tuple(sentences), genre=genre_label, tagset=TagSet(tags))


def vocabulary(corpus):
    """Exact case-sensitive set of surface forms in the corpus."""
    return {t.form for s in corpus.sentences for t in s.tokens}

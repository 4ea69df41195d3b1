"""Evaluation: per-token / full-sentence accuracy, known-unknown breakdowns,
confusion pairs and heuristic error categories.

Accuracies are kept as exact rationals internally; rendering to the familiar
two-decimal percentages happens only at report time (half-up rounding).
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .errors import ShapeMismatchError, StacktagError
from .shapes import has_elongation, is_emoticon

ERROR_CATEGORIES = (
    "emoticon",
    "elongation",
    "lowercase-proper",
    "abbreviation",
    "foreign",
    "other",
)


@dataclass(frozen=True)
class EvalResult:
    per_token: Fraction
    full_sentence: Fraction
    token_count: int
    sentence_count: int
    known_count: int
    known_acc: Fraction | None  # None when no known tokens
    unknown_count: int
    unknown_acc: Fraction | None
    confusions: tuple  # (((gold, pred), count), ...) sorted by count desc


def _check_shape(gold, pred):
    if len(pred) != len(gold.sentences):
        raise ShapeMismatchError(
            "predictions cover {} sentences, gold has {}".format(len(pred), len(gold.sentences))
        )
    for sent, tags in zip(gold.sentences, pred):
        if len(tags) != len(sent):
            raise ShapeMismatchError(
                "prediction length {} != sentence length {} for sentence {}".format(
                    len(tags), len(sent), sent.sent_id
                )
            )


def evaluate(gold, pred, train_vocab):
    """Score predictions against a gold corpus.

    A token is known iff its surface form occurs in ``train_vocab``
    (case-sensitive). Confusion pairs exclude the diagonal and are ranked by
    count descending, ties by (gold, pred).
    """
    _check_shape(gold, pred)
    tokens = 0
    correct = 0
    perfect_sentences = 0
    known = [0, 0]  # count, correct
    unknown = [0, 0]
    confusion = {}
    for sent, tags in zip(gold.sentences, pred):
        sent_ok = True
        for tok, ptag in zip(sent.tokens, tags):
            tokens += 1
            hit = tok.tag == ptag
            if hit:
                correct += 1
            else:
                sent_ok = False
                key = (tok.tag, ptag)
                confusion[key] = confusion.get(key, 0) + 1
            bucket = known if tok.form in train_vocab else unknown
            bucket[0] += 1
            bucket[1] += int(hit)
        if sent_ok:
            perfect_sentences += 1

    ranked = tuple(
        sorted(confusion.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
    )
    return EvalResult(
        per_token=Fraction(correct, tokens),
        full_sentence=Fraction(perfect_sentences, len(gold.sentences)),
        token_count=tokens,
        sentence_count=len(gold.sentences),
        known_count=known[0],
        known_acc=Fraction(known[1], known[0]) if known[0] else None,
        unknown_count=unknown[0],
        unknown_acc=Fraction(unknown[1], unknown[0]) if unknown[0] else None,
        confusions=ranked,
    )


def categorize_token(form, gold_tag, pred_tag):
    """First matching heuristic category for one mistagged token."""
    if is_emoticon(form):
        return "emoticon"
    if has_elongation(form):
        return "elongation"
    if gold_tag in ("NNP", "NNPS") and form[:1].islower():
        return "lowercase-proper"
    if form.isupper() and form.isalpha() and 2 <= len(form) <= 5 and pred_tag == "NNP":
        return "abbreviation"
    if gold_tag == "FW":
        return "foreign"
    return "other"


def categorize_errors(gold, pred):
    """Histogram of error categories over all mistagged tokens."""
    _check_shape(gold, pred)
    hist = {c: 0 for c in ERROR_CATEGORIES}
    for sent, tags in zip(gold.sentences, pred):
        for tok, ptag in zip(sent.tokens, tags):
            if tok.tag != ptag:
                hist[categorize_token(tok.form, tok.tag, ptag)] += 1
    return hist


def format_pct(value):
    """Render a fraction as a two-decimal percentage, half-up; None -> NA."""
    if value is None:
        return "NA"
    dec = Decimal(value.numerator) / Decimal(value.denominator) * 100
    return str(dec.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def compare_models(results):
    """TSV comparison table across models evaluated on the same gold corpus.

    Rows sorted by per-token accuracy descending; ties keep name order.
    """
    if not results:
        raise StacktagError("no results to compare")
    counts = {r.token_count for r in results.values()}
    if len(counts) > 1:
        raise ShapeMismatchError(
            "results were computed on different gold corpora (token counts {})".format(
                sorted(counts)
            )
        )
    lines = ["model\tper_token\tfull_sentence\tknown_acc\tunknown_acc"]
    for name in sorted(results, key=lambda n: (-results[n].per_token, n)):
        r = results[name]
        lines.append(
            "\t".join(
                [
                    name,
                    format_pct(r.per_token),
                    format_pct(r.full_sentence),
                    format_pct(r.known_acc),
                    format_pct(r.unknown_acc),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def error_dump(gold, pred):
    """Per-token error rows: doc, sent, position, form, gold, pred, category."""
    _check_shape(gold, pred)
    lines = ["doc_id\tsent_id\tposition\tform\tgold\tpred\tcategory"]
    for sent, tags in zip(gold.sentences, pred):
        for i, (tok, ptag) in enumerate(zip(sent.tokens, tags)):
            if tok.tag != ptag:
                lines.append(
                    "\t".join(
                        [
                            sent.doc_id,
                            sent.sent_id,
                            str(i),
                            tok.form,
                            tok.tag,
                            ptag,
                            categorize_token(tok.form, tok.tag, ptag),
                        ]
                    )
                )
    return "\n".join(lines) + "\n"

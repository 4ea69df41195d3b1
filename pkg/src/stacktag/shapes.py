"""Surface-shape classifiers shared by the tagger features and the error analysis."""

import re

# Repeated-character patterns: "soooo", "NANANANA", "!!!" -- a unit of one or
# more characters occurring at least three times in a row.
_ELONGATION_RE = re.compile(r"(.+?)\1\1")

# "Eye" characters that anchor an emoticon; kept narrow to avoid firing on
# ordinary words and abbreviations.
_EMO_EYES = set(":;=8^")
_EMO_BODY = set(":;=8^()[]{}<>|\\/-_~*'\"oOpPdDcC3xXvVsS.")


def is_emoticon(form):
    """True for punctuation/letter mixes like ":)", ";-)", "D:>" or "^^"."""
    if len(form) < 2:
        return False
    if form.isalnum():
        return False
    if not any(c in _EMO_EYES for c in form):
        return False
    return all(c in _EMO_BODY for c in form)


def has_elongation(form):
    """True when a character group repeats three or more times in a row."""
    return _ELONGATION_RE.search(form) is not None


def token_shape(form, max_chars=8):
    """Coarse character-class shape of a token.

    Emoticons collapse to a single class; otherwise each character maps to
    x (lower), X (upper), d (digit) or itself (punctuation), truncated at
    ``max_chars`` with a "+" marker.
    """
    if is_emoticon(form):
        return "punct-emo"
    out = []
    for c in form[:max_chars]:
        if c.islower():
            out.append("x")
        elif c.isupper():
            out.append("X")
        elif c.isdigit():
            out.append("d")
        else:
            out.append(c)
    if len(form) > max_chars:
        out.append("+")
    return "".join(out)

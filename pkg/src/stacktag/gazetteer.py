"""Gazetteer lookups producing n-hot entity-type feature vectors.

Each token is looked up under three casing variants (as-is, lowercased,
first-letter-capitalized); each variant contributes one block of bits over
the knowledge base's entity-type inventory, so which casing matched stays
visible to the meta-learner.
"""

import logging

from .errors import KBParseError

log = logging.getLogger(__name__)


class KnowledgeBase:
    """Immutable map from surface string to a set of entity types."""

    def __init__(self, entries, type_inventory):
        self.entries = {k: frozenset(v) for k, v in entries.items()}
        self.type_inventory = tuple(sorted(type_inventory))
        self._type_index = {t: i for i, t in enumerate(self.type_inventory)}
        for surface, types in self.entries.items():
            unknown = types - set(self.type_inventory)
            if unknown:
                raise KBParseError(
                    "entry {!r} has types outside the inventory: {}".format(surface, unknown), 0
                )

    @property
    def vector_length(self):
        return 3 * len(self.type_inventory)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, surface):
        return surface in self.entries


def load_kb(text):
    """Parse gazetteer TSV: one ``surface<TAB>Type1,Type2,...`` per line.

    Duplicate surfaces merge their type sets. Multiword surfaces are skipped
    with a warning (lookups are per-token).
    """
    entries = {}
    types_seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if "\t" not in line:
            raise KBParseError("expected surface<TAB>types", lineno)
        surface, _, type_field = line.partition("\t")
        types = [t.strip() for t in type_field.split(",") if t.strip()]
        if not types:
            raise KBParseError("empty type list for {!r}".format(surface), lineno)
        if " " in surface:
            log.warning("skipping multiword gazetteer entry %r (line %d)", surface, lineno)
            continue
        entries.setdefault(surface, set()).update(types)
        types_seen.update(types)
    return KnowledgeBase(entries, types_seen)


def lookup_variants(token):
    """The three lookup keys: as-is, lowercased, first-letter-capitalized."""
    if not token:
        raise ValueError("token must be non-empty")
    capitalized = token[0].upper() + token[1:]
    return (token, token.lower(), capitalized)


def entity_features(kb, token):
    """n-hot vector over (variant, entity type); zero block on lookup miss."""
    n = len(kb.type_inventory)
    bits = [0] * (3 * n)
    for block, variant in enumerate(lookup_variants(token)):
        types = kb.entries.get(variant)
        if not types:
            continue
        base = block * n
        for t in types:
            bits[base + kb._type_index[t]] = 1
    return bits


EMPTY_KB = KnowledgeBase({}, ())

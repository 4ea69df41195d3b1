import random

import pytest

from stacktag.conllu import Corpus, Sentence, TagSet, Token

TWO_SENTENCE_CONLLU = """\
# newdoc id = doc1
# sent_id = s1
1\tthe\t_\t_\t.\t_\t_\t_\t_\t_
2\tcat\t_\t_\tNN\t_\t_\t_\t_\t_
3\tsits\t_\t_\tVBZ\t_\t_\t_\t_\t_

# sent_id = s2
1\tdog\t_\t_\tNN\t_\t_\t_\t_\t_
2\truns\t_\t_\tVBZ\t_\t_\t_\t_\t_
3\t.\t_\t_\t.\t_\t_\t_\t_\t_
"""


@pytest.fixture
def two_sentence_corpus():
    from stacktag.conllu import parse_conllu

    return parse_conllu(TWO_SENTENCE_CONLLU, genre="fixture")


def make_corpus(sentences, genre="synth", tagset=None):
    sents = []
    for si, sent in enumerate(sentences):
        toks = tuple(Token(form, tag) for form, tag in sent)
        sents.append(Sentence(toks, doc_id="d{}".format(si // 5), sent_id="s{}".format(si)))
    return Corpus(tuple(sents), genre=genre, tagset=tagset)


def separable_corpus(n_sentences=100, n_forms=60, tags=("DT", "JJ", "NN", "RB", "VB"),
                     seed=0, genre="synth"):
    """Corpus where each surface form maps to exactly one tag."""
    rng = random.Random(seed)
    form_tag = {"w{}".format(i): tags[i % len(tags)] for i in range(n_forms)}
    forms = list(form_tag)
    sentences = []
    for _ in range(n_sentences):
        picks = rng.sample(forms, rng.randint(2, 7))
        sentences.append([(f, form_tag[f]) for f in picks])
    return make_corpus(sentences, genre=genre), form_tag


def random_corpus(rng, max_sentences=20, max_len=30, max_tags=15, genre="rand"):
    """Arbitrary corpus for oracle-equivalence checks."""
    n_tags = rng.randint(2, max_tags)
    tags = ["T{}".format(i) for i in range(n_tags)]
    n_sents = rng.randint(1, max_sentences)
    sentences = []
    for _ in range(n_sents):
        length = rng.randint(1, max_len)
        sentences.append(
            [("f{}".format(rng.randint(0, 40)), rng.choice(tags)) for _ in range(length)]
        )
    return make_corpus(sentences, genre=genre, tagset=TagSet(tags))


def random_predictions(rng, corpus):
    tags = list(corpus.tagset.tags)
    return [[rng.choice(tags) for _ in s.tokens] for s in corpus.sentences]


class MockTagger:
    """Minimal object honoring the base-model contract, for ensemble tests."""

    def __init__(self, fn, tagset):
        self._fn = fn
        self.tagset = TagSet(tagset)

    def predict(self, sentence):
        return [self._fn(tok.form, tok.tag) for tok in sentence.tokens]


SMOKE_TAGS = ("DT", "NN", "NNP", "UH", "VB")


def write_smoke_fixture(tmp_path, n_sentences=40, seed=7):
    """Three tiny synthetic genre files + gazetteer + pipeline config.

    Genres share a vocabulary; the 'chat' genre is the split target.
    """
    rng = random.Random(seed)
    form_tag = {}
    for i in range(50):
        form_tag["tok{}".format(i)] = SMOKE_TAGS[i % len(SMOKE_TAGS)]
    entity_forms = ["Ent{}".format(i) for i in range(8)]
    for f in entity_forms:
        form_tag[f] = "NNP"
    forms = list(form_tag)

    data_dir = tmp_path / "data"
    data_dir.mkdir(exist_ok=True)
    genre_paths = {}
    for genre in ("chat", "wiki", "news"):
        lines = []
        for si in range(n_sentences):
            lines.append("# newdoc id = {}-{}".format(genre, si // 4))
            lines.append("# sent_id = {}-{}".format(genre, si))
            picks = rng.sample(forms, 5)
            for ti, f in enumerate(picks):
                lines.append(
                    "\t".join([str(ti + 1), f, "_", "_", form_tag[f], "_", "_", "_", "_", "_"])
                )
            lines.append("")
        path = data_dir / "{}.conllu".format(genre)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        genre_paths[genre] = path

    kb_path = data_dir / "kb.tsv"
    kb_path.write_text(
        "".join("{}\tPerson\n".format(f) for f in entity_forms), encoding="utf-8"
    )

    config_path = tmp_path / "config.ini"
    config_path.write_text(
        "[genres]\n"
        + "".join("{} = {}\n".format(g, p) for g, p in genre_paths.items())
        + "\n[pipeline]\n"
        "target = chat\n"
        "kb = {}\n".format(kb_path)
        + "output_dir = {}\n".format(tmp_path / "out")
        + "\n[split]\n"
        "unit = document\n"
        "train = 120\n"
        "dev = 40\n"
        "test = 40\n"
        "seed = 1\n"
        "\n[base]\n"
        "epochs = 5\n"
        "seed = 1\n"
        "\n[meta]\n"
        "rounds = 15\n"
        "max_depth = 3\n"
        "learning_rate = 0.3\n"
        "seed = 1\n",
        encoding="utf-8",
    )
    return config_path

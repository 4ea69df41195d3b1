"""Genre-stacked POS tagging toolkit.

Per-genre averaged-perceptron base taggers, gazetteer entity features, a
gradient-boosted stacking meta-learner, and evaluation/ablation reporting
over CoNLL-U corpora.
"""

__version__ = "0.1.0"

from .conllu import Corpus, Sentence, SplitSpec, TagSet, Token  # noqa: F401
from .errors import StacktagError  # noqa: F401

"""Gradient-boosted decision trees over binary feature vectors.

Multiclass boosting with one regression tree per class per round, fit to the
softmax cross-entropy gradient with Newton leaf values. Features are binary,
so a split is just a feature index; split search is exact and greedy, with
gain ties broken by the lowest feature index. There is no subsampling, so
training is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


@dataclass(frozen=True)
class MetaHyperparams:
    rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.3
    seed: int = 1


class _Node:
    __slots__ = ("feature", "left", "right", "value")

    def __init__(self, feature=None, left=None, right=None, value=0.0):
        self.feature = feature
        self.left = left
        self.right = right
        self.value = value

    @property
    def is_leaf(self):
        return self.feature is None

    def to_tuple(self):
        if self.is_leaf:
            return ("leaf", self.value)
        return ("split", self.feature, self.left.to_tuple(), self.right.to_tuple())

    @classmethod
    def from_tuple(cls, t):
        if t[0] == "leaf":
            return cls(value=t[1])
        return cls(feature=t[1], left=cls.from_tuple(t[2]), right=cls.from_tuple(t[3]))


def _leaf_value(g_sum, h_sum, reg_lambda):
    return -g_sum / (h_sum + reg_lambda)


def _build_tree(X, g, h, idx, depth, max_depth, reg_lambda):
    g_sum = float(g[idx].sum())
    h_sum = float(h[idx].sum())
    if depth >= max_depth or idx.size < 2:
        return _Node(value=_leaf_value(g_sum, h_sum, reg_lambda))

    Xs = X[idx]
    g_right = Xs.T.astype(np.float64) @ g[idx]
    h_right = Xs.T.astype(np.float64) @ h[idx]
    g_left = g_sum - g_right
    h_left = h_sum - h_right
    count_right = Xs.sum(axis=0)

    gain = (
        g_left**2 / (h_left + reg_lambda)
        + g_right**2 / (h_right + reg_lambda)
        - g_sum**2 / (h_sum + reg_lambda)
    )
    invalid = (count_right == 0) | (count_right == idx.size)
    gain[invalid] = -np.inf

    best = int(np.argmax(gain))  # lowest index on ties
    if not np.isfinite(gain[best]) or gain[best] <= _EPS:
        return _Node(value=_leaf_value(g_sum, h_sum, reg_lambda))

    mask = X[idx, best] == 1
    right_idx = idx[mask]
    left_idx = idx[~mask]
    return _Node(
        feature=best,
        left=_build_tree(X, g, h, left_idx, depth + 1, max_depth, reg_lambda),
        right=_build_tree(X, g, h, right_idx, depth + 1, max_depth, reg_lambda),
    )


def _tree_predict(node, X, idx, out):
    if node.is_leaf:
        out[idx] = node.value
        return
    mask = X[idx, node.feature] == 1
    _tree_predict(node.right, X, idx[mask], out)
    _tree_predict(node.left, X, idx[~mask], out)


class GBDTClassifier:
    """Multiclass boosted trees behind a plain fit/predict contract."""

    def __init__(self, n_classes, hyperparams=MetaHyperparams(), reg_lambda=1.0):
        self.n_classes = n_classes
        self.hyperparams = hyperparams
        self.reg_lambda = reg_lambda
        self.trees = []  # one list of _Node per round, indexed by class

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.uint8)
        y = np.asarray(y, dtype=np.int64)
        n = X.shape[0]
        K = self.n_classes
        Y = np.zeros((n, K), dtype=np.float64)
        Y[np.arange(n), y] = 1.0
        scores = np.zeros((n, K), dtype=np.float64)
        all_idx = np.arange(n)

        for _ in range(self.hyperparams.rounds):
            # softmax probabilities
            z = scores - scores.max(axis=1, keepdims=True)
            e = np.exp(z)
            P = e / e.sum(axis=1, keepdims=True)
            round_trees = []
            for k in range(K):
                g = P[:, k] - Y[:, k]
                h = P[:, k] * (1.0 - P[:, k])
                tree = _build_tree(
                    X, g, h, all_idx, 0, self.hyperparams.max_depth, self.reg_lambda
                )
                round_trees.append(tree)
                out = np.zeros(n, dtype=np.float64)
                _tree_predict(tree, X, all_idx, out)
                scores[:, k] += self.hyperparams.learning_rate * out
            self.trees.append(round_trees)
        return self

    def decision_scores(self, X):
        X = np.ascontiguousarray(X, dtype=np.uint8)
        n = X.shape[0]
        scores = np.zeros((n, self.n_classes), dtype=np.float64)
        all_idx = np.arange(n)
        out = np.zeros(n, dtype=np.float64)
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                out[:] = 0.0
                _tree_predict(tree, X, all_idx, out)
                scores[:, k] += self.hyperparams.learning_rate * out
        return scores

    def predict(self, X):
        """Class ids; argmax picks the lowest class index on exact ties."""
        return np.argmax(self.decision_scores(X), axis=1)

    def to_payload(self):
        return {
            "n_classes": self.n_classes,
            "hyperparams": (
                self.hyperparams.rounds,
                self.hyperparams.max_depth,
                self.hyperparams.learning_rate,
                self.hyperparams.seed,
            ),
            "reg_lambda": self.reg_lambda,
            "trees": [[t.to_tuple() for t in row] for row in self.trees],
        }

    @classmethod
    def from_payload(cls, payload):
        rounds, max_depth, lr, seed = payload["hyperparams"]
        clf = cls(
            payload["n_classes"],
            MetaHyperparams(rounds=rounds, max_depth=max_depth, learning_rate=lr, seed=seed),
            reg_lambda=payload["reg_lambda"],
        )
        clf.trees = [[_Node.from_tuple(t) for t in row] for row in payload["trees"]]
        return clf

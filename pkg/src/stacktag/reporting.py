"""Figure rendering for the report path: known/unknown bars and the most
common confusion pairs, written as PNG next to the delimited reports."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def plot_known_unknown(results, path):
    """Grouped bars: per-model accuracy on known vs unknown tokens."""
    names = sorted(results)
    known = [float(results[n].known_acc or 0) * 100 for n in names]
    unknown = [float(results[n].unknown_acc or 0) * 100 for n in names]
    x = np.arange(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(names)), 4))
    ax.bar(x - width / 2, known, width, label="Known", color="tab:blue")
    ax.bar(x + width / 2, unknown, width, label="Unknown", color="tab:orange")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_confusion_pairs(results, path, top=10):
    """Horizontal bars of the most frequent gold-as-predicted pairs.

    Counts are summed across all models in ``results``.
    """
    totals = {}
    for r in results.values():
        for (g, p), count in r.confusions:
            totals[(g, p)] = totals.get((g, p), 0) + count
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    labels = ["{} as {}".format(g, p) for (g, p), _ in ranked]
    counts = [c for _, c in ranked]
    fig, ax = plt.subplots(figsize=(6, max(3, 0.4 * len(ranked) + 1)))
    y = np.arange(len(ranked))
    ax.barh(y, counts, color="tab:red")
    ax.set_yticks(y)
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    ax.set_xlabel("Error count (all models)")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_category_histogram(hist, path):
    """Bar chart of the heuristic error-category histogram."""
    names = list(hist)
    counts = [hist[n] for n in names]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(np.arange(len(names)), counts, color="tab:purple")
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("Errors")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path

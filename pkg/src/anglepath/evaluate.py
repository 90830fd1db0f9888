"""Accuracy scoring and within/between-class distance gaps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

_EXHAUSTIVE_MAX = 6


def confusion(pred, truth):
    """Count matrix C[i, j] = #points with pred label i and truth label j,
    over the sorted unique labels of each side."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same length")
    up, pi = np.unique(pred, return_inverse=True)
    ut, ti = np.unique(truth, return_inverse=True)
    counts = np.zeros((up.size, ut.size), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return counts, up, ut


def accuracy(pred, truth):
    """Fraction of points matched under the best label bijection.

    Exhaustive over permutations for small label alphabets, optimal
    assignment otherwise (both are exact).
    """
    counts, up, ut = confusion(pred, truth)
    n = np.asarray(pred).shape[0]
    if n == 0:
        raise ValueError("empty label arrays")
    k = max(up.size, ut.size)
    square = np.zeros((k, k), dtype=np.int64)
    square[:up.size, :ut.size] = counts
    if k <= _EXHAUSTIVE_MAX:
        best = max(sum(square[i, p] for i, p in enumerate(perm))
                   for perm in itertools.permutations(range(k)))
    else:
        rows, cols = linear_sum_assignment(square, maximize=True)
        best = int(square[rows, cols].sum())
    return best / n


def simplex_classes(simplices, truth):
    """Per-simplex class: the common truth label of its vertices, or -1
    when the vertices span more than one class."""
    vertex_labels = truth[simplices]
    pure = (vertex_labels == vertex_labels[:, :1]).all(axis=1)
    return np.where(pure, vertex_labels[:, 0], -1)


@dataclass
class GapReport:
    wlapd: float            # largest weight joining two pure same-class parts
    blapd: float            # smallest between-class distance over pure pairs
    wlapd_conn: float = 0.0  # largest distance over connected same-class pairs
    per_class: dict = field(default_factory=dict)
    fragments: dict = field(default_factory=dict)  # final components per class
    mixed_count: int = 0


def gap_report(dendrogram, classes):
    """Within- and between-class minimax distance extremes in one sweep.

    Tracks the pure-class counts of every component. ``wlapd`` for class c
    is the weight of the last event that merges two pure class-c fragments
    (components containing only class-c simplices); once a component
    absorbs a mixed or other-class simplex its later merges no longer
    count, so stragglers that rejoin their class only through foreign
    bridges do not inflate the figure. ``wlapd_conn`` drops the purity
    restriction: the last event joining any two components that both hold
    class c, which equals the definitional maximum of the pairwise minimax
    distance over connected same-class pairs. ``blapd`` is the weight of
    the first event that puts two different pure classes in one component
    (+inf when the classes stay separated), the definitional minimum over
    cross-class pairs.

    ``fragments`` reports how many final components hold each class, so 1
    means the class ends up fully connected (possibly via foreign paths).
    """
    from .dendrogram import DisjointSet

    classes = np.asarray(classes)
    n = dendrogram.n_nodes
    if classes.shape[0] != n:
        raise ValueError("classes length must match dendrogram nodes")
    mixed_count = int((classes < 0).sum())
    labels = np.unique(classes[classes >= 0])
    per_class = {int(c): 0.0 for c in labels}
    per_class_conn = {int(c): 0.0 for c in labels}
    blapd = float("inf")
    dsu = DisjointSet(n)
    tallies = {}
    pure = {}           # root -> component holds no mixed simplex
    for i in range(n):
        if classes[i] >= 0:
            tallies[i] = {int(classes[i]): 1}
            pure[i] = True
        else:
            pure[i] = False
    for w, a, b in zip(dendrogram.weights, dendrogram.root_a,
                       dendrogram.root_b):
        ra, rb = dsu.find(a), dsu.find(b)
        root = dsu.union(ra, rb)
        pa = pure.pop(ra)
        pb = pure.pop(rb)
        pure[root] = pa and pb
        ta = tallies.pop(ra, None)
        tb = tallies.pop(rb, None)
        if ta is None and tb is None:
            continue
        if ta is not None and tb is not None:
            if np.isinf(blapd) and len(ta.keys() | tb.keys()) >= 2:
                blapd = float(w)
            if pa and pb and len(ta) == 1 and len(tb) == 1:
                (ca,) = ta
                if ca in tb:
                    per_class[ca] = float(w)  # last pure-pure join wins
            if len(ta) < len(tb):
                ta, tb = tb, ta
            for c, cnt in tb.items():
                if c in ta:
                    per_class_conn[c] = float(w)  # last same-class join
                    ta[c] += cnt
                else:
                    ta[c] = cnt
        elif ta is None:
            ta = tb
        tallies[root] = ta
    fragments = {c: 0 for c in per_class}
    for tally in tallies.values():
        for c in tally:
            fragments[c] += 1
    wlapd = max(per_class.values()) if per_class else 0.0
    wlapd_conn = max(per_class_conn.values()) if per_class_conn else 0.0
    return GapReport(wlapd=wlapd, blapd=blapd, wlapd_conn=wlapd_conn,
                     per_class=per_class, fragments=fragments,
                     mixed_count=mixed_count)

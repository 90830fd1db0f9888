"""Exact minimax path distances as union-find merge events."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DisjointSet:
    """Array-backed union-find with path halving and union by size."""

    __slots__ = ("parent", "size")

    def __init__(self, n):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        """Merge the sets of a and b; returns the new root or -1 if same."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return -1
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


@dataclass
class ScaleProfile:
    scales: np.ndarray      # k ascending thresholds
    counts: np.ndarray      # nontrivial-component count per scale
    cutoff: int             # components must exceed this size to count


class MergeDendrogram:
    """Merge events of an ascending edge sweep; the single-linkage
    structure of the minimax path metric.

    Events store (weight, root_a, root_b, merged size) where the roots are
    the union-find representatives just before the merge; replaying the
    events with a fresh union-find reconstructs components at any
    threshold.
    """

    def __init__(self, n_nodes, weights, root_a, root_b, sizes):
        self.n_nodes = int(n_nodes)
        self.weights = weights
        self.root_a = root_a
        self.root_b = root_b
        self.sizes = sizes

    @property
    def n_events(self):
        return self.weights.shape[0]

    def dump(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for w, a, b, s in zip(self.weights, self.root_a, self.root_b,
                                  self.sizes):
                fh.write("%.17g %d %d %d\n" % (w, a, b, s))

    # ---- queries ---------------------------------------------------------

    def query_pairs(self, pairs):
        """Minimax distance for each (i, j) pair; +inf when never joined."""
        n = self.n_nodes
        out = np.full(len(pairs), np.inf)
        pending = {}
        node_queries = {}
        for qid, (i, j) in enumerate(pairs):
            if not (0 <= i < n and 0 <= j < n):
                raise IndexError(f"node id out of range in pair {(i, j)}")
            if i == j:
                out[qid] = 0.0
            else:
                pending[qid] = 2
                node_queries.setdefault(i, []).append(qid)
                node_queries.setdefault(j, []).append(qid)
        if not pending:
            return out
        dsu = DisjointSet(n)
        marks = {}
        for node, qids in node_queries.items():
            counter = marks.setdefault(node, {})
            for qid in qids:
                counter[qid] = counter.get(qid, 0) + 1
        for w, a, b in zip(self.weights, self.root_a, self.root_b):
            ra, rb = dsu.find(a), dsu.find(b)
            root = dsu.union(ra, rb)
            ma = marks.pop(ra, None)
            mb = marks.pop(rb, None)
            if ma is None and mb is None:
                continue
            if ma is None or (mb is not None and len(mb) > len(ma)):
                ma, mb = mb, ma
            if mb is not None:
                for qid, cnt in mb.items():
                    total = ma.get(qid, 0) + cnt
                    if total >= 2 and qid in pending:
                        out[qid] = w
                        del pending[qid]
                    ma[qid] = total
            marks[root] = ma
            if not pending:
                break
        return out

    def query(self, i, j):
        return float(self.query_pairs([(int(i), int(j))])[0])

    # ---- kNN distances ---------------------------------------------------

    def knn(self, kappa):
        """Per-node minimax distance to its kappa-th nearest node.

        Equals the smallest event weight at which the node's component
        reaches kappa+1 members; +inf when the final component stays at or
        below kappa members.
        """
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        n = self.n_nodes
        vals = np.full(n, np.inf)
        target = kappa + 1
        dsu = DisjointSet(n)
        members = {i: [i] for i in range(n)} if target > 1 else {}
        if target <= 1:
            return np.zeros(n)
        for w, a, b in zip(self.weights, self.root_a, self.root_b):
            ra, rb = dsu.find(a), dsu.find(b)
            ma = members.pop(ra, None)
            mb = members.pop(rb, None)
            root = dsu.union(ra, rb)
            if dsu.size[root] >= target:
                if ma is not None:
                    vals[ma] = w
                if mb is not None:
                    vals[mb] = w
            else:
                if len(ma) < len(mb):
                    ma, mb = mb, ma
                ma.extend(mb)
                members[root] = ma
        return vals

    # ---- quantized component profiles -----------------------------------

    def scale_profile(self, k, delta, nu):
        """Nontrivial-component counts at k geometric thresholds.

        Thresholds run from delta to pi/2 inclusive; a component counts as
        nontrivial when its size exceeds max(1, ceil(nu * n_nodes)).
        """
        if k < 2:
            raise ValueError("k must be >= 2")
        scales = np.geomspace(delta, math.pi / 2, num=k)
        cutoff = max(1, math.ceil(nu * self.n_nodes))
        counts = np.empty(k, dtype=int)
        dsu = DisjointSet(self.n_nodes)
        nontrivial = 0 if cutoff >= 1 else self.n_nodes
        ev = 0
        n_events = self.n_events
        for si, t in enumerate(scales):
            while ev < n_events and self.weights[ev] <= t:
                ra = dsu.find(self.root_a[ev])
                rb = dsu.find(self.root_b[ev])
                sa, sb = dsu.size[ra], dsu.size[rb]
                root = dsu.union(ra, rb)
                nontrivial += int(dsu.size[root] > cutoff)
                nontrivial -= int(sa > cutoff) + int(sb > cutoff)
                ev += 1
            counts[si] = nontrivial
        return ScaleProfile(scales=scales, counts=counts, cutoff=cutoff)

    def labels_at(self, t):
        """Connected-component label per node for the subgraph of weights
        <= t (labels are arbitrary but consistent roots)."""
        dsu = DisjointSet(self.n_nodes)
        for w, a, b in zip(self.weights, self.root_a, self.root_b):
            if w > t:
                break
            dsu.union(a, b)
        return np.array([dsu.find(i) for i in range(self.n_nodes)])


def build_dendrogram(graph):
    """Ascending-weight edge sweep recording every successful union.

    Edge ties are broken lexicographically by (i, j) for determinism. The
    minimax distance between two nodes is exactly the weight of the event
    that first joins their components.
    """
    n = graph.n_nodes
    order = np.lexsort((graph.edge_j, graph.edge_i, graph.weight))
    ei = graph.edge_i[order]
    ej = graph.edge_j[order]
    ew = graph.weight[order]
    dsu = DisjointSet(n)
    weights, root_a, root_b, sizes = [], [], [], []
    n_comps = n
    for idx in range(ew.shape[0]):
        ra = dsu.find(ei[idx])
        rb = dsu.find(ej[idx])
        if ra == rb:
            continue
        root = dsu.union(ra, rb)
        weights.append(ew[idx])
        root_a.append(ra)
        root_b.append(rb)
        sizes.append(dsu.size[root])
        n_comps -= 1
        if n_comps == 1:
            break
    return MergeDendrogram(
        n_nodes=n,
        weights=np.asarray(weights, dtype=float),
        root_a=np.asarray(root_a, dtype=np.int64),
        root_b=np.asarray(root_b, dtype=np.int64),
        sizes=np.asarray(sizes, dtype=np.int64),
    )

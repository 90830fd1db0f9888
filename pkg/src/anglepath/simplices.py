"""Candidate simplex enumeration and distortion filtering."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


class EmptyValidSetError(RuntimeError):
    """No simplex survived the distortion filters."""


def regular_volume(d):
    """d-volume of a regular d-simplex with unit edge length."""
    return math.sqrt(d + 1) / (math.factorial(d) * math.sqrt(2.0 ** d))


_GRAM_DEGENERATE = 1e-24


@dataclass
class SimplexSet:
    simplices: np.ndarray   # (m, d+1) int, rows sorted ascending, deduped
    min_edge: np.ndarray    # (m,)
    max_edge: np.ndarray    # (m,)
    d: int
    e: float
    q: float
    r0: float

    def __len__(self):
        return self.simplices.shape[0]

    def dump(self, path):
        np.savetxt(path, self.simplices, fmt="%d")


def _edge_index_pairs(d):
    return np.array(list(itertools.combinations(range(d + 1), 2)), dtype=int)


def enumerate_candidates(graph, d):
    """All (d+1)-subsets with one vertex connected to the remaining d.

    Each point is combined with every d-subset of its annular neighbors;
    rows are canonicalized (sorted ascending) and deduplicated.
    """
    groups = {}
    for center, nbrs in enumerate(graph.neighbors):
        if len(nbrs) >= d:
            groups.setdefault(len(nbrs), []).append(center)
    blocks = []
    for length, centers in groups.items():
        combos = np.array(list(itertools.combinations(range(length), d)),
                          dtype=int)
        nbr = np.stack([graph.neighbors[c] for c in centers])
        cand = nbr[:, combos]                          # (g, nc, d)
        cent = np.asarray(centers, dtype=int)[:, None, None]
        cand = np.concatenate(
            [np.broadcast_to(cent, cand.shape[:2] + (1,)), cand], axis=2)
        blocks.append(cand.reshape(-1, d + 1))
    if not blocks:
        return np.empty((0, d + 1), dtype=int)
    cand = np.concatenate(blocks)
    cand.sort(axis=1)
    return np.unique(cand, axis=0)


def pairwise_edge_lengths(simplices, coords, chunk=200_000):
    """Per-simplex edge lengths, shape (m, C(d+1,2)); computed in chunks."""
    m, dp1 = simplices.shape
    pairs = _edge_index_pairs(dp1 - 1)
    out = np.empty((m, pairs.shape[0]))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        pts = coords[simplices[lo:hi]]                 # (c, d+1, D)
        diff = pts[:, pairs[:, 0], :] - pts[:, pairs[:, 1], :]
        out[lo:hi] = np.linalg.norm(diff, axis=2)
    return out


def simplex_volumes(simplices, coords, chunk=200_000):
    """d-volumes via the Gram determinant on edge vectors from vertex 0."""
    m, dp1 = simplices.shape
    d = dp1 - 1
    out = np.empty(m)
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        pts = coords[simplices[lo:hi]]
        edges = pts[:, 1:, :] - pts[:, :1, :]          # (c, d, D)
        gram = np.einsum("cid,cjd->cij", edges, edges)
        det = np.linalg.det(gram)
        det = np.where(det < _GRAM_DEGENERATE, 0.0, det)
        out[lo:hi] = np.sqrt(det) / math.factorial(d)
    return out


def distortion1(simplex, coords):
    """min pairwise edge / max pairwise edge, in (0, 1]."""
    lengths = pairwise_edge_lengths(np.asarray(simplex, dtype=int)[None, :],
                                    coords)[0]
    mx = lengths.max()
    if mx == 0:
        return 0.0
    return float(lengths.min() / mx)


def distortion2(simplex, coords):
    """vol_d / (V0 * min_edge^d); 0 for degenerate simplices."""
    simplex = np.asarray(simplex, dtype=int)
    d = simplex.shape[0] - 1
    vol = simplex_volumes(simplex[None, :], coords)[0]
    min_edge = pairwise_edge_lengths(simplex[None, :], coords)[0].min()
    if min_edge == 0:
        return 0.0
    return float(vol / (regular_volume(d) * min_edge ** d))


def build_valid_set(graph, cloud, params):
    """Filter candidates by edge-length band [e, e/q] and distortion.

    The annulus only guarantees center-to-neighbor edges exceed e, so all
    pairwise edges are checked explicitly here.
    """
    d, e, q, r0 = params.d, params.e, params.q, params.r0
    cand = enumerate_candidates(graph, d)
    if cand.shape[0] == 0:
        raise EmptyValidSetError("no candidate simplices; increase B or e")
    lengths = pairwise_edge_lengths(cand, cloud.coords)
    mn = lengths.min(axis=1)
    mx = lengths.max(axis=1)
    keep = (mn >= e) & (mx <= e / q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mx > 0, mn / mx, 0.0)
    keep &= ratio >= q
    if r0 > 0:
        vols = simplex_volumes(cand, cloud.coords)
        with np.errstate(divide="ignore", invalid="ignore"):
            d2 = np.where(mn > 0, vols / (regular_volume(d) * mn ** d), 0.0)
        keep &= d2 >= r0
    if not keep.any():
        raise EmptyValidSetError(
            "no simplex survived distortion filtering; loosen q or adjust e")
    return SimplexSet(simplices=cand[keep], min_edge=mn[keep],
                      max_edge=mx[keep], d=d, e=float(e), q=float(q),
                      r0=float(r0))

"""Annular locality graph: B nearest neighbors beyond radius e."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass
class AnnularGraph:
    neighbors: list          # per-point int arrays, each of length <= B
    e: float
    B: int


def build_annular_graph(cloud, e, B):
    """For every point, the B nearest points at distance strictly > e.

    Ties at the B-th neighbor are broken by ascending point index, so the
    result is independent of point insertion order.
    """
    if e <= 0:
        raise ValueError("e must be > 0")
    if B < 1:
        raise ValueError("B must be >= 1")
    coords = cloud.coords
    n = coords.shape[0]
    tree = cKDTree(coords)

    # batch query enough neighbors that most rows find B beyond the annulus
    kq = min(n, B + 16)
    dist, idx = tree.query(coords, k=kq)
    if kq == 1:
        dist = dist[:, None]
        idx = idx[:, None]
    beyond = dist > e
    counts = beyond.sum(axis=1)

    neighbors = []
    for i in range(n):
        di, ii = dist[i], idx[i]
        if counts[i] < B and kq < n:
            # escalate until we either have B candidates or exhaust the cloud
            kcur = kq
            while counts[i] < B and kcur < n:
                kcur = min(n, kcur * 2)
                di, ii = tree.query(coords[i], k=kcur)
                counts[i] = int((di > e).sum())
        mask = di > e
        cand_d = di[mask]
        cand_i = ii[mask]
        if cand_d.size == 0:
            neighbors.append(np.empty(0, dtype=int))
            continue
        take = min(B, cand_d.size)
        # boundary radius for the take-th candidate; re-query the ball so
        # that points tied at that radius are all considered
        r = np.partition(cand_d, take - 1)[take - 1]
        ball = tree.query_ball_point(coords[i], r + 1e-12 * max(r, 1.0))
        ball = np.asarray(ball, dtype=int)
        bd = np.linalg.norm(coords[ball] - coords[i], axis=1)
        keep = bd > e
        ball, bd = ball[keep], bd[keep]
        order = np.lexsort((ball, bd))
        neighbors.append(ball[order][:B])
    return AnnularGraph(neighbors=neighbors, e=float(e), B=int(B))

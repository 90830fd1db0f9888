"""Simplex adjacency, dihedral angles, and angle-based edge weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

_RESIDUAL_TOL = 1e-12
_RANK_TOL = 1e-10
_COS_SNAP = 1e-12


class DegenerateSimplexPair(ValueError):
    """Apex lies in the shared-face span, or the face is rank deficient."""


@dataclass
class SimplexGraph:
    n_nodes: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    weight: np.ndarray
    weight_mode: str

    @property
    def n_edges(self):
        return self.edge_i.shape[0]

    def dump(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for i, j, w in zip(self.edge_i, self.edge_j, self.weight):
                fh.write("%d %d %.17g\n" % (i, j, w))


def _pairs_within_groups(ids, local):
    """All unordered within-group pairs for concatenated sorted groups.

    `ids` is the concatenated member array, `local` the local index of each
    member inside its group (0..len-1). Returns positions (a_pos, b_pos)
    into `ids` with a_pos occurring before b_pos in the same group.
    """
    total = ids.shape[0]
    n_pairs = int(local.sum())
    if n_pairs == 0:
        empty = np.empty(0, dtype=int)
        return empty, empty
    b_pos = np.repeat(np.arange(total), local)
    block_start = np.repeat(np.arange(total) - local, local)
    offsets = np.repeat(np.cumsum(local) - local, local)
    within = np.arange(n_pairs) - offsets
    a_pos = block_start + within
    return a_pos, b_pos


def find_adjacent_pairs(simplices):
    """Pairs of simplices sharing exactly d vertices, with the shared face.

    Buckets every simplex under each of its d+1 faces and pairs within
    buckets. Returns (pair_i, pair_j, faces) with pair_i < pair_j.
    """
    m, dp1 = simplices.shape
    d = dp1 - 1
    if m < 2:
        empty = np.empty(0, dtype=int)
        return empty, empty, np.empty((0, d), dtype=int)
    faces = np.empty((m * dp1, d), dtype=simplices.dtype)
    sim_id = np.empty(m * dp1, dtype=int)
    for drop in range(dp1):
        cols = [c for c in range(dp1) if c != drop]
        faces[drop * m:(drop + 1) * m] = simplices[:, cols]
        sim_id[drop * m:(drop + 1) * m] = np.arange(m)
    order = np.lexsort((sim_id,) + tuple(faces[:, c] for c in range(d - 1, -1, -1)))
    faces = faces[order]
    sim_id = sim_id[order]
    new_group = np.ones(faces.shape[0], dtype=bool)
    new_group[1:] = (faces[1:] != faces[:-1]).any(axis=1)
    group_id = np.cumsum(new_group) - 1
    # local index of each row inside its group
    starts = np.flatnonzero(new_group)
    local = np.arange(faces.shape[0]) - starts[group_id]
    a_pos, b_pos = _pairs_within_groups(sim_id, local)
    return sim_id[a_pos], sim_id[b_pos], faces[b_pos]


def dihedral_angles(simplices, pair_i, pair_j, faces, coords, chunk=200_000):
    """Dihedral angle for each adjacent pair, NaN where degenerate.

    The apex residuals are taken against the centroid of the shared face
    after projecting out the face span.
    """
    d = simplices.shape[1] - 1
    n_pairs = pair_i.shape[0]
    apex_i = simplices[pair_i].sum(axis=1) - faces.sum(axis=1)
    apex_j = simplices[pair_j].sum(axis=1) - faces.sum(axis=1)
    theta = np.empty(n_pairs)
    for lo in range(0, n_pairs, chunk):
        hi = min(n_pairs, lo + chunk)
        fpts = coords[faces[lo:hi]]                  # (c, d, D)
        c = fpts.mean(axis=1)
        vi = coords[apex_i[lo:hi]] - c
        vj = coords[apex_j[lo:hi]] - c
        if d == 1:
            pass                                      # face is a point
        elif d == 2:
            u = fpts[:, 0, :] - fpts[:, 1, :]
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            vi = vi - u * np.einsum("cd,cd->c", u, vi)[:, None]
            vj = vj - u * np.einsum("cd,cd->c", u, vj)[:, None]
        else:
            span = fpts - c[:, None, :]               # rank d-1
            _, s, vt = np.linalg.svd(span, full_matrices=False)
            rank_ok = s[:, d - 2] > _RANK_TOL * s[:, 0]
            basis = vt[:, :d - 1, :]                  # (c, d-1, D)
            ci = np.einsum("crd,cd->cr", basis, vi)
            cj = np.einsum("crd,cd->cr", basis, vj)
            vi = vi - np.einsum("crd,cr->cd", basis, ci)
            vj = vj - np.einsum("crd,cr->cd", basis, cj)
            vi[~rank_ok] = 0.0                        # flagged below
        ni = np.linalg.norm(vi, axis=1)
        nj = np.linalg.norm(vj, axis=1)
        good = (ni > _RESIDUAL_TOL) & (nj > _RESIDUAL_TOL)
        cos = np.einsum("cd,cd->c", vi, vj)
        with np.errstate(divide="ignore", invalid="ignore"):
            cos = np.clip(cos / (ni * nj), -1.0, 1.0)
        # snap numerically parallel residuals to exactly 0 / pi so exact
        # flat pairs land on the delta floor instead of arccos noise
        cos[cos >= 1.0 - _COS_SNAP] = 1.0
        cos[cos <= -1.0 + _COS_SNAP] = -1.0
        block = np.arccos(cos)
        block[~good] = np.nan
        theta[lo:hi] = block
    return theta


def dihedral_angle(simplex_i, simplex_j, face, coords):
    """Angle between the apex residuals of one adjacent pair."""
    simplex_i = np.asarray(simplex_i, dtype=int)
    simplex_j = np.asarray(simplex_j, dtype=int)
    face = np.asarray(face, dtype=int)
    d = simplex_i.shape[0] - 1
    if face.shape[0] != d:
        raise ValueError("shared face must have d vertices")
    sims = np.stack([simplex_i, simplex_j])
    theta = dihedral_angles(sims, np.array([0]), np.array([1]),
                            face[None, :], coords)[0]
    if np.isnan(theta):
        raise DegenerateSimplexPair(
            "apex in the face span or rank-deficient shared face")
    return float(theta)


def build_simplex_graph(simplex_set, cloud, weight_mode, delta):
    """Weighted adjacency graph on the valid simplex set.

    One-sided mode keeps only pairs with dihedral angle >= pi/2 and uses
    pi - theta; two-sided mode keeps every adjacent pair with
    min(pi - theta, theta). Both are floored at delta. Degenerate pairs
    are dropped rather than aborting the build.
    """
    if weight_mode not in ("one-sided", "two-sided"):
        raise ValueError(f"unknown weight_mode {weight_mode!r}")
    sims = simplex_set.simplices
    pair_i, pair_j, faces = find_adjacent_pairs(sims)
    theta = dihedral_angles(sims, pair_i, pair_j, faces, cloud.coords)
    bad = np.isnan(theta)
    if bad.any():
        log.warning("dropped %d degenerate simplex pairs", int(bad.sum()))
        pair_i, pair_j, theta = pair_i[~bad], pair_j[~bad], theta[~bad]
    if weight_mode == "one-sided":
        keep = theta >= math.pi / 2
        pair_i, pair_j, theta = pair_i[keep], pair_j[keep], theta[keep]
        weight = np.maximum(math.pi - theta, delta)
    else:
        weight = np.maximum(np.minimum(math.pi - theta, theta), delta)
    return SimplexGraph(n_nodes=sims.shape[0], edge_i=pair_i, edge_j=pair_j,
                        weight=weight, weight_mode=weight_mode)

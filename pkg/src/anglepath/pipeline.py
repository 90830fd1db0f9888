"""End-to-end clustering: denoise, recluster, vote labels onto points."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .anglegraph import SimplexGraph, build_simplex_graph
from .core import PipelineError, resolve_params
from .dendrogram import DisjointSet, MergeDendrogram, build_dendrogram
from .evaluate import gap_report, simplex_classes
from .neighborhood import build_annular_graph
from .simplices import EmptyValidSetError, build_valid_set

log = logging.getLogger(__name__)

_NLAPD_MAX_POINTS = 2000


@dataclass
class ClusterResult:
    simplex_labels: np.ndarray   # per-surviving-simplex label (-1 = dust)
    point_labels: np.ndarray     # per-point label in [0, m_hat)
    m_hat: int
    removed: np.ndarray          # indices of denoised-away simplices
    survivors: np.ndarray        # indices of surviving simplices
    eta: float
    params: object
    diagnostics: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)


def default_eta(values):
    """Denoising threshold from the sorted ascending kappa-NN distances.

    Returns the midpoint between the median value and the next distinct
    value: between the modes when the distribution is bimodal (clean bulk
    plus a detached noisy tail), and just above the bulk median otherwise.
    Infinite entries are excluded (denoising removes them regardless).

    A max-chord-distance elbow on the sorted curve is the textbook choice
    but lands inside the right tail once the noise approaches the simplex
    scale, keeping exactly the bridge simplices denoising exists to
    remove; the median-anchored threshold stays robust in that regime.
    """
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise ValueError("all kappa-NN distances are infinite")
    if np.any(np.diff(finite) < 0):
        raise ValueError("values must be sorted ascending")
    med = finite[(finite.size - 1) // 2]
    larger = finite[finite > med]
    if larger.size == 0:
        return float(med)
    return float(0.5 * (med + larger[0]))


def denoise(knn_values, eta):
    """Indices of simplices whose kappa-NN distance is at most eta."""
    survivors = np.flatnonzero(knn_values <= eta)
    if survivors.size == 0:
        raise PipelineError("denoise", "no simplex survived denoising")
    return survivors


def restrict_graph(graph, survivors):
    """Subgraph induced on the surviving simplices, with reindexed nodes.

    Angles are not recomputed; only edges between survivors are kept.
    """
    keep_node = np.zeros(graph.n_nodes, dtype=bool)
    keep_node[survivors] = True
    new_id = np.full(graph.n_nodes, -1, dtype=int)
    new_id[survivors] = np.arange(survivors.size)
    mask = keep_node[graph.edge_i] & keep_node[graph.edge_j]
    return SimplexGraph(n_nodes=survivors.size,
                        edge_i=new_id[graph.edge_i[mask]],
                        edge_j=new_id[graph.edge_j[mask]],
                        weight=graph.weight[mask],
                        weight_mode=graph.weight_mode)


def estimate_m(profile):
    """Most persistent nontrivial-component count across the scales.

    Ties are broken toward the larger count.
    """
    counts = profile.counts[profile.counts >= 1]
    if counts.size == 0:
        raise ValueError("no scale has a nontrivial component")
    freq = np.bincount(counts)
    best = np.flatnonzero(freq == freq.max())[-1]
    return int(best)


def cut(dendrogram, m, nu):
    """Labels for the m-cluster slice of the dendrogram.

    Chooses the largest threshold (searching exact merge events) at which
    the number of nontrivial components equals m, i.e. the most persistent
    m-component slice. Simplices in trivial components inherit the label
    of the cluster they merge into first above the threshold; components
    that never merge into a cluster keep label -1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = dendrogram.n_nodes
    cutoff = max(1, math.ceil(nu * n))
    weights = dendrogram.weights
    n_events = dendrogram.n_events

    # pass 1: nontrivial counts after each distinct weight level
    dsu = DisjointSet(n)
    nontrivial = 0
    levels = []          # (weight, count, index one past the level)
    ev = 0
    while ev < n_events:
        w = weights[ev]
        while ev < n_events and weights[ev] == w:
            ra = dsu.find(dendrogram.root_a[ev])
            rb = dsu.find(dendrogram.root_b[ev])
            sa, sb = dsu.size[ra], dsu.size[rb]
            root = dsu.union(ra, rb)
            nontrivial += int(dsu.size[root] > cutoff)
            nontrivial -= int(sa > cutoff) + int(sb > cutoff)
            ev += 1
        levels.append((w, nontrivial, ev))
    exact = [lv for lv in levels if lv[1] == m]
    if exact:
        t_star, _, stop = exact[-1]
    else:
        # closest count from above, breaking ties toward the larger
        # (more persistent) threshold
        above = sorted((cnt, -w, stop) for w, cnt, stop in levels if cnt > m)
        if above:
            cnt, neg_w, stop = above[0]
            t_star = -neg_w
        elif levels:
            cnt, t_star, stop = max((cnt, w, stop) for w, cnt, stop in levels)
        else:
            raise PipelineError("cut", "graph has no merge events")
        log.warning("no threshold gives exactly %d nontrivial components; "
                    "cutting at %g with %d", m, t_star, cnt)

    # pass 2: replay to the cut, label nontrivial components
    dsu = DisjointSet(n)
    for ev in range(stop):
        dsu.union(dendrogram.root_a[ev], dendrogram.root_b[ev])
    roots = np.array([dsu.find(i) for i in range(n)])
    labels = np.full(n, -1, dtype=int)
    uniq, first, sizes = np.unique(roots, return_index=True,
                                   return_counts=True)
    big = uniq[sizes > cutoff]
    big = big[np.argsort(first[sizes > cutoff])]   # stable cluster ids
    for cid, root in enumerate(big):
        labels[roots == root] = cid

    # pass 3: trivial components inherit the first cluster they merge into
    root_label = {}
    root_members = {}
    for i in range(n):
        r = roots[i]
        if labels[i] >= 0:
            root_label[r] = labels[i]
        else:
            root_members.setdefault(r, []).append(i)
    for ev in range(stop, n_events):
        ra = dsu.find(dendrogram.root_a[ev])
        rb = dsu.find(dendrogram.root_b[ev])
        root = dsu.union(ra, rb)
        la = root_label.pop(ra, -1)
        lb = root_label.pop(rb, -1)
        ma = root_members.pop(ra, None)
        mb = root_members.pop(rb, None)
        winner = la if la >= 0 else lb
        if winner >= 0:
            root_label[root] = winner
            if ma is not None:
                labels[ma] = winner
            if mb is not None:
                labels[mb] = winner
        else:
            merged = (ma or []) + (mb or [])
            if merged:
                root_members[root] = merged
    return labels, float(t_star)


def majority_vote(simplex_labels, simplices, cloud):
    """Point labels by majority over the surviving simplices containing
    each point; ties go to the smaller label, orphan points take the label
    of the nearest labeled point."""
    n = cloud.n
    labeled = simplex_labels >= 0
    if not labeled.any():
        raise PipelineError("vote", "no labeled simplices to vote with")
    m = int(simplex_labels.max()) + 1
    votes = np.zeros((n, m), dtype=np.int64)
    sims = simplices[labeled]
    labs = simplex_labels[labeled]
    dp1 = sims.shape[1]
    np.add.at(votes, (sims.ravel(), np.repeat(labs, dp1)), 1)
    covered = votes.sum(axis=1) > 0
    point_labels = np.full(n, -1, dtype=int)
    point_labels[covered] = np.argmax(votes[covered], axis=1)
    if not covered.all():
        tree = cKDTree(cloud.coords[covered])
        _, nearest = tree.query(cloud.coords[~covered], k=1)
        point_labels[~covered] = point_labels[covered][nearest]
    return point_labels


def nlapd(dendrogram, simplices, survivors, point_i, point_j, n_points):
    """Node-level distance: minimum minimax distance over all pairs of
    surviving simplices containing the two points."""
    if n_points > _NLAPD_MAX_POINTS:
        raise ValueError(
            f"point-level distance is quadratic; limited to "
            f"{_NLAPD_MAX_POINTS} points")
    surv = simplices[survivors]
    in_i = np.flatnonzero((surv == point_i).any(axis=1))
    in_j = np.flatnonzero((surv == point_j).any(axis=1))
    if in_i.size == 0 or in_j.size == 0:
        raise ValueError("point not covered by any surviving simplex")
    pairs = [(int(a), int(b)) for a in in_i for b in in_j]
    return float(dendrogram.query_pairs(pairs).min())


def run(cloud, params):
    """Full clustering pipeline; see the module docstring."""
    timings = {}
    diagnostics = {}

    def timed(stage, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except (EmptyValidSetError, ValueError) as exc:
            raise PipelineError(stage, str(exc)) from exc
        timings[stage] = (time.perf_counter() - t0) * 1000.0
        return out

    params = timed("params", resolve_params, params, cloud.n, cloud.coords)
    graph_x = timed("annular_graph", build_annular_graph, cloud, params.e,
                    params.B)
    simplex_set = timed("valid_set", build_valid_set, graph_x, cloud, params)
    graph_s = timed("angle_graph", build_simplex_graph, simplex_set, cloud,
                    params.weight_mode, params.delta)
    dend = timed("dendrogram", build_dendrogram, graph_s)

    t0 = time.perf_counter()
    knn_values = dend.knn(params.kappa)
    eta = params.eta
    if eta is None:
        finite_sorted = np.sort(knn_values[np.isfinite(knn_values)])
        if finite_sorted.size == 0:
            raise PipelineError("denoise",
                                "all kappa-NN distances are infinite")
        eta = default_eta(finite_sorted)
    survivors = denoise(knn_values, eta)
    timings["denoise"] = (time.perf_counter() - t0) * 1000.0

    graph_dns = timed("restrict", restrict_graph, graph_s, survivors)
    dend_dns = timed("dendrogram_dns", build_dendrogram, graph_dns)

    t0 = time.perf_counter()
    profile = dend_dns.scale_profile(params.k, params.delta, params.nu)
    if params.m is not None:
        m_hat = params.m
    else:
        try:
            m_hat = estimate_m(profile)
        except ValueError as exc:
            raise PipelineError("estimate_m", str(exc)) from exc
    timings["estimate_m"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    simplex_labels, t_star = cut(dend_dns, m_hat, params.nu)
    timings["cut"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    point_labels = majority_vote(simplex_labels,
                                 simplex_set.simplices[survivors], cloud)
    timings["vote"] = (time.perf_counter() - t0) * 1000.0

    # compact labels in case a cluster received no points
    used = np.unique(point_labels)
    if used.size != m_hat:
        remap = {old: new for new, old in enumerate(used)}
        point_labels = np.array([remap[v] for v in point_labels])
        keep = simplex_labels >= 0
        simplex_labels[keep] = np.array(
            [remap.get(v, -1) for v in simplex_labels[keep]])
        m_hat = used.size

    finite = knn_values[np.isfinite(knn_values)]
    diagnostics["eta"] = float(eta)
    diagnostics["cut_threshold"] = t_star
    diagnostics["simplex_count"] = len(simplex_set)
    diagnostics["survivor_count"] = int(survivors.size)
    diagnostics["scale_counts"] = profile.counts.tolist()
    diagnostics["knn_quantiles"] = {
        q: float(np.quantile(finite, q)) if finite.size else float("inf")
        for q in (0.1, 0.5, 0.9, 0.99)}
    if cloud.truth is not None:
        classes = simplex_classes(simplex_set.simplices, cloud.truth)
        pre = gap_report(dend, classes)
        post = gap_report(dend_dns, classes[survivors])
        diagnostics["wlapd"] = pre.wlapd
        diagnostics["wlapd_conn"] = pre.wlapd_conn
        diagnostics["blapd"] = pre.blapd
        diagnostics["wlapd_dns"] = post.wlapd
        diagnostics["wlapd_conn_dns"] = post.wlapd_conn
        diagnostics["blapd_dns"] = post.blapd
        diagnostics["mixed_count"] = pre.mixed_count

    removed = np.setdiff1d(np.arange(len(simplex_set)), survivors)
    return ClusterResult(simplex_labels=simplex_labels,
                         point_labels=point_labels, m_hat=m_hat,
                         removed=removed, survivors=survivors, eta=float(eta),
                         params=params, diagnostics=diagnostics,
                         timings_ms=timings)

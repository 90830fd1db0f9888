import math

import numpy as np
import pytest

from anglepath.anglegraph import SimplexGraph
from anglepath.core import Params, PipelineError, PointCloud
from anglepath.datasets import ShapeSpec, generate
from anglepath.dendrogram import ScaleProfile, build_dendrogram
from anglepath.evaluate import accuracy
from anglepath.pipeline import (cut, default_eta, denoise, estimate_m,
                                majority_vote, nlapd, restrict_graph, run)


def graph_of(n, edges):
    ei = np.array([e[0] for e in edges], dtype=int)
    ej = np.array([e[1] for e in edges], dtype=int)
    w = np.array([e[2] for e in edges], dtype=float)
    return SimplexGraph(n_nodes=n, edge_i=ei, edge_j=ej, weight=w,
                        weight_mode="one-sided")


class TestDefaultEta:
    def test_bimodal_splits_between_modes(self):
        values = np.array([0.1] * 10 + [0.9] * 8)
        assert default_eta(values) == pytest.approx(0.5)

    def test_constant_values(self):
        assert default_eta(np.full(7, 0.3)) == pytest.approx(0.3)

    def test_single_value(self):
        assert default_eta(np.array([0.4])) == pytest.approx(0.4)

    def test_midpoint_to_next_distinct(self):
        values = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
        assert default_eta(values) == pytest.approx(0.35)

    def test_infinite_entries_excluded(self):
        values = np.array([0.1, 0.1, 0.1, math.inf, math.inf])
        assert default_eta(values) == pytest.approx(0.1)

    def test_all_infinite_rejected(self):
        with pytest.raises(ValueError):
            default_eta(np.array([math.inf, math.inf]))

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            default_eta(np.array([0.5, 0.1]))


class TestDenoise:
    def test_threshold(self):
        vals = np.array([0.1, 0.5, 0.2, math.inf])
        assert np.array_equal(denoise(vals, 0.2), [0, 2])

    def test_empty_survivors_raises(self):
        with pytest.raises(PipelineError):
            denoise(np.array([0.5, 0.9]), 0.1)


class TestRestrictGraph:
    def test_induced_subgraph(self):
        graph = graph_of(5, [(0, 1, 0.1), (1, 2, 0.2), (2, 3, 0.3),
                             (3, 4, 0.4)])
        sub = restrict_graph(graph, np.array([1, 2, 4]))
        assert sub.n_nodes == 3
        assert sub.n_edges == 1
        assert (sub.edge_i[0], sub.edge_j[0]) == (0, 1)
        assert sub.weight[0] == 0.2


class TestEstimateM:
    def profile(self, counts):
        counts = np.asarray(counts)
        return ScaleProfile(scales=np.geomspace(1e-8, math.pi / 2,
                                                counts.size),
                            counts=counts, cutoff=1)

    def test_most_frequent_count(self):
        assert estimate_m(self.profile([0, 6, 5, 3, 2, 2, 2, 1])) == 2

    def test_tie_goes_to_larger(self):
        assert estimate_m(self.profile([3, 3, 2, 2, 1])) == 3

    def test_zeros_ignored(self):
        assert estimate_m(self.profile([0, 0, 0, 4, 4, 1])) == 4

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            estimate_m(self.profile([0, 0, 0]))


class TestCut:
    def test_exact_slice_largest_threshold(self):
        # two components persist from 0.2 through 0.8; the cut should use
        # the top of that band, not its bottom
        graph = graph_of(6, [(0, 1, 0.1), (1, 2, 0.2), (3, 4, 0.1),
                             (4, 5, 0.3), (2, 3, 0.9)])
        dend = build_dendrogram(graph)
        labels, t_star = cut(dend, 2, nu=0.0)
        assert t_star == 0.3
        assert np.array_equal(labels, [0, 0, 0, 1, 1, 1])

    def test_single_cluster(self):
        graph = graph_of(3, [(0, 1, 0.1), (1, 2, 0.2)])
        dend = build_dendrogram(graph)
        labels, t_star = cut(dend, 1, nu=0.0)
        assert np.array_equal(labels, [0, 0, 0])

    def test_trivial_components_inherit(self):
        # node 4 is still dust at the cut threshold; it must inherit the
        # label of the first cluster it merges into above the cut
        graph = graph_of(5, [(0, 1, 0.1), (2, 3, 0.1), (1, 2, 0.9),
                             (3, 4, 0.9)])
        dend = build_dendrogram(graph)
        labels, t_star = cut(dend, 2, nu=0.0)
        assert t_star == 0.1
        assert np.array_equal(labels[:4], [0, 0, 1, 1])
        assert labels[4] == 0

    def test_never_merged_keeps_dust_label(self):
        graph = graph_of(5, [(0, 1, 0.1), (2, 3, 0.1)])
        dend = build_dendrogram(graph)
        labels, _ = cut(dend, 2, nu=0.2)
        assert labels[4] == -1

    def test_no_exact_count_falls_back(self, caplog):
        # counts pass 0 -> 3 -> 1 without ever hitting 2
        import logging
        graph = graph_of(6, [(0, 1, 0.1), (2, 3, 0.1), (4, 5, 0.1),
                             (1, 2, 0.5), (3, 4, 0.5)])
        dend = build_dendrogram(graph)
        with caplog.at_level(logging.WARNING, logger="anglepath.pipeline"):
            labels, t_star = cut(dend, 2, nu=0.0)
        assert t_star == 0.1
        assert len(set(labels.tolist())) == 3
        assert "no threshold" in caplog.text

    def test_invalid_m(self):
        dend = build_dendrogram(graph_of(2, [(0, 1, 0.1)]))
        with pytest.raises(ValueError):
            cut(dend, 0, nu=0.0)


class TestMajorityVote:
    def test_majority_and_ties(self):
        cloud = PointCloud(coords=np.arange(8, dtype=float)[:, None])
        sims = np.array([[0, 1], [1, 2], [2, 3], [3, 4]])
        labels = np.array([0, 0, 1, 1])
        points = majority_vote(labels, sims, cloud)
        # point 2 is covered once by each cluster: tie goes to label 0
        assert np.array_equal(points[:5], [0, 0, 0, 1, 1])

    def test_orphans_take_nearest(self):
        cloud = PointCloud(coords=np.array([[0.0], [1.0], [5.0]]))
        sims = np.array([[0, 1]])
        labels = np.array([0])
        points = majority_vote(labels, sims, cloud)
        assert np.array_equal(points, [0, 0, 0])

    def test_dust_simplices_do_not_vote(self):
        cloud = PointCloud(coords=np.arange(3, dtype=float)[:, None])
        sims = np.array([[0, 1], [1, 2]])
        labels = np.array([1, -1])
        points = majority_vote(labels, sims, cloud)
        assert np.array_equal(points, [1, 1, 1])

    def test_no_labels_raises(self):
        cloud = PointCloud(coords=np.zeros((2, 1)))
        with pytest.raises(PipelineError):
            majority_vote(np.array([-1]), np.array([[0, 1]]), cloud)


class TestNlapd:
    def test_point_distance(self):
        graph = graph_of(3, [(0, 1, 0.2), (1, 2, 0.7)])
        dend = build_dendrogram(graph)
        sims = np.array([[0, 1], [1, 2], [2, 3]])
        survivors = np.array([0, 1, 2])
        # points 0 and 3 only meet through the chain: bottleneck 0.7
        assert nlapd(dend, sims, survivors, 0, 3, 4) == 0.7
        # points sharing a simplex are at distance 0
        assert nlapd(dend, sims, survivors, 0, 1, 4) == 0.0

    def test_uncovered_point_rejected(self):
        graph = graph_of(2, [(0, 1, 0.2)])
        dend = build_dendrogram(graph)
        sims = np.array([[0, 1], [1, 2]])
        with pytest.raises(ValueError):
            nlapd(dend, sims, np.array([0, 1]), 0, 9, 10)

    def test_size_guard(self):
        graph = graph_of(2, [(0, 1, 0.2)])
        dend = build_dendrogram(graph)
        with pytest.raises(ValueError, match="quadratic"):
            nlapd(dend, np.array([[0, 1]]), np.array([0]), 0, 1, 10 ** 6)


class TestRunEndToEnd:
    def test_two_segments_recovered(self):
        cloud = generate(ShapeSpec(kind="hypercubes", d=1, D=20, n=800,
                                   theta=math.pi / 2, sigma=0.02, seed=0))
        tau = math.sqrt(3) * 0.02
        result = run(cloud, Params(d=1, tau=tau, e=3 * tau, m=2))
        assert result.m_hat == 2
        assert accuracy(result.point_labels, cloud.truth) >= 0.9
        assert result.point_labels.shape == (800,)
        assert set(result.point_labels.tolist()) == {0, 1}
        assert result.survivors.size + result.removed.size == \
            result.diagnostics["simplex_count"]
        for key in ("eta", "cut_threshold", "wlapd", "blapd",
                    "knn_quantiles", "scale_counts"):
            assert key in result.diagnostics
        assert set(result.timings_ms) >= {"annular_graph", "valid_set",
                                          "angle_graph", "dendrogram",
                                          "denoise", "cut", "vote"}

    def test_auto_m_on_clean_segments(self):
        cloud = generate(ShapeSpec(kind="hypercubes", d=1, D=10, n=600,
                                   theta=math.pi / 2, sigma=0.0, seed=1))
        result = run(cloud, Params(d=1, tau=0.0))
        assert result.m_hat == 2
        assert accuracy(result.point_labels, cloud.truth) >= 0.95

    def test_deterministic(self):
        cloud = generate(ShapeSpec(kind="hypercubes", d=1, D=10, n=400,
                                   theta=math.pi / 2, sigma=0.02, seed=2))
        tau = math.sqrt(3) * 0.02
        a = run(cloud, Params(d=1, tau=tau, m=2))
        b = run(cloud, Params(d=1, tau=tau, m=2))
        assert np.array_equal(a.point_labels, b.point_labels)
        assert a.eta == b.eta

    def test_unlabeled_cloud_skips_gap_diagnostics(self):
        cloud = generate(ShapeSpec(kind="hypercubes", d=1, D=10, n=400,
                                   theta=math.pi / 2, sigma=0.02, seed=3))
        bare = PointCloud(coords=cloud.coords)
        result = run(bare, Params(d=1, tau=math.sqrt(3) * 0.02, m=2))
        assert "wlapd" not in result.diagnostics

    def test_failure_surfaces_stage(self):
        # far-apart points leave the annular band empty
        cloud = PointCloud(coords=np.arange(0, 200, 10.0)[:, None])
        with pytest.raises(PipelineError) as err:
            run(cloud, Params(d=1, tau=0.0, e=0.001))
        assert err.value.stage in ("valid_set", "annular_graph")

import itertools
import math

import numpy as np
import pytest

from anglepath.core import Params, PointCloud, resolve_params
from anglepath.neighborhood import build_annular_graph
from anglepath.simplices import (EmptyValidSetError, build_valid_set,
                                 distortion1, distortion2,
                                 enumerate_candidates,
                                 pairwise_edge_lengths, regular_volume,
                                 simplex_volumes)


def brute_candidates(graph, d):
    """Reference: all sorted (d+1)-subsets where some member's annular
    neighbor list contains the other d members."""
    n = len(graph.neighbors)
    nbr_sets = [set(map(int, nb)) for nb in graph.neighbors]
    out = set()
    for combo in itertools.combinations(range(n), d + 1):
        for center in combo:
            rest = set(combo) - {center}
            if rest <= nbr_sets[center]:
                out.add(combo)
                break
    return sorted(out)


class TestRegularVolume:
    def test_known_values(self):
        assert regular_volume(1) == pytest.approx(1.0)
        assert regular_volume(2) == pytest.approx(math.sqrt(3) / 4)
        assert regular_volume(3) == pytest.approx(1 / (6 * math.sqrt(2)))


class TestVolumesAndLengths:
    def test_triangle_area_matches_cross_product(self, rng):
        coords = rng.normal(size=(3, 5))
        sims = np.array([[0, 1, 2]])
        u = coords[1] - coords[0]
        v = coords[2] - coords[0]
        gram_free = 0.5 * math.sqrt(
            (u @ u) * (v @ v) - (u @ v) ** 2)
        assert simplex_volumes(sims, coords)[0] == pytest.approx(gram_free)

    def test_segment_length(self):
        coords = np.array([[0.0, 0.0], [3.0, 4.0]])
        assert simplex_volumes(np.array([[0, 1]]), coords)[0] == \
            pytest.approx(5.0)

    def test_degenerate_volume_is_zero(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        assert simplex_volumes(np.array([[0, 1, 2]]), coords)[0] == 0.0

    def test_pairwise_lengths(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        lengths = pairwise_edge_lengths(np.array([[0, 1, 2]]), coords)[0]
        assert sorted(lengths) == pytest.approx([1.0, 1.0, math.sqrt(2)])


class TestDistortions:
    def test_regular_simplex_is_one(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0],
                           [0.5, math.sqrt(3) / 2]])
        assert distortion1([0, 1, 2], coords) == pytest.approx(1.0)
        assert distortion2([0, 1, 2], coords) == pytest.approx(1.0)

    def test_flat_simplex(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        assert distortion2([0, 1, 2], coords) == 0.0
        assert distortion1([0, 1, 2], coords) == pytest.approx(0.5)

    def test_bounds(self, rng):
        coords = rng.normal(size=(4, 6))
        r1 = distortion1([0, 1, 2, 3], coords)
        r2 = distortion2([0, 1, 2, 3], coords)
        assert 0 < r1 <= 1
        assert r2 >= 0


class TestEnumerateCandidates:
    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_brute_force(self, d, seed):
        rng = np.random.default_rng(seed)
        coords = rng.uniform(0, 1, size=(25, d + 1))
        cloud = PointCloud(coords=coords)
        graph = build_annular_graph(cloud, 0.2, 6)
        got = enumerate_candidates(graph, d)
        want = brute_candidates(graph, d)
        assert [tuple(row) for row in got] == want

    def test_rows_sorted_and_unique(self, rng):
        coords = rng.uniform(0, 1, size=(30, 3))
        graph = build_annular_graph(PointCloud(coords=coords), 0.2, 8)
        cand = enumerate_candidates(graph, 2)
        assert (np.diff(cand, axis=1) > 0).all()
        assert np.unique(cand, axis=0).shape == cand.shape


class TestBuildValidSet:
    def test_edge_band_enforced(self, rng):
        coords = rng.uniform(0, 1, size=(120, 2))
        cloud = PointCloud(coords=coords)
        params = resolve_params(Params(d=2, tau=0.0, e=0.15), cloud.n,
                                cloud.coords)
        graph = build_annular_graph(cloud, params.e, params.B)
        ss = build_valid_set(graph, cloud, params)
        assert len(ss) > 0
        lengths = pairwise_edge_lengths(ss.simplices, coords)
        assert (lengths.min(axis=1) >= params.e).all()
        assert (lengths.max(axis=1) <= params.e / params.q).all()
        assert (lengths.min(axis=1) / lengths.max(axis=1) >= params.q).all()

    def test_volume_filter(self):
        # a near-collinear triangle passes without r0 but fails with it
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.02],
                           [1.0, 0.9]])
        cloud = PointCloud(coords=coords)
        graph = build_annular_graph(cloud, 0.8, 3)
        loose = resolve_params(Params(d=2, tau=0.0, e=0.81, q=0.3),
                               cloud.n, coords)
        ss = build_valid_set(graph, cloud, loose)
        flat = [0, 1, 2]
        assert flat in ss.simplices.tolist()
        strict = resolve_params(Params(d=2, tau=0.0, e=0.81, q=0.3, r0=0.2),
                                cloud.n, coords)
        ss2 = build_valid_set(graph, cloud, strict)
        assert flat not in ss2.simplices.tolist()

    def test_empty_raises(self):
        coords = np.array([[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]])
        cloud = PointCloud(coords=coords)
        graph = build_annular_graph(cloud, 1.0, 2)
        params = resolve_params(Params(d=2, tau=0.0, e=1.0, q=0.99),
                                cloud.n, coords)
        with pytest.raises(EmptyValidSetError):
            build_valid_set(graph, cloud, params)

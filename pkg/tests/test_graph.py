import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from graphbf.graph import (
    GraphParams,
    apply_bf,
    apply_normalized_laplacian,
    apply_randomwalk_laplacian,
    build_graph,
    count_sparse_passes,
    denormalize_signal,
    normalize_signal,
)
from graphbf.imageio import ImageGrid

from conftest import random_image, smooth_random_image


def direct_bilateral(img, sigma_d, sigma_r, radius):
    """Per-pixel weighted average written out longhand."""
    h, w = img.shape
    x = img.data
    out = np.zeros_like(x)
    for r in range(h):
        for c in range(w):
            num = den = 0.0
            for rr in range(max(0, r - radius), min(h, r + radius + 1)):
                for cc in range(max(0, c - radius), min(w, c + radius + 1)):
                    wt = math.exp(-((rr - r) ** 2 + (cc - c) ** 2) / (2 * sigma_d ** 2))
                    wt *= math.exp(-((x[rr, cc] - x[r, c]) ** 2) / (2 * sigma_r ** 2))
                    num += wt * x[rr, cc]
                    den += wt
            out[r, c] = num / den
    return out.ravel()


class TestParams:
    def test_default_radius(self):
        assert GraphParams(sigma_d=2.0).radius == 4
        assert GraphParams(sigma_d=1.3).radius == 3

    @pytest.mark.parametrize(
        "kwargs",
        [dict(sigma_d=0.0), dict(sigma_r=0.0), dict(sigma_r=-1.0), dict(radius=0), dict(mode="nlm"), dict(radius=1.5)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GraphParams(**kwargs)

    def test_gaussian_mode_ignores_sigma_r(self):
        assert GraphParams(sigma_r=0.0, mode="gaussian").mode == "gaussian"


class TestWeights:
    def test_self_loop_is_one(self):
        g = build_graph(random_image(6, 7, 0), GraphParams(sigma_d=2.0, sigma_r=0.035))
        assert np.all(g.adjacency.diagonal() == 1.0)

    def test_adjacent_equal_intensity(self):
        g = build_graph(ImageGrid(np.full((1, 2), 0.4)), GraphParams(sigma_d=2.0, sigma_r=0.035, radius=1))
        assert g.adjacency[0, 1] == pytest.approx(0.8824969025845954, rel=1e-15)

    def test_adjacent_gap_point_one(self):
        # reference from a 50-digit evaluation of the weight formula
        g = build_graph(ImageGrid(np.array([[0.3, 0.4]])), GraphParams(sigma_d=2.0, sigma_r=0.035, radius=1))
        assert g.adjacency[0, 1] == pytest.approx(0.014896445477293906719, rel=1e-12)

    def test_symmetric_bitwise(self):
        g = build_graph(random_image(9, 11, 4), GraphParams(sigma_d=1.5, sigma_r=0.1))
        a = g.adjacency
        assert (a != a.T).nnz == 0

    def test_entries_bounded_and_windowed(self):
        g = build_graph(random_image(7, 9, 5), GraphParams(sigma_d=1.0, sigma_r=0.2, radius=2))
        coo = g.adjacency.tocoo()
        assert np.all(coo.data > 0) and np.all(coo.data <= 1)
        ri, ci = np.divmod(coo.row, 9)
        rj, cj = np.divmod(coo.col, 9)
        assert np.max(np.maximum(np.abs(ri - rj), np.abs(ci - cj))) <= 2

    def test_border_clipping_counts(self):
        # 5x5 image, radius 1: corners see 4 pixels, edges 6, interior 9
        g = build_graph(ImageGrid(np.zeros((5, 5))), GraphParams(sigma_d=1.0, sigma_r=1.0, radius=1))
        counts = np.diff(g.adjacency.indptr).reshape(5, 5)
        assert counts[0, 0] == 4 and counts[0, 2] == 6 and counts[2, 2] == 9

    def test_sorted_csr(self):
        g = build_graph(random_image(5, 5, 1), GraphParams())
        assert g.adjacency.has_sorted_indices

    def test_degree_at_least_one(self):
        g = build_graph(random_image(10, 10, 2), GraphParams(sigma_r=0.001))
        assert np.all(g.degree >= 1.0)

    def test_gaussian_mode_independent_of_intensity(self):
        p = GraphParams(sigma_d=2.0, mode="gaussian")
        a = build_graph(random_image(8, 6, 1), p).adjacency
        b = build_graph(random_image(8, 6, 2), p).adjacency
        assert (a != b).nnz == 0

    def test_tiny_weights_kept(self):
        g = build_graph(ImageGrid(np.array([[0.0, 1.0]])), GraphParams(sigma_d=2.0, sigma_r=0.035, radius=1))
        assert g.adjacency.nnz == 4
        assert 0 < g.adjacency[0, 1] < 1e-100


class TestApplyBF:
    def test_constant_preserved(self):
        g = build_graph(random_image(12, 12, 3), GraphParams())
        out = apply_bf(g, np.full(g.n, 0.37))
        assert np.max(np.abs(out - 0.37)) <= 1e-12

    def test_row_stochastic(self):
        g = build_graph(random_image(16, 16, 8), GraphParams(sigma_r=0.1))
        assert np.max(np.abs(apply_bf(g, np.ones(g.n)) - 1.0)) <= 1e-12

    def test_matches_dense_product(self):
        g = build_graph(random_image(8, 8, 9), GraphParams(sigma_r=0.1))
        x = np.random.default_rng(0).standard_normal(g.n)
        dense = (g.dense_adjacency() / g.degree[:, None]) @ x
        assert np.max(np.abs(apply_bf(g, x) - dense)) <= 1e-12

    def test_matches_direct_loop(self):
        img = random_image(7, 9, 10)
        g = build_graph(img, GraphParams(sigma_d=1.5, sigma_r=0.2))
        ref = direct_bilateral(img, 1.5, 0.2, g.params.radius)
        assert np.max(np.abs(apply_bf(g, img.signal()) - ref)) <= 1e-12

    def test_two_pixel_hand_expansion(self, two_pixel_graph):
        w = two_pixel_graph.adjacency[0, 1]
        out = apply_bf(two_pixel_graph, np.array([1.0, 0.0]))
        assert out[0] == pytest.approx(1 / (1 + w), rel=1e-15)
        assert out[1] == pytest.approx(w / (1 + w), rel=1e-15)

    def test_length_mismatch(self, two_pixel_graph):
        for fn in (apply_bf, apply_randomwalk_laplacian, apply_normalized_laplacian, normalize_signal, denormalize_signal):
            with pytest.raises(ValueError):
                fn(two_pixel_graph, np.zeros(3))

    def test_window_locality(self):
        img = random_image(15, 15, 11)
        g = build_graph(img, GraphParams(sigma_d=1.0, sigma_r=0.3, radius=2))
        x = np.random.default_rng(1).uniform(size=g.n)
        bumped = x.copy()
        bumped[7 * 15 + 7] += 1.0
        changed = np.abs(apply_bf(g, bumped) - apply_bf(g, x)) > 0
        rows, cols = np.divmod(np.flatnonzero(changed), 15)
        assert changed.any()
        assert np.all(np.maximum(np.abs(rows - 7), np.abs(cols - 7)) <= 2)

    def test_pass_counter(self):
        g = build_graph(random_image(4, 4, 0), GraphParams())
        x = np.ones(g.n)
        with count_sparse_passes() as c:
            apply_bf(g, x)
            apply_randomwalk_laplacian(g, x)
            apply_normalized_laplacian(g, x)
        assert c.count == 3
        apply_bf(g, x)
        assert c.count == 3


class TestLaplacians:
    def test_randomwalk_annihilates_constants(self):
        g = build_graph(random_image(10, 10, 12), GraphParams(sigma_r=0.2))
        assert np.max(np.abs(apply_randomwalk_laplacian(g, np.full(g.n, 2.5)))) <= 1e-12

    def test_randomwalk_two_pixel(self, two_pixel_graph):
        w = two_pixel_graph.adjacency[0, 1]
        out = apply_randomwalk_laplacian(two_pixel_graph, np.array([1.0, 0.0]))
        np.testing.assert_allclose(out, [w / (1 + w), -w / (1 + w)], rtol=1e-14)

    def test_randomwalk_dense(self):
        g = build_graph(smooth_random_image(8, 8, 13), GraphParams())
        x = np.random.default_rng(2).standard_normal(g.n)
        lr = np.eye(g.n) - g.dense_adjacency() / g.degree[:, None]
        assert np.max(np.abs(apply_randomwalk_laplacian(g, x) - lr @ x)) <= 1e-12

    def test_normalized_kills_sqrt_degree(self):
        g = build_graph(random_image(9, 9, 14), GraphParams(sigma_r=0.2))
        assert np.max(np.abs(apply_normalized_laplacian(g, np.sqrt(g.degree)))) <= 1e-12

    def test_regular_graph_laplacians_agree(self):
        # periodic-free regular graph: a 1x1 image has a single self-loop; use a 1x2 flat image
        g = build_graph(ImageGrid(np.full((1, 2), 0.5)), GraphParams(radius=1))
        assert g.degree[0] == g.degree[1]
        x = np.array([0.3, -1.2])
        np.testing.assert_allclose(apply_normalized_laplacian(g, x), apply_randomwalk_laplacian(g, x), atol=1e-15)

    def test_rayleigh_quotient_in_range(self):
        g = build_graph(smooth_random_image(12, 12, 15), GraphParams())
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.standard_normal(g.n)
            q = x @ apply_normalized_laplacian(g, x) / (x @ x)
            assert -1e-12 <= q <= 2 + 1e-12


class TestNormalization:
    def test_round_trip(self):
        g = build_graph(random_image(8, 8, 16), GraphParams())
        x = np.random.default_rng(4).standard_normal(g.n)
        assert np.max(np.abs(denormalize_signal(g, normalize_signal(g, x)) - x)) <= 1e-14

    def test_regular_constant(self):
        g = build_graph(ImageGrid(np.full((1, 2), 0.5)), GraphParams(radius=1))
        np.testing.assert_allclose(normalize_signal(g, np.ones(2)), np.sqrt(g.degree[0]) * np.ones(2))

    def test_zero(self):
        g = build_graph(random_image(3, 3, 0), GraphParams())
        assert np.all(normalize_signal(g, np.zeros(9)) == 0)


@settings(max_examples=30, deadline=None)
@given(
    arrays(np.float64, (6, 5), elements=st.floats(0, 1)),
    st.floats(0.5, 3.0),
    st.floats(0.01, 1.0),
)
def test_graph_invariants_property(data, sigma_d, sigma_r):
    g = build_graph(ImageGrid(data), GraphParams(sigma_d=sigma_d, sigma_r=sigma_r))
    a = g.adjacency
    assert (a != a.T).nnz == 0
    assert np.all(a.diagonal() == 1.0)
    assert np.all(a.data > 0) and np.all(a.data <= 1)
    assert np.max(np.abs(apply_bf(g, np.ones(g.n)) - 1)) <= 1e-12

import numpy as np
import pytest

import greenlab as gl
from oracles import hyperbolic_ball_ratio


def test_flat_box_counts_and_weights():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.0,
                         grid_points_per_axis=4)
    m = gl.build_manifold(spec)
    assert m.n_nodes == 64
    assert m.h == pytest.approx(2.0 / 3.0)
    # interior cells carry exactly h^3
    assert np.allclose(m.volume_weights[m.interior], m.h ** 3)
    # trapezoidal boundary weights make the total exactly (2 hw)^3
    assert m.total_volume == pytest.approx(8.0, rel=1e-12)


def test_flat_box_total_volume_fine_grid():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.5,
                         grid_points_per_axis=20)
    m = gl.build_manifold(spec)
    assert m.total_volume == pytest.approx(27.0, rel=1e-12)
    assert np.all(m.volume_weights > 0)


def test_flat_box_curvature_zero(box8):
    assert np.all(box8.scalar_curvature == 0.0)


def test_hyperbolic_curvature_constant(hyperbolic_line):
    assert np.allclose(hyperbolic_line.scalar_curvature, -6.0, atol=1e-9)


def test_euclidean_warp_curvature_zero():
    spec = gl.MetricSpec(kind=gl.Kind.WARPED_RADIAL,
                         warp_profile=gl.WarpProfile.EUCLIDEAN,
                         r_max=5.0, radial_points=100)
    m = gl.build_manifold(spec)
    assert np.allclose(m.scalar_curvature, 0.0, atol=1e-12)


def test_tabulated_warp_matches_hyperbolic():
    n = 400
    dr = 10.0 / n
    r = (np.arange(n) + 0.5) * dr
    spec = gl.MetricSpec(kind=gl.Kind.WARPED_RADIAL,
                         warp_profile=gl.WarpProfile.TABULATED,
                         r_max=10.0, radial_points=n,
                         warp_table=tuple(np.sinh(r)))
    m = gl.build_manifold(spec)
    # tabulated curvature is ill conditioned where f ~ r -> 0 and one-sided
    # at the outer end; check the well-conditioned bulk
    inner = (r > 0.5) & (r < 9.5)
    assert np.allclose(m.scalar_curvature[inner], -6.0, atol=5e-3)


def test_invalid_specs_rejected():
    with pytest.raises(gl.InvalidSpecError, match="grid_points_per_axis"):
        gl.build_manifold(gl.MetricSpec(grid_points_per_axis=2))
    with pytest.raises(gl.InvalidSpecError, match="box_half_width"):
        gl.build_manifold(gl.MetricSpec(box_half_width=-1.0))
    with pytest.raises(gl.InvalidSpecError, match="r_max"):
        gl.build_manifold(gl.MetricSpec(kind=gl.Kind.WARPED_RADIAL, r_max=0.0))
    with pytest.raises(gl.InvalidSpecError, match="warp_table"):
        gl.build_manifold(gl.MetricSpec(kind=gl.Kind.WARPED_RADIAL,
                                        warp_profile=gl.WarpProfile.TABULATED,
                                        radial_points=10))


def test_geodesic_distance_flat(box8):
    i = box8.center_node()
    assert gl.geodesic_distance(box8, i, i) == 0.0
    # corner to corner of the unit-box grid
    d = gl.geodesic_distance(box8, 0, box8.n_nodes - 1)
    assert d == pytest.approx(2.0 * np.sqrt(3.0))


def test_geodesic_distance_point_pair():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.0,
                         grid_points_per_axis=3)
    m = gl.build_manifold(spec)
    # nodes at (0,0,0) and (1,1,1)
    i = np.where((m.nodes == 0).all(axis=1))[0][0]
    j = np.where((m.nodes == 1).all(axis=1))[0][0]
    assert gl.geodesic_distance(m, i, j) == pytest.approx(np.sqrt(3.0))


def test_geodesic_distance_radial(hyperbolic_line):
    m = hyperbolic_line
    i = int(np.argmin(np.abs(m.nodes[:, 0] - 0.5)))
    j = int(np.argmin(np.abs(m.nodes[:, 0] - 1.5)))
    assert gl.geodesic_distance(m, i, j) == pytest.approx(1.0, abs=m.h)


def test_distance_triangle_inequality(box8):
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b, c = rng.integers(0, box8.n_nodes, size=3)
        dab = gl.geodesic_distance(box8, int(a), int(b))
        dbc = gl.geodesic_distance(box8, int(b), int(c))
        dac = gl.geodesic_distance(box8, int(a), int(c))
        assert dac <= dab + dbc + 1e-12


def test_invalid_node_index(box8):
    with pytest.raises(IndexError):
        gl.geodesic_distance(box8, 0, box8.n_nodes)


def test_volume_growth_flat_fine():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.0,
                         grid_points_per_axis=51)
    m = gl.build_manifold(spec)
    rep = gl.volume_growth_ratio(m, m.center_node(), [0.5, 0.7, 0.9])
    ball = 4 * np.pi / 3
    for r, ratio in rep.rows:
        assert ratio == pytest.approx(ball, rel=0.05)
    assert not any(rep.truncated)
    assert rep.min_ratio >= 0.9 * ball


def test_volume_growth_truncation_flagged(box8):
    rep = gl.volume_growth_ratio(box8, box8.center_node(), [0.5, 5.0])
    assert rep.truncated == [False, True]


def test_volume_growth_hyperbolic_beats_euclidean(hyperbolic_line):
    m = hyperbolic_line
    center = 0
    radii = [0.5, 1.0, 2.0, 3.0]
    rep = gl.volume_growth_ratio(m, center, radii)
    for (r, ratio) in rep.rows:
        assert ratio >= 4 * np.pi / 3 * 0.98
        assert ratio == pytest.approx(hyperbolic_ball_ratio(r), rel=0.02)


def test_hyperbolic_total_volume(hyperbolic_line):
    m = hyperbolic_line
    exact = np.pi * (np.sinh(2 * m.spec.r_max) - 2 * m.spec.r_max)
    assert m.total_volume == pytest.approx(exact, rel=0.01)


def test_center_node_tie_break():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.0,
                         grid_points_per_axis=4)
    m = gl.build_manifold(spec)
    c = m.center_node()
    d = np.linalg.norm(m.nodes, axis=1)
    ties = np.where(np.round(d, 12) == np.round(d[c], 12))[0]
    assert c == ties.min()


def test_manifold_roundtrip(tmp_path, box8):
    path = tmp_path / "manifold.txt"
    gl.save_manifold(box8, str(path))
    m2 = gl.load_manifold(str(path))
    assert m2.n_nodes == box8.n_nodes
    assert np.allclose(m2.volume_weights, box8.volume_weights)
    assert np.array_equal(m2.boundary_mask, box8.boundary_mask)

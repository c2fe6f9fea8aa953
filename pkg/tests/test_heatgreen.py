import numpy as np
import pytest

import greenlab as gl
from oracles import hyperbolic_green_exact

EUCLID_C1 = (4 * np.pi) ** -1.5


# -- heat columns -------------------------------------------------------------

@pytest.fixture(scope="module")
def fine_box():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=2.0,
                         grid_points_per_axis=48)
    m = gl.build_manifold(spec)
    return m, gl.assemble_laplace_beltrami(m)


def test_heat_kernel_on_diagonal(fine_box):
    m, L = fine_box
    y = m.center_node()
    col = gl.heat_column(m, L, y, 0.1)
    exact = (4 * np.pi * 0.1) ** -1.5
    assert col.values[y] == pytest.approx(exact, rel=0.05)


def test_heat_kernel_off_diagonal(fine_box):
    m, L = fine_box
    y = m.center_node()
    col = gl.heat_column(m, L, y, 0.1)
    d = gl.distance_field(m, y)
    j = int(np.argmin(np.abs(d - 0.5)))
    exact = (4 * np.pi * 0.1) ** -1.5 * np.exp(-d[j] ** 2 / 0.4)
    assert col.values[j] == pytest.approx(exact, rel=0.05)


def test_heat_kernel_submarkovian(green_box):
    m, L = green_box["m"], green_box["L"]
    for t in (0.05, 0.5, 2.0):
        col = gl.heat_column(m, L, green_box["y"], t)
        mass = float(np.sum(m.volume_weights * col.values))
        assert mass <= 1.0 + 1e-7
        assert col.values.min() >= -1e-8 * col.values.max()


def test_heat_rejects_boundary_base(green_box):
    m, L = green_box["m"], green_box["L"]
    b = int(np.where(m.boundary_mask)[0][0])
    with pytest.raises(gl.InvalidSpecError):
        gl.heat_column(m, L, b, 0.1)


def test_chapman_kolmogorov(green_box):
    m, L, y = green_box["m"], green_box["L"], green_box["y"]
    res = gl.chapman_kolmogorov_residual(m, L, y, 0.05, 0.05)
    assert res <= 2e-8
    res0 = gl.chapman_kolmogorov_residual(m, L, y, 0.0, 0.05)
    assert res0 <= 1e-8


def test_chapman_kolmogorov_base_point_sweep(green_box):
    m, L = green_box["m"], green_box["L"]
    rng = np.random.default_rng(3)
    nodes = rng.choice(np.where(m.interior)[0], size=5, replace=False)
    res = [gl.chapman_kolmogorov_residual(m, L, int(y), 0.05, 0.05)
           for y in nodes]
    assert max(res) <= 2e-8


# -- envelope fit -------------------------------------------------------------

def synthetic_euclidean_samples():
    ts = np.geomspace(0.05, 1.0, 12)
    ds = np.linspace(0.0, 1.5, 7)
    out = []
    for t in ts:
        for d in ds:
            out.append((t, d, (4 * np.pi * t) ** -1.5 * np.exp(-d ** 2 / (4 * t))))
    return out


def test_fit_exact_euclidean_kernel():
    fit = gl.fit_gaussian_bound(synthetic_euclidean_samples())
    assert fit.C1 == pytest.approx(EUCLID_C1, rel=0.10)
    assert abs(fit.C2 - 4.0) <= 0.5
    assert fit.residual <= 1e-12


def test_fit_envelope_property_holds():
    samples = synthetic_euclidean_samples()
    fit = gl.fit_gaussian_bound(samples)
    for t, d, p in samples:
        assert p <= fit.envelope(t, d) * (1 + 1e-12)


def test_fit_single_sample():
    fit = gl.fit_gaussian_bound([(1.0, 0.0, 0.01)])
    assert fit.C1 == pytest.approx(0.01, abs=1e-15)
    assert fit.C2 == 2.0  # grid minimum


def test_fit_scaling_homogeneity():
    base = synthetic_euclidean_samples()
    doubled = [(t, d, 2 * p) for t, d, p in base]
    f1 = gl.fit_gaussian_bound(base)
    f2 = gl.fit_gaussian_bound(doubled)
    assert f2.C1 == pytest.approx(2 * f1.C1, rel=1e-12)
    assert f2.C2 == f1.C2


def test_fit_rejects_degenerate():
    with pytest.raises(gl.InvalidSpecError):
        gl.fit_gaussian_bound([])
    with pytest.raises(gl.InvalidSpecError):
        gl.fit_gaussian_bound([(0.0, 0.1, 1.0)])
    with pytest.raises(gl.InvalidSpecError):
        gl.fit_gaussian_bound([(1.0, 0.1, -1.0)])


# -- Green's function ---------------------------------------------------------

def test_green_requires_gap(green_box):
    with pytest.raises(gl.GreenlabError, match="smallest_eigenpairs"):
        gl.green_via_heat(green_box["m"], green_box["L"], green_box["y"])


def test_green_heat_matches_coulomb(green_box):
    m, Gh = green_box["m"], green_box["Gh"]
    d = gl.distance_field(m, green_box["y"])
    mask = m.interior & (d > 2 * m.h * (1 + 1e-9)) & (d < 1.0)
    err = Gh.values[mask] * 4 * np.pi * d[mask] - 1.0
    assert np.abs(err).max() <= 0.05


def test_green_solve_point_value():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=2.0,
                         grid_points_per_axis=33)
    m = gl.build_manifold(spec)
    L = gl.assemble_laplace_beltrami(m)
    lam1 = gl.smallest_eigenpairs(L, k=1, tol=1e-8)[0][0]
    y = m.center_node()
    Gh = gl.green_via_heat(m, L, y, lam1=lam1)
    Gs = gl.green_via_solve(m, L, y, correction=Gh.meta["correction"])
    d = gl.distance_field(m, y)
    j = int(np.argmin(np.abs(d - 0.25)))
    assert Gs.values[j] == pytest.approx(1 / (4 * np.pi * d[j]), rel=0.05)


def test_green_two_methods_agree(green_box):
    m = green_box["m"]
    d = gl.distance_field(m, green_box["y"])
    mask = m.interior & (d > 2 * m.h * (1 + 1e-9)) & \
        (m.boundary_distance() > 2 * m.h)
    gh = green_box["Gh"].values[mask]
    gs = green_box["Gs"].values[mask]
    assert np.max(np.abs(gh - gs) / np.abs(gs)) <= 0.02


def test_green_symmetry(green_box):
    m, L = green_box["m"], green_box["L"]
    y1 = green_box["y"]
    d = gl.distance_field(m, y1)
    y2 = int(np.argmin(np.abs(d - 0.5)))
    G1 = gl.green_via_solve(m, L, y1, tol=1e-12)
    G2 = gl.green_via_solve(m, L, y2, tol=1e-12)
    assert G1.values[y2] == pytest.approx(G2.values[y1], rel=1e-6)


def test_green_monotone_in_domain_size():
    fields = {}
    for hw, n in ((1.5, 19), (2.5, 31)):  # same spacing, nested boxes
        spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=hw,
                             grid_points_per_axis=n)
        m = gl.build_manifold(spec)
        L = gl.assemble_laplace_beltrami(m)
        G = gl.green_via_solve(m, L, m.center_node(), tol=1e-12)
        fields[hw] = (m, G)
    m_small, g_small = fields[1.5]
    m_big, g_big = fields[2.5]
    # match nodes of the small box inside the big one
    for i in np.where(m_small.interior)[0][::7]:
        j = np.where(np.all(np.isclose(m_big.nodes, m_small.nodes[i],
                                       atol=1e-9), axis=1))[0]
        assert len(j) == 1
        assert g_big.values[j[0]] >= g_small.values[i] - 1e-12


def test_green_positivity_enforced(green_box):
    assert green_box["Gh"].values[green_box["m"].interior].min() > 0


def test_hyperbolic_green_radial(hyperbolic_line):
    m = hyperbolic_line
    L = gl.assemble_laplace_beltrami(m)
    y = 0  # innermost cell stands in for the origin
    G = gl.green_via_solve(m, L, y, tol=1e-12)
    r = m.nodes[:, 0]
    sel = (r > 0.5) & (r < 8.0)
    exact = hyperbolic_green_exact(r[sel])
    assert np.allclose(G.values[sel], exact, rtol=0.05)
    # strictly below the Euclidean Coulomb value at equal distance
    assert np.all(G.values[sel] < 1 / (4 * np.pi * r[sel]))


def test_stencil_ratio_table_reproducible():
    tab = gl.stencil_green_ratios()
    # nearest-neighbor value of the free lattice Green's function is
    # g(0) - 1/6 with g(0) = 0.2527...; the ratio follows
    assert tab[(0, 0, 1)] == pytest.approx(1 / (4 * np.pi) / 0.0857746, rel=2e-3)
    assert tab[(0, 1, 2)] == pytest.approx(1.0, abs=0.02)


# -- decay constant and Laplace-transform constant ----------------------------

def test_c3_prediction_formula():
    fit = gl.GaussianBoundFit(C1=EUCLID_C1, C2=4.0, residual=0.0,
                              sample_window=(0, 1, 1))
    c3_pred = 4 * fit.C1 * np.sqrt(np.pi) / np.sqrt(fit.C2)
    assert c3_pred == pytest.approx(1 / (4 * np.pi), rel=1e-12)


def test_c3_chain(green_box):
    c3m, c3p, ok = gl.green_decay_constant(green_box["m"], green_box["Gh"],
                                           green_box["fit"])
    assert ok
    assert c3p == pytest.approx(1 / (4 * np.pi), rel=0.15)
    assert c3m == pytest.approx(1 / (4 * np.pi), rel=0.10)


def test_c3_linear_in_c1(green_box):
    fit = green_box["fit"]
    doubled = gl.GaussianBoundFit(C1=2 * fit.C1, C2=fit.C2, residual=fit.residual,
                                  sample_window=fit.sample_window)
    _, p1, _ = gl.green_decay_constant(green_box["m"], green_box["Gh"], fit)
    _, p2, _ = gl.green_decay_constant(green_box["m"], green_box["Gh"], doubled)
    assert p2 == pytest.approx(2 * p1, rel=1e-12)


def test_kato_constant_values(green_box):
    m, L, lam1 = green_box["m"], green_box["L"], green_box["lam1"]
    values = gl.kato_sweep(m, L, green_box["Gh"], [1.0, 4.0], lam1)
    assert values[0].value == pytest.approx(1 / (4 * np.pi), rel=0.10)
    assert values[1].value == pytest.approx(1 / (8 * np.pi), rel=0.10)


def test_kato_scaling_slope(green_box):
    m, L, lam1 = green_box["m"], green_box["L"], green_box["lam1"]
    rr = [1.0, 4.0, 16.0, 64.0]
    values = gl.kato_sweep(m, L, green_box["Gh"], rr, lam1)
    cc = [kv.value for kv in values]
    slope = np.polyfit(np.log(rr), np.log(cc), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)
    scaled = np.array(cc) * np.sqrt(rr)
    assert scaled.max() / scaled.min() <= 1.25  # bounded across two decades


def test_kato_resolvent_cross_check(green_box):
    # independent route: int_0^inf e^{-rs} e^{-sL} G ds = (L + r)^{-1} G
    m, L, lam1 = green_box["m"], green_box["L"], green_box["lam1"]
    r = 2.0
    quad = gl.kato_class_constant(m, L, green_box["Gh"], r, lam1)
    res = gl.solve_spd(L, green_box["Gh"].values, shift=r, tol=1e-12)
    ref = float(np.real(res[m.interior].max()))
    assert quad == pytest.approx(ref, rel=0.03)


def test_kato_rejects_bad_r(green_box):
    with pytest.raises(gl.InvalidSpecError):
        gl.kato_class_constant(green_box["m"], green_box["L"],
                               green_box["Gh"], -1.0, green_box["lam1"])

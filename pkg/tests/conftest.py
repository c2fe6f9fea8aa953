import numpy as np
import pytest

import greenlab as gl


@pytest.fixture(scope="session")
def box8():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=1.0,
                         grid_points_per_axis=8)
    return gl.build_manifold(spec)


@pytest.fixture(scope="session")
def box8_laplacian(box8):
    return gl.assemble_laplace_beltrami(box8)


@pytest.fixture(scope="session")
def hyperbolic_line():
    spec = gl.MetricSpec(kind=gl.Kind.WARPED_RADIAL,
                         warp_profile=gl.WarpProfile.HYPERBOLIC,
                         r_max=14.0, radial_points=1400, angular_mode_cutoff=2)
    return gl.build_manifold(spec)


@pytest.fixture(scope="session")
def green_box():
    """Shared mid-size box with the full Green bundle (heat + solve + fit)."""
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=2.0,
                         grid_points_per_axis=24)
    m = gl.build_manifold(spec)
    L = gl.assemble_laplace_beltrami(m)
    lam1 = gl.smallest_eigenpairs(L, k=1, tol=1e-9)[0][0]
    y = m.center_node()
    Gh = gl.green_via_heat(m, L, y, lam1=lam1)
    Gs = gl.green_via_solve(m, L, y, correction=Gh.meta["correction"])
    fit = gl.fit_gaussian_bound(Gh.meta["envelope_samples"])
    return {"m": m, "L": L, "lam1": lam1, "y": y, "Gh": Gh, "Gs": Gs, "fit": fit}


def random_unit(rng, n, complex_valued=True):
    v = rng.standard_normal(n)
    if complex_valued:
        v = v + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)

"""Independent reference computations for the test suite.

Everything here deliberately avoids the package's own assembly/solver paths:
fine 1-D finite differences, shooting integrators, dense linear algebra and
quadrature only.
"""

import numpy as np
import scipy.integrate as si
import scipy.linalg as sla


def cube_dirichlet_lowest(n: int, half_width: float) -> float:
    """Lowest Dirichlet eigenvalue of the 7-point Laplacian on the vertex
    grid: product sine modes give 3 * (2/h^2) (1 - cos(pi h / (2 hw)))."""
    h = 2 * half_width / (n - 1)
    return 3.0 * (2.0 / h ** 2) * (1.0 - np.cos(np.pi * h / (2 * half_width)))


def hyperbolic_ball_ratio(r: float) -> float:
    """vol(K_r)/r^3 on the curvature -1 space form, by quadrature."""
    val, _ = si.quad(lambda s: 4 * np.pi * np.sinh(s) ** 2, 0.0, r)
    return val / r ** 3


def hyperbolic_green_exact(r: np.ndarray) -> np.ndarray:
    """Radial solution of the point-source problem on the curvature -1
    space form: (coth r - 1) / (4 pi)."""
    return (1.0 / np.tanh(r) - 1.0) / (4 * np.pi)


def radial_shoot_lowest_hyperbolic(r_max: float, lam_lo=0.2, lam_hi=3.0,
                                   iters: int = 60) -> float:
    """Shooting + bisection for the lowest radial Dirichlet eigenvalue of
    -f^{-2} (f^2 u')' with f = sinh on (0, r_max)."""

    def endpoint(lam):
        def rhs(r, yv):
            u, du = yv
            return [du, -2.0 / np.tanh(r) * du - lam * u]
        sol = si.solve_ivp(rhs, (1e-6, r_max), [1.0, 0.0], rtol=1e-9, atol=1e-12,
                           dense_output=False)
        return sol.y[0, -1]

    f_lo = endpoint(lam_lo)
    for _ in range(iters):
        mid = 0.5 * (lam_lo + lam_hi)
        f_mid = endpoint(mid)
        if np.sign(f_mid) == np.sign(f_lo):
            lam_lo, f_lo = mid, f_mid
        else:
            lam_hi = mid
    return 0.5 * (lam_lo + lam_hi)


def hydrogen_ground_state_radial(kappa: float, r_max: float = 40.0,
                                 n: int = 6000) -> float:
    """Ground state of -Laplace - kappa/(4 pi r) from a fine 1-D radial
    grid: substitute v = r u, solve -v'' - kappa/(4 pi r) v on (0, r_max)."""
    h = r_max / n
    r = (np.arange(1, n) * h)
    main = 2.0 / h ** 2 - kappa / (4 * np.pi * r)
    off = np.full(n - 2, -1.0 / h ** 2)
    vals = sla.eigh_tridiagonal(main, off, select="i", select_range=(0, 0))[0]
    return float(vals[0])


def dense_expm_apply(op, t: float, f: np.ndarray) -> np.ndarray:
    """Reference semigroup action via a dense matrix exponential."""
    S, ia = op.interior_sym()
    sw = np.sqrt(op.weights)
    v = (f * sw)[ia]
    u = sla.expm(-t * S.toarray()) @ v
    out = np.zeros(op.dim, dtype=u.dtype)
    out[ia] = u
    return out / sw


def dense_low_eigs(op, k: int) -> np.ndarray:
    S, _ = op.interior_sym()
    return np.linalg.eigvalsh(S.toarray())[:k]

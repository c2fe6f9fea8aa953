"""Exact discrete invariants, run as a seeded battery.

These are the identities the discretization turns into theorems rather than
approximations: weighted Hermiticity of every assembled operator, the
pointwise Kato inequality for unitary links, gauge invariance of spectra,
the semigroup composition law, and positive semidefiniteness of the squared
Dirac operator.  Each trial draws fresh random data from the seed; a failure
count of zero is the expected outcome at any trial count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bundles import (assemble_bochner, assemble_laplace_beltrami, assemble_pauli,
                      connection_from_potential, gauge_transform,
                      kato_inequality_check, plaquette_holonomies,
                      random_fourier_potential)
from .geometry import Kind, MetricSpec, build_manifold
from .heatgreen import chapman_kolmogorov_residual
from .spectral import SparseHermitianOperator

HERMITICITY_BOUND = 1e-12
GAUGE_SPECTRUM_BOUND = 1e-6
PAULI_PSD_BOUND = -1e-10
SEMIGROUP_TOL = 1e-8


@dataclass
class InvariantReport:
    trials: int
    failures: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)

    @property
    def total_failures(self) -> int:
        return sum(self.failures.values())


def _dense_low_spectrum(op: SparseHermitianOperator, k: int) -> np.ndarray:
    S, _ = op.interior_sym()
    return np.linalg.eigvalsh(S.toarray())[:k]


def run_invariant_battery(trials: int = 100, seed: int = 0,
                          grid_points: int = 8, half_width: float = 1.0) -> InvariantReport:
    """Run all five exact-invariant families ``trials`` times each."""
    spec = MetricSpec(kind=Kind.FLAT_BOX, box_half_width=half_width,
                      grid_points_per_axis=grid_points)
    m = build_manifold(spec)
    L = assemble_laplace_beltrami(m)
    rep = InvariantReport(trials=trials)
    fail = {k: 0 for k in ("hermiticity", "kato_inequality", "gauge_spectra",
                           "gauge_holonomy", "chapman_kolmogorov", "pauli_psd")}
    worst = {k: 0.0 for k in fail}
    worst["pauli_psd"] = np.inf  # smallest eigenvalue seen

    interior_nodes = np.where(m.interior)[0]
    for trial in range(trials):
        rng = np.random.default_rng(seed + 1000 * trial)
        beta = random_fourier_potential(m, seed=seed + trial, amplitude=3.0)
        conn = connection_from_potential(m, beta, rank=1)
        conn2 = connection_from_potential(m, beta, rank=2)

        # 1. weighted Hermiticity of everything assembled this trial
        B = assemble_bochner(m, conn)
        res = max(L.hermiticity_residual(), B.hermiticity_residual())
        worst["hermiticity"] = max(worst["hermiticity"], res)
        fail["hermiticity"] += res > HERMITICITY_BOUND

        # 2. Kato inequality, scalar and spinor fields
        f1 = rng.standard_normal(m.n_nodes) + 1j * rng.standard_normal(m.n_nodes)
        _, _, ok1 = kato_inequality_check(m, conn, f1)
        f2 = rng.standard_normal(2 * m.n_nodes) + 1j * rng.standard_normal(2 * m.n_nodes)
        _, _, ok2 = kato_inequality_check(m, conn2, f2)
        fail["kato_inequality"] += (not ok1) + (not ok2)

        # 3. gauge invariance: lowest three eigenvalues and all holonomies
        chi = rng.standard_normal(m.n_nodes)
        Bg = assemble_bochner(m, gauge_transform(conn, chi, m))
        e0 = _dense_low_spectrum(B, 3)
        e1 = _dense_low_spectrum(Bg, 3)
        res = float(np.abs(e0 - e1).max())
        worst["gauge_spectra"] = max(worst["gauge_spectra"], res)
        fail["gauge_spectra"] += res > GAUGE_SPECTRUM_BOUND
        h0 = plaquette_holonomies(m, conn)[(0, 1)][1]
        h1 = plaquette_holonomies(m, gauge_transform(conn, chi, m))[(0, 1)][1]
        res = float(np.abs(h0 - h1).max())
        worst["gauge_holonomy"] = max(worst["gauge_holonomy"], res)
        fail["gauge_holonomy"] += res > 1e-10

        # 4. Chapman-Kolmogorov on a random interior base point
        y = int(rng.choice(interior_nodes))
        res = chapman_kolmogorov_residual(m, L, y, 0.05, 0.05, tol=SEMIGROUP_TOL)
        worst["chapman_kolmogorov"] = max(worst["chapman_kolmogorov"], res)
        fail["chapman_kolmogorov"] += res > 2 * SEMIGROUP_TOL

        # 5. squared Dirac operator is PSD
        P, _, _ = assemble_pauli(m, conn2)
        lam_min = float(_dense_low_spectrum(P, 1)[0])
        worst["pauli_psd"] = min(worst["pauli_psd"], lam_min)
        fail["pauli_psd"] += lam_min < PAULI_PSD_BOUND

    rep.failures = fail
    rep.worst = {k: float(v) for k, v in worst.items()}
    return rep

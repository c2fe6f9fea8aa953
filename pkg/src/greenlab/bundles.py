"""Operator assembly: scalar Laplacians, unitary-link connections, magnetic
(Bochner) Laplacians, Dirac and Pauli operators.

Conventions that the rest of the lab relies on:

* Links follow the midpoint rule ``U = exp(i * beta_mid . edge)``, so they
  are exactly unitary; gauge covariance and the diamagnetic comparison hold
  as exact discrete identities, not up to discretization error.
* The covariant forward difference drives the second-order (Bochner)
  stencil; the Dirac operator uses covariant *central* differences, which
  keeps it Hermitian without boundary correction terms at the price of a
  wider square.
* Clifford matrices are ``gamma_j = i sigma_j`` with Pauli ``sigma_j``, so
  ``gamma_j`` is anti-self-adjoint, ``gamma_j^* gamma_j = 1`` and
  ``gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij``.
* The Pauli operator is the exact matrix square of the assembled Dirac
  operator.  Its companion connection Laplacian is built from the *same*
  central differences (``sum_j C_j^dagger C_j``), which makes the zero-field
  splitting an exact identity; the potential term is ``scal/4 + sigma . B``
  with ``B`` the curl of the stored vector potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSpecError, UnsupportedConfigError
from .geometry import DiscreteManifold, Kind
from .spectral import SparseHermitianOperator

_SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


@dataclass(frozen=True)
class CliffordStructure:
    """Three constant 2x2 Clifford generators."""

    gamma: np.ndarray = None

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", 1j * _SIGMA)

    def validate(self) -> None:
        g = self.gamma
        eye = np.eye(2)
        for j in range(3):
            if not np.allclose(g[j].conj().T, -g[j], atol=1e-14):
                raise InvalidSpecError("clifford generator is not anti-self-adjoint")
            if not np.allclose(g[j].conj().T @ g[j], eye, atol=1e-14):
                raise InvalidSpecError("clifford generator is not an isometry")
        for i in range(3):
            for j in range(3):
                anti = g[i] @ g[j] + g[j] @ g[i]
                want = -2.0 * eye if i == j else np.zeros((2, 2))
                if not np.allclose(anti, want, atol=1e-13):
                    raise InvalidSpecError("clifford anticommutation relations fail")


@dataclass
class ConnectionData:
    """Per-edge unitary links over ``m.edge_list`` (forward orientation).

    ``links`` is complex of shape ``(E,)`` for rank 1 and ``(E, 2, 2)`` for
    rank 2; the reverse-edge link is the adjoint by construction.
    ``potential_form`` keeps the per-node 1-form the links were built from,
    which the Pauli assembly needs to form its potential term.
    """

    rank: int
    links: np.ndarray
    potential_form: np.ndarray | None = None

    def validate(self) -> None:
        if self.rank == 1:
            if not np.allclose(np.abs(self.links), 1.0, atol=1e-12):
                raise InvalidSpecError("rank-1 links must be unit phases")
        elif self.rank == 2:
            prod = np.einsum("eji,ejk->eik", self.links.conj(), self.links)
            if not np.allclose(prod, np.eye(2), atol=1e-12):
                raise InvalidSpecError("rank-2 links must be unitary")
        else:
            raise InvalidSpecError("rank must be 1 or 2")

    def phases(self) -> np.ndarray:
        """Scalar phase per edge (rank-2 links here are phase * identity)."""
        if self.rank == 1:
            return self.links
        return self.links[:, 0, 0]


def identity_connection(m: DiscreteManifold, rank: int = 1) -> ConnectionData:
    E = m.edge_list.shape[0]
    if rank == 1:
        links = np.ones(E, dtype=complex)
    else:
        links = np.broadcast_to(np.eye(2, dtype=complex), (E, 2, 2)).copy()
    return ConnectionData(rank=rank, links=links,
                          potential_form=np.zeros((m.n_nodes, 3)))


def connection_from_potential(m: DiscreteManifold, beta: np.ndarray,
                              rank: int = 1) -> ConnectionData:
    """Peierls links ``exp(i beta_mid . (x_j - x_i))`` from a node 1-form.

    The midpoint value is the average of the endpoint values (exact for
    affine ``beta``, which keeps constant-field plaquette fluxes exact).
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (m.n_nodes, 3):
        raise InvalidSpecError("beta must have shape (n_nodes, 3)")
    if not np.all(np.isfinite(beta)):
        raise InvalidSpecError("beta must be finite")
    if rank == 2 and m.spec.kind != Kind.FLAT_BOX:
        raise UnsupportedConfigError(
            "rank-2 connections are only assembled on the FlatBox backend")
    i, j = m.edge_list[:, 0], m.edge_list[:, 1]
    dx = m.nodes[j] - m.nodes[i]
    mid = 0.5 * (beta[i] + beta[j])
    theta = np.einsum("ec,ec->e", mid, dx)
    phase = np.exp(1j * theta)
    if rank == 1:
        links = phase
    else:
        links = phase[:, None, None] * np.eye(2, dtype=complex)
    return ConnectionData(rank=rank, links=links, potential_form=beta)


def gauge_transform(conn: ConnectionData, chi: np.ndarray,
                    m: DiscreteManifold) -> ConnectionData:
    """``U_ij -> exp(i chi_i) U_ij exp(-i chi_j)``; unitarity is preserved exactly."""
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (m.n_nodes,):
        raise InvalidSpecError("chi must be a real per-node field")
    i, j = m.edge_list[:, 0], m.edge_list[:, 1]
    factor = np.exp(1j * (chi[i] - chi[j]))
    if conn.rank == 1:
        links = conn.links * factor
    else:
        links = conn.links * factor[:, None, None]
    return ConnectionData(rank=conn.rank, links=links,
                          potential_form=conn.potential_form)


# ---------------------------------------------------------------------------
# second-order operators
# ---------------------------------------------------------------------------

def _expand_block(rows, cols, vals, block: int):
    if block == 1:
        return rows, cols, vals
    r = np.repeat(rows * block, block) + np.tile(np.arange(block), len(rows))
    c = np.repeat(cols * block, block) + np.tile(np.arange(block), len(cols))
    v = np.repeat(vals, block)
    return r, c, v


def _divergence_stencil(m: DiscreteManifold, phases: np.ndarray | None):
    """COO data of the tight covariant stencil, with Dirichlet elimination.

    Diagonal entries carry the full edge sum (so constants are annihilated
    before elimination); off-diagonal entries survive only between interior
    nodes.
    """
    w = m.volume_weights
    i, j = m.edge_list[:, 0], m.edge_list[:, 1]
    c = m.edge_coeff
    inter = m.interior

    diag = np.zeros(m.n_nodes)
    np.add.at(diag, i, c / w[i])
    np.add.at(diag, j, c / w[j])

    keep = inter[i] & inter[j]
    ik, jk, ck = i[keep], j[keep], c[keep]
    if phases is None:
        off_vals = np.concatenate([-ck / w[ik], -ck / w[jk]])
        dtype = float
    else:
        ph = phases[keep]
        off_vals = np.concatenate([-ck / w[ik] * ph, -ck / w[jk] * np.conj(ph)])
        dtype = complex
    rows = np.concatenate([ik, jk, np.where(inter)[0]])
    cols = np.concatenate([jk, ik, np.where(inter)[0]])
    vals = np.concatenate([off_vals, diag[inter].astype(dtype)])
    return rows, cols, vals


def assemble_laplace_beltrami(m: DiscreteManifold, ell: int = 0) -> SparseHermitianOperator:
    """Nonnegative scalar Laplacian ``d^dagger d`` in divergence form.

    On FlatBox this is the 7-point stencil ``6/h^2`` diagonal, ``-1/h^2``
    neighbors.  On WarpedRadial it is the radial reduction
    ``-f^{-2} (f^2 u')' + ell(ell+1) f^{-2} u`` for spherical-harmonic
    degree ``ell``.
    """
    if ell < 0:
        raise InvalidSpecError("ell must be >= 0")
    if ell > 0 and m.spec.kind != Kind.WARPED_RADIAL:
        raise UnsupportedConfigError("angular modes only apply to WarpedRadial")
    if ell > m.spec.angular_mode_cutoff and m.spec.kind == Kind.WARPED_RADIAL:
        raise InvalidSpecError("ell exceeds the angular_mode_cutoff of the spec")
    rows, cols, vals = _divergence_stencil(m, None)
    if ell > 0:
        idx = np.where(m.interior)[0]
        rows = np.concatenate([rows, idx])
        cols = np.concatenate([cols, idx])
        vals = np.concatenate([vals, ell * (ell + 1) / m.warp[idx] ** 2])
    op = SparseHermitianOperator(m.n_nodes, rows, cols, vals,
                                 m.volume_weights.copy(), 1,
                                 m.interior.copy())
    op.validate()
    return op


def assemble_bochner(m: DiscreteManifold, conn: ConnectionData) -> SparseHermitianOperator:
    """Covariant tight stencil ``nabla^dagger nabla`` for unitary links.

    Reduces entrywise to the scalar Laplacian when every link is the
    identity.  Rank 2 expands blockwise (links are phase times identity).
    """
    conn.validate()
    rows, cols, vals = _divergence_stencil(m, conn.phases())
    block = conn.rank if conn.rank == 2 else 1
    rows, cols, vals = _expand_block(rows, cols, vals, block)
    weights = np.repeat(m.volume_weights, block) if block > 1 else m.volume_weights.copy()
    active = np.repeat(m.interior, block) if block > 1 else m.interior.copy()
    op = SparseHermitianOperator(m.n_nodes * block, rows, cols,
                                 np.asarray(vals, dtype=complex),
                                 weights, block, active)
    op.validate()
    return op


# ---------------------------------------------------------------------------
# Dirac / Pauli
# ---------------------------------------------------------------------------

def _axis_edge_index(m: DiscreteManifold):
    """Edge index per (node, axis) for the FlatBox edge layout."""
    n = m.spec.grid_points_per_axis
    N = n ** 3
    per_axis = n * n * (n - 1)
    lookup = -np.ones((3, N), dtype=int)
    strides = (n * n, n, 1)
    base = 0
    for a, s in enumerate(strides):
        coord = (np.arange(N) // s) % n
        ok = np.where(coord + 1 < n)[0]
        lookup[a, ok] = base + np.arange(len(ok))
        base += len(ok)
    assert base == m.edge_list.shape[0] == 3 * per_axis
    return lookup, strides


def _covariant_central_difference(m: DiscreteManifold, phases: np.ndarray, axis: int):
    """Node-level covariant central difference along ``axis`` (anti-Hermitian)."""
    n = m.spec.grid_points_per_axis
    N = n ** 3
    lookup, strides = _axis_edge_index(m)
    s = strides[axis]
    h = m.h
    inter = m.interior
    idx = np.arange(N)
    coord = (idx // s) % n

    rows, cols, vals = [], [], []
    fwd = (coord + 1 < n)
    ok = fwd & inter & np.roll(inter, 0)
    src = idx[ok]
    dst = src + s
    keep = inter[src] & inter[dst]
    src, dst = src[keep], dst[keep]
    ph = phases[lookup[axis, src]]
    rows.append(src); cols.append(dst); vals.append(ph / (2 * h))
    rows.append(dst); cols.append(src); vals.append(-np.conj(ph) / (2 * h))
    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(N, N))


def assemble_dirac(m: DiscreteManifold, conn: ConnectionData,
                   cliff: CliffordStructure | None = None) -> SparseHermitianOperator:
    """``D = sum_j gamma_j (x) C_j`` with covariant central differences ``C_j``."""
    if m.spec.kind != Kind.FLAT_BOX:
        raise UnsupportedConfigError("Dirac operators are assembled on FlatBox only")
    if conn.rank != 2:
        raise InvalidSpecError("Dirac assembly needs a rank-2 connection")
    conn.validate()
    cliff = cliff or CliffordStructure()
    cliff.validate()
    phases = conn.phases()
    N = m.n_nodes
    D = sp.csr_matrix((2 * N, 2 * N), dtype=complex)
    for a in range(3):
        C = _covariant_central_difference(m, phases, a)
        D = D + sp.kron(C, sp.csr_matrix(cliff.gamma[a]), format="csr")
    # kron(C, gamma) indexes spinor components fastest: index = node*2 + comp
    coo = D.tocoo()
    weights = np.repeat(m.volume_weights, 2)
    active = np.repeat(m.interior, 2)
    op = SparseHermitianOperator(2 * N, coo.row, coo.col, coo.data,
                                 weights, 2, active)
    op.validate()
    return op


@dataclass
class PotentialField:
    """Per-node Hermitian matrix potential (block 2)."""

    values: np.ndarray  # (N, 2, 2)

    def validate(self) -> None:
        if not np.allclose(self.values, np.conj(np.transpose(self.values, (0, 2, 1))),
                           atol=1e-12):
            raise InvalidSpecError("potential must be Hermitian at every node")

    def apply(self, f: np.ndarray) -> np.ndarray:
        g = f.reshape(-1, 2)
        return np.einsum("nij,nj->ni", self.values, g).reshape(-1)

    def hs_norms_sq(self) -> np.ndarray:
        return np.real(np.einsum("nij,nij->n", self.values, np.conj(self.values)))


def curl_of_potential(m: DiscreteManifold, beta: np.ndarray) -> np.ndarray:
    """``B_k = (1/2) eps_kij (d beta)_ij`` via central differences (one-sided at walls)."""
    n = m.spec.grid_points_per_axis
    comp = [beta[:, c].reshape(n, n, n) for c in range(3)]
    g = [np.gradient(comp[c], m.h) for c in range(3)]  # g[c][a] = d_a beta_c
    B1 = g[2][1] - g[1][2]
    B2 = g[0][2] - g[2][0]
    B3 = g[1][0] - g[0][1]
    return np.stack([B1.ravel(), B2.ravel(), B3.ravel()], axis=1)


def assemble_pauli(m: DiscreteManifold, conn: ConnectionData,
                   cliff: CliffordStructure | None = None):
    """Pauli triple ``(P, bochner, V)``.

    ``P`` is the exact matrix square of the Dirac operator.  ``bochner`` is
    the companion connection Laplacian built from the same central
    differences, so ``P - bochner`` is exactly the curvature term and the
    splitting residual vanishes identically at zero field.  ``V`` is
    ``scal/4 + sigma . B`` with ``B = curl beta`` (the rank-2 curvature trace
    over ``i`` is ``2 d beta``, and its Clifford contraction is the Zeeman
    term).
    """
    if conn.potential_form is None:
        raise InvalidSpecError("connection lacks potential_form; cannot form the "
                               "Pauli potential term")
    cliff = cliff or CliffordStructure()
    D = assemble_dirac(m, conn, cliff)
    Dcsr = D.csr()
    P_mat = (Dcsr @ Dcsr).tocoo()

    phases = conn.phases()
    N = m.n_nodes
    B_node = sp.csr_matrix((N, N), dtype=complex)
    for a in range(3):
        C = _covariant_central_difference(m, phases, a)
        B_node = B_node + (C.conj().T @ C)
    boch = sp.kron(B_node, sp.identity(2, format="csr"), format="coo")

    weights = np.repeat(m.volume_weights, 2)
    active = np.repeat(m.interior, 2)
    P = SparseHermitianOperator(2 * N, P_mat.row, P_mat.col, P_mat.data,
                                weights.copy(), 2, active.copy())
    Bop = SparseHermitianOperator(2 * N, boch.row, boch.col, boch.data,
                                  weights.copy(), 2, active.copy())
    P.validate()
    Bop.validate()

    Bfield = curl_of_potential(m, conn.potential_form)
    vals = 0.25 * m.scalar_curvature[:, None, None] * np.eye(2) \
        + np.einsum("nk,kij->nij", Bfield, _SIGMA)
    V = PotentialField(values=vals.astype(complex))
    V.validate()
    return P, Bop, V


def lichnerowicz_residual(P: SparseHermitianOperator, bochner: SparseHermitianOperator,
                          V: PotentialField, m: DiscreteManifold,
                          trials: int = 8, seed: int = 0) -> float:
    """max over trial spinors of ``||P f - (bochner f + V f)|| / ||f||``.

    Trial fields are band-limited random combinations of Dirichlet sine
    modes, which vanish at the wall and are grid-independent for a fixed
    seed (the two-grid convergence check relies on that).
    """
    worst = 0.0
    for trial in range(trials):
        f = smooth_spinor_field(m, seed=seed + trial)
        lhs = P.matvec(f)
        rhs = bochner.matvec(f) + V.apply(f)
        worst = max(worst, P.norm(lhs - rhs) / P.norm(f))
    return worst


def smooth_spinor_field(m: DiscreteManifold, seed: int = 0, n_modes: int = 3,
                        max_wavenumber: int = 3) -> np.ndarray:
    """Deterministic smooth spinor field from low Dirichlet sine modes."""
    rng = np.random.default_rng(seed)
    hw = m.spec.box_half_width
    x = (m.nodes + hw) * (np.pi / (2 * hw))  # in [0, pi]
    f = np.zeros((m.n_nodes, 2), dtype=complex)
    for _ in range(n_modes):
        q = rng.integers(1, max_wavenumber + 1, size=3)
        coef = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        mode = np.sin(q[0] * x[:, 0]) * np.sin(q[1] * x[:, 1]) * np.sin(q[2] * x[:, 2])
        f += np.outer(mode, coef)
    return f.reshape(-1)


def random_fourier_potential(m: DiscreteManifold, seed: int = 0,
                             amplitude: float = 1.0, n_modes: int = 3,
                             max_wavenumber: int = 2) -> np.ndarray:
    """Seeded smooth vector potential from a few low Fourier modes.

    Component amplitudes are normalized so the sup of each component stays
    below ``amplitude``; the field is grid independent for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    hw = m.spec.box_half_width
    beta = np.zeros((m.n_nodes, 3))
    for c in range(3):
        coefs = rng.standard_normal(n_modes)
        coefs *= amplitude / max(np.abs(coefs).sum(), 1e-300)
        for a in coefs:
            k = rng.integers(1, max_wavenumber + 1, size=3) * (np.pi / (2 * hw))
            phase = rng.uniform(0, 2 * np.pi)
            beta[:, c] += a * np.sin(m.nodes @ k + phase)
    return beta


def smooth_scalar_field(m: DiscreteManifold, seed: int = 0, n_modes: int = 3,
                        max_wavenumber: int = 3, complex_valued: bool = True) -> np.ndarray:
    """Scalar sibling of ``smooth_spinor_field``."""
    rng = np.random.default_rng(seed)
    hw = m.spec.box_half_width
    x = (m.nodes + hw) * (np.pi / (2 * hw))
    f = np.zeros(m.n_nodes, dtype=complex)
    for _ in range(n_modes):
        q = rng.integers(1, max_wavenumber + 1, size=3)
        coef = rng.standard_normal() + (1j * rng.standard_normal() if complex_valued else 0.0)
        f += coef * np.sin(q[0] * x[:, 0]) * np.sin(q[1] * x[:, 1]) * np.sin(q[2] * x[:, 2])
    return f


# ---------------------------------------------------------------------------
# forms, holonomy, self-energy, Kato inequality
# ---------------------------------------------------------------------------

def edge_energy(m: DiscreteManifold, u: np.ndarray) -> float:
    """Dirichlet energy ``sum_e c_e |u_i - u_j|^2`` over all edges."""
    i, j = m.edge_list[:, 0], m.edge_list[:, 1]
    return float(np.sum(m.edge_coeff * np.abs(u[i] - u[j]) ** 2))


def plaquette_holonomies(m: DiscreteManifold, conn: ConnectionData):
    """Holonomy phase around every elementary face, per axis pair.

    Returns a dict ``{(a, b): (anchor_nodes, holonomy_phases)}`` for
    ``a < b``; the holonomy is ``exp(i flux)`` through the face anchored at
    each node.
    """
    if m.spec.kind != Kind.FLAT_BOX:
        raise UnsupportedConfigError("plaquettes are defined on FlatBox only")
    n = m.spec.grid_points_per_axis
    N = n ** 3
    lookup, strides = _axis_edge_index(m)
    theta = np.angle(conn.phases())
    out = {}
    idx = np.arange(N)
    for a in range(3):
        for b in range(a + 1, 3):
            ca = (idx // strides[a]) % n
            cb = (idx // strides[b]) % n
            ok = (ca + 1 < n) & (cb + 1 < n)
            x = idx[ok]
            e1 = lookup[a, x]
            e2 = lookup[b, x + strides[a]]
            e3 = lookup[a, x + strides[b]]
            e4 = lookup[b, x]
            flux = theta[e1] + theta[e2] - theta[e3] - theta[e4]
            out[(a, b)] = (x, np.exp(1j * flux))
    return out


def self_energy(m: DiscreteManifold, V: PotentialField) -> float:
    """Volume integral of the squared fiberwise Hilbert-Schmidt norm of V."""
    V.validate()
    return float(np.sum(m.volume_weights * V.hs_norms_sq()))


def kato_inequality_check(m: DiscreteManifold, conn: ConnectionData,
                          f: np.ndarray):
    """Compare the scalar form at ``|f|`` with the covariant form at ``f``.

    Unitary links make ``| |f_i| - |f_j| | <= ||f_i - U f_j||`` edgewise, so
    the inequality is exact at the discrete level; ``holds`` allows only a
    relative 1e-12 slack for round-off.
    """
    B = assemble_bochner(m, conn)
    L = assemble_laplace_beltrami(m)
    if conn.rank == 1:
        absf = np.abs(f)
    else:
        absf = np.linalg.norm(f.reshape(-1, 2), axis=1)
    q_conn = float(np.real(B.inner(f, B.matvec(f))))
    q_abs = float(np.real(L.inner(absf, L.matvec(absf))))
    holds = q_abs <= q_conn + 1e-12 * max(q_conn, 1.0)
    return q_abs, q_conn, holds

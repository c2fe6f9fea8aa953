"""Sparse Hermitian linear algebra in a volume-weighted inner product.

Every operator in the lab is Hermitian with respect to
``<f, g> = sum_i w_i conj(f_i) g_i`` where ``w`` holds the volume weights.
The raw stencil entries are stored as given (so the weighted-Hermiticity
invariant ``w_i A_ij == conj(w_j A_ji)`` stays checkable); computations run
on the similarity transform ``S = W^{1/2} A W^{-1/2}``, which is Hermitian
in the plain inner product, restricted to the active (non-Dirichlet) rows.

Solvers:

* ``smallest_eigenpairs`` -- Lanczos (ARPACK's implicitly restarted variant
  with reorthogonalization) directly on the bottom of the spectrum, with a
  dense fallback for small problems.
* ``apply_semigroup``   -- Lanczos approximation of ``exp(-tA) f`` with full
  reorthogonalization and automatic sub-stepping when a step does not
  converge within the basis budget.
* ``solve_spd``         -- conjugate gradients with diagonal preconditioning
  and explicit negative-curvature detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, HermiticityError, InvalidSpecError

DEFAULT_TOL = 1e-8
DEFAULT_MAXITER = 5000
_HERMITICITY_RTOL = 1e-12
_DENSE_CUTOVER = 900


@dataclass
class SparseHermitianOperator:
    """Hermitian operator in the weighted inner product.

    ``dim`` counts matrix indices (nodes times ``block_size``); ``weights``
    has length ``dim`` (node volumes repeated per block component).
    ``active`` marks rows/columns that survived Dirichlet elimination;
    entries must only connect active indices.
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    weights: np.ndarray
    block_size: int = 1
    active: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.active is None:
            self.active = np.ones(self.dim, dtype=bool)
        if np.any(self.weights <= 0):
            raise InvalidSpecError("weights must be positive")
        if len(self.weights) != self.dim:
            raise InvalidSpecError("weight vector length must equal dim")

    # -- representation ----------------------------------------------------

    def csr(self) -> sp.csr_matrix:
        if "csr" not in self._cache:
            self._cache["csr"] = sp.csr_matrix(
                (self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim))
        return self._cache["csr"]

    def sym_csr(self) -> sp.csr_matrix:
        """W^{1/2} A W^{-1/2}, Hermitian in the plain inner product."""
        if "sym" not in self._cache:
            sw = np.sqrt(self.weights)
            A = self.csr()
            S = sp.diags(sw) @ A @ sp.diags(1.0 / sw)
            S = (S + S.conj().T) * 0.5  # scrub similarity round-off
            self._cache["sym"] = S.tocsr()
        return self._cache["sym"]

    def interior_sym(self) -> tuple[sp.csr_matrix, np.ndarray]:
        """Symmetrized matrix restricted to active indices, plus the index map."""
        if "int" not in self._cache:
            ia = np.where(self.active)[0]
            S = self.sym_csr()[np.ix_(ia, ia)].tocsr()
            self._cache["int"] = (S, ia)
        return self._cache["int"]

    def matvec(self, f: np.ndarray) -> np.ndarray:
        return self.csr() @ f

    def hermiticity_residual(self) -> float:
        """max |w_i A_ij - conj(w_j A_ji)| relative to the entry scale."""
        M = sp.diags(self.weights) @ self.csr()
        D = M - M.conj().T
        scale = max(np.abs(M.data).max() if M.nnz else 0.0, 1e-300)
        return float(np.abs(D.data).max() / scale) if D.nnz else 0.0

    def validate(self) -> None:
        if self.hermiticity_residual() > _HERMITICITY_RTOL:
            raise HermiticityError(
                f"weighted Hermiticity residual {self.hermiticity_residual():.3e} "
                f"exceeds {_HERMITICITY_RTOL:.0e}")
        bad = ~self.active
        if np.any(bad[self.rows]) or np.any(bad[self.cols]):
            raise HermiticityError("entries present on eliminated rows/columns")

    def gershgorin_bound(self) -> float:
        A = self.sym_csr()
        return float(np.abs(A).sum(axis=1).max())

    def shifted(self, c: float) -> "SparseHermitianOperator":
        """A + c*I on the active set."""
        ia = np.where(self.active)[0]
        rows = np.concatenate([self.rows, ia])
        cols = np.concatenate([self.cols, ia])
        vals = np.concatenate([self.vals, np.full(len(ia), c, dtype=self.vals.dtype)])
        return SparseHermitianOperator(self.dim, rows, cols, vals,
                                       self.weights, self.block_size,
                                       self.active.copy())

    # -- weighted geometry ---------------------------------------------------

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.real(np.sum(self.weights * np.abs(f) ** 2))))

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return complex(np.sum(self.weights * np.conj(f) * g))


def weighted_norm(w: np.ndarray, f: np.ndarray) -> float:
    return float(np.sqrt(np.real(np.sum(w * np.abs(f) ** 2))))


# ---------------------------------------------------------------------------
# eigenpairs
# ---------------------------------------------------------------------------

def smallest_eigenpairs(A: SparseHermitianOperator, k: int = 1,
                        tol: float = DEFAULT_TOL, maxiter: int = DEFAULT_MAXITER,
                        seed: int = 0, v0: np.ndarray | None = None):
    """The ``k`` lowest eigenpairs, ascending, weighted-orthonormal vectors.

    Residuals ``||A v - lam v||_w <= tol`` are verified; non-convergence
    raises ``ConvergenceError`` carrying the best residual seen.
    """
    if k < 1:
        raise InvalidSpecError("k must be >= 1")
    if tol <= 0:
        raise InvalidSpecError("tol must be positive")
    S, ia = A.interior_sym()
    n = S.shape[0]
    if k > n:
        raise InvalidSpecError(f"k={k} exceeds active dimension {n}")

    if n <= max(_DENSE_CUTOVER, 3 * k + 2):
        lam, V = np.linalg.eigh(S.toarray())
        lam, V = lam[:k], V[:, :k]
    else:
        scale = max(A.gershgorin_bound(), 1.0)
        rng = np.random.default_rng(seed)
        if v0 is None:
            v0 = rng.standard_normal(n)
        else:
            v0 = np.asarray(v0)[ia].real.astype(float)
        arp_tol = max(tol / scale, 1e-15)
        try:
            lam, V = spla.eigsh(S, k=k, which="SA", tol=arp_tol,
                                maxiter=maxiter, v0=v0)
        except spla.ArpackNoConvergence as exc:
            best = None
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                lamp, Vp = exc.eigenvalues, exc.eigenvectors
                best = float(np.linalg.norm(S @ Vp[:, 0] - lamp[0] * Vp[:, 0]))
            raise ConvergenceError(
                f"eigensolver did not converge within {maxiter} iterations",
                residual=best) from exc
        order = np.argsort(lam)
        lam, V = lam[order], V[:, order]

    out = []
    sw_inv = 1.0 / np.sqrt(A.weights)
    for j in range(k):
        res = float(np.linalg.norm(S @ V[:, j] - lam[j] * V[:, j]))
        if res > tol * max(1.0, abs(lam[j])) * 10:
            raise ConvergenceError(
                f"eigenpair {j} residual {res:.3e} exceeds tolerance", residual=res)
        full = np.zeros(A.dim, dtype=V.dtype)
        full[ia] = V[:, j]
        out.append((float(lam[j]), full * sw_inv))
    return out


# ---------------------------------------------------------------------------
# semigroup action
# ---------------------------------------------------------------------------

def _lanczos_expm_interior(S: sp.csr_matrix, v: np.ndarray, t: float,
                           tol: float, m_max: int = 90, depth: int = 0):
    """exp(-t S) v for Hermitian S, Lanczos with full reorthogonalization."""
    nrm = np.linalg.norm(v)
    if nrm == 0.0 or t == 0.0:
        return v.copy()
    if depth > 40:
        raise ConvergenceError("semigroup sub-stepping recursion exceeded budget")
    V = np.empty((min(m_max + 1, 24), len(v)), dtype=v.dtype)
    V[0] = v / nrm
    alphas: list[float] = []
    betas: list[float] = []
    prev = None
    prev_ritz = None
    for j in range(m_max):
        if j + 1 >= V.shape[0]:  # grow the basis storage on demand
            V = np.concatenate(
                [V, np.empty((min(V.shape[0], m_max + 1 - V.shape[0]),
                              V.shape[1]), dtype=V.dtype)], axis=0)
        w = S @ V[j]
        if j > 0:
            w -= betas[-1] * V[j - 1]
        a = float(np.real(np.vdot(V[j], w)))
        w -= a * V[j]
        # full reorthogonalization: the basis stays small, the stability is worth it
        coeffs = V[: j + 1].conj() @ w
        w -= V[: j + 1].T @ coeffs
        alphas.append(a)
        T = np.diag(alphas)
        if betas:
            T = T + np.diag(betas, 1) + np.diag(betas, -1)
        u = sla.expm(-t * T)[:, 0]
        # successive u can agree spuriously at ~0 while every Ritz value
        # still sits far above the true bottom of the spectrum; accept the
        # agreement only once the result has lifted off the tolerance floor
        # or the bottom Ritz value has stopped plummeting
        ritz = float(np.linalg.eigvalsh(T)[0])
        if prev is not None:
            err = np.linalg.norm(u - np.concatenate([prev, [0.0]]))
            scale_ok = np.linalg.norm(u) >= 10.0 * tol or (
                prev_ritz is not None
                and abs(ritz - prev_ritz) <= 1e-3 * (1.0 + abs(ritz)))
            if err < tol / 8.0 and scale_ok:
                return nrm * (V[: j + 1].T @ u)
        prev = u
        prev_ritz = ritz
        b = float(np.linalg.norm(w))
        if b < 1e-14 * max(1.0, abs(a)):
            return nrm * (V[: j + 1].T @ u)
        betas.append(b)
        V[j + 1] = w / b
    # basis exhausted: halve the step
    half = _lanczos_expm_interior(S, v, t / 2.0, tol / 2.0, m_max, depth + 1)
    return _lanczos_expm_interior(S, half, t / 2.0, tol / 2.0, m_max, depth + 1)


def apply_semigroup(A: SparseHermitianOperator, t: float, f: np.ndarray,
                    tol: float = DEFAULT_TOL) -> np.ndarray:
    """``exp(-t A) f`` in the weighted geometry; ``t = 0`` returns ``f`` as is."""
    if t < 0:
        raise InvalidSpecError("t must be >= 0")
    if t == 0.0:
        return f.copy()
    S, ia = A.interior_sym()
    sw = np.sqrt(A.weights)
    v = (f * sw)[ia]
    if np.iscomplexobj(S) and not np.iscomplexobj(v):
        v = v.astype(complex)
    u = _lanczos_expm_interior(S, v, float(t), tol)
    out = np.zeros(A.dim, dtype=u.dtype)
    out[ia] = u
    return out / sw


# ---------------------------------------------------------------------------
# positive-definite solves
# ---------------------------------------------------------------------------

def solve_spd(A: SparseHermitianOperator, b: np.ndarray, shift: float = 0.0,
              tol: float = 1e-10, maxiter: int = 50000) -> np.ndarray:
    """Solve ``(A + shift) x = b`` by preconditioned CG.

    The caller guarantees positive definiteness on the active set; a
    negative-curvature direction aborts with a named breakdown.
    """
    S, ia = A.interior_sym()
    sw = np.sqrt(A.weights)
    rhs = (b * sw)[ia]
    dtype = complex if (np.iscomplexobj(S) or np.iscomplexobj(rhs)) else float
    rhs = rhs.astype(dtype)
    diag = S.diagonal().real + shift
    if np.any(diag <= 0):
        raise ConvergenceError("indefiniteness detected: nonpositive diagonal")
    Minv = 1.0 / diag

    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = Minv * r
    p = z.copy()
    rz = np.real(np.vdot(r, z))
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(A.dim, dtype=dtype)
    for _ in range(maxiter):
        Ap = S @ p + shift * p
        pAp = np.real(np.vdot(p, Ap))
        if pAp <= 0:
            raise ConvergenceError(
                "indefiniteness detected: negative curvature direction in CG")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            break
        z = Minv * r
        rz_new = np.real(np.vdot(r, z))
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    else:
        raise ConvergenceError(
            f"CG did not reach tol={tol:g} in {maxiter} iterations",
            residual=float(np.linalg.norm(r) / bnorm))
    out = np.zeros(A.dim, dtype=dtype)
    out[ia] = x
    return out / sw


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dump_operator(A: SparseHermitianOperator, path: str) -> None:
    """Coordinate text dump: header ``dim block_size``, rows ``i j re im``."""
    with open(path, "w") as fh:
        fh.write("%d %d\n" % (A.dim, A.block_size))
        vals = np.asarray(A.vals, dtype=complex)
        for r, c, v in zip(A.rows, A.cols, vals):
            fh.write("%d %d %.17g %.17g\n" % (r, c, v.real, v.imag))


def load_operator(path: str, weights: np.ndarray | None = None,
                  active: np.ndarray | None = None) -> SparseHermitianOperator:
    with open(path) as fh:
        dim, block = (int(tok) for tok in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    rows = data[:, 0].astype(int)
    cols = data[:, 1].astype(int)
    vals = data[:, 2] + 1j * data[:, 3]
    if np.all(vals.imag == 0):
        vals = vals.real
    if weights is None:
        weights = np.ones(dim)
    return SparseHermitianOperator(dim, rows, cols, vals, weights, block, active)


def dump_vector(f: np.ndarray, path: str) -> None:
    """One complex entry per line as ``re im``."""
    g = np.asarray(f, dtype=complex)
    with open(path, "w") as fh:
        for v in g:
            fh.write("%.17g %.17g\n" % (v.real, v.imag))


def load_vector(path: str) -> np.ndarray:
    data = np.loadtxt(path, ndmin=2)
    v = data[:, 0] + 1j * data[:, 1]
    return v.real if np.all(v.imag == 0) else v

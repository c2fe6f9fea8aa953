import numpy as np
import pytest

import greenlab as gl
from oracles import cube_dirichlet_lowest, dense_expm_apply, dense_low_eigs


def tiny_operator(vals=(2.0, 1.0, 1.0, 2.0), weights=(1.0, 1.0)):
    rows = np.array([0, 0, 1, 1])
    cols = np.array([0, 1, 0, 1])
    return gl.SparseHermitianOperator(2, rows, cols, np.array(vals, dtype=float),
                                      np.array(weights, dtype=float))


def test_smallest_eigenpair_2x2():
    A = tiny_operator()
    (lam, v), = gl.smallest_eigenpairs(A, k=1)
    assert lam == pytest.approx(1.0, abs=1e-12)
    assert A.norm(A.matvec(v) - lam * v) < 1e-10


def test_unit_cube_lowest_eigenvalue():
    spec = gl.MetricSpec(kind=gl.Kind.FLAT_BOX, box_half_width=0.5,
                         grid_points_per_axis=24)
    m = gl.build_manifold(spec)
    L = gl.assemble_laplace_beltrami(m)
    (lam, _), = gl.smallest_eigenpairs(L, k=1, tol=1e-9)
    assert lam == pytest.approx(cube_dirichlet_lowest(24, 0.5), rel=1e-8)
    assert lam == pytest.approx(3 * np.pi ** 2, rel=0.02)


def test_shift_invariance(box8_laplacian):
    L = box8_laplacian
    pairs = gl.smallest_eigenpairs(L, k=2, tol=1e-10)
    shifted = gl.smallest_eigenpairs(L.shifted(2.5), k=2, tol=1e-10)
    for (lam, _), (lam2, _) in zip(pairs, shifted):
        assert lam2 == pytest.approx(lam + 2.5, abs=1e-9)
    # the (nondegenerate) ground vector is unchanged up to phase
    overlap = abs(L.inner(pairs[0][1], shifted[0][1]))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_eigenvectors_weighted_orthonormal(box8_laplacian):
    pairs = gl.smallest_eigenpairs(box8_laplacian, k=4, tol=1e-10)
    for i, (_, vi) in enumerate(pairs):
        for j, (_, vj) in enumerate(pairs):
            want = 1.0 if i == j else 0.0
            assert abs(box8_laplacian.inner(vi, vj)) == pytest.approx(want, abs=1e-8)


def test_eigenpairs_match_dense_oracle(box8_laplacian):
    lam_dense = dense_low_eigs(box8_laplacian, 3)
    pairs = gl.smallest_eigenpairs(box8_laplacian, k=3, tol=1e-10)
    assert np.allclose([p[0] for p in pairs], lam_dense, atol=1e-9)


def test_weighted_hermiticity_validator():
    rows = np.array([0, 1])
    cols = np.array([1, 0])
    vals = np.array([1.0, 2.0])  # not Hermitian under unit weights
    op = gl.SparseHermitianOperator(2, rows, cols, vals, np.ones(2))
    with pytest.raises(gl.HermiticityError):
        op.validate()
    # the same entries become Hermitian under 2:1 weights
    op2 = gl.SparseHermitianOperator(2, rows, cols, vals, np.array([2.0, 1.0]))
    op2.validate()


def test_bad_inputs_rejected(box8_laplacian):
    with pytest.raises(gl.InvalidSpecError):
        gl.smallest_eigenpairs(box8_laplacian, k=0)
    with pytest.raises(gl.InvalidSpecError):
        gl.smallest_eigenpairs(box8_laplacian, k=1, tol=-1.0)
    with pytest.raises(gl.InvalidSpecError):
        gl.apply_semigroup(box8_laplacian, -0.1, np.zeros(box8_laplacian.dim))


# -- semigroup ---------------------------------------------------------------

def test_semigroup_t0_identity(box8_laplacian):
    rng = np.random.default_rng(1)
    f = rng.standard_normal(box8_laplacian.dim)
    g = gl.apply_semigroup(box8_laplacian, 0.0, f)
    assert np.array_equal(f, g)


def test_semigroup_diagonal_exact():
    rows = cols = np.array([0, 1])
    vals = np.array([1.0, 2.0])
    A = gl.SparseHermitianOperator(2, rows, cols, vals, np.ones(2))
    g = gl.apply_semigroup(A, 1.0, np.ones(2), tol=1e-12)
    assert g == pytest.approx([np.exp(-1), np.exp(-2)], rel=1e-10)


def test_semigroup_composition(box8_laplacian):
    rng = np.random.default_rng(2)
    f = rng.standard_normal(box8_laplacian.dim) * box8_laplacian.active
    tol = 1e-9
    one = gl.apply_semigroup(box8_laplacian, 0.3, f, tol=tol)
    two = gl.apply_semigroup(box8_laplacian, 0.2,
                             gl.apply_semigroup(box8_laplacian, 0.1, f, tol=tol),
                             tol=tol)
    assert box8_laplacian.norm(one - two) <= 2 * tol * box8_laplacian.norm(f)


def test_semigroup_against_dense_oracle(box8_laplacian):
    rng = np.random.default_rng(3)
    f = rng.standard_normal(box8_laplacian.dim)
    mine = gl.apply_semigroup(box8_laplacian, 0.37, f, tol=1e-11)
    ref = dense_expm_apply(box8_laplacian, 0.37, f)
    assert box8_laplacian.norm(mine - ref) < 1e-9 * box8_laplacian.norm(f)


def test_semigroup_positivity_and_contraction(box8_laplacian):
    rng = np.random.default_rng(4)
    f = np.abs(rng.standard_normal(box8_laplacian.dim)) * box8_laplacian.active
    g = gl.apply_semigroup(box8_laplacian, 0.5, f, tol=1e-10)
    assert g.min() >= -1e-9
    assert box8_laplacian.norm(g) <= box8_laplacian.norm(f) * (1 + 1e-12)


def test_semigroup_substepping_wide_spectrum():
    # spectrum spread forces the sub-stepping branch while the slow modes
    # stay measurable; diagonal operator keeps the oracle exact
    n = 3000
    diag = np.linspace(0.1, 5000.0, n)
    A = gl.SparseHermitianOperator(n, np.arange(n), np.arange(n), diag, np.ones(n))
    rng = np.random.default_rng(11)
    f = rng.standard_normal(n)
    g = gl.apply_semigroup(A, 1.0, f, tol=1e-10)
    assert np.linalg.norm(g - np.exp(-diag) * f) <= 1e-8 * np.linalg.norm(f)


# -- solve -------------------------------------------------------------------

def test_solve_identity():
    A = gl.SparseHermitianOperator(3, np.arange(3), np.arange(3),
                                   np.ones(3), np.ones(3))
    b = np.array([1.0, -2.0, 3.0])
    assert np.allclose(gl.solve_spd(A, b), b, atol=1e-12)


def test_solve_diagonal():
    A = gl.SparseHermitianOperator(2, np.arange(2), np.arange(2),
                                   np.array([2.0, 4.0]), np.ones(2))
    x = gl.solve_spd(A, np.array([2.0, 4.0]))
    assert np.allclose(x, [1.0, 1.0], atol=1e-12)


def test_solve_eigenvector_relation(box8_laplacian):
    (lam, v), = gl.smallest_eigenpairs(box8_laplacian, k=1, tol=1e-11)
    x = gl.solve_spd(box8_laplacian, np.real(v), tol=1e-12)
    assert box8_laplacian.norm(x - np.real(v) / lam) < 1e-8


def test_solve_against_dense_oracle(box8_laplacian):
    rng = np.random.default_rng(5)
    b = rng.standard_normal(box8_laplacian.dim) * box8_laplacian.active
    x = gl.solve_spd(box8_laplacian, b, tol=1e-12)
    S, ia = box8_laplacian.interior_sym()
    sw = np.sqrt(box8_laplacian.weights)
    ref = np.zeros(box8_laplacian.dim)
    ref[ia] = np.linalg.solve(S.toarray(), (b * sw)[ia])
    ref /= sw
    assert box8_laplacian.norm(x - ref) < 1e-8 * box8_laplacian.norm(ref)


def test_solve_detects_indefiniteness(box8_laplacian):
    rng = np.random.default_rng(6)
    b = rng.standard_normal(box8_laplacian.dim) * box8_laplacian.active
    with pytest.raises(gl.ConvergenceError, match="indefinite"):
        gl.solve_spd(box8_laplacian, b, shift=-50.0)


# -- persistence -------------------------------------------------------------

def test_operator_roundtrip(tmp_path, box8_laplacian):
    path = tmp_path / "op.txt"
    gl.dump_operator(box8_laplacian, str(path))
    with open(path) as fh:
        dim, block = fh.readline().split()
    assert int(dim) == box8_laplacian.dim and int(block) == 1
    op = gl.load_operator(str(path), weights=box8_laplacian.weights,
                          active=box8_laplacian.active)
    rng = np.random.default_rng(7)
    f = rng.standard_normal(op.dim)
    assert np.allclose(op.matvec(f), box8_laplacian.matvec(f), atol=1e-12)


def test_vector_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    path = tmp_path / "vec.txt"
    gl.dump_vector(v, str(path))
    w = gl.load_vector(str(path))
    assert np.allclose(v, w, atol=0, rtol=1e-15)

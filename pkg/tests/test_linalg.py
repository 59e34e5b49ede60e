import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from upbkit.constructions import build_334, local_vector
from upbkit.linalg import (
    Bipartition,
    ToleranceConfig,
    check_dims,
    eigh,
    inner,
    kron,
    kron_all,
    matricize,
    nullspace,
    partial_transpose,
    rank,
    relative_overlap,
    submatrix,
)

e = np.eye


def test_kron_basis_and_distributivity():
    assert np.allclose(kron(e(2)[0], e(2)[1]), e(4)[1])
    assert np.allclose(kron([1, 1], [1, 0]), [1, 0, 1, 0])


def test_kron_builds_varphi1(upb334):
    v = kron(kron(e(3)[1], e(3)[1]), e(4)[1] - e(4)[2])
    assert np.allclose(v, upb334.find("varphi(1)").vector())


def test_matricize_examples():
    u, w = np.array([1, 2j]), np.array([3, -1, 1j])
    M = matricize(kron(u, w), (2, 3), Bipartition((0,), (1,)))
    assert np.allclose(M, np.outer(u, w))
    assert rank(M) == 1
    assert np.allclose(matricize([1, 0, 0, 1], (2, 2), Bipartition((0,), (1,))), np.eye(2))
    S = build_334().find("S").vector()
    assert np.allclose(matricize(S, (3, 3, 4), Bipartition.parse("A|BC")), np.ones((3, 12)))


def test_matricize_rejects_bad_size():
    with pytest.raises(ValueError):
        matricize(np.ones(5), (2, 3), Bipartition((0,), (1,)))


def test_rank_examples():
    assert rank(np.ones((3, 12))) == 1
    assert rank(np.eye(4)) == 4
    phi3 = sum(kron(e(3)[k], e(3)[k]) for k in range(3))
    assert rank(matricize(phi3, (3, 3), Bipartition((0,), (1,)))) == 3
    assert rank(np.zeros((3, 3))) == 0


def test_inner_examples(upb334):
    eta1, eta2 = local_vector("eta", 4, 0, 1), local_vector("eta", 4, 0, 2)
    assert abs(inner(eta1, eta2)) < 1e-12
    assert np.isclose(inner(local_vector("eta", 4, 0, 0), local_vector("eta", 4, 0, 0)), 3)
    assert abs(inner(upb334.find("S").vector(), upb334.find("psi1(0,1)").vector())) < 1e-12
    with pytest.raises(ValueError):
        inner(np.ones(2), np.ones(3))


def test_nullspace_examples():
    assert nullspace(np.eye(3)).shape[0] == 0
    assert nullspace(np.zeros((2, 5))).shape[0] == 5
    N = nullspace(np.array([[1.0, -1.0]]))
    assert N.shape == (1, 2)
    assert np.isclose(abs(N[0] @ np.array([1, 1]) / np.sqrt(2)), 1)


def test_nullspace_tall_matrix_uses_thin_svd():
    A = np.vstack([np.eye(3), np.eye(3)] * 500)
    A[:, 2] = A[:, 0]
    N = nullspace(A)
    assert N.shape == (1, 3)
    assert np.linalg.norm(A @ N[0]) < 1e-10


def test_eigh_examples():
    w, _ = eigh(np.diag([1.0, 0, 0]))
    assert np.allclose(w, [1, 0, 0])
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 2)))
    w, _ = eigh(q @ q.T)
    assert np.allclose(w, [1, 1, 0, 0, 0], atol=1e-12)
    with pytest.raises(ValueError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_partial_transpose_examples():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    assert np.allclose(partial_transpose(np.kron(a, b), (2, 3), 0), np.kron(a.T, b))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    w = np.linalg.eigvalsh(partial_transpose(np.outer(bell, bell), (2, 2), 0))
    assert np.isclose(w[0], -0.5)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), (2, 2), 2)


def test_submatrix_examples():
    E = np.arange(16).reshape(4, 4)
    assert np.array_equal(submatrix(E, range(4), range(4)), E)
    assert submatrix(E, [2], [3])[0, 0] == E[2, 3]
    B = np.zeros((4, 4))
    B[:2, :2] = 1
    B[2:, 2:] = 2
    assert not submatrix(B, [0, 1], [2, 3]).any()
    assert np.array_equal(submatrix(E, [3, 1], [0]), np.array([[12], [4]]))
    with pytest.raises(IndexError):
        submatrix(E, [4], [0])


def test_config_and_dims_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(zero_tol=0)
    with pytest.raises(ValueError):
        check_dims([3])
    with pytest.raises(ValueError):
        check_dims([3, 1])
    with pytest.raises(ValueError):
        Bipartition.parse("AB|B")
    with pytest.raises(ValueError):
        Bipartition.parse("A|B")
    assert str(Bipartition.parse("a|bc")) == "A|BC"


# -- properties --------------------------------------------------------------

small_dim = st.integers(min_value=2, max_value=4)


def cvec(n):
    parts = arrays(np.float64, (2, n), elements=st.floats(-3, 3, allow_nan=False))
    return parts.map(lambda a: a[0] + 1j * a[1])


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_kron_associative(data):
    u, v, w = (data.draw(cvec(data.draw(small_dim))) for _ in range(3))
    assert np.allclose(kron(kron(u, v), w), kron(u, kron(v, w)))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_product_states_have_rank_one_matricizations(data):
    dims = tuple(data.draw(small_dim) for _ in range(3))
    locs = [data.draw(cvec(d).filter(lambda x: np.linalg.norm(x) > 1e-2)) for d in dims]
    p = kron_all(locs)
    for cut in ("A|BC", "B|AC", "C|AB", "AB|C"):
        assert rank(matricize(p, dims, Bipartition.parse(cut)), ToleranceConfig(rank_tol=1e-7)) == 1


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_inner_equals_trace_formula(data):
    dims = tuple(data.draw(small_dim) for _ in range(3))
    D = int(np.prod(dims))
    u, v = data.draw(cvec(D)), data.draw(cvec(D))
    for cut in ("A|BC", "AB|C", "B|AC"):
        c = Bipartition.parse(cut)
        tr = np.trace(matricize(u, dims, c).conj().T @ matricize(v, dims, c))
        assert abs(tr - inner(u, v)) <= 1e-12 * max(1.0, np.linalg.norm(u) * np.linalg.norm(v))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 5), st.integers(0, 10**6))
def test_nullspace_vectors_are_annihilated(rows, cols, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, rows, cols)
    m = (rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols))) if r else np.zeros((rows, cols))
    tol = ToleranceConfig()
    N = nullspace(m, tol)
    smax = np.linalg.svd(m, compute_uv=False)[0] if m.any() else 0.0
    for x in N:
        assert np.linalg.norm(m @ x) <= 10 * tol.rank_tol * smax * np.linalg.norm(x) + 1e-300
    assert N.shape[0] == cols - rank(m, tol)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 2), (2, 3), (3, 2, 2)]), st.integers(0, 10**6))
def test_partial_transpose_properties(dims, seed):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    z = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = z @ z.conj().T
    for p in range(len(dims)):
        pt = partial_transpose(rho, dims, p)
        assert np.isclose(np.trace(pt), np.trace(rho))
        assert np.allclose(pt, pt.conj().T, atol=1e-12)
        assert np.array_equal(partial_transpose(pt, dims, p), rho)


def test_relative_overlap_is_scale_free():
    u, v = np.array([1, 1j, 0]), np.array([1, 0, 1])
    assert np.isclose(relative_overlap(u, v), relative_overlap(5j * u, -0.1 * v))
    assert relative_overlap(np.zeros(3), v) == 0.0

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from pmco.linalg import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    column_space,
    eigen,
    kron,
    kron_kernel_decomposition_check,
    null_space,
    numerical_rank,
    odot,
    pinv,
    principal_angles,
    subspace_equal,
    subspace_intersection,
    subspace_sum,
)

seeds = st.integers(0, 2**32 - 1)


def span(*vecs):
    return column_space(np.column_stack(vecs))


def e(i, n):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def low_rank(rng, rows, cols, rank):
    return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))


# kron


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ([[2.0]], [[3.0]], [[6.0]]),
        (np.ones(2), e(0, 2), [[1.0], [0.0], [1.0], [0.0]]),
    ],
)
def test_kron_examples(a, b, expected):
    np.testing.assert_array_equal(kron(a, b), expected)


def test_kron_identity_gives_block_diagonal():
    b = np.arange(4.0).reshape(2, 2)
    np.testing.assert_array_equal(kron(np.eye(2), b), scipy.linalg.block_diag(b, b))


def test_kron_rejects_non_finite():
    with pytest.raises(ValueError):
        kron([[np.nan]], [[1.0]])


# rank and kernels


@pytest.mark.parametrize("a, rank", [(np.eye(3), 3), (np.zeros((2, 2)), 0), (np.ones((2, 2)), 1)])
def test_numerical_rank_examples(a, rank):
    assert numerical_rank(a) == rank


@given(seed=seeds, rows=st.integers(1, 6), cols=st.integers(1, 6), data=st.data())
@settings(max_examples=60, deadline=None)
def test_numerical_rank_matches_constructed_rank(seed, rows, cols, data):
    rank = data.draw(st.integers(0, min(rows, cols)))
    a = low_rank(np.random.default_rng(seed), rows, cols, rank)
    assert numerical_rank(a) == rank


def test_null_space_examples():
    assert null_space(np.eye(3)).dim == 0
    assert null_space(np.zeros((2, 3))).dim == 3
    ns = null_space(np.ones((2, 2)))
    assert ns.dim == 1
    assert subspace_equal(ns, span(np.array([1.0, -1.0])))


@given(seed=seeds, rows=st.integers(1, 6), cols=st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_null_space_agrees_with_scipy(seed, rows, cols):
    rng = np.random.default_rng(seed)
    a = low_rank(rng, rows, cols, int(rng.integers(0, min(rows, cols) + 1)))
    ours = null_space(a)
    oracle = scipy.linalg.null_space(a, rcond=1e-10)
    assert ours.dim == oracle.shape[1]
    if ours.dim:
        assert np.allclose(a @ ours.basis, 0, atol=1e-9)
        assert subspace_equal(ours, Subspace(cols, oracle))


# subspace algebra


def test_sum_and_intersection_of_axes():
    s1, s2 = span(e(0, 2)), span(e(1, 2))
    assert subspace_sum(s1, s2).dim == 2
    assert subspace_intersection(s1, s2).dim == 0


def test_three_subspace_identity_example():
    s1, s2, s3 = span(e(0, 3)), span(e(0, 3), e(1, 3)), span(e(2, 3))
    lhs = subspace_sum(subspace_sum(s1, s2), s3).dim
    i12, i23, i31 = (subspace_intersection(a, b) for a, b in ((s1, s2), (s2, s3), (s3, s1)))
    rhs = s1.dim + s2.dim + s3.dim - i12.dim - i23.dim - i31.dim + subspace_intersection(i12, s3).dim
    assert lhs == rhs == 3


@given(seed=seeds, dim=st.integers(2, 6))
@settings(max_examples=60, deadline=None)
def test_grassmann_formula(seed, dim):
    rng = np.random.default_rng(seed)
    a = column_space(rng.standard_normal((dim, int(rng.integers(0, dim + 1)))))
    b = column_space(rng.standard_normal((dim, int(rng.integers(0, dim + 1)))))
    assert subspace_sum(a, b).dim + subspace_intersection(a, b).dim == a.dim + b.dim


def test_principal_angles_detect_rotation():
    theta = 1e-3
    s1 = span(e(0, 2))
    s2 = span(np.array([np.cos(theta), np.sin(theta)]))
    np.testing.assert_allclose(principal_angles(s1, s2), [theta], rtol=1e-6)
    assert not subspace_equal(s1, s2)
    assert subspace_equal(s1, s2, ToleranceConfig(subspace_angle_tol=1e-2))


def test_subspace_rejects_non_orthonormal_basis():
    with pytest.raises(ValueError):
        Subspace(2, np.array([[1.0], [1.0]]))


def test_complement_and_contains():
    s = span(e(0, 3))
    comp = s.complement()
    assert comp.dim == 2
    assert comp.contains(e(2, 3)) and not comp.contains(e(0, 3))


# odot


def test_odot_examples():
    s = span(e(0, 2))
    assert odot(np.zeros(2), s).dim == 0
    one = odot(e(0, 2), s)
    assert subspace_equal(one, span(np.array([1.0, 0, 0, 0])))
    full = odot(np.ones(2), Subspace.full(1))
    assert full.dim == 2


def test_odot_matches_enumerated_products():
    rng = np.random.default_rng(7)
    x = np.array([2.0, 0.0, -1.0])
    s = column_space(rng.standard_normal((4, 2)))
    gens = [np.kron(x[i] * e(i, 3), s.basis[:, k]) for i in range(3) for k in range(2) if x[i]]
    assert subspace_equal(odot(x, s), column_space(np.column_stack(gens)))


# pinv


@pytest.mark.parametrize(
    "a, expected",
    [
        (np.eye(3), np.eye(3)),
        (np.zeros((2, 3)), np.zeros((3, 2))),
        (np.diag([2.0, 0.0]), np.diag([0.5, 0.0])),
    ],
)
def test_pinv_examples(a, expected):
    np.testing.assert_allclose(pinv(a), expected, atol=1e-15)


@given(seed=seeds, rows=st.integers(1, 5), cols=st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_pinv_penrose_identities(seed, rows, cols):
    rng = np.random.default_rng(seed)
    a = low_rank(rng, rows, cols, int(rng.integers(0, min(rows, cols) + 1)))
    x = pinv(a)
    scale = max(1.0, np.linalg.norm(a)) * max(1.0, np.linalg.norm(x))
    for lhs, rhs in ((a @ x @ a, a), (x @ a @ x, x), ((a @ x).T, a @ x), ((x @ a).T, x @ a)):
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * scale**2


# eigen


def test_eigen_examples():
    vals, _ = eigen(np.diag([1.0, 0.5]))
    np.testing.assert_allclose(sorted(vals.real), [0.5, 1.0])
    vals, _ = eigen(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(sorted(vals.imag), [-1.0, 1.0])


def test_eigen_companion_matches_root_finder():
    comp = np.array([[-2.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    vals, vecs = eigen(comp)
    roots = np.roots([1.0, 2.0, 1.0, 1.0])
    for r in roots:
        assert np.min(np.abs(vals - r)) < 1e-8
    for k in range(3):
        assert np.linalg.norm(comp @ vecs[:, k] - vals[k] * vecs[:, k]) <= 1e-10 * np.linalg.norm(comp)


# kernel of Kronecker products


@pytest.mark.parametrize(
    "a, b",
    [(np.eye(2), np.eye(3)), (np.zeros((1, 1)), np.eye(2)), (np.zeros((1, 1)), np.ones((2, 2)))],
)
def test_kron_kernel_trivial_cases(a, b):
    assert kron_kernel_decomposition_check(a, b)


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_kron_kernel_random(seed):
    rng = np.random.default_rng(seed)
    a = low_rank(rng, 3, 3, 2)
    b = low_rank(rng, 2, 2, 1)
    assert kron_kernel_decomposition_check(a, b)


def test_tolerance_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rel_tol=0)
    assert DEFAULT_TOL.rank_rel_tol > 0

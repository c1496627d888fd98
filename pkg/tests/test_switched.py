import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmco.graphs import Digraph, GdsSchedule, gds_topology, laplacian
from pmco.linalg import null_space, numerical_rank, subspace_equal
from pmco.semistability import is_semisimple_zero, random_paracontracting
from pmco.switched import (
    McoCoefficients,
    SwitchedSystemMatrices,
    build_A,
    build_Ac,
    build_B,
    build_E,
    build_W,
    check_theorem_conditions,
    kernel_shift_invariance_check,
    kernel_spanning_vectors_A,
    predicted_kernel_A,
    predicted_rank_A,
    predicted_spectrum_A,
    predicted_spectrum_B,
    rank_case,
    verify_spectrum_containment_A,
    verify_spectrum_containment_B,
    zero_semisimple_dichotomy_check,
)
from pmco.verify import generate_instance

L2 = np.array([[1.0, -1.0], [-1.0, 1.0]])
seeds = st.integers(0, 2**63 - 1)


def lap(graph):
    return laplacian(graph).astype(float)


# E and W


@pytest.mark.parametrize(
    "j, n, q, expected",
    [(1, 1, 2, [[1.0, 0.0]]), (2, 2, 2, np.hstack([np.zeros((2, 2)), np.eye(2)]))],
)
def test_build_E_examples(j, n, q, expected):
    np.testing.assert_array_equal(build_E(j, n, q), expected)


def test_build_E_range():
    with pytest.raises(IndexError):
        build_E(3, 1, 2)


def test_build_W_example():
    np.testing.assert_array_equal(build_W(1, np.eye(1), 2), [[1.0, 0.0], [1.0, 0.0]])


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("q", [2, 3])
def test_selector_identity_and_W_ranks(n, q):
    rng = np.random.default_rng(10 * n + q)
    p = random_paracontracting(n, rng, rank=int(rng.integers(0, n + 1)))
    r = numerical_rank(p)
    for j in range(1, q + 1):
        e = build_E(j, n, q)
        for i in range(n):
            np.testing.assert_array_equal(e @ np.kron(np.ones(q), np.eye(n)[i]), np.eye(n)[i])
        w = build_W(j, p, q)
        assert numerical_rank(w) == r
        assert numerical_rank(np.kron(np.eye(q), p) - w) == (q - 1) * r


# A, A_c, B


def test_build_A_collapses_without_gains():
    a = build_A(1, McoCoefficients(0, 0, 0), lap(Digraph.complete(3)), np.eye(2))
    expected = np.zeros_like(a)
    expected[:6, 6:12] = np.eye(6)
    np.testing.assert_array_equal(a, expected)


def test_build_A_hand_assembled():
    a = build_A(1, McoCoefficients(0, 0, 1), L2, np.eye(1))
    expected = np.array(
        [
            [0, 0, 1, 0, 0],
            [0, 0, 0, 1, 0],
            [-1, 0, 0, 0, 1],
            [0, -1, 0, 0, 1],
            [1, 0, 0, 0, -1],
        ],
        dtype=float,
    )
    np.testing.assert_array_equal(a, expected)


def test_build_Ac_shares_velocity_row():
    rng = np.random.default_rng(0)
    c = McoCoefficients(0.3, 0.7, 0.9, 0.5)
    p = random_paracontracting(2, rng, full_rank=True)
    l = lap(Digraph.cycle(3))
    a, ac = build_A(2, c, l, p), build_Ac(c, l, p)
    np.testing.assert_array_equal(ac[:6], a[6:12])
    assert not np.any(ac[6:])
    assert not np.any(build_Ac(McoCoefficients(0, 0, 0), l, p))


def test_build_B_structure():
    c0 = McoCoefficients(0, 0, 0, 1.0)
    b = build_B(2, c0, L2, np.eye(1))
    expected = np.zeros((5, 5))
    expected[0:2, 2:4] = np.eye(2)
    expected[4, :2] = [0, 1]
    expected[4, 4] = -1
    np.testing.assert_array_equal(b, expected)
    c = McoCoefficients(0.2, 0.4, 0.6, 1.7)
    a, b = build_A(1, c, L2, np.eye(1)), build_B(1, c, L2, np.eye(1))
    np.testing.assert_allclose(b[:2], c.h * a[:2])
    np.testing.assert_allclose(b[2:4], c.h * a[2:4])
    np.testing.assert_array_equal(b[4], [1, 0, 0, 0, -1])


def test_step_matrices_match_definitions():
    c = McoCoefficients(0.2, 0.4, 0.6, 0.8)
    inst = SwitchedSystemMatrices.build(1, c, L2, np.eye(1))
    np.testing.assert_allclose(inst.keep_step, np.eye(5) + c.h * inst.a_j + c.h**2 * inst.a_c)
    np.testing.assert_allclose(inst.jump_step, np.eye(5) + inst.b_j + c.h**2 * inst.a_c)


def test_coefficients_validation():
    with pytest.raises(ValueError):
        McoCoefficients(-1, 0, 0)
    with pytest.raises(ValueError):
        McoCoefficients(0, np.nan, 0)


# ranks and kernels


@pytest.mark.parametrize(
    "coeffs, rank_l, rank_p, n, q, expected",
    [
        (McoCoefficients(0, 1, 0), 2, 2, 2, 3, 6),
        (McoCoefficients(0, 1, 1), 2, 2, 2, 3, 12),
        (McoCoefficients(1, 1, 0), 2, 2, 2, 3, 10),
        (McoCoefficients(0, 0, 1), 1, 1, 1, 2, 4),
    ],
)
def test_predicted_rank_examples(coeffs, rank_l, rank_p, n, q, expected):
    assert predicted_rank_A(coeffs, rank_l, rank_p, n, q) == expected


@pytest.mark.parametrize(
    "coeffs, case",
    [(McoCoefficients(0, 1, 0), "i"), (McoCoefficients(0, 1, 1), "ii"),
     (McoCoefficients(1, 1, 1), "iii"), (McoCoefficients(1, 0, 0), "iv")],
)
def test_rank_case_labels(coeffs, case):
    assert rank_case(coeffs) == case


def test_case_i_kernel_is_position_and_incumbent_blocks():
    n, q = 2, 3
    c = McoCoefficients(0, 0.5, 0)
    ker = predicted_kernel_A("i", c, lap(Digraph.cycle(q)), np.eye(n), 1)
    assert ker.dim == n * q + n
    assert np.allclose(ker.basis[n * q : 2 * n * q], 0)


def test_case_ii_kernel_with_full_rank_P():
    n, q = 2, 3
    c = McoCoefficients(0, 0.5, 1.0)
    l = lap(Digraph.cycle(q))
    ker = predicted_kernel_A("ii", c, l, np.eye(n), 2)
    vecs = [np.concatenate([np.kron(np.ones(q), np.eye(n)[i]), np.zeros(n * q), np.eye(n)[i]]) for i in range(n)]
    assert ker.dim == n
    assert subspace_equal(ker, null_space(np.column_stack(vecs).T).complement())
    assert subspace_equal(ker, null_space(build_A(2, c, l, np.eye(n))))


def test_kernel_spanning_vectors_reject_wrong_case():
    with pytest.raises(ValueError):
        kernel_spanning_vectors_A("ii", McoCoefficients(1, 0, 1), L2, np.eye(1), 1)


@given(seed=seeds)
@settings(max_examples=60, deadline=None)
def test_rank_and_kernel_on_random_instances(seed):
    inst = generate_instance(seed)
    case = rank_case(inst.coeffs)
    for j in range(1, inst.q + 1):
        a = inst.matrices(j).a_j
        assert numerical_rank(a) == predicted_rank_A(inst.coeffs, numerical_rank(inst.l), inst.rank_p, inst.n, inst.q)
        vecs = kernel_spanning_vectors_A(case, inst.coeffs, inst.l, inst.p, j)
        norms = np.linalg.norm(vecs, axis=0)
        big = norms > 1e-10
        assert np.all(np.linalg.norm(a @ vecs[:, big], axis=0) <= 1e-10 * norms[big])
        pred, true = predicted_kernel_A(case, inst.coeffs, inst.l, inst.p, j), null_space(a)
        assert pred.dim == true.dim
        if case != "iii":
            assert subspace_equal(pred, true)


# kernel shift and semisimplicity


@pytest.mark.parametrize(
    "coeffs, h", [(McoCoefficients(0.4, 0.3, 0.9), 0.0), (McoCoefficients(0.4, 0.3, 0.9), 0.7),
                  (McoCoefficients(0.8, 0.3, 0.0), 1.3)]
)
def test_kernel_shift_examples(coeffs, h):
    rng = np.random.default_rng(4)
    l = lap(gds_topology(GdsSchedule(4, (1,)), rng))
    p = random_paracontracting(2, rng, rank=1)
    inst = SwitchedSystemMatrices.build(1, coeffs, l, p)
    assert kernel_shift_invariance_check(inst.a_j, inst.a_c, h)


@pytest.mark.parametrize(
    "coeffs, rank, expect_semisimple",
    [(McoCoefficients(0.3, 0.2, 1.0), 2, True), (McoCoefficients(0.3, 0.2, 1.0), 1, False),
     (McoCoefficients(0.0, 0.6, 0.0), 2, False)],
)
def test_zero_semisimple_examples(coeffs, rank, expect_semisimple):
    rng = np.random.default_rng(1)
    p = random_paracontracting(2, rng, full_rank=rank == 2, rank=None if rank == 2 else rank)
    inst = SwitchedSystemMatrices.build(1, coeffs, lap(Digraph.cycle(3)), p)
    assert is_semisimple_zero(inst.a_shifted) is expect_semisimple
    assert zero_semisimple_dichotomy_check(inst.a_j, inst.a_c, coeffs.h, coeffs, rank, 2)


# spectra


@pytest.mark.parametrize(
    "h, tag, expected",
    [(1.0, "lambda_12", [-1.0, -1.0]), (3.0, "lambda_12", [-2 - np.sqrt(3), -2 + np.sqrt(3)]),
     (2.0, "lambda_56", [-1.0, -1.0])],
)
def test_predicted_spectrum_A_closed_forms(h, tag, expected):
    pred = predicted_spectrum_A(McoCoefficients(0, 0, 1.0, h), L2)
    np.testing.assert_allclose(sorted(pred.tagged(tag).real), sorted(expected), atol=1e-7)
    assert np.allclose(pred.tagged(tag).imag, 0)


def test_predicted_spectrum_B_degenerate_cubic():
    pred = predicted_spectrum_B(McoCoefficients(0, 0, 0, 1.0), L2)
    assert set(np.round(pred.values.real, 12)) | set(np.round(pred.values.imag, 12)) <= {0.0, -1.0, -0.0}


def test_predicted_spectrum_B_cubic_matches_root_finder():
    pred = predicted_spectrum_B(McoCoefficients(0, 0, 1.0, 1.0), L2)
    for r in np.roots([1, 2, 1, 1]):
        assert pred.distance(r) < 1e-10


@pytest.mark.parametrize("graph", [Digraph.complete(2), Digraph.cycle(3), Digraph.complete(4)])
@pytest.mark.parametrize("coeffs", [McoCoefficients(0, 0, 1, 1), McoCoefficients(0.4, 0.2, 0, 1.0),
                                    McoCoefficients(0.2, 0.3, 1, 1)])
def test_spectrum_containment_at_identity_P(graph, coeffs):
    inst = SwitchedSystemMatrices.build(1, coeffs, lap(graph), np.eye(2))
    assert verify_spectrum_containment_A(inst)
    assert verify_spectrum_containment_B(inst)


def test_spectrum_A_prediction_misses_when_P_is_not_identity():
    # the closed-form set carries no dependence on P
    rng = np.random.default_rng(5)
    l = lap(gds_topology(GdsSchedule(3, (1,)), rng))
    p = random_paracontracting(2, rng, full_rank=True)
    coeffs = McoCoefficients(0.3, 0.5, 0.8, 0.4)
    assert verify_spectrum_containment_A(SwitchedSystemMatrices.build(1, coeffs, l, np.eye(2)))
    rep = verify_spectrum_containment_A(SwitchedSystemMatrices.build(1, coeffs, l, p))
    assert not rep and rep.max_miss > 0.1


def test_spectrum_B_prediction_misses_at_identity_P():
    rng = np.random.default_rng(5)
    l = lap(gds_topology(GdsSchedule(3, (1,)), rng))
    rep = verify_spectrum_containment_B(SwitchedSystemMatrices.build(1, McoCoefficients(0.3, 0.5, 0.8, 0.4), l, np.eye(2)))
    assert not rep and rep.max_miss > 0.1


@pytest.mark.parametrize("coeffs", [McoCoefficients(0, 0, 1, 1), McoCoefficients(0.2, 0.3, 0.7, 0.4)])
def test_zero_semisimple_in_B(coeffs):
    inst = SwitchedSystemMatrices.build(1, coeffs, lap(Digraph.cycle(3)), np.eye(2))
    assert 0 in np.round(np.linalg.eigvals(inst.b_shifted), 8)
    assert is_semisimple_zero(inst.b_shifted)


# hypotheses


def test_conditions_report_shape():
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0, 0, 1, 1), L2, np.eye(1))
    rep = check_theorem_conditions(inst).to_json()
    assert set(rep) == {"h1", "h2", "h3", "h4", "h5", "violated_details"}
    assert all(isinstance(rep[k], bool) for k in ("h1", "h2", "h3", "h4", "h5"))


def test_h1_rejects_rank_deficient_P():
    p = random_paracontracting(2, np.random.default_rng(0), rank=1)
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0.1, 0.1, 0.1, 0.1), L2, p)
    rep = check_theorem_conditions(inst)
    assert not rep.h1 and rep.violated_details["h1"]["full_rank"] is False


@pytest.mark.parametrize("h", [1e-3, 0.5])
def test_h2_holds_without_incumbent_gain(h):
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0.1, 0.1, 0.0, h), lap(Digraph.complete(3)), np.eye(1))
    assert check_theorem_conditions(inst).h2


@pytest.mark.parametrize("h", [1e-3, 0.3, 2.0])
def test_h2_step_bound_is_never_strict_with_incumbent_gain(h):
    # the lambda_56 pair puts the admissible bound at h itself or below
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0.1, 0.1, 0.5, h), lap(Digraph.complete(3)), np.eye(1))
    rep = check_theorem_conditions(inst)
    assert not rep.h2
    assert rep.violated_details["h2"]["bound"] <= h * (1 + 1e-9)


def test_h4_fails_when_step_norm_exceeds_one():
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0, 0, 0.5, 0.2), L2, np.eye(1))
    norm = np.linalg.norm(inst.keep_step, 2)
    assert norm > 1.01
    rep = check_theorem_conditions(inst)
    assert not rep.h4
    assert rep.violated_details["h4"]["norm_keep"] == pytest.approx(norm)


@given(h=st.floats(0.01, 3.0), kappa=st.floats(0.0, 2.0))
@settings(max_examples=50, deadline=None)
def test_keep_step_norm_is_at_least_sqrt_one_plus_h_squared(h, kappa):
    inst = SwitchedSystemMatrices.build(1, McoCoefficients(0.2, 0.1, kappa, h), L2, np.eye(1))
    assert np.linalg.norm(inst.keep_step, 2) >= np.sqrt(1 + h * h) - 1e-12

"""Switched-system matrices of one coordination step and their closed-form checks.

The stacked state is ``Z = [x_1..x_q, v_1..v_q, p]`` of length ``2nq + n``.
For a best-agent index ``j`` (one-based), coefficients ``(mu, eta, kappa, h)``,
a Laplacian ``L`` (q x q) and a matrix ``P`` (n x n), one step is

* ``Z+ = (I + h A_j + h^2 A_c) Z`` while the incumbent best is kept, and
* ``Z+ = (I + B_j + h^2 A_c) Z`` when the incumbent jumps to ``x_j``.

This module assembles those matrices, predicts their ranks, kernels and
spectra in closed form, and compares every prediction with the numerical
oracle in :mod:`pmco.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    column_space,
    null_space,
    numerical_rank,
    pinv,
    subspace_equal,
)
from .semistability import (
    ZeroNotEigenvalueError,
    is_paracontracting_lemma1,
    is_semisimple_zero,
    spectral_norm,
)

__all__ = [
    "McoCoefficients",
    "SwitchedSystemMatrices",
    "SpectrumPrediction",
    "ContainmentReport",
    "ConditionReport",
    "build_E",
    "build_W",
    "build_A",
    "build_Ac",
    "build_B",
    "rank_case",
    "predicted_rank_A",
    "laplacian_kernel_basis",
    "kernel_spanning_vectors_A",
    "predicted_kernel_A",
    "kernel_shift_invariance_check",
    "zero_semisimple_dichotomy_check",
    "predicted_spectrum_A",
    "predicted_spectrum_B",
    "verify_spectrum_containment_A",
    "verify_spectrum_containment_B",
    "check_theorem_conditions",
]


@dataclass(frozen=True)
class McoCoefficients:
    """Coefficients of one step.

    Parameters
    ----------
    mu : float
        Position-consensus gain.
    eta : float
        Velocity-consensus gain.
    kappa : float
        Attraction gain towards the incumbent best.
    h : float
        Step size.  Zero is allowed for the kernel statements; the spectral
        statements require ``h > 0``.
    """

    mu: float
    eta: float
    kappa: float
    h: float = 1.0

    def __post_init__(self):
        for name in ("mu", "eta", "kappa", "h"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")
            object.__setattr__(self, name, val)

    def as_dict(self) -> dict:
        return {"mu": self.mu, "eta": self.eta, "kappa": self.kappa, "h": self.h}


def _check_inputs(l, p):
    l = np.asarray(l, dtype=float)
    p = np.asarray(p, dtype=float)
    if l.ndim != 2 or l.shape[0] != l.shape[1]:
        raise ValueError("Laplacian must be square")
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("P must be square")
    return l, p


def build_E(j: int, n: int, q: int) -> np.ndarray:
    """``n x nq`` selector whose ``j``-th block (one-based) is ``I_n``."""
    if not 1 <= j <= q:
        raise IndexError(f"j={j} outside 1..{q}")
    e = np.zeros((n, n * q))
    e[:, (j - 1) * n : j * n] = np.eye(n)
    return e


def build_W(j: int, p, q: int) -> np.ndarray:
    """``(1_q kron P) E_j``: ``P`` repeated down the ``j``-th block column."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    return np.kron(np.ones((q, 1)), p) @ build_E(j, n, q)


def _velocity_row(coeffs, l, p):
    q, n = l.shape[0], p.shape[0]
    lp = np.kron(l, p)
    return np.hstack(
        [
            -coeffs.mu * lp - coeffs.kappa * np.kron(np.eye(q), p),
            -coeffs.eta * lp,
            coeffs.kappa * np.kron(np.ones((q, 1)), p),
        ]
    )


def build_A(j: int, coeffs: McoCoefficients, l, p) -> np.ndarray:
    """Continuous-part matrix of the keep-incumbent step.

    Block rows (sizes ``nq``, ``nq``, ``n``)::

        [ 0                          I_nq         0            ]
        [ -mu L(x)P - kappa I(x)P    -eta L(x)P   kappa 1(x)P  ]
        [ kappa E_j                  0            -kappa I_n   ]
    """
    l, p = _check_inputs(l, p)
    q, n = l.shape[0], p.shape[0]
    nq = n * q
    a = np.zeros((2 * nq + n, 2 * nq + n))
    a[:nq, nq : 2 * nq] = np.eye(nq)
    a[nq : 2 * nq, :] = _velocity_row(coeffs, l, p)
    a[2 * nq :, :nq] = coeffs.kappa * build_E(j, n, q)
    a[2 * nq :, 2 * nq :] = -coeffs.kappa * np.eye(n)
    return a


def build_Ac(coeffs: McoCoefficients, l, p) -> np.ndarray:
    """Correction matrix whose only nonzero block row is the velocity row of ``A``."""
    l, p = _check_inputs(l, p)
    q, n = l.shape[0], p.shape[0]
    nq = n * q
    ac = np.zeros((2 * nq + n, 2 * nq + n))
    ac[:nq, :] = _velocity_row(coeffs, l, p)
    return ac


def build_B(j: int, coeffs: McoCoefficients, l, p) -> np.ndarray:
    """Jump-step matrix: ``h I`` top-middle, ``h`` times the velocity row, ``[E_j, 0, -I_n]`` last."""
    l, p = _check_inputs(l, p)
    q, n = l.shape[0], p.shape[0]
    nq = n * q
    b = np.zeros((2 * nq + n, 2 * nq + n))
    b[:nq, nq : 2 * nq] = coeffs.h * np.eye(nq)
    b[nq : 2 * nq, :] = coeffs.h * _velocity_row(coeffs, l, p)
    b[2 * nq :, :nq] = build_E(j, n, q)
    b[2 * nq :, 2 * nq :] = -np.eye(n)
    return b


@dataclass(frozen=True)
class SwitchedSystemMatrices:
    """The matrices of one step for a fixed ``(j, coeffs, L, P)``."""

    a_j: np.ndarray = field(repr=False)
    a_c: np.ndarray = field(repr=False)
    b_j: np.ndarray = field(repr=False)
    j: int
    n: int
    q: int
    l: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    coeffs: McoCoefficients

    @classmethod
    def build(cls, j: int, coeffs: McoCoefficients, l, p) -> "SwitchedSystemMatrices":
        l, p = _check_inputs(l, p)
        return cls(
            build_A(j, coeffs, l, p),
            build_Ac(coeffs, l, p),
            build_B(j, coeffs, l, p),
            j,
            p.shape[0],
            l.shape[0],
            l,
            p,
            coeffs,
        )

    @property
    def dim(self) -> int:
        return 2 * self.n * self.q + self.n

    @property
    def a_shifted(self) -> np.ndarray:
        """``A_j + h A_c``."""
        return self.a_j + self.coeffs.h * self.a_c

    @property
    def b_shifted(self) -> np.ndarray:
        """``B_j + h^2 A_c``."""
        return self.b_j + self.coeffs.h**2 * self.a_c

    @property
    def keep_step(self) -> np.ndarray:
        """``I + h A_j + h^2 A_c``: one step without an incumbent jump."""
        return np.eye(self.dim) + self.coeffs.h * self.a_shifted

    @property
    def jump_step(self) -> np.ndarray:
        """``I + B_j + h^2 A_c``: one step in which the incumbent jumps to ``x_j``."""
        return np.eye(self.dim) + self.b_shifted


# --------------------------------------------------------------------------
# ranks and kernels


def rank_case(coeffs: McoCoefficients) -> str:
    """Case label from the zero pattern of ``(mu, kappa)``: ``i``, ``ii``, ``iii`` or ``iv``."""
    if coeffs.mu == 0 and coeffs.kappa == 0:
        return "i"
    if coeffs.mu == 0:
        return "ii"
    if coeffs.kappa != 0:
        return "iii"
    return "iv"


def predicted_rank_A(coeffs: McoCoefficients, rank_l: int, rank_p: int, n: int, q: int) -> int:
    """Closed-form rank of ``A_j``.

    Examples
    --------
    >>> predicted_rank_A(McoCoefficients(0, 1, 0), 2, 2, 2, 3)
    6
    >>> predicted_rank_A(McoCoefficients(1, 0, 0), 2, 2, 2, 3)
    10
    """
    case = rank_case(coeffs)
    if case == "i":
        return n * q
    if case in ("ii", "iii"):
        return 2 * n * q - (q - 1) * (n - rank_p)
    return n * q + rank_l * rank_p


def laplacian_kernel_basis(l, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Basis of ``ker L`` whose first column is the all-ones vector.

    The remaining columns are orthonormal and orthogonal to ``1``.
    """
    l = np.asarray(l, dtype=float)
    q = l.shape[0]
    ones = np.ones((q, 1))
    ker = null_space(l, tol).basis
    rest = ker - ones @ (ones.T @ ker) / q
    extra = column_space(rest, tol).basis if ker.shape[1] else np.zeros((q, 0))
    return np.hstack([ones, extra[:, : max(ker.shape[1] - 1, 0)]])


def _stack(z1, z2, z3):
    return np.concatenate([np.ravel(z1), np.ravel(z2), np.ravel(z3)])


def kernel_spanning_vectors_A(
    case: str, coeffs: McoCoefficients, l, p, j: int, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Spanning vectors of ``ker A_j`` built from the case formulas.

    Ingredients: ``1 (x) e_i``; ``g_s (x) j_r`` with ``{j_r}`` a basis of
    ``ker P``; a basis ``w_0 = 1, w_1, ...`` of ``ker L``; and, in case
    ``iii``, the weights ``e_i' (I - P^+ P) e_m``.  The vectors are returned
    as columns and are not orthonormalised.
    """
    if case != rank_case(coeffs):
        raise ValueError(f"coefficients belong to case {rank_case(coeffs)}, not {case}")
    l, p = _check_inputs(l, p)
    q, n = l.shape[0], p.shape[0]
    nq = n * q
    eye_n, eye_q = np.eye(n), np.eye(q)
    zero_nq, zero_n = np.zeros(nq), np.zeros(n)
    ker_p = null_space(p, tol).basis
    w = laplacian_kernel_basis(l, tol)
    ones = np.ones(q)
    jj = j - 1
    vecs = []
    if case == "i":
        for k in range(nq):
            vecs.append(_stack(np.eye(nq)[k], zero_nq, zero_n))
        for i in range(n):
            vecs.append(_stack(zero_nq, zero_nq, eye_n[i]))
    elif case == "ii":
        for i in range(n):
            vecs.append(_stack(np.kron(ones, eye_n[i]), zero_nq, eye_n[i]))
        for s in range(q):
            if s == jj:
                continue
            for r in range(ker_p.shape[1]):
                vecs.append(_stack(np.kron(eye_q[s], ker_p[:, r]), zero_nq, zero_n))
    elif case == "iii":
        proj = eye_n - pinv(p, tol) @ p
        for i in range(n):
            vecs.append(_stack(np.kron(w[:, 0], eye_n[i]), zero_nq, eye_n[i]))
        for li in range(1, w.shape[1]):
            for m in range(n):
                weights = proj[:, m]
                vecs.append(
                    _stack(np.kron(w[:, li], weights), zero_nq, w[jj, li] * weights)
                )
        for s in range(q):
            for r in range(ker_p.shape[1]):
                third = ker_p[:, r] if s == jj else zero_n
                vecs.append(_stack(np.kron(eye_q[s], ker_p[:, r]), zero_nq, third))
    else:
        for li in range(w.shape[1]):
            for i in range(n):
                vecs.append(_stack(np.kron(w[:, li], eye_n[i]), zero_nq, zero_n))
        for s in range(q):
            for r in range(ker_p.shape[1]):
                vecs.append(_stack(np.kron(eye_q[s], ker_p[:, r]), zero_nq, zero_n))
        for i in range(n):
            vecs.append(_stack(zero_nq, zero_nq, eye_n[i]))
    if not vecs:
        return np.zeros((2 * nq + n, 0))
    return np.column_stack(vecs)


def predicted_kernel_A(
    case: str, coeffs: McoCoefficients, l, p, j: int, tol: ToleranceConfig = DEFAULT_TOL
) -> Subspace:
    """Orthonormalised span of :func:`kernel_spanning_vectors_A`."""
    return column_space(kernel_spanning_vectors_A(case, coeffs, l, p, j, tol), tol)


def kernel_shift_invariance_check(a_j, a_c, h: float, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """``ker A == ker(A + h A_c)`` and ``ker(A (A + h A_c)) == ker((A + h A_c)^2)``."""
    a_j = np.asarray(a_j, dtype=float)
    shifted = a_j + h * np.asarray(a_c, dtype=float)
    first = subspace_equal(null_space(a_j, tol), null_space(shifted, tol), tol)
    second = subspace_equal(
        null_space(a_j @ shifted, tol), null_space(shifted @ shifted, tol), tol
    )
    return first and second


def zero_semisimple_dichotomy_check(
    a_j, a_c, h: float, coeffs: McoCoefficients, rank_p: int, n: int,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> bool:
    """Whether semisimplicity of 0 in ``A + h A_c`` follows the predicted pattern.

    Predicted: never semisimple when ``kappa == 0``; otherwise semisimple
    exactly when ``P`` has full rank.
    """
    shifted = np.asarray(a_j, dtype=float) + h * np.asarray(a_c, dtype=float)
    try:
        semisimple = is_semisimple_zero(shifted, tol)
    except ZeroNotEigenvalueError:
        return False
    if coeffs.kappa == 0:
        return not semisimple
    return semisimple == (rank_p == n)


# --------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectrumPrediction:
    """Predicted eigenvalue set with the formula that produced each value."""

    values: np.ndarray
    case_tags: tuple

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("predicted eigenvalues must be finite")
        object.__setattr__(self, "values", vals)
        if len(self.case_tags) != vals.size:
            raise ValueError("one tag per predicted value required")

    def distance(self, lam: complex) -> float:
        """Distance from ``lam`` to the nearest predicted value."""
        return float(np.min(np.abs(self.values - lam)))

    def tagged(self, tag: str) -> np.ndarray:
        return self.values[[t == tag for t in self.case_tags]]

    def to_json(self) -> list:
        return [
            {"value": [float(v.real), float(v.imag)], "tag": t}
            for v, t in zip(self.values, self.case_tags)
        ]


def _quadratic_roots(b, c):
    disc = np.sqrt(complex(b * b - 4 * c))
    return [(-b + disc) / 2, (-b - disc) / 2]


def _nonzero_laplacian_eigs(l, tol=1e-9):
    nu = np.linalg.eigvals(-np.asarray(l, dtype=float))
    scale = max(1.0, np.max(np.abs(nu), initial=0.0))
    return nu[np.abs(nu) > tol * scale]


def predicted_spectrum_A(coeffs: McoCoefficients, l, j: int = 1, n: int = 1, q: Optional[int] = None) -> SpectrumPrediction:
    """Closed-form eigenvalue superset for ``A_j + h A_c`` (``P`` of full rank).

    Contains ``0``, ``-kappa``, the roots of ``lam^2 + kappa (1 + h) lam + kappa``,
    the roots of ``lam^2 + kappa h lam + kappa`` and, for every nonzero
    eigenvalue ``nu`` of ``-L``, the roots of
    ``lam^2 + (kappa h - nu (eta + mu h)) lam + (kappa - nu mu)``.  Roots that
    annihilate ``eta lam + mu h lam + mu`` are dropped.
    """
    k, h, mu, eta = coeffs.kappa, coeffs.h, coeffs.mu, coeffs.eta
    vals, tags = [0j, complex(-k)], ["zero", "minus_kappa"]
    for lam in _quadratic_roots(k * (1 + h), k):
        vals.append(lam)
        tags.append("lambda_12")
    for lam in _quadratic_roots(k * h, k):
        vals.append(lam)
        tags.append("lambda_56")
    for nu in _nonzero_laplacian_eigs(l):
        for lam in _quadratic_roots(k * h - nu * (eta + mu * h), k - nu * mu):
            if abs(eta * lam + mu * h * lam + mu) <= 1e-12 * max(1.0, abs(lam)):
                continue
            vals.append(lam)
            tags.append("laplacian_quadratic")
    return SpectrumPrediction(np.array(vals), tuple(tags))


def predicted_spectrum_B(coeffs: McoCoefficients, l, n: int = 1, q: Optional[int] = None) -> SpectrumPrediction:
    """Closed-form eigenvalue superset for ``B_j + h^2 A_c`` (``P`` of full rank).

    Contains ``0``, ``-1``, the roots of ``lam^2 + h^2 kappa lam + h^2 kappa``,
    the roots of ``lam^2 + (kappa h^2 - nu h (eta + mu h)) lam + (kappa h^2 - nu mu h^2)``
    for every nonzero eigenvalue ``nu`` of ``-L``, and the roots of the cubic
    ``lam^3 + (1 + h^2 kappa) lam^2 + (2 h^2 kappa - h kappa) lam + h^2 kappa``.
    """
    k, h, mu, eta = coeffs.kappa, coeffs.h, coeffs.mu, coeffs.eta
    vals, tags = [0j, -1 + 0j], ["zero", "minus_one"]
    for lam in _quadratic_roots(h * h * k, h * h * k):
        vals.append(lam)
        tags.append("b_quadratic")
    for nu in _nonzero_laplacian_eigs(l):
        for lam in _quadratic_roots(k * h * h - nu * h * (eta + mu * h), k * h * h - nu * mu * h * h):
            if abs(eta * h * lam + mu * h * h * lam + mu * h * h) <= 1e-12 * max(1.0, abs(lam)):
                continue
            vals.append(lam)
            tags.append("laplacian_quadratic")
    cubic = [1.0, 1.0 + h * h * k, 2 * h * h * k - h * k, h * h * k]
    for lam in np.roots(cubic):
        vals.append(complex(lam))
        tags.append("cubic")
    return SpectrumPrediction(np.array(vals), tuple(tags))


@dataclass(frozen=True)
class ContainmentReport:
    """Result of matching a computed spectrum against a predicted set."""

    passed: bool
    max_miss: float
    worst_eigenvalue: complex
    computed: np.ndarray = field(repr=False)
    prediction: SpectrumPrediction = field(repr=False)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {
            "pass": bool(self.passed),
            "max_miss": float(self.max_miss),
            "worst_eigenvalue": [float(self.worst_eigenvalue.real), float(self.worst_eigenvalue.imag)],
        }


def _containment(matrix, prediction, tol):
    ev = np.linalg.eigvals(matrix)
    miss = np.array([prediction.distance(e) for e in ev])
    worst = int(np.argmax(miss))
    return ContainmentReport(
        bool(np.all(miss <= tol)), float(miss[worst]), complex(ev[worst]), ev, prediction
    )


def verify_spectrum_containment_A(instance: SwitchedSystemMatrices, tol: float = 1e-6) -> ContainmentReport:
    """Every eigenvalue of ``A_j + h A_c`` lies within ``tol`` of the predicted set."""
    pred = predicted_spectrum_A(instance.coeffs, instance.l, instance.j, instance.n, instance.q)
    return _containment(instance.a_shifted, pred, tol)


def verify_spectrum_containment_B(instance: SwitchedSystemMatrices, tol: float = 1e-6) -> ContainmentReport:
    """Every eigenvalue of ``B_j + h^2 A_c`` lies within ``tol`` of the predicted set."""
    pred = predicted_spectrum_B(instance.coeffs, instance.l, instance.n, instance.q)
    return _containment(instance.b_shifted, pred, tol)


# --------------------------------------------------------------------------
# convergence hypotheses


@dataclass
class ConditionReport:
    """Outcome of the five convergence hypotheses for one instance."""

    h1: bool
    h2: bool
    h3: bool
    h4: bool
    h5: bool
    violated_details: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return self.h1 and self.h2 and self.h3 and self.h4 and self.h5

    def holds(self, names) -> bool:
        return all(getattr(self, name.lower()) for name in names)

    def to_json(self) -> dict:
        return {
            "h1": self.h1, "h2": self.h2, "h3": self.h3, "h4": self.h4, "h5": self.h5,
            "violated_details": self.violated_details,
        }


# relative margin on the strict step bound, so round-off cannot decide an exact equality
STEP_BOUND_MARGIN = 1e-9


def _step_bound_ok(h, prediction, tol):
    """``h < -(lam + conj(lam)) / |lam|^2`` for every value with nonzero real part.

    The inequality must hold with relative margin :data:`STEP_BOUND_MARGIN`.
    """
    worst = None
    for lam in prediction.values:
        if abs(lam.real) <= tol:
            continue
        bound = -2.0 * lam.real / abs(lam) ** 2
        if not h < bound - STEP_BOUND_MARGIN * abs(bound):
            if worst is None or bound < worst[1]:
                worst = (lam, bound)
    return worst


def _kernel_pair_equal(x, tol):
    lhs = null_space(x.T @ x + x.T + x, tol)
    rhs = null_space(x.T @ x + x @ x, tol)
    return subspace_equal(lhs, rhs, tol)


def check_theorem_conditions(
    instance: SwitchedSystemMatrices, tol: ToleranceConfig = DEFAULT_TOL, norm_tol: float = 1e-10
) -> ConditionReport:
    """Evaluate hypotheses H1-H5 for one ``(coeffs, L, P, j)``.

    H1
        ``P`` is paracontracting (the identity counts, since it is
        vacuously so) and has full rank.
    H2
        The step bound holds for every predicted eigenvalue of
        ``A_j + h A_c`` with nonzero real part.  For ``kappa > 0`` the
        ``lambda_56`` pair puts the bound exactly at ``h``, so H2 then fails.
    H3
        The same bound over the predicted eigenvalues of ``B_j + h^2 A_c``.
    H4
        ``||I + h A_j + h^2 A_c|| <= 1`` and ``||I + B_j + h^2 A_c|| <= 1``
        (spectral norm, up to ``norm_tol``).
    H5
        For ``X = h A_j + h^2 A_c`` and ``X = B_j + h^2 A_c``:
        ``ker(X'X + X' + X) == ker(X'X + X^2)``.

    Failures are recorded in ``violated_details``; nothing is raised.
    """
    c, p = instance.coeffs, instance.p
    details = {}
    n = instance.n
    is_identity = np.allclose(p, np.eye(n), atol=tol.residual_tol, rtol=0)
    full_rank = numerical_rank(p, tol) == n
    para = is_identity or is_paracontracting_lemma1(p, tol)
    h1 = bool(full_rank and para)
    if not h1:
        details["h1"] = {"full_rank": bool(full_rank), "paracontracting": bool(para)}

    h = c.h
    h2 = h3 = h > 0
    worst = _step_bound_ok(h, predicted_spectrum_A(c, instance.l), tol.eig_match_tol)
    if worst is not None:
        h2 = False
    if not h2:
        details["h2"] = {"h": h, "eigenvalue": None if worst is None else [worst[0].real, worst[0].imag],
                         "bound": None if worst is None else worst[1]}
    worst = _step_bound_ok(h, predicted_spectrum_B(c, instance.l), tol.eig_match_tol)
    if worst is not None:
        h3 = False
    if not h3:
        details["h3"] = {"h": h, "eigenvalue": None if worst is None else [worst[0].real, worst[0].imag],
                         "bound": None if worst is None else worst[1]}

    norm_keep = spectral_norm(instance.keep_step)
    norm_jump = spectral_norm(instance.jump_step)
    h4 = bool(norm_keep <= 1 + norm_tol and norm_jump <= 1 + norm_tol)
    if not h4:
        details["h4"] = {"norm_keep": norm_keep, "norm_jump": norm_jump}

    x_keep = h * instance.a_shifted
    x_jump = instance.b_shifted
    k1, k2 = _kernel_pair_equal(x_keep, tol), _kernel_pair_equal(x_jump, tol)
    h5 = bool(k1 and k2)
    if not h5:
        details["h5"] = {"keep_step": bool(k1), "jump_step": bool(k2)}
    return ConditionReport(h1, bool(h2), bool(h3), h4, h5, details)

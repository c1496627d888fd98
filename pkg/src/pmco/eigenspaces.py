"""Closed-form eigenvector families of ``A_j + h A_c`` and their residual checks.

Each case ``ii`` .. ``x`` pairs a gate (a condition on the coefficients and
the Laplacian) with a formula for eigenvectors of one eigenvalue.  The
formulas are built literally, one candidate per free coefficient, and each
candidate is tested against ``(A_j + h A_c - lam I) x = 0``.

Conventions
-----------
* Conjugation markers in the published formulas are resolved so that every
  quantity is evaluated at the eigenvalue itself.
* ``g_l`` is the ``l``-th standard basis vector of ``C^q`` and ``e_i`` that
  of ``C^n``.  ``w_0 = 1, w_1, ...`` is a basis of ``ker L``.
* Pseudo-inverse branch selection compares vectors with the residual rule
  ``||g - X^+ X g|| < 1e-10 (1 + ||g||)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import DEFAULT_TOL, numerical_rank, pinv
from .switched import SwitchedSystemMatrices, laplacian_kernel_basis

__all__ = ["EigenspaceReport", "EIGENSPACE_CASES", "verify_eigenspace_case", "case_gates"]

EIGENSPACE_CASES = ("ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x")

# equality tests on scalar gate expressions
_GATE_TOL = 1e-9
# "1 is an eigenvalue of c L"
_SPEC_TOL = 1e-8
# branch selection inside the pseudo-inverse vectors
_BRANCH_TOL = 1e-10


@dataclass
class EigenspaceReport:
    """Outcome of one eigenvector-family check.

    Attributes
    ----------
    case : str
    applicable : bool
        False when no eigenvalue passes the gate of this case.
    eigenvalues : list of complex
        Eigenvalues for which vectors were built.
    constructed_dim : int
        Rank of the nonzero candidates, summed over eigenvalues.
    true_dim : int
        Numerical dimension of the eigenspaces, summed over eigenvalues.
    max_residual : float
        Largest ``||(M - lam I) x|| / (||x|| max(1, ||M||))``.
    passed : bool
        ``applicable`` and every residual within tolerance.
    reason : str
    """

    case: str
    applicable: bool
    eigenvalues: list = field(default_factory=list)
    constructed_dim: int = 0
    true_dim: int = 0
    max_residual: float = 0.0
    passed: bool = False
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "applicable": self.applicable,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "constructed_dim": int(self.constructed_dim),
            "true_dim": int(self.true_dim),
            "max_residual": float(self.max_residual),
            "pass": bool(self.passed),
            "reason": self.reason,
        }


def _one_in_spec(c, l):
    ev = np.linalg.eigvals(c * np.asarray(l, dtype=complex))
    return bool(np.any(np.abs(ev - 1.0) < _SPEC_TOL * max(1.0, np.max(np.abs(ev), initial=0.0))))


def _is_zero(x):
    return abs(x) < _GATE_TOL


def _roots(b, c):
    disc = np.sqrt(complex(b * b - 4 * c))
    r = [(-b + disc) / 2, (-b - disc) / 2]
    return r[:1] if abs(r[0] - r[1]) < 1e-14 else r


def _pinv_vector(aux, jj, q):
    """Column built from a pseudo-inverse of ``aux`` around ``g_j``.

    If ``g_j`` is not reproduced by ``aux^+ aux`` the pseudo-inverse of the
    row ``g_j' - g_j' aux^+ aux`` is used; otherwise
    ``(1 + g_j' G g_j)^-1 G g_j`` with ``G = (aux' aux)^+``.
    """
    g = np.eye(q)[:, jj].astype(complex)
    ap = pinv(aux)
    if np.linalg.norm(g - ap @ aux @ g) >= _BRANCH_TOL * (1 + np.linalg.norm(g)):
        row = (g - (g @ ap @ aux))[None, :]
        return pinv(row)[:, 0]
    gram = pinv(aux.conj().T @ aux)
    return (gram @ g) / (1.0 + g @ gram @ g)


def _psi(a, f, jj, q):
    """Scaled variant used with the attraction factor ``a``."""
    g = np.eye(q)[:, jj].astype(complex)
    fp = pinv(f)
    if np.linalg.norm(a * g - a * (fp @ f @ g)) >= _BRANCH_TOL * (1 + np.linalg.norm(a * g)):
        row = (a * g - a * (g @ fp @ f))[None, :]
        return pinv(row)[:, 0]
    gram = pinv(f.conj().T @ f)
    return a * (gram @ g) / (1.0 + abs(a) ** 2 * (g @ gram @ g))


def _blocks(c, u, third, n):
    """Stack ``[c (u kron e_i); u kron e_i; third_i e_i]`` for every ``i``."""
    eye = np.eye(n)
    out = []
    for i in range(n):
        x2 = np.kron(u, eye[i])
        out.append(np.concatenate([c * x2, x2, third * eye[i]]))
    return out


def _case_ii(inst, lam, w):
    k, h, n, jj = inst.coeffs.kappa, inst.coeffs.h, inst.n, inst.j - 1
    c = (1 + h * lam) / lam
    vecs = []
    for li in range(w.shape[1]):
        vecs += _blocks(c, w[:, li].astype(complex), -w[jj, li], n)
    return vecs


def _case_iii(inst, lam):
    cf, l, n, q, jj = inst.coeffs, inst.l, inst.n, inst.q, inst.j - 1
    k, h, mu, eta = cf.kappa, cf.h, cf.mu, cf.eta
    c = (1 + h * lam) / lam
    g_mat = (mu / lam + mu * h + eta) * l - k * np.eye(q)
    proj = np.eye(q) - pinv(g_mat) @ g_mat
    coef3 = (k + k * h * lam) / (lam * (lam + k))
    vecs = []
    for li in range(q):
        u = proj[:, li]
        vecs += _blocks(c, u, coef3 * u[jj], n)
    eye = np.eye(n)
    ones = np.ones(q)
    for i in range(n):
        x2 = -np.kron(ones, eye[i]) / k
        x3 = -(1 + h * lam) / (lam * (lam + k)) * eye[i]
        vecs.append(np.concatenate([c * x2, x2, x3]))
    return vecs


def _case_iv(inst, lam):
    cf, l, n, q, jj = inst.coeffs, inst.l, inst.n, inst.q, inst.j - 1
    k, h, mu, eta = cf.kappa, cf.h, cf.mu, cf.eta
    c = (1 + h * lam) / lam
    f = (mu / lam + mu * h + eta) * l + (k / lam + lam + k * h) * np.eye(q)
    a = k * k * (1 + h * lam) / (lam * (lam + k))
    psi = _psi(a, f, jj, q)
    fp = pinv(f)
    coef3 = (k + k * h * lam) / (lam * (lam + k))
    eye_q = np.eye(q)
    vecs = []
    for li in range(q):
        g = eye_q[:, li]
        u = g - fp @ f @ g + a * (f[jj] @ g) * (fp @ psi) - a * g[jj] * psi
        vecs += _blocks(c, u, coef3 * u[jj], n)
    return vecs


def _case_vi(inst, lam):
    n, q, jj = inst.n, inst.q, inst.j - 1
    c = (1 + inst.coeffs.h * lam) / lam
    vecs = []
    for li in range(q):
        u = np.eye(q)[:, li] - (1.0 if li == jj else 0.0) * np.eye(q)[:, jj]
        vecs += _blocks(c, u.astype(complex), 0.0, n)
    return vecs


def _velocity_only(u, n, nq, third=None):
    eye = np.eye(n)
    out = []
    for i in range(n):
        x3 = np.zeros(n, dtype=complex) if third is None else third[i]
        out.append(np.concatenate([np.zeros(nq), np.kron(u, eye[i]), x3]))
    return out


def _case_vii(inst):
    # The published third block has length nq rather than n; its j-th block
    # (E_j applied to it) is used so that a vector of the right size results.
    cf, l, n, q, jj = inst.coeffs, inst.l, inst.n, inst.q, inst.j - 1
    nq = n * q
    eye_n, eye_q = np.eye(n), np.eye(q)
    vecs = []
    for li in range(q):
        g = eye_q[:, li]
        for i in range(n):
            long = (cf.eta / cf.kappa) * np.kron(l @ g, eye_n[i]) - np.kron(g, eye_n[i])
            x3 = long[jj * n : (jj + 1) * n]
            vecs.append(np.concatenate([np.zeros(nq), np.kron(g, eye_n[i]), x3]))
    return vecs


def _case_viii(inst):
    n, q, jj = inst.n, inst.q, inst.j - 1
    vecs = []
    for li in range(q):
        u = np.eye(q)[:, li] - (1.0 if li == jj else 0.0) * np.eye(q)[:, jj]
        vecs += _velocity_only(u, n, n * q)
    return vecs


def _case_ix(inst):
    cf, l, n, q, jj = inst.coeffs, inst.l, inst.n, inst.q, inst.j - 1
    nq = n * q
    s = cf.kappa / (cf.mu + cf.eta)
    varphi = _pinv_vector(l.astype(complex), jj, q)
    lp = pinv(l)
    eye_n, eye_q = np.eye(n), np.eye(q)
    vecs = []
    base = s * (lp @ np.ones(q)) - s * (lp @ varphi)
    for i in range(n):
        vecs.append(np.concatenate([np.zeros(nq), np.kron(base, eye_n[i]), eye_n[i]]))
    for li in range(q):
        g = eye_q[:, li]
        u = g - lp @ l @ g + (l[jj] @ g) * (lp @ varphi) - g[jj] * varphi
        vecs += _velocity_only(u, n, nq)
    return vecs


def _case_x(inst):
    cf, l, n, q, jj = inst.coeffs, inst.l, inst.n, inst.q, inst.j - 1
    k, h, mu, eta = cf.kappa, cf.h, cf.mu, cf.eta
    m = ((mu / k) * (k * h - 1) + eta) * l + (k * h - 1 - k) * np.eye(q)
    phi = _pinv_vector(m.astype(complex), jj, q)
    mp = pinv(m)
    vecs = []
    for li in range(q):
        g = np.eye(q)[:, li]
        u = g - mp @ m @ g + (m[jj] @ g) * (mp @ phi) - g[jj] * phi
        vecs += _velocity_only(u, n, n * q)
    return vecs


def case_gates(inst: SwitchedSystemMatrices, case: str) -> list:
    """Eigenvalues for which the gate of ``case`` holds (empty if none)."""
    cf, l = inst.coeffs, inst.l
    k, h, mu, eta = cf.kappa, cf.h, cf.mu, cf.eta
    if h <= 0:
        return []
    out = []
    if case in ("ii", "iii"):
        if k == 0:
            return []
        for lam in _roots(k * (1 + h), k):
            if _is_zero(lam):
                continue
            hit = _one_in_spec(mu / (lam * k) + mu * h / k + eta / k, l)
            if case == "ii" and not hit:
                out.append(lam)
            if case == "iii" and hit and not _is_zero(h * k - 1):
                out.append(lam)
    elif case == "iv":
        nus = np.linalg.eigvals(-l)
        for nu in nus[np.abs(nus) > 1e-9 * max(1.0, np.max(np.abs(nus)))]:
            for lam in _roots(k * h - nu * (eta + mu * h), k - nu * mu):
                if _is_zero(lam):
                    continue
                den = eta * lam + mu * h * lam + mu
                if (
                    not _is_zero(k / lam + lam + k * h)
                    and not _is_zero(lam + k)
                    and not _is_zero(mu / lam + mu * h + eta)
                    and not _is_zero(den)
                    and abs((lam**2 + k * h * lam + k) / den - nu) < 1e-8 * max(1.0, abs(nu))
                ):
                    if all(abs(lam - o) > 1e-10 for o in out):
                        out.append(lam)
    elif case in ("v", "vi"):
        if k == 0:
            return []
        for lam in _roots(k * h, k):
            if _is_zero(lam) or _is_zero(lam + k) or not _is_zero(k / lam + lam + k * h):
                continue
            coupling = mu / lam + mu * h + eta
            if case == "v" and not _is_zero(coupling):
                out.append(lam)
            if case == "vi" and _is_zero(coupling) and mu == 0:
                out.append(lam)
    elif case == "vii":
        if k > 0 and _is_zero(k * h - 1) and _one_in_spec(eta / k, l):
            out.append(complex(-k))
    elif case == "viii":
        if k > 0 and _is_zero(h - 1 - 1 / k) and _is_zero((mu / k) * (k * h - 1) + eta):
            out.append(complex(-k))
    elif case == "ix":
        if k > 0 and mu + eta > 0 and _is_zero(h - 1 - 1 / k) and _one_in_spec((mu + eta) / k, l):
            out.append(complex(-k))
    elif case == "x":
        den = k * (1 + k - k * h)
        if k > 0 and not _is_zero(k * h - 1) and not _is_zero(den):
            if _one_in_spec((mu * (k * h - 1) + eta * k) / den, l):
                out.append(complex(-k))
    else:
        raise ValueError(f"unknown case {case!r}")
    return out


def _candidates(inst, case, lam, w):
    if case == "ii":
        return _case_ii(inst, lam, w)
    if case == "iii":
        return _case_iii(inst, lam)
    if case in ("iv", "v"):
        return _case_iv(inst, lam)
    if case == "vi":
        return _case_vi(inst, lam)
    if case == "vii":
        return _case_vii(inst)
    if case == "viii":
        return _case_viii(inst)
    if case == "ix":
        return _case_ix(inst)
    return _case_x(inst)


def verify_eigenspace_case(
    inst: SwitchedSystemMatrices, case: str, tol: float = 1e-7
) -> EigenspaceReport:
    """Build the eigenvector family of ``case`` and test its residuals.

    Parameters
    ----------
    inst : SwitchedSystemMatrices
    case : {"ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x"}
    tol : float
        Bound on the relative residual of every nonzero candidate.

    Returns
    -------
    EigenspaceReport
        ``applicable`` is False (and ``passed`` False) when the gate does not fire.
    """
    if case not in EIGENSPACE_CASES:
        raise ValueError(f"unknown case {case!r}")
    lams = case_gates(inst, case)
    if not lams:
        return EigenspaceReport(case, False, reason="gate does not hold")
    m = inst.a_shifted.astype(complex)
    scale = max(1.0, np.linalg.norm(m, 2))
    w = laplacian_kernel_basis(inst.l)
    worst, built, true_dim = 0.0, 0, 0
    for lam in lams:
        shifted = m - lam * np.eye(m.shape[0])
        cands = [np.asarray(v, dtype=complex) for v in _candidates(inst, case, lam, w)]
        norms = [np.linalg.norm(v) for v in cands]
        kept = [v for v, nv in zip(cands, norms) if nv > 1e-12]
        if kept:
            mat = np.column_stack(kept)
            built += numerical_rank(mat)
            res = np.linalg.norm(shifted @ mat, axis=0) / (np.linalg.norm(mat, axis=0) * scale)
            worst = max(worst, float(np.max(res)))
        true_dim += m.shape[0] - numerical_rank(shifted, DEFAULT_TOL)
    passed = built > 0 and worst <= tol
    reason = "" if passed else ("no nonzero candidate" if built == 0 else "residual above tolerance")
    return EigenspaceReport(case, True, list(lams), built, true_dim, worst, passed, reason)

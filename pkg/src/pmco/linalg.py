"""Dense linear-algebra kernels and subspace algebra.

Every closed-form rank, kernel and spectrum statement in the package is
checked against the routines in this module.  Subspaces are carried as
orthonormal bases so that sums, intersections and equality tests reduce
to singular value decompositions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ToleranceConfig",
    "Subspace",
    "DEFAULT_TOL",
    "kron",
    "odot",
    "numerical_rank",
    "null_space",
    "column_space",
    "principal_angles",
    "subspace_sum",
    "subspace_intersection",
    "subspace_equal",
    "pinv",
    "eigen",
    "kron_kernel_decomposition_check",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by the rank, subspace and spectrum tests.

    Parameters
    ----------
    rank_rel_tol : float
        Relative singular value cut-off; a singular value counts when it
        exceeds ``max(rows, cols) * sigma_max * rank_rel_tol``.
    residual_tol : float
        Relative residual bound for eigenpairs and Penrose identities.
    subspace_angle_tol : float
        Largest principal angle (radians) for two subspaces to be equal.
    eig_match_tol : float
        Distance below which two eigenvalues are considered the same.
    """

    rank_rel_tol: float = 1e-12
    residual_tol: float = 1e-10
    subspace_angle_tol: float = 1e-8
    eig_match_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_tol", "subspace_angle_tol", "eig_match_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def _as_finite(a, name="a", allow_complex=False):
    arr = np.asarray(a)
    if not allow_complex and np.iscomplexobj(arr):
        raise TypeError(f"{name} must be real")
    arr = arr.astype(complex if np.iscomplexobj(arr) else float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Subspace:
    """Linear subspace stored as an orthonormal column basis.

    Parameters
    ----------
    ambient_dim : int
        Dimension of the surrounding space.
    basis : ndarray of shape (ambient_dim, dim)
        Orthonormal columns.  The trivial subspace has zero columns.
    """

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise ValueError("basis must have ambient_dim rows")
        if b.shape[1] > self.ambient_dim:
            raise ValueError("more basis vectors than the ambient dimension")
        if b.shape[1]:
            gram = b.conj().T @ b
            if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-10:
                raise ValueError("basis columns are not orthonormal")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    @classmethod
    def span(cls, vectors, tol: ToleranceConfig = DEFAULT_TOL) -> "Subspace":
        """Subspace spanned by the columns of ``vectors``."""
        return column_space(vectors, tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self, tol: ToleranceConfig = DEFAULT_TOL) -> "Subspace":
        """Orthogonal complement within the ambient space."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return null_space(self.basis.conj().T, tol)

    def contains(self, v, tol: float = 1e-8) -> bool:
        """Whether ``v`` lies in the subspace up to relative tolerance."""
        v = np.asarray(v).reshape(-1)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        r = v - self.basis @ (self.basis.conj().T @ v)
        return bool(np.linalg.norm(r) <= tol * nv)


def kron(a, b) -> np.ndarray:
    """Kronecker product of two finite matrices (vectors are treated as columns)."""
    a = _as_finite(a, "a", allow_complex=True)
    b = _as_finite(b, "b", allow_complex=True)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    return np.kron(a, b)


def _singular_cutoff(s, shape, tol):
    if s.size == 0 or s[0] == 0:
        return np.inf
    return max(shape) * s[0] * tol.rank_rel_tol


def numerical_rank(a, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above the relative cut-off.

    Examples
    --------
    >>> numerical_rank(np.ones((2, 2)))
    1
    """
    a = _as_finite(a, allow_complex=True)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > _singular_cutoff(s, a.shape, tol)))


def null_space(a, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``{x : a @ x = 0}``."""
    a = _as_finite(a, allow_complex=True)
    if a.ndim == 1:
        a = a[None, :]
    m, n = a.shape
    if m == 0 or n == 0:
        return Subspace.full(n)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = int(np.sum(s > _singular_cutoff(s, a.shape, tol)))
    basis = vh[r:].conj().T
    if not np.iscomplexobj(a):
        basis = basis.real
    return Subspace(n, basis)


def column_space(a, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the range of ``a``."""
    a = _as_finite(a, allow_complex=True)
    if a.ndim == 1:
        a = a[:, None]
    m, n = a.shape
    if n == 0:
        return Subspace.trivial(m)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(s > _singular_cutoff(s, a.shape, tol)))
    return Subspace(m, u[:, :r])


def _check_ambient(s1: Subspace, s2: Subspace):
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {s1.ambient_dim} vs {s2.ambient_dim}"
        )


def principal_angles(s1: Subspace, s2: Subspace) -> np.ndarray:
    """Principal angles between two subspaces, in radians, ascending.

    Uses the sine-based formula for small angles so that angles near
    zero are resolved to machine precision rather than ``sqrt(eps)``.
    """
    _check_ambient(s1, s2)
    k = min(s1.dim, s2.dim)
    if k == 0:
        return np.zeros(0)
    a, b = s1.basis, s2.basis
    if s1.dim < s2.dim:
        a, b = b, a
    # sin of the angles: residual of the smaller basis against the larger one
    resid = b - a @ (a.conj().T @ b)
    sin = np.linalg.svd(resid, compute_uv=False)
    cos = np.linalg.svd(a.conj().T @ b, compute_uv=False)
    sin = np.sort(np.clip(sin, 0.0, 1.0))[:k]
    cos = np.sort(np.clip(cos, 0.0, 1.0))[::-1][:k]
    angles = np.where(sin < 0.5, np.arcsin(sin), np.arccos(cos))
    return np.sort(angles)


def subspace_sum(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing both arguments."""
    _check_ambient(s1, s2)
    return column_space(np.hstack([s1.basis, s2.basis]), tol)


def subspace_intersection(
    s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL
) -> Subspace:
    """Intersection, computed as the complement of the sum of complements."""
    _check_ambient(s1, s2)
    return subspace_sum(s1.complement(tol), s2.complement(tol), tol).complement(tol)


def subspace_equal(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Equal dimensions and every principal angle below ``subspace_angle_tol``."""
    _check_ambient(s1, s2)
    if s1.dim != s2.dim:
        return False
    if s1.dim == 0:
        return True
    return bool(np.max(principal_angles(s1, s2)) < tol.subspace_angle_tol)


def odot(x, s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Blockwise scaled copies of a subspace.

    The set ``{[x_1 y_1; ...; x_n y_n] : y_i in S}`` equals the sum of the
    subspaces ``x_i e_i (x) S``, which is how it is assembled here.

    Parameters
    ----------
    x : array_like of shape (n,)
    s : Subspace
        Subspace of dimension ``m`` ambient.

    Returns
    -------
    Subspace
        Subspace of ambient dimension ``n * m``.
    """
    x = _as_finite(x, "x").reshape(-1)
    n, m = x.size, s.ambient_dim
    pieces = []
    for i in range(n):
        if x[i] == 0 or s.dim == 0:
            continue
        e = np.zeros((n, 1))
        e[i, 0] = x[i]
        pieces.append(np.kron(e, s.basis))
    if not pieces:
        return Subspace.trivial(n * m)
    return column_space(np.hstack(pieces), tol)


def pinv(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values at or below the rank cut-off are treated as zero, so the
    result is consistent with :func:`numerical_rank`.
    """
    a = _as_finite(a, allow_complex=True)
    if a.ndim == 1:
        a = a[None, :]
    m, n = a.shape
    if a.size == 0:
        return np.zeros((n, m), dtype=a.dtype)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > _singular_cutoff(s, a.shape, tol)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv) @ u.conj().T


def eigen(a):
    """Full complex spectrum with unit right eigenvectors.

    Returns
    -------
    values : ndarray of complex, shape (n,)
    vectors : ndarray of complex, shape (n, n)
        Column ``k`` is an eigenvector for ``values[k]``.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the eigensolver fails to converge.
    """
    a = _as_finite(a, allow_complex=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigen requires a square matrix")
    w, v = np.linalg.eig(a)
    return w.astype(complex), v.astype(complex)


def kron_kernel_decomposition_check(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Check ``ker(a (x) b) == ker(a (x) I) + ker(I (x) b)`` numerically."""
    a = _as_finite(a, "a")
    b = _as_finite(b, "b")
    m, k = a.shape[1], b.shape[1]
    lhs = null_space(np.kron(a, b), tol)
    rhs = subspace_sum(
        null_space(np.kron(a, np.eye(k)), tol),
        null_space(np.kron(np.eye(m), b), tol),
        tol,
    )
    return subspace_equal(lhs, rhs, tol)

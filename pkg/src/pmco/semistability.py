"""Semistability, paracontraction and convergent matrix products.

A square matrix ``A`` is discrete-time semistable when its spectrum lies in
the open unit disc apart from a semisimple eigenvalue 1, or equivalently when
``lim A**k`` exists.  A matrix ``W`` is paracontracting when ``W x != x``
forces ``||W x|| < ||x||``.  This module offers two independent routes to
each property so that they can be cross-checked against each other.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    column_space,
    null_space,
    numerical_rank,
    subspace_equal,
)

__all__ = [
    "ParaMatrix",
    "MatrixPool",
    "ProductIterationResult",
    "PoolHypothesisWarning",
    "ZeroNotEigenvalueError",
    "is_discrete_time_semistable",
    "is_nontrivially_semistable",
    "semistable_limit_oracle",
    "spectral_norm",
    "paracontraction_kernel_condition",
    "is_paracontracting_lemma1",
    "paracontraction_definition_check",
    "is_semisimple_zero",
    "approx_semiobservable",
    "product_iteration",
    "limit_membership_check",
    "random_orthogonal",
    "random_paracontracting",
    "round_robin",
    "random_selector",
]


class ZeroNotEigenvalueError(ValueError):
    """Raised when a semisimplicity test for 0 is asked of a full-rank matrix."""


class PoolHypothesisWarning(UserWarning):
    """A pool member fails a hypothesis of the product convergence result."""


def _square(a, name="a"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def spectral_norm(a) -> float:
    """Largest singular value."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def _one_is_semisimple(a, tol):
    m = a - np.eye(a.shape[0])
    return numerical_rank(m, tol) == numerical_rank(m @ m, tol)


def is_discrete_time_semistable(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Spectral test for discrete-time semistability.

    An eigenvalue within ``eig_match_tol`` of 1 is treated as 1 and must be
    semisimple.  Every other eigenvalue must satisfy
    ``|lambda| <= 1 - eig_match_tol``, so eigenvalues such as -1 that sit on
    the unit circle are rejected.

    Examples
    --------
    >>> is_discrete_time_semistable(np.diag([1.0, 0.5]))
    True
    >>> is_discrete_time_semistable(np.diag([1.0, -1.0]))
    False
    """
    a = _square(a)
    lam = np.linalg.eigvals(a)
    at_one = np.abs(lam - 1.0) < tol.eig_match_tol
    inside = np.abs(lam) <= 1.0 - tol.eig_match_tol
    if not np.all(at_one | inside):
        return False
    if np.any(at_one):
        return _one_is_semisimple(a, tol)
    return True


def is_nontrivially_semistable(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Semistable and not the identity."""
    a = _square(a)
    if np.max(np.abs(a - np.eye(a.shape[0])), initial=0.0) <= tol.residual_tol:
        return False
    return is_discrete_time_semistable(a, tol)


def semistable_limit_oracle(a, max_doublings: int = 64, tol: float = 1e-10):
    """Limit of ``a**k`` by repeated squaring, or ``None`` when it does not exist.

    Squaring alone would accept ``diag(1, -1)``, whose even powers are
    constant.  A candidate ``M = a**(2**m)`` is therefore accepted only when
    both ``M @ M`` and ``a @ M`` agree with ``M``.

    Parameters
    ----------
    a : array_like
        Square matrix.
    max_doublings : int
        Number of squarings before giving up.
    tol : float
        Agreement threshold, relative to ``max(1, ||M||)``.

    Returns
    -------
    ndarray or None
    """
    a = _square(a)
    m = a.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_doublings + 1):
            m2 = m @ m
            if not np.all(np.isfinite(m2)):
                return None
            scale = max(1.0, np.linalg.norm(m))
            if (
                np.linalg.norm(m2 - m) < tol * scale
                and np.linalg.norm(a @ m - m) < tol * scale
            ):
                return m2
            m = m2
    return None


def paracontraction_kernel_condition(w, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Compare the kernels of ``(W-I)'(W-I) + W' - I + W - I`` and ``(W-I)'(W-I) + (W-I)^2``."""
    w = _square(w, "w")
    d = w - np.eye(w.shape[0])
    lhs = null_space(d.T @ d + w.T - np.eye(len(w)) + d, tol)
    rhs = null_space(d.T @ d + d @ d, tol)
    return subspace_equal(lhs, rhs, tol)


def _certify(w, tol):
    w = _square(w, "w")
    return {
        "norm_le_one": spectral_norm(w) <= 1.0 + tol.residual_tol,
        "semistable": is_discrete_time_semistable(w, tol),
        "nontrivial": bool(
            np.max(np.abs(w - np.eye(len(w))), initial=0.0) > tol.residual_tol
        ),
        "kernel_condition": paracontraction_kernel_condition(w, tol),
    }


def is_paracontracting_lemma1(w, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Algebraic paracontraction test.

    ``W`` passes when it is semistable and not the identity, has spectral
    norm at most 1, and the two kernels compared in
    :func:`paracontraction_kernel_condition` coincide.  The identity fails
    this test even though it is vacuously paracontracting.
    """
    cert = _certify(w, tol)
    return all(cert.values())


def _sample_unit(rng, basis, count):
    if basis.shape[1] == 0 or count <= 0:
        return np.zeros((basis.shape[0], 0))
    x = basis @ rng.standard_normal((basis.shape[1], count))
    return x / np.linalg.norm(x, axis=0)


def paracontraction_definition_check(
    w, sample_count: int, rng: np.random.Generator, tol: float = 1e-9
) -> bool:
    """Search for a vector that breaks the paracontraction inequality.

    Random unit vectors alone almost never hit the measure-zero sets where a
    violation lives, so the sample also includes vectors from
    ``ker(W - I)``, from its orthogonal complement, from the right singular
    subspace where ``||W x|| >= ||x||`` (minus its fixed part) and the top
    right singular vector.

    A vector with ``||W x - x|| > tol`` must satisfy
    ``||W x|| < ||x|| - tol``; the margin keeps round-off on norm-preserving
    directions from masquerading as strict decrease.

    Returns
    -------
    bool
        False as soon as a counterexample is found.
    """
    w = _square(w, "w")
    n = w.shape[0]
    sample_count = max(int(sample_count), 1)
    _, s, vh = np.linalg.svd(w)
    fixed = null_space(w - np.eye(n))
    free = fixed.complement()
    top = column_space(vh[s >= 1.0 - 1e-8].T)
    # directions that keep their length but are not fixed
    top_free = column_space(top.basis - fixed.projector() @ top.basis)
    share = max(sample_count // 6, 1)
    candidates = [
        vh[:1].T,
        _sample_unit(rng, fixed.basis, share),
        _sample_unit(rng, free.basis, share),
        _sample_unit(rng, top.basis, share),
        _sample_unit(rng, top_free.basis, share),
    ]
    used = sum(c.shape[1] for c in candidates)
    candidates.append(_sample_unit(rng, np.eye(n), max(sample_count - used, 0)))
    x = np.hstack(candidates)
    wx = w @ x
    moved = np.linalg.norm(wx - x, axis=0)
    nx = np.linalg.norm(x, axis=0)
    nwx = np.linalg.norm(wx, axis=0)
    strict_ok = nwx < nx - tol
    fixed_ok = nwx >= nx - tol
    return bool(np.all(np.where(moved > tol, strict_ok, fixed_ok)))


def is_semisimple_zero(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether 0 is a semisimple eigenvalue, tested as ``rank(A) == rank(A^2)``.

    Raises
    ------
    ZeroNotEigenvalueError
        If ``a`` has full numerical rank.
    """
    a = _square(a)
    r1 = numerical_rank(a, tol)
    if r1 == a.shape[0]:
        raise ZeroNotEigenvalueError("0 is not an eigenvalue of a full-rank matrix")
    return r1 == numerical_rank(a @ a, tol)


@dataclass(frozen=True)
class ParaMatrix:
    """A candidate paracontracting matrix with its certification record."""

    p: np.ndarray
    certification: dict = field(default_factory=dict)

    @classmethod
    def certify(cls, p, tol: ToleranceConfig = DEFAULT_TOL) -> "ParaMatrix":
        p = _square(p, "p")
        return cls(p, _certify(p, tol))

    @property
    def is_paracontracting(self) -> bool:
        return bool(self.certification) and all(self.certification.values())

    @property
    def n(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class MatrixPool:
    """Finite family of equally sized square matrices."""

    members: tuple
    labels: tuple = ()

    def __post_init__(self):
        members = tuple(_square(m, "pool member") for m in self.members)
        if not members:
            raise ValueError("pool must be nonempty")
        if len({m.shape for m in members}) != 1:
            raise ValueError("pool members must share one dimension")
        labels = tuple(self.labels) or tuple(f"P{k}" for k in range(len(members)))
        if len(labels) != len(members):
            raise ValueError("one label per member required")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]

    def to_json(self) -> str:
        return json.dumps([m.tolist() for m in self.members])

    @classmethod
    def from_json(cls, text) -> "MatrixPool":
        data = json.loads(text) if isinstance(text, str) else text
        return cls(tuple(np.asarray(m, dtype=float) for m in data))


def approx_semiobservable(
    family: MatrixPool, c, a_ref, tol: ToleranceConfig = DEFAULT_TOL
) -> bool:
    """Compare ``intersection_k ker(C (I - A_k))`` with ``ker(I - a_ref)``."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    a_ref = _square(a_ref, "a_ref")
    n = family.dim
    if c.shape[1] != n or a_ref.shape[0] != n:
        raise ValueError("dimension mismatch between family, c and a_ref")
    stacked = np.vstack([c @ (np.eye(n) - m) for m in family.members])
    return subspace_equal(null_space(stacked, tol), null_space(np.eye(n) - a_ref, tol), tol)


@dataclass
class ProductIterationResult:
    """Outcome of iterating ``x <- Q_i x`` over a selector sequence.

    Attributes
    ----------
    converged : bool
    steps : int
        Number of matrix applications performed.
    limit : ndarray or None
        Final iterate when converged.
    final : ndarray
        Last iterate regardless of convergence.
    visits : ndarray of int
        How often each pool member was applied.
    trajectory : ndarray or None
        Every iterate (including ``x0``) when requested.
    """

    converged: bool
    steps: int
    limit: Optional[np.ndarray]
    final: np.ndarray
    visits: np.ndarray
    trajectory: Optional[np.ndarray] = None

    @property
    def visited(self) -> tuple:
        return tuple(int(k) for k in np.flatnonzero(self.visits))


def _warn_pool_hypotheses(pool, tol):
    for label, m in zip(pool.labels, pool.members):
        cert = _certify(m, tol)
        bad = [k for k in ("semistable", "norm_le_one", "kernel_condition") if not cert[k]]
        if bad:
            warnings.warn(
                f"pool member {label} fails {', '.join(bad)}", PoolHypothesisWarning, stacklevel=3
            )


def round_robin(m: int) -> Callable[[int], int]:
    """Selector cycling through ``0, 1, ..., m-1``."""
    return lambda i: i % m


def random_selector(m: int, rng: np.random.Generator) -> Callable[[int], int]:
    """Selector drawing members uniformly at random."""
    return lambda i: int(rng.integers(m))


def product_iteration(
    pool: MatrixPool,
    selector: Union[Callable[[int], int], Iterable[int]],
    x0,
    max_steps: int = 100_000,
    tol: float = 1e-9,
    window: int = 50,
    keep_trajectory: bool = False,
    check_hypotheses: bool = True,
    tol_config: ToleranceConfig = DEFAULT_TOL,
) -> ProductIterationResult:
    """Iterate ``x_{i+1} = Q_i x_i`` with ``Q_i`` picked from a pool.

    Convergence is declared once ``||x_{i+1} - x_i|| < tol`` holds on
    ``window`` consecutive steps.

    Parameters
    ----------
    pool : MatrixPool
    selector : callable or iterable of int
        Either ``selector(i) -> index`` or a finite/infinite index stream.
    x0 : array_like
    max_steps : int
    tol : float
    window : int
    keep_trajectory : bool
        Store every iterate.
    check_hypotheses : bool
        Warn about members that are not semistable, have norm above 1 or
        fail the kernel condition.

    Returns
    -------
    ProductIterationResult
    """
    if check_hypotheses:
        _warn_pool_hypotheses(pool, tol_config)
    if callable(selector):
        pick = selector
    else:
        stream = iter(selector)
        pick = lambda i: next(stream)  # noqa: E731
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.size != pool.dim:
        raise ValueError("x0 has the wrong dimension")
    visits = np.zeros(len(pool), dtype=int)
    traj = [x.copy()] if keep_trajectory else None
    quiet = 0
    step = 0
    while step < max_steps:
        try:
            k = int(pick(step))
        except StopIteration:
            break
        x_new = pool.members[k] @ x
        visits[k] += 1
        step += 1
        quiet = quiet + 1 if np.linalg.norm(x_new - x) < tol else 0
        x = x_new
        if traj is not None:
            traj.append(x.copy())
        if quiet >= window:
            return ProductIterationResult(
                True, step, x.copy(), x.copy(), visits,
                np.array(traj) if traj is not None else None,
            )
    return ProductIterationResult(
        False, step, None, x.copy(), visits, np.array(traj) if traj is not None else None
    )


def limit_membership_check(
    limit, pool: MatrixPool, infinitely_often: Sequence[int], tol: float = 1e-6
) -> bool:
    """Whether ``limit`` is fixed by every pool member in ``infinitely_often``."""
    limit = np.asarray(limit, dtype=float).reshape(-1)
    bound = tol * (1.0 + np.linalg.norm(limit))
    return all(
        np.linalg.norm(limit - pool.members[k] @ limit) <= bound for k in infinitely_often
    )


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    qm, r = np.linalg.qr(rng.standard_normal((n, n)))
    return qm * np.sign(np.diag(r))


def random_paracontracting(
    n: int,
    rng: np.random.Generator,
    spectrum_min: float = -0.95,
    spectrum_max: float = 0.95,
    ones: int = 0,
    full_rank: bool = False,
    rank: Optional[int] = None,
    min_magnitude: float = 0.05,
) -> np.ndarray:
    """Symmetric paracontracting matrix ``V diag(d) V'``.

    ``ones`` eigenvalues equal 1 and the rest are uniform on
    ``[spectrum_min, spectrum_max]``.  With ``full_rank`` the non-unit
    eigenvalues are kept at least ``min_magnitude`` away from 0.  With
    ``rank`` the last ``n - rank`` eigenvalues are set to exactly 0.

    Parameters
    ----------
    n : int
    rng : numpy.random.Generator
    spectrum_min, spectrum_max : float
        Must satisfy ``-1 < spectrum_min <= spectrum_max < 1``.
    ones : int
    full_rank : bool
    rank : int, optional
    min_magnitude : float

    Returns
    -------
    ndarray of shape (n, n)
    """
    if not -1.0 < spectrum_min <= spectrum_max < 1.0:
        raise ValueError("need -1 < spectrum_min <= spectrum_max < 1")
    if not 0 <= ones <= n:
        raise ValueError("ones must lie in [0, n]")
    if rank is not None and not ones <= rank <= n:
        raise ValueError("rank must lie in [ones, n]")
    if full_rank and spectrum_max < min_magnitude and -spectrum_min < min_magnitude:
        raise ValueError("spectrum interval leaves no admissible nonzero eigenvalue")
    d = np.ones(n)
    for i in range(ones, n):
        while True:
            val = rng.uniform(spectrum_min, spectrum_max)
            if not full_rank or abs(val) >= min_magnitude:
                break
        d[i] = val
    if rank is not None:
        d[rank:] = 0.0
    v = random_orthogonal(n, rng)
    p = (v * d) @ v.T
    return 0.5 * (p + p.T)

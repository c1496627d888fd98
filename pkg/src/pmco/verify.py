"""Randomised verification sweeps over the closed-form claims.

A sweep draws instances from a seeded space and runs a battery of checks
on each, producing one record per ``(check, instance)``::

    {"lemma": <check name>, "instance_seed": int, "n": int, "q": int,
     "case": str, "pass": bool, "detail": {...}}

Every instance is rebuilt from its ``instance_seed`` and the sweep space
alone, so a failing record can be replayed in isolation.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eigenspaces import EIGENSPACE_CASES, verify_eigenspace_case
from .graphs import Digraph, GdsSchedule, gds_topology, laplacian, random_digraph
from .linalg import (
    Subspace,
    column_space,
    kron_kernel_decomposition_check,
    null_space,
    numerical_rank,
    principal_angles,
    subspace_equal,
    subspace_intersection,
    subspace_sum,
)
from .semistability import (
    MatrixPool,
    is_paracontracting_lemma1,
    limit_membership_check,
    paracontraction_definition_check,
    product_iteration,
    random_orthogonal,
    random_paracontracting,
    random_selector,
    round_robin,
)
from .switched import (
    McoCoefficients,
    SwitchedSystemMatrices,
    build_E,
    build_W,
    kernel_shift_invariance_check,
    kernel_spanning_vectors_A,
    predicted_kernel_A,
    predicted_rank_A,
    rank_case,
    verify_spectrum_containment_A,
    verify_spectrum_containment_B,
    zero_semisimple_dichotomy_check,
)

__all__ = [
    "CHECKS",
    "RANK_CASES",
    "SweepConfig",
    "Instance",
    "instance_seed",
    "generate_instance",
    "gated_instance",
    "lemma1_matrix",
    "LEMMA1_KINDS",
    "certified_pool",
    "run_check",
    "run_sweep",
    "summarize",
    "records_to_jsonl",
]

CHECKS = (
    "ew_identities",
    "kron_kernel",
    "three_subspace",
    "paracontraction_equivalence",
    "product_convergence",
    "rank_A",
    "kernel_A",
    "kernel_shift",
    "zero_semisimple",
    "spectrum_A",
    "spectrum_B",
    "eigenspace_A",
)
RANK_CASES = ("i", "ii", "iii", "iv")
SHIFT_STEPS = (0.0, 0.3, 1.0, 2.5)
KERNEL_RESIDUAL_TOL = 1e-10
SPECTRUM_TOL = 1e-6
EIGENSPACE_TOL = 1e-7


class SweepConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    """Sweep space and battery.

    Parameters
    ----------
    instances : int
        Number of random instances (0 gives an empty, passing sweep).
    seed : int
    n_values, q_values : tuple of int
        Dimensions drawn uniformly per instance.
    cases : tuple of str
        Zero patterns of ``(mu, kappa)`` to draw from.
    checks : tuple of str
        Subset of :data:`CHECKS`.
    h_values : tuple of float
        Step sizes for the kernel shift check.
    eigenspace_cases : tuple of str
        Eigenvector families exercised by ``eigenspace_A``.
    """

    instances: int = 500
    seed: int = 0
    n_values: tuple = (1, 2, 3)
    q_values: tuple = (2, 3, 4)
    cases: tuple = RANK_CASES
    checks: tuple = CHECKS
    h_values: tuple = SHIFT_STEPS
    eigenspace_cases: tuple = EIGENSPACE_CASES

    def __post_init__(self):
        def need(cond, msg):
            if not cond:
                raise SweepConfigError(msg)

        need(isinstance(self.instances, int) and self.instances >= 0, "instances must be a nonnegative integer")
        need(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed must be a 64-bit nonnegative integer")
        need(self.n_values and all(isinstance(v, int) and v >= 1 for v in self.n_values), "n must list positive integers")
        need(self.q_values and all(isinstance(v, int) and v >= 2 for v in self.q_values), "q must list integers >= 2")
        need(self.cases and set(self.cases) <= set(RANK_CASES), f"cases must be drawn from {RANK_CASES}")
        need(set(self.checks) <= set(CHECKS), f"checks must be drawn from {CHECKS}")
        need(all(isinstance(h, (int, float)) and h >= 0 for h in self.h_values), "h_values must be nonnegative")
        need(self.eigenspace_cases and set(self.eigenspace_cases) <= set(EIGENSPACE_CASES),
             f"eigenspace_cases must be drawn from {EIGENSPACE_CASES}")

    _KEYS = {
        "instances": "instances", "seed": "seed", "n": "n_values", "q": "q_values",
        "cases": "cases", "checks": "checks", "h_values": "h_values",
        "eigenspace_cases": "eigenspace_cases",
    }

    @classmethod
    def from_json(cls, obj) -> "SweepConfig":
        if not isinstance(obj, dict):
            raise SweepConfigError("sweep config must be a JSON object")
        unknown = sorted(set(obj) - set(cls._KEYS))
        if unknown:
            raise SweepConfigError(f"unknown field(s) in sweep config: {unknown}")
        kw = {}
        for key, attr in cls._KEYS.items():
            if key not in obj:
                continue
            val = obj[key]
            if attr in ("instances", "seed"):
                if isinstance(val, bool) or not isinstance(val, int):
                    raise SweepConfigError(f"{key} must be an integer")
                kw[attr] = val
            else:
                if isinstance(val, (int, str)) and not isinstance(val, bool):
                    val = [val]
                if not isinstance(val, list):
                    raise SweepConfigError(f"{key} must be a list")
                kw[attr] = tuple(val)
        return cls(**kw)

    def to_json(self) -> dict:
        return {key: (list(getattr(self, attr)) if isinstance(getattr(self, attr), tuple) else getattr(self, attr))
                for key, attr in self._KEYS.items()}


@dataclass(frozen=True)
class Instance:
    """One random switched-system instance.

    ``graph_kind`` is ``"gds"`` or ``"random"``; ``p`` is symmetric
    paracontracting of rank ``rank_p``.
    """

    seed: int
    n: int
    q: int
    case: str
    coeffs: McoCoefficients
    graph: Digraph
    l: np.ndarray
    p: np.ndarray
    rank_p: int
    graph_kind: str

    def matrices(self, j: int) -> SwitchedSystemMatrices:
        return SwitchedSystemMatrices.build(j, self.coeffs, self.l, self.p)

    def to_json(self) -> dict:
        return {
            "seed": self.seed, "n": self.n, "q": self.q, "case": self.case,
            "coeffs": self.coeffs.as_dict(), "graph": json.loads(self.graph.to_json()),
            "graph_kind": self.graph_kind, "p_matrix": self.p.tolist(), "rank_p": self.rank_p,
        }


def instance_seed(sweep_seed: int, index: int) -> int:
    """Per-instance seed derived from the sweep seed and the instance index."""
    return int(np.random.SeedSequence([sweep_seed, index]).generate_state(1, dtype=np.uint64)[0])


def _gain(rng):
    return float(rng.uniform(0.1, 1.5))


def generate_instance(seed: int, config: SweepConfig = SweepConfig()) -> Instance:
    """Draw dimensions, a rank case, a Laplacian and ``P`` from ``seed``.

    Half of the instances use a grouped topology and half an Erdos-Renyi
    digraph (possibly disconnected); half have full-rank ``P``.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.choice(config.n_values))
    q = int(rng.choice(config.q_values))
    case = str(rng.choice(config.cases))
    mu = 0.0 if case in ("i", "ii") else _gain(rng)
    kappa = 0.0 if case in ("i", "iv") else _gain(rng)
    eta = 0.0 if rng.random() < 0.25 else _gain(rng)
    h = float(rng.uniform(0.1, 2.0))
    coeffs = McoCoefficients(mu, eta, kappa, h)
    if rng.random() < 0.5:
        size = int(rng.integers(1, q))
        members = tuple(int(i) + 1 for i in rng.choice(q, size=size, replace=False))
        graph = gds_topology(GdsSchedule(q, members), rng)
        kind = "gds"
    else:
        graph = random_digraph(q, float(rng.uniform(0.1, 0.9)), rng)
        kind = "random"
    if rng.random() < 0.5:
        p = random_paracontracting(n, rng, ones=int(rng.integers(0, n)), full_rank=True)
    else:
        r = int(rng.integers(0, n))
        p = random_paracontracting(n, rng, ones=int(rng.integers(0, min(r, 1) + 1)), rank=r)
    rank_p = numerical_rank(p)
    return Instance(seed, n, q, case, coeffs, graph, laplacian(graph).astype(float), p, rank_p, kind)


def _undirected(q, rng):
    """Random connected undirected graph (symmetric adjacency)."""
    while True:
        a = (rng.random((q, q)) < 0.6).astype(int)
        a = np.triu(a, 1)
        a = a + a.T
        g = Digraph(a)
        if numerical_rank(laplacian(g)) == q - 1:
            return g


def gated_instance(case: str, n: int, q: int, rng: np.random.Generator) -> Instance:
    """Instance whose coefficients make the gate of eigenvector family ``case`` fire.

    A symmetric Laplacian is used so that its spectrum is real; ``nu`` is a
    random nonzero eigenvalue of it, and the coefficients are solved so that
    the gate's scaled Laplacian has eigenvalue 1 where required.  ``P`` is
    the identity because the eigenvector formulas do not involve it.
    """
    graph = _undirected(q, rng)
    l = laplacian(graph).astype(float)
    ev = np.linalg.eigvalsh(l)
    nu = float(rng.choice(ev[ev > 1e-9]))
    k = float(rng.uniform(0.3, 1.5))
    mu = eta = 0.0
    if case == "ii":
        mu, eta, h = _gain(rng), _gain(rng), float(rng.uniform(0.1, 2.0))
    elif case == "iii":
        eta, h = k / nu, float(rng.uniform(0.1, 2.0))
        if abs(h * k - 1) < 1e-3:
            h += 0.1
    elif case in ("iv", "v"):
        mu, eta, h = _gain(rng), _gain(rng), float(rng.uniform(0.1, 2.0))
    elif case == "vi":
        h = float(rng.uniform(0.1, 2.0))
    elif case == "vii":
        h, eta = 1.0 / k, k / nu
    elif case == "viii":
        h = 1.0 + 1.0 / k
    elif case == "ix":
        h = 1.0 + 1.0 / k
        share = float(rng.uniform(0, 1))
        mu, eta = share * k / nu, (1 - share) * k / nu
    elif case == "x":
        h = float(rng.uniform(0.1, 0.9)) / k
        mu = _gain(rng)
        den = k * (1 + k - k * h)
        eta = (den / nu - mu * (k * h - 1)) / k
    else:
        raise ValueError(f"unknown case {case!r}")
    coeffs = McoCoefficients(mu, eta, k, h)
    # the eigenvector formulas carry no P, so they are exercised at P = I
    return Instance(-1, n, q, case, coeffs, graph, l, np.eye(n), n, "undirected")


# ----------------------------------------------------------------------------
# paracontraction test matrices

LEMMA1_KINDS = ("certified", "contraction", "expanding", "jordan", "nonnormal", "rotation", "reflection", "isometry_shift")


def lemma1_matrix(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """A test matrix ``W != I`` of the given family.

    ``certified`` and ``contraction`` are paracontracting; ``expanding``
    has norm above one, ``jordan`` a defective unit eigenvalue,
    ``nonnormal`` spectral radius below one but norm above one,
    ``rotation`` and ``reflection`` are non-identity isometries, and
    ``isometry_shift`` keeps norm one with a nilpotent shift that moves
    vectors without shrinking them.
    """
    v = random_orthogonal(n, rng)
    if kind == "certified":
        return random_paracontracting(n, rng, ones=int(rng.integers(0, n)))
    if kind == "contraction":
        a = rng.standard_normal((n, n))
        return float(rng.uniform(0.2, 0.95)) * a / np.linalg.norm(a, 2)
    if kind == "expanding":
        d = rng.uniform(-0.9, 0.9, n)
        d[0] = float(rng.uniform(1.05, 1.5))
        return (v * d) @ v.T
    if n < 2 and kind in ("jordan", "nonnormal", "rotation", "isometry_shift"):
        return np.array([[float(rng.uniform(1.05, 1.5))]])
    if kind == "jordan":
        core = np.eye(n)
        core[0, 1] = float(rng.uniform(0.2, 1.0))
        return v @ core @ v.T
    if kind == "nonnormal":
        core = np.diag(rng.uniform(-0.5, 0.5, n))
        core[0, 1] = float(rng.uniform(1.5, 3.0))
        return v @ core @ v.T
    if kind == "rotation":
        theta = float(rng.uniform(0.3, np.pi - 0.3))
        core = np.eye(n)
        core[:2, :2] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        return v @ core @ v.T
    if kind == "reflection":
        d = np.ones(n)
        d[0] = -1.0
        return (v * d) @ v.T
    if kind == "isometry_shift":
        core = np.zeros((n, n))
        core[0, 1] = 1.0
        if n > 2:
            core[2:, 2:] = np.eye(n - 2)
        return v @ core @ v.T
    raise ValueError(f"unknown kind {kind!r}")


def certified_pool(m: int, dim: int, rng: np.random.Generator) -> MatrixPool:
    """``m`` symmetric paracontracting members of size ``dim`` sharing a fixed subspace.

    The members share a random common fixed subspace of dimension 0 to
    ``dim - 1`` and are otherwise independent.
    """
    shared = int(rng.integers(0, dim))
    v = random_orthogonal(dim, rng)
    members = []
    for _ in range(m):
        inner = random_paracontracting(dim - shared, rng, ones=0) if dim > shared else np.zeros((0, 0))
        block = np.eye(dim)
        block[shared:, shared:] = inner
        members.append(v @ block @ v.T)
    return MatrixPool(tuple(members), tuple(f"P{k + 1}" for k in range(m)))


# ----------------------------------------------------------------------------
# checks


def _check_ew(inst, rng):
    n, q, p = inst.n, inst.q, inst.p
    eye_n, eye_q = np.eye(n), np.eye(q)
    ones = np.ones(q)
    ker_p = null_space(p).basis
    worst = 0.0
    ranks_ok = True
    kernels_ok = True
    for j in range(1, q + 1):
        e = build_E(j, n, q)
        w = build_W(j, p, q)
        big = np.kron(eye_q, p)
        vec = rng.standard_normal(q)
        a = rng.standard_normal((n, n))
        for i in range(n):
            worst = max(worst, np.linalg.norm(e @ np.kron(ones, eye_n[i]) - eye_n[i]))
            lhs = w @ np.kron(vec, eye_n[i])
            rhs = vec[j - 1] * (big @ np.kron(ones, eye_n[i]))
            worst = max(worst, np.linalg.norm(lhs - rhs))
            worst = max(worst, np.linalg.norm(e @ np.kron(vec, eye_n[i]) - vec[j - 1] * eye_n[i]))
        worst = max(worst, np.linalg.norm(e @ np.kron(ones[:, None], a) - a))
        for s in range(q):
            for r in range(ker_p.shape[1]):
                gs = np.kron(eye_q[s], ker_p[:, r])
                worst = max(worst, np.linalg.norm(w @ gs))
                target = ker_p[:, r] if s == j - 1 else np.zeros(n)
                worst = max(worst, np.linalg.norm(e @ gs - target))
        ranks_ok &= numerical_rank(w) == inst.rank_p
        ranks_ok &= numerical_rank(big - w) == (q - 1) * inst.rank_p
        pieces = [np.kron(ones, eye_n[i]) for i in range(n)]
        shift = ones - eye_q[j - 1]
        for r in range(ker_p.shape[1]):
            for s in range(q):
                if shift[s]:
                    pieces.append(np.kron(eye_q[s], ker_p[:, r]))
        predicted = column_space(np.column_stack(pieces))
        kernels_ok &= subspace_equal(null_space(w - big), predicted)
    passed = bool(worst <= 1e-12 and ranks_ok and kernels_ok)
    return passed, {"max_residual": float(worst), "ranks": bool(ranks_ok), "kernel": bool(kernels_ok)}


def _deficient(rows, cols, rng):
    rank = int(rng.integers(0, min(rows, cols) + 1))
    return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))


def _check_kron(inst, rng):
    a = _deficient(int(rng.integers(1, 4)), int(rng.integers(1, 4)), rng)
    b = _deficient(int(rng.integers(1, 4)), int(rng.integers(1, 4)), rng)
    ok = kron_kernel_decomposition_check(a, b)
    return bool(ok), {"a_shape": list(a.shape), "b_shape": list(b.shape),
                      "rank_a": numerical_rank(a), "rank_b": numerical_rank(b)}


def _random_subspace(dim, k, rng):
    if k == 0:
        return Subspace.trivial(dim)
    return column_space(rng.standard_normal((dim, k)))


def _check_three_subspace(inst, rng):
    dim = inst.n + inst.q + 1
    # nest two of the three so that their union is a subspace
    s_small = _random_subspace(dim, int(rng.integers(0, dim)), rng)
    extra = _random_subspace(dim, int(rng.integers(0, dim - s_small.dim + 1)), rng)
    s_big = subspace_sum(s_small, extra)
    # share some directions with the third subspace to make intersections nontrivial
    shared = s_big.basis[:, : int(rng.integers(0, s_big.dim + 1))]
    s3 = column_space(np.hstack([shared, rng.standard_normal((dim, int(rng.integers(0, 3))))]))
    subs = [s_small, s_big, s3]
    order = rng.permutation(3)
    s1, s2, s3 = (subs[i] for i in order)
    lhs = subspace_sum(subspace_sum(s1, s2), s3).dim
    i12, i23, i31 = subspace_intersection(s1, s2), subspace_intersection(s2, s3), subspace_intersection(s3, s1)
    i123 = subspace_intersection(i12, s3)
    rhs = s1.dim + s2.dim + s3.dim - i12.dim - i23.dim - i31.dim + i123.dim
    return lhs == rhs, {"dims": [s1.dim, s2.dim, s3.dim], "lhs": lhs, "rhs": rhs}


def _check_lemma1(inst, rng):
    dim = int(rng.integers(1, 5))
    kind = str(rng.choice(LEMMA1_KINDS))
    w = lemma1_matrix(kind, dim, rng)
    alg = is_paracontracting_lemma1(w)
    samp = paracontraction_definition_check(w, 10 * dim * dim, rng)
    return alg == samp, {"kind": kind, "dim": dim, "lemma": bool(alg), "definition": bool(samp)}


def _check_products(inst, rng):
    dim = int(rng.integers(1, 7))
    pool = certified_pool(int(rng.integers(1, 6)), dim, rng)
    x0 = rng.standard_normal(dim)
    x0 /= np.linalg.norm(x0)
    outcome = {}
    ok = True
    for name, sel in (("round_robin", round_robin(len(pool))), ("random", random_selector(len(pool), rng))):
        res = product_iteration(pool, sel, x0, max_steps=100_000, tol=1e-9, check_hypotheses=False)
        member = bool(res.converged and limit_membership_check(res.limit, pool, res.visited))
        outcome[name] = {"converged": bool(res.converged), "steps": int(res.steps), "limit_ok": member}
        ok &= member
    return bool(ok), {"pool_size": len(pool), "dim": dim, **outcome}


def _check_rank(inst, rng):
    rank_l = numerical_rank(inst.l)
    pred = predicted_rank_A(inst.coeffs, rank_l, inst.rank_p, inst.n, inst.q)
    got = [numerical_rank(inst.matrices(j).a_j) for j in range(1, inst.q + 1)]
    return all(g == pred for g in got), {"predicted": pred, "computed": got, "rank_l": rank_l, "rank_p": inst.rank_p}


def _check_kernel(inst, rng):
    case = rank_case(inst.coeffs)
    worst, equal, dims = 0.0, True, []
    for j in range(1, inst.q + 1):
        a = inst.matrices(j).a_j
        vecs = kernel_spanning_vectors_A(case, inst.coeffs, inst.l, inst.p, j)
        norms = np.linalg.norm(vecs, axis=0)
        # projector columns can vanish up to round-off; such vectors span nothing
        keep = norms > 1e-10 * max(1.0, float(np.max(norms, initial=0.0)))
        if np.any(keep):
            res = np.linalg.norm(a @ vecs[:, keep], axis=0) / norms[keep]
            worst = max(worst, float(np.max(res)))
        true = null_space(a)
        pred = predicted_kernel_A(case, inst.coeffs, inst.l, inst.p, j)
        dims.append([pred.dim, true.dim])
        if case == "iii":
            equal &= pred.dim == true.dim
        else:
            equal &= subspace_equal(pred, true)
    ok = bool(equal and worst <= KERNEL_RESIDUAL_TOL)
    return ok, {"max_residual": worst, "dims_pred_true": dims, "subspace_match": bool(equal)}


def _max_angle(a, b):
    s1, s2 = null_space(a), null_space(b)
    if s1.dim != s2.dim:
        return float(np.pi / 2)
    return float(np.max(principal_angles(s1, s2), initial=0.0))


def _check_shift(inst, rng, h_values=SHIFT_STEPS):
    fails, worst = [], 0.0
    for j in range(1, inst.q + 1):
        m = inst.matrices(j)
        for h in h_values:
            if not kernel_shift_invariance_check(m.a_j, m.a_c, h):
                fails.append([j, h])
            shifted = m.a_j + h * m.a_c
            worst = max(worst, _max_angle(m.a_j, shifted), _max_angle(m.a_j @ shifted, shifted @ shifted))
    return not fails, {"failures": fails, "h_values": list(h_values), "max_angle": worst}


def _check_semisimple(inst, rng):
    outcome = []
    for j in range(1, inst.q + 1):
        m = inst.matrices(j)
        outcome.append(bool(zero_semisimple_dichotomy_check(m.a_j, m.a_c, inst.coeffs.h, inst.coeffs, inst.rank_p, inst.n)))
    return all(outcome), {"per_j": outcome, "kappa_zero": inst.coeffs.kappa == 0, "rank_p": inst.rank_p}


def _spectrum(inst, which):
    if inst.rank_p != inst.n or inst.coeffs.h <= 0:
        return None
    worst, ok = 0.0, True
    for j in range(1, inst.q + 1):
        fn = verify_spectrum_containment_A if which == "A" else verify_spectrum_containment_B
        rep = fn(inst.matrices(j), SPECTRUM_TOL)
        ok &= bool(rep)
        worst = max(worst, rep.max_miss)
    return ok, {"max_miss": worst, "tol": SPECTRUM_TOL}


def _check_eigenspace(inst, rng, cases=EIGENSPACE_CASES):
    case = str(rng.choice(cases))
    gi = gated_instance(case, inst.n, inst.q, rng)
    j = int(rng.integers(1, inst.q + 1))
    rep = verify_eigenspace_case(gi.matrices(j), case, EIGENSPACE_TOL)
    detail = rep.to_json()
    detail.update({"coeffs": gi.coeffs.as_dict(), "j": j})
    return rep.passed, detail, case


def run_check(name: str, inst: Instance, config: SweepConfig = SweepConfig()) -> Optional[dict]:
    """Run one check on one instance; None when the check does not apply.

    Each check uses its own generator derived from the instance seed, so
    the outcome does not depend on which other checks ran.
    """
    rng = np.random.default_rng([inst.seed, CHECKS.index(name)])
    case = inst.case
    if name == "ew_identities":
        out = _check_ew(inst, rng)
    elif name == "kron_kernel":
        out = _check_kron(inst, rng)
    elif name == "three_subspace":
        out = _check_three_subspace(inst, rng)
    elif name == "paracontraction_equivalence":
        out = _check_lemma1(inst, rng)
    elif name == "product_convergence":
        out = _check_products(inst, rng)
    elif name == "rank_A":
        out = _check_rank(inst, rng)
    elif name == "kernel_A":
        out = _check_kernel(inst, rng)
    elif name == "kernel_shift":
        out = _check_shift(inst, rng, config.h_values)
    elif name == "zero_semisimple":
        out = _check_semisimple(inst, rng)
    elif name == "spectrum_A":
        out = _spectrum(inst, "A")
    elif name == "spectrum_B":
        out = _spectrum(inst, "B")
    elif name == "eigenspace_A":
        passed, detail, case = _check_eigenspace(inst, rng, config.eigenspace_cases)
        out = (passed, detail)
    else:
        raise ValueError(f"unknown check {name!r}")
    if out is None:
        return None
    passed, detail = out
    return {
        "lemma": name,
        "instance_seed": int(inst.seed),
        "n": int(inst.n),
        "q": int(inst.q),
        "case": case,
        "pass": bool(passed),
        "detail": _jsonable(detail),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _instance_records(config: SweepConfig, index: int) -> list:
    inst = generate_instance(instance_seed(config.seed, index), config)
    out = []
    for name in CHECKS:
        if name in config.checks:
            rec = run_check(name, inst, config)
            if rec is not None:
                out.append(rec)
    return out


def run_sweep(config: SweepConfig, workers: int = 1) -> list:
    """All records of a sweep, ordered by instance index then check.

    Instances are independent, so ``workers > 1`` runs them on a thread
    pool and still returns the same list.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    idx = range(config.instances)
    if workers == 1:
        chunks = [_instance_records(config, i) for i in idx]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(lambda i: _instance_records(config, i), idx))
    return [rec for chunk in chunks for rec in chunk]


def summarize(records: list) -> dict:
    """Per-check pass/fail counts and the seeds of failing instances."""
    by = {}
    for rec in records:
        entry = by.setdefault(rec["lemma"], {"pass": 0, "fail": 0, "failing_seeds": []})
        if rec["pass"]:
            entry["pass"] += 1
        else:
            entry["fail"] += 1
            entry["failing_seeds"].append(rec["instance_seed"])
    failed = sum(e["fail"] for e in by.values())
    return {"total": len(records), "failed": failed, "all_pass": failed == 0,
            "by_check": {k: by[k] for k in sorted(by)}}


def records_to_jsonl(records: list) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)

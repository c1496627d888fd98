"""Benchmark objective functions and a string-keyed registry.

All functions take a 1-D array and return a Python float.  Their global
minimum value is zero.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["sphere", "rosenbrock", "rastrigin", "ackley", "constant", "OBJECTIVES", "get_objective"]


def sphere(x) -> float:
    """Squared Euclidean norm, minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def rosenbrock(x) -> float:
    """Generalised Rosenbrock valley, minimum 0 at the all-ones vector.

    A one-dimensional input reduces to ``(1 - x)^2``.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 1:
        return float((1.0 - x[0]) ** 2)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x) -> float:
    """Rastrigin function with amplitude 10, minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def ackley(x) -> float:
    """Ackley function (a=20, b=0.2, c=2 pi), minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    n = x.size
    r = np.sqrt(np.sum(x * x) / n)
    s = np.sum(np.cos(2.0 * np.pi * x)) / n
    val = -20.0 * np.exp(-0.2 * r) - np.exp(s) + 20.0 + np.e
    # the closed form leaves a rounding residue at the optimum
    return float(max(val, 0.0))


def constant(x) -> float:
    """Flat landscape; every point is optimal.  Used to isolate the dynamics."""
    return 0.0


OBJECTIVES: dict[str, Callable[[np.ndarray], float]] = {
    "sphere": sphere,
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
    "ackley": ackley,
    "constant": constant,
}


def get_objective(name: str) -> Callable[[np.ndarray], float]:
    """Look up an objective by id.

    Raises
    ------
    KeyError
        For an unknown id; the message lists the known ones.
    """
    try:
        return OBJECTIVES[name]
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; known: {sorted(OBJECTIVES)}") from None

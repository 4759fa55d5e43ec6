"""Benchmark initial-value problems and the problem registry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

Vector = np.ndarray
RhsFunc = Callable[[float, Vector], Vector]
JacFunc = Callable[[float, Vector], np.ndarray]
ExactFunc = Callable[[float], Vector]


@dataclass(frozen=True, eq=False)
class IVP:
    """An initial-value problem y' = f(t, y), y(t0) = y0, solved on [t0, t_final].

    `rhs`, `jacobian` and `exact` must be pure functions so instances can be
    evaluated concurrently. `jacobian` and `exact` are optional; implicit
    steppers fall back to finite differences when no Jacobian is given.
    """

    name: str
    dimension: int
    t0: float
    t_final: float
    y0: Vector
    rhs: RhsFunc
    jacobian: JacFunc | None = None
    exact: ExactFunc | None = None

    def __post_init__(self):
        if not self.t_final > self.t0:
            raise ValueError(f"t_final must exceed t0, got [{self.t0}, {self.t_final}]")
        y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if y0.shape != (self.dimension,):
            raise ValueError(f"y0 has shape {y0.shape}, expected ({self.dimension},)")
        y0.setflags(write=False)
        object.__setattr__(self, "y0", y0)


def finite_difference_jacobian(rhs: RhsFunc, t: float, y: Vector) -> np.ndarray:
    """Central-difference Jacobian of rhs w.r.t. y, step sqrt(eps)*(1+|y_i|)."""
    y = np.asarray(y, dtype=float)
    m = y.size
    jac = np.empty((m, m))
    root_eps = math.sqrt(np.finfo(float).eps)
    for i in range(m):
        step = root_eps * (1.0 + abs(y[i]))
        yp = y.copy()
        ym = y.copy()
        yp[i] += step
        ym[i] -= step
        jac[:, i] = (rhs(t, yp) - rhs(t, ym)) / (2.0 * step)
    return jac


def make_dahlquist(lam: float) -> IVP:
    """Scalar linear test problem y' = lam*y, y(0) = 1, on [0, 1]."""

    def rhs(t, y):
        return lam * y

    def jacobian(t, y):
        return np.array([[lam]])

    def exact(t):
        return np.array([math.exp(lam * t)])

    return IVP("dahlquist", 1, 0.0, 1.0, np.array([1.0]), rhs, jacobian, exact)


def make_lotka_volterra() -> IVP:
    """Predator-prey system on [0, 62] with y(0) = (1, 1)."""

    def rhs(t, y):
        return np.array([
            0.1 * y[0] - 0.3 * y[0] * y[1],
            0.5 * (y[0] - 1.0) * y[1],
        ])

    def jacobian(t, y):
        return np.array([
            [0.1 - 0.3 * y[1], -0.3 * y[0]],
            [0.5 * y[1], 0.5 * (y[0] - 1.0)],
        ])

    return IVP("lotka-volterra", 2, 0.0, 62.0, np.array([1.0, 1.0]), rhs, jacobian)


def make_van_der_pol() -> IVP:
    """Mildly stiff van der Pol oscillator on [0, 20] with y(0) = (2, 0)."""

    def rhs(t, y):
        return np.array([
            y[1],
            2.0 * (1.0 - y[0] * y[0]) * y[1] - y[0],
        ])

    def jacobian(t, y):
        return np.array([
            [0.0, 1.0],
            [-4.0 * y[0] * y[1] - 1.0, 2.0 * (1.0 - y[0] * y[0])],
        ])

    return IVP("van-der-pol", 2, 0.0, 20.0, np.array([2.0, 0.0]), rhs, jacobian)


# Registered singletons; callers share instances so per-problem caches work.
REGISTRY: dict[str, IVP] = {
    "dahlquist": make_dahlquist(-5.0),
    "lotka-volterra": make_lotka_volterra(),
    "van-der-pol": make_van_der_pol(),
}


def registered_problems() -> list[str]:
    return sorted(REGISTRY)


def get_problem(name: str) -> IVP:
    try:
        return REGISTRY[name]
    except KeyError:
        valid = ", ".join(registered_problems())
        raise KeyError(f"unknown problem {name!r}; registered problems: {valid}") from None

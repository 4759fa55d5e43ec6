"""Repeated global Richardson extrapolation over nested dyadic grids.

Component runs on step sizes h/2^j (j = 0..ell) are computed independently
and combined pointwise on the coarse grid,

    r_n = sum_j gamma_j * y^{(j)}_{2^j n},

where the weights gamma annihilate the ell leading terms of the global error
expansion of an order-p base method, raising the order to p + ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .methods import (DEFAULT_NEWTON, MethodSpec, NewtonConfig, Trajectory,
                      integrate, parse_method)
from .problems import IVP
from .rational import solve_linear_system

MAX_ELL = 8


@dataclass(frozen=True, eq=False)
class ExtrapolationScheme:
    """Combination weights for ell extrapolation passes on an order-p base.

    gamma[j] multiplies the grid with step h / 2^j; the weights are kept as
    exact rationals and only turned into floats inside combine().
    """

    p: int
    ell: int
    gamma: tuple[Fraction, ...]

    def gamma_floats(self) -> np.ndarray:
        return np.array([float(g) for g in self.gamma])


def gamma_coefficients(p: int, ell: int) -> ExtrapolationScheme:
    """Solve the exact moment system for the combination weights.

    Conditions: sum_j gamma_j = 1 and sum_j gamma_j (2^-j)^(p+q) = 0 for
    q = 0..ell-1, a nonsingular Vandermonde-type system in the nodes 2^-j.
    """
    if p < 1:
        raise ValueError("base order p must be at least 1")
    if not 1 <= ell <= MAX_ELL:
        raise ValueError(f"ell must be in 1..{MAX_ELL}, got {ell}")
    size = ell + 1
    matrix = [[Fraction(1)] * size]
    rhs = [Fraction(1)]
    for q in range(ell):
        matrix.append([Fraction(1, 2 ** (j * (p + q))) for j in range(size)])
        rhs.append(Fraction(0))
    gamma = solve_linear_system(matrix, rhs)
    return ExtrapolationScheme(p, ell, tuple(gamma))


@dataclass(frozen=True, eq=False)
class RgreResult:
    coarse_h: float
    combined: Trajectory
    components: tuple[Trajectory, ...]
    total_f_evals: int


def combine(components: list[Trajectory] | tuple[Trajectory, ...],
            scheme: ExtrapolationScheme) -> Trajectory:
    """Combine ell+1 nested-grid trajectories into the accelerated coarse one.

    Accumulation runs in ascending j with compensated summation: the weights
    alternate in sign and grow with ell, and a fixed summation order keeps the
    result bit-reproducible regardless of how components were produced.
    """
    components = tuple(components)
    if len(components) != scheme.ell + 1:
        raise ValueError(f"need {scheme.ell + 1} component trajectories, got {len(components)}")
    coarse = components[0]
    n_coarse = coarse.n_steps
    for j, traj in enumerate(components):
        if traj.n_steps != n_coarse * 2 ** j:
            raise ValueError(
                f"component {j} has {traj.n_steps} steps; expected {n_coarse * 2 ** j}")
        if traj.t0 != coarse.t0:
            raise ValueError(f"component {j} starts at t0 = {traj.t0}, expected {coarse.t0}")
        if not math.isclose(traj.h * 2 ** j, coarse.h, rel_tol=1e-12):
            raise ValueError(f"component {j} step size is not h / 2^{j}")
        if traj.states.shape[1] != coarse.states.shape[1]:
            raise ValueError("components have mismatched state dimensions")

    gammas = scheme.gamma_floats()
    acc = np.zeros_like(coarse.states)
    comp = np.zeros_like(acc)
    for j, (g, traj) in enumerate(zip(gammas, components)):
        term = g * traj.states[:: 2 ** j]
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t

    total = sum(traj.f_eval_count for traj in components)
    return Trajectory(coarse.t0, coarse.h, acc, total)


def run_rgre(method: MethodSpec | str, problem: IVP, n_coarse: int, ell: int,
             newton: NewtonConfig = DEFAULT_NEWTON) -> RgreResult:
    """Run the ell+1 independent component integrations and combine them.

    Components are independent of each other (each grid starts itself with
    the Ralston procedure at its own h) and could execute concurrently; they
    are run in ascending grid order here and combined in that fixed order, so
    repeated calls give bit-identical output.
    """
    spec = parse_method(method) if isinstance(method, str) else method
    scheme = gamma_coefficients(spec.order, ell)
    components = []
    for j in range(ell + 1):
        try:
            components.append(integrate(spec, problem, n_coarse * 2 ** j, newton))
        except Exception as exc:
            raise type(exc)(f"component grid j={j} (n={n_coarse * 2 ** j}): {exc}") from exc
    combined = combine(components, scheme)
    return RgreResult(combined.h, combined, tuple(components), combined.f_eval_count)


def work_ratio(result: RgreResult) -> float:
    """Total rhs evaluations relative to the coarse component alone."""
    return result.total_f_evals / result.components[0].f_eval_count

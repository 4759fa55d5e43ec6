"""Linear multistep methods: coefficient tables, starters, steppers, integration.

A k-step method is stored through its coefficient arrays (alpha, beta) of
length k+1 and advances the recurrence

    sum_j alpha_j * y_{n+j} = h * sum_j beta_j * f_{n+j},   j = 0..k.

Adams methods are normalized to alpha_k = 1, BDF methods to beta_k = 1. All
coefficient tables are derived on demand by solving the order conditions in
exact rational arithmetic, so the stored doubles are correctly rounded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .problems import IVP, finite_difference_jacobian
from .rational import solve_linear_system

FAMILIES = ("AB", "AM", "BDF")

# order -> step count differs per family: AB/BDF use k = p, AM uses k = p - 1
# (so the order-2 Adams-Moulton method is the one-step trapezoidal rule).
SUPPORTED_ORDERS = {"AB": range(2, 7), "AM": range(2, 7), "BDF": range(2, 8)}


class NewtonError(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float | None = None,
                 step_index: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.step_index = step_index


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iters: int = 25
    jacobian_mode: str = "analytic"  # "analytic" (when available) or "finite-difference"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.jacobian_mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True, eq=False)
class LmmCoefficients:
    family: str
    k: int
    p: int
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if alpha.shape != (self.k + 1,) or beta.shape != (self.k + 1,):
            raise ValueError("alpha and beta must have length k+1")
        if alpha[self.k] == 0.0:
            raise ValueError("leading coefficient alpha_k must be nonzero")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def is_explicit(self) -> bool:
        return self.beta[self.k] == 0.0

    @property
    def label(self) -> str:
        return f"{self.family.lower()}{self.p}"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on the uniform grid t0 + n*h, with rhs-evaluation accounting."""

    t0: float
    h: float
    states: np.ndarray  # shape (n_steps + 1, dimension)
    f_eval_count: int

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError("states must be a nonempty (n+1, m) array")
        if self.h <= 0:
            raise ValueError("step size must be positive")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def t_final(self) -> float:
        return self.t0 + self.h * self.n_steps

    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.states.shape[0])


@dataclass(frozen=True)
class MethodSpec:
    """A method family plus order, e.g. MethodSpec('BDF', 2) <-> 'bdf2'."""

    family: str
    order: int

    @property
    def label(self) -> str:
        return f"{self.family.lower()}{self.order}"


_METHOD_RE = re.compile(r"^(ab|am|bdf)([1-9])$")


def parse_method(text: str) -> MethodSpec:
    m = _METHOD_RE.match(text.strip().lower())
    if not m:
        raise ValueError(f"cannot parse method {text!r}; expected e.g. 'ab2', 'am3', 'bdf5'")
    return MethodSpec(m.group(1).upper(), int(m.group(2)))


# ---------------------------------------------------------------------------
# coefficient derivation
#
# Order conditions: C_i = sum_j alpha_j j^i - i * sum_j beta_j j^(i-1) = 0 for
# i = 0..p (with C_0 = sum alpha_j). Each family fixes part of the coefficient
# set and the remaining unknowns solve a square rational system.
# ---------------------------------------------------------------------------

def _adams_rhs(k: int, i: int) -> Fraction:
    # With the Adams alpha pattern (alpha_k = 1, alpha_{k-1} = -1) condition i
    # reads i * sum_j beta_j j^(i-1) = k^i - (k-1)^i.
    return Fraction(k ** i - (k - 1) ** i, i)


@lru_cache(maxsize=None)
def _adams_bashforth_exact(p: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    k = p
    matrix = [[Fraction(j ** (i - 1)) if i > 1 or j > 0 else Fraction(1)
               for j in range(k)] for i in range(1, p + 1)]
    # j^(i-1) with the 0^0 = 1 convention handled above
    rhs = [_adams_rhs(k, i) for i in range(1, p + 1)]
    betas = solve_linear_system(matrix, rhs)
    alpha = [Fraction(0)] * (k + 1)
    alpha[k] = Fraction(1)
    alpha[k - 1] = Fraction(-1)
    return tuple(alpha), tuple(betas) + (Fraction(0),)


@lru_cache(maxsize=None)
def _adams_moulton_exact(p: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    k = p - 1
    matrix = [[Fraction(j ** (i - 1)) if i > 1 or j > 0 else Fraction(1)
               for j in range(k + 1)] for i in range(1, p + 1)]
    rhs = [_adams_rhs(k, i) for i in range(1, p + 1)]
    betas = solve_linear_system(matrix, rhs)
    alpha = [Fraction(0)] * (k + 1)
    alpha[k] = Fraction(1)
    alpha[k - 1] = Fraction(-1)
    return tuple(alpha), tuple(betas)


@lru_cache(maxsize=None)
def _bdf_exact(p: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    k = p
    matrix = [[Fraction(j ** i) for j in range(k + 1)] for i in range(k + 1)]
    rhs = [Fraction(i) * Fraction(k) ** (i - 1) if i > 0 else Fraction(0)
           for i in range(k + 1)]
    alphas = solve_linear_system(matrix, rhs)
    beta = [Fraction(0)] * (k + 1)
    beta[k] = Fraction(1)
    return tuple(alphas), tuple(beta)


def exact_coefficients(family: str, p: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Rational (alpha, beta) for a supported family/order pair."""
    family = family.upper()
    if family not in FAMILIES or p not in SUPPORTED_ORDERS.get(family, ()):
        supported = "; ".join(
            f"{fam}: orders {rng.start}..{rng.stop - 1}" for fam, rng in SUPPORTED_ORDERS.items()
        )
        raise ValueError(f"unsupported method ({family}, order {p}); {supported}")
    if family == "AB":
        return _adams_bashforth_exact(p)
    if family == "AM":
        return _adams_moulton_exact(p)
    return _bdf_exact(p)


@lru_cache(maxsize=None)
def lmm_coefficients(family: str, p: int) -> LmmCoefficients:
    alpha, beta = exact_coefficients(family, p)
    family = family.upper()
    k = len(alpha) - 1
    return LmmCoefficients(family, k, p,
                           np.array([float(a) for a in alpha]),
                           np.array([float(b) for b in beta]))


def order_conditions_residual(coeffs: LmmCoefficients, q: int) -> np.ndarray:
    """Residuals C_i, i = 0..q; all vanish through i = p for an order-p method."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    js = np.arange(coeffs.k + 1, dtype=float)
    out = np.empty(q + 1)
    out[0] = coeffs.alpha.sum()
    for i in range(1, q + 1):
        powers = np.ones_like(js) if i == 1 else js ** (i - 1)
        out[i] = coeffs.alpha @ js ** i - i * (coeffs.beta @ powers)
    return out


# ---------------------------------------------------------------------------
# Ralston starting procedures (explicit RK with minimal error bounds)
# ---------------------------------------------------------------------------

_RALSTON_TABLEAUS = {
    2: (
        ((), (2 / 3,)),
        (1 / 4, 3 / 4),
        (0.0, 2 / 3),
    ),
    3: (
        ((), (1 / 2,), (0.0, 3 / 4)),
        (2 / 9, 1 / 3, 4 / 9),
        (0.0, 1 / 2, 3 / 4),
    ),
}


def explicit_rk_step(rhs, t: float, y: np.ndarray, h: float, tableau) -> np.ndarray:
    """One step of an explicit Runge-Kutta method given (A rows, b, c)."""
    a_rows, b, c = tableau
    stages = []
    for row, ci in zip(a_rows, c):
        yi = y
        for a_ij, kj in zip(row, stages):
            if a_ij != 0.0:
                yi = yi + h * a_ij * kj
        stages.append(rhs(t + ci * h, yi))
    out = y
    for bi, ki in zip(b, stages):
        out = out + h * bi * ki
    return out


def ralston_start(problem: IVP, h: float, k: int, p: int) -> np.ndarray:
    """Starting values y_0..y_{k-1} from k-1 Ralston RK steps of order p in {2, 3}."""
    if p not in _RALSTON_TABLEAUS:
        raise ValueError(f"no Ralston starter of order {p}; supported orders are 2 and 3")
    if h <= 0 or k < 1:
        raise ValueError("need h > 0 and k >= 1")
    tableau = _RALSTON_TABLEAUS[p]
    states = np.empty((k, problem.dimension))
    states[0] = problem.y0
    for i in range(k - 1):
        states[i + 1] = explicit_rk_step(problem.rhs, problem.t0 + i * h, states[i], h, tableau)
    return states


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def step_explicit(coeffs: LmmCoefficients, t_n: float, history_y: np.ndarray,
                  history_f: np.ndarray, h: float) -> np.ndarray:
    """Advance an explicit method: histories hold y_{n..n+k-1} and f_{n..n+k-1}."""
    k = coeffs.k
    if not coeffs.is_explicit:
        raise ValueError(f"{coeffs.label} is implicit; use step_implicit")
    known = h * (coeffs.beta[:k] @ history_f) - coeffs.alpha[:k] @ history_y
    return known / coeffs.alpha[k]


def _newton_jacobian(problem: IVP, newton: NewtonConfig, t: float, y: np.ndarray) -> np.ndarray:
    if newton.jacobian_mode == "analytic" and problem.jacobian is not None:
        return np.asarray(problem.jacobian(t, y), dtype=float)
    return finite_difference_jacobian(problem.rhs, t, y)


def step_implicit(coeffs: LmmCoefficients, t_n: float, history_y: np.ndarray,
                  history_f: np.ndarray, h: float, problem: IVP,
                  newton: NewtonConfig = DEFAULT_NEWTON) -> np.ndarray:
    """Advance an implicit method by Newton iteration on

        g(y) = alpha_k y - h beta_k f(t_{n+k}, y) - known = 0.

    Seeded with the same-order Adams-Bashforth prediction when the history is
    long enough for it, else with the newest history state.
    """
    k = coeffs.k
    if coeffs.is_explicit:
        raise ValueError(f"{coeffs.label} is explicit; use step_explicit")
    t_new = t_n + k * h
    known = h * (coeffs.beta[:k] @ history_f) - coeffs.alpha[:k] @ history_y
    alpha_k = coeffs.alpha[k]
    beta_k = coeffs.beta[k]

    y = history_y[-1]
    if coeffs.p <= 6 and coeffs.p <= k:
        predictor = lmm_coefficients("AB", coeffs.p) if coeffs.p >= 2 else None
        if predictor is not None and predictor.k <= k:
            off = k - predictor.k
            y = step_explicit(predictor, t_n + off * h,
                              history_y[off:], history_f[off:], h)

    identity = np.eye(problem.dimension)
    residual = np.inf
    best_y, best_residual = y, np.inf
    for iteration in range(newton.max_iters):
        f_val = problem.rhs(t_new, y)
        g = alpha_k * y - h * beta_k * f_val - known
        residual = float(np.max(np.abs(g)))
        if residual < best_residual:
            best_y, best_residual = y, residual
        # Always correct at least once (accepting the raw predictor would
        # silently turn the method explicit on fine grids), then keep
        # iterating while the residual still shrinks: stopping right at tol
        # leaves a systematic per-step bias that pollutes high-order studies.
        if iteration > 0 and residual <= newton.tol:
            if residual == 0.0 or residual > 0.25 * prev_residual:
                return best_y
        jac = alpha_k * identity - h * beta_k * _newton_jacobian(problem, newton, t_new, y)
        try:
            delta = np.linalg.solve(jac, g)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(
                f"singular Newton matrix for {coeffs.label} at t = {t_new:.6g}",
                residual=residual) from exc
        y = y - delta
        prev_residual = residual
    if best_residual <= newton.tol:
        return best_y
    raise NewtonError(
        f"Newton did not reach tol {newton.tol:g} within {newton.max_iters} "
        f"iterations for {coeffs.label} at t = {t_new:.6g}; last residual {residual:.3g}",
        residual=residual)


def step_pece(predictor: LmmCoefficients, corrector: LmmCoefficients, t_n: float,
              history_y: np.ndarray, history_f: np.ndarray, h: float,
              problem: IVP) -> np.ndarray:
    """One predict-evaluate-correct step; histories are aligned to
    k = max(predictor.k, corrector.k) points. The trailing f re-evaluation of
    the PECE cycle belongs to the caller, which stores f at the accepted state.
    """
    if not predictor.is_explicit:
        raise ValueError("predictor must be explicit")
    if corrector.is_explicit:
        raise ValueError("corrector must be implicit")
    if predictor.p < corrector.p - 1:
        raise ValueError("predictor order too low to preserve corrector accuracy")
    k = max(predictor.k, corrector.k)
    if history_y.shape[0] != k or history_f.shape[0] != k:
        raise ValueError(f"histories must hold {k} entries")
    t_new = t_n + k * h

    off = k - predictor.k
    y_pred = step_explicit(predictor, t_n + off * h, history_y[off:], history_f[off:], h)
    f_pred = problem.rhs(t_new, y_pred)

    pad = k - corrector.k
    alpha = np.concatenate([np.zeros(pad), corrector.alpha])
    beta = np.concatenate([np.zeros(pad), corrector.beta])
    known = h * (beta[:k] @ history_f + beta[k] * f_pred) - alpha[:k] @ history_y
    return known / alpha[k]


# ---------------------------------------------------------------------------
# fixed-step integration
# ---------------------------------------------------------------------------

# Starting values come from the order-3 Ralston method for every family and
# order. The order-2 starter leaves an O(h^3) startup error that an order-2
# base method combined twice cannot cancel, visibly flattening BDF2 studies;
# the order-3 starter is accurate enough for every tabulated combination.
_STARTER_ORDER = 3


def integrate(method: MethodSpec | str, problem: IVP, n_steps: int,
              newton: NewtonConfig = DEFAULT_NEWTON) -> Trajectory:
    """Integrate `problem` on a uniform grid with n_steps steps.

    AB methods step explicitly, BDF methods through Newton, and AM methods in
    predict-evaluate-correct-evaluate mode with the same-order AB predictor.
    Starting values come from the Ralston starter run on this grid's own h.
    f_eval_count tallies every rhs evaluation, starting procedure included.
    """
    spec = parse_method(method) if isinstance(method, str) else method
    coeffs = lmm_coefficients(spec.family, spec.order)
    predictor = lmm_coefficients("AB", spec.order) if spec.family == "AM" else None
    k = max(coeffs.k, predictor.k) if predictor is not None else coeffs.k
    if n_steps < k:
        raise ValueError(f"{spec.label} needs at least {k} steps, got {n_steps}")

    evals = 0

    def counted_rhs(t, y):
        nonlocal evals
        evals += 1
        return problem.rhs(t, y)

    counted = replace(problem, rhs=counted_rhs)
    h = (problem.t_final - problem.t0) / n_steps
    m = problem.dimension

    states = np.empty((n_steps + 1, m))
    fs = np.empty((n_steps + 1, m))
    states[:k] = ralston_start(counted, h, k, _STARTER_ORDER)
    for j in range(k):
        fs[j] = counted.rhs(problem.t0 + j * h, states[j])

    for n in range(n_steps - k + 1):
        t_n = problem.t0 + n * h
        hist_y = states[n:n + k]
        hist_f = fs[n:n + k]
        if predictor is not None:
            y_new = step_pece(predictor, coeffs, t_n, hist_y, hist_f, h, counted)
        elif coeffs.is_explicit:
            y_new = step_explicit(coeffs, t_n, hist_y, hist_f, h)
        else:
            try:
                y_new = step_implicit(coeffs, t_n, hist_y, hist_f, h, counted, newton)
            except NewtonError as exc:
                raise NewtonError(f"{exc} (step index {n + k} of {n_steps})",
                                  residual=exc.residual, step_index=n + k) from exc
        states[n + k] = y_new
        fs[n + k] = counted.rhs(t_n + k * h, y_new)

    return Trajectory(problem.t0, h, states, evals)

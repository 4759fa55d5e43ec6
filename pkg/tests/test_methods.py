import math
from fractions import Fraction

import numpy as np
import pytest

from rgre.methods import (DEFAULT_NEWTON, LmmCoefficients, MethodSpec,
                          NewtonConfig, NewtonError, exact_coefficients,
                          integrate, lmm_coefficients,
                          order_conditions_residual, parse_method,
                          ralston_start, step_explicit, step_implicit,
                          step_pece)
from rgre.problems import get_problem, make_dahlquist

ALL_METHODS = ([("AB", p) for p in range(2, 7)] +
               [("AM", p) for p in range(2, 7)] +
               [("BDF", p) for p in range(2, 8)])


# -- coefficient tables ------------------------------------------------------

def test_ab2_coefficients():
    c = lmm_coefficients("AB", 2)
    assert np.allclose(c.alpha, [0, -1, 1]) and np.allclose(c.beta, [-0.5, 1.5, 0])
    assert c.k == 2 and c.p == 2 and c.is_explicit


def test_bdf2_coefficients():
    c = lmm_coefficients("BDF", 2)
    assert np.allclose(c.alpha, [0.5, -2, 1.5]) and np.allclose(c.beta, [0, 0, 1])
    assert not c.is_explicit


def test_am2_is_trapezoidal():
    c = lmm_coefficients("AM", 2)
    assert c.k == 1
    assert np.allclose(c.alpha, [-1, 1]) and np.allclose(c.beta, [0.5, 0.5])


def test_textbook_tables_exact():
    # classic third-order tables, exact rational comparison
    alpha, beta = exact_coefficients("AB", 3)
    assert beta == (Fraction(5, 12), Fraction(-4, 3), Fraction(23, 12), Fraction(0))
    alpha, beta = exact_coefficients("AM", 3)
    assert beta == (Fraction(-1, 12), Fraction(2, 3), Fraction(5, 12))
    alpha, beta = exact_coefficients("BDF", 3)
    assert alpha == (Fraction(-1, 3), Fraction(3, 2), Fraction(-3), Fraction(11, 6))


@pytest.mark.parametrize("family,p", ALL_METHODS)
def test_order_conditions_hold_exactly(family, p):
    # the rational tables satisfy the conditions with zero residual
    alpha, beta = exact_coefficients(family, p)
    k = len(alpha) - 1
    for i in range(p + 1):
        first = sum(a * Fraction(j) ** i for j, a in enumerate(alpha))
        second = i * sum(b * Fraction(j) ** (i - 1) for j, b in enumerate(beta)
                         if j > 0 or i == 1)
        assert first - second == 0
    beyond = order_conditions_residual(lmm_coefficients(family, p), p + 1)
    assert abs(beyond[p + 1]) > 1e-6


@pytest.mark.parametrize("family,p", ALL_METHODS)
def test_order_conditions_float_residual(family, p):
    # float tables: residual below 1e-12 relative to the condition scale
    c = lmm_coefficients(family, p)
    residual = order_conditions_residual(c, p)
    js = np.arange(c.k + 1, dtype=float)
    for i, r in enumerate(residual):
        scale = max(1.0, float(np.abs(c.alpha) @ js ** i))
        assert abs(r) < 1e-12 * scale


@pytest.mark.parametrize("family,p", ALL_METHODS)
def test_normalization(family, p):
    c = lmm_coefficients(family, p)
    if family == "BDF":
        assert c.beta[c.k] == 1.0
    else:
        assert c.alpha[c.k] == 1.0
    assert c.alpha[c.k] > 0
    assert c.is_explicit == (family == "AB")


def test_unsupported_pairs_rejected():
    for family, p in [("AB", 1), ("AB", 7), ("AM", 1), ("AM", 7), ("BDF", 8), ("XY", 2)]:
        with pytest.raises(ValueError, match="unsupported"):
            lmm_coefficients(family, p)


def test_order_conditions_euler():
    euler = LmmCoefficients("AB", 1, 1, np.array([-1.0, 1.0]), np.array([1.0, 0.0]))
    assert np.allclose(order_conditions_residual(euler, 1), [0.0, 0.0])


def test_ab2_residual_third_order_nonzero():
    c = lmm_coefficients("AB", 2)
    r = order_conditions_residual(c, 3)
    assert np.allclose(r[:3], 0.0, atol=1e-12)
    assert abs(r[3]) > 0.1


def test_parse_method():
    assert parse_method("bdf5") == MethodSpec("BDF", 5)
    assert parse_method(" AB2 ") == MethodSpec("AB", 2)
    with pytest.raises(ValueError):
        parse_method("rk4")


# -- starting procedure ------------------------------------------------------

def test_ralston_start_single_point(dahlquist):
    out = ralston_start(dahlquist, 0.1, 1, 2)
    assert out.shape == (1, 1) and out[0, 0] == 1.0


def test_ralston_rk2_hand_value(dahlquist):
    # one Ralston step on y' = -5y, h = 0.1:
    # y1 = 1 + 0.1*(0.25*(-5) + 0.75*(-5)*(1 - 1/3)) = 0.625
    out = ralston_start(dahlquist, 0.1, 2, 2)
    assert out[1, 0] == pytest.approx(0.625, abs=1e-15)


def test_ralston_zero_rhs():
    p = make_dahlquist(0.0)
    out = ralston_start(p, 0.2, 3, 3)
    assert np.all(out == 1.0)


def test_ralston_orders(dahlquist):
    # single-step error should shrink by ~2^(p+1)
    for p in (2, 3):
        errs = []
        for h in (0.05, 0.025):
            y1 = ralston_start(dahlquist, h, 2, p)[1, 0]
            errs.append(abs(y1 - math.exp(-5.0 * h)))
        rate = math.log2(errs[0] / errs[1])
        assert rate == pytest.approx(p + 1, abs=0.25)


def test_ralston_rejects_other_orders(dahlquist):
    with pytest.raises(ValueError):
        ralston_start(dahlquist, 0.1, 2, 4)


# -- single steps ------------------------------------------------------------

def test_step_explicit_ab2_hand_value():
    c = lmm_coefficients("AB", 2)
    hy = np.array([[1.0], [0.625]])
    hf = -5.0 * hy
    out = step_explicit(c, 0.0, hy, hf, 0.1)
    assert out[0] == pytest.approx(0.40625, abs=1e-15)


def test_step_explicit_constant_history():
    for family, p in [("AB", 2), ("AB", 4)]:
        c = lmm_coefficients(family, p)
        hy = np.ones((c.k, 1)) * 3.7
        hf = np.zeros((c.k, 1))
        assert step_explicit(c, 0.0, hy, hf, 0.1)[0] == pytest.approx(3.7, rel=1e-15)


def test_step_explicit_degenerate_h():
    c = lmm_coefficients("AB", 2)
    hy = np.array([[2.5], [2.5]])
    hf = np.array([[1.0], [1.0]])
    assert step_explicit(c, 0.0, hy, hf, 0.0)[0] == pytest.approx(2.5, rel=1e-15)


def test_step_implicit_bdf2_linear(dahlquist):
    # closed form: y2 = (2*y1 - 0.5*y0) / (1.5 - h*lambda)
    c = lmm_coefficients("BDF", 2)
    hy = np.array([[1.0], [0.6]])
    hf = -5.0 * hy
    out = step_implicit(c, 0.0, hy, hf, 0.1, dahlquist)
    assert out[0] == pytest.approx(0.35, abs=1e-13)


def test_step_implicit_trapezoidal_zero_rhs():
    p = make_dahlquist(0.0)
    c = lmm_coefficients("AM", 2)
    hy = np.array([[4.2]])
    hf = np.array([[0.0]])
    out = step_implicit(c, 0.0, hy, hf, 0.3, p)
    assert out[0] == pytest.approx(4.2, rel=1e-15)


def test_step_implicit_vanishing_leading_coefficient():
    # h*lambda = 3/2 makes alpha_k - h*lambda*beta_k vanish for BDF2
    p = make_dahlquist(15.0)
    c = lmm_coefficients("BDF", 2)
    hy = np.array([[1.0], [2.0]])
    hf = 15.0 * hy
    with pytest.raises(NewtonError):
        step_implicit(c, 0.0, hy, hf, 0.1, p)


def test_step_implicit_reports_residual():
    # nonlinear problem, unreachable tolerance: the error carries the residual
    from rgre.problems import IVP

    quad = IVP("quad", 1, 0.0, 1.0, np.array([1.0]), lambda t, y: y * y)
    strict = NewtonConfig(tol=1e-30, max_iters=2, jacobian_mode="finite-difference")
    c = lmm_coefficients("BDF", 2)
    hy = np.array([[1.0], [1.2]])
    hf = hy * hy
    with pytest.raises(NewtonError) as info:
        step_implicit(c, 0.0, hy, hf, 0.5, quad, strict)
    assert info.value.residual is not None and info.value.residual > 0


def test_step_pece_hand_value(dahlquist):
    # Euler predictor + trapezoidal corrector on y' = -5y, h = 0.1:
    # predict 0.5, correct y1 = 1 + 0.05*(-5 + (-2.5)) = 0.625
    euler = LmmCoefficients("AB", 1, 1, np.array([-1.0, 1.0]), np.array([1.0, 0.0]))
    trap = lmm_coefficients("AM", 2)
    hy = np.array([[1.0]])
    hf = np.array([[-5.0]])
    out = step_pece(euler, trap, 0.0, hy, hf, 0.1, dahlquist)
    assert out[0] == pytest.approx(0.625, abs=1e-15)


def test_step_pece_preserves_constants():
    p = make_dahlquist(0.0)
    pred = lmm_coefficients("AB", 3)
    corr = lmm_coefficients("AM", 3)
    hy = np.ones((3, 1)) * 1.0
    hf = np.zeros((3, 1))
    out = step_pece(pred, corr, 0.0, hy, hf, 0.1, p)
    assert out[0] == pytest.approx(1.0, rel=1e-15)


def test_explicit_implicit_agree_when_beta_k_zero(dahlquist):
    # strip the implicit term off the trapezoidal rule; Newton must agree
    # with the direct explicit evaluation to its tolerance
    c = LmmCoefficients("AM", 1, 1, np.array([-1.0, 1.0]), np.array([0.5, 0.0]))
    implicit_like = LmmCoefficients("AM", 1, 1, np.array([-1.0, 1.0]),
                                    np.array([0.5, 1e-300]))
    hy = np.array([[0.8]])
    hf = np.array([[-4.0]])
    explicit = step_explicit(c, 0.0, hy, hf, 0.1)
    implicit = step_implicit(implicit_like, 0.0, hy, hf, 0.1, dahlquist)
    assert abs(explicit[0] - implicit[0]) <= DEFAULT_NEWTON.tol


# -- integrate ---------------------------------------------------------------

def test_integrate_zero_rhs_exact():
    p = make_dahlquist(0.0)
    # Adams alpha patterns cancel exactly in floating point
    for method in ("ab2", "am3"):
        traj = integrate(method, p, 16)
        assert np.all(traj.states == 1.0)
    # BDF alpha rows only cancel to rounding in their dot products
    traj = integrate("bdf4", p, 16)
    assert np.max(np.abs(traj.states - 1.0)) < 5e-15


@pytest.mark.parametrize("method,p", [("ab2", 2), ("am3", 3), ("bdf2", 2)])
def test_integrate_convergence_order(dahlquist, method, p):
    errs = []
    for n in (512, 1024):
        traj = integrate(method, dahlquist, n)
        exact = np.array([dahlquist.exact(t)[0] for t in traj.times()])
        errs.append(np.max(np.abs(traj.states[:, 0] - exact)))
    slope = math.log2(errs[0] / errs[1])
    assert slope == pytest.approx(p, abs=0.1)


def test_integrate_error_ratio_bdf2(dahlquist):
    errs = []
    for n in (64, 128):
        traj = integrate("bdf2", dahlquist, n)
        exact = np.array([dahlquist.exact(t)[0] for t in traj.times()])
        errs.append(np.max(np.abs(traj.states[:, 0] - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_pece_order_matches_corrector(dahlquist):
    for p in (2, 3):
        errs = []
        for n in (64, 128, 256, 512):
            traj = integrate(MethodSpec("AM", p), dahlquist, n)
            exact = np.array([dahlquist.exact(t)[0] for t in traj.times()])
            errs.append(np.max(np.abs(traj.states[:, 0] - exact)))
        slopes = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert slopes[-1] == pytest.approx(p, abs=0.2)


def test_integrate_needs_enough_steps(dahlquist):
    with pytest.raises(ValueError):
        integrate("bdf5", dahlquist, 3)


def test_trajectory_metadata(dahlquist):
    traj = integrate("ab2", dahlquist, 50)
    assert traj.n_steps == 50
    assert traj.h == pytest.approx(0.02)
    assert traj.t_final == pytest.approx(1.0)
    assert traj.times()[0] == 0.0
    assert not traj.states.flags.writeable


def test_polynomial_exactness():
    # an order-p method reproduces y' = d/dt t^p with zero formula residual
    h, t = 0.1, 0.3
    for family, p in ALL_METHODS:
        c = lmm_coefficients(family, p)
        js = np.arange(c.k + 1)
        ts = t + js * h
        residual = c.alpha @ ts ** p - h * (c.beta @ (p * ts ** (p - 1)))
        assert abs(residual) < 1e-10


def test_linearity_in_initial_condition():
    from dataclasses import replace

    base = make_dahlquist(-5.0)
    scaled = replace(base, y0=np.array([3.0]), exact=None)
    a = integrate("ab2", base, 128)
    b = integrate("ab2", scaled, 128)
    assert np.max(np.abs(3.0 * a.states - b.states)) < 1e-13 * np.max(np.abs(b.states))


def test_f_eval_count_explicit_exact(dahlquist):
    # starter: 3 evals per Ralston RK3 step, one per history point, one per step
    for p in (2, 3, 5):
        k = p
        n = 40
        traj = integrate(MethodSpec("AB", p), dahlquist, n)
        starter_evals = 3 * (k - 1) + k
        assert traj.f_eval_count == (n - k + 1) + starter_evals


def test_f_eval_count_pece(dahlquist):
    n = 40
    traj = integrate("am2", dahlquist, n)  # k = 2 via the AB2 predictor
    starter_evals = 3 * 1 + 2
    assert traj.f_eval_count == 2 * (n - 2 + 1) + starter_evals


def test_newton_failure_carries_step_index():
    stiff = make_dahlquist(15.0)  # h*lambda = 1.5 at n = 10 kills BDF2
    with pytest.raises(NewtonError) as info:
        integrate("bdf2", stiff, 10)
    assert info.value.step_index is not None

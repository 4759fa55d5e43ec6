from fractions import Fraction

import pytest

from rgre.rational import solve_linear_system


def test_identity():
    x = solve_linear_system([[1, 0], [0, 1]], [3, Fraction(1, 7)])
    assert x == [Fraction(3), Fraction(1, 7)]


def test_requires_pivoting():
    # first pivot is zero, must swap rows
    x = solve_linear_system([[0, 1], [2, 0]], [5, 4])
    assert x == [Fraction(2), Fraction(5)]


def test_exact_hilbert():
    # 3x3 Hilbert system solved exactly; floating point would already drift
    h = [[Fraction(1, i + j + 1) for j in range(3)] for i in range(3)]
    rhs = [sum(row) for row in h]
    assert solve_linear_system(h, rhs) == [Fraction(1)] * 3


def test_singular_raises():
    with pytest.raises(ValueError):
        solve_linear_system([[1, 2], [2, 4]], [1, 2])


def test_non_square_raises():
    with pytest.raises(ValueError):
        solve_linear_system([[1, 2]], [1, 2])

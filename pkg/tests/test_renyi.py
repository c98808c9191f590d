import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from renyi_ldp.errors import DomainError
from renyi_ldp.renyi import (
    GeometricPotential,
    Interval,
    RefMeasure,
    apply_T,
    branch_matrix,
    cf_digits,
    cylinder_interval,
    digit_of,
    iter_word_tables,
    partition_interval,
    periodic_point,
    potential_bounds,
    ref_measure_mass,
    word_matrix,
    word_table,
)
from renyi_ldp.shift import enumerate_words
from renyi_ldp.surd import IntMatrix2, QuadraticSurd

GOLD = QuadraticSurd.make(-1, 1, 5, 2)


def test_apply_T_examples():
    assert apply_T(0) == 0
    assert apply_T(Fraction(1, 2)) == 0
    assert apply_T(GOLD) == GOLD
    with pytest.raises(DomainError):
        apply_T(Fraction(1))


def test_digits():
    assert digit_of(Fraction(1, 3)) == 1
    assert digit_of(0.6) == 2
    assert digit_of(0) == 1
    assert cf_digits((1,)) == (2,)


def test_branch_matrices():
    assert branch_matrix(1) == IntMatrix2(1, 0, 1, 1)
    M2 = branch_matrix(2)
    assert M2 == IntMatrix2(1, 1, 1, 2)
    assert M2(Fraction(0)) == Fraction(1, 2) and M2(Fraction(1)) == Fraction(2, 3)
    assert branch_matrix(5)(Fraction(0)) == Fraction(4, 5)
    for p in range(1, 30):
        J = partition_interval(p)
        assert J.lo == branch_matrix(p)(Fraction(0)) and J.hi == branch_matrix(p)(Fraction(1))


def test_periodic_points():
    pt = periodic_point("1")
    assert pt.xi == 0 and pt.derivative == 1
    pt = periodic_point("2")
    assert pt.xi == GOLD
    assert abs(float(pt.derivative) - 6.854101966249685) < 1e-12
    pt = periodic_point("2,3")
    assert pt.xi == QuadraticSurd.make(-3, 2, 6, 3)
    assert abs(float(pt.derivative) - 97.98979485566356) < 1e-10
    orbit = pt.orbit(128)
    assert digit_of(float(orbit[0])) == 2 and digit_of(float(orbit[1])) == 3


def test_cylinder_intervals():
    assert cylinder_interval("2") == Interval(Fraction(1, 2), Fraction(2, 3))
    assert cylinder_interval("1") == Interval(Fraction(0), Fraction(1, 2))
    assert cylinder_interval("2,3") == Interval(Fraction(5, 8), Fraction(7, 11))


def test_cylinders_contain_periodic_points():
    for w in enumerate_words(3, 4):
        I = cylinder_interval(w)
        assert periodic_point(w).xi in I


def test_potential_bounds():
    assert potential_bounds(1.0, "3") == (1 / 16, 1 / 9)
    assert potential_bounds(GeometricPotential(1.0), "1") == (1 / 4, 1.0)
    lo, hi = potential_bounds(0.5, "5")
    assert math.isclose(lo, 1 / 6) and math.isclose(hi, 1 / 5)


def test_ref_measures():
    half = Fraction(1, 2)
    assert ref_measure_mass("lebesgue", Interval(half, Fraction(3, 4))) == 0.5
    assert math.isclose(ref_measure_mass("log_density", Interval(half, Fraction(1))), 1.0)
    assert math.isclose(ref_measure_mass(RefMeasure.LEBESGUE_ON_HALF, Interval(Fraction(3, 5), Fraction(2, 3))), 2 / 15)
    with pytest.raises(DomainError):
        ref_measure_mass("lebesgue", Interval(Fraction(1, 4), Fraction(3, 4)))
    with pytest.raises(DomainError):
        RefMeasure.parse("counting")


def test_word_table_matches_exact_products():
    t = word_table(3, 4)
    for k, w in enumerate(enumerate_words(3, 4)):
        M = word_matrix(w)
        assert (t.a[k], t.b[k], t.c[k], t.d[k]) == (M.a, M.b, M.c, M.d)
    assert np.array_equal(t.digits()[7], np.array(next(iter([list(w) for i, w in enumerate(enumerate_words(3, 4)) if i == 7]))))


def test_word_table_fixed_points_and_rotation():
    t = word_table(4, 3)
    xi = t.fixed_points()
    words = list(enumerate_words(4, 3))
    for k in (0, 5, 40, 80):
        exact = float(periodic_point(words[k]).xi)
        assert abs(xi[k] - exact) < 1e-14
    rot = t.rotation_index()
    for k, w in enumerate(words):
        assert words[rot[k]] == w[1:] + w[:1]
    # T maps each orbit point to the next
    orb = t.orbits()
    y = 1.0 / (1.0 - orb[:, 0])
    assert np.allclose(y - np.floor(y), orb[:, 1], atol=1e-9)


def test_word_table_log_derivative_oracle():
    t = word_table(2, 5)
    with mpmath.workprec(128):
        for k, w in enumerate(enumerate_words(2, 5)):
            assert math.isclose(t.log_derivatives()[k], float(mpmath.log(periodic_point(w, 128).derivative)), rel_tol=1e-12, abs_tol=1e-14)


def test_chunked_tables_cover_the_full_table():
    full = word_table(5, 3)
    parts = list(iter_word_tables(5, 3, chunk=9))
    assert [s for s, _ in parts] == list(range(0, 243, 9))
    for name in "abcd":
        assert np.array_equal(np.concatenate([getattr(p, name) for _, p in parts]), getattr(full, name))

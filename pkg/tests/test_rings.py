"""Tests for exact ring arithmetic.

Sign, ordering, and floor results are cross-checked against mpmath at 80
significant digits, which is an independent numeric oracle for the ranges
exercised here.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import pytest

from pcsp.rings import (
    LatticeIdeal,
    LatticeQuotientElem,
    ModInt,
    QuadElem,
    QuadRat,
    QuadRing,
    RingMismatchError,
    SqrtExpr,
    balanced_sum,
    dense_element,
    dense_element_with_count,
    intersect_ideals,
    quad_compare,
    quad_floor,
    sqrt_bounds,
    squarefree_split,
)

mpmath.mp.dps = 80


def approx(x) -> mpmath.mpf:
    if isinstance(x, QuadElem):
        return mpmath.mpf(x.a) + mpmath.mpf(x.b) * mpmath.sqrt(x.q)
    if isinstance(x, QuadRat):
        return approx(x.num) / approx(x.den)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)
    return mpmath.mpf(x)


def rand_elem(rng, q, bound=50):
    return QuadElem(rng.randint(-bound, bound), rng.randint(-bound, bound), q)


# -- QuadElem -----------------------------------------------------------------


def test_sign_matches_numeric_oracle():
    rng = random.Random(101)
    for _ in range(10_000):
        q = rng.choice([2, 3, 5, 7, 10])
        x = rand_elem(rng, q)
        got = x.sign()
        val = approx(x)
        if x.a == 0 and x.b == 0:
            assert got == 0
        else:
            assert got == (1 if val > 0 else -1), (x, val)


def test_compare_matches_numeric_oracle():
    rng = random.Random(102)
    for _ in range(5_000):
        q = rng.choice([2, 3, 5])
        x, y = rand_elem(rng, q), rand_elem(rng, q)
        assert (x < y) == (approx(x) < approx(y))
        assert (x == y) == ((x.a, x.b) == (y.a, y.b))


def test_floor_matches_numeric_oracle():
    rng = random.Random(103)
    for _ in range(5_000):
        q = rng.choice([2, 3, 5, 11])
        x = rand_elem(rng, q, bound=10 ** 6)
        f = x.floor()
        val = approx(x)
        assert f <= val < f + 1


def test_quadelem_ring_axioms():
    rng = random.Random(104)
    for _ in range(2_000):
        q = rng.choice([2, 3, 5])
        x, y, z = (rand_elem(rng, q) for _ in range(3))
        assert (x + y) * z == x * z + y * z
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)
        assert x + (-x) == QuadElem(0, 0, q)
        assert x * QuadElem(1, 0, q) == x
        assert x.conjugate().conjugate() == x
        assert (x * y).norm() == x.norm() * y.norm()


def test_quadelem_int_interop_and_pow():
    x = QuadElem(1, 1, 2)
    assert x + 1 == QuadElem(2, 1, 2)
    assert 3 * x == QuadElem(3, 3, 2)
    assert 2 - x == QuadElem(1, -1, 2)
    assert x ** 2 == QuadElem(3, 2, 2)
    assert x ** 0 == QuadElem(1, 0, 2)
    assert QuadElem(5, 0, 2) == 5
    assert hash(QuadElem(5, 0, 2)) == hash(5)


def test_mixed_radicand_rejected():
    with pytest.raises(RingMismatchError):
        QuadElem(1, 1, 2) + QuadElem(1, 1, 3)
    with pytest.raises(ValueError):
        QuadElem(1, 1, 4)
    with pytest.raises(ValueError):
        QuadElem(1, 1, 1)


# -- QuadRat ------------------------------------------------------------------


def test_quadrat_compare_matches_numeric_oracle():
    rng = random.Random(105)
    for _ in range(3_000):
        q = rng.choice([2, 3, 5])
        dens = [rand_elem(rng, q, 8) for _ in range(2)]
        dens = [d if not d.is_zero() else QuadElem(1, 1, q) for d in dens]
        x = QuadRat(rand_elem(rng, q, 20), dens[0])
        y = QuadRat(rand_elem(rng, q, 20), dens[1])
        vx, vy = approx(x), approx(y)
        if abs(vx - vy) > mpmath.mpf("1e-60"):
            assert (x < y) == (vx < vy)
        else:
            assert x == y


def test_quadrat_floor_matches_numeric_oracle():
    rng = random.Random(106)
    for _ in range(2_000):
        q = rng.choice([2, 3, 7])
        den = rand_elem(rng, q, 9)
        if den.is_zero():
            den = QuadElem(2, 1, q)
        x = QuadRat(rand_elem(rng, q, 10 ** 4), den)
        f = x.floor()
        val = approx(x)
        assert f <= val < f + 1, (x, f, val)


def test_quadrat_field_axioms():
    rng = random.Random(107)
    one = QuadRat.promote(1, 2)
    for _ in range(1_000):
        nums = [rand_elem(rng, 2, 12) for _ in range(3)]
        dens = []
        for _ in range(3):
            d = rand_elem(rng, 2, 6)
            dens.append(d if not d.is_zero() else QuadElem(1, 1, 2))
        x, y, z = (QuadRat(n, d) for n, d in zip(nums, dens))
        assert (x + y) * z == x * z + y * z
        assert x - x == QuadRat.promote(0, 2)
        if not x.is_zero():
            assert x / x == one
        assert x * one == x


def test_quadrat_equality_not_representation():
    # 2/2 == (2 - sqrt2)(1 + sqrt2) / ((2 - sqrt2)(1 + sqrt2)) style identities
    a = QuadRat(QuadElem(2, 2, 2), QuadElem(1, 1, 2))
    b = QuadRat(QuadElem(2, 0, 2), QuadElem(1, 0, 2))
    assert a == b
    assert hash(a) == hash(b)
    assert QuadRat(QuadElem(0, 2, 2), QuadElem(0, 1, 2)) == 2


def test_quad_compare_and_floor_wrappers():
    assert quad_compare(Fraction(1, 2), Fraction(2, 3)) == -1
    assert quad_compare(QuadElem(0, 1, 2), Fraction(3, 2)) == -1
    assert quad_compare(QuadElem(0, 1, 2), QuadElem(0, 1, 2)) == 0
    assert quad_compare(3, QuadElem(0, 2, 2)) == 1
    assert quad_floor(Fraction(-7, 2)) == -4
    assert quad_floor(QuadElem(0, -1, 2)) == -2
    assert quad_floor(5) == 5


# -- QuadRing and the dense-element search ------------------------------------


def test_alpha0_reference_values():
    assert QuadRing(2).alpha0 == QuadElem(2, -1, 2)
    assert QuadRing(3).alpha0 == QuadElem(4, -2, 3)
    assert QuadRing(5).alpha0 == QuadElem(5, -2, 5)


def test_alpha0_lands_in_window():
    for q in [2, 3, 5, 6, 7, 10, 11, 13]:
        a = QuadRing(q).alpha0
        assert Fraction(1, 2) < a
        assert a < Fraction(2, 3)


def test_dense_element_random_rational_intervals():
    rng = random.Random(108)
    ring = QuadRing(2)
    for _ in range(500):
        p = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 4))
        w = Fraction(rng.randint(1, 10 ** 6), 10 ** 9)
        r = p + w
        x = dense_element(p, r, ring)
        assert quad_compare(p, x) < 0
        assert quad_compare(x, r) < 0


def test_dense_element_iteration_bound():
    ring = QuadRing(2)
    alpha = approx(ring.alpha0)
    rng = random.Random(109)
    for _ in range(500):
        scale = rng.randint(1, 60)
        p = Fraction(rng.randint(-2 ** 30, 2 ** 30), 2 ** 20)
        w = Fraction(rng.randint(1, 2 ** 10), 2 ** scale)
        x, iters = dense_element_with_count(p, p + w, ring)
        assert quad_compare(p, x) < 0 and quad_compare(x, p + w) < 0
        bound = int(mpmath.ceil(mpmath.log(approx(w)) / mpmath.log(alpha))) + 2
        assert iters <= max(bound, 2), (p, w, iters, bound)


def test_dense_element_quadratic_endpoints():
    ring = QuadRing(3)
    p = QuadElem(1, 1, 3)
    r = QuadRat(QuadElem(11, 4, 3), QuadElem(4, 0, 3))
    assert quad_compare(p, r) < 0
    x = dense_element(p, r, ring)
    assert quad_compare(p, x) < 0 and quad_compare(x, r) < 0
    # tiny interval straddling an irrational point
    p2 = QuadRat(QuadElem(0, 1, 3), QuadElem(3, 0, 3))
    r2 = p2 + Fraction(1, 10 ** 8)
    x2 = dense_element(p2, r2, ring)
    assert quad_compare(p2, x2) < 0 and quad_compare(x2, r2) < 0


def test_dense_element_rejects_empty_interval():
    with pytest.raises(ValueError):
        dense_element(Fraction(1), Fraction(1), QuadRing(2))


# -- ModInt --------------------------------------------------------------------


def test_modint_arithmetic():
    rng = random.Random(110)
    for _ in range(1_000):
        m = rng.randint(1, 30)
        a, b = rng.randint(-99, 99), rng.randint(-99, 99)
        x, y = ModInt(a, m), ModInt(b, m)
        assert (x + y).value == (a + b) % m
        assert (x - y).value == (a - b) % m
        assert (x * y).value == (a * b) % m
        assert (-x).value == (-a) % m
        assert int(x) == a % m
    with pytest.raises(RingMismatchError):
        ModInt(1, 3) + ModInt(1, 4)


# -- Lattice quotients -----------------------------------------------------------


def test_lattice_basics_diagonal():
    j = LatticeIdeal([[2, 0], [0, 4]])
    assert j.diag == (2, 4)
    assert j.index == 8
    assert j.is_ideal
    assert j.contains((2, -4))
    assert not j.contains((1, 0))
    assert len(list(j.cosets())) == 8
    assert j.canonicalize((5, 9)) == (1, 1)


def test_lattice_canonicalize_is_congruence():
    rng = random.Random(111)
    gens_pool = [
        [[2, 0], [0, 4]],
        [[3, 1], [0, 5]],
        [[4, 2], [2, 4]],
        [[7]],
        [[2, 0, 0], [0, 3, 0], [0, 0, 5]],
    ]
    for gens in gens_pool:
        j = LatticeIdeal(gens)
        b = j.dim
        for _ in range(300):
            x = tuple(rng.randint(-50, 50) for _ in range(b))
            y = tuple(rng.randint(-50, 50) for _ in range(b))
            # canonical rep differs from the vector by a lattice element
            assert j.contains(tuple(a - c for a, c in zip(x, j.canonicalize(x))))
            # compatibility with addition
            lhs = j.canonicalize(tuple(a + c for a, c in zip(x, y)))
            rhs = j.canonicalize(tuple(a + c for a, c in zip(j.canonicalize(x),
                                                             j.canonicalize(y))))
            assert lhs == rhs
            assert j.canonicalize(j.canonicalize(x)) == j.canonicalize(x)


def test_lattice_quotient_elements():
    j = LatticeIdeal([[2, 0], [0, 4]])
    x = j.element((1, 3))
    y = j.element((1, 2))
    assert (x + y).vector == (0, 1)
    assert (x - y).vector == (0, 1)
    assert (x * y).vector == (1, 2)
    assert (-y).vector == (1, 2)
    assert (x + (1, 1)).vector == (0, 0)
    assert not x.is_zero()
    assert (x - x).is_zero()


def test_lattice_multiplication_well_defined_iff_ideal():
    # diagonal: products of cosets do not depend on representatives
    j = LatticeIdeal([[2, 0], [0, 4]])
    rng = random.Random(112)
    for _ in range(200):
        x = tuple(rng.randint(-9, 9) for _ in range(2))
        y = tuple(rng.randint(-9, 9) for _ in range(2))
        sx = tuple(a + 2 * b for a, b in zip(x, (rng.randint(-3, 3), 0)))
        prod1 = j.canonicalize(tuple(a * b for a, b in zip(x, y)))
        prod2 = j.canonicalize(tuple(a * b for a, b in zip(sx, y)))
        # shifted x by (2k, 0) which lies in the lattice
        assert prod1 == prod2
    # non-diagonal HNF flags itself
    k = LatticeIdeal([[2, 1], [0, 3]])
    assert not k.is_ideal


def test_intersect_ideals():
    a = LatticeIdeal([[2, 0], [0, 4]])
    b = LatticeIdeal([[4, 0], [0, 2]])
    c = intersect_ideals([a, b])
    assert c.diag == (4, 4)
    # intersection membership agrees with pairwise membership on a grid
    d = intersect_ideals([LatticeIdeal([[3, 1], [0, 5]]), LatticeIdeal([[2, 0], [0, 2]])])
    for x in range(-10, 11):
        for y in range(-10, 11):
            want = (LatticeIdeal([[3, 1], [0, 5]]).contains((x, y))
                    and LatticeIdeal([[2, 0], [0, 2]]).contains((x, y)))
            assert d.contains((x, y)) == want


def test_lattice_not_full_rank_rejected():
    with pytest.raises(ValueError):
        LatticeIdeal([[1, 2], [2, 4]])


def test_reduce_to_coarser_lattice():
    fine = LatticeIdeal([[4, 0], [0, 4]])
    coarse = LatticeIdeal([[2, 0], [0, 2]])
    x = fine.element((3, 2))
    y = x.reduce_to(coarse)
    assert y.vector == (1, 0)
    assert y.lattice == coarse


# -- SqrtExpr -------------------------------------------------------------------


def test_squarefree_split():
    assert squarefree_split(1) == (1, 1)
    assert squarefree_split(8) == (2, 2)
    assert squarefree_split(12) == (3, 2)
    assert squarefree_split(49) == (1, 7)
    assert squarefree_split(60) == (15, 2)


def test_sqrtexpr_sign_matches_numeric_oracle():
    rng = random.Random(113)
    for _ in range(2_000):
        terms = {}
        val = mpmath.mpf(0)
        for d in rng.sample([1, 2, 3, 5, 6, 7, 10], rng.randint(1, 4)):
            c = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
            terms[d] = c
            val += approx(c) * mpmath.sqrt(d)
        e = SqrtExpr(terms)
        if abs(val) > mpmath.mpf("1e-60"):
            assert e.sign() == (1 if val > 0 else -1)


def test_sqrtexpr_zero_detection_and_folding():
    # sqrt(8) = 2 sqrt(2): built from non-squarefree input they must cancel
    a = SqrtExpr({2: Fraction(2)})
    b = SqrtExpr.from_quad(QuadElem(0, 1, 8))
    assert (a - b).is_zero()
    assert (a - b).sign() == 0
    # (sqrt2 + sqrt3)^2 == 5 + 2 sqrt6
    s = SqrtExpr({2: Fraction(1), 3: Fraction(1)})
    sq = s * s
    assert (sq - SqrtExpr({1: Fraction(5), 6: Fraction(2)})).is_zero()
    # cross-ring comparison: sqrt2 * sqrt3 < 5/2  (sqrt6 ~ 2.449)
    prod = SqrtExpr({2: Fraction(1)}) * SqrtExpr({3: Fraction(1)})
    assert (prod - Fraction(5, 2)).sign() == -1
    assert (prod - Fraction(12, 5)).sign() == 1


def test_sqrtexpr_promotion_from_quadrat():
    x = QuadRat(QuadElem(1, 1, 2), QuadElem(3, -1, 2))
    e = SqrtExpr.promote(x)
    diff = approx(x) - sum(approx(c) * mpmath.sqrt(d) for d, c in e.terms.items())
    assert abs(diff) < mpmath.mpf("1e-60")


# -- helpers ---------------------------------------------------------------------


def test_sqrt_bounds_bracket():
    for d in [2, 3, 5, 7, 1234567]:
        lo, hi = sqrt_bounds(d, 40)
        assert lo * lo <= d <= hi * hi
        assert hi - lo == Fraction(1, 2 ** 40)


def test_balanced_sum_matches_sum():
    rng = random.Random(114)
    for _ in range(100):
        xs = [Fraction(rng.randint(-99, 99), rng.randint(1, 99)) for _ in range(rng.randint(0, 40))]
        assert balanced_sum(xs, Fraction(0)) == sum(xs, Fraction(0))
    qs = [QuadElem(i, -i, 2) for i in range(10)]
    assert balanced_sum(qs, QuadElem(0, 0, 2)) == QuadElem(45, -45, 2)

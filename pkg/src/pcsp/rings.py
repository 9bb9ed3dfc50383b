"""Exact arithmetic domains for the solver toolkit.

Provides rationals (stdlib Fraction), quadratic integer rings Z[sqrt(q)] and
their fraction fields, modular integers, lattice quotients Z^b / J with
Hermite-canonical coset representatives, the dense-element search used by the
ring-feasible LP rounding, and an exact sign oracle for mixed square-root
expressions (used when partition cells compare coordinates from different
rings).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import isqrt
from typing import Iterable, Sequence, Union

from .inthnf import hnf_from_rows

Rational = Fraction


class RingMismatchError(ValueError):
    """Raised when operands belong to different rings."""


def is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


def validate_radicand(q: int) -> int:
    if not isinstance(q, int):
        raise TypeError("radicand must be an int")
    if q <= 1 or q >= 2 ** 63 or is_perfect_square(q):
        raise ValueError(f"radicand must be a non-square integer in [2, 2^63): {q}")
    return q


def sqrt_bounds(d: int, bits: int) -> tuple[Fraction, Fraction]:
    """Exact rational bounds lo <= sqrt(d) <= hi with hi - lo = 2^-bits."""
    s = isqrt(d << (2 * bits))
    return Fraction(s, 1 << bits), Fraction(s + 1, 1 << bits)


# ---------------------------------------------------------------------------
# Quadratic integers a + b*sqrt(q)
# ---------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class QuadElem:
    """Element a + b*sqrt(q) of Z[sqrt(q)], q a fixed non-square positive int."""

    a: int
    b: int
    q: int

    def __post_init__(self):
        validate_radicand(self.q)

    # -- helpers -----------------------------------------------------------

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.q != self.q:
                raise RingMismatchError(f"mixed radicands {self.q} and {other.q}")
            return other
        if isinstance(other, int):
            return QuadElem(other, 0, self.q)
        return NotImplemented  # type: ignore[return-value]

    def sign(self) -> int:
        a, b, q = self.a, self.b, self.q
        if a == 0 and b == 0:
            return 0
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        # Mixed signs: compare |a| with |b|*sqrt(q) by squaring.
        # Equality a^2 == q b^2 is impossible (q non-square, b != 0).
        if a > 0:
            return 1 if a * a > q * b * b else -1
        return 1 if q * b * b > a * a else -1

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.a - o.a, self.b - o.b, self.q)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(o.a - self.a, o.b - self.b, self.q)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadElem(self.a * o.a + self.q * self.b * o.b,
                        self.a * o.b + self.b * o.a, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.q)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers leave the ring")
        out = QuadElem(1, 0, self.q)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "QuadElem":
        return QuadElem(self.a, -self.b, self.q)

    def norm(self) -> int:
        return self.a * self.a - self.q * self.b * self.b

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadRat(self, o)

    # -- comparisons --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.a == other
        if isinstance(other, Fraction):
            return self.b == 0 and Fraction(self.a) == other
        if isinstance(other, QuadElem):
            return self.q == other.q and self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.q))

    def __lt__(self, other):
        if isinstance(other, QuadRat):
            return quad_compare(self, other) < 0
        if isinstance(other, Fraction):
            # a + b sqrt(q) < n/d  <=>  d*a + d*b sqrt(q) < n   (d > 0)
            d, n = other.denominator, other.numerator
            return QuadElem(d * self.a - n, d * self.b, self.q).sign() < 0
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def floor(self) -> int:
        if self.b == 0:
            return self.a
        s = isqrt(self.b * self.b * self.q)
        return self.a + s if self.b > 0 else self.a - s - 1

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError("irrational element")
        return Fraction(self.a)

    def __repr__(self):
        return f"QuadElem({self.a}, {self.b}, sqrt{self.q})"


@total_ordering
@dataclass(frozen=True)
class QuadRat:
    """Quotient num/den of two Z[sqrt(q)] elements, den != 0.

    Not auto-reduced: Z[sqrt(q)] has no canonical gcd in general.  Equality
    and ordering are cross-multiplicative, so representatives compare
    consistently.
    """

    num: QuadElem
    den: QuadElem

    def __post_init__(self):
        if self.num.q != self.den.q:
            raise RingMismatchError("numerator and denominator radicands differ")
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")

    @property
    def q(self) -> int:
        return self.num.q

    @staticmethod
    def promote(x, q: int) -> "QuadRat":
        if isinstance(x, QuadRat):
            if x.q != q:
                raise RingMismatchError(f"mixed radicands {x.q} and {q}")
            return x
        if isinstance(x, QuadElem):
            if x.q != q:
                raise RingMismatchError(f"mixed radicands {x.q} and {q}")
            return QuadRat(x, QuadElem(1, 0, q))
        if isinstance(x, int):
            return QuadRat(QuadElem(x, 0, q), QuadElem(1, 0, q))
        if isinstance(x, Fraction):
            return QuadRat(QuadElem(x.numerator, 0, q), QuadElem(x.denominator, 0, q))
        raise TypeError(f"cannot promote {type(x).__name__} to QuadRat")

    def sign(self) -> int:
        return self.num.sign() * self.den.sign()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    # -- arithmetic (cross-multiplication identities) ------------------------

    def __add__(self, other):
        o = QuadRat.promote(other, self.q)
        return QuadRat(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = QuadRat.promote(other, self.q)
        return QuadRat(self.num * o.den - o.num * self.den, self.den * o.den)

    def __rsub__(self, other):
        return QuadRat.promote(other, self.q) - self

    def __mul__(self, other):
        o = QuadRat.promote(other, self.q)
        return QuadRat(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QuadRat.promote(other, self.q)
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero QuadRat")
        return QuadRat(self.num * o.den, self.den * o.num)

    def __neg__(self):
        return QuadRat(-self.num, self.den)

    # -- comparisons ---------------------------------------------------------

    def __eq__(self, other):
        try:
            o = QuadRat.promote(other, self.q)
        except (TypeError, RingMismatchError):
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        # Hash via the rationalised canonical form (u + v sqrt(q)) / w.
        u, v, w = self.rationalized()
        return hash((u, v, w, self.q))

    def __lt__(self, other):
        o = QuadRat.promote(other, self.q)
        s = (self.num * o.den - o.num * self.den).sign()
        t = (self.den * o.den).sign()
        return s * t < 0

    def rationalized(self) -> tuple[Fraction, Fraction, int]:
        """Return (u, v, w) with self == (u + v*sqrt(q)) / w, w > 0, gcd-reduced."""
        conj = self.den.conjugate()
        n = self.num * conj
        w = self.den.norm()
        if w < 0:
            n, w = -n, -w
        from math import gcd
        g = gcd(gcd(abs(n.a), abs(n.b)), w)
        return n.a // g, n.b // g, w // g

    def floor(self) -> int:
        """Exact floor via interval refinement on sqrt(q)."""
        u, v, w = self.rationalized()
        if v == 0:
            return u // w
        bits = 32
        while True:
            lo, hi = sqrt_bounds(self.q, bits)
            if v > 0:
                f_lo = (Fraction(u) + v * lo) / w
                f_hi = (Fraction(u) + v * hi) / w
            else:
                f_lo = (Fraction(u) + v * hi) / w
                f_hi = (Fraction(u) + v * lo) / w
            a, b = f_lo.__floor__(), f_hi.__floor__()
            if a == b:
                return a
            bits *= 2

    def __repr__(self):
        return f"QuadRat({self.num!r} / {self.den!r})"


QuadLike = Union[int, Fraction, QuadElem, QuadRat]


def quad_compare(x: QuadLike, y: QuadLike, q: int | None = None) -> int:
    """Exact three-way comparison (-1, 0, 1) of quadratic(-rational) values."""
    if q is None:
        for v in (x, y):
            if isinstance(v, (QuadElem, QuadRat)):
                q = v.q
                break
    if q is None:
        xf, yf = Fraction(x), Fraction(y)
        return -1 if xf < yf else (0 if xf == yf else 1)
    d = QuadRat.promote(x, q) - QuadRat.promote(y, q)
    return d.sign()


def quad_floor(x: QuadLike) -> int:
    """Unique integer n with n <= x < n + 1."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.__floor__()
    return x.floor()


# ---------------------------------------------------------------------------
# Ring context with the cached dense-search base element
# ---------------------------------------------------------------------------


class QuadRing:
    """Context object for Z[sqrt(q)]: constructors plus the cached alpha0."""

    _cache: dict[int, "QuadRing"] = {}

    def __new__(cls, q: int):
        validate_radicand(q)
        inst = cls._cache.get(q)
        if inst is None:
            inst = super().__new__(cls)
            inst.q = q
            inst._alpha0 = None
            cls._cache[q] = inst
        return inst

    def elem(self, a: int, b: int = 0) -> QuadElem:
        return QuadElem(a, b, self.q)

    @property
    def zero(self) -> QuadElem:
        return QuadElem(0, 0, self.q)

    @property
    def one(self) -> QuadElem:
        return QuadElem(1, 0, self.q)

    @property
    def sqrt(self) -> QuadElem:
        return QuadElem(0, 1, self.q)

    @property
    def alpha0(self) -> QuadElem:
        """Smallest-coefficient element m + n*sqrt(q) of (1/2, 2/3).

        Scans |n| = 1, 2, ... and stops at the first level with a hit; m is
        forced by n since the window is narrower than 1.  The coefficient norm
        m^2 + n^2 grows with |n| (for |n| >= 1), so the first hit minimises it;
        ties at the same |n| break lexicographically by (norm, m, n).  For
        q = 2 this yields 2 - sqrt(2).
        """
        if self._alpha0 is None:
            lo, hi = Fraction(1, 2), Fraction(2, 3)
            half = QuadRat.promote(lo, self.q)
            root = QuadRat.promote(self.sqrt, self.q)
            for mag in range(1, 100_000):
                hits = []
                for n in (mag, -mag):
                    m = (half - n * root).floor() + 1
                    cand = QuadElem(m, n, self.q)
                    if lo < cand and cand < hi:
                        hits.append(((m * m + n * n, m, n), cand))
                if hits:
                    self._alpha0 = min(hits)[1]
                    break
            else:
                raise RuntimeError(f"no dense-search base element found for q={self.q}")
        return self._alpha0

    def __repr__(self):
        return f"QuadRing(sqrt{self.q})"


def _dense_search(p, r, ring: QuadRing) -> tuple[QuadElem, int]:
    """Element of Z[sqrt(q)] strictly inside (p, r) plus the loop count.

    Endpoints may be Fractions, QuadElems, or QuadRats of the same ring.
    The accumulation loop adds alpha0^i whenever the partial sum stays below
    the right endpoint and stops as soon as it clears the left endpoint; the
    iteration count is at most log_alpha0(r - p) + 1 after normalisation.
    """
    q = ring.q
    pp = QuadRat.promote(p, q)
    rr = QuadRat.promote(r, q)
    if not (pp < rr):
        raise ValueError("empty interval")
    zero = ring.zero
    if pp < zero and zero < rr:
        return zero, 0
    if not (zero < rr):
        e, it = _dense_search(-rr, -pp, ring)
        return -e, it
    # Now 0 <= p < r.
    f = pp.floor()
    pp = pp - f
    rr = rr - f
    one = ring.one
    if one < rr:
        return ring.elem(f + 1), 0
    alpha = ring.alpha0
    acc = zero
    power = one
    iters = 0
    while True:
        power = power * alpha
        iters += 1
        cand = acc + power
        if QuadRat.promote(cand, q) < rr:
            acc = cand
            if pp < QuadRat.promote(acc, q):
                return acc + f, iters
        if iters > 10_000:
            raise RuntimeError("dense search failed to converge")


def dense_element(p, r, ring: QuadRing) -> QuadElem:
    """Some a in Z[sqrt(q)] with p < a < r (endpoints exact, interval nonempty)."""
    return _dense_search(p, r, ring)[0]


def dense_element_with_count(p, r, ring: QuadRing) -> tuple[QuadElem, int]:
    return _dense_search(p, r, ring)


# ---------------------------------------------------------------------------
# Modular integers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModInt:
    """Residue value mod modulus, canonical representative in [0, modulus)."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> "ModInt":
        if isinstance(other, ModInt):
            if other.modulus != self.modulus:
                raise RingMismatchError("mixed moduli")
            return other
        if isinstance(other, int):
            return ModInt(other, self.modulus)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ModInt(self.value + o.value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ModInt(self.value - o.value, self.modulus)

    def __rsub__(self, other):
        o = self._coerce(other)
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ModInt(self.value * o.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return ModInt(-self.value, self.modulus)

    def __int__(self):
        return self.value


# ---------------------------------------------------------------------------
# Lattice ideals and quotient elements
# ---------------------------------------------------------------------------


class LatticeIdeal:
    """Full-rank sublattice J of Z^b given by generator vectors.

    The Hermite normal form of the generator matrix (generators as columns)
    is cached; coset representatives are canonicalised into the fundamental
    box 0 <= v_i < H[i][i].  Coset-by-coset multiplication is well defined
    exactly when J is an ideal of the product ring Z^b (diagonal HNF); it is
    computed representative-wise in general.
    """

    def __init__(self, generators: Sequence[Sequence[int]]):
        gens = [tuple(int(v) for v in g) for g in generators]
        if not gens:
            raise ValueError("no generators")
        b = len(gens[0])
        if any(len(g) != b for g in gens):
            raise ValueError("generator length mismatch")
        # Columns of the matrix are the generators: rows[i][k] = gens[k][i].
        rows = [[g[i] for g in gens] for i in range(b)]
        res = hnf_from_rows(rows, track_u=False)
        if res.rank != b:
            raise ValueError("lattice is not full rank (quotient would be infinite)")
        h = res.h_dense()
        self.dim = b
        self.hnf_rows = tuple(tuple(r[:b]) for r in h)
        self.diag = tuple(self.hnf_rows[i][i] for i in range(b))
        self.generators = tuple(gens)

    @property
    def index(self) -> int:
        out = 1
        for d in self.diag:
            out *= d
        return out

    @property
    def is_ideal(self) -> bool:
        return all(self.hnf_rows[i][j] == 0
                   for i in range(self.dim) for j in range(self.dim) if i != j)

    def canonicalize(self, vector: Sequence[int]) -> tuple[int, ...]:
        v = [int(x) for x in vector]
        if len(v) != self.dim:
            raise ValueError("vector dimension mismatch")
        for i in range(self.dim):
            t = v[i] // self.diag[i]
            if t:
                for k in range(i, self.dim):
                    v[k] -= t * self.hnf_rows[k][i]
        return tuple(v)

    def contains(self, vector: Sequence[int]) -> bool:
        return all(x == 0 for x in self.canonicalize(vector))

    def cosets(self) -> Iterable[tuple[int, ...]]:
        """All canonical representatives (the fundamental box)."""
        def rec(i: int, prefix: list[int]):
            if i == self.dim:
                yield tuple(prefix)
                return
            for v in range(self.diag[i]):
                yield from rec(i + 1, prefix + [v])
        yield from rec(0, [])

    def element(self, vector: Sequence[int]) -> "LatticeQuotientElem":
        return LatticeQuotientElem(self.canonicalize(vector), self)

    def __eq__(self, other):
        return isinstance(other, LatticeIdeal) and self.hnf_rows == other.hnf_rows

    def __hash__(self):
        return hash(self.hnf_rows)

    def __repr__(self):
        return f"LatticeIdeal(dim={self.dim}, diag={self.diag})"


def intersect_ideals(ideals: Sequence[LatticeIdeal]) -> LatticeIdeal:
    """Intersection of full-rank sublattices of the same Z^b."""
    if not ideals:
        raise ValueError("no lattices to intersect")
    b = ideals[0].dim
    if any(j.dim != b for j in ideals):
        raise ValueError("dimension mismatch")
    current = ideals[0]
    for nxt in ideals[1:]:
        # x in L1 cap L2  <=>  x = A u = B v; kernel of [A | -B] gives u.
        a_cols = [tuple(current.hnf_rows[i][k] for i in range(b)) for k in range(b)]
        b_cols = [tuple(nxt.hnf_rows[i][k] for i in range(b)) for k in range(b)]
        rows = []
        for i in range(b):
            rows.append([a_cols[k][i] for k in range(b)] + [-b_cols[k][i] for k in range(b)])
        res = hnf_from_rows(rows, track_u=True)
        gens = []
        for col in res.kernel_columns():
            u = [col.get(k, 0) for k in range(b)]
            vec = tuple(sum(a_cols[k][i] * u[k] for k in range(b)) for i in range(b))
            if any(vec):
                gens.append(vec)
        current = LatticeIdeal(gens)
    return current


@dataclass(frozen=True)
class LatticeQuotientElem:
    """Coset of Z^b modulo a full-rank lattice, stored canonically."""

    vector: tuple[int, ...]
    lattice: LatticeIdeal

    def __post_init__(self):
        object.__setattr__(self, "vector", self.lattice.canonicalize(self.vector))

    def _coerce(self, other) -> "LatticeQuotientElem":
        if isinstance(other, LatticeQuotientElem):
            if other.lattice != self.lattice:
                raise RingMismatchError("mixed lattices")
            return other
        if isinstance(other, int):
            return LatticeQuotientElem((other,) * self.lattice.dim, self.lattice)
        if isinstance(other, tuple):
            return LatticeQuotientElem(other, self.lattice)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return LatticeQuotientElem(tuple(x + y for x, y in zip(self.vector, o.vector)),
                                   self.lattice)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return LatticeQuotientElem(tuple(x - y for x, y in zip(self.vector, o.vector)),
                                   self.lattice)

    def __rsub__(self, other):
        o = self._coerce(other)
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return LatticeQuotientElem(tuple(x * y for x, y in zip(self.vector, o.vector)),
                                   self.lattice)

    __rmul__ = __mul__

    def __neg__(self):
        return LatticeQuotientElem(tuple(-x for x in self.vector), self.lattice)

    def reduce_to(self, other: LatticeIdeal) -> "LatticeQuotientElem":
        """Push the coset into a coarser quotient (other must contain the lattice)."""
        return LatticeQuotientElem(self.vector, other)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.vector)


# ---------------------------------------------------------------------------
# Balanced summation
# ---------------------------------------------------------------------------


def balanced_sum(items: Sequence, zero):
    """Sum by a balanced binary tree; keeps intermediate sizes polynomial."""
    vals = list(items)
    if not vals:
        return zero
    while len(vals) > 1:
        nxt = []
        for i in range(0, len(vals) - 1, 2):
            nxt.append(vals[i] + vals[i + 1])
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


# ---------------------------------------------------------------------------
# Exact sign oracle for sums of rational multiples of square roots
# ---------------------------------------------------------------------------


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s * k^2 with s squarefree; returns (s, k).  n >= 1."""
    s, k = 1, 1
    d = 2
    m = n
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            if e % 2:
                s *= d
            k *= d ** (e // 2)
        d += 1
    s *= m
    return s, k


_SQF_CACHE: dict[int, tuple[int, int]] = {}


def squarefree_split(n: int) -> tuple[int, int]:
    if n not in _SQF_CACHE:
        _SQF_CACHE[n] = _squarefree_split(n)
    return _SQF_CACHE[n]


class SqrtExpr:
    """Exact element of Q(sqrt(d1), sqrt(d2), ...): dict {squarefree d: coef}.

    The basis {sqrt(d) : d squarefree} is linearly independent over Q, so the
    zero test is coefficient-wise and any nonzero value has a determinable
    sign via interval refinement.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms: dict[int, Fraction] = {}
        if terms:
            for d, c in terms.items():
                if c:
                    self.terms[d] = self.terms.get(d, Fraction(0)) + c
            self.terms = {d: c for d, c in self.terms.items() if c}

    @staticmethod
    def from_rational(x) -> "SqrtExpr":
        f = Fraction(x)
        return SqrtExpr({1: f} if f else {})

    @staticmethod
    def from_quad(x: QuadElem | QuadRat) -> "SqrtExpr":
        if isinstance(x, QuadRat):
            u, v, w = x.rationalized()
            s, k = squarefree_split(x.q)
            return SqrtExpr({1: Fraction(u, w), s: Fraction(v * k, w)})
        s, k = squarefree_split(x.q)
        return SqrtExpr({1: Fraction(x.a), s: Fraction(x.b * k)})

    @staticmethod
    def promote(x) -> "SqrtExpr":
        if isinstance(x, SqrtExpr):
            return x
        if isinstance(x, (int, Fraction)):
            return SqrtExpr.from_rational(x)
        if isinstance(x, (QuadElem, QuadRat)):
            return SqrtExpr.from_quad(x)
        raise TypeError(f"cannot promote {type(x).__name__} to SqrtExpr")

    def __add__(self, other):
        o = SqrtExpr.promote(other)
        out = dict(self.terms)
        for d, c in o.terms.items():
            out[d] = out.get(d, Fraction(0)) + c
        return SqrtExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return SqrtExpr({d: -c for d, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-SqrtExpr.promote(other))

    def __rsub__(self, other):
        return SqrtExpr.promote(other) - self

    def __mul__(self, other):
        o = SqrtExpr.promote(other)
        out: dict[int, Fraction] = {}
        for d1, c1 in self.terms.items():
            for d2, c2 in o.terms.items():
                from math import gcd
                g = gcd(d1, d2)
                d = (d1 // g) * (d2 // g)
                coef = c1 * c2 * g
                out[d] = out.get(d, Fraction(0)) + coef
        return SqrtExpr(out)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def sign(self) -> int:
        if not self.terms:
            return 0
        bits = 32
        while True:
            lo = Fraction(0)
            hi = Fraction(0)
            for d, c in self.terms.items():
                if d == 1:
                    lo += c
                    hi += c
                    continue
                slo, shi = sqrt_bounds(d, bits)
                if c > 0:
                    lo += c * slo
                    hi += c * shi
                else:
                    lo += c * shi
                    hi += c * slo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
            if bits > 1 << 20:
                raise RuntimeError("sign refinement failed to converge")

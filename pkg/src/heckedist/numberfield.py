"""Exact arithmetic for Q and real quadratic fields Q(sqrt(D)).

Elements carry exact rational coordinates over the integral basis (1, w),
where w = (1+sqrt(D))/2 for D = 1 mod 4 and w = sqrt(D) otherwise.
Fractional ideals are Hermite-reduced 2-row module bases over Z together
with a positive integer denominator, so ideal equality is a structural
comparison.  Everything is immutable; nothing here uses floating point
except where explicitly noted (lattice reduction pivots, which are then
re-verified exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

from .errors import (
    DegreeUnsupported,
    NotPrime,
    NotSquarefree,
    ZeroArgument,
    ZeroIdeal,
)

Rat = Union[int, Fraction]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with g = gcd(a, b) = s*a + t*b, g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def is_rational_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def rational_primes_upto(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p :: p] = b"\x00" * len(range(p * p, bound + 1, p))
    return [p for p in range(2, bound + 1) if sieve[p]]


def _sqrt_mod_prime(n: int, p: int) -> Optional[int]:
    """Square root of n mod p (p prime), or None.  Tonelli-Shanks."""
    n %= p
    if n == 0:
        return 0
    if p == 2:
        return n
    if pow(n, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 1, (t * t) % p
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        r = (r * b) % p
        c = (b * b) % p
        t = (t * c) % p
        m = i
    return r


# ---------------------------------------------------------------------------
# Fields


class Field:
    """Q (degree 1) or a real quadratic field Q(sqrt(D)) (degree 2).

    For degree 2 the integral basis is (1, w); w satisfies
    w^2 = t*w - n with t = Tr(w), n = N(w).  The fundamental unit is
    constructed from the continued fraction of (disc mod 2 + sqrt(disc))/2.
    """

    def __init__(self, degree: int, D: Optional[int]):
        self.degree = degree
        self.D = D
        self._cache: dict = {}
        if degree == 1:
            self.disc = 1
            self.omega_trace = 0
            self.omega_norm = 0
            self.fundamental_unit = None
            self.unit_norm = None
            return
        assert D is not None
        if D % 4 == 1:
            self.disc = D
            self.omega_trace = 1
            self.omega_norm = (1 - D) // 4
        else:
            self.disc = 4 * D
            self.omega_trace = 0
            self.omega_norm = -D
        self.fundamental_unit = _fundamental_unit_by_continued_fraction(self)
        self.unit_norm = int(self.fundamental_unit.norm())

    # basic constructors ----------------------------------------------------

    def element(self, x: Rat, y: Rat = 0) -> "FieldElement":
        return FieldElement(self, Fraction(x), Fraction(y))

    def zero(self) -> "FieldElement":
        return self.element(0)

    def one(self) -> "FieldElement":
        return self.element(1)

    def omega(self) -> "FieldElement":
        if self.degree == 1:
            raise DegreeUnsupported("Q has no quadratic generator")
        return self.element(0, 1)

    def sqrt_D(self) -> "FieldElement":
        """sqrt(D) expressed in the integral basis."""
        if self.degree == 1:
            raise DegreeUnsupported("Q has no quadratic generator")
        if self.D % 4 == 1:
            return self.element(-1, 2)  # 2w - 1
        return self.omega()

    def unit_ideal(self) -> "FractionalIdeal":
        return ideal_from_elements(self, [self.one()])

    def ideal(self, *gens) -> "FractionalIdeal":
        elems = [g if isinstance(g, FieldElement) else self.element(g) for g in gens]
        return ideal_from_elements(self, elems)

    # embeddings --------------------------------------------------------------

    def omega_embeddings(self) -> tuple[float, ...]:
        if self.degree == 1:
            return ()
        r = math.sqrt(self.D)
        if self.D % 4 == 1:
            return ((1 + r) / 2, (1 - r) / 2)
        return (r, -r)

    def minkowski_bound(self) -> int:
        if self.degree == 1:
            return 1
        return math.isqrt(self.disc) // 2 + 1

    def __repr__(self):
        if self.degree == 1:
            return "Field(Q)"
        return f"Field(Q(sqrt({self.D})))"

    def __eq__(self, other):
        return isinstance(other, Field) and (self.degree, self.D) == (other.degree, other.D)

    def __hash__(self):
        return hash((self.degree, self.D))

    # cached expensive invariants ----------------------------------------------

    def class_group(self, narrow: bool = False) -> "ClassGroupDescription":
        return class_group(self, narrow)


@lru_cache(maxsize=None)
def make_field(D) -> Field:
    """Build Q (D == "rational") or Q(sqrt(D)) for squarefree D > 1."""
    if D == "rational" or D == 1:
        return Field(1, None)
    if not isinstance(D, int):
        raise DegreeUnsupported(f"unsupported field spec {D!r}")
    if D <= 1:
        raise DegreeUnsupported(f"need a squarefree integer > 1, got {D}")
    if not is_squarefree(D):
        raise NotSquarefree(f"{D} is not squarefree")
    return Field(2, D)


# ---------------------------------------------------------------------------
# Elements


class FieldElement:
    """x + y*w with exact rational coordinates (y = 0 over Q)."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field: Field, x: Fraction, y: Fraction = Fraction(0)):
        if field.degree == 1 and y != 0:
            raise DegreeUnsupported("Q elements have no w-coordinate")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "x", Fraction(x))
        object.__setattr__(self, "y", Fraction(y))

    def __setattr__(self, *a):
        raise AttributeError("FieldElement is immutable")

    # ring structure -------------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        return FieldElement(self.field, Fraction(other))

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.field.degree == 1:
            return FieldElement(self.field, self.x * o.x)
        t, n = self.field.omega_trace, self.field.omega_norm
        # (x1 + y1 w)(x2 + y2 w) with w^2 = t*w - n
        x = self.x * o.x - n * self.y * o.y
        y = self.x * o.y + self.y * o.x + t * self.y * o.y
        return FieldElement(self.field, x, y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero field element")
        if self.field.degree == 1:
            return FieldElement(self.field, self.x / o.x)
        nrm = o.norm()
        return self * o.conjugate() * FieldElement(self.field, 1 / nrm)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return (self.field.one() / self) ** (-k)
        out = self.field.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (ValueError, TypeError):
            return NotImplemented
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.field, self.x, self.y))

    # maps -------------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def conjugate(self) -> "FieldElement":
        if self.field.degree == 1:
            return self
        t = self.field.omega_trace
        return FieldElement(self.field, self.x + t * self.y, -self.y)

    def trace(self) -> Fraction:
        if self.field.degree == 1:
            return self.x
        return 2 * self.x + self.field.omega_trace * self.y

    def norm(self) -> Fraction:
        if self.field.degree == 1:
            return self.x
        t, n = self.field.omega_trace, self.field.omega_norm
        return self.x * self.x + t * self.x * self.y + n * self.y * self.y

    def embeddings(self) -> tuple[float, ...]:
        if self.field.degree == 1:
            return (float(self.x),)
        w1, w2 = self.field.omega_embeddings()
        return (float(self.x) + float(self.y) * w1, float(self.x) + float(self.y) * w2)

    def _sqrtD_coords(self) -> tuple[Fraction, Fraction]:
        """(A, B) with value A + B*sqrt(D); (x, 0) over Q."""
        if self.field.degree == 1:
            return (self.x, Fraction(0))
        if self.field.D % 4 == 1:
            return (self.x + self.y / 2, self.y / 2)
        return (self.x, self.y)

    def sign_at(self, j: int) -> int:
        """Exact sign of the j-th embedding (j = 0 or 1)."""
        a, b = self._sqrtD_coords()
        if j == 1:
            b = -b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 against b^2 * D
        big = a * a > b * b * self.field.D
        return (1 if a > 0 else -1) if big else (1 if b > 0 else -1)

    def is_totally_positive(self) -> bool:
        if self.field.degree == 1:
            return self.x > 0
        return self.sign_at(0) > 0 and self.sign_at(1) > 0

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def is_unit(self) -> bool:
        return self.is_integral() and abs(self.norm()) == 1

    def to_json(self) -> dict:
        return {"x": str(self.x), "y": str(self.y)}

    def __repr__(self):
        if self.field.degree == 1:
            return f"Elem({self.x})"
        return f"Elem({self.x} + {self.y}*w; D={self.field.D})"


def element_from_json(field: Field, obj: dict) -> FieldElement:
    return field.element(Fraction(obj["x"]), Fraction(obj.get("y", "0")))


def elem_maps(e: FieldElement) -> tuple[Fraction, Fraction, tuple[float, ...], bool]:
    """(trace, norm, embeddings, totally_positive) of an element."""
    return (e.trace(), e.norm(), e.embeddings(), e.is_totally_positive())


# ---------------------------------------------------------------------------
# Fractional ideals


def _hnf_rows_deg2(rows: Iterable[tuple[int, int]]) -> tuple[int, int, int]:
    """Hermite form of the Z-module spanned by rows (u, v) ~ u + v*w.

    Returns (a, b, c) describing Z*a + Z*(b + c*w) with a, c > 0 and
    0 <= b < a for full-rank modules; zero entries signal lower rank.
    """
    ints: list[int] = []
    cur: Optional[tuple[int, int]] = None
    for (u, v) in rows:
        if u == 0 and v == 0:
            continue
        if v == 0:
            ints.append(u)
            continue
        if cur is None:
            cur = (u, v)
            continue
        u1, v1 = cur
        g, s, t = _xgcd(v1, v)
        ints.append(u1 * (v // g) - u * (v1 // g))
        cur = (s * u1 + t * u, g)
    if cur is None:
        a = 0
        for u in ints:
            a = math.gcd(a, u)
        return (a, 0, 0)
    b, c = cur
    if c < 0:
        b, c = -b, -c
    a = 0
    for u in ints:
        a = math.gcd(a, u)
    if a:
        b %= a
    return (a, b, c)


class FractionalIdeal:
    """Fractional ideal as (integral HNF module) / (positive denominator).

    Degree 2 stores (a, b, c): the module Z*a + Z*(b + c*w); degree 1
    stores (a,).  Canonical form has the denominator minimal, making
    equality a plain tuple comparison.
    """

    __slots__ = ("field", "den", "hnf")

    def __init__(self, field: Field, den: int, hnf: tuple[int, ...], _canonical=False):
        if den <= 0:
            raise ValueError("denominator must be positive")
        if not _canonical:
            den, hnf = _canonicalize(field, den, hnf)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "hnf", hnf)

    def __setattr__(self, *a):
        raise AttributeError("FractionalIdeal is immutable")

    # structure ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.hnf)

    def is_integral(self) -> bool:
        return self.den == 1

    def basis_elements(self) -> tuple[FieldElement, ...]:
        """Module generators of the ideal over Z (exact field elements)."""
        f = self.field
        d = Fraction(1, self.den)
        if f.degree == 1:
            return (f.element(self.hnf[0] * d),)
        a, b, c = self.hnf
        return (f.element(a * d), f.element(b * d, c * d))

    def norm(self) -> Fraction:
        if self.is_zero():
            raise ZeroIdeal("norm of zero ideal")
        if self.field.degree == 1:
            return Fraction(self.hnf[0], self.den)
        a, _, c = self.hnf
        return Fraction(a * c, self.den * self.den)

    def __eq__(self, other):
        if not isinstance(other, FractionalIdeal):
            return NotImplemented
        return self.field == other.field and self.den == other.den and self.hnf == other.hnf

    def __hash__(self):
        return hash((self.field, self.den, self.hnf))

    def __repr__(self):
        return f"Ideal(den={self.den}, basis={self.hnf})"

    def to_json(self) -> dict:
        if self.field.degree == 1:
            return {"den": self.den, "basis": [[self.hnf[0], 0], [0, 0]]}
        a, b, c = self.hnf
        return {"den": self.den, "basis": [[a, 0], [b, c]]}

    # arithmetic ---------------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            other = ideal_from_elements(self.field, [other])
        if not isinstance(other, FractionalIdeal):
            return NotImplemented
        if self.field != other.field:
            raise ValueError("ideals of different fields")
        if self.is_zero() or other.is_zero():
            return _zero_ideal(self.field)
        gens = []
        for e1 in self.basis_elements():
            for e2 in other.basis_elements():
                gens.append(e1 * e2)
        return ideal_from_elements(self.field, gens)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.unit_ideal()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __add__(self, other):
        """Ideal sum = gcd."""
        if self.field != other.field:
            raise ValueError("ideals of different fields")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        gens = list(self.basis_elements()) + list(other.basis_elements())
        return ideal_from_elements(self.field, gens)

    def conjugate(self) -> "FractionalIdeal":
        if self.field.degree == 1:
            return self
        return ideal_from_elements(self.field, [e.conjugate() for e in self.basis_elements()])

    def inverse(self) -> "FractionalIdeal":
        if self.is_zero():
            raise ZeroIdeal("inverse of zero ideal")
        f = self.field
        if f.degree == 1:
            return FractionalIdeal(f, self.hnf[0], (self.den,))
        # M * conj(M) = N(M) * O for the integral part M, so
        # (M/den)^-1 = den * conj(M) / (a*c)
        a, _, c = self.hnf
        conj_m = FractionalIdeal(f, 1, self.hnf, _canonical=True).conjugate()
        assert conj_m.den == 1
        scaled = tuple(v * self.den for v in conj_m.hnf)
        return FractionalIdeal(f, a * c, scaled)

    def contains(self, e: FieldElement) -> bool:
        if e.field != self.field:
            raise ValueError("element of a different field")
        if e.is_zero():
            return True
        if self.is_zero():
            return False
        x = e.x * self.den
        y = e.y * self.den
        if x.denominator != 1 or y.denominator != 1:
            return False
        if self.field.degree == 1:
            return int(x) % self.hnf[0] == 0
        a, b, c = self.hnf
        xi, yi = int(x), int(y)
        if yi % c:
            return False
        j = yi // c
        return (xi - j * b) % a == 0

    def contains_ideal(self, other: "FractionalIdeal") -> bool:
        return all(self.contains(e) for e in other.basis_elements())

    def element_coords(self, e: FieldElement) -> tuple[int, ...]:
        """Coordinates of e in the ideal's Z-basis; raises if e not a member."""
        if not self.contains(e):
            raise ValueError("element not in ideal")
        x = int(e.x * self.den)
        if self.field.degree == 1:
            return (x // self.hnf[0],)
        y = int(e.y * self.den)
        a, b, c = self.hnf
        j = y // c
        i = (x - j * b) // a
        return (i, j)


def _canonicalize(field: Field, den: int, hnf: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    if all(v == 0 for v in hnf):
        return 1, hnf
    if field.degree == 1:
        a = abs(hnf[0])
        g = math.gcd(den, a)
        return den // g, (a // g,)
    a, b, c = hnf
    content = math.gcd(a, math.gcd(b, c))
    g = math.gcd(den, content)
    return den // g, (a // g, b // g, c // g)


def _zero_ideal(field: Field) -> FractionalIdeal:
    hnf = (0,) if field.degree == 1 else (0, 0, 0)
    return FractionalIdeal(field, 1, hnf, _canonical=True)


def _divide(I: FractionalIdeal, q: Fraction) -> FractionalIdeal:
    """I / q for a positive rational q."""
    num, den = q.numerator, q.denominator
    scaled = tuple(v * den for v in I.hnf)
    return FractionalIdeal(I.field, I.den * num, scaled)


def ideal_from_elements(field: Field, elems: Iterable[FieldElement]) -> FractionalIdeal:
    """The fractional O_F-ideal generated by the given elements."""
    elems = [e for e in elems if not e.is_zero()]
    if not elems:
        return _zero_ideal(field)
    if field.degree == 1:
        den = 1
        for e in elems:
            den = den * e.x.denominator // math.gcd(den, e.x.denominator)
        a = 0
        for e in elems:
            a = math.gcd(a, int(e.x * den))
        return FractionalIdeal(field, den, (a,))
    w = field.omega()
    gens: list[FieldElement] = []
    for e in elems:
        gens.append(e)
        gens.append(e * w)
    den = 1
    for e in gens:
        for fr in (e.x, e.y):
            den = den * fr.denominator // math.gcd(den, fr.denominator)
    rows = [(int(e.x * den), int(e.y * den)) for e in gens]
    a, b, c = _hnf_rows_deg2(rows)
    if a == 0 or c == 0:
        raise ZeroIdeal("degenerate module is not a fractional ideal")
    # O_F-stability forces c | a and c | b
    assert a % c == 0 and b % c == 0, "module basis is not an ideal"
    return FractionalIdeal(field, den, (a, b, c))


def ideal_from_json(field: Field, obj: dict) -> FractionalIdeal:
    rows = obj["basis"]
    den = int(obj["den"])
    if field.degree == 1:
        return FractionalIdeal(field, den, (int(rows[0][0]),))
    elems = [field.element(Fraction(r[0], den), Fraction(r[1], den)) for r in rows]
    return ideal_from_elements(field, elems)


def ideal_arith(op: str, *args):
    """Dispatch helper: product, inverse, norm, sum, membership."""
    if op == "product":
        return args[0] * args[1]
    if op == "inverse":
        return args[0].inverse()
    if op == "norm":
        return args[0].norm()
    if op == "sum":
        return args[0] + args[1]
    if op == "membership":
        ideal, elem = args
        return ideal.contains(elem)
    raise ValueError(f"unknown ideal op {op!r}")


# ---------------------------------------------------------------------------
# Quotients O-module style (shared by the residue and coset machinery)


class QuotientModule:
    """Finite quotient L/Lsub of two fractional ideals with Lsub contained in L."""

    def __init__(self, L: FractionalIdeal, Lsub: FractionalIdeal):
        if L.field != Lsub.field:
            raise ValueError("ideals of different fields")
        if not L.contains_ideal(Lsub):
            raise ValueError("Lsub is not contained in L")
        self.L = L
        self.Lsub = Lsub
        self.field = L.field
        coords = [L.element_coords(e) for e in Lsub.basis_elements()]
        if self.field.degree == 1:
            self._a1 = abs(coords[0][0])
            self._b1, self._c1 = 0, 1
            self.index = self._a1
        else:
            a1, b1, c1 = _hnf_rows_deg2(coords)
            assert a1 > 0 and c1 > 0, "quotient is not finite"
            self._a1, self._b1, self._c1 = a1, b1, c1
            self.index = a1 * c1

    @property
    def shape(self) -> tuple[int, int]:
        """Cyclic ranges (a1, c1) of the canonical coordinates."""
        return (self._a1, self._c1)

    def representatives(self) -> list[FieldElement]:
        b = self.L.basis_elements()
        out = []
        if self.field.degree == 1:
            for i in range(self._a1):
                out.append(b[0] * i)
            return out
        for i in range(self._a1):
            for j in range(self._c1):
                out.append(b[0] * i + b[1] * j)
        return out

    def key(self, e: FieldElement) -> tuple[int, ...]:
        """Canonical coordinates of the coset of e (e must lie in L)."""
        co = self.L.element_coords(e)
        if self.field.degree == 1:
            return (co[0] % self._a1,)
        i, j = co
        q, j = divmod(j, self._c1)
        i -= q * self._b1
        return (i % self._a1, j)

    def reduce(self, e: FieldElement) -> FieldElement:
        k = self.key(e)
        b = self.L.basis_elements()
        if self.field.degree == 1:
            return b[0] * k[0]
        return b[0] * k[0] + b[1] * k[1]

    def same_coset(self, e1: FieldElement, e2: FieldElement) -> bool:
        return self.Lsub.contains(e1 - e2)


# ---------------------------------------------------------------------------
# Splitting of rational primes


@dataclass(frozen=True)
class PrimeFactorization:
    p: int
    tag: str  # "split" | "inert" | "ramified"
    primes: tuple[FractionalIdeal, ...]
    residue_degrees: tuple[int, ...]


def prime_splitting_type(field: Field, p: int) -> str:
    """Splitting tag of p without constructing ideals (fast path)."""
    if not is_rational_prime(p):
        raise NotPrime(f"{p} is not prime")
    if field.degree == 1:
        return "inert"
    if field.disc % p == 0:
        return "ramified"
    if p == 2:
        # disc odd here, so D = 1 mod 4; split iff D = 1 mod 8
        return "split" if field.D % 8 == 1 else "inert"
    return "split" if pow(field.disc, (p - 1) // 2, p) == 1 else "inert"


def factor_rational_prime(field: Field, p: int) -> PrimeFactorization:
    """Factor (p) into prime ideals via roots of x^2 - t x + n mod p."""
    tag = prime_splitting_type(field, p)
    if field.degree == 1:
        return PrimeFactorization(p, "inert", (field.ideal(p),), (1,))
    t, n = field.omega_trace, field.omega_norm
    if tag == "inert":
        return PrimeFactorization(p, tag, (field.ideal(p),), (2,))
    # split or ramified: find a root of x^2 - t x + n mod p
    if p == 2:
        roots = [r for r in (0, 1) if (r * r - t * r + n) % 2 == 0]
    else:
        inv2 = pow(2, p - 2, p)
        s = _sqrt_mod_prime((t * t - 4 * n) % p, p)
        assert s is not None
        roots = sorted({(t + s) * inv2 % p, (t - s) * inv2 % p})
    w = field.omega()
    ideals = tuple(field.ideal(field.element(p), w - r) for r in roots)
    if tag == "ramified":
        assert len(ideals) == 1
        return PrimeFactorization(p, tag, ideals, (1,))
    assert len(ideals) == 2
    return PrimeFactorization(p, tag, ideals, (1, 1))


def is_prime_ideal(I: FractionalIdeal) -> bool:
    if I.is_zero() or not I.is_integral():
        return False
    nrm = int(I.norm())
    if is_rational_prime(nrm):
        return True
    r = math.isqrt(nrm)
    if r * r != nrm or not is_rational_prime(r):
        return False
    return prime_splitting_type(I.field, r) == "inert" and I == I.field.ideal(r)


def prime_ideals_of_norm_upto(field: Field, bound: int) -> list[FractionalIdeal]:
    """All prime ideals with norm <= bound, ascending by norm."""
    out = []
    for p in rational_primes_upto(bound):
        fac = factor_rational_prime(field, p)
        for P in fac.primes:
            if P.norm() <= bound:
                out.append(P)
    out.sort(key=lambda P: (P.norm(), P.hnf))
    return out


# ---------------------------------------------------------------------------
# Valuations


def _rational_factorization(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def ideal_valuation(arg, P: FractionalIdeal) -> int:
    """v_P of a nonzero element or fractional ideal at a prime ideal P."""
    if not is_prime_ideal(P):
        raise NotPrime("valuation requires a prime ideal")
    field = P.field
    if isinstance(arg, FieldElement):
        if arg.is_zero():
            raise ZeroArgument("valuation of zero")
        arg = ideal_from_elements(field, [arg])
    if arg.is_zero():
        raise ZeroArgument("valuation of zero ideal")
    p = min(_rational_factorization(int(P.norm())))
    ram = 2 if prime_splitting_type(field, p) == "ramified" else 1
    den_val = ram * _rational_factorization(arg.den).get(p, 0)
    # integral part: largest j with M contained in P^j
    M = FractionalIdeal(field, 1, arg.hnf)
    j = 0
    Pj = P
    while Pj.contains_ideal(M):
        j += 1
        Pj = Pj * P
    return j - den_val


# ---------------------------------------------------------------------------
# Different


def different_ideal(field: Field) -> FractionalIdeal:
    """The different; its trace-dual inverse satisfies S(x*O) in Z."""
    if field.degree == 1:
        return field.unit_ideal()
    t = field.omega_trace
    return field.ideal(field.element(-t, 2))  # f'(w) = 2w - t


def trace_dual_module(field: Field) -> FractionalIdeal:
    """{x : S(x*O) in Z} computed from the trace pairing (oracle path)."""
    if field.degree == 1:
        return field.unit_ideal()
    one, w = field.one(), field.omega()
    # Gram matrix of the trace pairing on (1, w)
    g11, g12 = one.trace(), w.trace()
    g22 = (w * w).trace()
    det = g11 * g22 - g12 * g12
    # dual basis rows = inverse Gram applied to (1, w)
    d1 = one * (g22 / det) + w * (-g12 / det)
    d2 = one * (-g12 / det) + w * (g11 / det)
    return ideal_from_elements(field, [d1, d2])


# ---------------------------------------------------------------------------
# Fundamental unit (continued fraction of (disc mod 2 + sqrt(disc))/2)


def _fundamental_unit_by_continued_fraction(field: Field) -> FieldElement:
    Delta = field.disc
    sq = math.isqrt(Delta)
    P, Q = Delta % 2, 2
    states: list[tuple[int, int]] = []
    quots: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    while (P, Q) not in seen:
        seen[(P, Q)] = len(states)
        states.append((P, Q))
        assert Q > 0
        a = (P + sq) // Q
        quots.append(a)
        P1 = a * Q - P
        Q1 = (Delta - P1 * P1) // Q
        P, Q = P1, Q1
    k0 = seen[(P, Q)]
    cycle = quots[k0:]
    P0, Q0 = states[k0]
    # beta = (P0 + sqrt(Delta))/Q0; one period gives the fundamental automorphism
    q_prev, q_prev2 = 0, 1  # q_{-1}, q_{-2}
    for a in cycle:
        q_prev, q_prev2 = a * q_prev + q_prev2, q_prev
    # unit = q_{m-1} * beta + q_{m-2}
    t = field.omega_trace
    sqrt_delta = field.element(Fraction(-t), Fraction(2))  # 2w - t = sqrt(disc)
    beta = (field.element(P0) + sqrt_delta) / field.element(Q0)
    eps = beta * q_prev + field.element(q_prev2)
    assert eps.is_integral() and abs(eps.norm()) == 1, "continued fraction did not yield a unit"
    if eps.sign_at(0) < 0:
        eps = -eps
    if eps.embeddings()[0] < 1:
        inv = eps.conjugate() * Fraction(int(eps.norm()))  # 1/eps up to sign
        eps = inv if inv.sign_at(0) > 0 else -inv
    assert eps.embeddings()[0] > 1
    return eps


# ---------------------------------------------------------------------------
# Generators, principality, class groups


def _norm_form_candidates(field: Field, N: int, y_bound: int):
    """Elements x + y*w with |norm| == N and 0 <= y <= y_bound (up to sign)."""
    Delta, t = field.disc, field.omega_trace
    for y in range(0, y_bound + 1):
        base = Delta * y * y
        for s4 in (4 * N, -4 * N):
            u2 = base + s4
            if u2 < 0:
                continue
            u = math.isqrt(u2)
            if u * u != u2:
                continue
            for uu in ((u, -u) if u else (0,)):
                if (uu - t * y) % 2:
                    continue
                yield field.element((uu - t * y) // 2, y)


def find_generator(M: FractionalIdeal, slack: int = 3) -> Optional[FieldElement]:
    """A generator of the integral ideal M, or None if M is not principal.

    Search window: a generator balanced across the two embeddings has
    |y| <= 2*sqrt(N*eps0)/sqrt(disc); candidates come from the Pell-type
    equation u^2 - disc*y^2 = +-4N and are verified by exact membership.
    """
    field = M.field
    if M.is_zero():
        raise ZeroIdeal("generator of zero ideal")
    if field.degree == 1:
        return field.element(M.hnf[0])
    N = int(M.norm())
    eps0 = field.fundamental_unit.embeddings()[0]
    yb = int(2.0 * math.sqrt(N * eps0) / math.sqrt(field.disc)) + slack
    for cand in _norm_form_candidates(field, N, yb):
        if M.contains(cand):
            return cand
    return None


def totally_positive_adjust(g: FieldElement, window: int = 8) -> Optional[FieldElement]:
    """Search sigma * g * eps0^k, |k| <= window, sigma = +-1, for total positivity.

    k is scanned by increasing |k| so the smallest adjustment wins.
    """
    field = g.field
    if field.degree == 1:
        return g if g.x > 0 else -g
    eps = field.fundamental_unit
    ks = [0]
    for k in range(1, window + 1):
        ks.extend((k, -k))
    for k in ks:
        cand = g * eps**k
        if cand.is_totally_positive():
            return cand
        if (-cand).is_totally_positive():
            return -cand
    return None


def principal_totally_positive_generator(
    I: FractionalIdeal, window: int = 8
) -> Optional[FieldElement]:
    """eta with (eta) = I and eta totally positive, or None."""
    if I.is_zero():
        raise ZeroIdeal("zero ideal has no generator")
    M = FractionalIdeal(I.field, 1, I.hnf)
    g = find_generator(M)
    if g is None:
        return None
    g = totally_positive_adjust(g, window)
    if g is None:
        return None
    return g / I.den


def is_principal(M: FractionalIdeal, narrow: bool = False) -> bool:
    g = find_generator(FractionalIdeal(M.field, 1, M.hnf))
    if g is None:
        return False
    if not narrow:
        return True
    return totally_positive_adjust(g) is not None


def _short_vector(M: FractionalIdeal) -> FieldElement:
    """A short nonzero element of an integral ideal (Lagrange-Gauss, float pivots)."""
    g1, g2 = M.basis_elements()
    v = [list(g1.embeddings()), list(g2.embeddings())]
    co = [[1, 0], [0, 1]]

    def dot(p, q):
        return p[0] * q[0] + p[1] * q[1]

    for _ in range(64):
        if dot(v[1], v[1]) < dot(v[0], v[0]):
            v[0], v[1] = v[1], v[0]
            co[0], co[1] = co[1], co[0]
        m = round(dot(v[0], v[1]) / dot(v[0], v[0]))
        if m == 0:
            break
        v[1] = [v[1][k] - m * v[0][k] for k in range(2)]
        co[1] = [co[1][k] - m * co[0][k] for k in range(2)]
    cands = [co[0], co[1], [co[0][0] + co[1][0], co[0][1] + co[1][1]],
             [co[0][0] - co[1][0], co[0][1] - co[1][1]]]
    best = None
    for i, j in cands:
        e = g1 * i + g2 * j
        if e.is_zero():
            continue
        key = abs(e.norm())
        if best is None or key < best[0]:
            best = (key, e)
    assert best is not None
    return best[1]


def _inverse_reduce(M: FractionalIdeal, narrow: bool = False) -> FractionalIdeal:
    """Integral ideal of small norm in the inverse class of M.

    In narrow mode the scaling element is forced totally positive (falling
    back to alpha*sqrt(D), which flips the norm sign), so the narrow class
    is mapped exactly to its inverse.
    """
    field = M.field
    alpha = _short_vector(M)
    if narrow:
        adjusted = totally_positive_adjust(alpha)
        if adjusted is None:
            adjusted = totally_positive_adjust(alpha * field.sqrt_D())
            assert adjusted is not None
        alpha = adjusted
    R = ideal_from_elements(field, [alpha]) * M.inverse()
    assert R.is_integral()
    return R


def reduce_in_class(M: FractionalIdeal, narrow: bool = False) -> FractionalIdeal:
    """Small-norm integral ideal in the same (narrow) class of M."""
    return _inverse_reduce(_inverse_reduce(M, narrow), narrow)


@dataclass(frozen=True)
class ClassGroupDescription:
    order: int
    narrow_order: int
    cyclic_factors: tuple[int, ...]
    representatives: tuple[FractionalIdeal, ...]
    narrow: bool


def _same_class(A: FractionalIdeal, B: FractionalIdeal, narrow: bool) -> bool:
    return is_principal(A * B.conjugate(), narrow=narrow)


def _class_structure(field: Field, narrow: bool):
    """(order, cyclic_factors, representatives) by relation resolution."""
    O = field.unit_ideal()
    if field.degree == 1:
        return 1, (), (O,)
    gen_bound = field.minkowski_bound()
    gens = [P for P in prime_ideals_of_norm_upto(field, gen_bound)]
    if narrow:
        for p in sorted(_rational_factorization(field.disc)):
            fac = factor_rational_prime(field, p)
            gens.extend(fac.primes)
    reps: list[FractionalIdeal] = [O]

    def cls_of(M: FractionalIdeal) -> int:
        M = reduce_in_class(M, narrow)
        for i, R in enumerate(reps):
            if _same_class(M, R, narrow):
                return i
        reps.append(M)
        return len(reps) - 1

    gen_cls = sorted({cls_of(P) for P in gens})
    # close the group under multiplication by generator classes
    frontier = [0]
    seen = {0}
    while frontier:
        i = frontier.pop()
        for g in gen_cls:
            k = cls_of(reps[i] * reps[g])
            if k not in seen:
                seen.add(k)
                frontier.append(k)
    h = len(reps)
    # multiplication table and the abelian invariant factors
    table = [[cls_of(reps[i] * reps[j]) for j in range(h)] for i in range(h)]
    factors = _abelian_invariants(table)
    return h, tuple(factors), tuple(reps)


def _abelian_invariants(table: list[list[int]]) -> list[int]:
    """Invariant factors of a finite abelian group given by its table."""
    n = len(table)
    if n == 1:
        return []

    def order_of(g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = table[x][g]
            k += 1
        return k

    elems = list(range(n))
    orders = {g: order_of(g) for g in elems}
    m = max(orders.values())
    g = next(e for e in elems if orders[e] == m)
    # subgroup generated by g, then recurse on the quotient
    sub = []
    x = g
    while True:
        sub.append(x)
        if x == 0:
            break
        x = table[x][g]
    subset = set(sub)
    cosets: list[frozenset] = []
    elem_to_coset: dict[int, int] = {}
    for e in elems:
        if e in elem_to_coset:
            continue
        coset = frozenset(table[e][s] for s in subset)
        idx = len(cosets)
        cosets.append(coset)
        for member in coset:
            elem_to_coset[member] = idx
    q = len(cosets)
    qtable = [[0] * q for _ in range(q)]
    reps_c = [min(c) for c in cosets]
    for i in range(q):
        for j in range(q):
            qtable[i][j] = elem_to_coset[table[reps_c[i]][reps_c[j]]]
    zero_idx = elem_to_coset[0]
    if zero_idx != 0:
        # relabel so identity coset is index 0
        perm = list(range(q))
        perm[0], perm[zero_idx] = perm[zero_idx], perm[0]
        inv = {v: i for i, v in enumerate(perm)}
        qtable = [[inv[qtable[perm[i]][perm[j]]] for j in range(q)] for i in range(q)]
    rest = _abelian_invariants(qtable)
    return [m] + rest


def class_group(field: Field, narrow: bool = False) -> ClassGroupDescription:
    key = ("class_group", narrow)
    if key not in field._cache:
        for variant in (False, True):
            if ("struct", variant) not in field._cache:
                field._cache[("struct", variant)] = _class_structure(field, variant)
        h, _f0, _r0 = field._cache[("struct", False)]
        hp, _f1, _r1 = field._cache[("struct", True)]
        fac, reps = (_f1, _r1) if narrow else (_f0, _r0)
        field._cache[key] = ClassGroupDescription(
            order=h,
            narrow_order=hp,
            cyclic_factors=fac,
            representatives=reps,
            narrow=narrow,
        )
    return field._cache[key]


def _abs_embedding_cmp(e: FieldElement) -> int:
    """Exact sign of |e_1| - |e_2| for the two real embeddings."""
    a, b = e._sqrtD_coords()
    # e_1^2 - e_2^2 = 4ab*sqrt(D), so the comparison is the sign of a*b
    prod = a * b
    return (prod > 0) - (prod < 0)


def canonical_associate(e: FieldElement) -> FieldElement:
    """Canonical representative of {+-e * eps0^k}: first embedding positive,
    |e_1| >= |e_2|, and strictly unbalanced after one division by eps0."""
    field = e.field
    if e.is_zero():
        return e
    if field.degree == 1:
        return e if e.x > 0 else -e
    eps = field.fundamental_unit
    while _abs_embedding_cmp(e) < 0:
        e = e * eps
    while _abs_embedding_cmp(e / eps) >= 0:
        e = e / eps
    if e.sign_at(0) < 0:
        e = -e
    return e


def elements_of_norm(field: Field, n: int) -> list[FieldElement]:
    """Canonical associates of all integral elements with |norm| = n."""
    if n <= 0:
        raise ValueError("norm bound must be positive")
    if field.degree == 1:
        return [field.element(n)]
    eps1 = field.fundamental_unit.embeddings()[0]
    yb = int(2.0 * math.sqrt(n * eps1) / math.sqrt(field.disc)) + 3
    out = {}
    for cand in _norm_form_candidates(field, n, yb):
        canon = canonical_associate(cand)
        out[(canon.x, canon.y)] = canon
    return sorted(out.values(), key=lambda e: (e.x, e.y))


def narrow_square_witness(
    P: FractionalIdeal, window: int = 8
) -> Optional[tuple[FractionalIdeal, FieldElement]]:
    """(b, eta) with P*b^2 = (eta), eta totally positive; None if no witness."""
    if not is_prime_ideal(P):
        raise NotPrime("witness requires a prime ideal")
    field = P.field
    if field.degree == 1:
        return (field.unit_ideal(), field.element(int(P.norm())))
    desc = class_group(field, narrow=True)
    candidates = sorted(desc.representatives, key=lambda I: (I.norm(), I.hnf))
    for b in candidates:
        eta = principal_totally_positive_generator(P * b * b, window)
        if eta is not None:
            assert eta.is_integral() and eta.is_totally_positive()
            return (b, eta)
    return None

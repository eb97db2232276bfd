"""Twisted Kloosterman sums over Q and real quadratic fields.

KS(r, a; r', a; c, c_frak) sums e(S((r x + r' x^(-1))/c)) * conj(chi(x))
over the generators x of the module a*c_frak^(-1) / a*(c), where x^(-1) is
the unique element of a^(-1)*c_frak / a^(-1)*(c)*c_frak^2 with
x*x^(-1) = 1 mod (c)*c_frak, and e(y) = exp(2 pi i y).  Over Q with the
trivial twist this is the classical sum S(r, r'; c).

Exponents are reduced mod 1 in exact rational arithmetic before any
exponential is taken, and the sum is accumulated with Kahan compensation,
so phases do not drift for large moduli.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    EnumerationTooLarge,
    IllDefinedExponent,
    ModulusZero,
    PreconditionViolation,
)
from .numberfield import (
    Field,
    FieldElement,
    FractionalIdeal,
    QuotientModule,
    different_ideal,
    elements_of_norm,
    factor_rational_prime,
    ideal_from_elements,
    _rational_factorization,
)

DEFAULT_RESIDUE_CAP = 10**6


# ---------------------------------------------------------------------------
# Residue unit groups


@dataclass(frozen=True)
class ResidueUnitGroup:
    """Generators x of a*c_frak^(-1)/a*(c) with verified inverses x^(-1)."""

    field: Field
    a_ideal: FractionalIdeal
    c: FieldElement
    c_ideal: FractionalIdeal
    modulus: FractionalIdeal  # (c) * c_frak
    units: tuple[tuple[FieldElement, FieldElement], ...]
    quotient: QuotientModule
    inverse_quotient: QuotientModule

    def __len__(self):
        return len(self.units)


def _distinct_prime_divisors(field: Field, I: FractionalIdeal) -> list[FractionalIdeal]:
    out = []
    for p in sorted(_rational_factorization(int(I.norm()))):
        for P in factor_rational_prime(field, p).primes:
            if P.contains_ideal(I):
                out.append(P)
    return out


def residue_unit_group(
    a_ideal: FractionalIdeal,
    c: FieldElement,
    c_ideal: FractionalIdeal,
    level: Optional[FractionalIdeal] = None,
    cap: int = DEFAULT_RESIDUE_CAP,
) -> ResidueUnitGroup:
    """Enumerate the unit residues and pair each with its verified inverse."""
    field = a_ideal.field
    if c.is_zero():
        raise ModulusZero("modulus element c must be nonzero")
    level = level if level is not None else field.unit_ideal()
    if not (c_ideal.inverse() * level).contains(c):
        raise PreconditionViolation("c not in c_frak^(-1) * level")
    modulus = ideal_from_elements(field, [c]) * c_ideal
    assert modulus.is_integral()
    L = a_ideal * c_ideal.inverse()
    Lsub = a_ideal * ideal_from_elements(field, [c])
    Q = QuotientModule(L, Lsub)
    if Q.index > cap:
        raise EnumerationTooLarge(f"{Q.index} residues exceeds cap {cap}")
    Linv = a_ideal.inverse() * c_ideal
    Linv_sub = a_ideal.inverse() * ideal_from_elements(field, [c]) * c_ideal * c_ideal
    Qinv = QuotientModule(Linv, Linv_sub)

    # x generates L/Lsub iff (x) L^(-1) is coprime to the modulus, i.e.
    # x avoids P*L for every prime P dividing the modulus
    blockers = [P * L for P in _distinct_prime_divisors(field, modulus)]
    norm_L = L.norm()
    a0 = modulus.hnf[0]  # least positive rational integer in the modulus
    units = []
    if Q.index == 1:
        # unit modulus: the trivial coset generates the zero module
        units.append((field.zero(), field.zero()))
    else:
        for x in Q.representatives():
            if x.is_zero() or any(B.contains(x) for B in blockers):
                continue
            y = _residue_inverse(x, L, Lsub, Qinv, modulus, norm_L, a0)
            units.append((x, y))
    return ResidueUnitGroup(field, a_ideal, c, c_ideal, modulus, tuple(units), Q, Qinv)


def _residue_inverse(
    x: FieldElement,
    L: FractionalIdeal,
    Lsub: FractionalIdeal,
    Qinv: QuotientModule,
    modulus: FractionalIdeal,
    norm_L: Fraction,
    a0: int,
) -> FieldElement:
    """The inverse residue: y in L^(-1) modulo L^(-1)*modulus with x*y in 1 + modulus.

    Built from the conjugate: for x' = x + delta in the same coset with
    relative norm prime to a0, y = t * conj(x')/N(L) with t inverting that
    relative norm mod a0; both congruence and module membership then hold
    exactly (and are asserted).
    """
    field = x.field
    if field.degree == 1:
        # x = rel * g for the generator g of L; invert rel mod the modulus integer
        gen = L.basis_elements()[0]
        rel = int(x.x / gen.x)
        c_int = modulus.hnf[0]
        t = pow(rel, -1, c_int)
        y = Qinv.reduce(field.one() / gen * t)
        assert modulus.contains(x * y - 1)
        return y
    g1, g2 = Lsub.basis_elements()
    for i in range(0, 30):
        for j in range(0, 30):
            for si in ((1, -1) if i else (1,)):
                for sj in ((1, -1) if j else (1,)):
                    xp = x + g1 * (si * i) + g2 * (sj * j)
                    rel = xp.norm() / norm_L
                    assert rel.denominator == 1
                    rel_int = int(rel)
                    if rel_int != 0 and math.gcd(rel_int % a0, a0) == 1:
                        t = pow(rel_int, -1, a0)
                        y = Qinv.reduce(xp.conjugate() * Fraction(t) / norm_L)
                        assert modulus.contains(x * y - 1), "inverse congruence failed"
                        return y
    raise AssertionError("no norm-coprime shift found; modulus too adversarial")


# ---------------------------------------------------------------------------
# Twist characters


class TwistCharacter:
    """Character of the unit residues mod (c)*c_frak: trivial or a value table.

    Explicit tables are keyed by the canonical residue coordinates of the
    quotient O/(c)*c_frak and are validated for |value| = 1.  Quadratic
    residue (Legendre) twists over Q are provided as a constructor.
    """

    def __init__(self, kind: str, table: Optional[dict] = None, label: str = ""):
        if kind not in ("trivial", "table"):
            raise ValueError(f"unknown character kind {kind!r}")
        self.kind = kind
        self.table = table or {}
        self.label = label or kind
        if kind == "table":
            for k, v in self.table.items():
                if abs(abs(complex(v)) - 1.0) > 1e-12:
                    raise ValueError(f"character value at {k} is not unimodular")

    @staticmethod
    def trivial() -> "TwistCharacter":
        return TwistCharacter("trivial")

    @staticmethod
    def legendre(p: int) -> "TwistCharacter":
        """Quadratic residue character mod an odd prime p (over Q)."""
        if p < 3 or p % 2 == 0:
            raise ValueError("legendre twist needs an odd prime")
        table = {}
        for x in range(1, p):
            table[(x,)] = complex(1.0 if pow(x, (p - 1) // 2, p) == 1 else -1.0)
        return TwistCharacter("table", table, label=f"legendre({p})")

    def value(self, group: ResidueUnitGroup, x: FieldElement) -> complex:
        if self.kind == "trivial":
            return 1.0 + 0.0j
        # tables are defined on the O/(c)*c_frak coordinates; this requires
        # the residue module to be the ring of integers itself
        O = group.field.unit_ideal()
        if group.a_ideal * group.c_ideal.inverse() != O:
            raise PreconditionViolation(
                "explicit twist tables need a*c_frak^(-1) = O (module = O/(c)c_frak)"
            )
        key = group.quotient.key(x)
        if key not in self.table:
            raise PreconditionViolation(f"character table missing residue {key}")
        return complex(self.table[key])

    def verify_multiplicative(self, group: ResidueUnitGroup, tol: float = 1e-12) -> bool:
        """chi(xy) = chi(x) chi(y) over all unit pairs of the group."""
        if self.kind == "trivial":
            return True
        xs = [x for x, _ in group.units]
        for a in xs:
            for b in xs:
                lhs = self.value(group, group.quotient.reduce(a * b))
                if abs(lhs - self.value(group, a) * self.value(group, b)) > tol:
                    return False
        return True


# ---------------------------------------------------------------------------
# The twisted sum


def _exp_term(total: Fraction) -> complex:
    frac = total - math.floor(total)
    return cmath.exp(2j * math.pi * float(frac))


def _kahan_add(acc, comp, term):
    y = term - comp
    t = acc + y
    comp = (t - acc) - y
    return t, comp


def ks_twisted(
    r: FieldElement,
    a_ideal: FractionalIdeal,
    rp: FieldElement,
    c: FieldElement,
    c_ideal: FractionalIdeal,
    chi: Optional[TwistCharacter] = None,
    level: Optional[FractionalIdeal] = None,
    cap: int = DEFAULT_RESIDUE_CAP,
    group: Optional[ResidueUnitGroup] = None,
) -> complex:
    """The twisted Kloosterman sum; classical S(r, r'; c) over Q, trivial chi."""
    field = a_ideal.field
    chi = chi or TwistCharacter.trivial()
    dinv = different_ideal(field).inverse()
    if not r.is_zero() and not (a_ideal.inverse() * dinv).contains(r):
        raise PreconditionViolation("r not in a^(-1) d^(-1)")
    if not rp.is_zero() and not (a_ideal * dinv * c_ideal.inverse() ** 2).contains(rp):
        raise PreconditionViolation("r' not in a d^(-1) c_frak^(-2)")
    if group is None:
        group = residue_unit_group(a_ideal, c, c_ideal, level=level, cap=cap)
    # exact well-definedness on cosets: r*Lsub/c and r'*Lsub'/c must be trace-dual
    c_inv = field.one() / c
    shift1 = ideal_from_elements(field, [r * c_inv]) * a_ideal * ideal_from_elements(field, [c]) if not r.is_zero() else None
    shift2 = (
        ideal_from_elements(field, [rp * c_inv])
        * a_ideal.inverse()
        * ideal_from_elements(field, [c])
        * c_ideal
        * c_ideal
        if not rp.is_zero()
        else None
    )
    for shift in (shift1, shift2):
        if shift is not None and not dinv.contains_ideal(shift):
            raise IllDefinedExponent("exponent is not constant on residue cosets")
    acc, comp = 0.0 + 0.0j, 0.0 + 0.0j
    for x, y in group.units:
        expo = ((r * x + rp * y) * c_inv).trace()
        term = _exp_term(expo) * chi.value(group, x).conjugate()
        acc, comp = _kahan_add(acc, comp, term)
    return acc


def ks_classical(m: int, n: int, c: int, chi: Optional[TwistCharacter] = None) -> complex:
    """S(m, n; c) over Q through the general machinery."""
    Q = _rational_field()
    O = Q.unit_ideal()
    return ks_twisted(Q.element(m), O, Q.element(n), Q.element(c), O, chi=chi)


def _rational_field() -> Field:
    from .numberfield import make_field

    return make_field("rational")


def classical_sum_direct(m: int, n: int, c: int) -> complex:
    """Direct-loop classical Kloosterman sum (independent oracle path)."""
    acc = 0.0 + 0.0j
    for x in range(1, c + 1):
        if math.gcd(x, c) != 1:
            continue
        xinv = pow(x, -1, c)
        acc += cmath.exp(2j * math.pi * ((m * x + n * xinv) % c) / c)
    return acc


# ---------------------------------------------------------------------------
# Weil bound


@dataclass(frozen=True)
class WeilCheck:
    ks_abs: float
    rhs: float
    ratio: float
    gcd_norm: float
    modulus_norm: float


def weil_check(
    r: FieldElement,
    a_ideal: FractionalIdeal,
    rp: FieldElement,
    c: FieldElement,
    c_ideal: FractionalIdeal,
    chi: Optional[TwistCharacter] = None,
    eps: float = 0.0,
    group: Optional[ResidueUnitGroup] = None,
) -> WeilCheck:
    """|KS| against N(gcd(r a d, r' c_frak^2 a^(-1) d, c c_frak))^(1/2) N(c c_frak)^(1/2+eps)."""
    field = a_ideal.field
    ks = ks_twisted(r, a_ideal, rp, c, c_ideal, chi=chi, group=group)
    d = different_ideal(field)
    parts = []
    if not r.is_zero():
        parts.append(ideal_from_elements(field, [r]) * a_ideal * d)
    if not rp.is_zero():
        parts.append(
            ideal_from_elements(field, [rp]) * c_ideal * c_ideal * a_ideal.inverse() * d
        )
    modulus = ideal_from_elements(field, [c]) * c_ideal
    parts.append(modulus)
    g = parts[0]
    for q in parts[1:]:
        g = g + q
    gcd_norm = float(g.norm())
    mod_norm = float(modulus.norm())
    rhs = math.sqrt(gcd_norm) * mod_norm ** (0.5 + eps)
    ks_abs = abs(ks)
    return WeilCheck(ks_abs, rhs, ks_abs / rhs, gcd_norm, mod_norm)


# ---------------------------------------------------------------------------
# Sweep drivers


@dataclass(frozen=True)
class SweepRow:
    c_label: str
    c_norm: float
    ks_abs: float
    imag_abs: float
    weil_rhs: float
    ratio: float


def classical_weil_table(c_max: int, m_max: int = 5, n_max: int = 5):
    """S(m, n; c) for all m <= m_max, n <= n_max, c <= c_max, vectorized.

    High-volume path for sweeps: one unit/inverse enumeration per modulus,
    then a cosine-table lookup per (m, n).  The sums are real, so only the
    real part is accumulated; the general ks_twisted path cross-checks a
    subsample of these values in the test suite.

    Yields (c, m, n, value) with value = S(m, n; c) as a float.
    """
    import numpy as np

    for c in range(1, c_max + 1):
        xs = np.array([x for x in range(1, c + 1) if math.gcd(x, c) == 1], dtype=np.int64)
        if c == 1:
            xs = np.array([0], dtype=np.int64)
        inv = np.array([pow(int(x), -1, c) if c > 1 else 0 for x in xs], dtype=np.int64)
        cos_table = np.cos(2.0 * np.pi * np.arange(c if c > 1 else 1) / max(c, 1))
        for m in range(1, m_max + 1):
            mx = (m * xs) % max(c, 1)
            for n in range(1, n_max + 1):
                idx = (mx + n * inv) % max(c, 1)
                yield (c, m, n, float(np.sum(cos_table[idx])))


def classical_weil_sweep(c_max: int, m: int = 1, n: int = 1,
                         eps: float = 0.0) -> list[SweepRow]:
    """Classical sums S(m, n; c) for c <= c_max with Weil-bound ratios."""
    Q = _rational_field()
    O = Q.unit_ideal()
    rows = []
    for c in range(1, c_max + 1):
        chk = weil_check(Q.element(m), O, Q.element(n), Q.element(c), O, eps=eps)
        ks = ks_classical(m, n, c)
        rows.append(SweepRow(str(c), float(c), chk.ks_abs, abs(ks.imag), chk.rhs, chk.ratio))
    return rows


def quadratic_weil_sweep(field: Field, norm_max: int, r_val: int = 1,
                         rp_val: int = 1, eps: float = 0.0,
                         require_real: bool = True) -> list[SweepRow]:
    """Twisted sums over a real quadratic field for modulus norms <= norm_max.

    The modulus c runs over canonical associates with |N(c)| <= norm_max,
    a = c_frak = O and the trivial twist; rows report |KS|, the Weil right
    side and their ratio.
    """
    O = field.unit_ideal()
    r = field.element(r_val)
    rp = field.element(rp_val)
    rows = []
    for n in range(1, norm_max + 1):
        for c in elements_of_norm(field, n):
            group = residue_unit_group(O, c, O)
            chk = weil_check(r, O, rp, c, O, eps=eps, group=group)
            ks = ks_twisted(r, O, rp, c, O, group=group)
            label = f"{c.x}+{c.y}w"
            rows.append(SweepRow(label, float(abs(c.norm())), chk.ks_abs,
                                 abs(ks.imag), chk.rhs, chk.ratio))
    return rows

"""Hecke-operator combinatorics on eigenvalues and Fourier indices.

The operators themselves are never materialized; what is computed is their
shadow: Chebyshev transport of normalized eigenvalues between prime powers,
the upper-triangular coset system for a prime power, the descent package
(b, eta, a_s, b~_s) that moves the Hecke action back to a fixed ideal-class
component, the totally-positive-unit indicator governing the diagonal term
of the sum formula, and an exact rational check of the induced coefficient
relation over Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    DivisibilityViolation,
    EnumerationTooLarge,
    NotNarrowSquare,
    NotPrime,
    RamanujanViolation,
    ZeroArgument,
)
from .measures import chebyshev_eval
from .numberfield import (
    Field,
    FieldElement,
    FractionalIdeal,
    QuotientModule,
    find_generator,
    ideal_valuation,
    is_prime_ideal,
    is_rational_prime,
    narrow_square_witness,
)

RAMANUJAN_SLACK = 1e-6
DEFAULT_ENUMERATION_CAP = 10**6


def hecke_power_eigenvalue(lam_p: Union[float, Fraction], ell: int):
    """Normalized eigenvalue at the ell-th prime power: X_ell(lam_p)."""
    if abs(float(lam_p)) > 2.0 + RAMANUJAN_SLACK:
        raise RamanujanViolation(f"|lambda| = {abs(float(lam_p))} exceeds 2")
    return chebyshev_eval(ell, lam_p)


# ---------------------------------------------------------------------------
# Coset representatives of the determinant-valuation-ell double coset


@dataclass(frozen=True)
class CosetRep:
    """Upper-triangular representative (pi^(ell-s), beta; 0, pi^s).

    The matrix is recorded as the two diagonal valuations plus the residue
    beta in O/P^(ell-s), stored both as a field element and as its canonical
    index in [0, N(P)^(ell-s)).
    """

    s: int
    upper_valuation: int  # ell - s
    lower_valuation: int  # s
    beta: FieldElement
    beta_index: int


def coset_reps(P: FractionalIdeal, ell: int,
               cap: int = DEFAULT_ENUMERATION_CAP) -> list[CosetRep]:
    """All (N^(ell+1)-1)/(N-1) coset representatives for the prime power P^ell."""
    if not is_prime_ideal(P):
        raise NotPrime("coset decomposition requires a prime ideal")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    np_ = int(P.norm())
    total = (np_ ** (ell + 1) - 1) // (np_ - 1)
    if total > cap:
        raise EnumerationTooLarge(f"{total} cosets exceeds cap {cap}")
    field = P.field
    O = field.unit_ideal()
    out = []
    for s in range(ell + 1):
        Q = QuotientModule(O, P ** (ell - s)) if ell - s > 0 else None
        if Q is None:
            out.append(CosetRep(s, 0, s, field.zero(), 0))
            continue
        reps = Q.representatives()
        width = Q.shape[1]
        for beta in reps:
            key = Q.key(beta)
            idx = key[0] if field.degree == 1 else key[0] * width + key[1]
            out.append(CosetRep(s, ell - s, s, beta, idx))
    assert len(out) == total
    return out


# ---------------------------------------------------------------------------
# Descent data (prime a square in the narrow class group)


@dataclass(frozen=True)
class DescentData:
    """(b, eta, {a_s}, {b~_s}) for P^ell with P*b^2 = (eta), eta totally positive.

    a_s lies in P^s b^ell with v_P(a_s) = s + ell*v_P(b); the shift b~_s is
    normalized to 0 (any integral choice is admissible, and 0 matches the
    principal diagonal case where the unipotent part is absorbed).
    """

    prime: FractionalIdeal
    ell: int
    b_ideal: FractionalIdeal
    eta: FieldElement
    a_elems: tuple[FieldElement, ...]
    b_shifts: tuple[FieldElement, ...]

    def verify(self) -> bool:
        """Exact check of every membership/valuation invariant."""
        P, ell = self.prime, self.ell
        assert self.eta.is_totally_positive()
        f = P.field
        from .numberfield import ideal_from_elements

        assert P * self.b_ideal * self.b_ideal == ideal_from_elements(f, [self.eta])
        vb = ideal_valuation(self.b_ideal, P)
        for s, (a_s, bt_s) in enumerate(zip(self.a_elems, self.b_shifts)):
            target = (P**s) * (self.b_ideal**ell)
            assert target.contains(a_s), f"a_{s} not in P^s b^ell"
            assert ideal_valuation(a_s, P) == s + ell * vb, f"a_{s} has wrong valuation"
            assert bt_s.is_integral(), f"b~_{s} not integral"
            if ell % 2 == 0 and 2 * s == ell:
                u = a_s * a_s / self.eta**ell
                assert u.is_unit() and u.is_totally_positive(), (
                    "midpoint element is not a totally positive unit"
                )
        return True


def _element_with_exact_valuation(J: FractionalIdeal, P: FractionalIdeal,
                                  target: int) -> FieldElement:
    """Element of J with v_P equal to v_P(J); one of the basis elements works."""
    for g in J.basis_elements():
        if ideal_valuation(g, P) == target:
            return g
    raise AssertionError("no basis element attains the minimal valuation")


def descent_data(P: FractionalIdeal, ell: int,
                 field: Optional[Field] = None) -> DescentData:
    """Construct descent data for P^ell; P must be a narrow-class-group square."""
    if not is_prime_ideal(P):
        raise NotPrime("descent data requires a prime ideal")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    f = field or P.field
    witness = narrow_square_witness(P)
    if witness is None:
        raise NotNarrowSquare(
            "prime is not a square in the narrow class group; no descent data"
        )
    b_ideal, eta = witness
    vb = ideal_valuation(b_ideal, P)
    a_elems = []
    b_shifts = []
    for s in range(ell + 1):
        target = s + ell * vb
        if ell % 2 == 0 and 2 * s == ell:
            a_s = eta ** (ell // 2)
        else:
            J = (P**s) * (b_ideal**ell)
            a_s = find_generator(J)
            if a_s is None:
                a_s = _element_with_exact_valuation(J, P, target)
        a_elems.append(a_s)
        b_shifts.append(f.zero())
    data = DescentData(P, ell, b_ideal, eta, tuple(a_elems), tuple(b_shifts))
    data.verify()
    return data


# ---------------------------------------------------------------------------
# Totally-positive-unit indicator


def delta_tilde(r: FieldElement, rp: FieldElement, field: Optional[Field] = None) -> int:
    """1 iff r/r' is a totally positive unit of the ring of integers."""
    if r.is_zero() or rp.is_zero():
        raise ZeroArgument("delta~ needs nonzero arguments")
    q = r / rp
    return int(q.is_unit() and q.is_totally_positive())


# ---------------------------------------------------------------------------
# Exact coefficient relation over Q


def _factorize(n: int) -> dict[int, int]:
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


def verify_coefficient_relation(lam_p: Union[int, Fraction], p: int, ell: int,
                                r: int, lam_other=None) -> bool:
    """Exact check of X_ell(lam_p) * c(r) = sum_s c(r * p^(ell-2s)) over Q.

    The synthetic multiplicative coefficient system is
    c(prod q^(m_q)) = prod X_(m_q)(lam_q), with lam_q = lam_p at q = p and
    lam_other (default: lam_p as well) at the other primes.
    """
    if not is_rational_prime(p):
        raise NotPrime(f"{p} is not prime")
    if r == 0:
        raise ZeroArgument("r must be nonzero")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    r = abs(r)
    if r % p**ell:
        raise DivisibilityViolation(f"p^ell = {p**ell} does not divide r = {r}")
    lam_p = Fraction(lam_p)
    lam_other = lam_p if lam_other is None else Fraction(lam_other)

    def coeff(m: int) -> Fraction:
        out = Fraction(1)
        for q, e in _factorize(m).items():
            out *= chebyshev_eval(e, lam_p if q == p else lam_other)
        return out

    lhs = chebyshev_eval(ell, lam_p) * coeff(r)
    rhs = Fraction(0)
    for s in range(ell + 1):
        num = r * p**ell
        den = p ** (2 * s)
        assert num % den == 0
        rhs += coeff(num // den)
    return lhs == rhs

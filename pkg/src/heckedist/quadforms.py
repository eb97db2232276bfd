"""Indefinite binary quadratic forms of positive discriminant.

Cycles of reduced forms give the narrow class number, and orbits of cycles
under total negation give the wide class number.  This is a computation
independent of the ideal/unit machinery in numberfield.py and serves as a
cross-check oracle for it.
"""

from __future__ import annotations

import math

Form = tuple[int, int, int]


def discriminant(f: Form) -> int:
    a, b, c = f
    return b * b - 4 * a * c


def is_reduced(f: Form, Delta: int) -> bool:
    """0 < b < sqrt(Delta) and sqrt(Delta) - b < 2|a| < sqrt(Delta) + b, exactly."""
    a, b, _ = f
    if b <= 0 or b * b >= Delta:
        return False
    ta = 2 * abs(a)
    if ta >= b:
        if (ta - b) ** 2 >= Delta:
            return False
    if (ta + b) ** 2 <= Delta:
        return False
    return True


def rho(f: Form, Delta: int) -> Form:
    """Reduction step (a,b,c) -> (c, b', c'); reduced forms walk their cycle."""
    _, b, c = f
    sq = math.isqrt(Delta)
    m = 2 * abs(c)
    r = (-b) % m
    if abs(c) > sq:
        b1 = r if r <= abs(c) else r - m
    else:
        b1 = sq - ((sq - r) % m)
    c1 = (b1 * b1 - Delta) // (4 * c)
    return (c, b1, c1)


def reduce_form(f: Form, Delta: int, max_steps: int = 512) -> Form:
    for _ in range(max_steps):
        if is_reduced(f, Delta):
            return f
        f = rho(f, Delta)
    raise RuntimeError(f"form reduction did not terminate for {f}")


def reduced_forms(Delta: int) -> list[Form]:
    """All reduced forms of discriminant Delta (Delta > 0, not a square)."""
    sq = math.isqrt(Delta)
    assert sq * sq != Delta, "discriminant must not be a square"
    out = []
    b = 2 - (Delta % 2)  # smallest positive b with b = Delta mod 2
    while b * b < Delta:
        ac4 = b * b - Delta
        assert ac4 % 4 == 0
        ac = ac4 // 4  # negative
        for a in range(1, abs(ac) + 1):
            if ac % a:
                continue
            for aa in (a, -a):
                f = (aa, b, ac // aa)
                if is_reduced(f, Delta):
                    out.append(f)
        b += 2
    return sorted(out)


def cycles(Delta: int) -> list[list[Form]]:
    """Partition of the reduced forms into rho-cycles."""
    remaining = set(reduced_forms(Delta))
    out = []
    while remaining:
        start = min(remaining)
        cyc = [start]
        f = rho(start, Delta)
        while f != start:
            assert is_reduced(f, Delta)
            cyc.append(f)
            f = rho(f, Delta)
        for g in cyc:
            remaining.discard(g)
        out.append(cyc)
    return out


def principal_form(Delta: int) -> Form:
    """The reduced principal form (1, b0, (b0^2 - Delta)/4)."""
    sq = math.isqrt(Delta)
    b0 = sq if (sq - Delta) % 2 == 0 else sq - 1
    f = (1, b0, (b0 * b0 - Delta) // 4)
    assert is_reduced(f, Delta)
    return f


def class_numbers_by_form_census(Delta: int) -> tuple[int, int]:
    """(narrow class number, wide class number) of discriminant Delta.

    Narrow classes are rho-cycles of reduced forms.  The wide class group is
    the narrow one modulo the class of the negated principal form (the image
    of a negative-norm scaling), whose order is 1 or 2.
    """
    cycs = cycles(Delta)
    rep_to_cycle = {}
    for i, cyc in enumerate(cycs):
        for f in cyc:
            rep_to_cycle[f] = i
    a, b, c = principal_form(Delta)
    principal_cycle = rep_to_cycle[(a, b, c)]
    kernel_order = 1 if rep_to_cycle[reduce_form((-a, -b, -c), Delta)] == principal_cycle else 2
    h_plus = len(cycs)
    assert h_plus % kernel_order == 0
    return h_plus, h_plus // kernel_order

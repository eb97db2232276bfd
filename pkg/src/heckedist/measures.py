"""Measures for Hecke and Casimir eigenvalue statistics.

Continuous measures on the Hecke interval [-2, 2]: the semicircle measure
mu_inf = (1/pi) sqrt(1 - x^2/4) dx, its p-deformation
mu_p = (p+1)/pi * sqrt(1 - x^2/4) / ((p^(1/2) + p^(-1/2))^2 - x^2) dx,
and the polynomial multiples Phi(ord) = (sum_{l<=ord} X_{2l}) mu_inf.

Spectral measures on the Casimir axis: the even/odd spectral-density pair
with continuous part tanh/coth(pi*sqrt(lambda - 1/4)) on [1/4, inf) plus
discrete-series atoms (b-1) at b/2*(1 - b/2), the comparison measure v1,
and their discrete counterparts in the nu-coordinate.

All quadrature is adaptive Gauss-Legendre (rel. tol 1e-10, subdivision cap
2^16); endpoint singularities are removed by the substitutions x = 2 cos t
and u = sqrt(lambda - 1/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import NoDensity, ParityMismatch, UnboundedRegion, ZeroMassRegion

Interval = tuple[float, float]

# ---------------------------------------------------------------------------
# Chebyshev polynomials X_l, orthonormal for the semicircle measure


def chebyshev_eval(ell: int, x):
    """X_ell(x) via X_0 = 1, X_1 = x, X_{m+1} = x X_m - X_{m-1}.

    Works on floats, numpy arrays and exact Fractions alike.
    """
    if ell < 0:
        raise ValueError("ell must be >= 0")
    one = x * 0 + 1
    if ell == 0:
        return one
    prev, cur = one, x
    for _ in range(ell - 1):
        prev, cur = cur, x * cur - prev
    return cur


# ---------------------------------------------------------------------------
# Adaptive Gauss-Legendre quadrature

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
QUAD_REL_TOL = 1e-10
QUAD_MAX_SUBDIV = 1 << 16


def _gl15(f: Callable, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def adaptive_quad(f: Callable, a: float, b: float, rel_tol: float = QUAD_REL_TOL) -> float:
    """Adaptive 15-point Gauss-Legendre with interval-proportional budget."""
    if a >= b:
        return 0.0
    whole = _gl15(f, a, b)
    scale = max(1.0, abs(whole))
    stack = [(a, b, whole)]
    total = 0.0
    splits = 0
    while stack:
        x0, x1, est = stack.pop()
        m = 0.5 * (x0 + x1)
        s1, s2 = _gl15(f, x0, m), _gl15(f, m, x1)
        budget = rel_tol * scale * max((x1 - x0) / (b - a), 1e-12)
        if abs(s1 + s2 - est) <= budget or splits >= QUAD_MAX_SUBDIV:
            total += s1 + s2
        else:
            splits += 1
            stack.append((x0, m, s1))
            stack.append((m, x1, s2))
    return total


# ---------------------------------------------------------------------------
# Measure specifications


_X_TAGS = ("sato_tate", "padic_sato_tate", "phi")
_SPECTRAL_TAGS = ("plancherel", "v1")
_TILDE_TAGS = ("tilde_pl", "tilde_v1")


@dataclass(frozen=True)
class MeasureSpec:
    """Tagged measure: one of the x-measures, spectral measures, or nu-forms."""

    tag: str
    p: Optional[int] = None
    ord: Optional[int] = None
    xi: Optional[int] = None
    A: float = 2.5
    literal_middle: bool = False  # keep the weightless middle term of v1 verbatim

    def __post_init__(self):
        if self.tag == "padic_sato_tate" and (self.p is None or self.p < 2):
            raise ValueError("padic_sato_tate needs a prime p >= 2")
        if self.tag == "phi" and (self.ord is None or self.ord < 0):
            raise ValueError("phi needs ord >= 0")
        if self.tag in _SPECTRAL_TAGS + _TILDE_TAGS and self.xi not in (0, 1):
            raise ValueError(f"{self.tag} needs xi in {{0, 1}}")
        if self.tag == "tilde_v1" and self.A <= 2:
            raise ValueError("tilde_v1 exponent A must exceed 2")
        if self.tag not in _X_TAGS + _SPECTRAL_TAGS + _TILDE_TAGS:
            raise ValueError(f"unknown measure tag {self.tag!r}")

    # constructors ----------------------------------------------------------

    @staticmethod
    def sato_tate() -> "MeasureSpec":
        return MeasureSpec("sato_tate")

    @staticmethod
    def padic(p: int) -> "MeasureSpec":
        return MeasureSpec("padic_sato_tate", p=p)

    @staticmethod
    def phi(ord: int) -> "MeasureSpec":
        return MeasureSpec("phi", ord=ord)

    @staticmethod
    def plancherel(xi: int) -> "MeasureSpec":
        return MeasureSpec("plancherel", xi=xi)

    @staticmethod
    def v1(xi: int, literal_middle: bool = False) -> "MeasureSpec":
        return MeasureSpec("v1", xi=xi, literal_middle=literal_middle)

    @staticmethod
    def tilde_pl(xi: int) -> "MeasureSpec":
        return MeasureSpec("tilde_pl", xi=xi)

    @staticmethod
    def tilde_v1(xi: int, A: float = 2.5) -> "MeasureSpec":
        return MeasureSpec("tilde_v1", xi=xi, A=A)


@dataclass(frozen=True)
class PlaceBox:
    """One archimedean place: lambda-interval, class tag, parity."""

    low: float
    high: float
    place_class: str = "Q+"  # "E", "Q+" or "Q-"
    xi: int = 0


@dataclass(frozen=True)
class SpectralBox:
    places: tuple[PlaceBox, ...]

    def __post_init__(self):
        for pl in self.places:
            if pl.place_class not in ("E", "Q+", "Q-"):
                raise ValueError(f"bad place class {pl.place_class!r}")


# ---------------------------------------------------------------------------
# Densities on [-2, 2]


def density(spec: MeasureSpec, x) -> Union[float, np.ndarray]:
    """Pointwise density of a continuous measure; zero outside [-2, 2]."""
    if spec.tag not in _X_TAGS:
        raise NoDensity(f"{spec.tag} has atoms and no pointwise density")
    xs = np.asarray(x, dtype=float)
    inside = np.abs(xs) <= 2.0
    semi = np.where(inside, np.sqrt(np.clip(1.0 - xs * xs / 4.0, 0.0, None)) / math.pi, 0.0)
    if spec.tag == "sato_tate":
        out = semi
    elif spec.tag == "padic_sato_tate":
        rp = math.sqrt(spec.p)
        denom = (rp + 1.0 / rp) ** 2 - xs * xs
        out = np.where(inside, (spec.p + 1) * semi / denom, 0.0)
    else:  # phi: density X_ord(x)^2 * mu_inf, the closed form of the even sum
        out = np.where(inside, chebyshev_eval(spec.ord, xs) ** 2 * semi, 0.0)
    return out if isinstance(x, np.ndarray) else float(out)


def _integrate_x_measure(spec: MeasureSpec, g: Callable, a: float, b: float) -> float:
    """Integral of g against the spec's density over [a, b] (x = 2 cos t)."""
    a, b = max(a, -2.0), min(b, 2.0)
    if a >= b:
        return 0.0
    t1, t0 = math.acos(a / 2.0), math.acos(b / 2.0)  # t decreasing in x

    def integrand(t):
        xv = 2.0 * np.cos(t)
        return g(xv) * density(spec, xv) * 2.0 * np.sin(t)

    return adaptive_quad(integrand, t0, t1)


# ---------------------------------------------------------------------------
# Atoms of the spectral measures


def _spectral_atoms(spec: MeasureSpec, low: float, high: float):
    """(position, weight) atoms with low <= position < high, descending."""
    if spec.tag == "plancherel":
        b = 2 if spec.xi == 0 else 3
        while True:
            lam = b / 2.0 * (1.0 - b / 2.0)
            if lam < low:
                return
            if lam < high:
                yield (lam, float(b - 1))
            b += 2
    elif spec.tag == "v1":
        beta = 0.5 if spec.xi == 0 else 1.0
        while True:
            lam = 0.25 - beta * beta
            if lam < low:
                return
            if lam < high:
                yield (lam, beta)
            beta += 1.0
    else:
        raise AssertionError(spec.tag)


def _tilde_atoms(spec: MeasureSpec, low: float, high: float):
    shift = 0.5 if spec.xi == 0 else 0.0
    k0 = math.ceil(low - shift)
    k = k0
    while k + shift < high:
        beta = k + shift
        if beta != 0.0:
            if spec.tag == "tilde_pl":
                yield (beta, abs(beta))
            elif beta > 0:  # tilde_v1 lives on the positive nu-axis
                yield (beta, beta ** (-spec.A))
        k += 1


# ---------------------------------------------------------------------------
# Mass


def _check_finite(low: float, high: float):
    if not (math.isfinite(low) and math.isfinite(high)):
        raise UnboundedRegion(f"region [{low}, {high}] is not finite")


def _sqrt_sub_integral(spec_xi: int, lo: float, hi: float) -> float:
    """Continuous spectral mass of [lo, hi] via u = sqrt(lambda - 1/4)."""
    lo = max(lo, 0.25)
    if hi <= lo:
        return 0.0
    u1, u2 = math.sqrt(lo - 0.25), math.sqrt(hi - 0.25)
    return adaptive_quad(_spectral_u_integrand(spec_xi), u1, u2)


def _spectral_u_integrand(spec_xi: int) -> Callable:
    """2u * tanh(pi u) or 2u * coth(pi u); the latter extends by 2/pi at 0."""
    if spec_xi == 0:
        return lambda u: 2.0 * u * np.tanh(math.pi * u)

    def coth_part(u):
        pu = np.clip(math.pi * u, 1e-8, 30.0)
        return np.where(math.pi * u > 1e-8, 2.0 * u / np.tanh(pu), 2.0 / math.pi)

    return coth_part


def _abs_sqrt_antideriv(lam: float) -> float:
    """Antiderivative of |lambda - 1/4|^(-1/2)."""
    if lam >= 0.25:
        return 2.0 * math.sqrt(lam - 0.25)
    return -2.0 * math.sqrt(0.25 - lam)


def _interval_mass(spec: MeasureSpec, low: float, high: float) -> float:
    _check_finite(low, high)
    if high <= low:
        return 0.0
    if spec.tag in _X_TAGS:
        return _integrate_x_measure(spec, lambda x: x * 0 + 1.0, low, high)
    if spec.tag == "plancherel":
        cont = _sqrt_sub_integral(spec.xi, low, high)
        return cont + sum(w for _, w in _spectral_atoms(spec, low, high))
    if spec.tag == "v1":
        top = 0.5 * max(0.0, high - max(low, 1.25))
        lower = 0.0 if spec.xi == 0 else 0.25
        if spec.literal_middle:
            # paper-verbatim variant: the middle term carries no test function,
            # so it contributes a constant and the set function is not additive
            mid = 0.5 * (_abs_sqrt_antideriv(1.25) - _abs_sqrt_antideriv(lower))
        else:
            m_lo, m_hi = max(low, lower), min(high, 1.25)
            mid = 0.0
            if m_hi > m_lo:
                mid = 0.5 * (_abs_sqrt_antideriv(m_hi) - _abs_sqrt_antideriv(m_lo))
        atoms = sum(w for _, w in _spectral_atoms(spec, low, high))
        return top + mid + atoms
    if spec.tag in _TILDE_TAGS:
        return sum(w for _, w in _tilde_atoms(spec, low, high))
    raise AssertionError(spec.tag)


def mass(spec: MeasureSpec, region: Union[Interval, SpectralBox]) -> float:
    """Measure of an interval [low, high) or a spectral box (atom-half-open)."""
    if isinstance(region, SpectralBox):
        out = 1.0
        for pl in region.places:
            pspec = MeasureSpec(spec.tag, p=spec.p, ord=spec.ord, xi=pl.xi,
                                A=spec.A, literal_middle=spec.literal_middle)
            out *= _interval_mass(pspec, pl.low, pl.high)
        return out
    low, high = region
    return _interval_mass(spec, float(low), float(high))


# ---------------------------------------------------------------------------
# Discrete-series singleton predictions


def tilde_singleton(xi: Sequence[int], b: Sequence[int], measure: str = "pl",
                    A: float = 2.5):
    """prod (b_j - 1)/2 for the nu-Plancherel singleton; (.)^(-A) variant for v1.

    Exact over the rationals when measure == "pl".
    """
    from fractions import Fraction

    if len(xi) != len(b):
        raise ValueError("parity vector and weight vector differ in length")
    out: Union[Fraction, float] = Fraction(1)
    for xij, bj in zip(xi, b):
        if bj < 2:
            raise ValueError(f"discrete-series parameter must be >= 2, got {bj}")
        if bj % 2 != xij % 2:
            raise ParityMismatch(f"b = {bj} does not match parity xi = {xij}")
        if measure == "pl":
            out *= Fraction(bj - 1, 2)
        elif measure == "v1":
            if A <= 2:
                raise ValueError("A must exceed 2")
            out = float(out) * ((bj - 1) / 2.0) ** (-A)
        else:
            raise ValueError(f"unknown singleton measure {measure!r}")
    return out


# ---------------------------------------------------------------------------
# Moments


def phi_moment(ord: int, ell: int) -> float:
    """Integral of X_ell against Phi(ord); 1 for even ell <= 2*ord, else 0."""
    spec = MeasureSpec.phi(ord)
    return _integrate_x_measure(spec, lambda x: chebyshev_eval(ell, x), -2.0, 2.0)


def orthonormality_matrix(max_degree: int, nodes: int = 512) -> np.ndarray:
    """Gram matrix of (X_m, X_n) under the semicircle measure, m, n <= max_degree.

    Fixed-order Gauss-Legendre after x = 2 cos t; the integrand is a
    trigonometric polynomial, so convergence is spectral.
    """
    t, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * math.pi * (t + 1.0)
    weight = 0.5 * math.pi * w
    x = 2.0 * np.cos(theta)
    dens = (2.0 / math.pi) * np.sin(theta) ** 2
    vals = np.empty((max_degree + 1, nodes))
    vals[0] = 1.0
    if max_degree >= 1:
        vals[1] = x
    for m in range(2, max_degree + 1):
        vals[m] = x * vals[m - 1] - vals[m - 2]
    return (vals * (dens * weight)) @ vals.T


# ---------------------------------------------------------------------------
# CDF tables and seeded inverse-transform sampling

_TABLE_NODES = 4097
_table_cache: dict[MeasureSpec, tuple] = {}


def _x_measure_table(spec: MeasureSpec):
    """(x grid, cdf values, cdf interpolant, inverse interpolant), cached."""
    if spec.tag not in _X_TAGS:
        raise NoDensity(f"{spec.tag} has no CDF on [-2, 2]")
    if spec in _table_cache:
        return _table_cache[spec]
    theta = np.linspace(math.pi, 0.0, _TABLE_NODES)
    xs = 2.0 * np.cos(theta)
    xs[0], xs[-1] = -2.0, 2.0
    # per-segment fixed GL8 in theta; integrand is smooth there
    gl_t, gl_w = np.polynomial.legendre.leggauss(8)
    t0, t1 = theta[:-1], theta[1:]
    mid, half = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
    tt = mid[:, None] + half[:, None] * gl_t[None, :]
    xv = 2.0 * np.cos(tt)
    seg = np.abs(half) * np.sum(gl_w[None, :] * density(spec, xv) * 2.0 * np.sin(tt), axis=1)
    cdf_vals = np.concatenate([[0.0], np.cumsum(seg)])
    total = cdf_vals[-1]
    assert abs(total - 1.0) < 1e-8, f"total mass {total} far from 1"
    cdf_vals /= total
    cdf_vals[-1] = 1.0
    fwd = PchipInterpolator(xs, cdf_vals)
    # strictly increasing cdf values (positive density between grid nodes)
    inv = PchipInterpolator(cdf_vals, xs)
    _table_cache[spec] = (xs, cdf_vals, fwd, inv)
    return _table_cache[spec]


def cdf(spec: MeasureSpec, x) -> Union[float, np.ndarray]:
    """CDF of an x-measure, from the cached monotone-cubic table."""
    _, _, fwd, _ = _x_measure_table(spec)
    xs = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = fwd(xs)
    return out if isinstance(x, np.ndarray) else float(out)


def sample(spec: MeasureSpec, n: int, seed: int) -> np.ndarray:
    """n inverse-CDF samples from an x-measure, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _, _, _, inv = _x_measure_table(spec)
    u = np.random.default_rng(seed).random(n)
    return np.clip(inv(u), -2.0, 2.0)


def _spectral_cont_grid(spec: MeasureSpec, lo_c: float, hi: float):
    """(lambda grid, normalized cumulative continuous mass) over [lo_c, hi]."""
    if spec.tag == "v1":
        gx = np.linspace(lo_c, hi, 1025)
        lower = 0.0 if spec.xi == 0 else 0.25
        anti = np.where(
            gx >= 0.25, 2.0 * np.sqrt(np.clip(gx - 0.25, 0, None)),
            -2.0 * np.sqrt(np.clip(0.25 - gx, 0, None)),
        )
        base = _abs_sqrt_antideriv(max(lo_c, lower))
        mid = 0.5 * (np.minimum(anti, _abs_sqrt_antideriv(1.25)) - base)
        mid = np.clip(mid, 0.0, None)
        top = 0.5 * np.clip(gx - max(lo_c, 1.25), 0.0, None)
        gm = mid + top
    else:
        # plancherel: cumulative GL8 segments in the u-coordinate
        u1, u2 = math.sqrt(max(lo_c, 0.25) - 0.25), math.sqrt(hi - 0.25)
        us = np.linspace(u1, u2, 1025)
        gl_t, gl_w = np.polynomial.legendre.leggauss(8)
        m, h = 0.5 * (us[:-1] + us[1:]), 0.5 * (us[1:] - us[:-1])
        uu = m[:, None] + h[:, None] * gl_t[None, :]
        seg = h * np.sum(gl_w[None, :] * _spectral_u_integrand(spec.xi)(uu), axis=1)
        gm = np.concatenate([[0.0], np.cumsum(seg)])
        gx = 0.25 + us * us
    total = gm[-1]
    if total <= 0:
        return None
    return gx, gm / total


def sample_spectral(spec: MeasureSpec, low: float, high: float, n: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Samples from a spectral measure restricted to [low, high)."""
    _check_finite(low, high)
    total = _interval_mass(spec, low, high)
    if total <= 0.0:
        raise ZeroMassRegion(f"no spectral mass in [{low}, {high})")
    atoms = list(_spectral_atoms(spec, low, high)) if spec.tag in _SPECTRAL_TAGS else list(
        _tilde_atoms(spec, low, high)
    )
    atom_w = sum(w for _, w in atoms)
    cont = total - atom_w
    grid = None
    if cont > 1e-12 * total and high > 0.25:
        grid = _spectral_cont_grid(spec, max(low, 0.25), high)
    u = rng.random(n) * total
    out = np.empty(n)
    for i, ui in enumerate(u):
        acc = 0.0
        hit = None
        for pos, w in atoms:
            acc += w
            if ui < acc:
                hit = pos
                break
        if hit is not None:
            out[i] = hit
        else:
            v = min(max((ui - atom_w) / max(cont, 1e-300), 0.0), 1.0)
            gx, gcdf = grid
            out[i] = float(np.interp(v, gcdf, gx))
    return out

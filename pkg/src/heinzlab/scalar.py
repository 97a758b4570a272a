"""Scalar weighted means and the two-sided gap bounds built on them.

All operations accept Python floats or NumPy arrays (broadcast together) and
are pure.  Gaps such as ``AM - GM`` or ``x**p - y**p`` are never formed by
subtracting two nearly equal numbers: each one is evaluated from its
increment, so the relative accuracy of a gap is a few ulps even when
``a`` and ``b`` almost coincide.  That is what lets the certifier hold every
sandwich to a 1e-12 relative tolerance.

Conventions
-----------
``a**nu`` is ``exp(nu * log(a))``.  ``r0 = min(nu, 1 - nu)`` and
``R0 = max(nu, 1 - nu)``.  ``G = 2*sqrt(a*b)`` and ``D = (sqrt(a) - sqrt(b))**2``
so that ``a + b = G + D``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EvaluationError
from .results import SandwichResult

__all__ = [
    "PositivePair",
    "WeightSplit",
    "PowerIndex",
    "ExponentP",
    "weighted_arithmetic",
    "weighted_geometric",
    "heinz_mean",
    "young_sandwich",
    "squared_young_sandwich",
    "power_m_refinement_term",
    "power_p_sandwich",
    "theorem22_chain",
    "heinz_sandwich",
    "heinz_power_sandwich",
]

# u = log(hi/lo) below this uses the positive power series for AM - GM.
_SERIES_MAX = 2.0
_SERIES_TERMS = 30


# --------------------------------------------------------------------------
# domain types


def _finite(x):
    return bool(np.all(np.isfinite(x)))


@dataclass(frozen=True)
class PositivePair:
    """Strictly positive scalars ``a`` and ``b`` (arrays allowed)."""

    a: float
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if not (_finite(a) and _finite(b)) or np.any(a <= 0) or np.any(b <= 0):
            raise DomainError("a and b must be finite and > 0")


@dataclass(frozen=True)
class WeightSplit:
    """Weight ``nu`` in [0, 1] with its split constants ``r0`` and ``R0``."""

    nu: float

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if not _finite(nu) or np.any(nu < 0) or np.any(nu > 1):
            raise DomainError("nu must lie in [0, 1]")

    @property
    def r0(self):
        return np.minimum(self.nu, 1.0 - np.asarray(self.nu, dtype=float))

    @property
    def R0(self):
        return np.maximum(self.nu, 1.0 - np.asarray(self.nu, dtype=float))


@dataclass(frozen=True)
class PowerIndex:
    """Positive integer exponent ``m``."""

    m: int

    def __post_init__(self):
        m = np.asarray(self.m)
        if not np.issubdtype(m.dtype, np.integer):
            if not _finite(m) or np.any(m != np.round(m)):
                raise DomainError("m must be a positive integer")
        if np.any(m < 1):
            raise DomainError("m must be a positive integer (m >= 1)")


@dataclass(frozen=True)
class ExponentP:
    """Real exponent ``p >= 1``."""

    p: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if not _finite(p) or np.any(p < 1):
            raise DomainError("p must satisfy p ≥ 1")


# --------------------------------------------------------------------------
# array kernels (no validation; used directly by the certifier)


def split(nu):
    nu = np.asarray(nu, dtype=float)
    other = 1.0 - nu
    return np.minimum(nu, other), np.maximum(nu, other)


def geometric(a, b, nu):
    nu = np.asarray(nu, dtype=float)
    return np.power(a, nu) * np.power(b, 1.0 - nu)


def _gap_factor(v, w, logv, u):
    """``v*expm1(u) - expm1(v*u)`` for ``u >= 0``, ``v + w = 1``, ``v, w >= 0``.

    ``w`` and ``logv = log(v)`` are passed separately so that whichever of
    ``v``/``w`` is tiny is known exactly.  Small ``u`` uses
    ``sum_{k>=2} (v - v**k) u**k / k!`` whose terms are all non-negative.
    For ``v > 1/2`` the direct form is rewritten as
    ``-exp(u)*expm1(-w*u) - w*expm1(u)`` to avoid losing ``w``.
    """
    v, w, logv, u = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (v, w, logv, u)))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = np.where(
            v > 0.5,
            -np.exp(u) * np.expm1(-w * u) - w * np.expm1(u),
            v * np.expm1(u) - np.expm1(v * u),
        )
        us = np.minimum(u, _SERIES_MAX)
        term = np.ones_like(us)
        total = np.zeros_like(us)
        for k in range(1, _SERIES_TERMS + 1):
            term = term * us / k
            if k >= 2:
                coef = np.where(v > 0, -v * np.expm1((k - 1) * logv), 0.0)
                total = total + coef * term
    return np.where(u <= _SERIES_MAX, total, direct)


def amgm_gap(a, b, nu):
    """``nu*a + (1-nu)*b - a**nu * b**(1-nu)`` without cancellation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nu = np.asarray(nu, dtype=float)
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    first = a >= b
    # v: weight on the larger argument, w = 1 - v
    v = np.where(first, nu, 1.0 - nu)
    w = np.where(first, 1.0 - nu, nu)
    with np.errstate(divide="ignore"):
        logv = np.where(first, np.log(nu), np.log1p(-nu))
    u = np.log1p((hi - lo) / lo)
    return lo * _gap_factor(v, w, logv, u)


def sqrt_gap(a, b):
    """``G = 2*sqrt(ab)`` and ``D = (sqrt(a) - sqrt(b))**2 = a + b - G``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sa, sb = np.sqrt(a), np.sqrt(b)
    diff = (a - b) / (sa + sb)
    return 2.0 * sa * sb, diff * diff


def pow_gap(y, d, p):
    """``(y + d)**p - y**p`` for ``y >= 0`` given the increment ``d``.

    ``p == 1`` and ``p == 2`` use the closed forms ``d`` and ``d*(2y + d)``.
    Otherwise ``y**p * expm1(p*log1p(d/y))`` where ``|d| <= y`` (the
    cancelling case) and plain subtraction where ``d > y``, since then
    ``y**p <= 2**-p (y + d)**p``.
    """
    y, d, p = np.broadcast_arrays(
        np.asarray(y, dtype=float), np.asarray(d, dtype=float), np.asarray(p, dtype=float)
    )
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        near = np.exp(p * np.log(y)) * np.expm1(p * np.log1p(d / y))
        far = np.power(y + d, p) - np.power(y, p)
        out = np.where((np.abs(d) <= y) & (y > 0), near, far)
        out = np.where(p == 2, d * (2.0 * y + d), out)
        out = np.where(p == 1, d, out)
    return out


def means(a, b, nu):
    """Arithmetic mean, geometric mean and their gap for weight ``nu``."""
    gm = geometric(a, b, nu)
    d = amgm_gap(a, b, nu)
    return gm + d, gm, d


def young_terms(a, b, nu, p=1.0):
    r0, R0 = split(nu)
    G, D = sqrt_gap(a, b)
    _, gm, d = means(a, b, nu)
    bracket = pow_gap(G, D, p)
    return r0**p * bracket, pow_gap(gm, d, p), R0**p * bracket


def heinz_parts(a, b, nu):
    """``2*H_nu`` and ``(a + b) - 2*H_nu`` (both accurate)."""
    # the 1 - nu terms are the nu terms with a and b exchanged
    gm1, gm2 = geometric(a, b, nu), geometric(b, a, nu)
    gap = amgm_gap(a, b, nu) + amgm_gap(b, a, nu)
    return gm1 + gm2, gap


def heinz_terms(a, b, nu, p=1.0):
    """Terms of the full (unhalved) Heinz power sandwich."""
    r0, R0 = split(nu)
    G, D = sqrt_gap(a, b)
    two_h, hgap = heinz_parts(a, b, nu)
    bracket = pow_gap(G, D, p)
    return (2.0 * r0) ** p * bracket, pow_gap(two_h, hgap, p), (2.0 * R0) ** p * bracket


def chain_terms(a, b, nu, m):
    """The four terms of the power-m refinement chain."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = np.asarray(m, dtype=float)
    r0, _ = split(nu)
    hi, lo = np.maximum(a, b), np.minimum(a, b)
    u = np.log1p((hi - lo) / lo)
    half = np.exp(0.5 * m * np.log(lo)) * np.expm1(0.5 * m * u)  # hi**(m/2) - lo**(m/2)
    t1 = r0**m * (half * half)
    t2, t3, t4 = young_terms(a, b, nu, m)
    return t1, t2, t3, t4


# --------------------------------------------------------------------------
# public operations


def _scalarize(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _checked(*values):
    for v in values:
        if not _finite(v):
            raise EvaluationError("floating-point overflow while evaluating terms")
    return tuple(_scalarize(v) for v in values)


def _sandwich(lower, middle, upper):
    return SandwichResult(*_checked(lower, middle, upper))


def weighted_arithmetic(pair: PositivePair, w: WeightSplit):
    """``nu*a + (1 - nu)*b``."""
    nu = np.asarray(w.nu, dtype=float)
    return _checked(nu * pair.a + (1.0 - nu) * pair.b)[0]


def weighted_geometric(pair: PositivePair, w: WeightSplit):
    """``a**nu * b**(1 - nu)``."""
    return _checked(geometric(pair.a, pair.b, w.nu))[0]


def heinz_mean(pair: PositivePair, w: WeightSplit):
    """``(a**nu b**(1-nu) + a**(1-nu) b**nu) / 2``."""
    two_h, _ = heinz_parts(pair.a, pair.b, w.nu)
    return _checked(0.5 * two_h)[0]


def young_sandwich(pair: PositivePair, w: WeightSplit) -> SandwichResult:
    """``r0*D <= AM - GM <= R0*D``."""
    return _sandwich(*young_terms(pair.a, pair.b, w.nu, 1.0))


def squared_young_sandwich(pair: PositivePair, w: WeightSplit) -> SandwichResult:
    """``r0**2 ((a+b)**2 - 4ab) <= AM**2 - GM**2 <= R0**2 ((a+b)**2 - 4ab)``."""
    return _sandwich(*young_terms(pair.a, pair.b, w.nu, 2.0))


def power_p_sandwich(pair: PositivePair, w: WeightSplit, exp: ExponentP) -> SandwichResult:
    """Power-p Young sandwich; reduces to the two sandwiches above at p = 1, 2."""
    return _sandwich(*young_terms(pair.a, pair.b, w.nu, exp.p))


def power_m_refinement_term(pair: PositivePair, w: WeightSplit, idx: PowerIndex):
    """``r0**m (a**(m/2) - b**(m/2))**2``, a lower bound for ``AM**m - GM**m``."""
    return _checked(chain_terms(pair.a, pair.b, w.nu, idx.m)[0])[0]


def theorem22_chain(pair: PositivePair, w: WeightSplit, idx: PowerIndex):
    """Non-decreasing quadruple ``(t1, t2, t3, t4)``.

    ``t1`` is the power-m refinement term, ``t2``/``t4`` the power-p bounds
    at ``p = m`` and ``t3 = AM**m - GM**m``.  ``t1 == t2`` for m in {1, 2}.
    """
    return _checked(*chain_terms(pair.a, pair.b, w.nu, idx.m))


def heinz_sandwich(pair: PositivePair, w: WeightSplit) -> SandwichResult:
    """``2 r0 ((a+b)/2 - sqrt(ab)) <= (a+b)/2 - H_nu <= 2 R0 (...)``."""
    r0, R0 = split(w.nu)
    _, D = sqrt_gap(pair.a, pair.b)
    _, hgap = heinz_parts(pair.a, pair.b, w.nu)
    return _sandwich(r0 * D, 0.5 * hgap, R0 * D)


def heinz_power_sandwich(pair: PositivePair, w: WeightSplit, exp: ExponentP) -> SandwichResult:
    """``(2 r0)**p ((a+b)**p - G**p) <= (a+b)**p - (2 H_nu)**p <= (2 R0)**p (...)``."""
    return _sandwich(*heinz_terms(pair.a, pair.b, w.nu, exp.p))

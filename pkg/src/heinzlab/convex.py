"""Strictly increasing convex functions and the difference-dominance gate.

Convex functions come from a small closed catalog (``pow:p``, ``exp``,
``spow:c:p``) whose members are checked for strict increase and convexity
when first built.  Arbitrary callables are accepted only through
:func:`unchecked`, and carry ``checked=False`` so reports can flag them.

Each catalog member knows how to evaluate ``phi(s*(y + d)) - phi(s*y)``
from the increment ``d``; sandwiches built here never subtract two large
nearly equal values of ``phi``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import scalar
from .errors import DomainError
from .results import SandwichResult
from .scalar import PositivePair, WeightSplit

__all__ = [
    "ConvexFunctionSpec",
    "PointQuadruple",
    "power",
    "exponential",
    "scaled_power",
    "unchecked",
    "from_key",
    "certify_convexity",
    "slope_chain",
    "difference_dominance",
    "phi_young_sandwich",
    "phi_heinz_sandwich",
]

GRID = np.logspace(-6.0, 6.0, 1024)
_SLOPE_TOL = 1e-12
_TOP_LOG = 700.0


@dataclass(frozen=True)
class ConvexFunctionSpec:
    """A convex, strictly increasing function on [0, inf)."""

    kind: str
    p: float = 1.0
    c: float = 1.0
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    name: str = ""
    checked: bool = True

    @property
    def key(self):
        if self.kind == "power":
            return f"pow:{self.p:g}"
        if self.kind == "exp":
            return "exp"
        if self.kind == "scaled_power":
            return f"spow:{self.c:g}:{self.p:g}"
        return f"unchecked:{self.name}"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            if self.kind == "power":
                return x**self.p
            if self.kind == "exp":
                return np.exp(x)
            if self.kind == "scaled_power":
                return self.c * x**self.p
        return np.asarray(self.func(x), dtype=float)

    def gap(self, y, d, scale=1.0):
        """``phi(scale*(y + d)) - phi(scale*y)`` for ``y >= 0``."""
        y = np.asarray(y, dtype=float)
        d = np.asarray(d, dtype=float)
        scale = np.asarray(scale, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.kind == "power":
                return scale**self.p * scalar.pow_gap(y, d, self.p)
            if self.kind == "scaled_power":
                return self.c * scale**self.p * scalar.pow_gap(y, d, self.p)
            if self.kind == "exp":
                return np.exp(scale * y) * np.expm1(scale * d)
            return self(scale * (y + d)) - self(scale * y)

    def log_abs_gap(self, y, d, scale=1.0):
        """``log|gap(y, d, scale)|``, finite even where the gap overflows."""
        y, d, scale = np.broadcast_arrays(
            np.asarray(y, dtype=float), np.asarray(d, dtype=float), np.asarray(scale, dtype=float)
        )
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.kind == "exp":
                return scale * y + _log_abs_expm1(scale * d)
            if self.kind in ("power", "scaled_power"):
                p = self.p
                inner = np.where(
                    y > 0,
                    p * np.log(y) + _log_abs_expm1(p * np.log1p(d / y)),
                    p * np.log(np.abs(d)),
                )
                return np.log(self.c) + p * np.log(scale) + inner
            return np.log(np.abs(self.gap(y, d, scale)))


def _log_abs_expm1(t):
    """``log|expm1(t)|`` without overflow for large ``t``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        big = t + np.log1p(-np.exp(-np.abs(t)))
        return np.where(t > 30.0, big, np.log(np.abs(np.expm1(np.minimum(t, 30.0)))))


def _check_exponent(p):
    if not np.isfinite(p) or p < 1:
        raise DomainError(f"power exponent must satisfy p ≥ 1, got {p}")


@lru_cache(maxsize=None)
def power(p) -> ConvexFunctionSpec:
    """``x**p`` for real ``p >= 1``."""
    p = float(p)
    _check_exponent(p)
    return certify_convexity(ConvexFunctionSpec("power", p=p))


@lru_cache(maxsize=None)
def exponential() -> ConvexFunctionSpec:
    """``exp(x)``."""
    return certify_convexity(ConvexFunctionSpec("exp"))


@lru_cache(maxsize=None)
def scaled_power(c, p) -> ConvexFunctionSpec:
    """``c * x**p`` with ``c > 0`` and ``p >= 1``."""
    c, p = float(c), float(p)
    _check_exponent(p)
    if not np.isfinite(c) or c <= 0:
        raise DomainError(f"scaled_power needs c > 0, got {c}")
    return certify_convexity(ConvexFunctionSpec("scaled_power", p=p, c=c))


def unchecked(func, name="callback") -> ConvexFunctionSpec:
    """Wrap a user callable without verifying convexity or monotonicity."""
    return ConvexFunctionSpec("callback", func=func, name=name, checked=False)


def from_key(key: str) -> ConvexFunctionSpec:
    """Parse ``"pow:p"``, ``"exp"`` or ``"spow:c:p"``."""
    parts = key.strip().split(":")
    try:
        if parts[0] == "exp" and len(parts) == 1:
            return exponential()
        if parts[0] == "pow" and len(parts) == 2:
            return power(float(parts[1]))
        if parts[0] == "spow" and len(parts) == 3:
            return scaled_power(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed convex function key {key!r}") from exc
    raise DomainError(f"unknown convex function key {key!r} (use pow:p, exp, spow:c:p)")


def certify_convexity(f: ConvexFunctionSpec) -> ConvexFunctionSpec:
    """Sample-check strict increase and convexity on a log-uniform grid.

    First differences must be positive and the chord slopes between
    consecutive grid points non-decreasing.  Slopes are compared in log
    space so ``exp`` does not overflow at the top of the grid.
    """
    h = np.diff(GRID)
    with np.errstate(divide="ignore", invalid="ignore"):
        sign = np.sign(f.gap(GRID[:-1], h))
        log_slope = f.log_abs_gap(GRID[:-1], h) - np.log(h)
    if not np.all(sign > 0) or not np.all(np.isfinite(log_slope)):
        raise DomainError(f"{f.key}: not strictly increasing on the sample grid")
    drift = np.diff(log_slope)
    if np.any(drift < -_SLOPE_TOL * np.maximum(1.0, np.abs(log_slope[1:]))):
        raise DomainError(f"{f.key}: chord slopes decrease on the sample grid")
    return f


# --------------------------------------------------------------------------
# gate


@dataclass(frozen=True)
class PointQuadruple:
    """Points with ``w <= z <= x``, ``y <= x`` and ``z - w <= x - y``."""

    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        x, y, z, w = (np.asarray(v, dtype=float) for v in (self.x, self.y, self.z, self.w))
        if not all(np.all(np.isfinite(v)) and np.all(v >= 0) for v in (x, y, z, w)):
            raise DomainError("points must be finite and lie in [0, inf)")
        if np.any(w > z) or np.any(z > x) or np.any(y > x):
            raise DomainError("ordering hypothesis w <= z <= x, y <= x violated")
        if np.any(z - w > x - y):
            raise DomainError("difference hypothesis z - w <= x - y violated")


def slope_chain(f: ConvexFunctionSpec, w, z, y, x):
    """The four chord slopes for ``w < z < y < x``; non-decreasing for convex ``f``."""
    w, z, y, x = (np.asarray(v, dtype=float) for v in (w, z, y, x))
    if not all(np.all(np.isfinite(v)) and np.all(v >= 0) for v in (w, z, y, x)):
        raise DomainError("points must be finite and lie in [0, inf)")
    if not (np.all(w < z) and np.all(z < y) and np.all(y < x)):
        raise DomainError("slope chain needs w < z < y < x")
    slopes = slope_terms(f, w, z, y, x)
    return scalar._checked(*slopes)


def slope_terms(f, w, z, y, x):
    return (
        f.gap(w, z - w) / (z - w),
        f.gap(w, y - w) / (y - w),
        f.gap(z, y - z) / (y - z),
        f.gap(y, x - y) / (x - y),
    )


def scaled_slope_terms(f, w, z, y, x):
    """The four chord slopes plus a shared ``log_scale`` (overflow safe)."""
    parts = [(w, z - w, 1.0), (w, y - w, 1.0), (z, y - z, 1.0), (y, x - y, 1.0)]
    return phi_gaps(f, parts, [z - w, y - w, y - z, x - y])


def difference_dominance(f: ConvexFunctionSpec, q: PointQuadruple):
    """``(phi(z) - phi(w), phi(x) - phi(y))``; the first never exceeds the second."""
    return scalar._checked(f.gap(q.w, q.z - q.w), f.gap(q.y, q.x - q.y))


def phi_gaps(f, parts, divisors=None):
    """Evaluate ``(y, d, scale)`` gap arguments with a shared log scale.

    Returns the gaps (each divided by the matching entry of ``divisors``
    when given) followed by ``log_scale``, which is zero wherever the plain
    values are finite.
    """
    if divisors is None:
        divisors = [1.0] * len(parts)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = np.broadcast_arrays(
            *[np.asarray(f.gap(*args), dtype=float) / q for args, q in zip(parts, divisors)]
        )
    bad = ~np.all(np.isfinite(np.stack(vals)), axis=0)
    if not np.any(bad):
        return (*vals, np.zeros_like(vals[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.broadcast_arrays(
            *[f.log_abs_gap(*args) - np.log(q) for args, q in zip(parts, divisors)]
        )
    # largest term lands near exp(700) to keep the most dynamic range
    shift = np.max(np.stack(logs), axis=0) - _TOP_LOG
    shift = np.where(np.isfinite(shift) & bad, np.maximum(shift, 0.0), 0.0)
    out = []
    for v, lg, args in zip(vals, logs, parts):
        with np.errstate(over="ignore", invalid="ignore"):
            sgn = np.sign(np.broadcast_to(np.asarray(args[1], dtype=float), lg.shape))
            scaled = sgn * np.exp(lg - shift)
        out.append(np.where(bad, scaled, v))
    return (*out, shift)


def phi_young_terms(f, a, b, nu):
    r0, R0 = scalar.split(nu)
    G, D = scalar.sqrt_gap(a, b)
    _, gm, d = scalar.means(a, b, nu)
    return phi_gaps(f, [(G, D, r0), (gm, d, 1.0), (G, D, R0)])


def phi_heinz_terms(f, a, b, nu, halved=False):
    r0, R0 = scalar.split(nu)
    G, D = scalar.sqrt_gap(a, b)
    two_h, hgap = scalar.heinz_parts(a, b, nu)
    if halved:
        return phi_gaps(f, [(G, D, r0), (0.5 * two_h, 0.5 * hgap, 1.0), (G, D, R0)])
    return phi_gaps(f, [(G, D, 2.0 * r0), (two_h, hgap, 1.0), (G, D, 2.0 * R0)])


def _result(lower, middle, upper, shift):
    values = scalar._checked(lower, middle, upper)
    return SandwichResult(*values, log_scale=scalar._scalarize(shift))


def phi_young_sandwich(f: ConvexFunctionSpec, pair: PositivePair, w: WeightSplit) -> SandwichResult:
    """``phi(r0(a+b)) - phi(r0 G) <= phi(AM) - phi(GM) <= phi(R0(a+b)) - phi(R0 G)``.

    ``G = 2 sqrt(ab)``.  With ``phi = x**p`` this is the power-p Young
    sandwich term for term.
    """
    return _result(*phi_young_terms(f, pair.a, pair.b, w.nu))


def phi_heinz_sandwich(
    f: ConvexFunctionSpec, pair: PositivePair, w: WeightSplit, halved: bool = False
) -> SandwichResult:
    """Heinz-mean sandwich under ``phi``.

    Full variant: ``phi(2r0(a+b)) - phi(4r0 sqrt(ab)) <= phi(a+b) - phi(2 H_nu)
    <= phi(2R0(a+b)) - phi(4R0 sqrt(ab))``.  ``halved=True`` uses ``(a+b)/2``
    and ``H_nu`` in the middle and halves every bound argument.
    """
    return _result(*phi_heinz_terms(f, pair.a, pair.b, w.nu, halved))


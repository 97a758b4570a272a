"""Unitarily invariant norm inequalities for PSD ``A``, ``B`` and arbitrary ``X``.

Every quantity is assembled from a handful of matrices built once per
``(triple, nu)``::

    S = AX + XB                  D = AX - XB
    T = A^(1/2) X B^(1/2)        M = nu AX + (1 - nu) XB
    N = A^nu X B^(1-nu)          K = N + A^(1-nu) X B^nu

:class:`TripleEvaluation` caches those matrices and their singular values,
so asking for several norms or several sandwiches costs three singular
value decompositions.  Hilbert-Schmidt quantities are taken entry-wise.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import convex, linalg, scalar
from .convex import ConvexFunctionSpec
from .errors import DimensionError, DomainError
from .linalg import PsdMatrix
from .results import SandwichResult
from .scalar import WeightSplit

__all__ = [
    "MatrixTriple",
    "NormSelector",
    "TRACE",
    "HILBERT_SCHMIDT",
    "SPECTRAL",
    "TripleEvaluation",
    "hs_identity_residual",
    "hs_young_sandwich",
    "phi_hs_sandwich",
    "heinz_norm_bounds",
    "heinz_norm_sandwich",
    "phi_heinz_norm_sandwich",
    "heinz_convexity_scan",
    "ConvexityScan",
    "heinz_profile",
    "scan_from_values",
    "diagonal_reduction",
]

TAU_ID = 1e-10
TAU_CONV = 1e-9
TAU_SYM = 1e-10


@dataclass(frozen=True)
class MatrixTriple:
    """PSD ``A`` and ``B`` with a conformable ``X`` (all n x n)."""

    A: PsdMatrix
    B: PsdMatrix
    X: np.ndarray

    def __post_init__(self):
        n = self.A.n
        if self.B.n != n or self.X.shape != (n, n):
            raise DimensionError(
                f"triple dimensions disagree: A {n}x{n}, B {self.B.n}x{self.B.n}, X {self.X.shape}"
            )

    @classmethod
    def from_arrays(cls, A, B, X):
        return cls(PsdMatrix(A), PsdMatrix(B), linalg.as_matrix(X))

    @property
    def n(self):
        return self.A.n

    def is_diagonal(self):
        return all(
            np.count_nonzero(m - np.diag(np.diag(m))) == 0 for m in (self.A.base, self.B.base, self.X)
        )

    def to_doc(self):
        return {k: linalg.matrix_to_doc(m) for k, m in zip("ABX", (self.A.base, self.B.base, self.X))}

    @classmethod
    def from_doc(cls, doc):
        try:
            parts = [linalg.matrix_from_doc(doc[k]) for k in "ABX"]
        except (KeyError, TypeError) as exc:
            raise DomainError("triple document needs A, B and X matrices") from exc
        return cls.from_arrays(*parts)


@dataclass(frozen=True)
class NormSelector:
    """Schatten ``p`` (``p >= 1``) or the spectral norm."""

    kind: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind == "schatten":
            if self.p is None or not np.isfinite(self.p) or self.p < 1:
                raise DomainError(f"Schatten norm needs p ≥ 1, got {self.p}")
        elif self.kind != "spectral":
            raise DomainError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def schatten(cls, p):
        return cls("schatten", float(p))

    @classmethod
    def spectral(cls):
        return cls("spectral")

    @classmethod
    def parse(cls, text):
        """``trace``, ``hs``, ``spectral`` or ``schatten:p``."""
        text = text.strip().lower()
        named = {"trace": 1.0, "hs": 2.0, "frobenius": 2.0}
        if text in named:
            return cls.schatten(named[text])
        if text == "spectral":
            return cls.spectral()
        if text.startswith("schatten:"):
            try:
                return cls.schatten(float(text.split(":", 1)[1]))
            except ValueError as exc:
                raise DomainError(f"bad Schatten exponent in {text!r}") from exc
        raise DomainError(f"unknown norm {text!r} (trace, hs, spectral, schatten:p)")

    @property
    def label(self):
        if self.kind == "spectral":
            return "spectral"
        return {1.0: "trace", 2.0: "hs"}.get(self.p, f"schatten{self.p:g}")

    def from_singular_values(self, s):
        if self.kind == "spectral":
            return float(s[0])
        return linalg.schatten_from_sv(s, self.p)

    def __call__(self, a):
        return self.from_singular_values(linalg.singular_values(a))


TRACE = NormSelector.schatten(1)
HILBERT_SCHMIDT = NormSelector.schatten(2)
SPECTRAL = NormSelector.spectral()


def _hs2(a):
    return float(np.sum(a.real**2 + a.imag**2))


class TripleEvaluation:
    """Cached building blocks for one triple at one weight ``nu``."""

    def __init__(self, t: MatrixTriple, nu):
        self.t = t
        self.nu = float(WeightSplit(nu).nu)
        self.r0, self.R0 = (float(v) for v in scalar.split(self.nu))

    # matrices
    @cached_property
    def AX(self):
        return self.t.A.base @ self.t.X

    @cached_property
    def XB(self):
        return self.t.X @ self.t.B.base

    @cached_property
    def S(self):
        return self.AX + self.XB

    @cached_property
    def D(self):
        return self.AX - self.XB

    @cached_property
    def T(self):
        return self.t.A.power(0.5) @ self.t.X @ self.t.B.power(0.5)

    @cached_property
    def M(self):
        return self.nu * self.AX + (1.0 - self.nu) * self.XB

    @cached_property
    def N(self):
        return self.t.A.power(self.nu) @ self.t.X @ self.t.B.power(1.0 - self.nu)

    @cached_property
    def K(self):
        return self.N + self.t.A.power(1.0 - self.nu) @ self.t.X @ self.t.B.power(self.nu)

    # singular values for the unitarily invariant norms
    @cached_property
    def sv_S(self):
        return linalg.singular_values(self.S)

    @cached_property
    def sv_T(self):
        return linalg.singular_values(self.T)

    @cached_property
    def sv_K(self):
        return linalg.singular_values(self.K)

    def norms(self, norm: NormSelector):
        """``(|||S|||, |||T|||, |||K|||)``."""
        return (
            norm.from_singular_values(self.sv_S),
            norm.from_singular_values(self.sv_T),
            norm.from_singular_values(self.sv_K),
        )

    # squared Hilbert-Schmidt norms
    @cached_property
    def hs2(self):
        return {k: _hs2(getattr(self, k)) for k in "SDTMN"}

    # ---------------------------------------------------------------- terms

    def identity_sides(self):
        """``(||D||^2, ||S||^2 - 4||T||^2)``."""
        h = self.hs2
        return h["D"], h["S"] - 4.0 * h["T"]

    def hs_young_terms(self):
        h = self.hs2
        bracket = h["S"] - 4.0 * h["T"]
        return self.r0**2 * bracket, h["M"] - h["N"], self.R0**2 * bracket

    def hs_young_terms_commutator(self):
        """Same sandwich with ``||AX - XB||^2`` as the bracket."""
        h = self.hs2
        return self.r0**2 * h["D"], h["M"] - h["N"], self.R0**2 * h["D"]

    def phi_hs_terms(self, f: ConvexFunctionSpec):
        h = self.hs2
        y, d = 4.0 * h["T"], h["S"] - 4.0 * h["T"]
        return convex.phi_gaps(
            f, [(y, d, self.r0**2), (h["N"], h["M"] - h["N"], 1.0), (y, d, self.R0**2)]
        )

    def hs_display_terms(self, p):
        """``r0^p (||S||^p - 2^p ||T||^p) <= ||M||^p - ||N||^p <= R0^p (...)``."""
        h = self.hs2
        s, t, m, n = (np.sqrt(h[k]) for k in "STMN")
        bracket = s**p - 2.0**p * t**p
        return self.r0**p * bracket, m**p - n**p, self.R0**p * bracket

    def heinz_bounds(self, norm):
        s, t, k = self.norms(norm)
        return 2.0 * t, k, s

    def heinz_sandwich_terms(self, norm):
        s, t, k = self.norms(norm)
        bracket = s - 2.0 * t
        return 2.0 * self.r0 * bracket, s - k, 2.0 * self.R0 * bracket

    def phi_heinz_terms(self, norm, f: ConvexFunctionSpec):
        s, t, k = self.norms(norm)
        y, d = 2.0 * t, s - 2.0 * t
        return convex.phi_gaps(
            f, [(y, d, 2.0 * self.r0), (k, s - k, 1.0), (y, d, 2.0 * self.R0)]
        )

    def heinz_display_terms(self, norm, q):
        s, t, k = self.norms(norm)
        bracket = s**q - 2.0**q * t**q
        return (2.0 * self.r0) ** q * bracket, s**q - k**q, (2.0 * self.R0) ** q * bracket


# --------------------------------------------------------------------------
# public operations


def _sandwich(terms):
    if len(terms) == 4:
        lower, middle, upper, shift = terms
        return SandwichResult(
            *scalar._checked(lower, middle, upper), log_scale=scalar._scalarize(shift)
        )
    return SandwichResult(*scalar._checked(*terms))


def hs_identity_residual(t: MatrixTriple) -> float:
    """``| ||AX - XB||^2 - (||AX + XB||^2 - 4 ||A^1/2 X B^1/2||^2) |``."""
    left, right = TripleEvaluation(t, 0.5).identity_sides()
    return abs(left - right)


def hs_young_sandwich(t: MatrixTriple, w: WeightSplit) -> SandwichResult:
    """Hilbert-Schmidt Young sandwich.

    ``r0^2 (||S||^2 - 4||T||^2) <= ||M||^2 - ||N||^2 <= R0^2 (...)`` where the
    middle uses ``N = A^nu X B^(1-nu)``.
    """
    return _sandwich(TripleEvaluation(t, w.nu).hs_young_terms())


def phi_hs_sandwich(
    t: MatrixTriple, w: WeightSplit, f: ConvexFunctionSpec, form: str = "theorem"
) -> SandwichResult:
    """Convex transfer of the Hilbert-Schmidt sandwich.

    ``form="theorem"`` evaluates ``phi(r0^2 ||S||^2) - phi(4 r0^2 ||T||^2)``
    and friends for any catalog ``phi``.  ``form="display"`` needs
    ``phi = x**(p/2)`` and evaluates the expanded power form
    ``r0^p (||S||^p - 2^p ||T||^p)`` directly, as an independent arrangement.
    """
    ev = TripleEvaluation(t, w.nu)
    if form in ("theorem", "theorem_form"):
        return _sandwich(ev.phi_hs_terms(f))
    if form in ("display", "power_display_form"):
        if f.kind != "power":
            raise DomainError("display form needs phi = x**(p/2)")
        return _sandwich(ev.hs_display_terms(2.0 * f.p))
    raise DomainError(f"unknown form {form!r} (theorem or display)")


def heinz_norm_bounds(t: MatrixTriple, w: WeightSplit, norm: NormSelector):
    """``(2|||T|||, |||K|||, |||S|||)``, non-decreasing."""
    return tuple(float(v) for v in TripleEvaluation(t, w.nu).heinz_bounds(norm))


def heinz_norm_sandwich(t: MatrixTriple, w: WeightSplit, norm: NormSelector) -> SandwichResult:
    """``2r0 (|||S||| - 2|||T|||) <= |||S||| - |||K||| <= 2R0 (|||S||| - 2|||T|||)``."""
    return _sandwich(TripleEvaluation(t, w.nu).heinz_sandwich_terms(norm))


def phi_heinz_norm_sandwich(
    t: MatrixTriple,
    w: WeightSplit,
    norm: NormSelector,
    f: ConvexFunctionSpec,
    form: str = "theorem",
) -> SandwichResult:
    """Convex transfer of the Heinz norm sandwich.

    ``form="display"`` needs ``phi = x**q`` and evaluates
    ``(2r0)^q (|||S|||^q - 2^q |||T|||^q)`` and friends directly.
    """
    ev = TripleEvaluation(t, w.nu)
    if form in ("theorem", "theorem_form"):
        return _sandwich(ev.phi_heinz_terms(norm, f))
    if form in ("display", "power_display_form"):
        if f.kind != "power":
            raise DomainError("display form needs phi = x**q")
        return _sandwich(ev.heinz_display_terms(norm, f.p))
    raise DomainError(f"unknown form {form!r} (theorem or display)")


@dataclass(frozen=True)
class ConvexityScan:
    nus: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    tau_conv: float
    tau_sym: float
    convex: bool
    symmetric: bool
    argmin_index: int
    argmin_distance: float  # from nu = 1/2 to the nearest near-minimal grid point
    min_near_half: bool

    @property
    def ok(self):
        return self.convex and self.symmetric and self.min_near_half

    def rows(self):
        return list(zip(self.nus.tolist(), self.values.tolist()))


def heinz_profile(t: MatrixTriple, grid_size: int):
    """Uniform grid on [0, 1] and the singular values of ``K(nu)`` at each point."""
    grid_size = int(grid_size)
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    nus = np.linspace(0.0, 1.0, grid_size)
    return nus, [TripleEvaluation(t, v).sv_K for v in nus]


def scan_from_values(nus, values) -> ConvexityScan:
    """Convexity, symmetry and argmin report for samples of ``f`` on a uniform grid."""
    nus = np.asarray(nus, dtype=float)
    values = np.asarray(values, dtype=float)
    top = float(np.max(np.abs(values)))
    tau_conv, tau_sym = TAU_CONV * top, TAU_SYM * top
    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    near_min = np.flatnonzero(values <= values.min() + tau_conv)
    distance = float(np.min(np.abs(nus[near_min] - 0.5)))
    cell = 1.0 / (len(nus) - 1)
    return ConvexityScan(
        nus=nus,
        values=values,
        second_differences=second,
        tau_conv=tau_conv,
        tau_sym=tau_sym,
        convex=bool(np.all(second >= -tau_conv)),
        symmetric=bool(np.all(np.abs(values - values[::-1]) <= tau_sym)),
        argmin_index=int(np.argmin(values)),
        argmin_distance=distance,
        min_near_half=distance <= cell * (1 + 1e-12),
    )


def heinz_convexity_scan(t: MatrixTriple, norm: NormSelector, grid_size: int) -> ConvexityScan:
    """Sample ``f(nu) = |||A^nu X B^(1-nu) + A^(1-nu) X B^nu|||`` on a uniform grid.

    Reports convexity (second differences >= -tau_conv), symmetry
    ``f(nu) = f(1 - nu)`` within tau_sym, and whether the grid minimum sits
    within one cell of ``nu = 1/2``.  Near-minimal points (within tau_conv of
    the minimum) all count as minimisers, so flat profiles are not penalised.
    """
    nus, svs = heinz_profile(t, grid_size)
    return scan_from_values(nus, [norm.from_singular_values(s) for s in svs])


# --------------------------------------------------------------------------
# diagonal reduction oracle

_EPS = np.finfo(float).eps
_SUBNORMAL = float(np.finfo(float).smallest_subnormal)


@dataclass(frozen=True)
class ReductionCheck:
    name: str
    matrix: tuple
    scalar: tuple
    tolerance: tuple

    @property
    def ok(self):
        return all(abs(m - s) <= tol for m, s, tol in zip(self.matrix, self.scalar, self.tolerance))

    def worst_ulps(self):
        """Largest discrepancy in units of ``eps * magnitude``."""
        return max(abs(m - s) / (tol / 8.0) if tol > 0 else 0.0
                   for m, s, tol in zip(self.matrix, self.scalar, self.tolerance))


def _lp(v, norm):
    if norm.kind == "spectral":
        return float(np.max(v))
    return linalg.schatten_from_sv(np.sort(v)[::-1], norm.p)


def _ulp_tol(ulps, magnitudes):
    # the subnormal spacing is the ulp floor when the terms underflow
    return tuple(ulps * (_EPS * m + _SUBNORMAL) for m in magnitudes)


def diagonal_reduction(t: MatrixTriple, w: WeightSplit, norms=(TRACE, HILBERT_SCHMIDT, SPECTRAL), ulps=8):
    """Compare matrix sandwiches with entry-wise scalar aggregations.

    For diagonal ``A = diag(a)``, ``B = diag(b)``, ``X = diag(x)`` the
    Hilbert-Schmidt sandwich is ``sum |x_i|^2 * (squared Young terms)_i``,
    the trace-norm Heinz sandwich is ``sum |x_i| * 2 * (Heinz terms)_i`` and
    the Heinz norm bounds are ``l_p`` norms of ``|x_i| * (scalar means)_i``.
    Tolerances are ``ulps * eps`` times the size of the quantities each
    matrix term is computed from.
    """
    if not t.is_diagonal():
        raise DomainError("diagonal reduction needs diagonal A, B and X")
    a = np.real(np.diag(t.A.base))
    b = np.real(np.diag(t.B.base))
    x = np.abs(np.diag(t.X))
    nu = w.nu
    ev = TripleEvaluation(t, nu)
    checks = []

    # Hilbert-Schmidt sandwich
    lo, mid, up = scalar.young_terms(a, b, nu, 2.0)
    x2 = x * x
    agg = (float(np.sum(x2 * lo)), float(np.sum(x2 * mid)), float(np.sum(x2 * up)))
    h = ev.hs2
    mag_bracket = h["S"] + 4.0 * h["T"]
    mag = (ev.r0**2 * mag_bracket, h["M"] + h["N"], ev.R0**2 * mag_bracket)
    checks.append(ReductionCheck("hs-young", ev.hs_young_terms(), agg, _ulp_tol(ulps, mag)))

    # trace-norm Heinz sandwich
    r0, R0 = scalar.split(nu)
    G, D = scalar.sqrt_gap(a, b)
    _, hgap = scalar.heinz_parts(a, b, nu)
    agg = (float(np.sum(x * 2 * r0 * D)), float(np.sum(x * hgap)), float(np.sum(x * 2 * R0 * D)))
    s, tt, k = ev.norms(TRACE)
    mag = (2 * ev.r0 * (s + 2 * tt), s + k, 2 * ev.R0 * (s + 2 * tt))
    checks.append(ReductionCheck("heinz-trace", ev.heinz_sandwich_terms(TRACE), agg, _ulp_tol(ulps, mag)))

    # Heinz norm bounds under each norm
    two_h, _ = scalar.heinz_parts(a, b, nu)
    for norm in norms:
        agg = (2.0 * _lp(x * np.sqrt(a) * np.sqrt(b), norm), _lp(x * two_h, norm), _lp(x * (a + b), norm))
        got = ev.heinz_bounds(norm)
        checks.append(
            ReductionCheck(f"heinz-bounds[{norm.label}]", got, agg, _ulp_tol(ulps, map(abs, agg)))
        )
    return checks

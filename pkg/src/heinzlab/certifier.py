"""Randomized certification of every sandwich, chain and norm inequality.

A run draws trials from the counter-based stream in :mod:`heinzlab.rng`,
evaluates every registered check on every trial, and aggregates relative
slacks per check.  Trial ``i`` depends only on ``(seed, i)``: chunks are
evaluated independently (optionally on several threads, see
``HEINZLAB_THREADS``) and merged in index order, so reports are byte-identical
whatever the worker count.

Tolerance model: with ``scale = max(|terms|, 1)`` a check is violated when
some required ordering slack falls below ``-tol * scale``.  Reported slacks
are relative, i.e. ``slack / scale``.  Non-finite terms and solver failures
are evaluation errors, counted separately and never reported as violations;
more than 0.1% of trials with errors aborts the suite (status FAIL).

Violations are shrunk toward the nearest equality case while they persist:
scalar inputs move ``a, b`` together about their geometric mean and ``nu``
toward the closest of ``0, 1/2, 1``; matrix triples lose rows and columns
and then have their off-diagonal parts halved.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import convex, linalg, oracle, rng, scalar
from .convex import ConvexFunctionSpec
from .errors import DomainError, HeinzlabError
from .matrix_ineq import (
    HILBERT_SCHMIDT,
    SPECTRAL,
    TAU_CONV,
    TAU_ID,
    TAU_SYM,
    TRACE,
    MatrixTriple,
    NormSelector,
    TripleEvaluation,
    diagonal_reduction,
    heinz_profile,
    scan_from_values,
)
from .scalar import ExponentP, PositivePair, PowerIndex, WeightSplit

__all__ = [
    "SCHEMA",
    "TrialConfig",
    "ViolationRecord",
    "GapStatistics",
    "CertificationReport",
    "Check",
    "generate_scalar_trial",
    "generate_matrix_trial",
    "matrix_trial_is_diagonal",
    "matrix_trial_weight",
    "scalar_checks",
    "matrix_checks",
    "certify",
    "shrink",
]

SCHEMA = "heinzlab-report/1"
EPS = float(np.finfo(float).eps)
ERROR_BUDGET = 1e-3
MAX_RECORDS = 5  # shrunk violation records kept per check
MAX_SHRINK_STEPS = 64
SCALAR_CHUNK = 65536
MATRIX_CHUNK = 128
SCAN_EVERY = 10  # matrix trials with index % SCAN_EVERY == 0 get a convexity scan
SCAN_GRID = 33
ORACLE_EVERY = 997  # scalar trials cross-checked in high precision
NU_BOUNDARY_MASS = 0.2
NU_BOUNDARY_WIDTH = 1e-6
DIAGONAL_MASS = 0.2
EPSILON_SHIFT = 1e-8

# counter lanes within a trial
_A, _B, _NU_PICK, _NU_VALUE, _NU_ANCHOR, _M, _P, _Q1, _Q2, _Q3 = range(10)
_N, _DIAG, _SUBSTREAM = 0, 1, 5


@dataclass(frozen=True)
class TrialConfig:
    seed: int = 42
    trials: int = 1000
    scalar_range: tuple = (-3.0, 3.0)
    dim_max: int = 6
    nu_strategy: str = "boundary-weighted"
    tol_rel_scalar: float = 1e-12
    tol_rel_matrix: float = 1e-9

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.trials) < 1:
            raise DomainError("trials must be >= 1")
        lo, hi = self.scalar_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise DomainError("scalar_range needs finite min < max")
        if int(self.dim_max) < 1:
            raise DomainError("dim_max must be >= 1")
        if self.nu_strategy not in ("uniform", "boundary-weighted"):
            raise DomainError("nu_strategy must be 'uniform' or 'boundary-weighted'")
        if not (self.tol_rel_scalar > 0 and self.tol_rel_matrix > 0):
            raise DomainError("tolerances must be positive")

    def to_doc(self):
        return {
            "seed": int(self.seed),
            "trials": int(self.trials),
            "scalar_range": [float(v) for v in self.scalar_range],
            "dim_max": int(self.dim_max),
            "nu_strategy": self.nu_strategy,
            "tol_rel_scalar": float(self.tol_rel_scalar),
            "tol_rel_matrix": float(self.tol_rel_matrix),
        }


@dataclass(frozen=True)
class ViolationRecord:
    inequality_id: str
    inputs: dict
    observed_slack: float
    tolerance: float
    shrunk_inputs: Optional[dict] = None
    shrunk_slack: Optional[float] = None
    shrink_steps: int = 0

    def to_doc(self):
        return {
            "inequality_id": self.inequality_id,
            "inputs": self.inputs,
            "observed_slack": self.observed_slack,
            "tolerance": self.tolerance,
            "shrunk_inputs": self.shrunk_inputs,
            "shrunk_slack": self.shrunk_slack,
            "shrink_steps": self.shrink_steps,
        }


@dataclass(frozen=True)
class GapStatistics:
    inequality_id: str
    paper_eq: str
    kind: str
    tolerance: float
    count: int
    evaluation_errors: int
    equality_hits: int
    violations: int
    min_lower_slack: Optional[float]
    median_lower_slack: Optional[float]
    min_upper_slack: Optional[float]
    median_upper_slack: Optional[float]

    def to_doc(self):
        return {
            "id": self.inequality_id,
            "paper_eq": self.paper_eq,
            "kind": self.kind,
            "tolerance": self.tolerance,
            "trials": self.count,
            "evaluation_errors": self.evaluation_errors,
            "equality_hits": self.equality_hits,
            "violation_count": self.violations,
            "min_lower_slack": self.min_lower_slack,
            "median_lower_slack": self.median_lower_slack,
            "min_upper_slack": self.min_upper_slack,
            "median_upper_slack": self.median_upper_slack,
        }


# --------------------------------------------------------------------------
# checks


class Terms(NamedTuple):
    values: tuple  # ordered terms, or (0, residual) pairs for equality checks
    scale: object = None  # default max(|terms|, 1)
    mask: object = None  # trials the check applies to
    redo: object = None  # factor -> Terms with the compared lower bound perturbed


@dataclass(frozen=True)
class Check:
    """One certified statement.

    ``kind="order"`` requires the terms to be non-decreasing; ``"equal"``
    requires them to coincide.  ``tol=None`` uses the suite tolerance.
    """

    id: str
    paper_eq: str
    kind: str
    fn: Callable = field(compare=False, repr=False)
    tol: Optional[float] = None


def _rel_residual(xs, ys):
    """Largest component-wise ``|x - y| / max(|x|, |y|)``."""
    out = 0.0
    for x, y in zip(xs, ys):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.abs(x - y) / np.maximum(np.maximum(np.abs(x), np.abs(y)), 1e-300)
        out = np.maximum(out, r)
    return out


def _assess(check, terms, tol, factor=None):
    """Vectorised slack evaluation; returns a dict of per-trial arrays."""
    if factor is not None and terms.redo is not None:
        # residual checks perturb the quantity behind the residual instead
        terms, factor = terms.redo(factor), None
    vals = [np.asarray(v, dtype=float) for v in terms.values]
    vals = [np.array(v, dtype=float) for v in np.broadcast_arrays(*vals)]
    if factor is not None:
        # the lowest term that is not a constant zero placeholder
        k = next((i for i, v in enumerate(vals) if np.any(v != 0)), 0)
        vals[k] = vals[k] * factor
    with np.errstate(invalid="ignore", over="ignore"):
        if terms.scale is None:
            scale = np.maximum(np.max(np.abs(np.stack(vals)), axis=0), 1.0)
        else:
            scale = np.broadcast_to(np.asarray(terms.scale, dtype=float), vals[0].shape)
        if check.kind == "order":
            diffs = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
            lower = diffs[0]
            upper = diffs[-1] if len(diffs) > 1 else np.full_like(lower, np.nan)
            worst = np.min(np.stack(diffs), axis=0)
        else:
            resid = np.max(np.stack([np.abs(v - vals[0]) for v in vals[1:]]), axis=0)
            lower = -resid
            upper = np.full_like(lower, np.nan)
            worst = -resid
        finite = np.isfinite(worst) & np.isfinite(scale) & np.all(np.isfinite(np.stack(vals)), axis=0)
        rel_worst = worst / scale
        violated = finite & (worst < -tol * scale)
        if check.kind == "order":
            hit = finite & ~violated & (np.minimum(lower, np.where(np.isnan(upper), lower, upper)) <= tol * scale)
        else:
            hit = finite & ~violated
    applies = np.ones_like(finite) if terms.mask is None else np.broadcast_to(terms.mask, finite.shape)
    return {
        "applies": applies.astype(bool),
        "finite": finite,
        "lower": lower / scale,
        "upper": upper / scale,
        "worst": rel_worst,
        "violated": violated,
        "hit": hit,
    }


# --------------------------------------------------------------------------
# trial generation


def _draw_nu(cfg, idx):
    u_pick = rng.uniform(cfg.seed, rng.counters(idx, _NU_PICK))
    u_val = rng.uniform(cfg.seed, rng.counters(idx, _NU_VALUE))
    u_anchor = rng.uniform(cfg.seed, rng.counters(idx, _NU_ANCHOR))
    nu = u_val.copy()
    if cfg.nu_strategy == "boundary-weighted":
        near = u_pick < NU_BOUNDARY_MASS
        which = np.floor(u_anchor * 6.0).astype(int)  # anchor = which // 2, side = which % 2
        dist = u_val * NU_BOUNDARY_WIDTH
        anchor = np.array([0.0, 0.5, 1.0])[which // 2]
        side = np.where(which % 2 == 0, 1.0, -1.0)
        side = np.where(anchor == 0.0, 1.0, np.where(anchor == 1.0, -1.0, side))
        nu = np.where(near, anchor + side * dist, nu)
    return nu


def _scalar_fields(cfg, idx):
    idx = np.asarray(idx, dtype=np.uint64)
    lo, hi = (float(v) for v in cfg.scalar_range)

    def draw(lane):
        return rng.uniform(cfg.seed, rng.counters(idx, lane))

    return {
        "index": idx.astype(np.int64),
        "a": 10.0 ** (lo + (hi - lo) * draw(_A)),
        "b": 10.0 ** (lo + (hi - lo) * draw(_B)),
        "nu": _draw_nu(cfg, idx),
        "m": 1 + np.floor(12.0 * draw(_M)),
        "p": 8.0 ** draw(_P),
        "q1": draw(_Q1),
        "q2": draw(_Q2),
        "q3": draw(_Q3),
    }


def _check_index(cfg, index):
    if not 0 <= int(index) < int(cfg.trials):
        raise DomainError(f"trial index {index} outside 0..{cfg.trials - 1}")


def generate_scalar_trial(cfg: TrialConfig, index: int):
    """``(PositivePair, WeightSplit, PowerIndex, ExponentP)`` for trial ``index``."""
    _check_index(cfg, index)
    f = _scalar_fields(cfg, np.array([index]))
    return (
        PositivePair(float(f["a"][0]), float(f["b"][0])),
        WeightSplit(float(f["nu"][0])),
        PowerIndex(int(f["m"][0])),
        ExponentP(float(f["p"][0])),
    )


def _matrix_arrays(cfg, index):
    idx = np.array([index], dtype=np.uint64)
    n = 1 + int(np.floor(cfg.dim_max * rng.uniform(cfg.seed, rng.counters(idx, _N))[0]))
    n = min(n, int(cfg.dim_max))
    diagonal = bool(rng.uniform(cfg.seed, rng.counters(idx, _DIAG))[0] < DIAGONAL_MASS)
    nu = float(_draw_nu(cfg, idx)[0])
    sub = int(rng.raw64(cfg.seed, rng.counters(idx, _SUBSTREAM))[0])
    u = rng.uniform(sub, np.arange(6 * n * n, dtype=np.uint64)).reshape(3, 2, n * n)
    mats = []
    for k in range(3):
        re, im = rng.normal_pair(u[k, 0], u[k, 1])
        mats.append(((re + 1j * im) / np.sqrt(2.0)).reshape(n, n))
    G, H, X = mats
    eye = np.eye(n)
    A = G.conj().T @ G + EPSILON_SHIFT * eye
    B = H.conj().T @ H + EPSILON_SHIFT * eye
    A, B = 0.5 * (A + A.conj().T), 0.5 * (B + B.conj().T)
    if diagonal:
        A, B, X = (np.diag(np.diag(m)) for m in (A, B, X))
        A, B = A.real.astype(complex), B.real.astype(complex)
    return A, B, X, nu, diagonal


def generate_matrix_trial(cfg: TrialConfig, index: int) -> MatrixTriple:
    """Random PSD ``A = G^H G + eps I``, ``B`` likewise, complex Gaussian ``X``."""
    _check_index(cfg, index)
    A, B, X, _, _ = _matrix_arrays(cfg, index)
    return MatrixTriple.from_arrays(A, B, X)


def matrix_trial_is_diagonal(cfg: TrialConfig, index: int) -> bool:
    """Whether trial ``index`` belongs to the diagonal sub-stream."""
    idx = np.array([index], dtype=np.uint64)
    return bool(rng.uniform(cfg.seed, rng.counters(idx, _DIAG))[0] < DIAGONAL_MASS)


def matrix_trial_weight(cfg: TrialConfig, index: int) -> float:
    """The weight ``nu`` drawn for matrix trial ``index``."""
    return float(_draw_nu(cfg, np.array([index], dtype=np.uint64))[0])


# --------------------------------------------------------------------------
# scalar checks


class ScalarBatch:
    """Vectorised trial inputs with lazily built convex functions."""

    def __init__(self, fields):
        self.f = fields
        for k, v in fields.items():
            setattr(self, k, v)

    def __len__(self):
        return len(self.a)

    def phi(self, family):
        if family == "pow":
            return ConvexFunctionSpec("power", p=self.p)
        if family == "spow":
            return ConvexFunctionSpec("scaled_power", p=self.p, c=3.0)
        return convex.exponential()

    @cached_property
    def split(self):
        return scalar.split(self.nu)

    @cached_property
    def sqrt_gap(self):
        return scalar.sqrt_gap(self.a, self.b)

    @cached_property
    def chain(self):
        return scalar.chain_terms(self.a, self.b, self.nu, self.m)

    def inputs(self, i):
        return {
            "index": int(self.index[i]),
            "a": float(self.a[i]),
            "b": float(self.b[i]),
            "nu": float(self.nu[i]),
            "m": int(self.m[i]),
            "p": float(self.p[i]),
            "q": [float(self.q1[i]), float(self.q2[i]), float(self.q3[i])],
        }

    @classmethod
    def from_inputs(cls, d):
        one = lambda v: np.array([v], dtype=float)  # noqa: E731
        return cls(
            {
                "index": np.array([d.get("index", 0)], dtype=np.int64),
                "a": one(d["a"]),
                "b": one(d["b"]),
                "nu": one(d["nu"]),
                "m": one(d["m"]),
                "p": one(d["p"]),
                "q1": one(d["q"][0]),
                "q2": one(d["q"][1]),
                "q3": one(d["q"][2]),
            }
        )


def _slope_points(bt):
    lo, hi = np.minimum(bt.a, bt.b), np.maximum(bt.a, bt.b)
    G, _ = bt.sqrt_gap
    z = 0.5 * G
    y = 0.5 * (bt.a + bt.b)
    ok = (lo < z) & (z < y) & (y < hi)
    return lo, z, y, hi, ok


def _eq11(family):
    def fn(bt):
        w, z, y, x, ok = _slope_points(bt)
        *slopes, _ = convex.scaled_slope_terms(bt.phi(family), w, z, y, x)
        return Terms(tuple(slopes), mask=ok)

    return fn


def _eq13(family):
    def fn(bt):
        x = bt.a + bt.b
        dxy = bt.q1 * x
        y = x - dxy
        d1 = bt.q2 * dxy
        w = bt.q3 * (x - d1)
        first, second, _ = convex.phi_gaps(bt.phi(family), [(w, d1, 1.0), (y, dxy, 1.0)])
        return Terms((np.zeros_like(first), first, second))

    return fn


def _eq14(family):
    def fn(bt):
        lo, mid, up, _ = convex.phi_young_terms(bt.phi(family), bt.a, bt.b, bt.nu)
        return Terms((lo, mid, up))

    return fn


def _eq17(family, halved):
    def fn(bt):
        lo, mid, up, _ = convex.phi_heinz_terms(bt.phi(family), bt.a, bt.b, bt.nu, halved)
        return Terms((lo, mid, up))

    return fn


def _eq1(bt):
    am, gm, _ = scalar.means(bt.a, bt.b, bt.nu)
    return Terms((gm, am))


def _heinz_means(bt):
    two_h, _ = scalar.heinz_parts(bt.a, bt.b, bt.nu)
    G, _ = bt.sqrt_gap
    return Terms((0.5 * G, 0.5 * two_h, 0.5 * (bt.a + bt.b)))


def _young(p):
    def fn(bt):
        return Terms(scalar.young_terms(bt.a, bt.b, bt.nu, bt.p if p is None else p))

    return fn


def _eq8(bt):
    t1, _, t3, _ = bt.chain
    return Terms((t1, t3))


def _eq16(bt):
    return Terms(bt.chain)


def _eq16_degenerate(bt):
    t1, t2, _, _ = bt.chain
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), 1e-300)
    return Terms((t1, t2), scale=scale, mask=bt.m <= 2)


def _eq9(bt):
    return Terms(scalar.heinz_terms(bt.a, bt.b, bt.nu, 1.0))


def _eq10(bt):
    r0, R0 = bt.split
    _, D = bt.sqrt_gap
    _, hgap = scalar.heinz_parts(bt.a, bt.b, bt.nu)
    return Terms((r0 * D, 0.5 * hgap, R0 * D))


def _eq18(bt):
    return Terms(scalar.heinz_terms(bt.a, bt.b, bt.nu, bt.p))


def _ulp_pair(xs, ys):
    r = _rel_residual(xs, ys)
    redo = lambda f: _ulp_pair((xs[0] * f, *xs[1:]), ys)  # noqa: E731
    return Terms((np.zeros_like(r), r), scale=1.0, redo=redo)


def _id_p(p):
    def fn(bt):
        n = len(bt)
        ref = (scalar.young_terms(bt.a, bt.b, bt.nu, 1.0) if p == 1
               else scalar.young_terms(bt.a, bt.b, bt.nu, 2.0))
        got = scalar.young_terms(bt.a, bt.b, bt.nu, np.full(n, float(p)))
        return _ulp_pair(got, ref)

    return fn


def _id_phi_pow(bt):
    lo, mid, up, _ = convex.phi_young_terms(bt.phi("pow"), bt.a, bt.b, bt.nu)
    return _ulp_pair((lo, mid, up), scalar.young_terms(bt.a, bt.b, bt.nu, bt.p))


def _id_phi_heinz_pow(bt):
    lo, mid, up, _ = convex.phi_heinz_terms(bt.phi("pow"), bt.a, bt.b, bt.nu)
    return _ulp_pair((lo, mid, up), scalar.heinz_terms(bt.a, bt.b, bt.nu, bt.p))


def _oracle_xcheck(bt, factor=1.0):
    mask = bt.index % ORACLE_EVERY == 0
    resid = np.zeros(len(bt))
    r0, R0 = bt.split
    _, D = bt.sqrt_gap
    _, hgap = scalar.heinz_parts(bt.a, bt.b, bt.nu)
    young = scalar.young_terms(bt.a, bt.b, bt.nu, 1.0)
    lib = {
        "young": (young[0] * factor, *young[1:]),
        "young-p": scalar.young_terms(bt.a, bt.b, bt.nu, bt.p),
        "chain": bt.chain,
        "heinz": (r0 * D, 0.5 * hgap, R0 * D),
        "heinz-p": scalar.heinz_terms(bt.a, bt.b, bt.nu, bt.p),
    }
    for i in np.flatnonzero(mask):
        ref = oracle.scalar_terms(bt.a[i], bt.b[i], bt.nu[i], bt.m[i], bt.p[i])
        worst = 0.0
        for key, terms in lib.items():
            got = [float(np.asarray(t)[i]) for t in terms]
            scale = max(max(abs(v) for v in ref[key]), 1.0)
            worst = max(worst, max(abs(g - r) for g, r in zip(got, ref[key])) / scale)
        resid[i] = worst
    redo = lambda f: _oracle_xcheck(bt, factor * f)  # noqa: E731
    return Terms((np.zeros_like(resid), resid), scale=1.0, mask=mask, redo=redo)


_FAMILIES = ("pow", "exp", "spow")


def scalar_checks():
    """The registered scalar checks, in report order."""
    out = [
        Check("eq1", "(1)", "order", _eq1),
        Check("heinz-means", "Heinz means", "order", _heinz_means),
        Check("eq4", "(2)-(4)", "order", _young(1.0)),
        Check("eq7", "(5)-(7)", "order", _young(2.0)),
        Check("eq8", "Theorem 1.1 (8)", "order", _eq8),
        Check("eq9", "(9)", "order", _eq9),
        Check("eq10", "(10)", "order", _eq10),
    ]
    for fam in _FAMILIES:
        out.append(Check(f"eq11[{fam}]", "(11)", "order", _eq11(fam)))
    for fam in _FAMILIES:
        out.append(Check(f"eq13[{fam}]", "Theorem 2.1 (13)", "order", _eq13(fam)))
    for fam in _FAMILIES:
        out.append(Check(f"eq14[{fam}]", "Corollary 2.1 (14)", "order", _eq14(fam)))
    out += [
        Check("eq15", "Corollary 2.2 (15)", "order", _young(None)),
        Check("eq16", "Theorem 2.2 (16)", "order", _eq16),
        Check("eq16-degenerate", "Theorem 2.2, m = 1, 2", "equal", _eq16_degenerate),
    ]
    for fam in _FAMILIES:
        out.append(Check(f"eq17[{fam}]", "(17)", "order", _eq17(fam, False)))
        out.append(Check(f"eq17-halved[{fam}]", "(17) halved form", "order", _eq17(fam, True)))
    out += [
        Check("eq18", "(18)", "order", _eq18),
        Check("id-p1", "(15) at p = 1", "equal", _id_p(1), tol=4 * EPS),
        Check("id-p2", "(15) at p = 2", "equal", _id_p(2), tol=4 * EPS),
        Check("id-phi-pow", "(14) with phi = x^p", "equal", _id_phi_pow, tol=4 * EPS),
        Check("id-phi-heinz-pow", "(17) with phi = x^p", "equal", _id_phi_heinz_pow, tol=4 * EPS),
        Check("oracle-xcheck", "high-precision reference", "equal", _oracle_xcheck),
    ]
    return out


# --------------------------------------------------------------------------
# matrix checks


class MatrixCase:
    """One matrix trial: triple, weight and lazily computed pieces."""

    def __init__(self, triple: MatrixTriple, nu: float, index: int = 0, diagonal=None):
        self.t = triple
        self.nu = float(nu)
        self.index = int(index)
        self._diagonal = diagonal

    @cached_property
    def ev(self):
        return TripleEvaluation(self.t, self.nu)

    @cached_property
    def diagonal(self):
        """Diagonal sub-stream flag, or the actual structure when no flag is given."""
        if self._diagonal is not None:
            return bool(self._diagonal)
        return self.t.is_diagonal()

    @cached_property
    def scanned(self):
        return self.index % SCAN_EVERY == 0

    @cached_property
    def profile(self):
        return heinz_profile(self.t, SCAN_GRID)

    def scan(self, norm):
        nus, svs = self.profile
        return scan_from_values(nus, [norm.from_singular_values(s) for s in svs])

    @cached_property
    def reduction(self):
        return {c.name: c for c in diagonal_reduction(self.t, WeightSplit(self.nu), _NORMS)}

    def inputs(self):
        return {"index": self.index, "nu": self.nu, "triple": self.t.to_doc()}

    @classmethod
    def from_inputs(cls, d):
        return cls(MatrixTriple.from_doc(d["triple"]), d["nu"], d.get("index", 0))


_NORMS = (TRACE, HILBERT_SCHMIDT, NormSelector.schatten(3), SPECTRAL)
_HS_PHIS = ("pow:1", "pow:1.5", "pow:2", "exp", "spow:3:1.5")
_COR_PHIS = ("pow:1", "pow:2", "pow:3", "exp", "spow:3:1.5")
_NAN = float("nan")


def _hs_identity(c):
    left, right = c.ev.identity_sides()
    return Terms((left, right), scale=c.ev.hs2["S"] + 1.0)


def _phi_terms(terms):
    lo, mid, up, _ = terms
    return Terms((float(lo), float(mid), float(up)))


def _thm31(key):
    f = convex.from_key(key)
    return lambda c: _phi_terms(c.ev.phi_hs_terms(f))


def _thm31_display(p):
    return lambda c: Terms(c.ev.hs_display_terms(p))


def _heinz_bounds(norm):
    return lambda c: Terms(c.ev.heinz_bounds(norm))


def _eq22(norm):
    def fn(c):
        lo, mid, _ = c.ev.heinz_sandwich_terms(norm)
        return Terms((lo, mid))

    return fn


def _thm32(norm):
    def fn(c):
        _, mid, up = c.ev.heinz_sandwich_terms(norm)
        return Terms((mid, up))

    return fn


def _eq24(norm):
    return lambda c: Terms(c.ev.heinz_sandwich_terms(norm))


def _cor31(norm, key):
    f = convex.from_key(key)
    return lambda c: _phi_terms(c.ev.phi_heinz_terms(norm, f))


def _cor31_display(norm, q):
    return lambda c: Terms(c.ev.heinz_display_terms(norm, q))


def _spiked(s, i, factor):
    """The scan with sample ``i`` of the profile multiplied by ``factor``."""
    values = s.values.copy()
    values[i] *= factor
    return scan_from_values(s.nus, values)


def _scan_checks(norm):
    def convex_terms(s):
        top = float(np.max(np.abs(s.values)))
        # redo spikes the centre sample, which breaks convexity there
        redo = lambda f: convex_terms(_spiked(s, len(s.nus) // 2, f))  # noqa: E731
        return Terms((0.0, float(np.min(s.second_differences))), scale=max(top, 1e-300), redo=redo)

    def symmetric_terms(s):
        top = float(np.max(np.abs(s.values)))
        redo = lambda f: symmetric_terms(_spiked(s, 0, f))  # noqa: E731
        return Terms((0.0, float(np.max(np.abs(s.values - s.values[::-1])))), scale=max(top, 1e-300), redo=redo)

    def convex_(c):
        if not c.scanned:
            return Terms((_NAN, _NAN), mask=False)
        return convex_terms(c.scan(norm))

    def symmetric(c):
        if not c.scanned:
            return Terms((_NAN, _NAN), mask=False)
        return symmetric_terms(c.scan(norm))

    def argmin(c):
        if not c.scanned:
            return Terms((_NAN, _NAN), mask=False)
        s = c.scan(norm)
        cell = 1.0 / (len(s.nus) - 1)
        return Terms((s.argmin_distance, cell), scale=1.0)

    return convex_, symmetric, argmin


def _diag(name):
    def terms(r):
        # redo perturbs the matrix-side lower term
        redo = lambda f: terms(replace(r, matrix=(r.matrix[0] * f, *r.matrix[1:])))  # noqa: E731
        return Terms((0.0, r.worst_ulps()), scale=1.0, redo=redo)

    def fn(c):
        if not c.diagonal:
            return Terms((_NAN, _NAN), mask=False)
        return terms(c.reduction[name])

    return fn


def matrix_checks():
    """The registered matrix checks, in report order."""
    out = [
        Check("hs-identity", "identity before (21)", "equal", _hs_identity, tol=TAU_ID),
        Check("eq19-20", "(19)-(20)", "order", lambda c: Terms(c.ev.hs_young_terms_commutator())),
        Check("eq21", "(21)", "order", lambda c: Terms(c.ev.hs_young_terms())),
    ]
    for key in _HS_PHIS:
        out.append(Check(f"thm31[{key}]", "Theorem 3.1", "order", _thm31(key)))
    for p in (2, 3, 4):
        out.append(Check(f"thm31-display[p={p}]", "Theorem 3.1, phi = x^(p/2)", "order", _thm31_display(float(p))))
    for norm in _NORMS:
        lab = norm.label
        out += [
            Check(f"heinz-bounds[{lab}]", "Heinz norm inequalities", "order", _heinz_bounds(norm)),
            Check(f"eq22[{lab}]", "(22)", "order", _eq22(norm)),
            Check(f"thm32[{lab}]", "Theorem 3.2 (23)", "order", _thm32(norm)),
            Check(f"eq24[{lab}]", "(24)", "order", _eq24(norm)),
        ]
        for key in _COR_PHIS:
            out.append(Check(f"cor31[{lab},{key}]", "Corollary 3.1", "order", _cor31(norm, key)))
        for q in (1, 2, 3):
            out.append(
                Check(f"cor31-display[{lab},q={q}]", "Corollary 3.1, phi = x^q", "order", _cor31_display(norm, float(q)))
            )
    for norm in _NORMS:
        lab = norm.label
        conv, sym, arg = _scan_checks(norm)
        out += [
            Check(f"f-convex[{lab}]", "convexity of f(nu)", "order", conv, tol=TAU_CONV),
            Check(f"f-symmetric[{lab}]", "f(nu) = f(1 - nu)", "equal", sym, tol=TAU_SYM),
            Check(f"f-argmin[{lab}]", "minimum of f at nu = 1/2", "order", arg, tol=1e-12),
        ]
    names = ["hs-young", "heinz-trace"] + [f"heinz-bounds[{n.label}]" for n in _NORMS]
    for name in names:
        out.append(Check(f"diag-{name}", "diagonal reduction", "equal", _diag(name), tol=8.0))
    return out


_REGISTRY = {}


def _registry():
    if not _REGISTRY:
        for c in scalar_checks():
            _REGISTRY[c.id] = ("scalar", c)
        for c in matrix_checks():
            _REGISTRY[c.id] = ("matrix", c)
    return _REGISTRY


def _tolerance(cfg, suite, check):
    if check.tol is not None:
        return check.tol
    return cfg.tol_rel_scalar if suite == "scalar" else cfg.tol_rel_matrix


# --------------------------------------------------------------------------
# evaluation


def _eval_scalar_check(check, bt, tol, factor):
    try:
        with np.errstate(all="ignore"):
            terms = check.fn(bt)
    except HeinzlabError:
        n = len(bt)
        nan = np.full(n, np.nan)
        terms = Terms((nan, nan))
    return _assess(check, terms, tol, factor)


def _eval_matrix_check(check, case, tol, factor):
    try:
        with np.errstate(all="ignore"):
            terms = check.fn(case)
            if factor is not None and terms.redo is not None:
                terms, factor = terms.redo(factor), None
    except HeinzlabError:
        terms = Terms((_NAN, _NAN))
    vals = tuple(np.array([v], dtype=float) for v in terms.values)
    scale = None if terms.scale is None else np.array([terms.scale], dtype=float)
    mask = None if terms.mask is None else np.array([bool(terms.mask)])
    return _assess(check, Terms(vals, scale, mask), tol, factor)


def _reduce(check, r, tol):
    """Compact per-chunk statistics for one check."""
    applies, finite = r["applies"], r["finite"]
    good = applies & finite
    lo = r["lower"][good]
    up = r["upper"][good]
    up = up[np.isfinite(up)]
    bad = np.flatnonzero(r["violated"] & good)
    return {
        "count": int(np.count_nonzero(good)),
        "errors": int(np.count_nonzero(applies & ~finite)),
        "hits": int(np.count_nonzero(r["hit"] & good)),
        "lows": lo.astype(np.float32),
        "ups": up.astype(np.float32),
        "min_lo": float(np.min(lo)) if lo.size else np.inf,
        "min_up": float(np.min(up)) if up.size else np.inf,
        "violations": int(bad.size),
        "records": [(r["inputs"](j), float(r["worst"][j]), tol) for j in bad[:MAX_RECORDS]],
        "error_mask": applies & ~finite,
    }


def _finish_chunk(partials):
    bad = None
    for p in partials.values():
        m = p.pop("error_mask")
        bad = m if bad is None else bad | m
    return partials, int(np.count_nonzero(bad)) if bad is not None else 0


def _run_scalar_chunk(cfg, checks, perturb, start, stop):
    bt = ScalarBatch(_scalar_fields(cfg, np.arange(start, stop, dtype=np.uint64)))
    out = {}
    for c in checks:
        tol = _tolerance(cfg, "scalar", c)
        r = _eval_scalar_check(c, bt, tol, perturb.get(c.id))
        r["inputs"] = bt.inputs
        out[c.id] = _reduce(c, r, tol)
    return _finish_chunk(out)


def _default_matrix_source(cfg, index):
    A, B, X, nu, diagonal = _matrix_arrays(cfg, index)
    return MatrixTriple.from_arrays(A, B, X), nu, diagonal


def _run_matrix_chunk(cfg, checks, perturb, source, start, stop):
    cols = {c.id: [] for c in checks}
    cases = []
    for i in range(start, stop):
        try:
            triple, nu, *flag = source(cfg, i)
            case = MatrixCase(triple, nu, i, flag[0] if flag else None)
        except HeinzlabError:
            case = None
        cases.append(case)
        for c in checks:
            tol = _tolerance(cfg, "matrix", c)
            if case is None:
                res = _assess(c, Terms((np.array([_NAN]), np.array([_NAN]))), tol)
            else:
                res = _eval_matrix_check(c, case, tol, perturb.get(c.id))
            cols[c.id].append(res)
    out = {}
    for c in checks:
        parts = cols[c.id]
        merged = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
        merged["inputs"] = lambda j, cases=cases: cases[j].inputs()
        out[c.id] = _reduce(c, merged, _tolerance(cfg, "matrix", c))
    return _finish_chunk(out)


def _workers():
    try:
        return max(1, int(os.environ.get("HEINZLAB_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x):
    if x is None or not np.isfinite(x):
        return None
    return float(x)


@dataclass
class CertificationReport:
    config: TrialConfig
    suite: str
    statistics: list
    violations: list
    trial_errors: int
    trials: int
    perturb: dict = field(default_factory=dict)

    @property
    def violation_count(self):
        return sum(s.violations for s in self.statistics)

    @property
    def aborted(self):
        return self.trial_errors > ERROR_BUDGET * self.trials

    @property
    def ok(self):
        return self.violation_count == 0 and not self.aborted

    def summary_line(self):
        head = "OK" if self.ok else "FAIL"
        line = (
            f"{head} {self.trials} trials, {len(self.statistics)} inequalities, "
            f"{self.violation_count} violations"
        )
        if self.trial_errors:
            line += f", {self.trial_errors} trials with evaluation errors"
        if self.aborted:
            line += " (error budget exceeded)"
        return line

    def to_doc(self):
        doc = {
            "schema": SCHEMA,
            "suite": self.suite,
            "config": self.config.to_doc(),
            "trials": self.trials,
            "trials_with_evaluation_errors": self.trial_errors,
            "error_budget": ERROR_BUDGET,
            "aborted": self.aborted,
            "status": "OK" if self.ok else "FAIL",
        }
        if self.perturb:
            doc["perturb"] = {k: float(v) for k, v in sorted(self.perturb.items())}
        by_id = {}
        for v in self.violations:
            by_id.setdefault(v.inequality_id, []).append(v.to_doc())
        doc["inequalities"] = []
        for s in self.statistics:
            entry = s.to_doc()
            entry["violations"] = by_id.get(s.inequality_id, [])
            doc["inequalities"].append(entry)
        doc["summary"] = self.summary_line()
        return doc

    def to_json(self):
        return json.dumps(self.to_doc(), indent=1, allow_nan=False) + "\n"


def _median(chunks):
    if not chunks:
        return None
    v = np.concatenate(chunks)
    v = v[np.isfinite(v)]
    return _fmt(np.median(v)) if v.size else None


def _aggregate(check, tol, partials, cfg, perturb):
    parts = [p[check.id] for p in partials]
    lows = [p["lows"] for p in parts]
    ups = [p["ups"] for p in parts]
    records = []
    for p in parts:
        for inputs, worst, t in p["records"]:
            if len(records) < MAX_RECORDS:
                records.append(shrink(ViolationRecord(check.id, inputs, worst, t), cfg, perturb))
    stats = GapStatistics(
        inequality_id=check.id,
        paper_eq=check.paper_eq,
        kind=check.kind,
        tolerance=tol,
        count=sum(p["count"] for p in parts),
        evaluation_errors=sum(p["errors"] for p in parts),
        equality_hits=sum(p["hits"] for p in parts),
        violations=sum(p["violations"] for p in parts),
        min_lower_slack=_fmt(min((p["min_lo"] for p in parts), default=np.inf)),
        median_lower_slack=_median(lows),
        min_upper_slack=_fmt(min((p["min_up"] for p in parts), default=np.inf)),
        median_upper_slack=_median(ups),
    )
    return stats, records


def certify(
    cfg: TrialConfig,
    suite: str = "all",
    perturb: Optional[dict] = None,
    matrix_source: Optional[Callable] = None,
    workers: Optional[int] = None,
):
    """Run every registered check on ``cfg.trials`` trials.

    ``suite`` is ``"scalar"``, ``"matrix"`` or ``"all"``.  ``perturb`` maps a
    check id to a factor applied to its lowest non-zero term; it exists to
    demonstrate that the harness catches corrupted bounds.
    ``matrix_source(cfg, index) -> (MatrixTriple, nu)`` replaces the random
    matrix generator.  Returns ``(statistics, violations)`` wrapped in a
    :class:`CertificationReport`.
    """
    if suite not in ("scalar", "matrix", "all"):
        raise DomainError(f"unknown suite {suite!r} (scalar, matrix, all)")
    perturb = dict(perturb or {})
    reg = _registry()
    unknown = [k for k in perturb if k not in reg]
    if unknown:
        raise DomainError(f"unknown inequality ids in perturb: {unknown}")
    workers = workers or _workers()
    n = int(cfg.trials)
    stats, records, errors = [], [], 0
    suites = ("scalar", "matrix") if suite == "all" else (suite,)
    for s in suites:
        if s == "scalar":
            checks = scalar_checks()
            bounds = [(i, min(i + SCALAR_CHUNK, n)) for i in range(0, n, SCALAR_CHUNK)]
            job = lambda se: _run_scalar_chunk(cfg, checks, perturb, *se)  # noqa: E731
        else:
            checks = matrix_checks()
            source = matrix_source or _default_matrix_source
            bounds = [(i, min(i + MATRIX_CHUNK, n)) for i in range(0, n, MATRIX_CHUNK)]
            job = lambda se: _run_matrix_chunk(cfg, checks, perturb, source, *se)  # noqa: E731
        if workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, bounds))
        else:
            results = [job(b) for b in bounds]
        partials = [r[0] for r in results]
        for c in checks:
            st, rec = _aggregate(c, _tolerance(cfg, s, c), partials, cfg, perturb)
            stats.append(st)
            records.extend(rec)
        errors = max(errors, sum(r[1] for r in results))
        del results, partials
    return CertificationReport(cfg, suite, stats, records, errors, n, perturb)


# --------------------------------------------------------------------------
# shrinking


def _violation(check, suite, inputs, cfg, factor):
    """Relative worst slack if ``inputs`` violate ``check``, else None."""
    tol = _tolerance(cfg, suite, check)
    if suite == "scalar":
        r = _eval_scalar_check(check, ScalarBatch.from_inputs(inputs), tol, factor)
    else:
        try:
            case = MatrixCase.from_inputs(inputs)
        except HeinzlabError:
            return None
        r = _eval_matrix_check(check, case, tol, factor)
    if r["applies"][0] and r["finite"][0] and r["violated"][0]:
        return float(r["worst"][0])
    return None


def _scalar_moves(d):
    a, b, nu = d["a"], d["b"], d["nu"]
    g = np.sqrt(a) * np.sqrt(b)
    half = np.sqrt(np.sqrt(a / b))  # sqrt of the ratio's square root halves the log distance
    if a != b:
        yield {**d, "a": float(g * half), "b": float(g / half)}
    target = min((0.0, 0.5, 1.0), key=lambda t: abs(nu - t))
    if nu != target:
        yield {**d, "nu": float(0.5 * (nu + target))}


def _matrix_moves(d):
    doc = d["triple"]
    mats = {k: linalg.matrix_from_doc(doc[k]) for k in "ABX"}
    n = mats["A"].shape[0]
    if n > 1:
        for drop in range(n - 1, -1, -1):
            keep = [i for i in range(n) if i != drop]
            sub = {k: m[np.ix_(keep, keep)] for k, m in mats.items()}
            yield {**d, "triple": {k: linalg.matrix_to_doc(m) for k, m in sub.items()}}
    if any(np.count_nonzero(m - np.diag(np.diag(m))) for m in mats.values()):
        half = {k: 0.5 * (m + np.diag(np.diag(m))) for k, m in mats.items()}
        yield {**d, "triple": {k: linalg.matrix_to_doc(m) for k, m in half.items()}}


def shrink(v: ViolationRecord, cfg: Optional[TrialConfig] = None, perturb: Optional[dict] = None):
    """Greedily simplify a violating input while the violation persists.

    At most 64 accepted steps.  Raises :class:`DomainError` when ``v`` does
    not describe a violation under ``cfg``'s tolerances.
    """
    cfg = cfg or TrialConfig()
    reg = _registry()
    if v.inequality_id not in reg:
        raise DomainError(f"unknown inequality id {v.inequality_id!r}")
    suite, check = reg[v.inequality_id]
    factor = (perturb or {}).get(v.inequality_id)
    current = v.inputs
    slack = _violation(check, suite, current, cfg, factor)
    if slack is None:
        raise DomainError("shrink precondition failed: input does not violate the check")
    moves = _scalar_moves if suite == "scalar" else _matrix_moves
    steps = 0
    while steps < MAX_SHRINK_STEPS:
        for cand in moves(current):
            s = _violation(check, suite, cand, cfg, factor)
            if s is not None:
                current, slack = cand, s
                steps += 1
                break
        else:
            break
    return ViolationRecord(
        v.inequality_id,
        v.inputs,
        v.observed_slack,
        v.tolerance,
        shrunk_inputs=current,
        shrunk_slack=slack,
        shrink_steps=steps,
    )

"""Dense complex matrices: Hermitian eigensolver, PSD powers, norms, file I/O.

Matrices are plain ``complex128`` NumPy arrays; :func:`as_matrix` is the
gatekeeper that validates shape and finiteness.  The eigensolver is a cyclic
Jacobi method with complex rotations, which is accurate to a few ulps of
``||A||`` at the sizes this package targets (n <= 64).

Conventions for PSD powers: eigenvalues in ``[-1e-12 * lam_max, 0)`` are
clamped to zero, anything more negative is rejected, and ``0**0 == 1`` so
``A**0`` is the identity on the whole space.
"""

import json
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError

__all__ = [
    "as_matrix",
    "matmul",
    "add",
    "scale",
    "adjoint",
    "hermitian_eigendecomposition",
    "PsdMatrix",
    "psd_fractional_power",
    "singular_values",
    "schatten_norm",
    "hilbert_schmidt_norm",
    "spectral_norm",
    "matrix_to_doc",
    "matrix_from_doc",
    "read_matrix",
    "write_matrix",
]

TOL_HERM = 1e-10
TOL_EIG = 1e-12
TOL_CLAMP = 1e-12
JACOBI_TOL = 1e-14
SVD_TOL = 1e-15  # relative column-orthogonality target
MAX_SWEEPS = 60


def as_matrix(x) -> np.ndarray:
    """Validate and convert to a finite 2-D ``complex128`` array."""
    a = np.array(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def scale(a, c):
    return complex(c) * as_matrix(a)


def adjoint(a):
    return as_matrix(a).conj().T


def _hs(a):
    return float(np.sqrt(np.sum(a.real**2 + a.imag**2)))


# --------------------------------------------------------------------------
# eigensolver


class HermitianDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # non-increasing, real
    eigenvectors: np.ndarray  # unitary, columns


def _jacobi(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Cyclic complex Jacobi on a Hermitian array (modified in place)."""
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128)
    norm = _hs(a)
    if n == 1 or norm == 0.0:
        return np.real(np.diag(a)).copy(), q
    thresh = tol * norm
    tiny = 1e-300
    upper = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(a[upper]) ** 2))
        if off <= thresh:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                mag = abs(apr)
                if mag <= tiny:
                    continue
                theta = (a[r, r].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                w = apr / mag
                wc = w.conjugate()
                # W = [[c, s], [-s*conj(w), c*conj(w)]] acting on columns p, r
                col_p = a[:, p].copy()
                col_r = a[:, r]
                a[:, p] = c * col_p - (s * wc) * col_r
                a[:, r] = s * col_p + (c * wc) * col_r
                row_p = a[p, :].copy()
                row_r = a[r, :]
                a[p, :] = c * row_p - (s * w) * row_r
                a[r, :] = s * row_p + (c * w) * row_r
                a[p, r] = a[r, p] = 0.0
                a[p, p] = a[p, p].real
                a[r, r] = a[r, r].real
                qp = q[:, p].copy()
                qr = q[:, r]
                q[:, p] = c * qp - (s * wc) * qr
                q[:, r] = s * qp + (c * wc) * qr
    else:
        off = np.sqrt(2.0 * np.sum(np.abs(a[upper]) ** 2))
        if off > thresh:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.real(np.diag(a)).copy(), q


def hermitian_eigendecomposition(h, tol_herm=TOL_HERM) -> HermitianDecomposition:
    """Eigenvalues (non-increasing) and unitary eigenvectors of a Hermitian matrix."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {h.shape}")
    norm = _hs(h)
    if _hs(h - h.conj().T) > tol_herm * norm:
        raise DomainError("matrix is not Hermitian within tolerance")
    work = 0.5 * (h + h.conj().T)
    vals, vecs = _jacobi(work)
    order = np.argsort(-vals, kind="stable")
    return HermitianDecomposition(vals[order], vecs[:, order])


def _power_weights(vals, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(nu * np.log(vals))
    if nu == 0:
        out = np.ones_like(vals)  # 0**0 == 1
    return np.where(vals > 0, out, 0.0 if nu > 0 else 1.0)


class PsdMatrix:
    """Hermitian positive semidefinite matrix with its cached spectral decomposition."""

    def __init__(self, base, tol_herm=TOL_HERM):
        base = as_matrix(base)
        dec = hermitian_eigendecomposition(base, tol_herm)
        vals = dec.eigenvalues
        lam_max = max(float(vals[0]), 0.0)
        if np.any(vals < -TOL_CLAMP * lam_max):
            raise DomainError(
                f"matrix is not positive semidefinite (min eigenvalue {vals.min():.3e})"
            )
        self.base = base
        self.eigenvalues = np.where(vals < 0, 0.0, vals)
        self.eigenvectors = dec.eigenvectors
        self._powers = {}

    @property
    def n(self):
        return self.base.shape[0]

    def power(self, nu):
        """``Q diag(lam**nu) Q^H`` for ``0 <= nu <= 1`` (cached)."""
        nu = float(nu)
        if not 0.0 <= nu <= 1.0:
            raise DomainError("fractional power needs 0 <= nu <= 1")
        got = self._powers.get(nu)
        if got is None:
            q = self.eigenvectors
            got = (q * _power_weights(self.eigenvalues, nu)) @ q.conj().T
            self._powers[nu] = got
        return got

    def residuals(self):
        """Relative reconstruction and unitarity residuals of the decomposition."""
        q = self.eigenvectors
        recon = (q * self.eigenvalues) @ q.conj().T
        norm = max(_hs(self.base), np.finfo(float).tiny)
        return _hs(self.base - recon) / norm, _hs(q.conj().T @ q - np.eye(self.n))

    def __repr__(self):
        return f"PsdMatrix(n={self.n}, eigenvalues={self.eigenvalues!r})"


def psd_fractional_power(a: PsdMatrix, nu) -> np.ndarray:
    return a.power(nu)


# --------------------------------------------------------------------------
# singular values and norms


def _one_sided_jacobi(g, tol=SVD_TOL, max_sweeps=MAX_SWEEPS):
    """Orthogonalise the columns of ``g`` in place; returns their norms.

    This is the Jacobi method applied implicitly to ``G^H G``: each rotation
    is the one that would annihilate entry ``(p, r)`` of the Gram matrix, but
    it is applied to the columns of ``G`` so ``G^H G`` is never formed.  The
    squared singular values are then exact up to rotations, and small
    singular values keep absolute accuracy ``~eps * ||A||`` rather than
    ``~sqrt(eps) * ||A||``.
    """
    n = g.shape[1]
    # columns this small carry no singular value information
    floor = (np.finfo(float).eps * _hs(g)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for r in range(p + 1, n):
                col_p = g[:, p].copy()
                col_r = g[:, r]
                alpha = float(np.sum(col_p.real**2 + col_p.imag**2))
                beta = float(np.sum(col_r.real**2 + col_r.imag**2))
                gamma = np.vdot(col_p, col_r)
                mag = abs(gamma)
                if mag <= tol * np.sqrt(alpha * beta) or min(alpha, beta) <= floor:
                    continue
                rotated = True
                theta = (beta - alpha) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                wc = (gamma / mag).conjugate()
                g[:, p] = c * col_p - (s * wc) * col_r
                g[:, r] = s * col_p + (c * wc) * col_r
        if not rotated:
            return np.sqrt(np.sum(g.real**2 + g.imag**2, axis=0))
    raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")


def singular_values(a) -> np.ndarray:
    """Non-increasing singular values ``sqrt(lam_i(A^H A))``, one per column.

    Computed by one-sided Jacobi on ``A`` itself, which gives the same
    numbers as the eigenvalues of ``A^H A`` without squaring the condition
    number.
    """
    a = as_matrix(a)
    n = a.shape[1]
    # wide matrices: A and A^H share their nonzero singular values
    g = a.conj().T.copy() if a.shape[0] < n else a.copy()
    s = np.zeros(n)
    vals = _one_sided_jacobi(g)
    s[: vals.size] = vals
    return np.sort(s)[::-1]


def schatten_from_sv(s, p):
    top = s[0] if s.size else 0.0
    if top == 0.0:
        return 0.0
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def _check_p(p):
    if not np.isfinite(p) or p < 1:
        raise DomainError(f"Schatten norm needs p ≥ 1, got {p}")


def schatten_norm(a, p) -> float:
    """``(sum s_i**p)**(1/p)`` for real ``p >= 1``."""
    _check_p(p)
    return schatten_from_sv(singular_values(a), float(p))


def hilbert_schmidt_norm(a) -> float:
    """``sqrt(sum |a_ij|**2)``."""
    return _hs(as_matrix(a))


def spectral_norm(a) -> float:
    return float(singular_values(a)[0])


# --------------------------------------------------------------------------
# file format: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major


def matrix_to_doc(a) -> dict:
    a = as_matrix(a)
    data = [[float(v.real), float(v.imag)] for v in a.ravel()]
    return {"rows": a.shape[0], "cols": a.shape[1], "data": data}


def matrix_from_doc(doc) -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError("matrix document needs rows, cols and data") from exc
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise DimensionError(f"data length {len(data)} does not match {rows}x{cols}")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in data])
    except (TypeError, ValueError) as exc:
        raise DomainError("data entries must be [re, im] pairs") from exc
    return as_matrix(flat.reshape(rows, cols))


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_doc(json.load(fh))


def write_matrix(path, a):
    with open(path, "w") as fh:
        json.dump(matrix_to_doc(a), fh)
        fh.write("\n")

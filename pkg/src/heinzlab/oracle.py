"""High-precision reference values for sampled cross-checks.

Plain textbook formulas evaluated with mpmath at 50 significant digits.
The certifier compares a sparse subset of trials against these to catch
systematic floating-point errors that an ordering check alone would miss.
"""

import mpmath as mp

DIGITS = 50


def _terms(a, b, nu, m, p):
    a, b, nu, m, p = (mp.mpf(float(v)) for v in (a, b, nu, m, p))
    r0, R0 = min(nu, 1 - nu), max(nu, 1 - nu)
    am = nu * a + (1 - nu) * b
    gm = a**nu * b ** (1 - nu)
    two_h = gm + a ** (1 - nu) * b**nu
    G = 2 * mp.sqrt(a * b)

    def bracket(q):
        return (a + b) ** q - G**q

    out = {
        "young": (r0 * bracket(1), am - gm, R0 * bracket(1)),
        "young-p": (r0**p * bracket(p), am**p - gm**p, R0**p * bracket(p)),
        "chain": (
            r0**m * (a ** (m / 2) - b ** (m / 2)) ** 2,
            r0**m * bracket(m),
            am**m - gm**m,
            R0**m * bracket(m),
        ),
        "heinz": (r0 * bracket(1), (a + b) / 2 - two_h / 2, R0 * bracket(1)),
        "heinz-p": ((2 * r0) ** p * bracket(p), (a + b) ** p - two_h**p, (2 * R0) ** p * bracket(p)),
    }
    return out


def scalar_terms(a, b, nu, m, p):
    """Reference terms keyed like the library's cross-checked kernels, as floats."""
    with mp.workdps(DIGITS):
        return {k: tuple(float(v) for v in vals) for k, vals in _terms(a, b, nu, m, p).items()}

"""The unitarily invariant norm of the Heinz matrix mean as a function of nu.

f(nu) = ||A^nu X B^(1-nu) + A^(1-nu) X B^nu|| is convex and symmetric on
[0, 1] with its minimum at nu = 1/2. The scan prints the profile under the
trace norm and checks the three properties.
"""

import numpy as np

from heinzlab import MatrixTriple, NormSelector, heinz_convexity_scan

g = np.random.default_rng(0)
n = 4
z = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
w = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
t = MatrixTriple.from_arrays(z @ z.conj().T, w @ w.conj().T, g.standard_normal((n, n)))

for name in ("trace", "hs", "spectral"):
    s = heinz_convexity_scan(t, NormSelector.parse(name), 17)
    print(f"{name}: convex={s.convex} symmetric={s.symmetric} min_near_half={s.min_near_half}")

s = heinz_convexity_scan(t, NormSelector.parse("trace"), 17)
top = max(v for _, v in s.rows())
for nu, v in s.rows():
    bar = "#" * int(60 * v / top)
    print(f"{nu:.4f} {v:12.6f} {bar}")

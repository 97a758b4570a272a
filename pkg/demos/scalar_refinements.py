"""How much the refined Young inequalities tighten the classical bound.

For a = 4, b = 1 the weighted arithmetic-geometric gap is bracketed from
below and above by squared-root gaps; the power-m chain closes in on the
gap as m grows, and m = 1, 2 collapse to the same lower term.
"""

import numpy as np

from heinzlab import PositivePair, PowerIndex, WeightSplit, scalar

pair = PositivePair(4.0, 1.0)

print("nu     lower      gap        upper")
for nu in np.linspace(0.0, 1.0, 9):
    r = scalar.young_sandwich(pair, WeightSplit(nu))
    print(f"{nu:.3f}  {r.lower:.6f}  {r.middle:.6f}  {r.upper:.6f}")

print("\nm   t1          t2          t3          t4")
w = WeightSplit(0.25)
for m in range(1, 9):
    t = scalar.theorem22_chain(pair, w, PowerIndex(m))
    print(m, "  ".join(f"{v:.8f}" for v in t))

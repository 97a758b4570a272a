"""A small certification run and what a caught mutation looks like.

The clean run reports zero violations; perturbing one bound by 1% makes
the harness find a violating trial and shrink it to simpler inputs.
"""

from heinzlab import TrialConfig, certify

cfg = TrialConfig(seed=42, trials=20_000)
clean = certify(cfg, "scalar")
print(clean.summary_line())

broken = certify(cfg, "scalar", perturb={"eq16": 1.01})
print(broken.summary_line())
v = broken.violations[0]
print("first violation:", v.inequality_id)
print("  drawn inputs: ", v.inputs)
print("  shrunk inputs:", v.shrunk_inputs)

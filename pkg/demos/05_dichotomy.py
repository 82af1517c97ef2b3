"""
Measure dichotomy at desk scale
===============================

Monte Carlo estimates of how often a random point has good approximants
up to a height cap (full) and above a starting height (tail).
"""

from fractions import Fraction

from limsup_lab.approx import ApproxSpec
from limsup_lab.lab import DichotomyScan, measure_scan

specs = (
    ("divergent", ApproxSpec.power_law(1, 2, (Fraction(1, 2), Fraction(1, 2)))),
    ("convergent", ApproxSpec.power_law(1, 2, (Fraction(3, 5), Fraction(3, 5)))),
)
ladder = tuple(2 ** k for k in range(3, 11))
scan = DichotomyScan(specs, 500, ladder, seed=7, tail_starts=ladder[:-1])

for row in measure_scan(scan):
    print(f"{row.spec_id:16s} H={row.H:5d}  {row.fraction:.3f}  [{row.ci_lo:.3f}, {row.ci_hi:.3f}]")

# psi(1) = 1 covers everything, so the full rows are all 1.  The tail rows
# show the convergent case thinning out, slowly: the expected number of
# hits above H0 decays like H0^(-1/5).

"""
Box counting and covering sums
==============================

Two numerical views of the dimension: the box-count slope of one layer of
rational rectangles, and the exponent where natural covering sums flip
from divergent to convergent.
"""

from fractions import Fraction

from limsup_lab.dimension import ClosedFormCase, closed_form
from limsup_lab.lab import box_count_dimension, covering_sum, covering_transition

case = ClosedFormCase.two_dim((3, 2))
est = box_count_dimension(case, (32, 64))
print("scales", est.scales, "counts", est.counts)
print(f"slope {est.slope:.3f} against closed form {closed_form(case).value}")

# the full square as a calibration target
cal = box_count_dimension(ClosedFormCase.two_dim((Fraction(1, 2), Fraction(1, 2))), (64, 128), scales=range(2, 7))
print(f"calibration slope {cal.slope:.3f}")

for s in (Fraction(9, 10), Fraction(11, 10)):
    rows = covering_sum(case, s, (1, 1 << 14))
    print("s =", s, [f"{r.partial_sum:.3f}" for r in rows[-4:]])

grid = [Fraction(k, 20) for k in range(1, 61)]
for c in (case, ClosedFormCase.padic(2, (4,))):
    tr = covering_transition(c, grid)
    print(c.setting.value, "transition in", [str(tr.lower), str(tr.upper)], "closed form", closed_form(c).value)

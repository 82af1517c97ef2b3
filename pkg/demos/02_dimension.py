"""
Dimension formulas
==================

Closed forms for the Hausdorff dimension of weighted limsup sets, and the
mass transference lower bound that reproduces them.
"""

from fractions import Fraction

from limsup_lab.dimension import (
    ClosedFormCase,
    closed_form,
    grid_optimize_lower_bound,
    mtpr_lower_bound,
    problem_for,
    select_exponents,
)

cases = [
    ClosedFormCase.real(1, (2,)),
    ClosedFormCase.two_dim((3, 2)),
    ClosedFormCase.padic(2, (4,)),
    ClosedFormCase.complex(1, (3,)),
    ClosedFormCase.laurent(1, (2, 3)),
]

for case in cases:
    cf = closed_form(case)
    sel = select_exponents(case)
    # the selected exponent vector attains the closed form exactly
    bound = mtpr_lower_bound(problem_for(case, sel.a))
    grid = grid_optimize_lower_bound(case, grid_resolution=16)
    print(f"{case.setting.value:10s} tau={[str(t) for t in case.tau]}  closed={cf.value}  "
          f"select={bound.value}  grid={grid.value}  tag={sel.tag.value}")

# the classical 4/(tau+1) is the same formula after a shift of tau
for tau in (2, 3, Fraction(7, 2)):
    print("complex", tau, closed_form(ClosedFormCase.complex(1, (tau,))).value)

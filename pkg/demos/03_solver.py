"""
Minkowski solver
================

Exhaustive search for small integer solutions of systems of linear forms,
and the certification harness that samples many systems at once.
"""

from fractions import Fraction

from limsup_lab.rings import RingDescriptor, ambient_from_fraction
from limsup_lab.solver import LinearFormSystem, Strategy, certify_minkowski, solve, verify_record

R = RingDescriptor.real()
golden = ambient_from_fraction(R, (1 + 5 ** 0.5) / 2)
system = LinearFormSystem(R, [[golden]], (Fraction(1, 5),), (5,))

for strategy in Strategy:
    rec = solve(system, strategy)
    print(strategy.value, rec.status.value, rec.q[0].value, rec.p[0].value, float(rec.errors[0]))
    assert verify_record(system, rec)

# desk bounds where the product condition guarantees a solution
for ring, eb, hb, comp in [
    (RingDescriptor.complex(), (Fraction(1, 6),), (6,), None),
    (RingDescriptor.quaternion(), (Fraction(1, 8),), (6,), None),
    (RingDescriptor.laurent(2), (Fraction(1, 4),), (16,), None),
    (RingDescriptor.padic(5), (Fraction(1, 600),), (64,), (64,)),
]:
    rep = certify_minkowski(ring, 1, 1, eb, hb, trials=50, seed=1, companion_bounds=comp)
    print(ring.describe(), rep.summary)

"""
Five number systems
===================

Integers, ambient points and shells for the real line, Gaussian and
Hurwitz integers, p-adics and Laurent series over a finite field.
"""

from fractions import Fraction

from limsup_lab.rings import (
    RingDescriptor,
    ambient_from_fraction,
    count_shell,
    enumerate_shell,
    hurwitz_units,
    nearest_hurwitz,
    padic_abs,
    sample_uniform,
)

# Gaussian shells grow like 8Q in one dimension
G = RingDescriptor.complex()
for Q in range(1, 6):
    print("gaussian shell", Q, len(enumerate_shell(G, 1, Q)), count_shell(G, 1, Q))

# the Hurwitz order has 24 units
print("hurwitz units:", len(hurwitz_units()))

# nearest Hurwitz integer to a point in H
H = RingDescriptor.quaternion()
x = ambient_from_fraction(H, Fraction(1, 2), Fraction(2, 5), Fraction(3, 5), Fraction(1, 2))
print("nearest hurwitz:", nearest_hurwitz(x))

# p-adic absolute values are powers of p
print("|75|_5 =", padic_abs(75, 5))

# Laurent shells over F_2: t^(m(r+1)) - t^(mr)
L = RingDescriptor.laurent(2)
print("laurent shells:", [count_shell(L, 1, 2**r) for r in range(4)])

# seeded sampling is reproducible
print(sample_uniform(RingDescriptor.padic(7), (1, 2), 0) == sample_uniform(RingDescriptor.padic(7), (1, 2), 0))

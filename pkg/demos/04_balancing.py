"""
Balancing approximation functions
=================================

Ubiquity arguments need thickenings rho with a fixed product.  The
balancing step builds them from arbitrary power-law psi.
"""

from fractions import Fraction

from limsup_lab.approx import ApproxSpec, balance_rho_padic, balance_rho_real
from limsup_lab.rings import RingDescriptor
from limsup_lab.solver import empirical_ubiquity_check

spec = ApproxSpec.power_law(1, 2, (Fraction(3, 10), Fraction(9, 10)), k_max=8)
bal = balance_rho_real(spec)
print("real: product identity", bal.product_identity_holds(), "domination", bal.dominates())
for e in bal.entries[:4]:
    print("  u =", e.u, "j =", e.j, "rho =", [f"{r.log():.3f}" for r in e.rho])

# slowly decaying psi: the set is already everything
loose = ApproxSpec.power_law(2, 3, (Fraction(3, 2), Fraction(1, 2), Fraction(5, 2)), k_max=6)
print("p-adic shortcut:", balance_rho_padic(loose, 3))

pspec = ApproxSpec.power_law(2, 3, (Fraction(3), Fraction(2), Fraction(4)), k_max=6)
pbal = balance_rho_padic(pspec, 3)
print("p-adic: product identity", pbal.product_identity_holds(), "sandwich indices", [e.j for e in pbal.entries])

# how much of a ball the thickened rationals actually cover
rep = empirical_ubiquity_check(RingDescriptor.real(), spec, bal, 7, samples=400, seed=0)
print(f"ubiquity at u={rep.u}: {rep.hits}/{rep.samples} covered, constant {rep.constant}")

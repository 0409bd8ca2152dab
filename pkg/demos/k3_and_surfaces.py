"""Genera of projective surfaces and the quasi-Jacobi basis.

Computes the K3 genus, checks it against 24*E2, and decomposes the genus of
every degree-d surface in P^3 into E1^2 and E2.
"""

from ellgen.genus import (ell_hypersurface, specialize_chi_y, specialize_euler,
                          surface_qjacobi_decompose)
from ellgen.theta import qjacobi_generator

ORDER = 4

k3 = ell_hypersurface(4, 4, ORDER)
print("Ell(K3) =", k3.series)
print("chi_y slice:", specialize_chi_y(k3), " Euler number:", specialize_euler(k3))
print("equals 24 E2 to q^%d:" % ORDER, k3.series == qjacobi_generator(2, ORDER).value.scale(24))

print("\ndegree   c1 (E1^2)   c2 (E2)   residual")
for d in range(1, 7):
    c1, c2, residual = surface_qjacobi_decompose(ell_hypersurface(4, d, ORDER))
    print(f"{d:>6}   {str(c1):>10}   {str(c2):>7}   {'0' if residual.is_zero() else residual}")

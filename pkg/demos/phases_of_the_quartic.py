"""Different models of a K3 surface that all give 24*E2.

The Fermat quartic is compared with its Landau-Ginzburg orbifold and its
rank-one hybrid. A bidegree-(2,3) hypersurface in P^1 x P^2 is checked in each
of its phases, then the quartic is divided by a symplectic involution.
"""

from ellgen.genus import ell_complete_intersection, ell_hypersurface
from ellgen.phases import (AbelianOrbifoldData, WeightedAction, bidegree_genera,
                           hybrid_ci_genus, lg_genus, numeric_invariants, sigma_orbifold_genus,
                           spectrum)

ORDER = 3
k3 = ell_hypersurface(4, 4, ORDER).series

fermat = WeightedAction((1, 1, 1, 1), 4)
print("LG orbifold equals the sigma model:", lg_genus(fermat, ORDER) == k3)
print("hybrid over P^0 (rank one) equals it too:", hybrid_ci_genus(4, 1, [4], ORDER) == k3)

bi = bidegree_genera(2, 3, ORDER)
print("bidegree (2,3) phases:", {k: v == k3 for k, v in bi.items() if k != "dim"})

mu2 = AbelianOrbifoldData(4, (("1/2", "1/2", 0, 0),), 4)
print("quotient by a symplectic involution:", sigma_orbifold_genus(mu2, ORDER) == k3)

print("\nsix quadrics: the (2,2,2) complete intersection in P^5")
print("  hybrid phase matches:",
      hybrid_ci_genus(6, 3, [2, 2, 2], 2) == ell_complete_intersection(6, [2, 2, 2], 2).series)

res = spectrum(fermat)
print("\nspectrum of x^4 + y^4 + z^4 + w^4: Milnor number", res.milnor)
print("invariants:", numeric_invariants(fermat))

"""Orbifold genera of symmetric powers of K3 from the product formula."""

from ellgen.genus import ell_hypersurface
from ellgen.symprod import EllCoefficients, dmvv_expand, euler_degeneration

c = EllCoefficients.from_series(ell_hypersurface(4, 4, 6))
entries = dmvv_expand(c, 4, 6)
print("Euler numbers of Hilb^n(K3):", [str(e) for e in euler_degeneration(entries)])
print("chi_y slice of Hilb^2(K3):", entries[2].q_slice(0))
print("Sym^2 genus through q^1:", entries[2].truncate(1))

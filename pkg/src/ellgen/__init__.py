"""Exact elliptic genera as truncated (q, y)-series with rational and cyclotomic coefficients."""

__version__ = "0.1.0"

from .coeff import CycNumber, cyc_embed, cyc_try_rational
from .errors import EllgenError
from .genus import (GenusValue, ell_bidegree, ell_complete_intersection, ell_hypersurface,
                    ell_product, ell_projective, elliptic_law_defect, specialize_chi_y,
                    specialize_euler, specialize_torsion, surface_qjacobi_decompose)
from .phases import (AbelianOrbifoldData, WeightedAction, bidegree_genera, hybrid_ci_genus,
                     lg_chi_y_orbifold, lg_genus, lg_orbifoldized, lg_trivial_sector,
                     numeric_invariants, sigma_orbifold_genus, spectrum)
from .series import CohomologyModel, Precision, QYSeries, XSeries
from .symprod import EllCoefficients, dmvv_expand
from .theta import ThetaArg, eta_tilde, qjacobi_generator, t_series, theta_at

__all__ = [
    "CycNumber", "cyc_embed", "cyc_try_rational", "EllgenError", "GenusValue",
    "ell_bidegree", "ell_complete_intersection", "ell_hypersurface", "ell_product",
    "ell_projective", "elliptic_law_defect", "specialize_chi_y", "specialize_euler",
    "specialize_torsion", "surface_qjacobi_decompose", "AbelianOrbifoldData",
    "WeightedAction", "bidegree_genera", "hybrid_ci_genus", "lg_chi_y_orbifold", "lg_genus",
    "lg_orbifoldized", "lg_trivial_sector", "numeric_invariants", "sigma_orbifold_genus",
    "spectrum", "CohomologyModel", "Precision", "QYSeries", "XSeries", "EllCoefficients",
    "dmvv_expand", "ThetaArg", "eta_tilde", "qjacobi_generator", "t_series", "theta_at",
]

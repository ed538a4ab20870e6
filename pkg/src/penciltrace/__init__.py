"""Trace-expansion coefficients for the pencil -Lap + (P(x) - lambda)^2.

Library layout:

* polyalg  - sparse polynomials, ellipticity screening, scaling reduction
* special  - Gamma/Beta closed forms for the moment integrals, with oracles
* testfun  - inverse-power test functions and sector geometry
* symcalc  - exact symbol recursion (concrete axes and generic labels)
* contour  - numeric contour integration and the pole integrals J/I
* coeffs   - coefficient densities and totals, route comparisons
* mcint    - reproducible Monte-Carlo and tensor quadrature over R^d
* qepver   - finite-dimensional pencil identities and 1-d spectra
* weylop   - operator-level defect check of the symbol recursion
* cli      - the `penciltrace` command
"""

__version__ = "0.1.0"

from .polyalg import MultiPoly, parse_poly, leading_part, is_elliptic
from .testfun import InversePowerF, SectorSpec
from .symcalc import symbol_chain, check_lemma_val
from .coeffs import c_total, density_from_symbols, dual_route_report

__all__ = [
    "MultiPoly", "parse_poly", "leading_part", "is_elliptic",
    "InversePowerF", "SectorSpec", "symbol_chain", "check_lemma_val",
    "c_total", "density_from_symbols", "dual_route_report", "__version__",
]

"""Special functions and the truncated Fourier-Bessel basis."""

from .bessel import (
    BesselRootTable,
    QuadratureRule,
    bessel_j,
    bessel_roots,
    gauss_legendre,
    root_table,
)
from .fourier_bessel import (
    BasisParams,
    FbBasis,
    PixelGrid,
    build_basis,
    radial_function,
    radial_profiles,
)

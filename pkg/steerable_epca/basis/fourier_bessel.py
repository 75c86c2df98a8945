"""Truncated Fourier-Bessel steerable basis.

The basis is fixed by a band limit ``c`` (cycles per pixel), a support
radius ``R`` (pixels) and the image side ``L``. Every quadrature grid and
radial table the transforms need is evaluated once here and kept read-only.

Phase convention: the real-domain radial function is
``g^{k,q}(r) = i^k * h_{k,q}(r)`` with ``h`` real, and for negative
frequencies ``g^{-k,q} = conj(g^{k,q})``.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.special import jv

from steerable_epca.basis.bessel import (
    QuadratureRule,
    bessel_j,
    gauss_legendre,
    root_table,
)
from steerable_epca.classes.errors import (
    BasisIndexError,
    EmptyBasisError,
    InvalidArgumentError,
)

logger = logging.getLogger(__name__)

SINGULARITY_WINDOW = 1e-4


@dataclass(frozen=True)
class BasisParams:
    """Band limit, support radius and image size defining a basis."""

    band_limit: float
    support_radius: int
    image_size: int

    def __post_init__(self):
        if not 0 < self.band_limit <= 0.5:
            raise InvalidArgumentError(
                f"band limit must lie in (0, 0.5], got {self.band_limit}"
            )
        if int(self.support_radius) != self.support_radius or self.support_radius < 1:
            raise InvalidArgumentError(
                f"support radius must be a positive integer, got {self.support_radius}"
            )
        if self.image_size % 2 != 0 or self.image_size < 2:
            raise InvalidArgumentError(
                f"image size must be an even integer >= 2, got {self.image_size}"
            )
        if 2 * self.support_radius > self.image_size:
            raise InvalidArgumentError(
                f"support radius {self.support_radius} does not fit an image of side {self.image_size}"
            )

    @property
    def threshold(self) -> float:
        """Sampling-criterion bound 2*pi*c*R."""
        return 2 * math.pi * self.band_limit * self.support_radius

    @property
    def n_xi(self) -> int:
        return math.ceil(4 * self.band_limit * self.support_radius)

    @property
    def n_theta(self) -> int:
        return math.ceil(16 * self.band_limit * self.support_radius)

    @property
    def n_r(self) -> int:
        return math.ceil(4 * self.band_limit * self.support_radius)


@dataclass(frozen=True)
class PixelGrid:
    """Polar coordinates of the Cartesian pixels that fall in the support disk.

    Axis 0 of an image is x and axis 1 is y; pixel index ``a`` sits at
    coordinate ``a - L/2``.
    """

    radii: np.ndarray
    angles: np.ndarray
    mask: np.ndarray

    @property
    def n_pixels(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class FbBasis:
    """The truncated Fourier-Bessel basis with all its precomputed tables."""

    params: BasisParams
    k_max: int
    p_k: tuple
    roots: tuple
    normalizers: tuple
    radial_rule: QuadratureRule
    real_rule: QuadratureRule
    n_theta: int
    grid: PixelGrid
    # (p_k, n_xi) weights N J_k(R xi_j / c) xi_j w(xi_j) used by the expansion
    fourier_weights: tuple = field(repr=False)
    # (p_k, n_r) real profiles h_{k,q}(r_j) at the real-domain nodes
    real_profiles: tuple = field(repr=False)
    # (p_k, n_disk) real profiles h_{k,q}(r) at the disk pixels
    grid_profiles: tuple = field(repr=False)

    @property
    def total_dim(self) -> int:
        """p = sum of p_k over k = -k_max..k_max."""
        return self.p_k[0] + 2 * sum(self.p_k[1:])

    @property
    def frequencies(self) -> range:
        return range(self.k_max + 1)

    def contains(self, k: int, q: int) -> bool:
        return abs(k) <= self.k_max and 1 <= q <= self.p_k[abs(k)]

    def grid_functions(self, k: int) -> np.ndarray:
        """G^(k): (n_disk, p_k) complex values g^{k,q}(r) e^{ik phi} on disk pixels."""
        phase = (1j ** k) * np.exp(1j * k * self.grid.angles)
        return self.grid_profiles[k].T * phase[:, None]

    def point_functions(self, k: int, points) -> np.ndarray:
        """G^(k) evaluated at arbitrary Cartesian points, shape (n_points, p_k).

        Points at or beyond the support radius evaluate to zero.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        radii = np.hypot(points[:, 0], points[:, 1])
        angles = np.arctan2(points[:, 1], points[:, 0])
        profiles = radial_profiles(self, k, radii)
        profiles[:, radii >= self.params.support_radius] = 0.0
        phase = (1j ** k) * np.exp(1j * k * angles)
        return profiles.T * phase[:, None]


def _profile(c: float, k: int, q: int, root: float, r: np.ndarray) -> np.ndarray:
    """Real radial profile h_{k,q}(r), with the removable singularity resolved.

    g^{k,q} = i^k h_{k,q} (see ``radial_function``).
    """
    beta = 2 * math.pi * c * np.asarray(r, dtype=float)
    scale = 2 * c * math.sqrt(math.pi) * (-1) ** q * root
    delta = beta - root
    near = np.abs(delta) < SINGULARITY_WINDOW
    values = np.empty_like(beta)
    far = ~near
    values[far] = scale * jv(k, beta[far]) / (beta[far] ** 2 - root**2)
    if np.any(near):
        # J_k(R + d) = J'(R) d + J''(R) d^2 / 2 with J'(R) = -J_{k+1}(R) and
        # J''(R) = -J'(R) / R at a root.
        d = delta[near]
        first = -jv(k + 1, root)
        second = -first / root
        values[near] = scale * (first + 0.5 * second * d) / (2 * root + d)
    return values


def radial_profiles(basis: FbBasis, k: int, r) -> np.ndarray:
    """Real profiles h_{k,q}(r) for all q of frequency |k|, shape (p_k, len(r))."""
    k = abs(int(k))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    c = basis.params.band_limit
    rows = [
        _profile(c, k, q, root, r)
        for q, root in enumerate(basis.roots[k], start=1)
    ]
    if not rows:
        return np.zeros((0, r.size))
    return np.vstack(rows)


def radial_function(basis: FbBasis, k: int, q: int, r: float) -> complex:
    """g_c^{k,q}(r), the radial part of the inverse transform of psi_c^{k,q}.

    The phase is i^k times the real profile, not i^(-k): with the forward
    transform's e^(-2 pi i xi.x) sign this is the exact inverse, so rotating
    an image by alpha multiplies a_{k,q} by e^(-i k alpha) and reflecting it
    conjugates the coefficients. Negative k returns the conjugate.
    """
    if not basis.contains(k, q):
        raise BasisIndexError(f"({k}, {q}) is not part of the basis")
    if not math.isfinite(r) or r < 0:
        raise InvalidArgumentError(f"r must be finite and non-negative, got {r}")
    c = basis.params.band_limit
    value = complex(_profile(c, abs(k), q, basis.roots[abs(k)][q - 1], np.array([r]))[0])
    value *= 1j ** abs(k)
    return value.conjugate() if k < 0 else value


def _pixel_grid(params: BasisParams) -> PixelGrid:
    half = params.image_size // 2
    coords = np.arange(params.image_size) - half
    x, y = np.meshgrid(coords, coords, indexing="ij")
    radii = np.hypot(x, y)
    mask = radii < params.support_radius
    for array in (radii, mask):
        array.setflags(write=False)
    angles = np.arctan2(y[mask], x[mask])
    angles.setflags(write=False)
    disk_radii = radii[mask]
    disk_radii.setflags(write=False)
    return PixelGrid(radii=disk_radii, angles=angles, mask=mask)


def build_basis(params: BasisParams) -> FbBasis:
    """Enumerate every (k, q) with R_{k,q+1} <= 2 pi c R and precompute tables."""
    c = params.band_limit
    table = root_table(params.threshold)

    p_k = []
    roots = []
    for k in range(table.max_order + 1):
        count = table.count(k) - 1
        if count < 1:
            break
        p_k.append(count)
        roots.append(table.roots[k][:count])
    if not p_k:
        raise EmptyBasisError(
            f"no Fourier-Bessel function satisfies the sampling criterion for c={c}, R={params.support_radius}"
        )

    normalizers = tuple(
        1.0 / (c * math.sqrt(math.pi) * np.abs(jv(k + 1, k_roots)))
        for k, k_roots in enumerate(roots)
    )
    radial_rule = gauss_legendre(params.n_xi, 0.0, c)
    real_rule = gauss_legendre(params.n_r, 0.0, float(params.support_radius))
    grid = _pixel_grid(params)

    fourier_weights = []
    for k, (k_roots, k_norms) in enumerate(zip(roots, normalizers)):
        samples = bessel_j(k, np.outer(k_roots, radial_rule.nodes / c))
        weights = (
            k_norms[:, None]
            * samples
            * (radial_rule.nodes * radial_rule.weights)[None, :]
        )
        weights.setflags(write=False)
        fourier_weights.append(weights)

    basis = FbBasis(
        params=params,
        k_max=len(p_k) - 1,
        p_k=tuple(p_k),
        roots=tuple(roots),
        normalizers=normalizers,
        radial_rule=radial_rule,
        real_rule=real_rule,
        n_theta=params.n_theta,
        grid=grid,
        fourier_weights=tuple(fourier_weights),
        real_profiles=(),
        grid_profiles=(),
    )
    real_profiles = []
    grid_profiles = []
    for k in basis.frequencies:
        at_nodes = radial_profiles(basis, k, real_rule.nodes)
        at_pixels = radial_profiles(basis, k, grid.radii)
        at_nodes.setflags(write=False)
        at_pixels.setflags(write=False)
        real_profiles.append(at_nodes)
        grid_profiles.append(at_pixels)
    # frozen dataclass: tables are attached once, right after construction
    object.__setattr__(basis, "real_profiles", tuple(real_profiles))
    object.__setattr__(basis, "grid_profiles", tuple(grid_profiles))

    logger.info(
        "Fourier-Bessel basis: c=%s R=%s L=%s k_max=%s p=%s n_xi=%s n_theta=%s",
        c,
        params.support_radius,
        params.image_size,
        basis.k_max,
        basis.total_dim,
        params.n_xi,
        params.n_theta,
    )
    return basis

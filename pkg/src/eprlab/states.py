"""Single-particle packets and the two-particle entangled sources."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field1D, Field2D, Grid1D, ResolutionError, check_boundary, marginal


@dataclass(frozen=True)
class EPRParams:
    """Two-mode Gaussian source.

    ``sigma_plus`` is the spread of ``x1 + x2`` and ``sigma_minus`` the spread of
    ``x1 - x2``.  ``sigma_plus -> 0`` recovers the ideal ``delta(x1 + x2)``.
    """

    sigma_plus: float
    sigma_minus: float

    def __post_init__(self):
        if not self.sigma_plus > 0:
            raise ValueError(f"sigma_plus must be > 0, got {self.sigma_plus}")
        if not self.sigma_minus > 0:
            raise ValueError(f"sigma_minus must be > 0, got {self.sigma_minus}")

    @property
    def correlation(self) -> float:
        """Quality factor k = (s-^2 - s+^2)/(s-^2 + s+^2); positions correlate as -k."""
        sp2, sm2 = self.sigma_plus**2, self.sigma_minus**2
        return (sm2 - sp2) / (sm2 + sp2)

    @property
    def entangled(self) -> bool:
        return self.sigma_plus != self.sigma_minus


@dataclass(frozen=True)
class DiscreteEntangledSpec:
    n_terms: int
    spacing: float
    peak_sigma: float

    def __post_init__(self):
        if self.n_terms < 2:
            raise ValueError(f"need at least 2 terms for an entangled state, got {self.n_terms}")
        if not self.peak_sigma > 0:
            raise ValueError(f"peak_sigma must be > 0, got {self.peak_sigma}")
        if self.spacing < 6 * self.peak_sigma:
            raise ValueError(
                f"peaks overlap: spacing {self.spacing} < 6 * peak_sigma ({6 * self.peak_sigma})"
            )

    @property
    def centers(self) -> np.ndarray:
        """Particle-1 peak positions; particle 2 sits at the negatives."""
        return (np.arange(self.n_terms) - (self.n_terms - 1) / 2) * self.spacing


def _gaussian_amplitude(x: np.ndarray, x0: float, sigma: float) -> np.ndarray:
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma**2))


def gaussian_packet(grid: Grid1D, x0: float, p0: float, sigma: float) -> Field1D:
    """Minimum-uncertainty packet with position spread ``sigma`` and mean momentum ``p0``."""
    if sigma < 2 * grid.dx:
        raise ResolutionError(f"sigma={sigma} is below 2*dx={2 * grid.dx}")
    psi = _gaussian_amplitude(grid.x, x0, sigma) * np.exp(1j * p0 * grid.x / grid.hbar)
    f = Field1D(grid, psi).normalized()
    check_boundary(f)
    return f


def product_state(f1: Field1D, f2: Field1D) -> Field2D:
    f1, f2 = f1.to_position(), f2.to_position()
    return Field2D((f1.grid, f2.grid), np.outer(f1.values, f2.values))


def epr_pair(grids: tuple[Grid1D, Grid1D], params: EPRParams) -> Field2D:
    g1, g2 = grids
    for g in grids:
        if min(params.sigma_plus, params.sigma_minus) < g.dx:
            raise ResolutionError(
                f"sigma_plus={params.sigma_plus}, sigma_minus={params.sigma_minus} "
                f"not resolved by dx={g.dx}"
            )
    x1 = g1.x[:, None]
    x2 = g2.x[None, :]
    psi = np.exp(
        -((x1 + x2) ** 2) / (4 * params.sigma_plus**2)
        - (x1 - x2) ** 2 / (4 * params.sigma_minus**2)
    )
    f = Field2D(grids, psi).normalized()
    check_boundary(f)
    return f


def peak_term(grids: tuple[Grid1D, Grid1D], spec: DiscreteEntangledSpec, j: int) -> Field2D:
    """Normalised product peak ``|x_j>_1 |-x_j>_2`` of the discrete source."""
    c = spec.centers[j]
    a = _gaussian_amplitude(grids[0].x, c, spec.peak_sigma)
    b = _gaussian_amplitude(grids[1].x, -c, spec.peak_sigma)
    return Field2D(grids, np.outer(a, b)).normalized()


def discrete_entangled(grids: tuple[Grid1D, Grid1D], spec: DiscreteEntangledSpec) -> Field2D:
    """Equal-weight superposition of ``n_terms`` product peaks at ``(x_i, -x_i)``."""
    for g in grids:
        if spec.peak_sigma < 2 * g.dx:
            raise ResolutionError(f"peak_sigma={spec.peak_sigma} is below 2*dx={2 * g.dx}")
        reach = np.abs(spec.centers).max() + 8 * spec.peak_sigma
        if -reach < g.x_min or reach > g.x_max:
            raise ValueError(f"peaks extend to +/-{reach:g}, outside [{g.x_min}, {g.x_max})")
    psi = np.zeros((grids[0].n, grids[1].n), dtype=complex)
    for j in range(spec.n_terms):
        psi += peak_term(grids, spec, j).values
    f = Field2D(grids, psi / np.sqrt(spec.n_terms)).normalized()
    check_boundary(f)
    return f


def peak_regions(grid: Grid1D, spec: DiscreteEntangledSpec) -> np.ndarray:
    """Index of the nearest particle-1 peak for every lattice point."""
    return np.argmin(np.abs(grid.x[:, None] - spec.centers[None, :]), axis=1)


def peak_probabilities(psi: Field2D, spec: DiscreteEntangledSpec) -> np.ndarray:
    """Probability that a position readout of particle 1 lands nearest each peak."""
    rho1 = marginal(psi, 1) * psi.grids[0].dx
    regions = peak_regions(psi.grids[0], spec)
    return np.bincount(regions, weights=rho1, minlength=spec.n_terms)

"""Slit readout of particle 1 and what it implies for particle 2.

``condition_on_slit`` is the exact reduced state of the unmeasured particle: a
mixture over lattice columns inside the aperture.  ``collapse_packet_m1`` is the
alternative in which particle 2 is taken to be localised to the slit size the
moment particle 1 is detected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    BOUNDARY_DENSITY_TOL,
    MOMENTUM,
    POSITION,
    BoundaryError,
    DispersionReport,
    Field1D,
    Field2D,
    Grid1D,
    ResolutionError,
    dispersion_from_densities,
    _transform_array,
    marginal,
)
from .dynamics import free_evolve, free_propagator
from .states import DiscreteEntangledSpec, gaussian_packet, peak_probabilities, peak_term

TOPHAT = "tophat"
GAUSSIAN = "gaussian"

MIN_DETECTION_PROBABILITY = 1e-12


@dataclass(frozen=True)
class Aperture:
    """Slit transmission.  ``width`` is the full width for a tophat and the std for a Gaussian."""

    kind: str = TOPHAT
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in (TOPHAT, GAUSSIAN):
            raise ValueError(f"aperture kind must be {TOPHAT!r} or {GAUSSIAN!r}, got {self.kind!r}")
        if not self.width > 0:
            raise ValueError(f"aperture width must be > 0, got {self.width}")

    def transmission(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == TOPHAT:
            lo = self.center - self.width / 2
            hi = self.center + self.width / 2
            return ((x >= lo) & (x < hi)).astype(float)
        return np.exp(-((x - self.center) ** 2) / (2 * self.width**2))

    def complement(self) -> "BlockedAperture":
        return BlockedAperture(self)

    def check_resolved(self, grid: Grid1D) -> None:
        if self.kind == TOPHAT and self.width < 4 * grid.dx * (1 - 1e-12):
            raise ResolutionError(f"slit width {self.width} is below 4*dx={4 * grid.dx}")
        if self.kind == GAUSSIAN and self.width < grid.dx:
            raise ResolutionError(f"gaussian aperture std {self.width} is below dx={grid.dx}")
        lo = self.center - (self.width / 2 if self.kind == TOPHAT else 4 * self.width)
        hi = self.center + (self.width / 2 if self.kind == TOPHAT else 4 * self.width)
        if lo < grid.x_min or hi > grid.x_max:
            raise ValueError(f"slit [{lo:g}, {hi:g}] extends outside the grid")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "center": self.center, "width": self.width}


@dataclass(frozen=True)
class BlockedAperture:
    """Everything the slit stops; transmission ``1 - T``."""

    slit: Aperture

    def transmission(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self.slit.transmission(x)


@dataclass(frozen=True, eq=False)
class ConditionalEnsemble:
    """Mixed state of particle 2 after particle 1 passed (or was stopped by) an aperture."""

    weights: np.ndarray
    x1_bins: np.ndarray
    amplitudes: np.ndarray  # rows are normalised particle-2 wavefunctions in position
    grid: Grid1D
    detection_probability: float

    def __len__(self):
        return len(self.weights)

    def component(self, i: int) -> Field1D:
        return Field1D(self.grid, self.amplitudes[i])

    @property
    def components(self) -> list[tuple[float, float, Field1D]]:
        return [(float(w), float(x), self.component(i)) for i, (w, x) in enumerate(zip(self.weights, self.x1_bins))]

    def evolve(self, t: float, guard: bool = True) -> "ConditionalEnsemble":
        if t == 0:
            return self
        amps = _evolve_rows(self.amplitudes, self.grid, t, guard)
        return ConditionalEnsemble(self.weights, self.x1_bins, amps, self.grid, self.detection_probability)

    def position_density(self) -> np.ndarray:
        return self.weights @ (np.abs(self.amplitudes) ** 2)

    def momentum_density(self) -> np.ndarray:
        phi = _rows_to_momentum(self.amplitudes, self.grid)
        return self.weights @ (np.abs(phi) ** 2)

    def dispersion(self) -> DispersionReport:
        return dispersion_from_densities(self.grid, self.position_density(), self.momentum_density())

    def component_dispersions(self) -> list[DispersionReport]:
        rho_x = np.abs(self.amplitudes) ** 2
        rho_p = np.abs(_rows_to_momentum(self.amplitudes, self.grid)) ** 2
        return [dispersion_from_densities(self.grid, rx, rp) for rx, rp in zip(rho_x, rho_p)]

    def residual_stats(self) -> tuple[float, float]:
        """Mean and std of ``x1 + x2`` over the mixture, with ``x1`` at the column position."""
        rho = np.abs(self.amplitudes) ** 2 * self.grid.dx
        m = rho @ self.grid.x
        second = rho @ self.grid.x**2
        r_mean = float(self.weights @ (self.x1_bins + m))
        r_second = float(self.weights @ (self.x1_bins**2 + 2 * self.x1_bins * m + second))
        return r_mean, float(np.sqrt(max(r_second - r_mean**2, 0.0)))

    def fidelity_with(self, rho_rows: np.ndarray, row_weight: float) -> np.ndarray:
        """``<phi_i| rho |phi_i>`` for each component against ``rho = row_weight * sum_r |r><r|``."""
        overlaps = rho_rows.conj() @ self.amplitudes.T * self.grid.dx
        return row_weight * np.sum(np.abs(overlaps) ** 2, axis=0)


def _rows_to_momentum(rows: np.ndarray, grid: Grid1D) -> np.ndarray:
    return _transform_array(rows, grid, MOMENTUM, axis=rows.ndim - 1)


def _evolve_rows(rows: np.ndarray, grid: Grid1D, t: float, guard: bool) -> np.ndarray:
    phi = _rows_to_momentum(rows, grid) * free_propagator(grid, t)[None, :]
    out = _transform_array(phi, grid, POSITION, axis=1)
    if guard:
        edge = np.abs(out[:, [0, -1]]) ** 2
        if edge.max() > BOUNDARY_DENSITY_TOL:
            raise BoundaryError(
                f"component density {edge.max():.3e} at the domain edge exceeds "
                f"{BOUNDARY_DENSITY_TOL:.0e}; widen the grid"
            )
    return out


def _column_weights(psi: Field2D, transmission: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g1, g2 = psi.grids
    col_mass = psi.density().sum(axis=1) * g2.dx
    raw = transmission * g1.dx * col_mass
    return raw, col_mass


def condition_on_aperture(psi: Field2D, transmission: np.ndarray) -> ConditionalEnsemble:
    psi = psi.to_position()
    g1, g2 = psi.grids
    raw, col_mass = _column_weights(psi, transmission)
    keep = (raw > 0) & (col_mass > 0)
    p_det = float(raw.sum())
    if p_det < MIN_DETECTION_PROBABILITY:
        raise ValueError(f"detection probability {p_det:.3e} is below {MIN_DETECTION_PROBABILITY:.0e}")
    idx = np.nonzero(keep)[0]
    amps = psi.values[idx] / np.sqrt(col_mass[idx])[:, None]
    weights = raw[idx] / raw[idx].sum()
    return ConditionalEnsemble(weights, g1.x[idx], amps, g2, p_det)


def condition_on_slit(psi: Field2D, slit: Aperture) -> ConditionalEnsemble:
    """Exact state of particle 2 given that particle 1 was detected behind ``slit``."""
    slit.check_resolved(psi.grids[0])
    return condition_on_aperture(psi, slit.transmission(psi.grids[0].x))


def collapse_packet_m1(x1_detected: float, slit: Aperture, grid: Grid1D) -> Field1D:
    """Particle 2 as the collapse picture has it: localised to the slit at ``-x1``.

    The packet is a minimum-uncertainty Gaussian of position spread ``a/2``, so its
    momentum spread is exactly ``hbar/a`` for slit width ``a``.
    """
    if slit.kind != TOPHAT:
        raise ValueError("the collapse packet is defined for a tophat slit of full width a")
    slit.check_resolved(grid)
    return gaussian_packet(grid, -x1_detected, 0.0, slit.width / 2)


def reduce_discrete(
    psi: Field2D, spec: DiscreteEntangledSpec, rng_seed: int, stream: int = 0
) -> tuple[int, Field2D]:
    """Sample one position readout of particle 1 and return the reduced product peak."""
    probs = peak_probabilities(psi, spec)
    j = int(discrete_outcomes(probs, rng_seed, 1, stream)[0])
    return j, peak_term(psi.grids, spec, j)


def discrete_outcomes(probs: np.ndarray, rng_seed: int, trials: int, stream: int = 0) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or len(probs) < 2 or np.any(probs < 0) or not probs.sum() > 0:
        raise ValueError("need a non-degenerate outcome distribution")
    rng = make_rng(rng_seed, stream)
    cdf = np.cumsum(probs / probs.sum())
    return np.minimum(np.searchsorted(cdf, rng.random(trials), side="right"), len(probs) - 1)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


class JointSampler:
    """Inverse-CDF sampler of ``|psi(x1, x2)|^2`` with the density flat inside each cell."""

    def __init__(self, psi):
        psi = psi.to_position()
        g1, g2 = psi.grids
        self.g1, self.g2 = g1, g2
        rho = psi.density()
        col = rho.sum(axis=1)
        self.pmf1 = col / col.sum()
        self.cdf1 = np.cumsum(self.pmf1)
        safe = np.where(col > 0, col, 1.0)
        self.pmf2 = rho / safe[:, None]
        self.cdf2 = np.cumsum(self.pmf2, axis=1)

    @staticmethod
    def _invert(cdf, pmf, lo, dx, u):
        k = np.clip(np.searchsorted(cdf, u, side="right"), 0, len(pmf) - 1)
        below = np.where(k > 0, cdf[k - 1], 0.0)
        frac = np.where(pmf[k] > 0, (u - below) / np.where(pmf[k] > 0, pmf[k], 1.0), 0.5)
        return k, lo[k] + np.clip(frac, 0.0, 1.0) * dx

    def sample(self, u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k1, x1 = self._invert(self.cdf1, self.pmf1, self.g1.edges[:-1], self.g1.dx, u1)
        x2 = np.empty_like(x1)
        order = np.argsort(k1, kind="stable")
        ks, starts = np.unique(k1[order], return_index=True)
        bounds = list(starts) + [len(order)]
        for j, k in enumerate(ks):
            sel = order[bounds[j] : bounds[j + 1]]
            _, x2[sel] = self._invert(self.cdf2[k], self.pmf2[k], self.g2.edges[:-1], self.g2.dx, u2[sel])
        return x1, x2


def sample_joint(psi: Field2D, rng_seed: int, size: int = 1, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(x1, x2)`` from ``|psi|^2``: ``x1`` from the marginal, then ``x2`` from its column."""
    rng = make_rng(rng_seed, stream)
    u1 = rng.random(size)
    u2 = rng.random(size)
    return JointSampler(psi).sample(u1, u2)


def no_signaling_check(psi: Field2D, slit: Aperture, t: float = 0.0) -> float:
    """L1 distance between particle 2's outcome-averaged density and its plain marginal.

    Particle 1 meets the slit at time 0; particle 2 is read out at time ``t``.  The
    averaged density is ``p_det rho_detected + (1 - p_det) rho_blocked`` with both
    conditionals built column by column; the reference marginal comes from the
    jointly evolved two-particle field.
    """
    psi = psi.to_position()
    g1, g2 = psi.grids
    slit.check_resolved(g1)
    t1 = slit.transmission(g1.x)
    evolved_cols = free_evolve(psi, t, axes=(1,)) if t > 0 else psi
    parts = []
    for trans in (t1, 1.0 - t1):
        raw, col_mass = _column_weights(psi, trans)
        p = float(raw.sum())
        if p < MIN_DETECTION_PROBABILITY:
            continue
        idx = np.nonzero(raw > 0)[0]
        amps = evolved_cols.values[idx] / np.sqrt(col_mass[idx])[:, None]
        rho = (raw[idx] / p) @ (np.abs(amps) ** 2)
        parts.append(p * rho)
    averaged = np.sum(parts, axis=0)
    reference = marginal(free_evolve(psi, t) if t > 0 else psi, 2)
    return float(np.sum(np.abs(averaged - reference)) * g2.dx)

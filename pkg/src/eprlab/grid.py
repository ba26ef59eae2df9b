"""Uniform lattices, sampled wavefunctions and the position/momentum transform.

Positions are sampled at cell midpoints ``x_k = x_min + (k + 1/2) dx`` so that a
symmetric domain gives a lattice symmetric about zero.  The momentum lattice is
``p_k = (k - n/2) dp`` with ``dp = 2 pi hbar / (n dx)``.  Densities are plain
Riemann sums over these points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

POSITION = "position"
MOMENTUM = "momentum"

NORM_TOL = 1e-6
BOUNDARY_DENSITY_TOL = 1e-8


class GridError(ValueError):
    """Invalid lattice parameters."""


class ResolutionError(ValueError):
    """A feature is narrower than the lattice can represent."""


class BoundaryError(ValueError):
    """Probability reached the edge of the periodic domain (wraparound)."""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid1D:
    n: int
    x_min: float
    dx: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)) or self.n < 8:
            raise GridError(f"n must be a power of two >= 8, got {self.n}")
        if not self.dx > 0:
            raise GridError(f"dx must be > 0, got {self.dx}")

    @property
    def hbar(self) -> float:
        return self.constants.hbar

    @property
    def x_max(self) -> float:
        return self.x_min + self.n * self.dx

    @property
    def dp(self) -> float:
        return 2.0 * np.pi * self.hbar / (self.n * self.dx)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n) + 0.5) * self.dx

    @cached_property
    def p(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dp

    @cached_property
    def edges(self) -> np.ndarray:
        return self.x_min + np.arange(self.n + 1) * self.dx

    @cached_property
    def _alternating(self) -> np.ndarray:
        return np.where(np.arange(self.n) % 2 == 0, 1.0, -1.0)

    @cached_property
    def _forward_phase(self) -> np.ndarray:
        x0 = self.x[0]
        pref = self.dx / np.sqrt(2.0 * np.pi * self.hbar)
        return pref * np.exp(-1j * self.p * x0 / self.hbar)

    @cached_property
    def _inverse_phase(self) -> np.ndarray:
        x0 = self.x[0]
        pref = self.n * self.dp / np.sqrt(2.0 * np.pi * self.hbar)
        return pref * np.exp(1j * self.p * x0 / self.hbar)

    def same_as(self, other: "Grid1D") -> bool:
        return (
            self.n == other.n
            and self.x_min == other.x_min
            and self.dx == other.dx
            and self.constants == other.constants
        )

    def spacing(self, representation: str) -> float:
        return self.dx if representation == POSITION else self.dp

    def coords(self, representation: str) -> np.ndarray:
        return self.x if representation == POSITION else self.p

    def __repr__(self):
        return f"Grid1D(n={self.n}, x_min={self.x_min}, x_max={self.x_max}, dx={self.dx})"


def make_grid(n: int, x_min: float, x_max: float, constants: PhysicalConstants | None = None) -> Grid1D:
    """Build a lattice of ``n`` cells covering ``[x_min, x_max)``."""
    if not x_max > x_min:
        raise GridError(f"x_max must exceed x_min, got [{x_min}, {x_max})")
    if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 8:
        raise GridError(f"n must be a power of two >= 8, got {n}")
    return Grid1D(int(n), float(x_min), (x_max - x_min) / n, constants or PhysicalConstants())


@dataclass(frozen=True, eq=False)
class Field1D:
    grid: Grid1D
    values: np.ndarray
    representation: str = POSITION

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if self.representation not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown representation {self.representation!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return self.grid.spacing(self.representation)

    @property
    def coords(self) -> np.ndarray:
        return self.grid.coords(self.representation)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.spacing)

    def normalized(self) -> "Field1D":
        return Field1D(self.grid, self.values / np.sqrt(self.norm()), self.representation)

    def to_position(self) -> "Field1D":
        return self if self.representation == POSITION else fourier_transform(self, POSITION)

    def to_momentum(self) -> "Field1D":
        return self if self.representation == MOMENTUM else fourier_transform(self, MOMENTUM)


@dataclass(frozen=True, eq=False)
class Field2D:
    """Two-particle amplitude ``values[i, j] = psi(x1_i, x2_j)``."""

    grids: tuple[Grid1D, Grid1D]
    values: np.ndarray
    representation: tuple[str, str] = (POSITION, POSITION)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        shape = (self.grids[0].n, self.grids[1].n)
        if values.shape != shape:
            raise ValueError(f"expected shape {shape}, got {values.shape}")
        for rep in self.representation:
            if rep not in (POSITION, MOMENTUM):
                raise ValueError(f"unknown representation {rep!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "representation", tuple(self.representation))

    def spacing(self, axis: int) -> float:
        return self.grids[axis].spacing(self.representation[axis])

    def coords(self, axis: int) -> np.ndarray:
        return self.grids[axis].coords(self.representation[axis])

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.spacing(0) * self.spacing(1))

    def normalized(self) -> "Field2D":
        return Field2D(self.grids, self.values / np.sqrt(self.norm()), self.representation)

    def to_position(self) -> "Field2D":
        f = self
        for axis in (0, 1):
            if f.representation[axis] != POSITION:
                f = fourier_transform(f, POSITION, axis=axis)
        return f

    def to_momentum(self) -> "Field2D":
        f = self
        for axis in (0, 1):
            if f.representation[axis] != MOMENTUM:
                f = fourier_transform(f, MOMENTUM, axis=axis)
        return f


def _shape_for(axis: int, ndim: int) -> tuple:
    shape = [1] * ndim
    shape[axis] = -1
    return tuple(shape)


def _transform_array(values: np.ndarray, grid: Grid1D, direction: str, axis: int) -> np.ndarray:
    shape = _shape_for(axis, values.ndim)
    alt = grid._alternating.reshape(shape)
    if direction == MOMENTUM:
        out = np.fft.fft(values * alt, axis=axis)
        return out * grid._forward_phase.reshape(shape)
    out = np.fft.ifft(values * grid._inverse_phase.reshape(shape), axis=axis)
    return out * alt


def fourier_transform(f, direction: str, axis: int | None = None):
    """Map a field (or one axis of a two-particle field) to the dual representation.

    The discrete map is unitary with respect to the ``dx``/``dp`` weighted norms
    and approximates ``phi(p) = (2 pi hbar)^(-1/2) int dx exp(-i p x / hbar) psi(x)``.
    """
    if direction not in (POSITION, MOMENTUM):
        raise ValueError(f"unknown direction {direction!r}")
    source = MOMENTUM if direction == POSITION else POSITION
    if isinstance(f, Field1D):
        if f.representation != source:
            raise ValueError(f"field is already in {f.representation} representation")
        return Field1D(f.grid, _transform_array(f.values, f.grid, direction, 0), direction)
    if isinstance(f, Field2D):
        if axis not in (0, 1):
            raise ValueError("axis must be 0 or 1 for a two-particle field")
        if f.representation[axis] != source:
            raise ValueError(f"axis {axis} is already in {f.representation[axis]} representation")
        rep = list(f.representation)
        rep[axis] = direction
        values = _transform_array(f.values, f.grids[axis], direction, axis)
        return Field2D(f.grids, values, tuple(rep))
    raise TypeError(f"cannot transform {type(f).__name__}")


@dataclass(frozen=True)
class DispersionReport:
    mean_x: float
    std_x: float
    mean_p: float
    std_p: float
    product: float

    def as_dict(self) -> dict:
        return {
            "mean_x": self.mean_x,
            "std_x": self.std_x,
            "mean_p": self.mean_p,
            "std_p": self.std_p,
            "product": self.product,
        }


def density_moments(coords: np.ndarray, density: np.ndarray, spacing: float) -> tuple[float, float]:
    """Mean and standard deviation of a sampled density (normalised internally)."""
    w = density * spacing
    total = w.sum()
    mean = float(np.dot(w, coords) / total)
    var = float(np.dot(w, (coords - mean) ** 2) / total)
    return mean, float(np.sqrt(max(var, 0.0)))


def dispersion_from_densities(grid: Grid1D, rho_x: np.ndarray, rho_p: np.ndarray) -> DispersionReport:
    mean_x, std_x = density_moments(grid.x, rho_x, grid.dx)
    mean_p, std_p = density_moments(grid.p, rho_p, grid.dp)
    return DispersionReport(mean_x, std_x, mean_p, std_p, std_x * std_p / grid.hbar)


def moments(f: Field1D) -> DispersionReport:
    norm = f.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"field is not normalized (norm={norm:.3e})")
    fx = f.to_position()
    fp = f.to_momentum()
    return dispersion_from_densities(f.grid, fx.density(), fp.density())


def marginal(f: Field2D, axis: int) -> np.ndarray:
    """Density of particle ``axis + 1`` with the other particle integrated out.

    ``axis`` follows the particle label: 1 or 2.
    """
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    f = f.to_position()
    other = 1 if axis == 1 else 0
    return f.density().sum(axis=other) * f.spacing(other)


def momentum_marginal(f: Field2D, axis: int) -> np.ndarray:
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    g = f.to_position()
    g = fourier_transform(g, MOMENTUM, axis=axis - 1)
    other = 1 if axis == 1 else 0
    return g.density().sum(axis=other) * g.spacing(other)


def check_boundary(f, tol: float = BOUNDARY_DENSITY_TOL) -> None:
    """Raise :class:`BoundaryError` if the position density at the domain edge exceeds ``tol``."""
    if isinstance(f, Field1D):
        rho = f.to_position().density()
        edge = max(rho[0], rho[-1])
    else:
        edge = 0.0
        for axis in (1, 2):
            rho = marginal(f, axis)
            edge = max(edge, rho[0], rho[-1])
    if edge > tol:
        raise BoundaryError(
            f"density {edge:.3e} at the domain edge exceeds {tol:.0e}; widen the grid"
        )


def _apply_momentum_operator(values: np.ndarray, grid: Grid1D, axis: int) -> np.ndarray:
    shape = _shape_for(axis, values.ndim)
    phi = _transform_array(values, grid, MOMENTUM, axis)
    return _transform_array(phi * grid.p.reshape(shape), grid, POSITION, axis)


def covariance_matrix(f: Field2D) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and symmetrised covariance of ``(x1, p1, x2, p2)`` on the lattice."""
    f = f.to_position()
    g1, g2 = f.grids
    psi = f.values
    w = g1.dx * g2.dx
    x1 = g1.x[:, None]
    x2 = g2.x[None, :]
    rho = np.abs(psi) ** 2 * w

    p1psi = _apply_momentum_operator(psi, g1, 0)
    p2psi = _apply_momentum_operator(psi, g2, 1)
    conj = psi.conj() * w

    mean = np.array(
        [
            np.sum(rho * x1),
            np.real(np.sum(conj * p1psi)),
            np.sum(rho * x2),
            np.real(np.sum(conj * p2psi)),
        ]
    )
    second = np.empty((4, 4))
    second[0, 0] = np.sum(rho * x1 * x1)
    second[2, 2] = np.sum(rho * x2 * x2)
    second[0, 2] = np.sum(rho * x1 * x2)
    second[1, 1] = np.real(np.sum(np.conj(p1psi) * p1psi)) * w
    second[3, 3] = np.real(np.sum(np.conj(p2psi) * p2psi)) * w
    second[1, 3] = np.real(np.sum(np.conj(p1psi) * p2psi)) * w
    # Re<psi| x p |psi> is the symmetrised product (x p + p x)/2
    second[0, 1] = np.real(np.sum(conj * x1 * p1psi))
    second[0, 3] = np.real(np.sum(conj * x1 * p2psi))
    second[2, 1] = np.real(np.sum(conj * x2 * p1psi))
    second[2, 3] = np.real(np.sum(conj * x2 * p2psi))
    for i, j in ((0, 2), (1, 3), (0, 1), (0, 3), (2, 1), (2, 3)):
        second[j, i] = second[i, j]
    cov = second - np.outer(mean, mean)
    return mean, cov

"""Free transverse evolution and the paraxial angle model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    MOMENTUM,
    Field1D,
    Field2D,
    PhysicalConstants,
    _shape_for,
    check_boundary,
    fourier_transform,
)


@dataclass(frozen=True)
class ParaxialGeometry:
    """Classical longitudinal flight at constant speed, starting at ``source_time``."""

    longitudinal_speed: float = 100.0
    source_time: float = 0.0

    def __post_init__(self):
        if not self.longitudinal_speed > 0:
            raise ValueError(f"longitudinal_speed must be > 0, got {self.longitudinal_speed}")


def free_propagator(f_grid, t: float) -> np.ndarray:
    c = f_grid.constants
    return np.exp(-1j * f_grid.p**2 * t / (2 * c.mass * c.hbar))


def free_evolve(f, t: float, axes: tuple[int, ...] | None = None, guard: bool = True):
    """Evolve under the kinetic Hamiltonian for time ``t``.

    Exact in the momentum representation.  For a two-particle field ``axes``
    selects which particles move (default both); evolving a single particle is
    enough when only its own statistics are read out.  The result is returned in
    the representation of the input.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if isinstance(f, Field1D):
        if t == 0:
            return f
        rep = f.representation
        g = f.to_momentum()
        out = Field1D(f.grid, g.values * free_propagator(f.grid, t), MOMENTUM)
        out_x = out.to_position()
        if guard:
            check_boundary(out_x)
        return out_x if rep != MOMENTUM else out
    if isinstance(f, Field2D):
        axes = (0, 1) if axes is None else tuple(axes)
        if t == 0 or not axes:
            return f
        rep = f.representation
        g = f
        for axis in axes:
            if g.representation[axis] != MOMENTUM:
                g = fourier_transform(g, MOMENTUM, axis=axis)
        values = np.array(g.values)
        for axis in axes:
            values *= free_propagator(f.grids[axis], t).reshape(_shape_for(axis, 2))
        out = Field2D(f.grids, values, g.representation)
        out_x = out.to_position()
        if guard:
            check_boundary(out_x)
        if rep == (MOMENTUM, MOMENTUM):
            return out_x.to_momentum()
        return out_x
    raise TypeError(f"cannot evolve {type(f).__name__}")


def spread_law(sigma0: float, t: float, constants: PhysicalConstants | None = None) -> float:
    """Width at time ``t`` of a free minimum-uncertainty packet of initial width ``sigma0``."""
    if not sigma0 > 0:
        raise ValueError(f"sigma0 must be > 0, got {sigma0}")
    c = constants or PhysicalConstants()
    return float(np.sqrt(sigma0**2 + (c.hbar * t / (2 * c.mass * sigma0)) ** 2))


def angular_width(std_x: float, t: float, geom: ParaxialGeometry) -> float:
    """Small-angle spread seen from the source after flight time ``t - source_time``."""
    distance = geom.longitudinal_speed * (t - geom.source_time)
    if not distance > 0:
        raise ValueError(f"distance from source must be > 0 (t={t}, source_time={geom.source_time})")
    return std_x / distance

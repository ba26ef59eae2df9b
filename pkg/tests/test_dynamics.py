import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprlab.dynamics import ParaxialGeometry, angular_width, free_evolve, spread_law
from eprlab.grid import BoundaryError, PhysicalConstants, covariance_matrix, make_grid, moments
from eprlab.oracle import epr_covariance, evolve_covariance
from eprlab.states import EPRParams, gaussian_packet


@pytest.mark.parametrize("sigma0", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_spreading_matches_law(small_grid, sigma0, t):
    d = moments(free_evolve(gaussian_packet(small_grid, 0.0, 0.0, sigma0), t))
    assert d.std_x == pytest.approx(spread_law(sigma0, t), rel=1e-3)


@settings(max_examples=15, deadline=None)
@given(t=st.floats(0.0, 3.0), p0=st.floats(-2, 2), sigma=st.floats(0.6, 2.5))
def test_norm_and_momentum_density_conserved(t, p0, sigma):
    g = make_grid(1024, -40.0, 40.0)
    f = gaussian_packet(g, 0.0, p0, sigma)
    out = free_evolve(f, t)
    assert abs(out.norm() - f.norm()) <= 1e-12
    drift = np.sum(np.abs(out.to_momentum().density() - f.to_momentum().density())) * g.dp
    assert drift <= 1e-12


def test_mean_moves_ballistically(small_grid):
    d = moments(free_evolve(gaussian_packet(small_grid, -3.0, 1.5, 1.0), 2.0))
    assert d.mean_x == pytest.approx(0.0, abs=1e-9)
    assert d.mean_p == pytest.approx(1.5, abs=1e-9)


def test_mass_enters_spreading():
    c = PhysicalConstants(hbar=1.0, mass=4.0)
    g = make_grid(1024, -40.0, 40.0, c)
    d = moments(free_evolve(gaussian_packet(g, 0.0, 0.0, 0.5), 2.0))
    assert d.std_x == pytest.approx(spread_law(0.5, 2.0, c), rel=1e-6)


def test_representation_preserved(small_grid):
    f = gaussian_packet(small_grid, 0.0, 0.0, 1.0).to_momentum()
    assert free_evolve(f, 1.0).representation == f.representation


def test_negative_time_rejected(small_grid):
    with pytest.raises(ValueError):
        free_evolve(gaussian_packet(small_grid, 0.0, 0.0, 1.0), -1.0)


def test_wraparound_raises(small_grid):
    f = gaussian_packet(small_grid, 30.0, 8.0, 1.0)
    with pytest.raises(BoundaryError):
        free_evolve(f, 2.0)


def test_epr_evolution_matches_shear(epr_narrow):
    t = 1.0
    _, cov0 = covariance_matrix(epr_narrow)
    _, cov = covariance_matrix(free_evolve(epr_narrow, t))
    ref = evolve_covariance(epr_covariance(EPRParams(0.1, 10.0)), t).cov
    np.testing.assert_allclose(cov, ref, rtol=1e-8, atol=1e-10)
    var_sum = lambda c: c[1, 1] + c[3, 3] + 2 * c[1, 3]  # noqa: E731
    assert abs(var_sum(cov) - var_sum(cov0)) / var_sum(cov0) <= 1e-10


def test_single_axis_evolution_leaves_other_marginal(epr_narrow, grid):
    from eprlab.grid import marginal

    f = free_evolve(epr_narrow, 1.0, axes=(1,))
    np.testing.assert_allclose(marginal(f, 1), marginal(epr_narrow, 1), atol=1e-14)


def test_spread_law_values():
    assert spread_law(1.0, 2.0) == pytest.approx(np.sqrt(2.0))
    assert spread_law(0.5, 1.0) == pytest.approx(np.sqrt(1.25))
    with pytest.raises(ValueError):
        spread_law(0.0, 1.0)


def test_angular_width():
    geom = ParaxialGeometry(longitudinal_speed=50.0, source_time=0.5)
    assert angular_width(2.0, 1.5, geom) == pytest.approx(2.0 / 50.0)
    with pytest.raises(ValueError):
        angular_width(1.0, 0.5, geom)

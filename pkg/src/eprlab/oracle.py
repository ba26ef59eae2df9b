"""Closed-form two-mode Gaussian analytics.

Everything here is independent of the lattice code and is used to check it.
Phase-space ordering is ``(x1, p1, x2, p2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .grid import PhysicalConstants
from .measurement import GAUSSIAN, TOPHAT, Aperture
from .states import EPRParams

QUAD_TOL = 1e-10

X1, P1, X2, P2 = range(4)


def symplectic_form(modes: int = 2) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Williamson spectrum: moduli of the eigenvalues of ``i Omega V``, one per mode."""
    omega = symplectic_form(cov.shape[0] // 2)
    ev = np.abs(np.linalg.eigvals(1j * omega @ cov))
    return np.sort(ev)[::2]


@dataclass(frozen=True, eq=False)
class CovarianceState:
    mean: np.ndarray
    cov: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (4,) or cov.shape != (4, 4):
            raise ValueError("expected a 4-vector mean and 4x4 covariance")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * np.abs(cov).max()):
            raise ValueError("covariance is not symmetric")
        nu = symplectic_eigenvalues(cov)
        if nu.min() < self.hbar / 2 * (1 - 1e-9):
            raise ValueError(f"covariance violates the uncertainty principle (nu_min={nu.min():.6g})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def epr_covariance(params: EPRParams, constants: PhysicalConstants | None = None) -> CovarianceState:
    hbar = (constants or PhysicalConstants()).hbar
    sp2, sm2 = params.sigma_plus**2, params.sigma_minus**2
    cov = np.zeros((4, 4))
    cov[X1, X1] = cov[X2, X2] = (sp2 + sm2) / 4
    cov[X1, X2] = cov[X2, X1] = (sp2 - sm2) / 4
    cov[P1, P1] = cov[P2, P2] = (1 / sp2 + 1 / sm2) * hbar**2 / 4
    cov[P1, P2] = cov[P2, P1] = (1 / sp2 - 1 / sm2) * hbar**2 / 4
    return CovarianceState(np.zeros(4), cov, hbar)


def evolve_covariance(state: CovarianceState, t: float, mass: float = 1.0) -> CovarianceState:
    """Free flight: ``x_i -> x_i + p_i t / m`` for both particles."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    shear = np.eye(4)
    shear[X1, P1] = shear[X2, P2] = t / mass
    return CovarianceState(shear @ state.mean, shear @ state.cov @ shear.T, state.hbar)


def conditional_moments(
    params: EPRParams, x1: float, constants: PhysicalConstants | None = None
) -> tuple[float, float, float]:
    """Mean and variance of ``x2`` and variance of ``p2`` given an exact readout ``x1``."""
    hbar = (constants or PhysicalConstants()).hbar
    sp2, sm2 = params.sigma_plus**2, params.sigma_minus**2
    mean = x1 * (sp2 - sm2) / (sp2 + sm2)
    var_x = sp2 * sm2 / (sp2 + sm2)
    return mean, var_x, hbar**2 / (4 * var_x)


def condition_gaussian(mean: np.ndarray, cov: np.ndarray, index: int, value: float):
    """Schur-complement conditioning of a Gaussian on one coordinate.

    Returns ``(mean, cov, gain)`` of the remaining coordinates, where ``gain`` is
    the slope of the conditional mean in ``value``.
    """
    rest = [i for i in range(len(mean)) if i != index]
    s = cov[index, index]
    gain = cov[rest, index] / s
    cmean = mean[rest] + gain * (value - mean[index])
    ccov = cov[np.ix_(rest, rest)] - np.outer(gain, gain) * s
    return cmean, ccov, gain


def slit_weight_raw_moments(mu: float, var: float, slit: Aperture, orders: int = 3) -> np.ndarray:
    """Unnormalised raw moments ``int T(x) N(x; mu, var) x^k dx`` for ``k < orders``.

    Adaptive quadrature on the (bounded) support of the aperture; the zeroth
    moment of a tophat comes from the normal CDF.
    """
    sd = np.sqrt(var)
    pdf = stats.norm(mu, sd).pdf
    if slit.kind == TOPHAT:
        lo, hi = slit.center - slit.width / 2, slit.center + slit.width / 2
        weight = pdf
    elif slit.kind == GAUSSIAN:
        reach = 12 * slit.width
        lo, hi = slit.center - reach, slit.center + reach
        weight = lambda x: pdf(x) * np.exp(-((x - slit.center) ** 2) / (2 * slit.width**2))  # noqa: E731
    else:
        raise ValueError(f"unknown aperture kind {slit.kind!r}")

    out = np.empty(orders)
    for k in range(orders):
        val, err = integrate.quad(lambda x: weight(x) * x**k, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        if err > QUAD_TOL:
            raise ArithmeticError(f"quadrature did not converge (error estimate {err:.2e})")
        out[k] = val
    if slit.kind == TOPHAT:
        out[0] = stats.norm.cdf(hi, mu, sd) - stats.norm.cdf(lo, mu, sd)
    return out


def _slit_weight_moments(mu: float, var: float, slit: Aperture) -> tuple[float, float, float]:
    """Mass, mean and variance of ``x1`` restricted to the slit."""
    raw = slit_weight_raw_moments(mu, var, slit, orders=3)
    if not raw[0] > 0:
        raise ValueError("slit sits where particle 1 has no probability")
    m = raw[1] / raw[0]
    return float(raw[0]), float(m), float(max(raw[2] / raw[0] - m**2, 0.0))


@dataclass(frozen=True)
class MixtureMoments:
    """Particle-2 statistics after a slit readout on particle 1, plus the ``x1 + x2`` residual."""

    mean_x2: float
    var_x2: float
    mean_p2: float
    var_p2: float
    detection_probability: float
    residual_mean: float
    residual_var: float

    @property
    def std_x2(self) -> float:
        return float(np.sqrt(self.var_x2))

    @property
    def std_p2(self) -> float:
        return float(np.sqrt(self.var_p2))


def conditioned_mixture(
    state: CovarianceState, slit: Aperture, delay: float = 0.0, mass: float = 1.0
) -> MixtureMoments:
    """Condition ``state`` on particle 1 passing ``slit``, then let particle 2 fly for ``delay``.

    Each exact readout ``x1 = c`` leaves a Gaussian for ``(x2, p2)`` whose mean is
    linear in ``c`` and whose covariance does not depend on ``c``; the slit mixes
    these, so the mixture covariance is that conditional covariance plus the
    spread of the conditional mean (law of total variance).
    """
    p_det, ec, vc = _slit_weight_moments(state.mean[X1], state.cov[X1, X1], slit)
    cmean, ccov, gain = condition_gaussian(state.mean, state.cov, X1, ec)
    # remaining order is (p1, x2, p2); keep particle 2
    m2 = cmean[1:]
    c2 = ccov[1:, 1:]
    g2 = gain[1:]
    flight = np.array([[1.0, delay / mass], [0.0, 1.0]])
    m2 = flight @ m2
    c2 = flight @ c2 @ flight.T
    g2 = flight @ g2
    mix = c2 + np.outer(g2, g2) * vc
    residual_mean = ec + m2[0]
    residual_var = vc * (1 + g2[0]) ** 2 + c2[0, 0]
    return MixtureMoments(
        mean_x2=float(m2[0]),
        var_x2=float(mix[0, 0]),
        mean_p2=float(m2[1]),
        var_p2=float(mix[1, 1]),
        detection_probability=float(p_det),
        residual_mean=float(residual_mean),
        residual_var=float(residual_var),
    )


def slit_mixture_moments(
    params: EPRParams, slit: Aperture, constants: PhysicalConstants | None = None
) -> tuple[float, float, float, float]:
    """``(mean x2, var x2, var p2, detection probability)`` at the moment of the readout.

    Assembled from :func:`conditional_moments` and the slit-restricted
    marginal of ``x1``; no covariance matrix is involved.
    """
    constants = constants or PhysicalConstants()
    sp2, sm2 = params.sigma_plus**2, params.sigma_minus**2
    p_det, ec, vc = _slit_weight_moments(0.0, (sp2 + sm2) / 4, slit)
    slope = (sp2 - sm2) / (sp2 + sm2)
    mean, var_x, var_p = conditional_moments(params, ec, constants)
    # the conditional p2 mean is zero for every readout (real wavefunction)
    return mean, var_x + slope**2 * vc, var_p, p_det


def marginal_x2_moments(state: CovarianceState, t: float = 0.0, mass: float = 1.0) -> tuple[float, float, float]:
    """Unconditioned mean/var of ``x2`` and var of ``p2`` after free flight ``t``."""
    s = evolve_covariance(state, t, mass)
    return float(s.mean[X2]), float(s.cov[X2, X2]), float(s.cov[P2, P2])

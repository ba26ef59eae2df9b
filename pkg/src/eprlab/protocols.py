"""Executable experiments on the EPR source.

Three readings of particle 2 after particle 1 is detected behind a slit:

* ``m1`` - the collapse picture: particle 2 becomes a packet of width ``a/2`` at ``-x1``.
* ``m2`` - exact conditional ensemble (what quantum mechanics predicts for coincidences).
* ``m3`` - the unconditioned marginal of particle 2 (what a lone receiver sees).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dynamics import ParaxialGeometry, angular_width, free_evolve, spread_law
from .grid import (
    DispersionReport,
    Grid1D,
    PhysicalConstants,
    dispersion_from_densities,
    make_grid,
    marginal,
    momentum_marginal,
)
from .measurement import (
    TOPHAT,
    Aperture,
    JointSampler,
    collapse_packet_m1,
    condition_on_slit,
    make_rng,
)
from .oracle import (
    CovarianceState,
    conditioned_mixture,
    epr_covariance,
    evolve_covariance,
    marginal_x2_moments,
    slit_weight_raw_moments,
)
from .states import EPRParams, epr_pair

M1 = "m1"
M2 = "m2"
M3 = "m3"
M2_UNCONDITIONAL = "m2-unconditional"


@dataclass(frozen=True)
class GridSpec:
    n: int = 1024
    x_min: float = -40.0
    x_max: float = 40.0

    def build(self, constants: PhysicalConstants) -> Grid1D:
        return make_grid(self.n, self.x_min, self.x_max, constants)

    def as_dict(self) -> dict:
        return {"n": self.n, "x_min": self.x_min, "x_max": self.x_max}


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------- discriminator


@dataclass(frozen=True)
class DiscriminatorConfig:
    epr: EPRParams = EPRParams(0.1, 10.0)
    slit: Aperture = Aperture(TOPHAT, 0.0, 1.0)
    measurement_time: float = 0.0
    delays: tuple[float, ...] = (0.0, 0.5, 1.0)
    geometry: ParaxialGeometry = ParaxialGeometry()
    grid: GridSpec = GridSpec()
    constants: PhysicalConstants = PhysicalConstants()
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        delays = tuple(float(d) for d in self.delays)
        if any(d < 0 for d in delays) or list(delays) != sorted(delays):
            raise ValueError(f"delays must be nonnegative and ascending, got {delays}")
        if self.measurement_time < 0:
            raise ValueError(f"measurement_time must be >= 0, got {self.measurement_time}")
        object.__setattr__(self, "delays", delays)


@dataclass
class DiscriminatorReport:
    rows: list[dict]
    residuals: list[dict]
    fidelity: list[dict]
    detection_probability: float
    densities: dict[str, tuple[np.ndarray, np.ndarray]] = field(repr=False, default_factory=dict)

    def row(self, model: str, tau: float) -> dict:
        for r in self.rows:
            if r["model"] == model and r["tau"] == tau:
                return r
        raise KeyError((model, tau))

    def as_dict(self) -> dict:
        return {
            "detection_probability": self.detection_probability,
            "rows": self.rows,
            "m2_residuals": self.residuals,
            "m2_m3_fidelity": self.fidelity,
        }


def _angle(std_x: float, t: float, geom: ParaxialGeometry):
    try:
        return angular_width(std_x, t, geom)
    except ValueError:
        return None


def _reduced_fidelity(ensemble, psi_rows: np.ndarray, dx1: float) -> float:
    return float(ensemble.fidelity_with(psi_rows, dx1).min())


def run_discriminator(cfg: DiscriminatorConfig) -> DiscriminatorReport:
    """Follow particle 2 under the three models for every delay after the slit readout."""
    g = cfg.grid.build(cfg.constants)
    psi = epr_pair((g, g), cfg.epr)
    if cfg.measurement_time > 0:
        psi = free_evolve(psi, cfg.measurement_time)
    ensemble = condition_on_slit(psi, cfg.slit)
    packet = collapse_packet_m1(cfg.slit.center, cfg.slit, g)

    def one_delay(tau: float):
        t = cfg.measurement_time + tau
        out = {}
        m1 = free_evolve(packet, tau)
        m1_rho_x = m1.density()
        m1_rho_p = m1.to_momentum().density()
        out[M1] = (dispersion_from_densities(g, m1_rho_x, m1_rho_p), m1_rho_x)

        ens = ensemble.evolve(tau)
        out[M2] = (ens.dispersion(), ens.position_density())

        psi_tau = free_evolve(psi, tau, axes=(1,))
        m3_rho_x = marginal(psi_tau, 2)
        m3_rho_p = momentum_marginal(psi_tau, 2)
        out[M3] = (dispersion_from_densities(g, m3_rho_x, m3_rho_p), m3_rho_x)

        residual = ens.residual_stats()
        fid = _reduced_fidelity(ens, psi_tau.values, g.dx)
        return t, out, residual, fid

    results = _map(one_delay, cfg.delays, cfg.workers)

    rows, residuals, fidelity, densities = [], [], [], {}
    for tau, (t, out, residual, fid) in zip(cfg.delays, results):
        for model in (M1, M2, M3):
            disp, rho = out[model]
            rows.append(
                {
                    "model": model,
                    "tau": tau,
                    **disp.as_dict(),
                    "angular_width": _angle(disp.std_x, t, cfg.geometry),
                }
            )
            densities[f"{model}_tau{tau:g}"] = (g.x, rho)
        residuals.append({"tau": tau, "mean": residual[0], "std": residual[1]})
        fidelity.append({"tau": tau, "min_component_fidelity": fid})
    return DiscriminatorReport(rows, residuals, fidelity, ensemble.detection_probability, densities)


# --------------------------------------------------------------------------- signaling


@dataclass(frozen=True)
class SignalingConfig:
    epr: EPRParams = EPRParams(0.1, 10.0)
    slit_high: Aperture = Aperture(TOPHAT, 0.0, 1.0)
    slit_low: Aperture = Aperture(TOPHAT, 0.0, 0.2)
    blocks: int = 50
    pairs_per_block: int = 2000
    delay: float = 1.0
    model: str = M2_UNCONDITIONAL
    grid: GridSpec = GridSpec(2048, -51.2, 51.2)
    constants: PhysicalConstants = PhysicalConstants()
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.blocks < 20:
            raise ValueError(f"blocks must be >= 20, got {self.blocks}")
        if self.pairs_per_block < 100:
            raise ValueError(f"pairs_per_block must be >= 100, got {self.pairs_per_block}")
        wide = max(self.slit_high.width, self.slit_low.width)
        narrow = min(self.slit_high.width, self.slit_low.width)
        if wide < 2 * narrow:
            raise ValueError("slit widths must differ by at least a factor of 2")
        if self.model not in (M1, M2_UNCONDITIONAL):
            raise ValueError(f"model must be {M1!r} or {M2_UNCONDITIONAL!r}, got {self.model!r}")
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")


@dataclass
class SignalingReport:
    sent_bits: list[int]
    estimates: list[float]
    decoded_bits: list[int]
    accuracy: float
    binomial_se: float
    predicted_dispersion: dict
    predicted_accuracy: float
    accuracy_floor: float
    t_statistic: float
    p_value: float
    detection_probability: dict

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "binomial_se": self.binomial_se,
            "predicted_dispersion": self.predicted_dispersion,
            "predicted_accuracy": self.predicted_accuracy,
            "accuracy_floor": self.accuracy_floor,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "detection_probability": self.detection_probability,
            "blocks": [
                {"block": i, "sent": s, "estimate": e, "decoded": d}
                for i, (s, e, d) in enumerate(zip(self.sent_bits, self.estimates, self.decoded_bits))
            ],
        }


def _linear_gaussian_mixture(c_raw: np.ndarray, intercept: float, slope: float, var: float) -> np.ndarray:
    """Unnormalised raw moments (orders 0..4) of ``x ~ N(intercept + slope c, var)`` mixed over ``c``.

    ``c_raw[j]`` is the unnormalised ``j``-th raw moment of the mixing weight.
    """
    from math import comb

    # E[(a + b c)^j] expanded in powers of c
    def lin_moment(j):
        return sum(comb(j, i) * intercept ** (j - i) * slope**i * c_raw[i] for i in range(j + 1))

    lin = [lin_moment(j) for j in range(5)]
    return np.array(
        [
            lin[0],
            lin[1],
            lin[2] + var * lin[0],
            lin[3] + 3 * var * lin[1],
            lin[4] + 6 * var * lin[2] + 3 * var**2 * lin[0],
        ]
    )


def _normal_raw_moments(var: float) -> np.ndarray:
    return np.array([1.0, 0.0, var, 0.0, 3 * var**2])


def _central_from_raw(raw: np.ndarray) -> tuple[float, float, float]:
    """Mean, variance and kurtosis from normalised raw moments."""
    m1, m2, m3, m4 = raw[1:] / raw[0]
    var = m2 - m1**2
    mu4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
    return m1, var, mu4 / var**2


def predicted_receiver_distribution(
    state: CovarianceState, slit: Aperture, delay: float, model: str, constants: PhysicalConstants
) -> dict:
    """Oracle mean, std, kurtosis and detection rate of particle 2 as seen by a lone receiver."""
    m = constants.mass
    s11 = state.cov[0, 0]
    # exact x2(delay) given x1 = c: N(alpha + beta c, v)
    flight = np.eye(4)
    flight[2, 3] = delay / m
    cov = flight @ state.cov @ flight.T
    beta = cov[2, 0] / s11
    alpha = 0.0
    v = cov[2, 2] - cov[2, 0] ** 2 / s11

    full_c = _normal_raw_moments(s11)
    slit_c = slit_weight_raw_moments(0.0, s11, slit, orders=5)
    blocked_c = full_c - slit_c
    p_det = float(slit_c[0])

    blocked = _linear_gaussian_mixture(blocked_c, alpha, beta, v)
    if model == M1:
        s = spread_law(slit.width / 2, delay, constants)
        detected = _linear_gaussian_mixture(slit_c, 0.0, -1.0, s**2)
    else:
        detected = _linear_gaussian_mixture(slit_c, alpha, beta, v)
    mean, var, kurt = _central_from_raw(blocked + detected)
    return {"mean": float(mean), "std": float(np.sqrt(var)), "kurtosis": float(kurt), "p_det": p_det}


def _block_estimate(sampler: JointSampler, cfg: SignalingConfig, block: int) -> tuple[int, float]:
    bit = 1 if block % 2 == 0 else 0
    slit = cfg.slit_high if bit else cfg.slit_low
    rng = make_rng(cfg.seed, block)
    n = cfg.pairs_per_block
    u1, u2, u3 = rng.random(n), rng.random(n), rng.random(n)
    z = rng.standard_normal(n)
    x1, x2 = sampler.sample(u1, u2)
    detected = u3 < slit.transmission(x1)
    if cfg.model == M1:
        s = spread_law(slit.width / 2, cfg.delay, cfg.constants)
        x2 = np.where(detected, -x1 + s * z, x2)
    return bit, float(np.std(x2, ddof=1))


def run_signaling_test(cfg: SignalingConfig) -> SignalingReport:
    """Try to send one bit per block by switching the slit in front of particle 1.

    The receiver sees only particle-2 detections at the configured delay and
    decodes the bit by thresholding the per-block sample spread.  The threshold
    is the midpoint of the two oracle-predicted spreads, fixed before sampling.
    """
    g = cfg.grid.build(cfg.constants)
    for slit in (cfg.slit_high, cfg.slit_low):
        slit.check_resolved(g)
    psi = epr_pair((g, g), cfg.epr)
    psi_tau = free_evolve(psi, cfg.delay, axes=(1,))
    sampler = JointSampler(psi_tau)

    state = epr_covariance(cfg.epr, cfg.constants)
    oracle_model = M1 if cfg.model == M1 else M2
    pred_high = predicted_receiver_distribution(state, cfg.slit_high, cfg.delay, oracle_model, cfg.constants)
    pred_low = predicted_receiver_distribution(state, cfg.slit_low, cfg.delay, oracle_model, cfg.constants)
    d_high, d_low = pred_high["std"], pred_low["std"]
    threshold = 0.5 * (d_high + d_low)
    high_is_wider = d_high >= d_low

    results = _map(lambda b: _block_estimate(sampler, cfg, b), range(cfg.blocks), cfg.workers)
    sent = [b for b, _ in results]
    est = [e for _, e in results]
    decoded = [int((e > threshold) == high_is_wider) for e in est]
    accuracy = float(np.mean([s == d for s, d in zip(sent, decoded)]))

    n = cfg.pairs_per_block

    def p_correct(pred, wider_side):
        se = pred["std"] * np.sqrt((pred["kurtosis"] - 1) / (4 * n))
        gap = (pred["std"] - threshold) if wider_side else (threshold - pred["std"])
        return float(stats.norm.cdf(gap / se))

    predicted = 0.5 * (p_correct(pred_high, high_is_wider) + p_correct(pred_low, not high_is_wider))
    floor = predicted - 3 * np.sqrt(predicted * (1 - predicted) / cfg.blocks)

    high = [e for s, e in zip(sent, est) if s == 1]
    low = [e for s, e in zip(sent, est) if s == 0]
    t_stat, p_value = stats.ttest_ind(high, low, equal_var=False)
    return SignalingReport(
        sent_bits=sent,
        estimates=est,
        decoded_bits=decoded,
        accuracy=accuracy,
        binomial_se=float(0.5 / np.sqrt(cfg.blocks)),
        predicted_dispersion={"high": d_high, "low": d_low, "threshold": threshold},
        predicted_accuracy=float(predicted),
        accuracy_floor=float(floor),
        t_statistic=float(t_stat),
        p_value=float(p_value),
        detection_probability={"high": pred_high["p_det"], "low": pred_low["p_det"]},
    )


# --------------------------------------------------------------------------- Kim-Shih bound


@dataclass(frozen=True)
class KimShihConfig:
    epr: EPRParams = EPRParams(0.5, 10.0)
    slit: Aperture = Aperture(TOPHAT, 0.0, 0.2)
    delay: float = 0.0
    grid: GridSpec = GridSpec(2048, -51.2, 51.2)
    constants: PhysicalConstants = PhysicalConstants()


@dataclass
class BoundReport:
    std_p2: float
    collapse_bound: float
    ratio: float
    oracle_std_p2: float
    oracle_ratio: float
    uncertainty_product: float
    dispersion: DispersionReport
    below_bound: bool

    def as_dict(self) -> dict:
        return {
            "std_p2": self.std_p2,
            "collapse_bound": self.collapse_bound,
            "ratio": self.ratio,
            "oracle_std_p2": self.oracle_std_p2,
            "oracle_ratio": self.oracle_ratio,
            "uncertainty_product": self.uncertainty_product,
            "dispersion": self.dispersion.as_dict(),
            "below_bound": self.below_bound,
        }


def run_kim_shih(cfg: KimShihConfig) -> BoundReport:
    """Compare particle 2's conditional momentum spread with ``hbar/a``."""
    if cfg.slit.kind != TOPHAT:
        raise ValueError("the collapse bound hbar/a needs a tophat slit of full width a")
    g = cfg.grid.build(cfg.constants)
    psi = epr_pair((g, g), cfg.epr)
    ens = condition_on_slit(psi, cfg.slit).evolve(cfg.delay)
    disp = ens.dispersion()
    bound = cfg.constants.hbar / cfg.slit.width
    mix = conditioned_mixture(epr_covariance(cfg.epr, cfg.constants), cfg.slit, cfg.delay, cfg.constants.mass)
    return BoundReport(
        std_p2=disp.std_p,
        collapse_bound=bound,
        ratio=disp.std_p / bound,
        oracle_std_p2=mix.std_p2,
        oracle_ratio=mix.std_p2 / bound,
        uncertainty_product=disp.product,
        dispersion=disp,
        below_bound=bool(disp.std_p / bound < 1),
    )


# --------------------------------------------------------------------------- persistence


@dataclass(frozen=True)
class PersistenceConfig:
    epr: EPRParams = EPRParams(0.1, 10.0)
    slit: Aperture = Aperture(TOPHAT, 2.0, 1.0)
    measurement_time: float = 0.0
    delays: tuple[float, ...] = (0.0, 0.5, 1.0)
    grid: GridSpec = GridSpec(2048, -51.2, 51.2)
    constants: PhysicalConstants = PhysicalConstants()
    workers: int = 1


def run_correlation_persistence(cfg: PersistenceConfig) -> list[dict]:
    """Conditional ``x2`` statistics versus delay, lattice route against covariance route."""
    g = cfg.grid.build(cfg.constants)
    psi = epr_pair((g, g), cfg.epr)
    if cfg.measurement_time > 0:
        psi = free_evolve(psi, cfg.measurement_time)
    ensemble = condition_on_slit(psi, cfg.slit)
    state = evolve_covariance(epr_covariance(cfg.epr, cfg.constants), cfg.measurement_time, cfg.constants.mass)

    def one(tau):
        ens = ensemble.evolve(tau)
        d = ens.dispersion()
        r_mean, r_std = ens.residual_stats()
        o = conditioned_mixture(state, cfg.slit, tau, cfg.constants.mass)
        _, var_m, _ = marginal_x2_moments(state, tau, cfg.constants.mass)
        return {
            "tau": tau,
            "grid_mean_x2": d.mean_x,
            "grid_std_x2": d.std_x,
            "oracle_mean_x2": o.mean_x2,
            "oracle_std_x2": o.std_x2,
            "grid_residual_mean": r_mean,
            "grid_residual_std": r_std,
            "oracle_residual_mean": o.residual_mean,
            "oracle_residual_std": float(np.sqrt(o.residual_var)),
            "unconditional_std_x2": float(np.sqrt(var_m)),
        }

    return _map(one, cfg.delays, cfg.workers)

"""Acceptance criteria, one test each.

Every criterion is a plain function returning ``(ok, detail)`` so the file also
runs as a script: ``python3 tests/test_acceptance.py``.
"""

import json
import re
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from eprlab import bell
from eprlab.cli import main
from eprlab.dynamics import free_evolve, spread_law
from eprlab.grid import Field1D, PhysicalConstants, covariance_matrix, fourier_transform, make_grid, moments
from eprlab.grid import MOMENTUM, POSITION
from eprlab.measurement import GAUSSIAN, TOPHAT, Aperture, condition_on_slit, discrete_outcomes, no_signaling_check
from eprlab.oracle import conditioned_mixture, epr_covariance
from eprlab.protocols import (
    M1,
    M2_UNCONDITIONAL,
    M3,
    DiscriminatorConfig,
    GridSpec,
    SignalingConfig,
    run_discriminator,
    run_signaling_test,
)
from eprlab.states import DiscreteEntangledSpec, EPRParams, discrete_entangled, epr_pair, gaussian_packet

CANON = GridSpec(2048, -51.2, 51.2)
NARROW = EPRParams(0.1, 10.0)
WIDE = EPRParams(0.5, 10.0)


def _random_states(count=100, seed=2024):
    """Superpositions of one to three resolved Gaussian packets on the n = 1024 grid."""
    g = make_grid(1024, -40.0, 40.0)
    r = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = np.zeros(g.n, complex)
        for _ in range(r.integers(1, 4)):
            packet = gaussian_packet(g, r.uniform(-10, 10), r.uniform(-3, 3), r.uniform(0.5, 3.0))
            v += (r.standard_normal() + 1j * r.standard_normal()) * packet.values
        out.append(Field1D(g, v).normalized())
    return out


# ---------------------------------------------------------------------- 1


def criterion_1():
    states = _random_states()
    rt = max(
        np.linalg.norm(fourier_transform(fourier_transform(f, MOMENTUM), POSITION).values - f.values)
        / np.linalg.norm(f.values)
        for f in states
    )
    parseval = max(abs(f.to_momentum().norm() - f.norm()) for f in states)
    g = make_grid(1024, -40.0, 40.0)
    moment_err = 0.0
    for x0, p0, s in [(0, 0, 1), (-3.2, 1.1, 0.5), (5, -2.5, 2), (1.7, 0.3, 3)]:
        d = moments(gaussian_packet(g, x0, p0, s))
        moment_err = max(
            moment_err,
            abs(d.mean_x - x0),
            abs(d.mean_p - p0),
            abs(d.std_x - s) / s,
            abs(d.std_p - 0.5 / s) / (0.5 / s),
        )
    products = [moments(f).product for f in states]
    ok = rt <= 1e-12 and parseval <= 1e-12 and moment_err <= 1e-8 and min(products) >= 0.5 * (1 - 1e-6)
    return ok, (
        f"round trip {rt:.1e}, Parseval {parseval:.1e}, Gaussian moments {moment_err:.1e}, "
        f"min uncertainty product {min(products):.6f} over {len(products)} states"
    )


# ---------------------------------------------------------------------- 2


def criterion_2():
    states = _random_states(20, seed=7)
    norm_drift = l1_drift = 0.0
    for f in states:
        rho_p0 = f.to_momentum().density()
        for t in (0.5, 1.0, 2.0):
            out = free_evolve(f, t)
            norm_drift = max(norm_drift, abs(out.norm() - f.norm()))
            l1_drift = max(l1_drift, np.sum(np.abs(out.to_momentum().density() - rho_p0)) * f.grid.dp)
    g = make_grid(1024, -40.0, 40.0)
    spread_err = max(
        abs(moments(free_evolve(gaussian_packet(g, 0.0, 0.0, s0), t)).std_x / spread_law(s0, t) - 1)
        for s0 in (0.5, 1.0, 2.0)
        for t in (0.5, 1.0, 2.0)
    )
    gc = CANON.build(PhysicalConstants())
    psi = epr_pair((gc, gc), NARROW)

    def var_psum(f):
        _, c = covariance_matrix(f)
        return c[1, 1] + c[3, 3] + 2 * c[1, 3]

    v0 = var_psum(psi)
    vp_drift = max(abs(var_psum(free_evolve(psi, t)) - v0) / v0 for t in (0.5, 1.0))
    ok = norm_drift <= 1e-12 and l1_drift <= 1e-12 and spread_err <= 1e-3 and vp_drift <= 1e-10
    return ok, (
        f"norm drift {norm_drift:.1e}, momentum L1 drift {l1_drift:.1e}, "
        f"spread vs law {spread_err:.1e}, Var(p1+p2) drift {vp_drift:.1e}"
    )


# ---------------------------------------------------------------------- 3


def _oracle_rows(params, slits, delays=(0.0, 0.5, 1.0)):
    g = CANON.build(PhysicalConstants())
    psi = epr_pair((g, g), params)
    state = epr_covariance(params)
    rows = []
    _, cov = covariance_matrix(psi)
    scale = np.sqrt(np.outer(np.diag(state.cov), np.diag(state.cov)))
    rows.append(("unconditioned covariance", float(np.max(np.abs(cov - state.cov) / scale)), 1e-3))
    for slit in slits:
        ens = condition_on_slit(psi, slit)
        tag = f"({params.sigma_plus:g},{params.sigma_minus:g}) {slit.kind} a={slit.width:g} at {slit.center:g}"
        o0 = conditioned_mixture(state, slit)
        rows.append((f"{tag} p_det", abs(ens.detection_probability / o0.detection_probability - 1), 5e-3))
        for tau in delays:
            d = ens.evolve(tau).dispersion()
            o = conditioned_mixture(state, slit, tau)
            rows.append((f"{tag} tau={tau:g} mean", abs(d.mean_x - o.mean_x2) / max(abs(o.mean_x2), o.std_x2), 5e-3))
            rows.append((f"{tag} tau={tau:g} std_x", abs(d.std_x / o.std_x2 - 1), 5e-3))
            rows.append((f"{tag} tau={tau:g} std_p", abs(d.std_p / o.std_p2 - 1), 5e-3))
    return rows


def criterion_3():
    slits = [Aperture(TOPHAT, 2.0, 1.0), Aperture(TOPHAT, 0.0, 0.2)]
    # the 4-cell slit is paired with the wide source only; with sigma_plus = 0.1 its
    # within-slit readout spread dominates and is sampled at 4 points (test_protocols covers that bias)
    rows = _oracle_rows(NARROW, [slits[0], Aperture(TOPHAT, 0.0, 1.0)]) + _oracle_rows(WIDE, slits)
    failed = [r for r in rows if not r[1] <= r[2]]
    worst = max(rows, key=lambda r: r[1] / r[2])
    # frozen oracle values, recomputed independently in test_oracle.py
    m = conditioned_mixture(epr_covariance(NARROW), slits[0])
    ks = conditioned_mixture(epr_covariance(WIDE), slits[1]).std_p2 / (1 / 0.2)
    frozen_ok = (
        abs(m.mean_x2 + 1.9929449620414) < 1e-9
        and abs(m.std_x2 - 0.30522362544) < 1e-9
        and abs(ks - 0.200249843945) < 1e-9
    )
    ok = not failed and frozen_ok
    return ok, (
        f"{len(rows) - len(failed)}/{len(rows)} quantities within tolerance, worst '{worst[0]}' "
        f"{worst[1]:.1e} (tol {worst[2]:.0e}); mean {m.mean_x2:.5f}, std {m.std_x2:.5f}, Kim-Shih ratio {ks:.5f}"
    )


# ---------------------------------------------------------------------- 4


def criterion_4():
    g = CANON.build(PhysicalConstants())
    psi = epr_pair((g, g), NARROW)
    apertures = [
        Aperture(TOPHAT, 0.0, 1.0),
        Aperture(TOPHAT, 2.0, 1.0),
        Aperture(TOPHAT, 0.0, 0.2),
        Aperture(GAUSSIAN, -1.0, 0.5),
        Aperture(GAUSSIAN, 3.0, 2.0),
    ]
    worst = max(no_signaling_check(psi, ap, t) for ap in apertures for t in (0.0, 1.0))
    rep = run_discriminator(DiscriminatorConfig(grid=CANON, delays=(0.0, 0.5, 1.0)))
    sp = [rep.row(M3, t)["std_p"] for t in (0.0, 0.5, 1.0)]
    m3_drift = (max(sp) - min(sp)) / sp[0]
    ok = worst <= 1e-8 and m3_drift <= 1e-10
    return ok, f"max L1 over 5 apertures x 2 delays {worst:.1e}, M3 std_p drift {m3_drift:.1e}"


# ---------------------------------------------------------------------- 5


def criterion_5():
    from eprlab.states import peak_probabilities

    g = make_grid(1024, -40.0, 40.0)
    trials = 40000
    details, ok = [], True
    for n in (2, 4, 5):
        spec = DiscreteEntangledSpec(n, 4.0, 0.3)
        probs = peak_probabilities(discrete_entangled((g, g), spec), spec)
        freq = np.bincount(discrete_outcomes(probs, 0, trials, stream=n), minlength=n) / trials
        band = 3 * np.sqrt((1 / n) * (1 - 1 / n) / trials)
        dev = np.max(np.abs(freq - 1 / n))
        ok &= bool(dev <= band)
        details.append(f"N={n} max|f-1/N|={dev:.4f} (band {band:.4f})")
    return ok, ", ".join(details)


# ---------------------------------------------------------------------- 6


def criterion_6():
    slit = Aperture(TOPHAT, 0.0, 1.0)
    rep = run_discriminator(DiscriminatorConfig(grid=CANON, slit=slit, delays=(0.0, 0.5, 1.0)))
    spread_err = max(abs(rep.row(M1, t)["std_x"] / spread_law(slit.width / 2, t) - 1) for t in (0.5, 1.0))
    control = run_discriminator(DiscriminatorConfig(epr=EPRParams(2.0, 2.0), grid=CANON, delays=(0.0, 1.0)))
    fid = min(f["min_component_fidelity"] for f in control.fidelity)
    ok = spread_err <= 5e-3 and fid >= 1 - 1e-9
    return ok, f"M1 spread vs law {spread_err:.1e}, separable-source M2/M3 fidelity {fid:.12f}"


# ---------------------------------------------------------------------- 7


def criterion_7():
    m2 = run_signaling_test(SignalingConfig(model=M2_UNCONDITIONAL, blocks=50, pairs_per_block=2000, delay=1.0))
    m2_ok = abs(m2.accuracy - 0.5) <= 3 * m2.binomial_se
    # 2000 pairs at delay 1 gives a predicted accuracy of only ~0.72 (README, "Signaling test")
    m1 = run_signaling_test(SignalingConfig(model=M1, blocks=50, pairs_per_block=10000, delay=1.5))
    m1_ok = m1.accuracy >= m1.accuracy_floor
    return m2_ok and m1_ok, (
        f"M2-unconditional accuracy {m2.accuracy:.2f} (0.5 +/- {3 * m2.binomial_se:.3f}); "
        f"M1 accuracy {m1.accuracy:.2f} vs floor {m1.accuracy_floor:.3f} "
        f"(predicted {m1.predicted_accuracy:.3f}, p={m1.p_value:.1e})"
    )


# ---------------------------------------------------------------------- 8


def criterion_8():
    lhv = bell.lhv_max_chsh()
    q = bell.quantum_chsh_max()
    ok = lhv == 2 and abs(q - 2 * np.sqrt(2)) <= 1e-12
    return ok, f"lhv max {lhv}, quantum {q:.15f} (2*sqrt(2) = {2 * np.sqrt(2):.15f})"


# ---------------------------------------------------------------------- 9

_TIMESTAMP = re.compile(r'"timestamp": "[^"]*"')


def _masked_reports(sub, config, workers_list):
    texts = []
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "cfg.json"
        cfg.write_text(json.dumps(config))
        for i, w in enumerate(workers_list):
            out = Path(tmp) / f"run{i}"
            code = main([sub, "--config", str(cfg), "--out", str(out), "--seed", "17", "--workers", str(w)])
            if code != 0:
                raise RuntimeError(f"{sub} exited {code}")
            texts.append(_TIMESTAMP.sub('"timestamp": "<masked>"', (out / "report.json").read_text()))
    return texts


def criterion_9():
    base = {"grid": {"n": 2048, "x_min": -51.2, "x_max": 51.2}}
    checks = {
        "signal-test": _masked_reports("signal-test", base, [1, 1, 4]),
        "discriminate": _masked_reports("discriminate", base, [1, 1, 4]),
        "state": _masked_reports("state", {"state": {"kind": "discrete"}}, [1, 1, 4]),
    }
    ok = all(len(set(t)) == 1 for t in checks.values())
    return ok, ", ".join(f"{k}: {len(set(t))} distinct of {len(t)} runs" for k, t in checks.items())


CRITERIA = {
    1: ("numerics", criterion_1),
    2: ("dynamics", criterion_2),
    3: ("oracle equivalence", criterion_3),
    4: ("no-signaling", criterion_4),
    5: ("discrete reduction", criterion_5),
    6: ("discriminator", criterion_6),
    7: ("signaling protocol", criterion_7),
    8: ("Bell", criterion_8),
    9: ("reproducibility", criterion_9),
}


def _line(num, ok, detail):
    name = CRITERIA[num][0]
    return f"{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, acceptance_log):
    ok, detail = CRITERIA[num][1]()
    acceptance_log(_line(num, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num][1]()
        print(_line(num, ok, detail), flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)

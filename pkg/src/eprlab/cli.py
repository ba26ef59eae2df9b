"""Command line entry point.

Usage::

    eprlab SUBCOMMAND [--config PATH] [--seed N] [--out DIR] [--workers N]

Every run writes ``report.json`` (resolved config, version, seed, results) and
one CSV per density or table into ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bell
from .config import ConfigError, RunConfig, parse_config, validate
from .dynamics import free_evolve
from .grid import covariance_matrix, dispersion_from_densities, marginal, momentum_marginal
from .measurement import condition_on_slit, discrete_outcomes, no_signaling_check
from .oracle import conditioned_mixture, epr_covariance, evolve_covariance
from .protocols import (
    DiscriminatorConfig,
    KimShihConfig,
    PersistenceConfig,
    SignalingConfig,
    run_correlation_persistence,
    run_discriminator,
    run_kim_shih,
    run_signaling_test,
)
from .states import discrete_entangled, epr_pair, peak_probabilities

SUBCOMMANDS = ("state", "evolve", "discriminate", "signal-test", "kim-shih", "persistence", "bell", "oracle-check")


def _num(v: float) -> str:
    return f"{v:.17g}"


def write_density_csv(path: Path, coords: np.ndarray, density: np.ndarray) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coordinate", "density"])
        for x, d in zip(coords, density):
            w.writerow([_num(float(x)), _num(float(d))])


def write_table_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    cols = list(rows[0].keys())
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r[c] is None else _num(r[c]) if isinstance(r[c], float) else r[c] for c in cols])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Output:
    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.files: list[str] = []

    def density(self, name: str, coords, density):
        self.dir.mkdir(parents=True, exist_ok=True)
        write_density_csv(self.dir / f"{name}.csv", coords, density)
        self.files.append(f"{name}.csv")

    def table(self, name: str, rows: list[dict]):
        self.dir.mkdir(parents=True, exist_ok=True)
        write_table_csv(self.dir / f"{name}.csv", rows)
        self.files.append(f"{name}.csv")


# ------------------------------------------------------------------ subcommands


def _require_epr(cfg: RunConfig, sub: str):
    if cfg.state.kind != "epr":
        raise ConfigError(f"state.kind: {sub} needs the 'epr' source")


def cmd_state(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    g = cfg.grid_spec.build(cfg.physical_constants)
    if cfg.state.kind == "epr":
        psi = epr_pair((g, g), cfg.epr)
    else:
        psi = discrete_entangled((g, g), cfg.discrete)
    result = {"norm": psi.norm()}
    for axis in (1, 2):
        rho_x = marginal(psi, axis)
        rho_p = momentum_marginal(psi, axis)
        result[f"particle{axis}"] = dispersion_from_densities(g, rho_x, rho_p).as_dict()
        out.density(f"state_marginal_x{axis}", g.x, rho_x)
    if cfg.state.kind == "epr":
        state = epr_covariance(cfg.epr, cfg.physical_constants)
        result["oracle_marginal_std_x"] = float(np.sqrt(state.cov[0, 0]))
        result["correlation_k"] = cfg.epr.correlation
    else:
        probs = peak_probabilities(psi, cfg.discrete)
        outcomes = discrete_outcomes(probs, cfg.seed, cfg.protocol.trials)
        freqs = np.bincount(outcomes, minlength=len(probs)) / cfg.protocol.trials
        result["peak_probabilities"] = probs.tolist()
        result["reduction_trials"] = cfg.protocol.trials
        result["reduction_frequencies"] = freqs.tolist()
    return result, True


def cmd_evolve(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    g = cfg.grid_spec.build(cfg.physical_constants)
    psi = epr_pair((g, g), cfg.epr) if cfg.state.kind == "epr" else discrete_entangled((g, g), cfg.discrete)
    rows = []
    for tau in cfg.times.delays:
        f = free_evolve(psi, tau)
        mean, cov = covariance_matrix(f)
        d = dispersion_from_densities(g, marginal(f, 2), momentum_marginal(f, 2))
        rows.append(
            {
                "t": tau,
                "norm": f.norm(),
                "std_x1": float(np.sqrt(cov[0, 0])),
                "std_x2": d.std_x,
                "std_p2": d.std_p,
                "var_p1_plus_p2": float(cov[1, 1] + cov[3, 3] + 2 * cov[1, 3]),
                "var_x1_plus_x2": float(cov[0, 0] + cov[2, 2] + 2 * cov[0, 2]),
            }
        )
        out.density(f"evolve_t{tau:g}_x2", g.x, marginal(f, 2))
    out.table("evolve", rows)
    return {"rows": rows}, True


def cmd_discriminate(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    _require_epr(cfg, "discriminate")
    rep = run_discriminator(
        DiscriminatorConfig(
            epr=cfg.epr,
            slit=cfg.slit,
            measurement_time=cfg.times.measurement_time,
            delays=tuple(cfg.times.delays),
            geometry=cfg.paraxial,
            grid=cfg.grid_spec,
            constants=cfg.physical_constants,
            seed=cfg.seed,
            workers=cfg.workers,
        )
    )
    for name, (coords, rho) in rep.densities.items():
        out.density(name, coords, rho)
    out.table("discriminator", rep.rows)
    return rep.as_dict(), True


def cmd_signal_test(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    _require_epr(cfg, "signal-test")
    p = cfg.protocol
    rep = run_signaling_test(
        SignalingConfig(
            epr=cfg.epr,
            slit_high=cfg.slit_high,
            slit_low=cfg.slit_low,
            blocks=p.blocks,
            pairs_per_block=p.pairs_per_block,
            delay=p.delay,
            model=p.model,
            grid=cfg.grid_spec,
            constants=cfg.physical_constants,
            seed=cfg.seed,
            workers=cfg.workers,
        )
    )
    d = rep.as_dict()
    out.table("signal_blocks", d["blocks"])
    return d, True


def cmd_kim_shih(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    _require_epr(cfg, "kim-shih")
    rep = run_kim_shih(
        KimShihConfig(
            epr=cfg.epr,
            slit=cfg.slit,
            delay=cfg.protocol.delay,
            grid=cfg.grid_spec,
            constants=cfg.physical_constants,
        )
    )
    return rep.as_dict(), True


def cmd_persistence(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    _require_epr(cfg, "persistence")
    rows = run_correlation_persistence(
        PersistenceConfig(
            epr=cfg.epr,
            slit=cfg.slit,
            measurement_time=cfg.times.measurement_time,
            delays=tuple(cfg.times.delays),
            grid=cfg.grid_spec,
            constants=cfg.physical_constants,
            workers=cfg.workers,
        )
    )
    out.table("persistence", rows)
    return {"rows": rows}, True


def cmd_bell(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    rows = bell.chsh_table()
    out.table("chsh", [{k: (str(v) if isinstance(v, list) else v) for k, v in r.items()} for r in rows[:-1]])
    return {
        "strategies": rows[:-1],
        "lhv_max_chsh": bell.lhv_max_chsh(),
        "quantum_chsh": bell.quantum_chsh(),
        "quantum_chsh_max": bell.quantum_chsh_max(),
        "tsirelson": 2 * np.sqrt(2),
    }, True


def oracle_check_rows(cfg: RunConfig) -> list[dict]:
    """Lattice results against the closed-form Gaussian oracle for the configured source and slit.

    ``deviation`` is ``|grid - oracle| / scale`` where ``scale`` is the oracle value
    itself, or the matching standard deviation for a mean.
    """
    c = cfg.physical_constants
    g = cfg.grid_spec.build(c)
    psi = epr_pair((g, g), cfg.epr)
    state = epr_covariance(cfg.epr, c)
    rows = []

    def add(quantity, grid_value, oracle_value, tolerance, scale=None):
        scale = abs(oracle_value) if scale is None else scale
        dev = abs(grid_value - oracle_value) / scale
        rows.append(
            {
                "quantity": quantity,
                "grid": float(grid_value),
                "oracle": float(oracle_value),
                "deviation": float(dev),
                "tolerance": tolerance,
                "pass": bool(dev <= tolerance),
            }
        )

    _, cov = covariance_matrix(psi)
    add("var_x2", cov[2, 2], state.cov[2, 2], 1e-3)
    add("cov_x1_x2", cov[0, 2], state.cov[0, 2], 1e-3)
    add("var_p2", cov[3, 3], state.cov[3, 3], 1e-3)
    add("cov_p1_p2", cov[1, 3], state.cov[1, 3], 1e-3)

    psi_tm = free_evolve(psi, cfg.times.measurement_time) if cfg.times.measurement_time > 0 else psi
    state_tm = evolve_covariance(state, cfg.times.measurement_time, c.mass)
    ens = condition_on_slit(psi_tm, cfg.slit)
    for tau in cfg.times.delays:
        o = conditioned_mixture(state_tm, cfg.slit, tau, c.mass)
        d = ens.evolve(tau).dispersion()
        add(f"cond_mean_x2_tau{tau:g}", d.mean_x, o.mean_x2, 5e-3, scale=max(abs(o.mean_x2), o.std_x2))
        add(f"cond_std_x2_tau{tau:g}", d.std_x, o.std_x2, 5e-3)
        add(f"cond_std_p2_tau{tau:g}", d.std_p, o.std_p2, 5e-3)
    o0 = conditioned_mixture(state_tm, cfg.slit, 0.0, c.mass)
    add("detection_probability", ens.detection_probability, o0.detection_probability, 5e-3)
    l1 = no_signaling_check(psi, cfg.slit)
    rows.append(
        {"quantity": "no_signaling_l1", "grid": l1, "oracle": 0.0, "deviation": l1, "tolerance": 1e-8, "pass": l1 <= 1e-8}
    )
    return rows


def cmd_oracle_check(cfg: RunConfig, out: _Output) -> tuple[dict, bool]:
    _require_epr(cfg, "oracle-check")
    rows = oracle_check_rows(cfg)
    out.table("oracle_check", rows)
    ok = all(r["pass"] for r in rows)
    for r in rows:
        flag = "ok  " if r["pass"] else "FAIL"
        print(f"{flag} {r['quantity']:<28} grid={r['grid']:.10g} oracle={r['oracle']:.10g} dev={r['deviation']:.2e}")
    return {"rows": rows, "all_pass": ok}, ok


COMMANDS = {
    "state": cmd_state,
    "evolve": cmd_evolve,
    "discriminate": cmd_discriminate,
    "signal-test": cmd_signal_test,
    "kim-shih": cmd_kim_shih,
    "persistence": cmd_persistence,
    "bell": cmd_bell,
    "oracle-check": cmd_oracle_check,
}


def dispatch(cfg: RunConfig, subcommand: str, out_dir: Path) -> int:
    if subcommand not in COMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out = _Output(Path(out_dir))
    results, ok = COMMANDS[subcommand](cfg, out)
    # thread count is an execution detail; keep it out so reports compare across worker counts
    config = {k: v for k, v in cfg.as_dict().items() if k != "workers"}
    report = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": cfg.seed,
        "config": config,
        "results": results,
        "files": out.files,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    out.dir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False)
    (out.dir / "report.json").write_text(text + "\n", encoding="utf-8")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eprlab", description="EPR slit experiments on a spectral grid")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", type=Path, help="JSON configuration document")
    ap.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--workers", type=int, help="worker threads (overrides the config)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        validate(cfg)
        return dispatch(cfg, args.subcommand, args.out)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"eprlab {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``oscchain <subcommand> --config PATH``.

Exit codes: 0 success, 2 invalid input, 3 numerical guard (positivity,
spectral gap, resonance), 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import acceptance
from . import config as cfgmod
from .errors import ChainError, ConfigError, NumericalGuard, ValidationError
from .force import check_gap, synthesize, synthesize_batch
from .lattice import dispersion_table
from .output import Emitter
from .simulator import SimConfig, decompose_epsilon, simulate, simulate_ensemble, stationary_trajectory
from .stationary import (
    energy_limit_alpha,
    predicted_decay_rate,
    stationary_covariance,
    transient_mean_energy,
    variance_decay_fit,
)
from .stats import ensemble_mean, ks_distance, sqrt_t_decay_statistic, variance_profile

log = logging.getLogger("oscchain")

EXIT_OK, EXIT_VALIDATION, EXIT_GUARD, EXIT_ACCEPTANCE = 0, 2, 3, 4


def builtin_configs():
    return sorted(p.name[:-5] for p in resources.files("oscchain").joinpath("configs").iterdir() if p.name.endswith(".toml"))


def _resolve_config(arg):
    if arg is None:
        return None
    path = Path(arg)
    if not path.exists():
        builtin = resources.files("oscchain").joinpath("configs", f"{arg}.toml")
        if builtin.is_file():
            return cfgmod.validate(cfgmod.tomllib.loads(builtin.read_text()))
        raise ConfigError(f"config {arg!r} is neither a file nor one of {builtin_configs()}")
    return cfgmod.load(path)


class Run:
    """Resolved config plus the emitter that every command writes through."""

    def __init__(self, cfg, seeds):
        self.cfg = cfg
        self.hash = cfgmod.config_hash(cfg)
        self.out = Emitter(cfg["output"]["dir"], self.hash, seeds)
        self.out.json("config.json", {"config": cfg})


def _seed_label(cfg, replicas=None):
    if replicas is None:
        return [str(cfg["seed"])]
    return [f"{cfg['seed']}:{r}" for r in range(replicas)] if replicas <= 8 else [f"{cfg['seed']}:0..{replicas - 1}"]


def cmd_dispersion(cfg, args):
    run = Run(cfg, _seed_label(cfg))
    kernel = cfgmod.kernel_of(cfg)
    try:
        sset = kernel.spectrum
    except NumericalGuard as exc:
        run.out.json("spectral_set.json", {"error": str(exc), "lambda": getattr(exc, "lam", None)})
        raise
    lam, w2 = dispersion_table(kernel, 2048)
    run.out.csv("dispersion.csv", ["lambda", "omega2"], zip(lam, w2))
    run.out.json("spectral_set.json", sset.to_json())
    return EXIT_OK


def cmd_gap_check(cfg, args):
    run = Run(cfg, _seed_label(cfg))
    kernel, measure = cfgmod.kernel_of(cfg), cfgmod.measure_of(cfg)
    rep = check_gap(measure, kernel.spectrum)
    run.out.json("gap.json", {**rep.to_json(), "root_band": list(kernel.spectrum.root_band)})
    print(f"gap margin {rep.margin:.6g}: {'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_GUARD


def cmd_alpha(cfg, args):
    run = Run(cfg, _seed_label(cfg))
    kernel, measure = cfgmod.kernel_of(cfg), cfgmod.measure_of(cfg)
    margin = check_gap(measure, kernel.spectrum).margin
    lim = energy_limit_alpha(kernel, measure, cfg["analysis"]["n_lambda"])
    run.out.json("alpha.json", {**lim.to_json(), "margin": margin})
    print(f"alpha = {lim.alpha:.17g} (error estimate {lim.error_estimate:.3g})")
    return EXIT_OK


def _window(cfg):
    lo, hi = cfg["analysis"]["window"]
    if hi < lo:
        raise ConfigError("analysis.window must be [lo, hi] with lo <= hi")
    return lo, hi


def cmd_covariance(cfg, args):
    run = Run(cfg, _seed_label(cfg))
    kernel, measure = cfgmod.kernel_of(cfg), cfgmod.measure_of(cfg)
    lo, hi = _window(cfg)
    cov = stationary_covariance(kernel, measure, 0, (lo, hi))
    rows = ((int(k), int(j), cov.cqq[a, b], cov.cpp[a, b]) for a, k in enumerate(cov.sites) for b, j in enumerate(cov.sites))
    run.out.csv("covariance.csv", ["k", "j", "cqq", "cpp"], rows)
    pred = predicted_decay_rate(kernel, measure)
    try:
        est = variance_decay_fit(cov, predicted_r=pred).to_json()
    except ValidationError as exc:
        # e.g. uncoupled chains: every off-site variance vanishes
        est = {"r": 0.0 if kernel.K == 0 else None, "c1": None, "c2": None, "predicted_r": pred, "note": str(exc)}
    run.out.json("decay.json", est)
    return EXIT_OK


def cmd_simulate(cfg, args):
    sim = cfg["simulation"]
    kernel, measure = cfgmod.kernel_of(cfg), cfgmod.measure_of(cfg)
    R = sim["replicas"]
    run = Run(cfg, _seed_label(cfg, R))
    sc = cfgmod.sim_config_of(cfg)
    seed = cfg["seed"]
    forcing = synthesize_batch(measure, seed, R, sim["synthesis"], sim["n_density_terms"])
    lo, hi = _window(cfg)
    rel = np.arange(lo, hi + 1)
    sites = (sc.site + rel) % sc.N
    ens = simulate_ensemble(sc, kernel, forcing, sites=sites, workers=args.workers)

    pred_e = transient_mean_energy(kernel, measure, sc.times)
    rows = []
    for i, t in enumerate(sc.times):
        m, s = ensemble_mean(ens.energy[:, i])
        rows.append((t, m, s, pred_e[i]))
    run.out.csv("energy_trace.csv", ["t", "mean_H", "stderr_H", "transient_prediction_zero_ic"], rows)

    cov = stationary_covariance(kernel, measure, 0, (lo, hi))
    prof = variance_profile(ens.q[:, -1, :], ens.p[:, -1, :], rel)
    run.out.csv(
        "variance_profile.csv",
        ["k", "var_q", "stderr_q", "var_p", "stderr_p", "prediction_q", "prediction_p"],
        prof.csv_rows(cov.var_q, cov.var_p),
    )

    i0 = int(np.flatnonzero(rel == 0)[0]) if lo <= 0 <= hi else None
    ks = {}
    if i0 is not None and R >= 50:
        ks = ks_distance(ens.q[:, -1, i0], float(cov.var_q[i0])).to_json()
        ks["t"] = float(sc.times[-1])
    run.out.json("ks.json", ks)

    t_min, t_max, n_eps = sim["epsilon_times"]
    eps_times = tuple(np.arange(float(t_min), float(t_max) + 0.5, 1.0))
    eps_cfg = SimConfig(N=int(n_eps), T=eps_times[-1], site=0, sample_times=eps_times)
    real = synthesize(measure, seed, sim["synthesis"], sim["n_density_terms"], replica=0)
    eps = decompose_epsilon(simulate(eps_cfg, kernel, real), stationary_trajectory(kernel, real, eps_cfg))
    full = sqrt_t_decay_statistic(eps.times, eps.q, t_min, t_max)
    head = sqrt_t_decay_statistic(eps.times, eps.q, t_min, min(t_max, 5 * t_min))
    run.out.json(
        "epsilon_stat.json",
        {"N": int(n_eps), "t_min": t_min, "t_max": t_max, "statistic": full.max, "statistic_head": head.max, "ratio": full.max / head.max},
    )
    alpha = energy_limit_alpha(kernel, measure).alpha
    m, s = ensemble_mean(ens.energy[:, -1])
    run.out.json(
        "summary.json",
        {"replicas": R, "T": sc.T, "alpha": alpha, "mean_energy_T": m, "stderr_energy_T": s, "backend": _backend()},
    )
    print(f"mean energy at T={sc.T:g}: {m:.6g} +- {s:.2g} (alpha {alpha:.6g})")
    return EXIT_OK


def _backend():
    from ._accel import backend_name

    return backend_name()


def cmd_verify(cfg, args):
    seed = cfg["seed"] if cfg else (args.seed or 0)
    out = Path(args.out or (cfg["output"]["dir"] if cfg else "out"))
    results = acceptance.run_all(seed=seed, only=args.only, echo=print)
    ok = all(r.passed for r in results)
    em = Emitter(out, cfgmod.config_hash(cfg) if cfg else "builtin", [str(seed)])
    em.json("verify.json", {"pass": ok, "criteria": [r.to_json() for r in results]})
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


COMMANDS = {
    "dispersion": cmd_dispersion,
    "gap-check": cmd_gap_check,
    "alpha": cmd_alpha,
    "covariance": cmd_covariance,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="oscchain", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML/JSON file or builtin name (" + ", ".join(builtin_configs()) + ")")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, help="top-level seed (overrides config)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = _resolve_config(args.config)
        if cfg is None and args.command != "verify":
            raise ConfigError("--config is required")
        if cfg is not None:
            if args.seed is not None:
                cfg["seed"] = args.seed
            if args.out is not None:
                cfg["output"]["dir"] = args.out
            cfg = cfgmod.validate(cfg)
        return COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalGuard as exc:
        print(f"numerical guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ChainError as exc:  # pragma: no cover - every error class is one of the two above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

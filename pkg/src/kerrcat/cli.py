"""Command-line entry point: single runs, parameter sweeps, kernel dumps and
oracle cross-checks, all emitting CSV bundles.

    kerrcat run <config.toml> [--out DIR]
    kerrcat sweep <config.toml> --axis epsilon=1,10,1000 [--axis s=0.5,1,2] ...
    kerrcat kernel <config.toml> [--out DIR]
    kerrcat oracle-check <config.toml> [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 numeric failure.  Every CSV
has a header row; floats carry 17 significant digits.  A bundle directory is
named by the configuration hash and contains a manifest with every resolved
default, so re-running from the manifest reproduces the bundle bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bath import BathSpec, CorrelationKernel, build_kernel, export_kernel_csv, regime_kernel
from .config import ExperimentConfig
from .dyson import export_rho_csv, reduced_cat_state
from .errors import ConfigError, KerrcatError
from .fock import StateVector, coherent_state
from .oracle import (discretize_bath, exact_evolve, kernel_from_discrete_bath,
                     write_comparison_csv)
from .phase_space import (export_marginal_csv, export_wigner_csv,
                          negativity_volume, wigner_from_parity)

SWEEP_AXES = {
    "epsilon": ("evolution.epsilon", float),
    "kappa_h": ("bath.hot.kappa", float),
    "kappa_c": ("bath.cold.kappa", float),
    "s": (None, float),          # sets both baths
    "theta": ("pipeline.theta", float),
    "regime": ("evolution.regime", str),
    "detector": ("pipeline.detector", str),
    "swap_baths": ("coupling.swap_baths", lambda v: v in ("true", "1", "yes", True)),
}


def _apply_axis(config: ExperimentConfig, key: str, value) -> ExperimentConfig:
    path, conv = SWEEP_AXES[key]
    value = conv(value)
    if key == "s":
        return config.replace(**{"bath.hot.s": value, "bath.cold.s": value})
    return config.replace(**{path: value})


def build_kernels_for(config: ExperimentConfig,
                      tau_max: float | None = None) -> dict[str, CorrelationKernel]:
    """Kernels for both baths under the configured regime, covering [0, eps]."""
    ev = config.data["evolution"]
    eps = float(ev["epsilon"]) if tau_max is None else tau_max
    tau_max = max(eps, 1.0)
    delta = float(config.data["coupling"]["delta"])
    kernels = {}
    for label in ("hot", "cold"):
        spec = config.bath_spec(label)
        spacing = float(ev["kernel_spacing"]) / spec.density.lambda_cut
        n_points = int(np.ceil(tau_max / spacing)) + 1
        if ev["regime"] == "full":
            kernels[label] = build_kernel(spec, tau_max, n_points)
        else:
            kernels[label] = regime_kernel(
                spec, ev["regime"], delta, tau_max, n_points,
                band_halfwidth=float(ev["resonance_band_halfwidth"]))
    return kernels


def run_experiment(config: ExperimentConfig, out_dir: Path,
                   kernels: dict[str, CorrelationKernel] | None = None) -> dict:
    """Execute one configuration and write its artifact bundle.

    Returns a summary dict (hash, negativity, detection probability, paths).
    """
    bundle = Path(out_dir) / config.hash()
    bundle.mkdir(parents=True, exist_ok=True)
    if kernels is None:
        kernels = build_kernels_for(config)

    eps = float(config.data["evolution"]["epsilon"])
    cat = reduced_cat_state(
        config.pipeline(), config.couplings(), kernels, eps,
        layout=config.layout(),
        n_time_nodes=int(config.data["evolution"]["n_time_nodes"]),
        rotation_frequencies=config.rotation_frequencies(),
        tol=float(config.data["evolution"]["tau_dyson"]),
    )
    cat = cat.with_metadata(config_hash=config.hash())
    grid = wigner_from_parity(cat, config.grid_spec())
    negativity = negativity_volume(grid)

    artifacts = config.data["output"]["artifacts"]
    written = []
    if "wigner" in artifacts:
        export_wigner_csv(grid, bundle / "wigner.csv")
        written.append("wigner.csv")
    if "marginal" in artifacts:
        export_marginal_csv(grid, bundle / "marginal.csv")
        written.append("marginal.csv")
    if "kernels" in artifacts:
        for label, kern in kernels.items():
            export_kernel_csv(kern, bundle / f"kernel_{label}.csv")
            written.append(f"kernel_{label}.csv")
    if "rho" in artifacts:
        export_rho_csv(cat, bundle / "rho_cat.csv")
        written.append("rho_cat.csv")
    summary = {
        "config_hash": config.hash(),
        "negativity": negativity,
        "detection_probability": cat.metadata["detection_probability"],
        "trace_defect": cat.metadata["trace_defect"],
        "order_estimate": cat.metadata["order_estimate"],
        "normalization_residual": grid.metadata["normalization_residual"],
    }
    if "negativity" in artifacts:
        with open(bundle / "negativity.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            keys = list(summary.keys())
            w.writerow(keys)
            w.writerow([summary[k] if isinstance(summary[k], str)
                        else f"{summary[k]:.17g}" for k in keys])
        written.append("negativity.csv")
    meta = {"artifacts_written": written, "package_version": __version__}
    meta.update({k: v for k, v in summary.items() if k != "config_hash"})
    (bundle / "manifest.toml").write_text(config.manifest_toml(meta))
    summary["bundle"] = str(bundle)
    return summary


def run_sweep(config: ExperimentConfig, axes: dict[str, list], out_dir: Path,
              threads: int = 1) -> list[dict]:
    """Cartesian product over the sweep axes; one bundle per grid point plus
    a consolidated index.csv (rows ordered by axis values, independent of
    the worker count)."""
    for key in axes:
        if key not in SWEEP_AXES:
            raise ConfigError(f"sweep axis {key!r} not supported "
                              f"(choose from {sorted(SWEEP_AXES)})")
        if not axes[key]:
            raise ConfigError(f"sweep axis {key!r} is empty")
    keys = sorted(axes)
    converted = {k: [SWEEP_AXES[k][1](v) for v in axes[k]] for k in keys}
    points = list(itertools.product(*(converted[k] for k in keys)))
    configs = []
    for values in points:
        cfg = config
        for key, val in zip(keys, values):
            cfg = _apply_axis(cfg, key, val)
        configs.append((values, cfg))

    # precompute kernels once per unique bath/regime/epsilon combination
    kcache: dict[str, dict[str, CorrelationKernel]] = {}
    korder = []
    for _, cfg in configs:
        kk = _kernel_cache_key(cfg)
        if kk not in kcache:
            kcache[kk] = None
            korder.append((kk, cfg))
    for kk, cfg in korder:
        kcache[kk] = build_kernels_for(cfg)

    def work(item):
        values, cfg = item
        summary = run_experiment(cfg, out_dir, kernels=kcache[_kernel_cache_key(cfg)])
        return values, summary

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, configs))
    else:
        results = [work(item) for item in configs]
    results.sort(key=lambda r: r[0])

    index_path = Path(out_dir) / "index.csv"
    with open(index_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_hash", *keys, "negativity", "detection_probability"])
        for values, summary in results:
            cells = [f"{v:.17g}" if isinstance(v, float) else str(v) for v in values]
            w.writerow([summary["config_hash"], *cells,
                        f"{summary['negativity']:.17g}",
                        f"{summary['detection_probability']:.17g}"])
    return [s for _, s in results]


def _kernel_cache_key(config: ExperimentConfig) -> str:
    d = config.data
    return json.dumps({"bath": d["bath"], "regime": d["evolution"]["regime"],
                       "eps": d["evolution"]["epsilon"],
                       "spacing": d["evolution"]["kernel_spacing"],
                       "band": d["evolution"]["resonance_band_halfwidth"],
                       "delta": d["coupling"]["delta"]}, sort_keys=True)


def run_kernel_dump(config: ExperimentConfig, out_dir: Path) -> dict:
    bundle = Path(out_dir) / config.hash()
    bundle.mkdir(parents=True, exist_ok=True)
    kernels = build_kernels_for(config)
    written = []
    for label, kern in kernels.items():
        export_kernel_csv(kern, bundle / f"kernel_{label}.csv")
        written.append(f"kernel_{label}.csv")
    (bundle / "manifest.toml").write_text(
        config.manifest_toml({"artifacts_written": written,
                              "package_version": __version__}))
    return {"config_hash": config.hash(), "bundle": str(bundle)}


def run_oracle_check(config: ExperimentConfig, out_dir: Path) -> dict:
    """Perturbative-vs-exact comparison on the configured oracle scenario."""
    bundle = Path(out_dir) / config.hash()
    bundle.mkdir(parents=True, exist_ok=True)
    o = config.data["oracle"]
    hot = config.bath_spec("hot")
    rows = []
    for j0 in o["j0_values"]:
        dens = hot.density.__class__(j0=float(j0), s=hot.density.s,
                                     sigma=hot.density.sigma,
                                     lambda_cut=hot.density.lambda_cut,
                                     nu_c=hot.density.nu_c)
        dbath = discretize_bath(dens, int(o["n_modes"]), float(o["omega_max"]),
                                kappa=np.inf, mode_dim=int(o["mode_dim"]))
        sys_state = coherent_state(complex(o["alpha"]), int(o["system_dim"]),
                                   tau_trunc=1e-6)
        exact, info = exact_evolve(sys_state, dbath, float(o["epsilon"]),
                                   system_frequency=float(o["delta"]),
                                   dt=float(o["dt"]), n_traj=int(o["n_traj"]),
                                   seed=int(config.data["output"]["seed"]))
        pert = _perturbative_single_mode(sys_state, dbath, hot, float(o["epsilon"]),
                                         float(o["delta"]))
        dist = float(np.linalg.norm(exact.matrix - pert.matrix))
        rows.append({"j0": float(j0), "epsilon": float(o["epsilon"]),
                     "frob_distance": dist, "mc_stderr": info["mc_stderr"]})
    write_comparison_csv(rows, bundle / "oracle_report.csv")
    (bundle / "manifest.toml").write_text(
        config.manifest_toml({"artifacts_written": ["oracle_report.csv"],
                              "package_version": __version__}))
    exponents = []
    for a, b in zip(rows[:-1], rows[1:]):
        if b["frob_distance"] > 0:
            exponents.append(np.log(a["frob_distance"] / b["frob_distance"])
                             / np.log(a["j0"] / b["j0"]))
    return {"config_hash": config.hash(), "bundle": str(bundle), "rows": rows,
            "exponents": exponents}


def _perturbative_single_mode(state: StateVector, dbath, spec: BathSpec,
                              eps: float, delta: float):
    from .dyson import CouplingSpec, second_order_propagate
    kern = kernel_from_discrete_bath(dbath, spec, max(eps, 1.0))
    label = state.layout.modes[0][0]
    couplings = CouplingSpec(entries=((label, spec.label, 1.0),),
                             mode_frequencies=((label, delta),))
    result = second_order_propagate(state.density(), couplings,
                                    {spec.label: kern}, eps)
    return result.rho


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kerrcat", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "kernel", "oracle-check"):
        sp = sub.add_parser(name)
        sp.add_argument("config", type=Path)
        sp.add_argument("--out", type=Path, default=Path("out"))
        sp.add_argument("--threads", type=int, default=1)
        if name == "sweep":
            sp.add_argument("--axis", action="append", default=[],
                            metavar="KEY=V1,V2,...")
    args = parser.parse_args(argv)

    try:
        config = ExperimentConfig.from_toml(args.config)
        if args.command == "run":
            summary = run_experiment(config, args.out)
            print(f"{summary['config_hash']}  negativity={summary['negativity']:.6g}  "
                  f"p_det={summary['detection_probability']:.6g}  -> {summary['bundle']}")
        elif args.command == "sweep":
            axes = {}
            for spec in args.axis:
                if "=" not in spec:
                    raise ConfigError(f"--axis expects KEY=V1,V2,..., got {spec!r}")
                key, _, vals = spec.partition("=")
                axes[key.strip()] = [v.strip() for v in vals.split(",") if v.strip()]
            if not axes:
                raise ConfigError("sweep requires at least one --axis")
            summaries = run_sweep(config, axes, args.out, threads=args.threads)
            print(f"{len(summaries)} bundles -> {args.out}/index.csv")
        elif args.command == "kernel":
            summary = run_kernel_dump(config, args.out)
            print(f"{summary['config_hash']}  -> {summary['bundle']}")
        else:
            summary = run_oracle_check(config, args.out)
            exps = ", ".join(f"{e:.3f}" for e in summary["exponents"])
            print(f"{summary['config_hash']}  scaling exponents: [{exps}]  "
                  f"-> {summary['bundle']}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KerrcatError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

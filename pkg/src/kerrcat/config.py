"""Experiment configuration: TOML parsing, validation, hashing, manifests.

All physical inputs are dimensionless (eps, delta, kappa, s, sigma, J0 and
cut-off ratios in units of the hot cut-off).  An optional [si] section takes
laboratory values (frequencies in Hz, temperatures in K) and derives the
dimensionless groups with hbar and kB; the derived values land in the
resolved configuration, so a manifest always round-trips without the [si]
section.  The configuration hash is taken over the canonical resolved
dictionary with sorted keys, so field order never matters.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import tomli
from scipy.constants import hbar, k as k_boltzmann

from .bath import BathSpec, SpectralDensity
from .dyson import CouplingSpec
from .errors import ConfigError
from .fock import ModeLayout, default_cat_dim
from .optics import PipelineConfig
from .phase_space import GridSpec

ARTIFACTS = ("wigner", "marginal", "kernels", "rho", "negativity")
REGIMES = ("full", "resonance", "high_frequency")

_DEFAULTS = {
    "pipeline": {
        "alpha": 1.0,
        "alpha_imag": 0.0,
        "theta": math.pi,
        "kerr_phase": math.pi,
        "detector": "D1",
    },
    "bath": {
        "hot": {"kappa": 0.45, "j0": 0.1, "s": 1.0, "sigma": 1.0,
                "lambda_cut": 1.0, "nu_c": 0.0},
        "cold": {"kappa": 0.9, "j0": 0.1, "s": 1.0, "sigma": 1.0,
                 "lambda_cut": 2.0, "nu_c": 0.0},
    },
    "coupling": {"delta": 0.01, "photon_frequency": 0.01, "r_ab": 1.0,
                 "swap_baths": False},
    "evolution": {"epsilon": 1.0, "regime": "full", "n_time_nodes": 64,
                  "tau_dyson": 1e-8, "kernel_spacing": 0.025,
                  "resonance_band_halfwidth": 0.1},
    "grid": {"n": 201, "extent": 0.0},
    "dims": {"a": 0, "b": 2, "c": 2},
    "output": {"artifacts": list(ARTIFACTS), "seed": 0},
    "oracle": {"alpha": 1.0, "system_dim": 10, "delta": 0.01, "n_modes": 3,
               "omega_max": 4.0, "mode_dim": 3, "epsilon": 1.0,
               "j0_values": [1e-2, 5e-3, 2.5e-3], "dt": 0.01, "n_traj": 64},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = {}
    for key, val in base.items():
        if key in override:
            ov = override[key]
            if isinstance(val, dict):
                if not isinstance(ov, dict):
                    raise ConfigError(f"{path}{key}: expected a table")
                out[key] = _merge(val, ov, f"{path}{key}.")
            else:
                out[key] = ov
        else:
            out[key] = val if not isinstance(val, dict) else _merge(val, {}, f"{path}{key}.")
    for key in override:
        if key not in base:
            raise ConfigError(f"{path}{key}: unknown configuration key")
    return out


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _apply_si(resolved: dict, si: dict) -> dict:
    """Derive dimensionless groups from SI inputs (Hz, K); in-place update."""
    known = {"omega_hz", "lambda_hot_hz", "lambda_cold_hz", "t_hot_k", "t_cold_k"}
    for key in si:
        if key not in known:
            raise ConfigError(f"si.{key}: unknown SI key")
    lam_h = si.get("lambda_hot_hz")
    _require(lam_h is not None and lam_h > 0, "si.lambda_hot_hz",
             "required and must be > 0 when [si] is present")
    lam_h_ang = 2.0 * math.pi * lam_h
    if "omega_hz" in si:
        _require(si["omega_hz"] > 0, "si.omega_hz", "must be > 0")
        delta = si["omega_hz"] / lam_h
        resolved["coupling"]["delta"] = delta
        resolved["coupling"]["photon_frequency"] = delta
    if "lambda_cold_hz" in si:
        _require(si["lambda_cold_hz"] > 0, "si.lambda_cold_hz", "must be > 0")
        resolved["bath"]["cold"]["lambda_cut"] = si["lambda_cold_hz"] / lam_h
    for key, bath in (("t_hot_k", "hot"), ("t_cold_k", "cold")):
        if key in si:
            _require(si[key] > 0, f"si.{key}", "must be > 0")
            resolved["bath"][bath]["kappa"] = hbar * lam_h_ang / (2.0 * k_boltzmann * si[key])
    return resolved


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment configuration (all defaults filled)."""

    data: dict

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        si = raw.pop("si", None)
        raw.pop("meta", None)  # manifests carry an informational block
        resolved = _merge(_DEFAULTS, raw)
        if si:
            resolved = _apply_si(resolved, si)
        cfg = cls(resolved)
        cfg.validate()
        return cfg

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomli.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from None
        return cls.from_dict(raw)

    def validate(self) -> None:
        d = self.data
        p = d["pipeline"]
        _require(0.0 <= p["theta"] < 2 * math.pi, "pipeline.theta", "must lie in [0, 2pi)")
        _require(0.0 <= p["kerr_phase"] < 2 * math.pi, "pipeline.kerr_phase",
                 "must lie in [0, 2pi)")
        _require(p["detector"] in ("D1", "D2"), "pipeline.detector", "must be D1 or D2")
        for lab in ("hot", "cold"):
            b = d["bath"][lab]
            _require(b["kappa"] > 0, f"bath.{lab}.kappa", "must be > 0")
            _require(b["j0"] >= 0, f"bath.{lab}.j0", "must be >= 0")
            _require(b["s"] > 0, f"bath.{lab}.s", "must be > 0")
            _require(b["sigma"] >= 1, f"bath.{lab}.sigma", "must be >= 1")
            _require(b["lambda_cut"] > 0, f"bath.{lab}.lambda_cut", "must be > 0")
            _require(b["nu_c"] >= 0, f"bath.{lab}.nu_c", "must be >= 0")
        c = d["coupling"]
        _require(c["delta"] > 0, "coupling.delta", "must be > 0")
        _require(c["photon_frequency"] > 0, "coupling.photon_frequency", "must be > 0")
        _require(c["r_ab"] >= 0, "coupling.r_ab", "must be >= 0")
        e = d["evolution"]
        _require(e["epsilon"] >= 0, "evolution.epsilon", "must be >= 0")
        _require(e["regime"] in REGIMES, "evolution.regime", f"must be one of {REGIMES}")
        _require(e["n_time_nodes"] >= 2, "evolution.n_time_nodes", "must be >= 2")
        _require(e["tau_dyson"] > 0, "evolution.tau_dyson", "must be > 0")
        _require(e["kernel_spacing"] > 0, "evolution.kernel_spacing", "must be > 0")
        _require(0 < e["resonance_band_halfwidth"], "evolution.resonance_band_halfwidth",
                 "must be > 0")
        _require(d["grid"]["n"] >= 2, "grid.n", "must be >= 2")
        _require(d["grid"]["extent"] >= 0, "grid.extent", "0 (auto) or > 0")
        for mode in ("a", "b", "c"):
            dim = d["dims"][mode]
            _require(dim == 0 or dim >= 2, f"dims.{mode}", "0 (auto) or >= 2")
        arts = d["output"]["artifacts"]
        _require(isinstance(arts, list) and len(arts) > 0, "output.artifacts",
                 "must be a non-empty list")
        for a in arts:
            _require(a in ARTIFACTS, "output.artifacts", f"unknown artifact {a!r}")
        o = d["oracle"]
        _require(o["n_modes"] >= 1, "oracle.n_modes", "must be >= 1")
        _require(o["omega_max"] > 0, "oracle.omega_max", "must be > 0")
        _require(len(o["j0_values"]) >= 1, "oracle.j0_values", "must be non-empty")

    # -- canonical form ----------------------------------------------------

    def canonical(self) -> dict:
        return json.loads(json.dumps(self.data, sort_keys=True))

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def replace(self, **updates) -> "ExperimentConfig":
        """New configuration with dotted-path overrides, e.g.
        replace(**{"evolution.epsilon": 10.0})."""
        data = json.loads(json.dumps(self.data))
        for path, value in updates.items():
            node = data
            parts = path.split(".")
            for part in parts[:-1]:
                node = node[part]
            if parts[-1] not in node:
                raise ConfigError(f"{path}: unknown configuration key")
            node[parts[-1]] = value
        cfg = ExperimentConfig(data)
        cfg.validate()
        return cfg

    # -- domain objects ----------------------------------------------------

    @property
    def alpha(self) -> complex:
        p = self.data["pipeline"]
        return complex(p["alpha"], p["alpha_imag"])

    def pipeline(self) -> PipelineConfig:
        p = self.data["pipeline"]
        return PipelineConfig(alpha=self.alpha, theta=float(p["theta"]),
                              kerr_phase=float(p["kerr_phase"]),
                              detector=p["detector"])

    def bath_spec(self, label: str) -> BathSpec:
        b = self.data["bath"][label]
        dens = SpectralDensity(j0=float(b["j0"]), s=float(b["s"]),
                               sigma=float(b["sigma"]),
                               lambda_cut=float(b["lambda_cut"]),
                               nu_c=float(b["nu_c"]))
        return BathSpec(kappa=float(b["kappa"]), density=dens, label=label)

    def layout(self) -> ModeLayout:
        dims = self.data["dims"]
        da = dims["a"] or default_cat_dim(self.alpha)
        return ModeLayout((("a", da), ("b", dims["b"] or 2), ("c", dims["c"] or 2)))

    def couplings(self) -> CouplingSpec:
        c = self.data["coupling"]
        spec = CouplingSpec.default(delta=float(c["delta"]), r_ab=float(c["r_ab"]),
                                    photon_frequency=float(c["photon_frequency"]),
                                    swap_baths=bool(c["swap_baths"]))
        if self.data["evolution"]["regime"] == "high_frequency":
            spec = spec.with_frequencies(0.0)
        return spec

    def rotation_frequencies(self) -> dict:
        c = self.data["coupling"]
        return {"a": float(c["delta"]), "b": float(c["photon_frequency"]),
                "c": float(c["photon_frequency"])}

    def grid_spec(self) -> GridSpec:
        g = self.data["grid"]
        extent = g["extent"] or (abs(self.alpha) + 5.0)
        return GridSpec(-extent, extent, int(g["n"]), -extent, extent, int(g["n"]))

    # -- manifest ----------------------------------------------------------

    def manifest_toml(self, extra_meta: dict | None = None) -> str:
        meta = {"config_hash": self.hash()}
        if extra_meta:
            meta.update(extra_meta)
        return _emit_toml({**self.data, "meta": meta})


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ConfigError(f"cannot serialize non-finite float {value}")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {type(value).__name__} to TOML")


def _emit_toml(data: dict) -> str:
    """Minimal deterministic TOML writer for the configuration schema."""
    lines: list[str] = []

    def emit(table: dict, prefix: str) -> None:
        scalars = {k: v for k, v in table.items() if not isinstance(v, dict)}
        tables = {k: v for k, v in table.items() if isinstance(v, dict)}
        if prefix and scalars:
            lines.append(f"[{prefix}]")
        for k, v in scalars.items():
            lines.append(f"{k} = {_toml_scalar(v)}")
        if scalars:
            lines.append("")
        for k, v in tables.items():
            emit(v, f"{prefix}.{k}" if prefix else k)

    emit(data, "")
    return "\n".join(lines).rstrip() + "\n"

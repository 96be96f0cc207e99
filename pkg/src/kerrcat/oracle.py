"""Exact brute-force evolution against small discretized baths.

A continuous spectral density is sampled on a midpoint frequency grid into a star
model, the joint system+bath state vector is propagated with the dense
matrix exponential of the full Hamiltonian (one scaled-and-squared
exponential per fixed step, reused across steps), and the bath is traced
out.  The result is rotated into the interaction picture so it compares
directly against the perturbative propagator.  Thermal initial conditions
are Monte-Carlo sampled from the per-mode Bose weights with a fixed seed
per trajectory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .bath import (BathSpec, CorrelationKernel, SpectralDensity,
                   spectral_density_value, thermal_occupation)
from .errors import DimensionCap, DomainError
from .fock import DensityOperator, StateVector, ladder_operators

#: default cap on joint state-vector entries
DIMENSION_CAP = 20_000

DEFAULT_STEP = 0.01


@dataclass(frozen=True)
class DiscreteBath:
    """Finite star-model bath: (frequency, coupling, truncation) per mode."""

    modes: tuple[tuple[float, float, int], ...]
    kappa: float = np.inf

    def __post_init__(self):
        modes = tuple((float(w), float(g), int(d)) for w, g, d in self.modes)
        for w, g, d in modes:
            if w <= 0:
                raise DomainError(f"bath mode frequency must be > 0, got {w}")
            if d < 2:
                raise DomainError(f"bath mode dim must be >= 2, got {d}")
        object.__setattr__(self, "modes", modes)

    @property
    def joint_dim(self) -> int:
        return int(np.prod([d for _, _, d in self.modes]))


def discretize_bath(density: SpectralDensity, n_modes: int, omega_max: float,
                    kappa: float = np.inf, mode_dim: int = 3) -> DiscreteBath:
    """Uniform midpoint sampling of J on (nu_c, omega_max).

    Couplings satisfy g_i^2 = J(omega_i) * dw, so sum_i g_i^2 approaches
    int J dw as n_modes grows.
    """
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    if omega_max <= density.nu_c:
        raise DomainError(
            f"omega_max={omega_max} must exceed nu_c={density.nu_c}"
        )
    dw = (omega_max - density.nu_c) / n_modes
    omegas = density.nu_c + dw * (np.arange(n_modes) + 0.5)
    gs = np.sqrt(spectral_density_value(density, omegas) * dw)
    return DiscreteBath(tuple((w, g, mode_dim) for w, g in zip(omegas, gs)),
                        kappa=kappa)


def bath_correlation_exact(bath: DiscreteBath, tau) -> np.ndarray | complex:
    """chi(tau) of the discrete bath: sum_i g_i^2 [(2N_i+1) cos - i sin]."""
    t = np.asarray(tau, dtype=float)
    chi = np.zeros(t.shape, complex)
    for w, g, _ in bath.modes:
        n = 0.0 if np.isinf(bath.kappa) else thermal_occupation(bath.kappa, w)
        chi = chi + g * g * ((2 * n + 1) * np.cos(w * t) - 1j * np.sin(w * t))
    return complex(chi[()]) if chi.ndim == 0 else chi


def kernel_from_discrete_bath(bath: DiscreteBath, spec: BathSpec, tau_max: float,
                              n_points: int | None = None) -> CorrelationKernel:
    """Tabulated kernel of the exact discrete-bath correlation function.

    Feeding this to the perturbative propagator isolates the perturbation
    order when comparing against exact_evolve on the same bath.
    """
    if n_points is None:
        n_points = max(int(np.ceil(tau_max / 0.02)) + 1, 64)
    taus = np.linspace(0.0, tau_max, n_points)
    vals = np.asarray(bath_correlation_exact(bath, taus))
    return CorrelationKernel(taus, vals, spec, meta={"regime": "discrete"})


def _joint_hamiltonian(system_dim: int, system_frequency: float,
                       bath: DiscreteBath) -> np.ndarray:
    dims = [system_dim] + [d for _, _, d in bath.modes]
    joint = int(np.prod(dims))
    h = np.zeros((joint, joint), complex)

    def lift(op: np.ndarray, which: int) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for i, d in enumerate(dims):
            out = np.kron(out, op if i == which else np.eye(d, dtype=complex))
        return out

    a_s, adag_s = ladder_operators(system_dim)
    h += system_frequency * lift(adag_s @ a_s, 0)
    x_s = lift(a_s + adag_s, 0)
    for i, (w, g, d) in enumerate(bath.modes, start=1):
        a_b, adag_b = ladder_operators(d)
        h += w * lift(adag_b @ a_b, i)
        if g != 0.0:
            h += g * (x_s @ lift(a_b + adag_b, i))
    return h


def _sample_occupations(bath: DiscreteBath, rng: np.random.Generator) -> list[int]:
    """Draw per-mode Fock occupations from truncated Bose weights."""
    occ = []
    for w, _, d in bath.modes:
        n_mean = 0.0 if np.isinf(bath.kappa) else thermal_occupation(bath.kappa, w)
        levels = np.arange(d)
        weights = (n_mean / (1.0 + n_mean)) ** levels / (1.0 + n_mean)
        weights = weights / weights.sum()
        occ.append(int(rng.choice(d, p=weights)))
    return occ


def _rk4_step(h: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    k1 = -1j * (h @ psi)
    k2 = -1j * (h @ (psi + 0.5 * dt * k1))
    k3 = -1j * (h @ (psi + 0.5 * dt * k2))
    k4 = -1j * (h @ (psi + dt * k3))
    return psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def exact_evolve(system_state: StateVector, bath: DiscreteBath,
                 epsilon_time: float, system_frequency: float = 0.01,
                 dt: float = DEFAULT_STEP, n_traj: int = 64, seed: int = 0,
                 dim_cap: int = DIMENSION_CAP,
                 stepper: str = "expm") -> tuple[DensityOperator, dict]:
    """Evolve system (x) bath exactly and return the reduced system state in
    the interaction picture, plus an info dict.

    A vacuum bath (kappa = inf) runs one deterministic trajectory; a thermal
    bath averages n_traj trajectories with Fock occupations drawn from the
    Bose weights (seeded per trajectory index) and reports the Monte-Carlo
    standard error of the reduced matrix (Frobenius norm).
    """
    if len(system_state.layout.modes) != 1:
        raise DomainError("oracle expects a single-mode system state")
    sys_label, sys_dim = system_state.layout.modes[0]
    joint_dim = sys_dim * bath.joint_dim
    if joint_dim > dim_cap:
        raise DimensionCap(f"joint dimension {joint_dim} exceeds cap {dim_cap}")

    h = _joint_hamiltonian(sys_dim, system_frequency, bath)
    n_steps = max(1, int(round(epsilon_time / dt))) if epsilon_time > 0 else 0
    dt_eff = epsilon_time / n_steps if n_steps else 0.0
    if stepper == "expm":
        u_step = expm(-1j * h * dt_eff) if n_steps else np.eye(joint_dim)
    elif stepper != "rk4":
        raise DomainError(f"unknown stepper {stepper!r}")

    dims = [sys_dim] + [d for _, _, d in bath.modes]
    thermal = not np.isinf(bath.kappa)
    n_runs = n_traj if thermal else 1

    rhos = []
    norm_drift = 0.0
    for traj in range(n_runs):
        bath_vec = np.array([1.0 + 0j])
        if thermal:
            rng = np.random.default_rng([seed, traj])
            occ = _sample_occupations(bath, rng)
        else:
            occ = [0] * len(bath.modes)
        for d, n in zip(dims[1:], occ):
            e = np.zeros(d, complex)
            e[n] = 1.0
            bath_vec = np.kron(bath_vec, e)
        psi = np.kron(system_state.amplitudes, bath_vec)
        norm0 = np.linalg.norm(psi)
        for _ in range(n_steps):
            psi = u_step @ psi if stepper == "expm" else _rk4_step(h, psi, dt_eff)
        norm_drift = max(norm_drift, abs(float(np.linalg.norm(psi)) - norm0))
        t = psi.reshape(sys_dim, -1)
        red = t @ t.conj().T
        rhos.append(red)

    stack = np.stack(rhos)
    mean = stack.mean(axis=0)
    if thermal and n_runs > 1:
        dev = stack - mean[None]
        stderr = float(np.sqrt((np.abs(dev) ** 2).sum(axis=(1, 2)).mean()
                               / (n_runs - 1)) / np.sqrt(n_runs))
    else:
        stderr = 0.0
    # rotate into the interaction picture (bath rotation drops under trace)
    phases = np.exp(1j * system_frequency * np.arange(sys_dim) * epsilon_time)
    mean = phases[:, None] * mean * np.conj(phases)[None, :]
    mean = 0.5 * (mean + mean.conj().T)
    out = DensityOperator(system_state.layout, mean,
                          {"mc_stderr": stderr, "n_traj": n_runs})
    info = {"mc_stderr": stderr, "n_traj": n_runs, "norm_drift": norm_drift,
            "n_steps": n_steps, "joint_dim": joint_dim}
    return out, info


def write_comparison_csv(rows: list[dict], path) -> None:
    """Oracle comparison report: j0, epsilon, frob_distance, mc_stderr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j0", "epsilon", "frob_distance", "mc_stderr"])
        for r in rows:
            w.writerow([f"{r['j0']:.17g}", f"{r['epsilon']:.17g}",
                        f"{r['frob_distance']:.17g}", f"{r['mc_stderr']:.17g}"])

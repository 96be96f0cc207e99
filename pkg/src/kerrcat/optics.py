"""Interferometer elements and the closed-system cat-generation pipeline.

Beam-splitter convention: 50/50 with |1>_b|0>_c -> (|10> + i|01>)/sqrt(2),
i.e. U = exp[i pi/4 (b^dag c + b c^dag)].  With the photon injected into
mode b, the element order is BS1, phase shift theta on mode c, cross-Kerr
on (a, b); a pi Kerr phase then yields the entangled pre-BS2 state
(|-alpha>|10> + i e^{i theta}|alpha>|01>)/sqrt(2).

Detector convention (recorded in metadata, flippable): D1 projects onto
|1>_b|0>_c after BS2 and yields the even (+) cat at theta = pi; D2 projects
onto |0>_b|1>_c and yields the odd (-) cat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import LayoutMismatch, ZeroProbability
from .fock import (TAU_TRUNC, DensityOperator, ModeLayout, StateVector,
                   coherent_amplitudes, embed, ladder_operators, poisson_tail,
                   product_state)

DETECTORS = ("D1", "D2")

#: detector -> (n_b, n_c) photon outcome projected after BS2
DETECTOR_OUTCOME = {"D1": (1, 0), "D2": (0, 1)}

#: sign convention at theta = pi: D1 gives the even (+) cat
DETECTOR_PARITY = {"D1": "even", "D2": "odd"}

MIN_DETECTION_PROBABILITY = 1e-14


@dataclass(frozen=True)
class PipelineConfig:
    """Closed-pipeline parameters.  kerr_phase is the accumulated cross phase
    (interaction constant times transit time); pi gives maximal separation."""

    alpha: complex
    theta: float
    kerr_phase: float = np.pi
    detector: str = "D1"

    def __post_init__(self):
        if not 0.0 <= self.theta < 2.0 * np.pi:
            raise LayoutMismatch(f"theta must lie in [0, 2pi), got {self.theta}")
        if not 0.0 <= self.kerr_phase < 2.0 * np.pi:
            raise LayoutMismatch(f"kerr_phase must lie in [0, 2pi), got {self.kerr_phase}")
        if self.detector not in DETECTORS:
            raise LayoutMismatch(f"detector must be one of {DETECTORS}, got {self.detector!r}")


def beam_splitter_unitary(layout: ModeLayout, first: str = "b", second: str = "c") -> np.ndarray:
    """50/50 beam splitter on (first, second): exp[i pi/4 (f^dag s + f s^dag)]."""
    af, _ = ladder_operators(layout.dim(first))
    as_, _ = ladder_operators(layout.dim(second))
    f = embed(af, first, layout)
    s = embed(as_, second, layout)
    gen = f.conj().T @ s + f @ s.conj().T
    return expm(1j * (np.pi / 4.0) * gen)


def phase_shift_unitary(layout: ModeLayout, mode: str, theta: float) -> np.ndarray:
    """diag(e^{i n theta}) on the target mode."""
    dim = layout.dim(mode)
    op = np.diag(np.exp(1j * theta * np.arange(dim)))
    return embed(op, mode, layout)


def kerr_unitary(layout: ModeLayout, kerr_phase: float) -> np.ndarray:
    """Cross-Kerr phase e^{i kerr_phase n_a n_b}, diagonal in the joint basis."""
    na = np.arange(layout.dim("a"), dtype=complex)
    nb = np.arange(layout.dim("b"), dtype=complex)
    na_j = np.real(np.diag(embed(np.diag(na), "a", layout)))
    nb_j = np.real(np.diag(embed(np.diag(nb), "b", layout)))
    return np.diag(np.exp(1j * kerr_phase * na_j * nb_j))


def _phase_normalize(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(vec)))
    ph = vec[k] / abs(vec[k]) if vec[k] != 0 else 1.0
    return vec / ph


def closed_pipeline_state(config: PipelineConfig, layout: ModeLayout,
                          tau_trunc: float = TAU_TRUNC) -> StateVector:
    """State just before the second beam splitter (photon fed as |1>_b|0>_c).

    Applies BS1, the phase shift on mode c, then the cross-Kerr element; at
    kerr_phase = pi the result is (|-alpha>|10> + i e^{i theta}|alpha>|01>)/sqrt(2)
    up to global phase.
    """
    for lab in ("a", "b", "c"):
        layout.axis(lab)
    from .errors import TruncationError
    tail = poisson_tail(abs(config.alpha) ** 2, layout.dim("a"))
    if tail > tau_trunc:
        raise TruncationError(
            f"cat mode dim {layout.dim('a')} loses tail mass {tail:.3e} for "
            f"|alpha|={abs(config.alpha):.3f}"
        )
    init = product_state(layout, {
        "a": coherent_amplitudes(config.alpha, layout.dim("a")),
        "b": np.eye(layout.dim("b"), dtype=complex)[1],
        "c": np.eye(layout.dim("c"), dtype=complex)[0],
    })
    u = kerr_unitary(layout, config.kerr_phase) @ \
        phase_shift_unitary(layout, "c", config.theta) @ \
        beam_splitter_unitary(layout, "b", "c")
    out = u @ init.amplitudes
    return StateVector(layout, _phase_normalize(out))


def detection_probabilities(rho: DensityOperator) -> dict[str, float]:
    """Probability of each detector outcome after BS2 (no conditioning)."""
    probs = {}
    u = beam_splitter_unitary(rho.layout, "b", "c")
    after = u @ rho.matrix @ u.conj().T
    for det in DETECTORS:
        probs[det] = _outcome_probability(after, rho.layout, det)
    return probs


def _bc_outcome_index(layout: ModeLayout, detector: str) -> int:
    nb, nc = DETECTOR_OUTCOME[detector]
    return nb * layout.dim("c") + nc


def _outcome_probability(matrix: np.ndarray, layout: ModeLayout, detector: str) -> float:
    da = layout.dim("a")
    dbc = layout.dim("b") * layout.dim("c")
    t = matrix.reshape(da, dbc, da, dbc)
    s = _bc_outcome_index(layout, detector)
    return float(np.trace(t[:, s, :, s]).real)


def apply_bs2_and_detect(rho: DensityOperator, detector: str) -> DensityOperator:
    """Apply BS2, project the photon modes onto the detector outcome, trace
    them out and renormalize.

    The layout must be ordered (a, b, c).  The returned single-mode operator
    carries metadata: detection_probability, the detector label, and
    cross_part, the (non-Hermitian) contribution fed by the photon-path
    coherence sector |10><01| of the input, so rho_cat = direct + M + M^dag.
    """
    if detector not in DETECTORS:
        raise LayoutMismatch(f"detector must be one of {DETECTORS}, got {detector!r}")
    if rho.layout.labels != ("a", "b", "c"):
        raise LayoutMismatch(f"expected layout (a, b, c), got {rho.layout.labels}")
    da = rho.layout.dim("a")
    db, dc = rho.layout.dim("b"), rho.layout.dim("c")
    dbc = db * dc
    u = beam_splitter_unitary(rho.layout, "b", "c")
    after = (u @ rho.matrix @ u.conj().T).reshape(da, dbc, da, dbc)
    s_out = _bc_outcome_index(rho.layout, detector)
    cat = after[:, s_out, :, s_out]
    prob = float(np.trace(cat).real)
    # the perturbative input can push the projected weight negative; only a
    # vanishing weight makes the conditional state undefined
    if abs(prob) < MIN_DETECTION_PROBABILITY:
        raise ZeroProbability(
            f"detector {detector} outcome has vanishing probability "
            f"({prob:.3e} < {MIN_DETECTION_PROBABILITY:.0e} in magnitude)"
        )
    # split by the photon sector of the *input* state: rho' = U rho U^dag, so
    # cat_{ij} = sum_{s,t} U[s_out, s] rho[(i,s),(j,t)] conj(U[s_out, t])
    ubc = _bc_block(u, rho.layout)
    rin = rho.matrix.reshape(da, dbc, da, dbc)
    s10 = 1 * dc + 0
    s01 = 0 * dc + 1
    cross = (ubc[s_out, s10] * np.conj(ubc[s_out, s01])) * rin[:, s10, :, s01]
    cat_n = 0.5 * (cat + cat.conj().T) / prob
    meta = {
        "detection_probability": prob,
        "detector": detector,
        "detector_parity": DETECTOR_PARITY[detector],
        "cross_part": cross / prob,
    }
    out_layout = ModeLayout((("a", da),))
    return DensityOperator(out_layout, cat_n, meta)


def _bc_block(u_joint: np.ndarray, layout: ModeLayout) -> np.ndarray:
    """Restriction of a (b,c)-only joint unitary to the bc factor."""
    da = layout.dim("a")
    dbc = layout.dim("b") * layout.dim("c")
    t = u_joint.reshape(da, dbc, da, dbc)
    return t[0, :, 0, :]

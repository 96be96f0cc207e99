"""Truncated-Fock-space linear algebra for a small multi-mode bosonic register.

Dense complex matrices throughout; joint dimensions stay at a few hundred for
the default configurations, so no sparse machinery is used.  The joint index
is row-major in layout order: for layout (a, b, c) the basis state
|n_a, n_b, n_c> sits at index (n_a * dim_b + n_b) * dim_c + n_c.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

from .errors import LayoutMismatch, TruncationError

MODE_LABELS = ("a", "b", "c")

#: default tolerance on the norm deficit of prepared states
TAU_TRUNC = 1e-10

#: Fock levels excluded from unitarity / eigenvector checks, where
#: truncation error concentrates
GUARD_BAND = 5

#: unitarity tolerance on the guarded block of the displacement operator
TAU_UNITARY = 1e-10


def default_cat_dim(alpha: complex) -> int:
    """Truncation for the cat mode; Poisson tail bound for |alpha|."""
    a = abs(alpha)
    return int(np.ceil(a * a + 6.0 * a + 10.0))


@dataclass(frozen=True)
class ModeLayout:
    """Ordered register of labelled modes with per-mode truncations."""

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [m[0] for m in self.modes]
        if len(set(labels)) != len(labels):
            raise LayoutMismatch(f"duplicate mode labels in {labels}")
        for lab, dim in self.modes:
            if lab not in MODE_LABELS:
                raise LayoutMismatch(f"unknown mode label {lab!r}")
            if dim < 2:
                raise LayoutMismatch(f"mode {lab!r}: dim must be >= 2, got {dim}")
        object.__setattr__(self, "modes", tuple((str(l), int(d)) for l, d in self.modes))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m[0] for m in self.modes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m[1] for m in self.modes)

    @property
    def joint_dim(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutMismatch(f"mode {label!r} not in layout {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.axis(label)]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Pure state on a mode layout (immutable)."""

    layout: ModeLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _readonly(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != self.layout.joint_dim:
            raise LayoutMismatch(
                f"amplitude vector of size {amps.size} does not match joint dim "
                f"{self.layout.joint_dim}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> "DensityOperator":
        return DensityOperator(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix on a mode layout.  Hermitian to 1e-12 by contract."""

    layout: ModeLayout
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    HERM_TOL = 1e-12

    def __post_init__(self):
        mat = _readonly(np.asarray(self.matrix))
        d = self.layout.joint_dim
        if mat.shape != (d, d):
            raise LayoutMismatch(f"matrix shape {mat.shape} does not match joint dim {d}")
        defect = np.abs(mat - mat.conj().T).max()
        if defect > self.HERM_TOL:
            raise LayoutMismatch(f"matrix not Hermitian: max|M - M^dag| = {defect:.3e}")
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def with_metadata(self, **kwargs) -> "DensityOperator":
        meta = dict(self.metadata)
        meta.update(kwargs)
        return DensityOperator(self.layout, self.matrix, meta)


def ladder_operators(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation matrices on a dim-level mode.

    a|n> = sqrt(n)|n-1>; the commutator [a, a^dag] equals the identity except
    for the truncation artifact -(dim-1) in the top corner.
    """
    if dim < 2:
        raise LayoutMismatch(f"dim must be >= 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes c_n = e^{-|a|^2/2} a^n / sqrt(n!), n < dim."""
    n = np.arange(dim)
    if alpha == 0:
        c = np.zeros(dim, complex)
        c[0] = 1.0
        return c
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def poisson_tail(mean: float, dim: int) -> float:
    """P(N >= dim) for a Poisson variable with the given mean."""
    if mean == 0:
        return 0.0
    return float(gammainc(dim, mean))


def coherent_state(alpha: complex, dim: int, label: str = "a",
                   tau_trunc: float = TAU_TRUNC) -> StateVector:
    """Truncated coherent state |alpha> on a single-mode layout.

    Raises TruncationError when the Poisson tail mass beyond dim exceeds
    tau_trunc; the returned state is not renormalized, so its squared norm
    lies in [1 - tau_trunc, 1].
    """
    if dim < 2:
        raise TruncationError(f"dim must be >= 2, got {dim}")
    tail = poisson_tail(abs(alpha) ** 2, dim)
    if tail > tau_trunc:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):.3f} loses tail mass {tail:.3e} "
            f"> {tau_trunc:.1e} at dim={dim}"
        )
    layout = ModeLayout(((label, dim),))
    return StateVector(layout, coherent_amplitudes(alpha, dim))


def displacement_operator(gamma: complex, dim: int, guard: int = GUARD_BAND,
                          tau_unitary: float = TAU_UNITARY) -> np.ndarray:
    """D(gamma) = exp(gamma a^dag - conj(gamma) a) by matrix exponential.

    Unitarity is verified on the lower (dim - guard) block; truncation error
    concentrates in the top guard levels.
    """
    a, adag = ladder_operators(dim)
    d = expm(gamma * adag - np.conj(gamma) * a)
    block = dim - guard if dim > guard else dim
    defect = np.abs((d.conj().T @ d) - np.eye(dim))[:block, :block].max()
    if defect > tau_unitary:
        raise TruncationError(
            f"displacement D({gamma}) fails unitarity on guarded block: {defect:.3e}"
        )
    return d


def embed(op: np.ndarray, target: str, layout: ModeLayout) -> np.ndarray:
    """Lift a single-mode operator to the joint space (identity elsewhere)."""
    op = np.asarray(op, dtype=complex)
    dt = layout.dim(target)
    if op.shape != (dt, dt):
        raise LayoutMismatch(
            f"operator shape {op.shape} does not match mode {target!r} dim {dt}"
        )
    out = np.array([[1.0 + 0j]])
    for lab, dim in layout.modes:
        out = np.kron(out, op if lab == target else np.eye(dim, dtype=complex))
    return out


def basis_state(layout: ModeLayout, occupations: Mapping[str, int]) -> StateVector:
    """Joint Fock basis state |n_a, n_b, ...>; unspecified modes get 0."""
    vec = np.array([1.0 + 0j])
    for lab, dim in layout.modes:
        n = int(occupations.get(lab, 0))
        if not 0 <= n < dim:
            raise LayoutMismatch(f"occupation {n} out of range for mode {lab!r} (dim {dim})")
        e = np.zeros(dim, complex)
        e[n] = 1.0
        vec = np.kron(vec, e)
    return StateVector(layout, vec)


def product_state(layout: ModeLayout, factors: Mapping[str, np.ndarray]) -> StateVector:
    """Tensor product of per-mode amplitude vectors in layout order."""
    vec = np.array([1.0 + 0j])
    for lab, dim in layout.modes:
        f = np.asarray(factors[lab], dtype=complex).reshape(-1)
        if f.size != dim:
            raise LayoutMismatch(f"factor for mode {lab!r} has size {f.size}, expected {dim}")
        vec = np.kron(vec, f)
    return StateVector(layout, vec)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Trace out all modes not in `keep`; kept modes retain their order."""
    keep = tuple(keep)
    if not keep:
        raise LayoutMismatch("keep must name at least one mode")
    for lab in keep:
        rho.layout.axis(lab)  # raises LayoutMismatch if absent
    dims = rho.layout.dims
    n = len(dims)
    tens = rho.matrix.reshape(dims + dims)
    # trace out modes in reverse axis order so indices stay valid
    drop_axes = [i for i, lab in enumerate(rho.layout.labels) if lab not in keep]
    for ax in reversed(drop_axes):
        k = tens.ndim // 2
        tens = np.trace(tens, axis1=ax, axis2=ax + k)
    kept = tuple((lab, dim) for lab, dim in rho.layout.modes if lab in keep)
    d = int(np.prod([dim for _, dim in kept]))
    out = tens.reshape(d, d)
    out = 0.5 * (out + out.conj().T)  # remove roundoff asymmetry
    return DensityOperator(ModeLayout(kept), out, dict(rho.metadata))

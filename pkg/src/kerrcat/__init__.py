"""Optical Schroedinger-cat generation in a Kerr Mach-Zehnder interferometer
coupled to two non-equilibrium heat baths, with second-order non-Markovian
evolution and phase-space diagnostics."""

__version__ = "0.1.0"

from .bath import (BathSpec, CorrelationKernel, SpectralDensity, build_kernel,
                   correlation_function, regime_kernel, spectral_density_value,
                   thermal_occupation)
from .dyson import (CouplingSpec, EvolutionResult, free_rotation,
                    interaction_picture_position, reduced_cat_state,
                    second_order_propagate)
from .errors import (ConfigError, ConvergenceError, DimensionCap, DomainError,
                     GridAliasing, KernelCoverage, KerrcatError, LayoutMismatch,
                     QuadratureFailure, TruncationError, ZeroProbability)
from .fock import (DensityOperator, ModeLayout, StateVector, coherent_state,
                   default_cat_dim, displacement_operator, embed,
                   ladder_operators, partial_trace)
from .optics import (PipelineConfig, apply_bs2_and_detect, beam_splitter_unitary,
                     closed_pipeline_state, detection_probabilities,
                     kerr_unitary, phase_shift_unitary)
from .oracle import DiscreteBath, discretize_bath, exact_evolve
from .phase_space import (GridSpec, WignerGrid, momentum_marginal,
                          negativity_volume, weyl_function, wigner_from_parity,
                          wigner_from_weyl)

__all__ = [name for name in dir() if not name.startswith("_")]

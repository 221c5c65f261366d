"""Calibrationless parallel-MRI k-space reconstruction.

Fills in unsampled multi-coil Cartesian k-space by alternating between
(i) estimating the signal subspace of a sliding-neighborhood convolution
matrix and (ii) descending an annihilation cost on the unsampled
entries, with optional plug-in image-domain denoising and hard data
consistency.  See the README for the mathematical conventions.
"""

from .arrays import (
    FilterBank,
    KernelSpec,
    MultiCoilKSpace,
    Region,
    SamplingMask,
    check_region,
    full_region,
)
from .denoise import (
    DenoiseContext,
    ExternalDenoiser,
    IdentityDenoiser,
    SwtCoefficients,
    SwtDenoiser,
    denoise,
    soft,
    swt_forward,
    swt_inverse,
    swt_soft_threshold,
)
from .fileio import (
    read_kspace,
    read_mask,
    read_trace,
    write_kspace,
    write_mask,
    write_trace,
)
from .fourier import image_to_kspace, kspace_to_image, root_sum_of_squares
from .errors import (
    ConfigError,
    DegenerateDirectionWarning,
    DegenerateInputError,
    DenoiserError,
    DimensionError,
    FileFormatError,
    HicuError,
)
from .kspace import (
    ConvolutionOperator,
    adjoint_scatter,
    apply_filters,
    cost_gradient,
    exact_line_search,
    materialize_convolution_matrix,
)
from .lowrank import (
    NullspaceBasis,
    SignalSubspace,
    householder_complement,
    jl_compress,
    rsvd_right_vectors,
)
from .masks import MaskSpec, make_mask
from .metrics import SnrReport, TraceSummary, nmse, snr_db, summarize_trace
from .phantom import Ellipse, PhantomSpec, coil_sensitivities, make_phantom, phantom_image
from .rng import RngSeed
from .solver import (
    SolverConfig,
    SolverResult,
    StageConfig,
    TraceRecord,
    center_region,
    data_consistency,
    default_stages,
    hicu_run,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvolutionOperator",
    "DegenerateDirectionWarning",
    "DegenerateInputError",
    "DenoiseContext",
    "DenoiserError",
    "DimensionError",
    "Ellipse",
    "ExternalDenoiser",
    "FileFormatError",
    "FilterBank",
    "HicuError",
    "IdentityDenoiser",
    "KernelSpec",
    "MaskSpec",
    "MultiCoilKSpace",
    "NullspaceBasis",
    "PhantomSpec",
    "Region",
    "RngSeed",
    "SamplingMask",
    "SignalSubspace",
    "SnrReport",
    "SolverConfig",
    "SolverResult",
    "StageConfig",
    "SwtCoefficients",
    "SwtDenoiser",
    "TraceRecord",
    "TraceSummary",
    "adjoint_scatter",
    "apply_filters",
    "center_region",
    "check_region",
    "coil_sensitivities",
    "cost_gradient",
    "data_consistency",
    "default_stages",
    "denoise",
    "exact_line_search",
    "full_region",
    "hicu_run",
    "image_to_kspace",
    "kspace_to_image",
    "householder_complement",
    "jl_compress",
    "make_mask",
    "make_phantom",
    "materialize_convolution_matrix",
    "nmse",
    "phantom_image",
    "read_kspace",
    "read_mask",
    "read_trace",
    "root_sum_of_squares",
    "rsvd_right_vectors",
    "snr_db",
    "soft",
    "summarize_trace",
    "swt_forward",
    "swt_inverse",
    "swt_soft_threshold",
    "write_kspace",
    "write_mask",
    "write_trace",
]

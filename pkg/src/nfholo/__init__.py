"""Matrix-free compressive near-field 3-D imaging toolkit.

The package simulates planar-scan frequency-swept acquisitions of point
scenes and reconstructs 3-D reflectivity volumes three ways: a
per-range-bin holographic (matched-filter) pipeline, a range-migration
pipeline built on wavenumber resampling, and a regularized sparse
solver driven by the adjoint-exact holographic operator pair. Hot
kernels run through a compiled extension when available, with a pure
NumPy fallback selected automatically at import (set
``NFHOLO_FORCE_NUMPY=1`` to force the fallback).
"""

from ._backend import backend_name
from .analysis import (
    FlopModel,
    MatrixPair,
    PsfStats,
    coherence_estimate,
    dense_sensing_matrix,
    flop_model,
    matrix_coherence,
    matrix_flops,
    max_projection,
    mean_psf_stats,
    offpeak_max,
    psf_column,
    rmse,
)
from .fileio import (
    ConfigError,
    CubeFile,
    NumericError,
    RunConfig,
    parse_config,
    parse_config_text,
    read_cube,
    read_mask,
    read_scene,
    render_config,
    write_cube,
    write_mask,
    write_scene,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ApertureGrid,
    FrequencyGrid,
    VolumeGrid,
    volume_for_aperture,
)
from .holography import HoloPair, adjoint_dot_test, reconstruct_holo
from .omegak import OmegakPair, reconstruct_omegak, stolt_resample
from .presets import PRESET_NAMES, five_point_scene, preset_config, preset_text
from .sampling import (
    SamplingMask,
    apply_mask,
    full_mask,
    mask_random,
    mask_uniform_random,
)
from .scene import PointScene, add_noise, rasterize, simulate_scatter
from .solver import (
    SolveReport,
    SolverParams,
    gradient,
    objective,
    smooth_abs,
    smooth_abs_grad,
    solve_ncg,
    tv_gradient,
    tv_norm,
    tv_value,
)
from .spectral import (
    SpectralPlan,
    dispersion_kz,
    evanescent_threshold,
    jacobian,
    resize_spectrum,
    set_fft_workers,
    spectral_axes,
)

__version__ = "0.1.0"

__all__ = [
    "ApertureGrid",
    "ConfigError",
    "CubeFile",
    "FlopModel",
    "FrequencyGrid",
    "HoloPair",
    "MatrixPair",
    "NumericError",
    "OmegakPair",
    "PRESET_NAMES",
    "PointScene",
    "PsfStats",
    "RunConfig",
    "SPEED_OF_LIGHT",
    "SamplingMask",
    "SolveReport",
    "SolverParams",
    "SpectralPlan",
    "VolumeGrid",
    "add_noise",
    "adjoint_dot_test",
    "apply_mask",
    "backend_name",
    "coherence_estimate",
    "dense_sensing_matrix",
    "dispersion_kz",
    "evanescent_threshold",
    "five_point_scene",
    "flop_model",
    "full_mask",
    "gradient",
    "jacobian",
    "mask_random",
    "mask_uniform_random",
    "matrix_coherence",
    "matrix_flops",
    "max_projection",
    "mean_psf_stats",
    "objective",
    "offpeak_max",
    "parse_config",
    "parse_config_text",
    "preset_config",
    "preset_text",
    "psf_column",
    "rasterize",
    "read_cube",
    "read_mask",
    "read_scene",
    "reconstruct_holo",
    "reconstruct_omegak",
    "render_config",
    "resize_spectrum",
    "rmse",
    "set_fft_workers",
    "simulate_scatter",
    "smooth_abs",
    "smooth_abs_grad",
    "solve_ncg",
    "spectral_axes",
    "stolt_resample",
    "tv_gradient",
    "tv_norm",
    "tv_value",
    "volume_for_aperture",
    "write_cube",
    "write_mask",
    "write_scene",
]

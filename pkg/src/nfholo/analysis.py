"""Imaging diagnostics: point-spread-function and coherence estimates,
peak-normalized RMSE, dB max-value projections, closed-form FLOP counts
for both reconstruction pipelines, and a dense-matrix reference
implementation of the sensing operator for cross-validation on tiny
configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ApertureGrid, FrequencyGrid, VolumeGrid

MAX_DENSE_ENTRIES = 1_000_000


@dataclass(frozen=True)
class PsfStats:
    """Normalized point-spread function of an operator pair plus summary
    numbers: the unnormalized peak magnitude, the maximum off-lobe
    magnitude ``mu`` (the coherence estimate), and 1-D max projections
    of the normalized magnitude along each volume axis."""

    psf: np.ndarray
    peak_index: tuple
    peak_value: float
    mu: float
    projections: tuple

    @property
    def shape(self):
        return self.psf.shape


def offpeak_max(psf: np.ndarray, peak_index, exclusion_radius: int = 1) -> float:
    """Largest magnitude outside the main lobe.

    The main lobe is the Chebyshev ball of the given radius around
    ``peak_index``; radius 0 excludes only the peak voxel itself.
    """
    mag = np.abs(np.asarray(psf))
    if exclusion_radius < 0:
        raise ValueError("exclusion_radius must be >= 0")
    lobe = tuple(
        slice(max(i - exclusion_radius, 0), i + exclusion_radius + 1)
        for i in peak_index
    )
    masked = mag.copy()
    masked[lobe] = 0.0
    return float(masked.max()) if masked.size else 0.0


def _axis_max_projections(mag: np.ndarray) -> tuple:
    axes = range(mag.ndim)
    return tuple(
        mag.max(axis=tuple(a for a in axes if a != keep)) for keep in axes
    )


def psf_column(pair, voxel_index, exclusion_radius: int = 1) -> PsfStats:
    """Point-spread function of backproject(project(delta at voxel_index)).

    The returned cube is normalized by its (complex) value at the source
    voxel, so the peak entry is exactly 1 there.
    """
    voxel_index = tuple(int(i) for i in voxel_index)
    if len(voxel_index) != len(pair.image_shape):
        raise ValueError("voxel index rank does not match the image cube")
    for i, n in zip(voxel_index, pair.image_shape):
        if not 0 <= i < n:
            raise ValueError(f"voxel index {voxel_index} outside image shape {pair.image_shape}")
    delta = np.zeros(pair.image_shape, dtype=np.complex128)
    delta[voxel_index] = 1.0
    psf = pair.backproject(pair.project(delta))
    center = psf[voxel_index]
    if center == 0:
        raise ValueError("PSF vanishes at the source voxel; cannot normalize")
    psf = psf / center
    mag = np.abs(psf)
    return PsfStats(
        psf=psf,
        peak_index=voxel_index,
        peak_value=float(np.abs(center)),
        mu=offpeak_max(psf, voxel_index, exclusion_radius),
        projections=_axis_max_projections(mag),
    )


def coherence_estimate(stats: PsfStats) -> float:
    """Maximum off-lobe magnitude of a normalized PSF."""
    return stats.mu


def mean_psf_stats(psfs, exclusion_radius: int = 1) -> PsfStats:
    """Aggregate per-trial PSFs: average the normalized magnitude cubes,
    then extract projections and the off-lobe maximum from the mean."""
    psfs = list(psfs)
    if not psfs:
        raise ValueError("need at least one PSF")
    peak_index = psfs[0].peak_index
    for s in psfs[1:]:
        if s.peak_index != peak_index or s.shape != psfs[0].shape:
            raise ValueError("PSF trials disagree on geometry")
    mean_mag = np.mean([np.abs(s.psf) for s in psfs], axis=0)
    return PsfStats(
        psf=mean_mag.astype(np.complex128),
        peak_index=peak_index,
        peak_value=float(np.mean([s.peak_value for s in psfs])),
        mu=offpeak_max(mean_mag, peak_index, exclusion_radius),
        projections=_axis_max_projections(mean_mag),
    )


def dense_sensing_matrix(
    aperture: ApertureGrid,
    freqs: FrequencyGrid,
    volume: VolumeGrid,
    mask=None,
    max_entries: int = MAX_DENSE_ENTRIES,
) -> np.ndarray:
    """Explicit (n_f * n_y * n_x, n_voxels) sensing matrix.

    Row (n, p) holds exp(-2j * k_n * distance(element_p, voxel_q)); rows
    are ordered frequency-major to match the raveled data cube, columns
    follow the raveled (z, y, x) image cube. Masked-out elements give
    zero rows. Refuses configurations above ``max_entries`` entries.
    """
    n_rows = freqs.n_f * aperture.n_y * aperture.n_x
    n_cols = volume.n_z * volume.n_y * volume.n_x
    if n_rows * n_cols > max_entries:
        raise ValueError(
            f"dense matrix would hold {n_rows * n_cols} entries "
            f"(cap {max_entries}); use the matrix-free operators instead"
        )
    ex = aperture.x()
    ey = aperture.y()
    elem_x = np.broadcast_to(ex[None, :], aperture.shape).ravel()
    elem_y = np.broadcast_to(ey[:, None], aperture.shape).ravel()
    vz, vy, vx = np.meshgrid(volume.z(), volume.y(), volume.x(), indexing="ij")
    dist = np.sqrt(
        (elem_x[:, None] - vx.ravel()[None, :]) ** 2
        + (elem_y[:, None] - vy.ravel()[None, :]) ** 2
        + (aperture.plane_z - vz.ravel()[None, :]) ** 2
    )
    k = freqs.wavenumbers()
    matrix = np.exp(-2j * k[:, None, None] * dist[None, :, :])
    if mask is not None:
        matrix = matrix * mask.mask.ravel()[None, :, None]
    return matrix.reshape(n_rows, n_cols)


class MatrixPair:
    """Dense-matrix counterpart of the matrix-free operator pairs.

    Exposes the same project/backproject interface (backproject is the
    exact conjugate transpose), for use on configurations small enough
    for the dense matrix.
    """

    weighting = "adjoint"

    def __init__(self, aperture, freqs, volume, mask=None, max_entries=MAX_DENSE_ENTRIES):
        self.aperture = aperture
        self.freqs = freqs
        self.volume = volume
        self.mask = mask
        self.matrix = dense_sensing_matrix(aperture, freqs, volume, mask, max_entries)

    @property
    def data_shape(self):
        return (self.freqs.n_f, self.aperture.n_y, self.aperture.n_x)

    @property
    def image_shape(self):
        return self.volume.shape

    @property
    def adjoint_exact(self) -> bool:
        return True

    def project(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image, dtype=np.complex128)
        if image.shape != self.image_shape:
            raise ValueError(f"expected image shape {self.image_shape}, got {image.shape}")
        return (self.matrix @ image.ravel()).reshape(self.data_shape)

    def backproject(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != self.data_shape:
            raise ValueError(f"expected data shape {self.data_shape}, got {data.shape}")
        return (self.matrix.conj().T @ data.ravel()).reshape(self.image_shape)


def matrix_coherence(matrix: np.ndarray, volume_shape=None, exclusion_radius: int = 0) -> float:
    """Mutual coherence of a dense sensing matrix.

    Columns are L2-normalized, then the maximum |inner product| between
    distinct columns is taken. With a ``volume_shape`` and a positive
    radius, column pairs whose voxels fall within that Chebyshev
    distance are excluded as well, mirroring the PSF main-lobe exclusion.
    """
    matrix = np.asarray(matrix)
    norms = np.linalg.norm(matrix, axis=0)
    if np.any(norms == 0):
        raise ValueError("matrix has a zero column; coherence undefined")
    unit = matrix / norms[None, :]
    gram = np.abs(unit.conj().T @ unit)
    np.fill_diagonal(gram, 0.0)
    if exclusion_radius > 0:
        if volume_shape is None:
            raise ValueError("volume_shape required for a nonzero exclusion radius")
        coords = np.stack(
            np.unravel_index(np.arange(gram.shape[0]), volume_shape), axis=1
        )
        cheb = np.max(np.abs(coords[:, None, :] - coords[None, :, :]), axis=2)
        gram[cheb <= exclusion_radius] = 0.0
    return float(gram.max())


def matrix_flops(n_freqs: int, n_samples: int, n_voxels: int) -> float:
    """FLOPs of one dense forward application: a complex matrix-vector
    product with n_freqs * n_samples rows and n_voxels columns."""
    n, p, q = n_freqs, n_samples, n_voxels
    return 6.0 * n * p * q + 2.0 * n * p * (q - 1)


def rmse(truth: np.ndarray, recon: np.ndarray) -> float:
    """Root-mean-square error between peak-normalized magnitude cubes.

    Both inputs are reduced to magnitudes and scaled to unit peak before
    differencing, so the measure is insensitive to overall gain. An
    all-zero truth is an error; an all-zero reconstruction compares as
    zeros.
    """
    t = np.abs(np.asarray(truth))
    r = np.abs(np.asarray(recon))
    if t.shape != r.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {r.shape}")
    t_peak = t.max()
    if t_peak == 0:
        raise ValueError("truth cube is identically zero")
    t = t / t_peak
    r_peak = r.max()
    if r_peak > 0:
        r = r / r_peak
    return float(np.sqrt(np.mean((t - r) ** 2)))


def max_projection(image: np.ndarray, axis: int, floor_db: float = -30.0) -> np.ndarray:
    """Max-value projection of a magnitude cube along one axis, in dB
    relative to the global peak and floored at ``floor_db``."""
    image = np.asarray(image)
    if image.ndim != 3:
        raise ValueError("expected a 3-D image cube")
    if not -image.ndim <= axis < image.ndim:
        raise ValueError(f"axis {axis} out of range for a 3-D cube")
    if not floor_db < 0:
        raise ValueError("floor_db must be negative")
    mag = np.abs(image)
    peak = mag.max()
    proj = mag.max(axis=axis)
    if peak == 0:
        return np.full(proj.shape, floor_db)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(proj / peak)
    return np.maximum(db, floor_db)


@dataclass(frozen=True)
class FlopModel:
    """Per-stage FLOP counts of the two reconstruction pipelines on an
    n_range x n_azimuth x n_elevation problem."""

    stages_omegak: dict
    stages_holo: dict

    @property
    def flops_omegak(self) -> float:
        return float(sum(self.stages_omegak.values()))

    @property
    def flops_holo(self) -> float:
        return float(sum(self.stages_holo.values()))

    @property
    def ratio(self) -> float:
        return self.flops_omegak / self.flops_holo


def flop_model(n_range: int, n_azimuth: int, n_elevation: int, n_taps: int = 8) -> FlopModel:
    """Closed-form FLOP counts per stage for both pipelines.

    ``n_range`` counts frequency/range bins, ``n_azimuth`` and
    ``n_elevation`` the transverse grid, ``n_taps`` the interpolation
    kernel length of the wavenumber resampling stage.
    """
    if min(n_range, n_azimuth, n_elevation, n_taps) <= 0:
        raise ValueError("all dimensions must be positive")
    r, a, e, t = float(n_range), float(n_azimuth), float(n_elevation), float(n_taps)
    azimuth_fft = 5.0 * r * e * a * np.log2(a)
    elevation_fft = 5.0 * r * a * e * np.log2(e)
    matched_filter = 6.0 * r * a * e
    stages_omegak = {
        "azimuth_fft": azimuth_fft,
        "elevation_fft": elevation_fft,
        "matched_filter": matched_filter,
        "stolt_interpolation": 2.0 * (2.0 * t - 1.0) * r * a * e,
        "azimuth_ifft": azimuth_fft,
        "elevation_ifft": elevation_fft,
        "range_ifft": 5.0 * e * a * r * np.log2(r),
    }
    stages_holo = {
        "azimuth_fft": azimuth_fft,
        "elevation_fft": elevation_fft,
        "matched_filter": matched_filter,
        "azimuth_ifft": azimuth_fft,
        "elevation_ifft": elevation_fft,
        "frequency_summation": 2.0 * (r - 1.0) * r * a * e,
    }
    return FlopModel(stages_omegak=stages_omegak, stages_holo=stages_holo)

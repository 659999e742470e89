"""Acquisition and image-volume geometry.

Data cubes are complex ndarrays of shape (n_f, n_y, n_x), frequency
slowest; image cubes are complex ndarrays of shape (n_z, n_y, n_x),
range slowest. The grid classes below carry the physical coordinates
for those axes and nothing else; all coordinates are in meters and Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by definition


def _centered_axis(n: int, step: float) -> np.ndarray:
    # symmetric about 0 for even and odd n alike
    return (np.arange(n) - 0.5 * (n - 1)) * step


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class ApertureGrid:
    """Planar rectangular antenna array in the z = plane_z plane.

    Element (i_y, i_x) sits at x = (i_x - (n_x-1)/2) * pitch_x and
    y = (i_y - (n_y-1)/2) * pitch_y, so the array is centered on the
    z axis for any element count.
    """

    n_x: int
    n_y: int
    pitch_x: float
    pitch_y: float
    plane_z: float = 0.0

    def __post_init__(self) -> None:
        _require(self.n_x >= 1 and self.n_y >= 1, "element counts must be >= 1")
        _require(
            self.pitch_x > 0 and self.pitch_y > 0 and math.isfinite(self.pitch_x) and math.isfinite(self.pitch_y),
            "element pitches must be positive and finite",
        )
        _require(math.isfinite(self.plane_z), "plane_z must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_y, self.n_x)

    @property
    def extent_x(self) -> float:
        """Periodic aperture extent n_x * pitch_x (the FFT period), m."""
        return self.n_x * self.pitch_x

    @property
    def extent_y(self) -> float:
        return self.n_y * self.pitch_y

    def x(self) -> np.ndarray:
        return _centered_axis(self.n_x, self.pitch_x)

    def y(self) -> np.ndarray:
        return _centered_axis(self.n_y, self.pitch_y)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency sweep, f_start to f_stop inclusive, n_f samples."""

    f_start: float
    f_stop: float
    n_f: int

    def __post_init__(self) -> None:
        _require(self.n_f >= 1, "n_f must be >= 1")
        _require(
            math.isfinite(self.f_start) and math.isfinite(self.f_stop) and 0 < self.f_start <= self.f_stop,
            "need 0 < f_start <= f_stop, finite",
        )
        if self.n_f >= 2:
            _require(self.f_stop > self.f_start, "n_f >= 2 needs f_stop > f_start")

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.f_start + self.f_stop)

    @property
    def bandwidth(self) -> float:
        return self.f_stop - self.f_start

    @property
    def delta_f(self) -> float:
        """Frequency step, 0.0 for a single-frequency grid."""
        if self.n_f == 1:
            return 0.0
        return self.bandwidth / (self.n_f - 1)

    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_f)

    def wavenumbers(self) -> np.ndarray:
        """k = 2*pi*f/c, strictly increasing."""
        return 2.0 * np.pi * self.frequencies() / SPEED_OF_LIGHT


@dataclass(frozen=True)
class VolumeGrid:
    """Image voxel lattice: n_z range bins by n_y x n_x transverse voxels.

    Range bins run from z_min to z_max inclusive. Transverse voxel
    centers are symmetric about the z axis with spacings (dy, dx);
    use :func:`volume_for_aperture` to get the spacing that the FFT
    operators evaluate exactly (aperture extent / voxel count).
    """

    n_z: int
    n_y: int
    n_x: int
    z_min: float
    z_max: float
    dy: float
    dx: float

    def __post_init__(self) -> None:
        _require(self.n_z >= 1 and self.n_y >= 1 and self.n_x >= 1, "voxel counts must be >= 1")
        _require(self.dy > 0 and self.dx > 0, "voxel spacings must be positive")
        _require(math.isfinite(self.z_min) and math.isfinite(self.z_max), "z bounds must be finite")
        if self.n_z == 1:
            _require(self.z_min == self.z_max, "single range bin needs z_min == z_max")
        else:
            _require(self.z_min < self.z_max, "need z_min < z_max for n_z >= 2")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_z, self.n_y, self.n_x)

    @property
    def dz(self) -> float:
        """Range bin spacing, 0.0 for a single bin."""
        if self.n_z == 1:
            return 0.0
        return (self.z_max - self.z_min) / (self.n_z - 1)

    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_z)

    def y(self) -> np.ndarray:
        return _centered_axis(self.n_y, self.dy)

    def x(self) -> np.ndarray:
        return _centered_axis(self.n_x, self.dx)


def volume_for_aperture(
    aperture: ApertureGrid,
    n_z: int,
    n_y: int,
    n_x: int,
    z_min: float,
    z_max: float,
) -> VolumeGrid:
    """Volume whose transverse lattice the spectral operators hit exactly.

    The transverse spacing is the aperture's periodic extent divided by
    the voxel count per axis, so changing the image size rescales the
    lattice inside the fixed aperture footprint.
    """
    if min(z_min, z_max) <= aperture.plane_z <= max(z_min, z_max):
        raise ValueError("volume must not intersect the array plane z = %g" % aperture.plane_z)
    return VolumeGrid(
        n_z=n_z,
        n_y=n_y,
        n_x=n_x,
        z_min=z_min,
        z_max=z_max,
        dy=aperture.extent_y / n_y,
        dx=aperture.extent_x / n_x,
    )


def validate_data_cube(cube: np.ndarray, aperture: ApertureGrid, freqs: FrequencyGrid) -> np.ndarray:
    """Check shape (n_f, n_y, n_x) and return the cube as complex128."""
    cube = np.asarray(cube)
    expected = (freqs.n_f, aperture.n_y, aperture.n_x)
    if cube.shape != expected:
        raise ValueError(f"data cube shape {cube.shape} does not match grids {expected}")
    return np.ascontiguousarray(cube, dtype=np.complex128)


def validate_image_cube(cube: np.ndarray, volume: VolumeGrid) -> np.ndarray:
    """Check shape (n_z, n_y, n_x) and return the cube as complex128."""
    cube = np.asarray(cube)
    if cube.shape != volume.shape:
        raise ValueError(f"image cube shape {cube.shape} does not match volume {volume.shape}")
    return np.ascontiguousarray(cube, dtype=np.complex128)

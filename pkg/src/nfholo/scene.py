"""Point-scatterer scenes and the spherical-wave data model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ApertureGrid, FrequencyGrid, VolumeGrid


@dataclass(frozen=True)
class PointScene:
    """Discrete point scatterers: positions (n, 3) as x, y, z and complex amplitudes (n,)."""

    positions: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.float64)
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (n, 3)")
        if amp.shape != (pos.shape[0],):
            raise ValueError("amplitudes must have shape (n,)")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(amp.view(np.float64)))):
            raise ValueError("scene values must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_points(cls, points) -> "PointScene":
        """Build from an iterable of (x, y, z, amplitude) tuples."""
        pts = list(points)
        if not pts:
            return cls(np.zeros((0, 3)), np.zeros((0,), dtype=np.complex128))
        pos = np.array([[p[0], p[1], p[2]] for p in pts], dtype=np.float64)
        amp = np.array([p[3] for p in pts], dtype=np.complex128)
        return cls(pos, amp)

    def __len__(self) -> int:
        return self.positions.shape[0]


def simulate_scatter(scene: PointScene, aperture: ApertureGrid, freqs: FrequencyGrid) -> np.ndarray:
    """Round-trip spherical-wave data for a point scene.

    Each scatterer contributes amplitude * exp(-2j * k * R) at every
    element and frequency, with R the element-to-scatterer distance.
    No spreading loss is modeled. Accumulation is scatterer-major in a
    fixed order, so results are bit-reproducible.

    Returns
    -------
    ndarray
        Data cube of shape (n_f, n_y, n_x), complex128.
    """
    if len(scene) and np.any(scene.positions[:, 2] == aperture.plane_z):
        raise ValueError("scatterer lies on the array plane")
    ks = freqs.wavenumbers()
    ex = aperture.x()[None, :]
    ey = aperture.y()[:, None]
    out = np.zeros((freqs.n_f, aperture.n_y, aperture.n_x), dtype=np.complex128)
    for pos, amp in zip(scene.positions, scene.amplitudes):
        dist = np.sqrt((ex - pos[0]) ** 2 + (ey - pos[1]) ** 2 + (pos[2] - aperture.plane_z) ** 2)
        out += amp * np.exp(-2j * ks[:, None, None] * dist[None, :, :])
    return out


def add_noise(cube: np.ndarray, snr_db, seed=0) -> np.ndarray:
    """Add circular complex white Gaussian noise at the given SNR in dB.

    SNR is mean signal power over noise power. ``snr_db=None`` (or
    ``inf``) returns an unmodified copy.
    """
    cube = np.asarray(cube, dtype=np.complex128)
    if snr_db is None or np.isinf(snr_db):
        return cube.copy()
    p_signal = float(np.mean(np.abs(cube) ** 2))
    if p_signal == 0.0:
        raise ValueError("cannot set an SNR against all-zero data")
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(p_signal * 10.0 ** (-snr_db / 10.0) / 2.0)
    noise = rng.standard_normal(cube.shape) + 1j * rng.standard_normal(cube.shape)
    return cube + sigma * noise


def rasterize(scene: PointScene, volume: VolumeGrid) -> np.ndarray:
    """Deposit scene amplitudes onto nearest voxels; collisions sum.

    Every scatterer must round to a voxel inside the volume.
    """
    out = np.zeros(volume.shape, dtype=np.complex128)
    if not len(scene):
        return out
    axes = (volume.z(), volume.y(), volume.x())
    steps = (volume.dz, volume.dy, volume.dx)
    coords = scene.positions[:, [2, 1, 0]]  # to (z, y, x) order
    idx = np.zeros((len(scene), 3), dtype=np.int64)
    for a in range(3):
        if steps[a] == 0.0:  # degenerate single-bin axis
            if np.any(np.abs(coords[:, a] - axes[a][0]) > 1e-9 * max(1.0, abs(axes[a][0]))):
                raise ValueError("scatterer outside the volume")
            continue
        idx[:, a] = np.rint((coords[:, a] - axes[a][0]) / steps[a]).astype(np.int64)
        if np.any(idx[:, a] < 0) or np.any(idx[:, a] >= volume.shape[a]):
            raise ValueError("scatterer outside the volume")
    np.add.at(out, (idx[:, 0], idx[:, 1], idx[:, 2]), scene.amplitudes)
    return out

"""Plane-wave spectral tools: axes, dispersion, and centered unitary FFTs.

All 2-D transforms here are unitary (norm="ortho") and carry a centering
phase so that they approximate the continuous transform of a field
sampled on a grid symmetric about the origin. With that convention a
forward/inverse round trip is exact and the adjoint of each transform is
its conjugate, which the operator pairs rely on.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

_FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Cap the worker count scipy's pooled FFTs may use."""
    global _FFT_WORKERS
    if int(n) < 1:
        raise ValueError("worker count must be >= 1")
    _FFT_WORKERS = int(n)


def fft_workers() -> int:
    return _FFT_WORKERS


def spectral_axes(n: int, pitch: float) -> np.ndarray:
    """Angular spatial-frequency axis in transform index order, rad/m.

    Index m maps to 2*pi*m'/(n*pitch) with m' the signed alias of m.
    The Nyquist bin of an even-length axis uses the positive
    representative (+pi/pitch); forward and inverse transforms share it,
    so the choice cancels in round trips.
    """
    if n < 1:
        raise ValueError("axis length must be >= 1")
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    idx = np.arange(n, dtype=np.int64)
    idx = np.where(idx > n // 2, idx - n, idx)
    return 2.0 * np.pi * idx / (n * pitch)


def evanescent_threshold(k):
    """Cutoff on 4k^2 - kx^2 - ky^2 below which a bin is treated as evanescent."""
    return 1e-9 * (2.0 * np.asarray(k)) ** 2


def dispersion_kz(k, kx, ky):
    """Range wavenumber kz = sqrt(4k^2 - kx^2 - ky^2) with a propagation flag.

    Parameters
    ----------
    k, kx, ky : array_like
        Round-trip wavenumber and transverse spatial frequencies, rad/m.
        Broadcast against each other.

    Returns
    -------
    kz : ndarray
        sqrt(4k^2 - kx^2 - ky^2) where propagating, 0 elsewhere.
    propagating : ndarray of bool
        True where the argument exceeds the evanescent threshold.
    """
    k = np.asarray(k, dtype=float)
    arg = 4.0 * k * k - np.asarray(kx, dtype=float) ** 2 - np.asarray(ky, dtype=float) ** 2
    propagating = arg > evanescent_threshold(k)
    kz = np.sqrt(np.where(propagating, arg, 0.0))
    return kz, propagating


def jacobian(k, kx, ky):
    """Band-change weight J = 4k/kz, the dkz -> dk substitution factor.

    J >= 2 everywhere it is defined, reaching 2 on axis. Raises
    ValueError if any input bin is evanescent or on the cone boundary,
    where the weight is undefined; vectorized callers mask first.
    """
    kz, propagating = dispersion_kz(k, kx, ky)
    if not np.all(propagating):
        raise ValueError("jacobian undefined for evanescent spectral bins")
    return 4.0 * np.asarray(k, dtype=float) / kz


class SpectralPlan:
    """Cached 2-D spectral geometry for one planar grid.

    Holds the spectral axes for an (n_y, n_x) grid with the given
    pitches and provides the centered unitary transform pair. Arrays
    with extra leading axes are transformed slice-wise.
    """

    def __init__(self, n_y: int, n_x: int, pitch_y: float, pitch_x: float):
        self.n_y = int(n_y)
        self.n_x = int(n_x)
        self.pitch_y = float(pitch_y)
        self.pitch_x = float(pitch_x)
        self.kx = spectral_axes(self.n_x, self.pitch_x)
        self.ky = spectral_axes(self.n_y, self.pitch_y)
        kxx, kyy = np.meshgrid(self.kx, self.ky, indexing="xy")
        off_x = 0.5 * (self.n_x - 1) * self.pitch_x
        off_y = 0.5 * (self.n_y - 1) * self.pitch_y
        self.phase = np.exp(1j * (kxx * off_x + kyy * off_y))
        self._krho2 = kxx * kxx + kyy * kyy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_y, self.n_x)

    def fft2(self, u: np.ndarray) -> np.ndarray:
        """Centered unitary 2-D FFT over the last two axes."""
        u = np.asarray(u)
        if u.shape[-2:] != self.shape:
            raise ValueError(f"trailing dimensions {u.shape[-2:]} do not match plan {self.shape}")
        return sfft.fft2(u, axes=(-2, -1), norm="ortho", workers=_FFT_WORKERS) * self.phase

    def ifft2(self, spec: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fft2`; exact round trip in floating point."""
        spec = np.asarray(spec)
        if spec.shape[-2:] != self.shape:
            raise ValueError(f"trailing dimensions {spec.shape[-2:]} do not match plan {self.shape}")
        return sfft.ifft2(spec * np.conj(self.phase), axes=(-2, -1), norm="ortho", workers=_FFT_WORKERS)

    def kz_and_mask(self, k: float) -> tuple[np.ndarray, np.ndarray]:
        """kz mesh and propagating mask for one round-trip wavenumber."""
        arg = 4.0 * k * k - self._krho2
        propagating = arg > evanescent_threshold(k)
        kz = np.sqrt(np.where(propagating, arg, 0.0))
        return kz, propagating


def resize_spectrum(spec: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Central crop or zero-pad of a 2-D spectrum, per trailing axis.

    Operates in transform index order on the last two axes; leading axes
    pass through. Cropping to a smaller grid and padding back are mutual
    transposes, which keeps operator pairs built on them adjoint-exact.
    """
    spec = np.asarray(spec)
    m_y, m_x = int(shape[0]), int(shape[1])
    n_y, n_x = spec.shape[-2:]
    if m_y < 1 or m_x < 1:
        raise ValueError("target shape must be positive")
    if (m_y, m_x) == (n_y, n_x):
        return spec.copy()
    shifted = sfft.fftshift(spec, axes=(-2, -1))
    out = np.zeros(spec.shape[:-2] + (m_y, m_x), dtype=spec.dtype)
    # copy the overlapping central block, whichever grid is larger per axis
    cy_in, cy_out = n_y // 2, m_y // 2
    cx_in, cx_out = n_x // 2, m_x // 2
    h = min(n_y, m_y)
    w = min(n_x, m_x)
    ys_in = cy_in - h // 2
    ys_out = cy_out - h // 2
    xs_in = cx_in - w // 2
    xs_out = cx_out - w // 2
    out[..., ys_out : ys_out + h, xs_out : xs_out + w] = shifted[..., ys_in : ys_in + h, xs_in : xs_in + w]
    return sfft.ifftshift(out, axes=(-2, -1))

"""NumPy fallback for the compiled kernels in `nfholo._core`.

Same signatures and same results; used when the extension is not built
or when ``NFHOLO_FORCE_NUMPY=1`` is set.
"""

from __future__ import annotations

import numpy as np


def contract(kernel: np.ndarray, x: np.ndarray, conjugate: bool = False) -> np.ndarray:
    """out[a, p] = sum_b kernel[a, b, p] * x[b, p], optionally conj(kernel)."""
    if kernel.shape[1:] != x.shape:
        raise ValueError("operand shape does not match kernel")
    if conjugate:
        # sum_b conj(K) x = conj(sum_b K conj(x)); avoids conjugating the big table
        return np.conj(np.einsum("abp,bp->ap", kernel, np.conj(x)))
    return np.einsum("abp,bp->ap", kernel, x)


def stolt_gather(lines: np.ndarray, idx: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Windowed-sinc gather with negative start indices marking dead targets."""
    n_lines, n_t = idx.shape
    n_taps = taps.shape[2]
    if lines.shape[0] != n_lines or taps.shape[:2] != (n_lines, n_t):
        raise ValueError("index/tap table shapes do not match lines")
    rows = np.arange(n_lines)[:, None]
    safe = np.maximum(idx, 0)
    out = np.zeros((n_lines, n_t), dtype=np.complex128)
    for n in range(n_taps):
        out += taps[:, :, n] * lines[rows, safe + n]
    out[idx < 0] = 0.0
    return out

"""Aperture undersampling schemes and mask application.

Compression happens at acquisition: a boolean mask over antenna
positions selects which elements are measured. Applying a mask is the
orthogonal projection that zero-fills unmeasured positions, which is
what both operator pairs embed on their data side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ApertureGrid


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SamplingMask:
    """Boolean aperture selection plus the recipe that produced it."""

    mask: np.ndarray
    scheme: str
    ratio: float
    group: tuple[int, int] | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ValueError("mask must be 2-D (n_y, n_x)")
        object.__setattr__(self, "mask", m)

    @property
    def selected(self) -> int:
        return int(self.mask.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape


def full_mask(aperture: ApertureGrid) -> SamplingMask:
    return SamplingMask(np.ones(aperture.shape, dtype=bool), "full", 1.0)


def mask_random(aperture: ApertureGrid, ratio: float, seed=0) -> SamplingMask:
    """Totally random selection of exactly round(ratio * N) positions."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must be in [0, 1]")
    n_y, n_x = aperture.shape
    total = n_y * n_x
    count = int(round(ratio * total))
    rng = _as_rng(seed)
    chosen = rng.choice(total, size=count, replace=False)
    flat = np.zeros(total, dtype=bool)
    flat[chosen] = True
    return SamplingMask(flat.reshape(n_y, n_x), "random", float(ratio), None, seed if isinstance(seed, int) else None)


def mask_uniform_random(
    aperture: ApertureGrid,
    ratio: float,
    group: tuple[int, int] = (4, 2),
    seed=0,
) -> SamplingMask:
    """Stratified random selection: a fixed random count per tiling group.

    The aperture is tiled by disjoint (g_y, g_x) groups of contiguous
    positions and exactly round(ratio * group_size) positions are drawn
    uniformly inside every group, giving a more even illumination than
    a totally random draw at the same ratio.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must be in [0, 1]")
    g_y, g_x = int(group[0]), int(group[1])
    n_y, n_x = aperture.shape
    if g_y < 1 or g_x < 1 or n_y % g_y or n_x % g_x:
        raise ValueError(f"group shape {g_y}x{g_x} must tile the {n_y}x{n_x} aperture")
    per_group = int(round(ratio * g_y * g_x))
    if per_group < 1:
        raise ValueError("ratio selects no positions per group; enlarge the groups or the ratio")
    rng = _as_rng(seed)
    mask = np.zeros((n_y, n_x), dtype=bool)
    for by in range(0, n_y, g_y):
        for bx in range(0, n_x, g_x):
            chosen = rng.choice(g_y * g_x, size=per_group, replace=False)
            block = np.zeros(g_y * g_x, dtype=bool)
            block[chosen] = True
            mask[by : by + g_y, bx : bx + g_x] = block.reshape(g_y, g_x)
    return SamplingMask(mask, "uniform-random", float(ratio), (g_y, g_x), seed if isinstance(seed, int) else None)


def apply_mask(cube: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """Zero-fill projection of a data cube onto the measured positions."""
    cube = np.asarray(cube)
    if cube.shape[-2:] != mask.shape:
        raise ValueError("cube trailing dimensions do not match the mask")
    return cube * mask.mask

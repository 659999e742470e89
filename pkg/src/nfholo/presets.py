"""Ready-made run configurations for the CLI.

All presets share the desk-scale acquisition: a 64 x 64 element
aperture at 3 mm pitch swept over 72-76 GHz in 64 steps, imaging a
volume from 0.3 m to 0.6 m in front of the array. They differ in image
size and in which command they are tuned for:

- ``fig9-small`` / ``fig9-medium`` / ``fig9-large``: five-point scenes
  on 16x16x16, 16x32x32, and 16x64x64 voxel grids, for reconstruction
  and solver-timing comparisons across image sizes.
- ``fig3-psf``: point-spread-function / coherence measurement at 12.5%
  sampling with repeated random masks.
- ``fig10-rmse-sweep``: reconstruction-error sweep over an SNR grid and
  a data-ratio grid.

The scene scatterers sit exactly on voxel centers so that rasterized
ground truth and argmax checks are unambiguous.
"""

from __future__ import annotations

from .fileio import RunConfig, parse_config_text
from .geometry import VolumeGrid
from .scene import PointScene

PRESET_NAMES = (
    "fig9-small",
    "fig9-medium",
    "fig9-large",
    "fig3-psf",
    "fig10-rmse-sweep",
)

_SIZES = {
    "fig9-small": (16, 16, 16),
    "fig9-medium": (16, 32, 32),
    "fig9-large": (16, 64, 64),
    "fig3-psf": (16, 32, 32),
    "fig10-rmse-sweep": (16, 32, 32),
}


def five_point_indices(shape) -> list:
    """Voxel indices of the standard five-point test scene: one center
    point plus four spread across the off-center octants."""
    nz, ny, nx = shape
    return [
        (nz // 2, ny // 2, nx // 2),
        (nz // 4, ny // 4, nx // 4),
        (nz // 4, 3 * ny // 4, 3 * nx // 4),
        (3 * nz // 4, ny // 4, 3 * nx // 4),
        (3 * nz // 4, 3 * ny // 4, nx // 4),
    ]


def five_point_scene(volume: VolumeGrid) -> PointScene:
    """Unit-amplitude scatterers at the five standard voxel centers."""
    z, y, x = volume.z(), volume.y(), volume.x()
    return PointScene.from_points(
        (x[ix], y[iy], z[iz], 1.0 + 0.0j) for iz, iy, ix in five_point_indices(volume.shape)
    )


def _points_value(volume: VolumeGrid) -> str:
    scene = five_point_scene(volume)
    # plain-float repr so the inline-points parser can read the value back
    return "; ".join(
        f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},{float(a.real)!r},{float(a.imag)!r}"
        for p, a in zip(scene.positions, scene.amplitudes)
    )


def _base_sections(name: str) -> dict:
    nz, ny, nx = _SIZES[name]
    volume = VolumeGrid(
        n_z=nz, n_y=ny, n_x=nx, z_min=0.3, z_max=0.6,
        dy=64 * 0.003 / ny, dx=64 * 0.003 / nx,
    )
    return {
        "aperture": {"n_x": 64, "n_y": 64, "pitch_x": 0.003, "pitch_y": 0.003, "plane_z": 0.0},
        "frequency": {"f_start": "72e9", "f_stop": "76e9", "n_f": 64},
        "volume": {"n_z": nz, "n_y": ny, "n_x": nx, "z_min": 0.3, "z_max": 0.6},
        "scene": {"points": _points_value(volume), "snr_db": "inf", "noise_seed": 0},
        "mask": {"scheme": "full", "ratio": 1.0, "group_y": 4, "group_x": 2, "seed": 0},
        "solver": {"method": "holo", "max_outer": 60},
        "psf": {"trials": 50, "ratio": 0.125, "exclusion_radius": 1, "seed": 0},
        "bench": {"mode": "timing", "sizes": "16x16x16, 16x32x32, 16x64x64",
                  "repeats": 3, "iterations": 10},
        "output": {"dir": ".", "prefix": name, "dtype": "c128",
                   "floor_db": -30.0, "projections": "true"},
    }


def preset_text(name: str) -> str:
    """Full configuration text for a named preset."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    sections = _base_sections(name)
    if name == "fig3-psf":
        sections["mask"].update({"scheme": "uniform-random", "ratio": 0.125})
    elif name == "fig10-rmse-sweep":
        sections["mask"].update({"scheme": "uniform-random", "ratio": 0.3})
        sections["scene"]["snr_db"] = 20.0
        sections["solver"]["max_outer"] = 30
        sections["bench"] = {"mode": "rmse", "snr_grid": "10, 20, 30",
                             "ratio_grid": "0.3, 0.5", "seeds": 3}
    else:  # imaging scenes: 30% uniform-random acquisition for the solver
        sections["mask"].update({"scheme": "uniform-random", "ratio": 0.3})
    lines = []
    for section, entries in sections.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {value}" for key, value in entries.items())
        lines.append("")
    return "\n".join(lines)


def preset_config(name: str) -> RunConfig:
    """Parsed, fully resolved configuration for a named preset."""
    return parse_config_text(preset_text(name), origin=f"<preset {name}>")

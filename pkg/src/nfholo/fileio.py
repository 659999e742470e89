"""File formats and run configuration.

Covers the binary complex-cube container (magic ``NFC1``), the plain
text run configuration with strict unknown-key checking, scene and mask
text files, CSV report writers, and 8-bit grayscale projection images.
All writers are deterministic: identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import ApertureGrid, FrequencyGrid, VolumeGrid, volume_for_aperture
from .sampling import SamplingMask
from .scene import PointScene
from .solver import SolverParams


class ConfigError(Exception):
    """Invalid configuration or malformed input file (CLI exit code 2)."""


class NumericError(Exception):
    """Numerical failure in a computation (CLI exit code 3)."""


# ---------------------------------------------------------------------------
# binary cube container

_MAGIC = b"NFC1"
_VERSION = 1
_DTYPE_CODES = {0: np.dtype("<c8"), 1: np.dtype("<c16")}
_DTYPE_TO_CODE = {np.dtype(np.complex64): 0, np.dtype(np.complex128): 1}
_AXIS_CODES = {"data": 0, "image": 1}
_CODE_TO_AXIS = {v: k for k, v in _AXIS_CODES.items()}


@dataclass(frozen=True)
class CubeFile:
    """A complex 3-D cube plus its axis-order tag and grid metadata."""

    cube: np.ndarray
    axis_order: str  # "data" -> (f, y, x), "image" -> (z, y, x)
    metadata: dict


def grid_metadata(aperture=None, freqs=None, volume=None) -> dict:
    """Nested string dict describing the generating grids; floats use
    repr so parsing reproduces them exactly."""
    meta: dict = {}
    if aperture is not None:
        meta["aperture"] = {
            "n_x": str(aperture.n_x),
            "n_y": str(aperture.n_y),
            "pitch_x": repr(float(aperture.pitch_x)),
            "pitch_y": repr(float(aperture.pitch_y)),
            "plane_z": repr(float(aperture.plane_z)),
        }
    if freqs is not None:
        meta["frequency"] = {
            "f_start": repr(float(freqs.f_start)),
            "f_stop": repr(float(freqs.f_stop)),
            "n_f": str(freqs.n_f),
        }
    if volume is not None:
        meta["volume"] = {
            "n_z": str(volume.n_z),
            "n_y": str(volume.n_y),
            "n_x": str(volume.n_x),
            "z_min": repr(float(volume.z_min)),
            "z_max": repr(float(volume.z_max)),
            "dy": repr(float(volume.dy)),
            "dx": repr(float(volume.dx)),
        }
    return meta


def aperture_from_metadata(meta: dict) -> ApertureGrid:
    try:
        sec = meta["aperture"]
        return ApertureGrid(
            n_x=int(sec["n_x"]),
            n_y=int(sec["n_y"]),
            pitch_x=float(sec["pitch_x"]),
            pitch_y=float(sec["pitch_y"]),
            plane_z=float(sec["plane_z"]),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cube metadata lacks a valid aperture block: {exc}") from exc


def frequency_from_metadata(meta: dict) -> FrequencyGrid:
    try:
        sec = meta["frequency"]
        return FrequencyGrid(
            f_start=float(sec["f_start"]),
            f_stop=float(sec["f_stop"]),
            n_f=int(sec["n_f"]),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cube metadata lacks a valid frequency block: {exc}") from exc


def volume_from_metadata(meta: dict) -> VolumeGrid:
    try:
        sec = meta["volume"]
        return VolumeGrid(
            n_z=int(sec["n_z"]),
            n_y=int(sec["n_y"]),
            n_x=int(sec["n_x"]),
            z_min=float(sec["z_min"]),
            z_max=float(sec["z_max"]),
            dy=float(sec["dy"]),
            dx=float(sec["dx"]),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cube metadata lacks a valid volume block: {exc}") from exc


def _metadata_to_text(meta: dict) -> str:
    lines = []
    for section, entries in meta.items():
        lines.append(f"[{section}]")
        for key, value in entries.items():
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + ("\n" if lines else "")


def _metadata_from_text(text: str) -> dict:
    meta: dict = {}
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            meta.setdefault(section, {})
        elif "=" in line and section is not None:
            key, _, value = line.partition("=")
            meta[section][key.strip()] = value.strip()
        else:
            raise ConfigError(f"malformed cube metadata line: {raw!r}")
    return meta


def write_cube(path, cube: np.ndarray, axis_order: str, metadata: dict | None = None) -> None:
    """Write a complex cube with its metadata block.

    complex64 cubes keep dtype code 0, everything else is stored as
    complex128 (code 1); payload is row-major, last axis fastest,
    little-endian interleaved real/imaginary.
    """
    cube = np.asarray(cube)
    if cube.ndim != 3:
        raise ValueError("expected a 3-D cube")
    if axis_order not in _AXIS_CODES:
        raise ValueError(f"axis_order must be one of {sorted(_AXIS_CODES)}")
    code = _DTYPE_TO_CODE.get(cube.dtype, 1)
    stored = np.ascontiguousarray(cube, dtype=_DTYPE_CODES[code])
    meta_bytes = _metadata_to_text(metadata or {}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(bytes([_VERSION, code, _AXIS_CODES[axis_order]]))
        fh.write(struct.pack("<3I", *stored.shape))
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(stored.tobytes())


def read_cube(path) -> CubeFile:
    """Read a cube written by :func:`write_cube`; strict on magic,
    version, and payload length."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read cube file {path}: {exc}") from exc
    if len(blob) < 19 or blob[:4] != _MAGIC:
        raise ConfigError(f"{path}: not a cube file (bad magic)")
    version, dtype_code, axis_code = blob[4], blob[5], blob[6]
    if version != _VERSION:
        raise ConfigError(f"{path}: unsupported cube version {version}")
    if dtype_code not in _DTYPE_CODES:
        raise ConfigError(f"{path}: unknown dtype code {dtype_code}")
    if axis_code not in _CODE_TO_AXIS:
        raise ConfigError(f"{path}: unknown axis-order code {axis_code}")
    dims = struct.unpack_from("<3I", blob, 7)
    (meta_len,) = struct.unpack_from("<I", blob, 19)
    meta_end = 23 + meta_len
    if meta_end > len(blob):
        raise ConfigError(f"{path}: truncated metadata block")
    metadata = _metadata_from_text(blob[23:meta_end].decode("utf-8"))
    dtype = _DTYPE_CODES[dtype_code]
    expected = int(np.prod(dims)) * dtype.itemsize
    payload = blob[meta_end:]
    if len(payload) != expected:
        raise ConfigError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    cube = np.frombuffer(payload, dtype=dtype).reshape(dims)
    return CubeFile(cube=cube, axis_order=_CODE_TO_AXIS[axis_code], metadata=metadata)


# ---------------------------------------------------------------------------
# scene text files: one scatterer per line, "x y z re im"


def parse_scene_text(text: str, origin: str = "<scene>") -> PointScene:
    positions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ConfigError(
                f"{origin}:{lineno}: expected 'x y z re im', got {len(parts)} fields"
            )
        try:
            x, y, z, re_part, im_part = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"{origin}:{lineno}: {exc}") from exc
        positions.append((x, y, z, complex(re_part, im_part)))
    if not positions:
        raise ConfigError(f"{origin}: scene holds no scatterers")
    return PointScene.from_points(positions)


def parse_inline_points(spec: str, origin: str = "<points>") -> PointScene:
    """Scene from an inline string: 'x,y,z,re,im' groups separated by ';'."""
    positions = []
    for group in spec.split(";"):
        group = group.strip()
        if not group:
            continue
        parts = [p.strip() for p in group.split(",")]
        if len(parts) != 5:
            raise ConfigError(f"{origin}: expected 'x,y,z,re,im', got {group!r}")
        try:
            x, y, z, re_part, im_part = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"{origin}: {exc}") from exc
        positions.append((x, y, z, complex(re_part, im_part)))
    if not positions:
        raise ConfigError(f"{origin}: no scatterers given")
    return PointScene.from_points(positions)


def read_scene(path) -> PointScene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scene file {path}: {exc}") from exc
    return parse_scene_text(text, str(path))


def write_scene(path, scene: PointScene) -> None:
    # plain-float repr survives the parse round trip; numpy scalar reprs
    # ("np.float64(...)") would not
    lines = [
        f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r} {float(a.real)!r} {float(a.imag)!r}"
        for p, a in zip(scene.positions, scene.amplitudes)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# mask text files: key=value header, then row-major 0/1 lines


def write_mask(path, mask: SamplingMask) -> None:
    lines = [
        f"scheme={mask.scheme}",
        f"ratio={repr(mask.ratio)}",
        "group=none" if mask.group is None else f"group={mask.group[0]}x{mask.group[1]}",
        "seed=none" if mask.seed is None else f"seed={mask.seed}",
    ]
    lines.extend("".join("1" if v else "0" for v in row) for row in mask.mask)
    Path(path).write_text("\n".join(lines) + "\n")


def read_mask(path) -> SamplingMask:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read mask file {path}: {exc}") from exc
    header: dict = {}
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) <= {"0", "1"}:
            rows.append([c == "1" for c in line])
        elif "=" in line and not rows:
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
        else:
            raise ConfigError(f"{path}:{lineno}: malformed mask line {raw!r}")
    if not rows:
        raise ConfigError(f"{path}: mask holds no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigError(f"{path}: mask rows have inconsistent lengths {sorted(widths)}")
    group = None
    if header.get("group", "none") != "none":
        try:
            gy, gx = header["group"].split("x")
            group = (int(gy), int(gx))
        except ValueError as exc:
            raise ConfigError(f"{path}: bad group field {header['group']!r}") from exc
    seed = None if header.get("seed", "none") == "none" else int(header["seed"])
    try:
        ratio = float(header.get("ratio", "1.0"))
    except ValueError as exc:
        raise ConfigError(f"{path}: bad ratio field") from exc
    return SamplingMask(
        mask=np.array(rows, dtype=bool),
        scheme=header.get("scheme", "unknown"),
        ratio=ratio,
        group=group,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# run configuration


def _as_int(s: str) -> int:
    return int(s)


def _as_float(s: str) -> float:
    value = float(s)
    if math.isnan(value):
        raise ValueError("nan is not a valid value")
    return value


def _as_snr(s: str) -> float:
    if s.lower() in ("inf", "none", "off"):
        return math.inf
    return _as_float(s)


def _as_auto_float(s: str):
    if s.lower() == "auto":
        return None
    return _as_float(s)


def _as_bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _as_str(s: str) -> str:
    return s


def _as_choice(*options):
    def conv(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s

    return conv


def _as_size(s: str):
    parts = s.lower().split("x")
    if len(parts) != 3:
        raise ValueError(f"expected ZxYxX, got {s!r}")
    return tuple(int(p) for p in parts)


def _as_sizes(s: str):
    return tuple(_as_size(part.strip()) for part in s.split(",") if part.strip())


def _as_floats(s: str):
    return tuple(_as_float(part.strip()) for part in s.split(",") if part.strip())


def _as_voxel(s: str):
    if s.lower() == "auto":
        return None
    parts = s.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected 'z,y,x' or auto, got {s!r}")
    return tuple(int(p) for p in parts)


_SCHEMA = {
    "aperture": {
        "n_x": (_as_int, "64"),
        "n_y": (_as_int, "64"),
        "pitch_x": (_as_float, "0.003"),
        "pitch_y": (_as_float, "0.003"),
        "plane_z": (_as_float, "0.0"),
    },
    "frequency": {
        "f_start": (_as_float, "72e9"),
        "f_stop": (_as_float, "76e9"),
        "n_f": (_as_int, "64"),
    },
    "volume": {
        "n_z": (_as_int, "16"),
        "n_y": (_as_int, "32"),
        "n_x": (_as_int, "32"),
        "z_min": (_as_float, "0.3"),
        "z_max": (_as_float, "0.6"),
    },
    "scene": {
        "file": (_as_str, ""),
        "points": (_as_str, ""),
        "snr_db": (_as_snr, "inf"),
        "noise_seed": (_as_int, "0"),
    },
    "mask": {
        "scheme": (_as_choice("full", "random", "uniform-random"), "full"),
        "ratio": (_as_float, "1.0"),
        "group_y": (_as_int, "4"),
        "group_x": (_as_int, "2"),
        "seed": (_as_int, "0"),
        "file": (_as_str, ""),
    },
    "solver": {
        "lam_l1": (_as_auto_float, "auto"),
        "lam_tv": (_as_auto_float, "auto"),
        "nu": (_as_auto_float, "auto"),
        "max_outer": (_as_int, "60"),
        "alpha": (_as_float, "0.05"),
        "beta": (_as_float, "0.6"),
        "max_backtracks": (_as_int, "24"),
        "grad_tol": (_as_float, "1e-6"),
        "method": (_as_choice("holo", "omegak"), "holo"),
        "n_taps": (_as_int, "8"),
    },
    "psf": {
        "trials": (_as_int, "50"),
        "ratio": (_as_float, "0.125"),
        "exclusion_radius": (_as_int, "1"),
        "seed": (_as_int, "0"),
        "voxel": (_as_voxel, "auto"),
    },
    "bench": {
        "mode": (_as_choice("timing", "rmse"), "timing"),
        "sizes": (_as_sizes, "16x16x16, 16x32x32, 16x64x64"),
        "repeats": (_as_int, "3"),
        "iterations": (_as_int, "10"),
        "snr_grid": (_as_floats, "20"),
        "ratio_grid": (_as_floats, "0.3, 0.5"),
        "seeds": (_as_int, "5"),
    },
    "output": {
        "dir": (_as_str, "."),
        "prefix": (_as_str, "run"),
        "dtype": (_as_choice("c64", "c128"), "c128"),
        "floor_db": (_as_float, "-30.0"),
        "projections": (_as_bool, "true"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration shared by every CLI command."""

    aperture: ApertureGrid
    freqs: FrequencyGrid
    volume: VolumeGrid
    scene_file: str
    scene_points: str
    snr_db: float
    noise_seed: int
    mask_scheme: str
    mask_ratio: float
    mask_group: tuple
    mask_seed: int
    mask_file: str
    solver: SolverParams
    method: str
    n_taps: int
    psf_trials: int
    psf_ratio: float
    psf_exclusion: int
    psf_seed: int
    psf_voxel: tuple | None
    bench_mode: str
    bench_sizes: tuple
    bench_repeats: int
    bench_iterations: int
    bench_snr_grid: tuple
    bench_ratio_grid: tuple
    bench_seeds: int
    out_dir: str
    out_prefix: str
    out_dtype: str
    floor_db: float
    write_projections: bool

    def with_seed(self, seed: int) -> "RunConfig":
        """Override every stochastic seed at once (the --seed flag)."""
        return replace(self, noise_seed=seed, mask_seed=seed, psf_seed=seed)

    def output_path(self, name: str) -> Path:
        return Path(self.out_dir) / f"{self.out_prefix}-{name}"

    @property
    def out_np_dtype(self):
        return np.complex64 if self.out_dtype == "c64" else np.complex128


def _build_config(values: dict) -> RunConfig:
    ap = values["aperture"]
    fr = values["frequency"]
    vol = values["volume"]
    sc = values["scene"]
    mk = values["mask"]
    sv = values["solver"]
    ps = values["psf"]
    bn = values["bench"]
    out = values["output"]
    try:
        aperture = ApertureGrid(
            n_x=ap["n_x"], n_y=ap["n_y"],
            pitch_x=ap["pitch_x"], pitch_y=ap["pitch_y"], plane_z=ap["plane_z"],
        )
        freqs = FrequencyGrid(f_start=fr["f_start"], f_stop=fr["f_stop"], n_f=fr["n_f"])
        volume = volume_for_aperture(
            aperture, n_z=vol["n_z"], n_y=vol["n_y"], n_x=vol["n_x"],
            z_min=vol["z_min"], z_max=vol["z_max"],
        )
        solver = SolverParams(
            lam_l1=sv["lam_l1"], lam_tv=sv["lam_tv"], nu=sv["nu"],
            max_outer=sv["max_outer"], alpha=sv["alpha"], beta=sv["beta"],
            max_backtracks=sv["max_backtracks"], grad_tol=sv["grad_tol"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        aperture=aperture,
        freqs=freqs,
        volume=volume,
        scene_file=sc["file"],
        scene_points=sc["points"],
        snr_db=sc["snr_db"],
        noise_seed=sc["noise_seed"],
        mask_scheme=mk["scheme"],
        mask_ratio=mk["ratio"],
        mask_group=(mk["group_y"], mk["group_x"]),
        mask_seed=mk["seed"],
        mask_file=mk["file"],
        solver=solver,
        method=sv["method"],
        n_taps=sv["n_taps"],
        psf_trials=ps["trials"],
        psf_ratio=ps["ratio"],
        psf_exclusion=ps["exclusion_radius"],
        psf_seed=ps["seed"],
        psf_voxel=ps["voxel"],
        bench_mode=bn["mode"],
        bench_sizes=bn["sizes"],
        bench_repeats=bn["repeats"],
        bench_iterations=bn["iterations"],
        bench_snr_grid=bn["snr_grid"],
        bench_ratio_grid=bn["ratio_grid"],
        bench_seeds=bn["seeds"],
        out_dir=out["dir"],
        out_prefix=out["prefix"],
        out_dtype=out["dtype"],
        floor_db=out["floor_db"],
        write_projections=out["projections"],
    )


def parse_config_text(text: str, origin: str = "<config>") -> RunConfig:
    """Parse key=value sections; unknown sections/keys and bad values are
    reported with their line number."""
    entries: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"{origin}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"{origin}:{lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in entries:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r} in [{section}]")
        entries[(section, key)] = (value.strip(), lineno)
    values: dict = {}
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (conv, default) in keys.items():
            if (section, key) in entries:
                raw_value, lineno = entries[(section, key)]
                try:
                    values[section][key] = conv(raw_value)
                except ValueError as exc:
                    raise ConfigError(
                        f"{origin}:{lineno}: bad value for {section}.{key}: {exc}"
                    ) from exc
            else:
                values[section][key] = conv(default)
    return _build_config(values)


def parse_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def render_config(cfg: RunConfig) -> str:
    """Canonical text form of a resolved configuration; parsing it back
    reproduces the same RunConfig (the effective-config echo)."""

    def fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return "inf" if math.isinf(value) else repr(value)
        if value is None:
            return "auto"
        return str(value)

    sizes = ", ".join("x".join(str(d) for d in s) for s in cfg.bench_sizes)
    sections = {
        "aperture": {
            "n_x": cfg.aperture.n_x, "n_y": cfg.aperture.n_y,
            "pitch_x": cfg.aperture.pitch_x, "pitch_y": cfg.aperture.pitch_y,
            "plane_z": cfg.aperture.plane_z,
        },
        "frequency": {
            "f_start": cfg.freqs.f_start, "f_stop": cfg.freqs.f_stop, "n_f": cfg.freqs.n_f,
        },
        "volume": {
            "n_z": cfg.volume.n_z, "n_y": cfg.volume.n_y, "n_x": cfg.volume.n_x,
            "z_min": cfg.volume.z_min, "z_max": cfg.volume.z_max,
        },
        "scene": {
            "file": cfg.scene_file, "points": cfg.scene_points,
            "snr_db": cfg.snr_db, "noise_seed": cfg.noise_seed,
        },
        "mask": {
            "scheme": cfg.mask_scheme, "ratio": cfg.mask_ratio,
            "group_y": cfg.mask_group[0], "group_x": cfg.mask_group[1],
            "seed": cfg.mask_seed, "file": cfg.mask_file,
        },
        "solver": {
            "lam_l1": cfg.solver.lam_l1, "lam_tv": cfg.solver.lam_tv, "nu": cfg.solver.nu,
            "max_outer": cfg.solver.max_outer, "alpha": cfg.solver.alpha,
            "beta": cfg.solver.beta, "max_backtracks": cfg.solver.max_backtracks,
            "grad_tol": cfg.solver.grad_tol, "method": cfg.method, "n_taps": cfg.n_taps,
        },
        "psf": {
            "trials": cfg.psf_trials, "ratio": cfg.psf_ratio,
            "exclusion_radius": cfg.psf_exclusion, "seed": cfg.psf_seed,
            "voxel": "auto" if cfg.psf_voxel is None else ",".join(str(i) for i in cfg.psf_voxel),
        },
        "bench": {
            "mode": cfg.bench_mode, "sizes": sizes, "repeats": cfg.bench_repeats,
            "iterations": cfg.bench_iterations,
            "snr_grid": ", ".join(fmt(v) for v in cfg.bench_snr_grid),
            "ratio_grid": ", ".join(fmt(v) for v in cfg.bench_ratio_grid),
            "seeds": cfg.bench_seeds,
        },
        "output": {
            "dir": cfg.out_dir, "prefix": cfg.out_prefix, "dtype": cfg.out_dtype,
            "floor_db": cfg.floor_db, "projections": cfg.write_projections,
        },
    }
    buf = io.StringIO()
    for name, entries in sections.items():
        buf.write(f"[{name}]\n")
        for key, value in entries.items():
            buf.write(f"{key} = {fmt(value)}\n")
        buf.write("\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# CSV reports and projection images


def write_report_csv(path, report) -> None:
    """Per-iteration solve trace: iteration, objective, grad_norm, step,
    seconds (objective uses exact, unsmoothed magnitudes)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "grad_norm", "step", "seconds"])
        rows = zip(report.objective, report.grad_norm, report.step, report.seconds)
        for i, (obj, gn, st, sec) in enumerate(rows, 1):
            writer.writerow([i, repr(obj), repr(gn), repr(st), repr(sec)])


def write_rows_csv(path, header, rows) -> None:
    """Generic CSV writer; floats are emitted with repr."""

    def fmt(value):
        if isinstance(value, float):
            return repr(value)
        return value

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def save_projection_png(path, db_map: np.ndarray, floor_db: float = -30.0) -> None:
    """8-bit grayscale image of a dB map: floor_db maps to 0, 0 dB to 255."""
    db_map = np.asarray(db_map, dtype=np.float64)
    if db_map.ndim != 2:
        raise ValueError("expected a 2-D dB map")
    if not floor_db < 0:
        raise ValueError("floor_db must be negative")
    scaled = (np.clip(db_map, floor_db, 0.0) - floor_db) / (-floor_db)
    img = Image.fromarray(np.round(scaled * 255.0).astype(np.uint8), mode="L")
    img.save(path, format="PNG")

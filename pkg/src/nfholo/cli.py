"""Command-line interface.

Subcommands: ``simulate`` (scene to data cube), ``reconstruct``
(single-shot holographic or range-migration image), ``solve``
(regularized iterative reconstruction), ``psf`` (sampling/operator
coherence study), ``bench`` (timing or error sweeps, including the
compiled-vs-NumPy kernel comparison), and ``export`` (cube file to
projection images).

Every command takes ``--config PATH`` or ``--preset NAME``; ``--seed``
overrides all stochastic seeds, ``--threads`` caps FFT workers, and
``--method`` picks the operator. Exit codes: 0 success, 2 configuration
or input-file error, 3 numerical failure. Output files are byte
reproducible for fixed config and seeds, except recorded timings.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._backend import backend_name
from .analysis import (
    flop_model,
    max_projection,
    mean_psf_stats,
    offpeak_max,
    psf_column,
    rmse,
)
from .fileio import (
    ConfigError,
    NumericError,
    RunConfig,
    grid_metadata,
    parse_config,
    parse_inline_points,
    read_cube,
    read_mask,
    read_scene,
    render_config,
    save_projection_png,
    write_cube,
    write_mask,
    write_report_csv,
    write_rows_csv,
)
from .geometry import volume_for_aperture
from .holography import HoloPair, reconstruct_holo
from .omegak import OmegakPair, reconstruct_omegak
from .presets import PRESET_NAMES, five_point_scene, preset_config
from .sampling import full_mask, mask_random, mask_uniform_random, apply_mask
from .scene import add_noise, rasterize, simulate_scatter
from .solver import solve_ncg
from .spectral import set_fft_workers


def _load_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = parse_config(args.config)
    elif args.preset:
        try:
            cfg = preset_config(args.preset)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc
    else:
        raise ConfigError("a configuration is required: --config PATH or --preset NAME")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.method is not None:
        cfg = replace(cfg, method=args.method)
    return cfg


def _resolve_scene(cfg: RunConfig):
    if cfg.scene_points:
        return parse_inline_points(cfg.scene_points, "[scene] points")
    if cfg.scene_file:
        return read_scene(cfg.scene_file)
    raise ConfigError("no scene given: set [scene] points or [scene] file")


def _resolve_mask(cfg: RunConfig):
    if cfg.mask_file:
        mask = read_mask(cfg.mask_file)
        if mask.shape != cfg.aperture.shape:
            raise ConfigError(
                f"mask file shape {mask.shape} does not match aperture {cfg.aperture.shape}"
            )
        return mask
    if cfg.mask_scheme == "full":
        return full_mask(cfg.aperture)
    if cfg.mask_scheme == "random":
        return mask_random(cfg.aperture, cfg.mask_ratio, seed=cfg.mask_seed)
    return mask_uniform_random(
        cfg.aperture, cfg.mask_ratio, group=cfg.mask_group, seed=cfg.mask_seed
    )


def _make_pair(cfg: RunConfig, method: str, mask=None, volume=None):
    volume = volume if volume is not None else cfg.volume
    if method == "holo":
        return HoloPair(cfg.aperture, cfg.freqs, volume, weighting="adjoint", mask=mask)
    return OmegakPair(cfg.aperture, cfg.freqs, volume, mask=mask, n_taps=cfg.n_taps)


def _check_finite(cube: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(cube)):
        raise NumericError(f"{what} contains non-finite values")


def _prepare_outdir(cfg: RunConfig) -> None:
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)


def _echo_config(cfg: RunConfig, tag: str) -> None:
    cfg.output_path(f"{tag}-config.txt").write_text(render_config(cfg))


def _write_projections(cfg: RunConfig, cube: np.ndarray, stem: str) -> None:
    if not cfg.write_projections:
        return
    for axis, label in enumerate(("z", "y", "x") if cube.shape else ()):
        db = max_projection(cube, axis, cfg.floor_db)
        save_projection_png(cfg.output_path(f"{stem}-proj{label}.png"), db, cfg.floor_db)


def _artifact_level(image: np.ndarray) -> float:
    """Off-peak-to-peak magnitude ratio of an image cube (radius-1 lobe)."""
    mag = np.abs(image)
    peak = mag.max()
    if peak == 0:
        return 0.0
    peak_index = np.unravel_index(int(mag.argmax()), mag.shape)
    return offpeak_max(mag / peak, peak_index, exclusion_radius=1)


def _load_data(cfg: RunConfig):
    path = cfg.output_path("data.nfc")
    cube_file = read_cube(path)
    if cube_file.axis_order != "data":
        raise ConfigError(f"{path}: expected a data cube, found an image cube")
    data = np.asarray(cube_file.cube, dtype=np.complex128)
    expected = (cfg.freqs.n_f, cfg.aperture.n_y, cfg.aperture.n_x)
    if data.shape != expected:
        raise ConfigError(
            f"{path}: data shape {data.shape} does not match configured grids {expected}"
        )
    return data


def cmd_simulate(cfg: RunConfig) -> int:
    scene = _resolve_scene(cfg)
    _prepare_outdir(cfg)
    truth = rasterize(scene, cfg.volume)  # also validates scene-in-volume
    mask = _resolve_mask(cfg)
    t0 = time.perf_counter()
    cube = simulate_scatter(scene, cfg.aperture, cfg.freqs)
    cube = add_noise(cube, cfg.snr_db, seed=cfg.noise_seed)
    cube = apply_mask(cube, mask)
    seconds = time.perf_counter() - t0
    _check_finite(cube, "simulated data")
    meta = grid_metadata(cfg.aperture, cfg.freqs, cfg.volume)
    write_cube(cfg.output_path("data.nfc"), cube.astype(cfg.out_np_dtype), "data", meta)
    write_cube(cfg.output_path("truth.nfc"), truth.astype(cfg.out_np_dtype), "image", meta)
    write_mask(cfg.output_path("mask.txt"), mask)
    _echo_config(cfg, "simulate")
    print(f"simulate: {len(scene)} scatterers -> {cube.shape} data cube")
    print(f"simulate: mask {mask.scheme} keeps {mask.selected}/{mask.mask.size} elements")
    print(f"simulate: seconds={seconds:.3f}")
    return 0


def cmd_reconstruct(cfg: RunConfig) -> int:
    data = _load_data(cfg)
    _prepare_outdir(cfg)
    t0 = time.perf_counter()
    if cfg.method == "holo":
        image = reconstruct_holo(data, cfg.aperture, cfg.freqs, cfg.volume)
    else:
        image = reconstruct_omegak(data, cfg.aperture, cfg.freqs, cfg.volume, n_taps=cfg.n_taps)
    seconds = time.perf_counter() - t0
    _check_finite(image, "reconstructed image")
    meta = grid_metadata(cfg.aperture, cfg.freqs, cfg.volume)
    stem = f"{cfg.method}-image"
    write_cube(cfg.output_path(f"{stem}.nfc"), image.astype(cfg.out_np_dtype), "image", meta)
    _write_projections(cfg, image, stem)
    _echo_config(cfg, f"reconstruct-{cfg.method}")
    print(f"reconstruct: method={cfg.method} seconds={seconds:.3f}")
    print(f"reconstruct: artifact_mu={_artifact_level(image):.4f}")
    truth_path = cfg.output_path("truth.nfc")
    if truth_path.exists():
        truth = read_cube(truth_path).cube
        if truth.shape == image.shape and np.any(truth):
            print(f"reconstruct: rmse_vs_truth={rmse(truth, image):.4f}")
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    data = _load_data(cfg)
    _prepare_outdir(cfg)
    mask = _resolve_mask(cfg)
    pair = _make_pair(cfg, cfg.method, mask=mask)
    image, report = solve_ncg(data, pair, cfg.solver)
    _check_finite(image, "solver image")
    meta = grid_metadata(cfg.aperture, cfg.freqs, cfg.volume)
    stem = f"cs-{cfg.method}-image"
    write_cube(cfg.output_path(f"{stem}.nfc"), image.astype(cfg.out_np_dtype), "image", meta)
    write_report_csv(cfg.output_path(f"cs-{cfg.method}-report.csv"), report)
    _write_projections(cfg, image, stem)
    _echo_config(cfg, f"solve-{cfg.method}")
    final = report.objective[-1] if report.objective else float("nan")
    print(
        f"solve: method={cfg.method} iterations={report.iterations} "
        f"status={report.status} seconds={report.wall_clock:.3f}"
    )
    print(f"solve: final_objective={final:.6e} artifact_mu={_artifact_level(image):.4f}")
    truth_path = cfg.output_path("truth.nfc")
    if truth_path.exists():
        truth = read_cube(truth_path).cube
        if truth.shape == image.shape and np.any(truth):
            print(f"solve: rmse_vs_truth={rmse(truth, image):.4f}")
    if report.status == "line_search_failure":
        raise NumericError("line search exhausted its backtracks; partial results were written")
    return 0


def _psf_trials(cfg: RunConfig, method: str, scheme: str):
    base = _make_pair(cfg, method)
    voxel = cfg.psf_voxel or tuple(n // 2 for n in cfg.volume.shape)
    stats = []
    for trial in range(cfg.psf_trials):
        seed = cfg.psf_seed + trial
        if scheme == "random":
            mask = mask_random(cfg.aperture, cfg.psf_ratio, seed=seed)
        else:
            mask = mask_uniform_random(
                cfg.aperture, cfg.psf_ratio, group=cfg.mask_group, seed=seed
            )
        stats.append(psf_column(base.with_mask(mask), voxel, cfg.psf_exclusion))
    return stats


def cmd_psf(cfg: RunConfig) -> int:
    if cfg.psf_trials < 1:
        raise ConfigError("[psf] trials must be >= 1")
    _prepare_outdir(cfg)
    cases = [
        (cfg.method, "uniform-random"),
        (cfg.method, "random"),
        ("omegak" if cfg.method == "holo" else "holo", "uniform-random"),
    ]
    rows = []
    t0 = time.perf_counter()
    for method, scheme in cases:
        stats = _psf_trials(cfg, method, scheme)
        mus = np.array([s.mu for s in stats])
        rows.append(
            (
                method,
                scheme,
                cfg.psf_trials,
                cfg.psf_ratio,
                float(mus.mean()),
                float(mus.std(ddof=0)),
                float(mus.min()),
                float(mus.max()),
            )
        )
        mean_stats = mean_psf_stats(stats, cfg.psf_exclusion)
        _write_projections(cfg, np.abs(mean_stats.psf), f"psf-{method}-{scheme}")
        print(
            f"psf: method={method} scheme={scheme} trials={cfg.psf_trials} "
            f"mean_mu={mus.mean():.4f} std_mu={mus.std(ddof=0):.4f}"
        )
    seconds = time.perf_counter() - t0
    write_rows_csv(
        cfg.output_path("psf.csv"),
        ["method", "scheme", "trials", "ratio", "mean_mu", "std_mu", "min_mu", "max_mu"],
        rows,
    )
    _echo_config(cfg, "psf")
    print(f"psf: seconds={seconds:.3f}")
    return 0


def _median_seconds(fn, repeats: int) -> float:
    times = []
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _bench_timing(cfg: RunConfig) -> int:
    rows = []
    header = [
        "size", "method", "reconstruct_seconds", "cs_iteration_seconds",
        "flops_model", "flop_ratio",
    ]
    for size in cfg.bench_sizes:
        nz, ny, nx = size
        volume = volume_for_aperture(
            cfg.aperture, n_z=nz, n_y=ny, n_x=nx,
            z_min=cfg.volume.z_min, z_max=cfg.volume.z_max,
        )
        scene = five_point_scene(volume)
        data = simulate_scatter(scene, cfg.aperture, cfg.freqs)
        model = flop_model(cfg.freqs.n_f, cfg.aperture.n_y, cfg.aperture.n_x, cfg.n_taps)
        label = "x".join(str(d) for d in size)
        pairs = {
            "holo": _make_pair(cfg, "holo", volume=volume),
            "omegak": _make_pair(cfg, "omegak", volume=volume),
        }
        for method, pair in pairs.items():
            recon_s = _median_seconds(lambda: pair.backproject(data), cfg.bench_repeats)
            image = pair.backproject(data)

            def one_iteration():
                pair.backproject(pair.project(image))

            iter_s = _median_seconds(one_iteration, cfg.bench_repeats)
            flops = model.flops_holo if method == "holo" else model.flops_omegak
            rows.append((label, method, recon_s, iter_s, flops, model.ratio))
            print(
                f"bench: size={label} method={method} reconstruct={recon_s:.3f}s "
                f"cs_iteration={iter_s:.3f}s"
            )
    write_rows_csv(cfg.output_path("bench-timing.csv"), header, rows)
    _bench_backends(cfg)
    return 0


def _bench_backends(cfg: RunConfig) -> None:
    """Time the two hot kernels on the active backend and the NumPy
    fallback on identical inputs."""
    from . import _core_np

    try:
        from . import _core
    except ImportError:
        _core = None
    rng = np.random.default_rng(0)
    n_f, n_z, p = cfg.freqs.n_f, 16, cfg.aperture.n_y * cfg.aperture.n_x
    kernel = rng.standard_normal((n_f, n_z, p)) + 1j * rng.standard_normal((n_f, n_z, p))
    x = rng.standard_normal((n_z, p)) + 1j * rng.standard_normal((n_z, p))
    lines = rng.standard_normal((p, n_f)) + 1j * rng.standard_normal((p, n_f))
    lines = np.ascontiguousarray(lines)
    n_t, taps = n_f + 16, 8
    idx = np.clip(
        rng.integers(0, max(n_f - taps, 1), size=(p, n_t)), 0, max(n_f - taps, 0)
    ).astype(np.int32)
    tap_w = rng.standard_normal((p, n_t, taps)) / taps
    rows = []
    backends = [("numpy", _core_np)] + ([("cython", _core)] if _core else [])
    for name, mod in backends:
        c_s = _median_seconds(
            lambda: mod.contract(kernel, np.ascontiguousarray(x)), cfg.bench_repeats
        )
        g_s = _median_seconds(
            lambda: mod.stolt_gather(lines, idx, tap_w), cfg.bench_repeats
        )
        rows.append((name, c_s, g_s))
        print(f"bench: backend={name} contract={c_s * 1e3:.1f}ms gather={g_s * 1e3:.1f}ms")
    write_rows_csv(
        cfg.output_path("bench-backends.csv"),
        ["backend", "contract_seconds", "gather_seconds"],
        rows,
    )
    print(f"bench: active backend is {backend_name()}")


def _bench_rmse(cfg: RunConfig) -> int:
    scene = _resolve_scene(cfg)
    truth = rasterize(scene, cfg.volume)
    clean = simulate_scatter(scene, cfg.aperture, cfg.freqs)
    rows = []
    for snr in cfg.bench_snr_grid:
        for ratio in cfg.bench_ratio_grid:
            for seed in range(cfg.bench_seeds):
                noisy = add_noise(clean, snr, seed=cfg.noise_seed + seed)
                mask = mask_uniform_random(
                    cfg.aperture, ratio, group=cfg.mask_group, seed=cfg.mask_seed + seed
                )
                data = apply_mask(noisy, mask)
                fourier = reconstruct_holo(data, cfg.aperture, cfg.freqs, cfg.volume)
                pair = _make_pair(cfg, cfg.method, mask=mask)
                cs_image, report = solve_ncg(data, pair, cfg.solver)
                rows.append((snr, ratio, seed, "fourier", rmse(truth, fourier), 0))
                rows.append(
                    (snr, ratio, seed, f"cs-{cfg.method}", rmse(truth, cs_image), report.iterations)
                )
            cell = [r for r in rows if r[0] == snr and r[1] == ratio]
            f_mean = np.mean([r[4] for r in cell if r[3] == "fourier"])
            c_mean = np.mean([r[4] for r in cell if r[3] != "fourier"])
            print(
                f"bench: snr={snr:g}dB ratio={ratio:g} fourier_rmse={f_mean:.4f} "
                f"cs_rmse={c_mean:.4f}"
            )
    write_rows_csv(
        cfg.output_path("bench-rmse.csv"),
        ["snr_db", "ratio", "seed", "method", "rmse", "iterations"],
        rows,
    )
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    _prepare_outdir(cfg)
    t0 = time.perf_counter()
    result = _bench_timing(cfg) if cfg.bench_mode == "timing" else _bench_rmse(cfg)
    _echo_config(cfg, f"bench-{cfg.bench_mode}")
    print(f"bench: total_seconds={time.perf_counter() - t0:.3f}")
    return result


def cmd_export(args) -> int:
    cube_file = read_cube(args.input)
    out_dir = Path(args.output_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    floor_db = args.floor_db
    labels = ("z", "y", "x") if cube_file.axis_order == "image" else ("f", "y", "x")
    for axis, label in enumerate(labels):
        db = max_projection(np.asarray(cube_file.cube), axis, floor_db)
        save_projection_png(out_dir / f"{stem}-proj{label}.png", db, floor_db)
    meta_lines = [
        f"axis_order = {cube_file.axis_order}",
        f"shape = {'x'.join(str(d) for d in cube_file.cube.shape)}",
        f"dtype = {cube_file.cube.dtype.name}",
    ]
    for section, entries in cube_file.metadata.items():
        meta_lines.append(f"[{section}]")
        meta_lines.extend(f"{k} = {v}" for k, v in entries.items())
    (out_dir / f"{stem}-info.txt").write_text("\n".join(meta_lines) + "\n")
    print(f"export: wrote {len(labels)} projections for {args.input}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfholo",
        description="Matrix-free near-field 3-D imaging: simulation, "
        "reconstruction, and sparse recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--preset", help=f"built-in configuration: {', '.join(PRESET_NAMES)}")
        p.add_argument("--seed", type=int, help="override every stochastic seed")
        p.add_argument("--threads", type=int, help="cap FFT worker threads")
        p.add_argument(
            "--method", choices=("holo", "omegak"), help="operator selection override"
        )

    for name, help_text in (
        ("simulate", "generate a (noisy, masked) data cube from a point scene"),
        ("reconstruct", "single-shot image formation from a data cube"),
        ("solve", "iterative regularized reconstruction from a data cube"),
        ("psf", "point-spread/coherence statistics over sampling trials"),
        ("bench", "timing or error sweeps"),
    ):
        add_common(sub.add_parser(name, help=help_text))

    export = sub.add_parser("export", help="render a cube file to projection images")
    export.add_argument("--input", required=True, help="cube file to render")
    export.add_argument("--output-dir", help="directory for rendered files")
    export.add_argument(
        "--floor-db", type=float, default=-30.0, help="dynamic-range floor (dB)"
    )
    export.add_argument("--threads", type=int, help="cap FFT worker threads")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "solve": cmd_solve,
    "psf": cmd_psf,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", None):
            set_fft_workers(args.threads)
        if args.command == "export":
            return cmd_export(args)
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Binary cube container, text scene/mask formats, run-configuration
parsing, CSV traces, and projection images."""

import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal
from PIL import Image

from nfholo import (
    ApertureGrid,
    ConfigError,
    FrequencyGrid,
    SolveReport,
    SolverParams,
    mask_random,
    mask_uniform_random,
    parse_config_text,
    read_cube,
    read_mask,
    read_scene,
    render_config,
    volume_for_aperture,
    write_cube,
    write_mask,
    write_scene,
)
from nfholo.fileio import (
    aperture_from_metadata,
    frequency_from_metadata,
    grid_metadata,
    parse_inline_points,
    parse_scene_text,
    save_projection_png,
    volume_from_metadata,
    write_report_csv,
    write_rows_csv,
)
from nfholo.presets import five_point_scene
from tests.conftest import random_cube


class TestCubeContainer:
    def test_complex128_round_trip_bit_exact(self, tmp_path, rng):
        cube = random_cube(rng, (3, 4, 5))
        path = tmp_path / "cube.nfc"
        write_cube(path, cube, "image", {"volume": {"n_z": "3"}})
        loaded = read_cube(path)
        assert loaded.cube.dtype == np.complex128
        assert loaded.axis_order == "image"
        assert_array_equal(loaded.cube, cube)
        assert loaded.metadata == {"volume": {"n_z": "3"}}

    def test_complex64_round_trip_keeps_dtype(self, tmp_path, rng):
        cube = random_cube(rng, (2, 3, 3)).astype(np.complex64)
        path = tmp_path / "cube.nfc"
        write_cube(path, cube, "data")
        loaded = read_cube(path)
        assert loaded.cube.dtype == np.complex64
        assert loaded.axis_order == "data"
        assert_array_equal(loaded.cube, cube)

    def test_real_input_stored_as_complex128(self, tmp_path):
        path = tmp_path / "cube.nfc"
        write_cube(path, np.ones((2, 2, 2)), "image")
        assert read_cube(path).cube.dtype == np.complex128

    def test_writes_are_deterministic(self, tmp_path, rng):
        cube = random_cube(rng, (2, 3, 4))
        a, b = tmp_path / "a.nfc", tmp_path / "b.nfc"
        write_cube(a, cube, "data", {"frequency": {"n_f": "2"}})
        write_cube(b, cube, "data", {"frequency": {"n_f": "2"}})
        assert a.read_bytes() == b.read_bytes()

    def test_non_cube_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="3-D"):
            write_cube(tmp_path / "x.nfc", np.zeros((2, 2)), "image")

    def test_bad_axis_order_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="axis_order"):
            write_cube(tmp_path / "x.nfc", np.zeros((2, 2, 2)), "sideways")

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.nfc"
        path.write_bytes(b"PNG!" + b"\x00" * 40)
        with pytest.raises(ConfigError, match="magic"):
            read_cube(path)

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "cube.nfc"
        write_cube(path, np.zeros((1, 1, 1), complex), "image")
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(ConfigError, match="version 9"):
            read_cube(path)

    def test_unknown_dtype_code_rejected(self, tmp_path):
        path = tmp_path / "cube.nfc"
        write_cube(path, np.zeros((1, 1, 1), complex), "image")
        blob = bytearray(path.read_bytes())
        blob[5] = 7
        path.write_bytes(bytes(blob))
        with pytest.raises(ConfigError, match="dtype code 7"):
            read_cube(path)

    def test_unknown_axis_code_rejected(self, tmp_path):
        path = tmp_path / "cube.nfc"
        write_cube(path, np.zeros((1, 1, 1), complex), "image")
        blob = bytearray(path.read_bytes())
        blob[6] = 5
        path.write_bytes(bytes(blob))
        with pytest.raises(ConfigError, match="axis-order code"):
            read_cube(path)

    def test_truncated_payload_rejected(self, tmp_path, rng):
        path = tmp_path / "cube.nfc"
        write_cube(path, random_cube(rng, (2, 2, 2)), "image")
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(ConfigError, match="payload"):
            read_cube(path)

    def test_truncated_metadata_rejected(self, tmp_path):
        path = tmp_path / "cube.nfc"
        write_cube(path, np.zeros((1, 1, 1), complex), "image", {"volume": {"n_z": "1"}})
        blob = path.read_bytes()
        path.write_bytes(blob[:24])
        with pytest.raises(ConfigError, match="truncated metadata"):
            read_cube(path)


class TestGridMetadata:
    def test_round_trip_is_bit_identical(self, tmp_path):
        aperture = ApertureGrid(16, 16, 3e-3, 3e-3, plane_z=0.1)
        freqs = FrequencyGrid(72.5e9, 75.5e9, 7)
        volume = volume_for_aperture(aperture, 4, 8, 8, 0.31, 0.37)
        path = tmp_path / "cube.nfc"
        write_cube(
            path,
            np.zeros(volume.shape, complex),
            "image",
            grid_metadata(aperture, freqs, volume),
        )
        meta = read_cube(path).metadata
        assert aperture_from_metadata(meta) == aperture
        assert frequency_from_metadata(meta) == freqs
        assert volume_from_metadata(meta) == volume

    def test_missing_blocks_rejected(self):
        with pytest.raises(ConfigError, match="aperture"):
            aperture_from_metadata({})
        with pytest.raises(ConfigError, match="frequency"):
            frequency_from_metadata({"frequency": {"f_start": "nope"}})
        with pytest.raises(ConfigError, match="volume"):
            volume_from_metadata({"volume": {}})


class TestSceneFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        aperture = ApertureGrid(16, 16, 3e-3, 3e-3)
        volume = volume_for_aperture(aperture, 4, 8, 8, 0.3, 0.36)
        scene = five_point_scene(volume)
        path = tmp_path / "scene.txt"
        write_scene(path, scene)
        loaded = read_scene(path)
        assert_array_equal(loaded.positions, scene.positions)
        assert_array_equal(loaded.amplitudes, scene.amplitudes)

    def test_comments_and_blanks_skipped(self):
        scene = parse_scene_text("# header\n\n0.0 0.1 0.3 1.0 -0.5\n")
        assert scene.positions.shape == (1, 3)
        assert scene.amplitudes[0] == 1.0 - 0.5j

    def test_wrong_field_count_reports_line(self):
        with pytest.raises(ConfigError, match="<scene>:2"):
            parse_scene_text("0 0 0.3 1 0\n0 0 0.3 1\n")

    def test_non_numeric_reports_line(self):
        with pytest.raises(ConfigError, match="<scene>:1"):
            parse_scene_text("0 0 fast 1 0\n")

    def test_empty_scene_rejected(self):
        with pytest.raises(ConfigError, match="no scatterers"):
            parse_scene_text("# nothing here\n")

    def test_inline_points(self):
        scene = parse_inline_points("0,0,0.3,1,0; 0.01,0,0.32,0,1;")
        assert scene.positions.shape == (2, 3)
        assert scene.amplitudes[1] == 1.0j

    def test_inline_points_errors(self):
        with pytest.raises(ConfigError, match="x,y,z,re,im"):
            parse_inline_points("0,0,0.3,1")
        with pytest.raises(ConfigError, match="no scatterers"):
            parse_inline_points(" ; ")


class TestMaskFiles:
    def test_uniform_random_round_trip(self, tmp_path):
        aperture = ApertureGrid(16, 16, 3e-3, 3e-3)
        mask = mask_uniform_random(aperture, 0.25, (4, 2), seed=7)
        path = tmp_path / "mask.txt"
        write_mask(path, mask)
        loaded = read_mask(path)
        assert_array_equal(loaded.mask, mask.mask)
        assert loaded.scheme == mask.scheme
        assert loaded.ratio == mask.ratio
        assert loaded.group == mask.group
        assert loaded.seed == mask.seed

    def test_ungrouped_round_trip(self, tmp_path):
        aperture = ApertureGrid(8, 8, 3e-3, 3e-3)
        mask = mask_random(aperture, 0.5, seed=3)
        path = tmp_path / "mask.txt"
        write_mask(path, mask)
        loaded = read_mask(path)
        assert_array_equal(loaded.mask, mask.mask)
        assert loaded.group is None
        assert loaded.scheme == mask.scheme

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text("scheme=random\n0101\nwhat is this\n")
        with pytest.raises(ConfigError, match="malformed mask line"):
            read_mask(path)

    def test_inconsistent_rows_rejected(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text("0101\n011\n")
        with pytest.raises(ConfigError, match="inconsistent"):
            read_mask(path)

    def test_empty_mask_rejected(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text("scheme=random\n")
        with pytest.raises(ConfigError, match="no rows"):
            read_mask(path)

    def test_bad_group_field_rejected(self, tmp_path):
        path = tmp_path / "mask.txt"
        path.write_text("group=wide\n01\n10\n")
        with pytest.raises(ConfigError, match="group"):
            read_mask(path)


class TestRunConfig:
    def test_empty_text_yields_defaults(self):
        cfg = parse_config_text("")
        assert cfg.aperture == ApertureGrid(64, 64, 3e-3, 3e-3)
        assert cfg.freqs == FrequencyGrid(72e9, 76e9, 64)
        assert cfg.volume.shape == (16, 32, 32)
        assert cfg.volume.z_min == 0.3 and cfg.volume.z_max == 0.6
        assert cfg.method == "holo"
        assert cfg.mask_scheme == "full"
        assert math.isinf(cfg.snr_db)
        assert cfg.solver.lam_l1 is None
        assert cfg.psf_voxel is None
        assert cfg.bench_sizes == ((16, 16, 16), (16, 32, 32), (16, 64, 64))
        assert cfg.out_np_dtype == np.complex128

    def test_overrides_land_in_place(self):
        cfg = parse_config_text(
            """
            [aperture]
            n_x = 16
            n_y = 16
            [frequency]
            n_f = 8
            [volume]
            n_z = 4
            n_y = 8
            n_x = 8
            z_max = 0.4
            [scene]
            points = 0,0,0.35,1,0
            snr_db = 20
            [mask]
            scheme = uniform-random
            ratio = 0.25
            [solver]
            lam_l1 = 0.5
            method = omegak
            [psf]
            voxel = 1,2,3
            [output]
            dtype = c64
            """
        )
        assert cfg.aperture.n_x == 16
        assert cfg.freqs.n_f == 8
        assert cfg.volume.shape == (4, 8, 8)
        assert cfg.snr_db == 20.0
        assert cfg.mask_scheme == "uniform-random"
        assert cfg.solver.lam_l1 == 0.5
        assert cfg.method == "omegak"
        assert cfg.psf_voxel == (1, 2, 3)
        assert cfg.out_np_dtype == np.complex64

    def test_unknown_section_reports_line(self):
        with pytest.raises(ConfigError, match=r"<config>:3: unknown section"):
            parse_config_text("[aperture]\nn_x = 8\n[radar]\n")

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match=r"<config>:2: unknown key 'pitch'"):
            parse_config_text("[aperture]\npitch = 1\n")

    def test_duplicate_key_reports_line(self):
        with pytest.raises(ConfigError, match=r"<config>:3: duplicate key"):
            parse_config_text("[aperture]\nn_x = 8\nn_x = 16\n")

    def test_bad_value_reports_line_and_key(self):
        with pytest.raises(ConfigError, match=r"<config>:2: bad value for solver.alpha"):
            parse_config_text("[solver]\nalpha = fast\n")

    def test_key_outside_section_rejected(self):
        with pytest.raises(ConfigError, match="outside any"):
            parse_config_text("n_x = 8\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_text("[aperture]\njust words\n")

    def test_invalid_geometry_becomes_config_error(self):
        with pytest.raises(ConfigError):
            parse_config_text("[aperture]\nn_x = 0\n")

    def test_nan_value_rejected(self):
        with pytest.raises(ConfigError, match="nan"):
            parse_config_text("[scene]\nsnr_db = nan\n")

    def test_render_round_trip_defaults(self):
        cfg = parse_config_text("")
        assert parse_config_text(render_config(cfg)) == cfg

    def test_render_round_trip_overrides(self):
        cfg = parse_config_text(
            """
            [frequency]
            f_start = 72.25e9
            n_f = 12
            [scene]
            snr_db = 17.5
            [mask]
            scheme = random
            ratio = 0.375
            seed = 11
            [solver]
            lam_tv = 0.0078125
            max_outer = 12
            [psf]
            voxel = 2,3,4
            [bench]
            sizes = 4x8x8, 8x8x8
            snr_grid = 10, 20, 30
            [output]
            prefix = trial
            floor_db = -25.0
            """
        )
        assert parse_config_text(render_config(cfg)) == cfg

    def test_with_seed_overrides_all_seeds(self):
        cfg = parse_config_text("").with_seed(41)
        assert cfg.noise_seed == cfg.mask_seed == cfg.psf_seed == 41

    def test_output_path_joins_prefix(self, tmp_path):
        cfg = parse_config_text(f"[output]\ndir = {tmp_path}\nprefix = job\n")
        assert cfg.output_path("image.nfc") == tmp_path / "job-image.nfc"


class TestCsvWriters:
    def test_report_columns_and_values(self, tmp_path):
        report = SolveReport(
            objective=[3.5, 2.25],
            objective_smoothed=[3.6, 2.3],
            grad_norm=[1.0, 0.125],
            step=[0.5, 0.3],
            seconds=[0.01, 0.012],
            status="max_iterations",
            wall_clock=0.03,
            params=SolverParams(),
        )
        path = tmp_path / "trace.csv"
        write_report_csv(path, report)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "objective", "grad_norm", "step", "seconds"]
        assert len(rows) == 3
        assert rows[1][0] == "1" and rows[2][0] == "2"
        assert float(rows[1][1]) == 3.5  # exact objective, not the smoothed trace
        assert float(rows[2][2]) == 0.125

    def test_rows_csv_reprs_floats_exactly(self, tmp_path):
        path = tmp_path / "rows.csv"
        value = 0.1 + 0.2  # not representable as a short decimal
        write_rows_csv(path, ["name", "value"], [["a", value]])
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert float(rows[1][1]) == value


class TestProjectionPng:
    def test_pixel_mapping(self, tmp_path):
        db = np.array([[-30.0, -15.0], [0.0, -60.0]])
        path = tmp_path / "proj.png"
        save_projection_png(path, db, floor_db=-30.0)
        pixels = np.asarray(Image.open(path))
        assert pixels.dtype == np.uint8
        assert pixels[0, 0] == 0  # at the floor
        assert pixels[1, 0] == 255  # at the peak
        assert pixels[0, 1] == 128  # halfway up
        assert pixels[1, 1] == 0  # clipped up to the floor

    def test_deterministic_bytes(self, tmp_path, rng):
        db = -30.0 * np.abs(random_cube(rng, (4, 4, 4))).max(axis=0)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_projection_png(a, db)
        save_projection_png(b, db)
        assert a.read_bytes() == b.read_bytes()

    def test_validation(self, tmp_path):
        with pytest.raises(ValueError, match="2-D"):
            save_projection_png(tmp_path / "x.png", np.zeros((2, 2, 2)))
        with pytest.raises(ValueError, match="floor"):
            save_projection_png(tmp_path / "x.png", np.zeros((2, 2)), floor_db=0.0)

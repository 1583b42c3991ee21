# -*- coding: utf-8 -*-
"""RDT1 容器、CSV 與覆蓋圖輸出測試"""

import struct

import numpy as np
import pytest

from born_simulator import DetectorGrid, MeasurementRecord, create_scan_grid
from coverage_figure import PGM_CODES, coverage_image, emit_coverage_figure, render_coverage_svg
from herglotz_beam import create_density
from rdt_errors import ContainerError, ContractError, UnsupportedDimensionError
from rdtm_container import MAGIC, emit_csv, rdtm_read, rdtm_read_raw, rdtm_write, read_csv
from scan_geometry import RegionTag, ScanGeometry, coverage_mask
from scan_presets import get_preset_geometry


@pytest.fixture
def record(transmission_geometry):
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(8, 16)) + 1j * rng.normal(size=(8, 16))
    density = create_density({"variant": "gaussian", "A": 0.5}, 1.0, transmission_geometry.omega)
    return MeasurementRecord(
        geometry=transmission_geometry,
        detector=DetectorGrid(spacing=0.5, count=16),
        scan=create_scan_grid(0.5, 8, transmission_geometry.nu),
        density=density,
        samples=samples,
    )


class TestContainer:
    def test_measurement_round_trip_is_bit_exact(self, record, tmp_path):
        path = tmp_path / "meas.rdt"
        size = rdtm_write(record, path)
        assert size == path.stat().st_size
        loaded = rdtm_read(path)
        assert isinstance(loaded, MeasurementRecord)
        assert loaded.samples.tobytes() == record.samples.tobytes()
        assert loaded.geometry == record.geometry
        assert loaded.detector == record.detector
        assert loaded.scan == record.scan
        assert loaded.density == record.density

    def test_layout(self, record, tmp_path):
        path = tmp_path / "meas.rdt"
        rdtm_write(record, path)
        blob = path.read_bytes()
        assert blob[:4] == MAGIC
        (header_len,) = struct.unpack("<I", blob[4:8])
        assert len(blob) == 8 + header_len + record.samples.size * 16
        header, array = rdtm_read_raw(path)
        assert header["payload"] == {"kind": "measurement", "shape": [8, 16], "dtype": "complex128"}
        assert header["version"] == 1
        assert array.shape == (8, 16)

    def test_same_record_same_bytes(self, record, tmp_path):
        rdtm_write(record, tmp_path / "a.rdt")
        rdtm_write(record, tmp_path / "b.rdt")
        assert (tmp_path / "a.rdt").read_bytes() == (tmp_path / "b.rdt").read_bytes()

    def test_array_payload(self, transmission_geometry, tmp_path):
        image = np.arange(12, dtype=float).reshape(3, 4)
        rdtm_write(image, tmp_path / "img.rdt", geometry=transmission_geometry, kind="image", grid={"mode": "naive"})
        header, array = rdtm_read(tmp_path / "img.rdt")
        assert header["grid"] == {"mode": "naive"}
        assert header["density"] is None
        assert np.array_equal(array.real, image)

    def test_array_requires_geometry_and_kind(self, tmp_path):
        with pytest.raises(ContractError):
            rdtm_write(np.zeros((2, 2)), tmp_path / "x.rdt")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.rdt"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(ContainerError, match="not an RDT1 container"):
            rdtm_read(path)

    def test_truncated_payload(self, record, tmp_path):
        path = tmp_path / "meas.rdt"
        rdtm_write(record, path)
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(ContainerError):
            rdtm_read(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ContainerError):
            rdtm_read(tmp_path / "absent.rdt")


class TestCsv:
    def test_round_trip(self, tmp_path):
        data = np.array([[1.0 + 2.0j, -0.1 + 0.0j], [1e-20 - 3.5j, 0.0]])
        path = emit_csv(data, tmp_path / "a.csv")
        raw = path.read_bytes()
        assert raw.count(b"\r\n") == 2
        assert np.array_equal(read_csv(path), data)

    def test_real_values(self, tmp_path):
        path = emit_csv(np.array([[0.1, 2.0]]), tmp_path / "r.csv")
        assert path.read_text(encoding="utf-8") == "0.10000000000000001,2\r\n"

    def test_only_two_dimensional(self, tmp_path):
        with pytest.raises(ContractError):
            emit_csv(np.zeros(3), tmp_path / "v.csv")


class TestCoverageFigure:
    def test_svg_is_deterministic(self):
        geometry = get_preset_geometry("oblique_tilted")
        tags = coverage_mask(geometry, "advanced", 64)
        first = render_coverage_svg(tags, geometry)
        assert first == render_coverage_svg(tags, geometry)
        assert first.startswith('<?xml version="1.0"')
        assert 'id="y1"' in first
        assert 'id="y_tilde"' in first
        assert 'id="minus_sigma_tilde"' in first

    def test_pgm(self, tmp_path):
        geometry = get_preset_geometry("standard_transmission")
        tags = coverage_mask(geometry, "naive", 32)
        path = emit_coverage_figure(tags, geometry, tmp_path / "cov.pgm", fmt="pgm")
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n32 32\n255\n")
        pixels = np.frombuffer(blob[len(b"P5\n32 32\n255\n"):], dtype=np.uint8)
        assert pixels.size == 32 * 32
        assert set(np.unique(pixels)) <= set(PGM_CODES.values())
        assert PGM_CODES[RegionTag.Y1] in pixels

    def test_image_orientation(self):
        tags = np.zeros((4, 4), dtype=np.int8)
        tags[0, 3] = RegionTag.Y1  # y₁ 最小、y₂ 最大
        assert coverage_image(tags)[0, 0] == RegionTag.Y1

    def test_three_dimensional_rejected(self, tmp_path):
        geometry = ScanGeometry(d=3, k0=1.0, omega=(0, 0, 1), nu=(0, 0, 1), L=2.0, r=1.0)
        with pytest.raises(UnsupportedDimensionError):
            emit_coverage_figure(np.zeros((4, 4, 4)), geometry, tmp_path / "c.svg")

    def test_unknown_format(self, tmp_path):
        geometry = get_preset_geometry("standard_transmission")
        with pytest.raises(ContractError):
            emit_coverage_figure(np.zeros((4, 4)), geometry, tmp_path / "c.png", fmt="png")

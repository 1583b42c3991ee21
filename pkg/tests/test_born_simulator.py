# -*- coding: utf-8 -*-
"""Green 函數與 Born 掃描模擬測試"""

import cmath
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from born_simulator import (
    DetectorGrid,
    MeasurementRecord,
    SimulationSettings,
    add_complex_noise,
    born_field,
    born_field_direct,
    create_scan_grid,
    greens,
    greens_array,
    plane_wave_field,
    recommended_quadrature_order,
    scan_basis,
    simulate_scan,
)
from fourier_transformer import measurement_spectrum, reduce_measurements
from herglotz_beam import create_density
from phantom_model import create_phantom
from rdt_errors import ContractError, DomainError, NyquistError, SingularityError, UnsupportedDimensionError
from scan_geometry import ScanGeometry

EULER_GAMMA = Decimal(
    "0.5772156649015328606065120900824024310421593359399235988057672348848677"
)
PI = Decimal(
    "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899"
)


def hankel_series(x: float) -> complex:
    """以 60 位十進位級數計算 H₀⁽¹⁾(x) = J₀(x) + i·Y₀(x)"""
    getcontext().prec = 60
    half = Decimal(repr(x)) / 2
    quarter = half * half
    j0 = Decimal(0)
    tail = Decimal(0)
    term = Decimal(1)
    harmonic = Decimal(0)
    m = 0
    eps = Decimal(10) ** -50
    while True:
        if m > 0:
            term = -term * quarter / (m * m)
            harmonic += Decimal(1) / m
        j0 += term
        # Y₀ 級數的符號與 J₀ 相反
        tail -= term * harmonic
        if m > 2 and abs(term) * (1 + harmonic) < eps:
            break
        m += 1
    y0 = (2 / PI) * ((half.ln() + EULER_GAMMA) * j0 + tail)
    return complex(float(j0), float(y0))


def blob_phantom(r=1.0, contrast=0.05, d=2, width=0.15):
    return create_phantom(
        [{"kind": "gaussian", "center": [0.0] * d, "width": width, "contrast_re": contrast}],
        r=r,
        d=d,
    )


def small_setup(contrast=0.05):
    geometry = ScanGeometry(d=2, k0=2.0, omega=(0.0, 1.0), nu=(0.0, 1.0), L=2.0, r=1.0)
    phantom = blob_phantom(contrast=contrast)
    density = create_density({"variant": "gaussian", "A": 0.5}, geometry.k0, geometry.omega)
    detector = DetectorGrid(spacing=0.5, count=16)
    scan = create_scan_grid(0.5, 8, geometry.nu)
    settings = SimulationSettings(Ns=64, Nv=24)
    return geometry, phantom, density, detector, scan, settings


class TestGreens:
    def test_two_dimensional_against_series(self):
        distances = np.linspace(1e-3, 50.0, 40)
        values = 4.0 * greens_array(distances, 1.0, 2) / 1j
        for r, value in zip(distances, values):
            assert abs(value - hankel_series(float(r))) <= 1e-10

    def test_three_dimensional_closed_form(self):
        r = 1.7
        assert greens([0.0, r, 0.0], 2.5, 3) == pytest.approx(cmath.exp(2.5j * r) / (4 * math.pi * r), rel=1e-14)

    def test_singular_at_origin(self):
        with pytest.raises(SingularityError):
            greens([0.0, 0.0], 1.0, 2)

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            greens_array(1.0, 1.0, 4)
        with pytest.raises(ContractError):
            greens([1.0, 0.0], 1.0, 3)


class TestGrids:
    def test_nyquist(self):
        detector = DetectorGrid(spacing=0.6, count=8)
        with pytest.raises(NyquistError):
            detector.check_nyquist(2 * math.pi)
        DetectorGrid(spacing=0.6, count=8, override_nyquist=True).check_nyquist(2 * math.pi)

    def test_detector_positions_lie_on_plane(self):
        geometry = ScanGeometry(d=3, k0=1.0, omega=(0, 0, 1), nu=(0, 0, 1), L=2.5, r=1.0)
        points = DetectorGrid(spacing=0.5, count=4).positions(geometry)
        assert points.shape == (16, 3)
        assert np.all(points[:, 2] == 2.5)

    def test_scan_basis_is_orthogonal_to_nu(self):
        nu = np.array([0.0, 0.6, 0.8])
        basis = np.asarray(scan_basis(nu))
        assert basis.shape == (2, 3)
        assert np.allclose(basis @ nu, 0.0, atol=1e-14)
        assert np.allclose(basis @ basis.T, np.eye(2), atol=1e-14)

    def test_record_shape_is_checked(self):
        geometry, _, density, detector, scan, _ = small_setup()
        with pytest.raises(ContractError):
            MeasurementRecord(geometry, detector, scan, density, np.zeros((3, 3), dtype=complex))

    def test_recommended_order(self):
        assert recommended_quadrature_order(1.0, np.array([[3.0, 0.0]]), 1.0) == 16
        assert recommended_quadrature_order(2.0, np.array([[0.0, 0.0], [2.5, 0.0]]), 1.0) == 28


class TestBornField:
    def test_factorized_matches_direct_integral(self):
        phantom = blob_phantom(contrast=0.1)
        density = create_density({"variant": "uniform_half"}, 2.0, (0.0, 1.0))
        x = [0.3, 2.0]
        y = [0.5, 0.0]
        fast = born_field(phantom, density, y, x, Nv=32, Ns=64)
        slow = born_field_direct(phantom, density, y, x, Nv=32, Ns=64)
        assert abs(fast - slow) <= 1e-6 * abs(slow)

    def test_observation_inside_scatterer(self):
        phantom = blob_phantom()
        density = create_density({"variant": "uniform_half"}, 2.0, (0.0, 1.0))
        with pytest.raises(DomainError, match="observation inside scatterer"):
            born_field(phantom, density, [0.0, 0.0], [0.5, 0.5], Nv=16, Ns=32)

    def test_plane_wave_field_shapes(self):
        phantom = blob_phantom()
        single = plane_wave_field(phantom, [0.0, 2.0], [0.0, 2.0], 2.0, Nv=16)
        many = plane_wave_field(phantom, [0.0, 2.0], np.array([[0.0, 2.0], [1.0, 2.0]]), 2.0, Nv=16)
        assert isinstance(single, complex)
        assert many.shape == (2,)
        assert many[0] == pytest.approx(single)


class TestSimulateScan:
    def test_samples_match_pointwise_born_field(self):
        geometry, phantom, density, detector, scan, settings = small_setup()
        record = simulate_scan(phantom, density, geometry, detector, scan, settings)
        detector_points = detector.positions(geometry)
        scan_points = scan.positions()
        assert record.samples.shape == (8, 16)
        for j, i in [(0, 0), (3, 7), (7, 15)]:
            expected = born_field(phantom, density, scan_points[j], detector_points[i], Nv=24, Ns=64)
            assert record.samples[j, i] == pytest.approx(expected, rel=1e-10, abs=1e-14)

    def test_linear_in_contrast(self):
        geometry, phantom, density, detector, scan, settings = small_setup(contrast=0.05)
        once = simulate_scan(phantom, density, geometry, detector, scan, settings).samples
        twice = simulate_scan(phantom.scaled(2.0), density, geometry, detector, scan, settings).samples
        assert np.allclose(twice, 2.0 * once, rtol=1e-12, atol=0.0)

    def test_threads_do_not_change_result(self):
        geometry, phantom, density, detector, scan, settings = small_setup()
        single = simulate_scan(phantom, density, geometry, detector, scan, settings).samples
        threaded = simulate_scan(
            phantom, density, geometry, detector, scan, SimulationSettings(Ns=64, Nv=24, workers=3)
        ).samples
        assert np.allclose(single, threaded, rtol=1e-13, atol=0.0)

    def test_zero_phantom_gives_zero_record(self):
        geometry, phantom, density, detector, scan, settings = small_setup()
        record = simulate_scan(phantom.scaled(0.0), density, geometry, detector, scan, settings)
        assert np.all(record.samples == 0)

    def test_metadata(self):
        geometry, phantom, density, detector, scan, settings = small_setup()
        record = simulate_scan(phantom, density, geometry, detector, scan, settings)
        assert record.metadata["Ns"] == 64
        assert record.metadata["Nv"] == 24
        assert record.metadata["nodes"] == 32

    def test_nyquist_violation(self):
        geometry, phantom, density, _, scan, settings = small_setup()
        with pytest.raises(NyquistError):
            simulate_scan(phantom, density, geometry, DetectorGrid(spacing=2.0, count=16), scan, settings)

    def test_scan_basis_must_be_orthogonal_to_nu(self):
        geometry, phantom, density, detector, _, settings = small_setup()
        wrong = create_scan_grid(0.5, 8, (1.0, 0.0))
        with pytest.raises(ContractError):
            simulate_scan(phantom, density, geometry, detector, wrong, settings)

    def test_reflection_record_is_mirror_symmetric(self):
        """反射幾何、對稱假體：偵測器與掃描同時鏡射後紀錄不變"""
        geometry = ScanGeometry(d=2, k0=2.0, omega=(0.0, -1.0), nu=(0.0, -1.0), L=2.0, r=1.0)
        phantom = blob_phantom()
        density = create_density({"variant": "gaussian", "A": 0.5}, geometry.k0, geometry.omega)
        # 奇數點數使軸 (i − n//2)Δ 對原點對稱
        detector = DetectorGrid(spacing=0.5, count=15)
        scan = create_scan_grid(0.5, 9, geometry.nu)
        record = simulate_scan(phantom, density, geometry, detector, scan, SimulationSettings(Ns=64, Nv=24))
        samples = record.samples
        assert np.any(samples != 0)
        assert np.max(np.abs(samples - samples[::-1, ::-1])) <= 1e-10 * np.max(np.abs(samples))

    def test_three_dimensional_scan(self):
        geometry = ScanGeometry(d=3, k0=2.0, omega=(0, 0, 1), nu=(0, 0, 1), L=2.0, r=1.0)
        phantom = create_phantom(
            [{"kind": "ball", "center": [0, 0, 0], "radius": 0.5, "contrast_re": 0.05}], r=1.0, d=3
        )
        density = create_density({"variant": "gaussian", "A": 0.5}, 2.0, geometry.omega)
        detector = DetectorGrid(spacing=0.5, count=8)
        scan = create_scan_grid(0.5, 8, geometry.nu)
        record = simulate_scan(phantom, density, geometry, detector, scan, SimulationSettings(Ns=16, Nv=8))
        assert record.samples.shape == (64, 64)
        assert np.any(record.samples != 0)

        spectrum = measurement_spectrum(record, taper=None)
        assert spectrum.values.shape == (64, 64)
        reduced = reduce_measurements(spectrum, geometry)
        assert reduced.eta.shape[1] == 3
        assert np.allclose(np.linalg.norm(reduced.sigma, axis=-1), 2.0)
        assert np.allclose(np.linalg.norm(reduced.eta, axis=-1), 2.0)


class TestNoise:
    def test_seeded_noise_is_reproducible(self):
        samples = np.exp(1j * np.linspace(0, 10, 4000))
        first = add_complex_noise(samples, 20.0, seed=3)
        second = add_complex_noise(samples, 20.0, seed=3)
        assert np.array_equal(first, second)
        ratio = np.mean(np.abs(first - samples) ** 2) / np.mean(np.abs(samples) ** 2)
        assert ratio == pytest.approx(0.01, rel=0.2)

    def test_zero_samples_stay_zero(self):
        samples = np.zeros((4, 4), dtype=complex)
        assert np.array_equal(add_complex_noise(samples, 10.0, seed=1), samples)

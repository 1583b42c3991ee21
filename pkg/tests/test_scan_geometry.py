# -*- coding: utf-8 -*-
"""掃描幾何與傅立葉覆蓋測試"""

import math

import numpy as np
import pytest

from rdt_errors import ContractError, DomainError, GeometryError, GridSizeError, UnsupportedDimensionError
from scan_geometry import (
    RegionTag,
    ScanGeometry,
    SigmaClass,
    arc_length_total,
    boundary_band,
    classify_sigma,
    classify_sigma_array,
    coverage_mask,
    coverage_mask_bruteforce,
    coverage_membership,
    covered_area_fractions,
    frequency_axis,
    hemisphere_lift,
    householder_reflect,
    kappa,
    reflection_shape_report,
    region_mask,
    sigma_arcs_2d,
    sphere_points_2d,
)
from scan_presets import get_all_preset_names, get_preset_geometry


class TestScanGeometry:
    def test_detector_must_be_outside_support(self):
        with pytest.raises(GeometryError, match="L > r"):
            ScanGeometry(d=2, k0=1.0, omega=(0, 1), nu=(0, 1), L=1.0, r=1.0)

    def test_rejects_non_unit_vectors(self):
        with pytest.raises(GeometryError):
            ScanGeometry(d=2, k0=1.0, omega=(0, 2), nu=(0, 1), L=2.0, r=1.0)

    def test_from_angles_is_exact_on_axes(self):
        geo = ScanGeometry.from_angles(k0=1.0, omega_deg=-90, nu_deg=180)
        assert geo.omega == (0.0, -1.0)
        assert geo.nu == (-1.0, 0.0)

    def test_dict_round_trip(self, transmission_geometry):
        again = ScanGeometry.from_dict(transmission_geometry.to_dict())
        assert again == transmission_geometry
        assert again.same_as(transmission_geometry)


class TestPrimitives:
    def test_kappa(self):
        assert kappa([0.0, 0.0], 2.0) == 2.0
        assert kappa([1.2], 2.0) == pytest.approx(1.6, abs=1e-12)
        assert kappa([2.0], 2.0) == 0.0

    def test_kappa_evanescent(self):
        with pytest.raises(DomainError, match="evanescent"):
            kappa([2.1], 2.0)

    def test_hemisphere_lift(self):
        k0 = 3.0
        assert np.allclose(hemisphere_lift([1.2, 0.0], [0.0, 1.0], 2.0), [1.2, 1.6])
        assert np.allclose(hemisphere_lift([0.0, 0.0], [0.0, 1.0], k0), [0.0, k0])
        assert np.allclose(hemisphere_lift([0.6 * k0, 0.0], [0.0, -1.0], k0), [0.6 * k0, -0.8 * k0])

    def test_hemisphere_lift_requires_orthogonal_input(self):
        with pytest.raises(ContractError):
            hemisphere_lift([0.3, 0.3], [0.0, 1.0], 2.0)

    def test_householder(self):
        assert np.allclose(householder_reflect([0.3, 0.4], [0.0, 1.0]), [0.3, -0.4])
        assert np.allclose(householder_reflect([0.7, 0.0], [0.0, 1.0]), [0.7, 0.0])
        v = np.array([0.6, 0.8])
        assert np.allclose(householder_reflect(v, v), -v)
        with pytest.raises(ContractError):
            householder_reflect([1.0, 0.0], [0.0, 2.0])

    def test_householder_is_an_involution(self):
        rng = np.random.default_rng(1)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        x = rng.normal(size=(50, 3))
        assert np.allclose(householder_reflect(householder_reflect(x, v), v), x, atol=1e-14)


class TestSigmaClasses:
    def test_examples(self, transmission_geometry, oblique_tilted_geometry):
        assert classify_sigma([0.0, 1.0], transmission_geometry) == SigmaClass.SIGMA1
        sigma = [math.cos(math.radians(20)), math.sin(math.radians(20))]
        assert classify_sigma(sigma, oblique_tilted_geometry) == SigmaClass.SIGMA2_TILDE

    def test_off_sphere_rejected(self, transmission_geometry):
        with pytest.raises(ContractError):
            classify_sigma([0.0, 0.5], transmission_geometry)

    @pytest.mark.parametrize("angle", [90, -90, 30, 200])
    def test_degenerate_identities(self, angle):
        """ν = ±ω 時 Σ₂ = ∅ 且 Σ₁ = S_ω；ω ⊥ ν 時 Σ₁ = ∅（取樣 10⁴ 點、排除邊界帶）"""
        rng = np.random.default_rng(angle % 360)
        theta = rng.uniform(0, 2 * math.pi, 10_000)
        sigma = sphere_points_2d(1.0, theta)
        omega = ScanGeometry.from_angles(1.0, angle, angle).omega_vec
        support = sigma @ omega > 1e-6

        for nu_angle in (angle, angle + 180):
            geo = ScanGeometry.from_angles(1.0, angle, nu_angle)
            codes = classify_sigma_array(sigma[support], geo)
            assert np.all(codes == SigmaClass.SIGMA1)

        geo = ScanGeometry.from_angles(1.0, angle, angle + 90)
        codes = classify_sigma_array(sigma[support], geo)
        assert not np.any(codes == SigmaClass.SIGMA1)
        assert np.all((codes == SigmaClass.SIGMA2) | (codes == SigmaClass.SIGMA2_TILDE) | (codes == SigmaClass.BOUNDARY))

    def test_arcs_for_degenerate_configurations(self):
        parallel = sigma_arcs_2d(ScanGeometry.from_angles(1.0, 90, 90))
        assert arc_length_total(parallel["sigma1"]) == pytest.approx(math.pi)
        assert parallel["sigma2"] == []

        perpendicular = sigma_arcs_2d(ScanGeometry.from_angles(1.0, 90, 0))
        assert perpendicular["sigma1"] == []
        assert arc_length_total(perpendicular["sigma2"]) == pytest.approx(math.pi)

    def test_tilde_arc_is_upper_part_of_sigma2(self, oblique_tilted_geometry):
        arcs = sigma_arcs_2d(oblique_tilted_geometry)
        assert arc_length_total(arcs["sigma_tilde"]) == pytest.approx(math.pi / 4)
        assert any(lo <= math.pi / 8 <= hi for lo, hi in arcs["sigma_tilde"])
        assert arc_length_total(arcs["sigma2"]) == pytest.approx(math.pi / 2)

    def test_arcs_three_dimensions_unsupported(self):
        geo = ScanGeometry(d=3, k0=1.0, omega=(0, 0, 1), nu=(0, 0, 1), L=2.0, r=1.0)
        with pytest.raises(UnsupportedDimensionError):
            sigma_arcs_2d(geo)


class TestCoverage:
    def test_membership_examples(self, transmission_geometry):
        assert coverage_membership([1.0, 0.0], transmission_geometry) == RegionTag.Y1
        assert coverage_membership([0.0, 1.5], transmission_geometry) == RegionTag.OUTSIDE
        assert coverage_membership([0.0, 0.0], transmission_geometry) == RegionTag.Y1

    def test_grid_limits(self, transmission_geometry):
        with pytest.raises(ContractError):
            coverage_mask(transmission_geometry, "naive", 8)
        with pytest.raises(GridSizeError):
            coverage_mask(transmission_geometry, "naive", 10_000)

    def test_transmission_is_two_disks(self):
        """Y₁ 與中心 (±k0, 0) 的兩個圓盤之對稱差 ≤ 1%"""
        k0, N = 2.0, 256
        tags = coverage_mask(ScanGeometry.from_angles(k0, 90, 90), "naive", N)
        axis = frequency_axis(k0, N)
        y1, y2 = np.meshgrid(axis, axis, indexing="ij")
        disks = ((y1 - k0) ** 2 + y2 ** 2 < k0 * k0) | ((y1 + k0) ** 2 + y2 ** 2 < k0 * k0)
        symdiff = np.sum(disks ^ (tags == RegionTag.Y1)) / np.sum(disks)
        assert symdiff <= 0.01
        fractions = covered_area_fractions(tags)
        assert fractions["Y1"] == pytest.approx(2 * math.pi / 16, rel=0.01)

    def test_reflection_misses_low_frequencies(self):
        """原點附近只剩沿 y₂ 軸的尖角，下半平面完全沒有覆蓋"""
        k0, N = 1.0, 128
        tags = coverage_mask(ScanGeometry.from_angles(k0, -90, -90), "naive", N)
        axis = frequency_axis(k0, N)
        y1, y2 = np.meshgrid(axis, axis, indexing="ij")
        covered = tags == RegionTag.Y1
        assert not np.any(covered[y2 < 0])
        near_origin = (y1 ** 2 + y2 ** 2 < (0.2 * k0) ** 2) & (y2 > 0)
        assert covered[near_origin].mean() < 0.1

    def test_reflection_shape_matches_disks_on_horizontal_axis(self):
        report = reflection_shape_report(k0=1.0, N=256)
        assert report["matches"] == "disks_at_(±k0,0)"
        assert report["symmetric_difference"]["disks_at_(±k0,0)"] <= 0.01

    @pytest.mark.parametrize("angle", [90, -90])
    def test_vertical_configurations_are_mirror_symmetric(self, angle):
        """ν = ω = ±e₂ 時覆蓋在 y₁ ↦ −y₁ 下不變"""
        geometry = ScanGeometry.from_angles(1.0, angle, angle)
        for mode in ("naive", "advanced"):
            tags = coverage_mask(geometry, mode, 128)
            assert np.array_equal(tags, tags[::-1, :])

    def test_coverage_shrinks_as_beam_tilts(self):
        """ν = e₂ 固定，ω 由 e₂ 逐步傾斜時 Y₁ 面積不增"""
        counts = [
            int(np.sum(coverage_mask(ScanGeometry.from_angles(1.0, angle, 90), "naive", 128) == RegionTag.Y1))
            for angle in (90, 70, 50, 30, 10)
        ]
        assert counts[0] > 0
        assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))
        assert counts[-1] < counts[0]

    def test_advanced_is_strictly_larger(self, oblique_tilted_geometry):
        naive = coverage_mask(oblique_tilted_geometry, "naive", 128)
        advanced = coverage_mask(oblique_tilted_geometry, "advanced", 128, workers=2)
        naive_region = region_mask(naive, "naive", 2)
        advanced_region = region_mask(advanced, "advanced", 2)
        assert np.all(advanced_region[naive_region])
        assert advanced_region.sum() > naive_region.sum()
        assert np.any(advanced == RegionTag.Y_TILDE)

    def test_threads_do_not_change_result(self, oblique_tilted_geometry):
        single = coverage_mask(oblique_tilted_geometry, "advanced", 64, workers=1)
        threaded = coverage_mask(oblique_tilted_geometry, "advanced", 64, workers=4)
        assert np.array_equal(single, threaded)

    @pytest.mark.parametrize("name", get_all_preset_names())
    def test_bruteforce_agreement(self, name):
        """解析判定與 (η, σ) 暴力法只在 2 格邊界帶內不同"""
        geo = get_preset_geometry(name, k0=1.0)
        for mode in ("naive", "advanced"):
            analytic = coverage_mask(geo, mode, 128)
            brute = coverage_mask_bruteforce(geo, mode, 128, M=720)
            mismatched = (analytic != brute) & ~boundary_band(analytic, 2)
            assert int(mismatched.sum()) == 0, f"{name}/{mode}"

    @pytest.mark.slow
    @pytest.mark.parametrize("name", get_all_preset_names())
    def test_bruteforce_agreement_full_raster(self, name):
        geo = get_preset_geometry(name, k0=1.0)
        analytic = coverage_mask(geo, "advanced", 512)
        brute = coverage_mask_bruteforce(geo, "advanced", 512, M=720)
        assert int(((analytic != brute) & ~boundary_band(analytic, 2)).sum()) == 0

    def test_three_dimensional_mask(self):
        geo = ScanGeometry(d=3, k0=1.0, omega=(0, 0, 1), nu=(0, 0, 1), L=2.0, r=1.0)
        tags = coverage_mask(geo, "naive", 16)
        assert tags.shape == (16, 16, 16)
        assert np.any(tags == RegionTag.Y1)
        advanced = region_mask(coverage_mask(geo, "advanced", 16), "advanced", 3)
        assert np.all(advanced[tags == RegionTag.Y1])

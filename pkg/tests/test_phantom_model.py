# -*- coding: utf-8 -*-
"""解析假體測試：空間值、封閉形式傅立葉轉換與中點法對照"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from phantom_model import (
    Phantom,
    Primitive,
    create_phantom,
    eval_potential,
    eval_potential_array,
    eval_potential_fourier,
    eval_potential_fourier_array,
    fourier_by_quadrature,
    index_from_potential,
    potential_from_index,
)
from rdt_errors import ContractError, DomainError, UnsupportedDimensionError


def ball(center, radius, contrast=1.0):
    return {"kind": "ball", "center": list(center), "radius": radius, "contrast_re": contrast}


def gaussian(center, width, contrast=1.0 + 0.0j):
    return {
        "kind": "gaussian",
        "center": list(center),
        "width": width,
        "contrast_re": complex(contrast).real,
        "contrast_im": complex(contrast).imag,
    }


class TestConstruction:
    def test_support_must_fit_inside_ball(self):
        with pytest.raises(ContractError):
            create_phantom([ball([1.5, 0.0], 1.0)], r=2.0)

    def test_gaussian_support_uses_truncation_widths(self):
        with pytest.raises(ContractError):
            create_phantom([gaussian([0, 0], 0.75)], r=4.0)
        phantom = create_phantom([gaussian([0, 0], 0.75)], r=4.0, truncation_widths=5)
        assert phantom.smallest_feature == 0.75

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            Phantom(primitives=(), r=1.0, d=4)

    def test_primitive_dict_round_trip(self):
        prim = Primitive("gaussian", (0.1, 0.2), 0.3, 0.5 - 0.25j)
        assert Primitive.from_dict(prim.to_dict()) == prim

    def test_scaled_and_flags(self):
        phantom = create_phantom([ball([0, 0], 1.0, 0.2)], r=2.0)
        assert phantom.is_real
        assert not phantom.is_empty
        assert phantom.scaled(0.0).is_empty
        assert phantom.weak_scattering_advisory() == pytest.approx(0.8)


class TestSpatial:
    def test_values(self):
        phantom = create_phantom([ball([0, 0], 1.0, 0.3)], r=2.0)
        assert eval_potential(phantom, [0.0, 0.0]) == pytest.approx(0.3)
        assert eval_potential(phantom, [2.0, 0.0]) == 0

    def test_zero_outside_support_ball(self):
        phantom = create_phantom([gaussian([0, 0], 0.2)], r=1.2)
        points = np.array([[1.3, 0.0], [0.0, -2.0]])
        assert np.all(eval_potential_array(phantom, points) == 0)


class TestFourier:
    def test_ball_closed_form_matches_bessel(self):
        phantom = create_phantom([ball([0, 0], 1.0)], r=1.0)
        assert eval_potential_fourier(phantom, [1.0, 0.0]).real == pytest.approx(special.j1(1.0), rel=1e-14)
        assert eval_potential_fourier(phantom, [1.0, 0.0]).real == pytest.approx(0.4400505857449335, rel=1e-12)

    def test_ball_against_direct_polar_quadrature(self):
        """(2π)^{−1} ∫∫ cos(ρ r cos θ) r dθ dr 的二維數值積分"""
        phantom = create_phantom([ball([0, 0], 1.0)], r=1.0)
        rho = 1.0
        value, _ = integrate.dblquad(
            lambda theta, r: math.cos(rho * r * math.cos(theta)) * r / (2 * math.pi),
            0.0,
            1.0,
            0.0,
            2 * math.pi,
            epsabs=1e-14,
            epsrel=1e-12,
        )
        assert abs(eval_potential_fourier(phantom, [0.0, rho]) - value) <= 1e-8 * abs(value)

    def test_gaussian_dc_value(self):
        phantom = create_phantom([gaussian([0, 0], 1.0)], r=6.0)
        assert eval_potential_fourier(phantom, [0.0, 0.0]) == pytest.approx(1.0)

    def test_translation_phase(self):
        centered = create_phantom([gaussian([0, 0], 0.3)], r=2.0)
        shifted = centered.shifted([0.1, -0.2])
        y = np.array([1.3, 0.4])
        expected = eval_potential_fourier(centered, y) * np.exp(-1j * y @ np.array([0.1, -0.2]))
        assert eval_potential_fourier(shifted, y) == pytest.approx(expected, rel=1e-13)

    def test_hermitian_for_real_phantoms(self):
        phantom = create_phantom([gaussian([0.3, 0.1], 0.3), ball([-0.5, 0.2], 0.4, 0.2)], r=2.5)
        rng = np.random.default_rng(3)
        y = rng.uniform(-2, 2, size=(20, 2))
        assert np.allclose(
            eval_potential_fourier_array(phantom, -y),
            np.conj(eval_potential_fourier_array(phantom, y)),
            atol=1e-14,
        )

    def test_random_gaussian_phantoms_match_quadrature(self):
        """隨機高斯假體：封閉解與中點法相對誤差 ≤ 1e−4"""
        rng = np.random.default_rng(7)
        r = 3.0
        for _ in range(20):
            entries = []
            for _ in range(rng.integers(1, 4)):
                width = rng.uniform(0.15, 0.4)
                reach = r - 6 * width
                angle = rng.uniform(0, 2 * math.pi)
                radius = rng.uniform(0, reach)
                contrast = complex(rng.normal(), rng.normal())
                entries.append(gaussian([radius * math.cos(angle), radius * math.sin(angle)], width, contrast))
            phantom = create_phantom(entries, r=r)
            radii = rng.uniform(0, 2.0, 200)
            angles = rng.uniform(0, 2 * math.pi, 200)
            ys = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)
            exact = eval_potential_fourier_array(phantom, ys)
            oracle = fourier_by_quadrature(phantom, ys, Nv=200)
            scale = np.max(np.abs(exact))
            assert np.max(np.abs(exact - oracle)) <= 1e-4 * scale

    def test_ball_against_quadrature(self):
        phantom = create_phantom([ball([0.1, -0.2], 1.0, 0.5)], r=1.5)
        ys = np.array([[0.0, 0.0], [0.7, 0.3], [-1.2, 1.1], [1.9, 0.0]])
        exact = eval_potential_fourier_array(phantom, ys)
        oracle = fourier_by_quadrature(phantom, ys, Nv=300)
        assert np.max(np.abs(exact - oracle)) <= 5e-3 * abs(exact[0])

    def test_three_dimensional_gaussian(self):
        phantom = create_phantom([gaussian([0.1, 0.0, -0.1], 0.18)], r=1.3, d=3)
        ys = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, -0.3], [0.0, 2.0, 0.0]])
        exact = eval_potential_fourier_array(phantom, ys)
        oracle = fourier_by_quadrature(phantom, ys, Nv=48)
        assert np.max(np.abs(exact - oracle)) <= 1e-4 * np.max(np.abs(exact))

    def test_three_dimensional_ball(self):
        phantom = create_phantom([ball([0, 0, 0], 1.0)], r=1.0, d=3)
        assert eval_potential_fourier(phantom, [0, 0, 0]).real == pytest.approx(
            (2 * math.pi) ** -1.5 * 4 / 3 * math.pi
        )
        ys = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 1.0, 0.5]])
        exact = eval_potential_fourier_array(phantom, ys)
        oracle = fourier_by_quadrature(phantom, ys, Nv=60)
        assert np.max(np.abs(exact - oracle)) <= 2e-2 * abs(exact[0])


class TestRefractiveIndex:
    def test_round_trip(self):
        n = 1.05 + 0.01j
        assert index_from_potential(potential_from_index(n, 3.0), 3.0) == pytest.approx(n)

    def test_nonphysical_contrast(self):
        with pytest.raises(DomainError, match="nonphysical contrast"):
            index_from_potential(-2.0, 1.0)

    def test_k0_must_be_positive(self):
        with pytest.raises(ContractError):
            index_from_potential(0.0, 0.0)

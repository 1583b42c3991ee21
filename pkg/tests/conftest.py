# -*- coding: utf-8 -*-
"""
pytest 共用設定
將專案根目錄加入 sys.path，並提供小規模的幾何、假體與設定檔
"""

import json
import math
import os
import sys

import pytest

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

from herglotz_beam import create_density  # noqa: E402
from phantom_model import create_phantom  # noqa: E402
from scan_geometry import ScanGeometry  # noqa: E402

TWO_PI = 2.0 * math.pi


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 驗收規模的長時間測試（預設仍會執行，可用 -m 'not slow' 略過）")


@pytest.fixture
def transmission_geometry():
    """k0 = 1 的標準透射幾何 ν = ω = e₂"""
    return ScanGeometry(d=2, k0=1.0, omega=(0.0, 1.0), nu=(0.0, 1.0), L=4.0, r=3.0)


@pytest.fixture
def oblique_tilted_geometry():
    """ω = (1/√2, −1/√2)、ν = e₂，Ỹ 非空"""
    s = math.sqrt(0.5)
    return ScanGeometry(d=2, k0=1.0, omega=(s, -s), nu=(0.0, 1.0), L=4.0, r=3.0)


@pytest.fixture
def small_blob():
    """k0 = 1 尺度的小高斯團塊"""
    return create_phantom(
        [{"kind": "gaussian", "center": [0.2, -0.1], "width": 0.5, "contrast_re": 0.01}],
        r=3.0,
        truncation_widths=5.0,
    )


def weak_gaussian_density(geometry, A=0.05):
    return create_density({"variant": "gaussian", "A": A}, geometry.k0, geometry.omega)


def small_run_config(omega=(0.0, 1.0), nu=(0.0, 1.0), contrast=0.05, detector_spacing=0.25):
    """
    CLI 測試用的小規模 RunConfig（k0 = 2π、32 × 32 網格）

    求積階數 128 ≥ 4·k0·(max‖y‖ + r)
    """
    return {
        "geometry": {"d": 2, "k0": TWO_PI, "omega": list(omega), "nu": list(nu), "L": 2.0, "r": 1.0},
        "phantom": [
            {"kind": "gaussian", "center": [0.0, 0.0], "width": 0.2, "contrast_re": contrast, "contrast_im": 0.0}
        ],
        "density": {"variant": "gaussian", "A": 0.5},
        "detector": {"spacing": detector_spacing, "count": 32},
        "scan": {"spacing": 0.25, "count": 32},
        "accuracy": {"Ns": 128, "Nv": 16, "gamma": 0.95, "taper": 0.6, "truncation_widths": 5.0},
        "seed": 0,
    }


@pytest.fixture
def write_config(tmp_path):
    """寫出 RunConfig JSON 並回傳路徑"""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write

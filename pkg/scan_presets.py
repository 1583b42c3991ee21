# -*- coding: utf-8 -*-
"""
二維掃描組態預設集

六種代表性組態（光束方向 ω、掃描法向量 ν 的角度，以度為單位）。
透射：ω = e₂；反射：ω = −e₂；斜向：其他方向。
"""

from typing import Dict, List, Tuple

from rdt_errors import ConfigError
from scan_geometry import ScanGeometry

# 格式：{名稱: (ω 角度, ν 角度)}
SCAN_PRESETS: Dict[str, Tuple[float, float]] = {
    "standard_transmission": (90.0, 90.0),
    "tilted_transmission": (90.0, 60.0),
    "standard_reflection": (-90.0, -90.0),
    "tilted_reflection": (-90.0, 60.0),
    "oblique": (45.0, 45.0),
    "oblique_tilted": (-45.0, 90.0),  # 含非空的 Ỹ
}

# 各組態的中文說明（CLI 說明文字與報表用）
PRESET_DESCRIPTIONS: Dict[str, str] = {
    "standard_transmission": "標準透射（垂直掃描 ν = ω = e₂）",
    "tilted_transmission": "傾斜掃描透射",
    "standard_reflection": "標準反射（ν = ω = −e₂）",
    "tilted_reflection": "傾斜掃描反射",
    "oblique": "斜向入射、垂直掃描",
    "oblique_tilted": "斜向入射、傾斜掃描",
}


def get_preset_angles(name: str) -> Tuple[float, float]:
    """
    取得預設組態的 (ω 角度, ν 角度)

    Raises:
        ConfigError: 未知的組態名稱

    Examples:
        >>> get_preset_angles("oblique_tilted")
        (-45.0, 90.0)

        >>> get_preset_angles("standard_reflection")
        (-90.0, -90.0)
    """
    if name not in SCAN_PRESETS:
        raise ConfigError(f"未知的掃描組態: {name}（可用：{', '.join(SCAN_PRESETS)}）")
    return SCAN_PRESETS[name]


def get_preset_geometry(name: str, k0: float = 1.0, L: float = 2.0, r: float = 1.0) -> ScanGeometry:
    """
    依預設組態建立二維 ScanGeometry

    Examples:
        >>> geo = get_preset_geometry("standard_transmission")
        >>> geo.omega, geo.nu
        ((0.0, 1.0), (0.0, 1.0))
    """
    omega_deg, nu_deg = get_preset_angles(name)
    return ScanGeometry.from_angles(k0=k0, omega_deg=omega_deg, nu_deg=nu_deg, L=L, r=r)


def get_all_preset_names() -> List[str]:
    """
    Examples:
        >>> get_all_preset_names()[:2]
        ['standard_transmission', 'tilted_transmission']
    """
    return list(SCAN_PRESETS.keys())

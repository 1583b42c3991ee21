# -*- coding: utf-8 -*-
"""
解析假體模組
定義弱散射物體（球體、高斯團塊），提供空間域與傅立葉域的封閉解，
作為 FDT 驗證與重建測試的真值

傅立葉慣例：F_d φ(y) = (2π)^{−d/2} ∫ φ(x) e^{−i⟨y,x⟩} dx
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy import special

from rdt_errors import ContractError, DomainError, UnsupportedDimensionError

PRIMITIVE_KINDS = ("ball", "gaussian")
# 高斯團塊在支撐球檢查時的截斷寬度（倍數）
DEFAULT_TRUNCATION_WIDTHS = 6.0


@dataclass(frozen=True)
class Primitive:
    """
    單一假體元件

    Args:
        kind: "ball" 或 "gaussian"
        center: 中心點
        size: 球體半徑 R 或高斯寬度 w
        contrast: 複數位勢振幅
    """

    kind: str
    center: Tuple[float, ...]
    size: float
    contrast: complex

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise ContractError(f"未知的假體元件類型: {self.kind}")
        if not self.size > 0:
            raise ContractError(f"元件尺寸必須 > 0，收到 {self.size}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "contrast", complex(self.contrast))

    @property
    def d(self) -> int:
        return len(self.center)

    def support_radius(self, truncation_widths: float = DEFAULT_TRUNCATION_WIDTHS) -> float:
        """元件有效支撐（以中心為圓心）的半徑"""
        if self.kind == "ball":
            return self.size
        return truncation_widths * self.size

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind,
            "center": list(self.center),
            "contrast_re": self.contrast.real,
            "contrast_im": self.contrast.imag,
        }
        data["radius" if self.kind == "ball" else "width"] = self.size
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Primitive":
        size = data["radius"] if data["kind"] == "ball" else data["width"]
        return cls(
            kind=data["kind"],
            center=tuple(data["center"]),
            size=float(size),
            contrast=complex(data.get("contrast_re", 0.0), data.get("contrast_im", 0.0)),
        )


@dataclass(frozen=True)
class Phantom:
    """
    元件集合與支撐半徑 r

    建構時檢查所有元件的有效支撐都落在半徑 r 的球內。
    """

    primitives: Tuple[Primitive, ...]
    r: float
    d: int = 2
    truncation_widths: float = DEFAULT_TRUNCATION_WIDTHS

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if self.d not in (2, 3):
            raise UnsupportedDimensionError(f"假體僅支援 d=2 或 d=3，收到 d={self.d}")
        if not self.r > 0:
            raise ContractError(f"支撐半徑 r 必須 > 0，收到 {self.r}")
        for prim in self.primitives:
            if prim.d != self.d:
                raise ContractError(f"元件中心維度 {prim.d} 與假體維度 {self.d} 不符")
            reach = float(np.linalg.norm(prim.center)) + prim.support_radius(self.truncation_widths)
            if reach > self.r * (1.0 + 1e-12):
                raise ContractError(
                    f"元件 {prim.kind} 的支撐（延伸至 {reach:.6g}）超出支撐球 r={self.r}"
                )

    def weak_scattering_advisory(self) -> float:
        """max|f|·r²（高斯與球體的最大值都出現在中心附近，取元件振幅總和作上界）"""
        peak = sum(abs(prim.contrast) for prim in self.primitives)
        return float(peak * self.r * self.r)

    def scaled(self, factor: complex) -> "Phantom":
        """所有元件對比度乘上 factor 的新假體"""
        return Phantom(
            primitives=tuple(
                Primitive(p.kind, p.center, p.size, p.contrast * factor) for p in self.primitives
            ),
            r=self.r,
            d=self.d,
            truncation_widths=self.truncation_widths,
        )

    def shifted(self, offset: Sequence[float]) -> "Phantom":
        """平移所有元件（支撐半徑同步放大，使檢查仍然成立）"""
        shift = np.asarray(offset, dtype=float)
        return Phantom(
            primitives=tuple(
                Primitive(p.kind, tuple(np.asarray(p.center) + shift), p.size, p.contrast)
                for p in self.primitives
            ),
            r=self.r + float(np.linalg.norm(shift)),
            d=self.d,
            truncation_widths=self.truncation_widths,
        )

    @property
    def is_real(self) -> bool:
        return all(p.contrast.imag == 0.0 for p in self.primitives)

    @property
    def is_empty(self) -> bool:
        return all(p.contrast == 0 for p in self.primitives)

    @property
    def smallest_feature(self) -> float:
        if not self.primitives:
            return self.r
        return min(p.size for p in self.primitives)

    def to_list(self) -> List[Dict[str, Any]]:
        return [p.to_dict() for p in self.primitives]


def create_phantom(
    entries: Sequence[Dict[str, Any]],
    r: float,
    d: int = 2,
    truncation_widths: float = DEFAULT_TRUNCATION_WIDTHS,
) -> Phantom:
    """
    由設定檔的元件清單建立假體

    Args:
        entries: [{kind, center, radius|width, contrast_re, contrast_im}, ...]
        r: 支撐半徑
        d: 維度
        truncation_widths: 高斯團塊截斷寬度

    Returns:
        Phantom

    Examples:
        >>> ph = create_phantom([{"kind": "ball", "center": [0, 0], "radius": 1.0,
        ...                       "contrast_re": 1.0, "contrast_im": 0.0}], r=2.0)
        >>> len(ph.primitives)
        1
    """
    phantom = Phantom(
        primitives=tuple(Primitive.from_dict(entry) for entry in entries),
        r=r,
        d=d,
        truncation_widths=truncation_widths,
    )
    logging.debug(
        f"[phantom] 建立假體：{len(phantom.primitives)} 個元件，"
        f"弱散射指標 max|f|·r² = {phantom.weak_scattering_advisory():.3g}"
    )
    return phantom


def eval_potential_array(phantom: Phantom, points) -> np.ndarray:
    """
    向量化計算散射位勢 f(x)

    Args:
        phantom: 假體
        points: (..., d) 空間座標

    Returns:
        np.ndarray: 複數陣列；支撐球外恆為 0
    """
    pts = np.asarray(points, dtype=float)
    values = np.zeros(pts.shape[:-1], dtype=complex)
    for prim in phantom.primitives:
        dist_sq = np.sum((pts - np.asarray(prim.center)) ** 2, axis=-1)
        if prim.kind == "ball":
            values += prim.contrast * (dist_sq < prim.size * prim.size)
        else:
            values += prim.contrast * np.exp(-dist_sq / (2.0 * prim.size * prim.size))
    outside = np.sum(pts * pts, axis=-1) > phantom.r * phantom.r
    values[outside] = 0.0
    return values


def eval_potential(phantom: Phantom, x) -> complex:
    """
    單點散射位勢

    Examples:
        >>> ph = create_phantom([{"kind": "ball", "center": [0, 0], "radius": 1.0,
        ...                       "contrast_re": 0.3}], r=2.0)
        >>> eval_potential(ph, [0.0, 0.0])
        (0.3+0j)
        >>> eval_potential(ph, [2.0, 0.0])
        0j
    """
    return complex(eval_potential_array(phantom, np.asarray(x, dtype=float)[None, :])[0])


def _ball_fourier_radial(rho: np.ndarray, R: float, d: int) -> np.ndarray:
    """原點球體的徑向傅立葉值，ρ → 0 取極限"""
    small = rho < 1e-8 / R
    safe = np.where(small, 1.0, rho)
    if d == 2:
        value = R * special.j1(R * safe) / safe
        limit = R * R / 2.0
    else:
        x = R * safe
        value = (2.0 * math.pi) ** -1.5 * 4.0 * math.pi * (np.sin(x) - x * np.cos(x)) / safe ** 3
        limit = (2.0 * math.pi) ** -1.5 * 4.0 / 3.0 * math.pi * R ** 3
    return np.where(small, limit, value)


def eval_potential_fourier_array(phantom: Phantom, freqs) -> np.ndarray:
    """
    向量化封閉形式傅立葉轉換 F_d f(y)

    Args:
        phantom: 假體
        freqs: (..., d) 頻率點

    Returns:
        np.ndarray: 複數陣列
    """
    ys = np.asarray(freqs, dtype=float)
    rho = np.linalg.norm(ys, axis=-1)
    values = np.zeros(ys.shape[:-1], dtype=complex)
    for prim in phantom.primitives:
        phase = np.exp(-1j * (ys @ np.asarray(prim.center)))
        if prim.kind == "ball":
            radial = _ball_fourier_radial(rho, prim.size, phantom.d)
        else:
            w = prim.size
            radial = w ** phantom.d * np.exp(-0.5 * w * w * rho * rho)
        values += prim.contrast * radial * phase
    return values


def eval_potential_fourier(phantom: Phantom, y) -> complex:
    """
    單點傅立葉值

    Examples:
        >>> ph = create_phantom([{"kind": "gaussian", "center": [0, 0], "width": 1.0,
        ...                       "contrast_re": 1.0}], r=6.0)
        >>> eval_potential_fourier(ph, [0.0, 0.0])
        (1+0j)
    """
    return complex(eval_potential_fourier_array(phantom, np.asarray(y, dtype=float)[None, :])[0])


def index_from_potential(f_value: complex, k0: float) -> complex:
    """
    由散射位勢反推折射率 n = sqrt(1 + f/k0²)（主分支）

    Raises:
        ContractError: k0 ≤ 0
        DomainError: 1 + f/k0² 為負實數（nonphysical contrast）

    Examples:
        >>> index_from_potential(0.0, 1.0)
        (1+0j)
        >>> round(index_from_potential(100.0 * (1.05 ** 2 - 1), 10.0).real, 12)
        1.05
    """
    if not k0 > 0:
        raise ContractError(f"k0 必須 > 0，收到 {k0}")
    z = 1.0 + complex(f_value) / (k0 * k0)
    if z.imag == 0.0 and z.real < 0.0:
        raise DomainError(f"nonphysical contrast：1 + f/k0² = {z.real:.6g} 為負實數")
    return cmath.sqrt(z)


def potential_from_index(n_value: complex, k0: float) -> complex:
    """f = k0²(n² − 1)"""
    return k0 * k0 * (complex(n_value) ** 2 - 1.0)


def voxel_grid(r: float, Nv: int, d: int) -> Tuple[np.ndarray, float]:
    """
    [−r, r]^d 上的中點網格

    Returns:
        (points, cell_volume)：points 形狀 (Nv^d, d)
    """
    h = 2.0 * r / Nv
    axis = -r + (np.arange(Nv) + 0.5) * h
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=-1)
    return points, h ** d


def fourier_by_quadrature(phantom: Phantom, freqs, Nv: int) -> np.ndarray:
    """
    以中點法直接計算 (2π)^{−d/2} ∫ f(x) e^{−i⟨y,x⟩} dx，作為封閉解的驗證基準
    """
    points, cell = voxel_grid(phantom.r, Nv, phantom.d)
    f_vals = eval_potential_array(phantom, points)
    keep = f_vals != 0
    points, f_vals = points[keep], f_vals[keep]
    ys = np.atleast_2d(np.asarray(freqs, dtype=float))
    out = np.empty(ys.shape[0], dtype=complex)
    for start in range(0, ys.shape[0], 32):
        block = ys[start:start + 32]
        out[start:start + 32] = np.exp(-1j * block @ points.T) @ f_vals
    return out * cell * (2.0 * math.pi) ** (-phantom.d / 2.0)

# -*- coding: utf-8 -*-
"""
掃描幾何模組
處理半球面參數化、Householder 反射、Σ 分類與傅立葉覆蓋集合（Y₁、Ỹ、Y₂）的判定與網格化

功能：
    - ScanGeometry：維度 d、波數 k0、光束方向 ω、掃描法向量 ν、偵測器距離 L、支撐半徑 r
    - classify_sigma：將半徑 k0 球面上的 σ 分類為 Σ₁ / Σ₂ / Σ̃ / 邊界 / 支撐外
    - coverage_membership / coverage_mask：二維以圓與圓交點精確判定，三維以交線圓取樣
    - coverage_mask_bruteforce：(η, σ) 角度網格暴力法，作為驗證基準
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from typing_extensions import Literal

from rdt_errors import (
    ContractError,
    DomainError,
    GeometryError,
    GridSizeError,
    UnsupportedDimensionError,
)

# 單位向量容許誤差
UNIT_TOL = 1e-12
# 球面半徑容許誤差
SPHERE_TOL = 1e-10
# τ_geo = GEO_TOL_FACTOR · k0
GEO_TOL_FACTOR = 1e-9
# 網格解析度上限（記憶體保護）
MAX_GRID_2D = 8192
MAX_GRID_3D = 256
# 三維判定時交線圓的取樣點數
CIRCLE_SAMPLES_3D = 256

CoverageMode = Literal["naive", "advanced"]
COVERAGE_MODES: Tuple[str, ...] = ("naive", "advanced")


class SigmaClass(IntEnum):
    """σ 的分類標籤"""

    OUTSIDE_SUPPORT = 0
    SIGMA1 = 1
    SIGMA2 = 2
    SIGMA2_TILDE = 3
    BOUNDARY = 4


class RegionTag(IntEnum):
    """覆蓋集合的區域標籤（Y₂_GRAY 表示 Y₂ 中不可唯一還原的部分）"""

    OUTSIDE = 0
    Y1 = 1
    Y_TILDE = 2
    Y2_GRAY = 3


@dataclass(frozen=True)
class ScanGeometry:
    """
    掃描幾何設定

    Args:
        d: 空間維度（≥ 2）
        k0: 波數（rad/長度），須 > 0
        omega: 光束方向單位向量 ω
        nu: 掃描平面法向量 ν
        L: 偵測器平面 x_d = L 的距離
        r: 物體支撐球半徑，須滿足 L > r

    Raises:
        GeometryError: 不變量不成立時
    """

    d: int
    k0: float
    omega: Tuple[float, ...]
    nu: Tuple[float, ...]
    L: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "k0", float(self.k0))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "omega", tuple(float(v) for v in self.omega))
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))

        if self.d < 2:
            raise GeometryError(f"維度須 ≥ 2，收到 d={self.d}")
        for name in ("omega", "nu"):
            vec = getattr(self, name)
            if len(vec) != self.d:
                raise GeometryError(f"{name} 長度 {len(vec)} 與維度 d={self.d} 不符")
            norm = math.sqrt(sum(v * v for v in vec))
            if abs(norm - 1.0) > UNIT_TOL:
                raise GeometryError(f"{name} 必須為單位向量（‖{name}‖={norm!r}）")
        if not self.k0 > 0:
            raise GeometryError(f"k0 必須 > 0，收到 {self.k0}")
        if not self.r > 0:
            raise GeometryError(f"r 必須 > 0，收到 {self.r}")
        if not self.L > self.r:
            raise GeometryError(f"偵測器距離不合法：需滿足 L > r（L={self.L}, r={self.r}）")

    @property
    def omega_vec(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)

    @property
    def nu_vec(self) -> np.ndarray:
        return np.asarray(self.nu, dtype=float)

    @property
    def e_d(self) -> np.ndarray:
        """偵測器平面法向量（最後一個標準基底向量）"""
        vec = np.zeros(self.d)
        vec[-1] = 1.0
        return vec

    @property
    def tau(self) -> float:
        """半空間判定的容許誤差 τ_geo"""
        return GEO_TOL_FACTOR * self.k0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "k0": self.k0,
            "omega": list(self.omega),
            "nu": list(self.nu),
            "L": self.L,
            "r": self.r,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScanGeometry":
        return cls(
            d=data["d"],
            k0=data["k0"],
            omega=tuple(data["omega"]),
            nu=tuple(data["nu"]),
            L=data["L"],
            r=data["r"],
        )

    @classmethod
    def from_angles(
        cls,
        k0: float,
        omega_deg: float,
        nu_deg: float,
        L: float = 2.0,
        r: float = 1.0,
    ) -> "ScanGeometry":
        """
        以角度（度）建立二維幾何，ω = (cos θ_ω, sin θ_ω)，ν 同理

        Examples:
            >>> geo = ScanGeometry.from_angles(k0=1.0, omega_deg=90, nu_deg=90)
            >>> [round(v, 12) for v in geo.omega]
            [0.0, 1.0]
        """
        return cls(
            d=2,
            k0=k0,
            omega=unit_vector_from_degrees(omega_deg),
            nu=unit_vector_from_degrees(nu_deg),
            L=L,
            r=r,
        )

    def same_as(self, other: "ScanGeometry", rtol: float = 1e-12) -> bool:
        """比對兩組幾何是否一致（用於量測紀錄與參數的交叉檢查）"""
        if self.d != other.d:
            return False
        pairs = [(self.k0, other.k0), (self.L, other.L), (self.r, other.r)]
        pairs += list(zip(self.omega, other.omega)) + list(zip(self.nu, other.nu))
        return all(math.isclose(a, b, rel_tol=rtol, abs_tol=rtol) for a, b in pairs)


def unit_vector_from_degrees(angle_deg: float) -> Tuple[float, float]:
    """二維單位向量 (cos θ, sin θ)，θ 以度為單位；座標軸方向回傳精確值"""
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    # 90 的倍數時去除 6e-17 之類的殘差，使 ν = ω = ±e₂ 的退化判定成立
    if float(angle_deg) % 90.0 == 0.0:
        c, s = float(round(c)), float(round(s))
    return (c, s)


# ---------------------------------------------------------------------------
# 基本幾何運算
# ---------------------------------------------------------------------------

def kappa(xi, k0: float):
    """
    計算 κ(ξ) = sqrt(k0² − ‖ξ‖²)

    Args:
        xi: 頻率向量（最後一維為座標），純量視為一維頻率
        k0: 波數

    Returns:
        非負純量或陣列；根號內數值距 0 在 1e-12 內時回傳 0

    Raises:
        DomainError: ‖ξ‖ 超過 k0（evanescent frequency）

    Examples:
        >>> kappa([0.0, 0.0], 2.0)
        2.0
        >>> round(kappa([1.2], 2.0), 12)
        1.6
    """
    arr = np.asarray(xi, dtype=float)
    norm_sq = arr * arr if arr.ndim == 0 else np.sum(arr * arr, axis=-1)
    tol = 1e-12 * max(1.0, k0)
    if np.any(np.sqrt(norm_sq) > k0 + tol):
        raise DomainError(f"evanescent frequency：‖ξ‖ 超過 k0={k0}")
    radicand = k0 * k0 - norm_sq
    radicand = np.where(radicand <= 1e-12, 0.0, radicand)
    value = np.sqrt(radicand)
    return float(value) if np.ndim(value) == 0 else value


def hemisphere_lift(xi, v, k0: float) -> np.ndarray:
    """
    半球面提升 h_v(ξ) = ξ + κ(ξ)·v

    Args:
        xi: v⊥ 中的頻率向量（可為 (..., d) 陣列）
        v: 單位向量
        k0: 波數

    Returns:
        np.ndarray: 半徑 k0、與 v 內積為正的點

    Raises:
        ContractError: ξ 不與 v 正交
        DomainError: ‖ξ‖ ≥ k0

    Examples:
        >>> hemisphere_lift([1.2, 0.0], [0.0, 1.0], 2.0).round(12).tolist()
        [1.2, 1.6]
    """
    xi_arr = np.asarray(xi, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    dots = xi_arr @ v_arr
    if np.any(np.abs(dots) > 1e-10 * max(1.0, k0)):
        raise ContractError("hemisphere_lift：ξ 必須與 v 正交")
    norms = np.linalg.norm(xi_arr, axis=-1)
    if np.any(norms >= k0):
        raise DomainError(f"hemisphere_lift：‖ξ‖ 必須 < k0（evanescent frequency）")
    kap = np.sqrt(k0 * k0 - norms * norms)
    return xi_arr + np.multiply.outer(kap, v_arr)


def householder_reflect(x, v, check: bool = True) -> np.ndarray:
    """
    Householder 反射 H_v(x) = x − 2⟨x, v⟩v

    Raises:
        ContractError: v 不是單位向量

    Examples:
        >>> householder_reflect([0.3, 0.4], [0.0, 1.0]).tolist()
        [0.3, -0.4]
    """
    x_arr = np.asarray(x, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if check and abs(float(np.linalg.norm(v_arr)) - 1.0) > UNIT_TOL:
        raise ContractError("householder_reflect：v 必須為單位向量")
    return x_arr - 2.0 * np.multiply.outer(x_arr @ v_arr, v_arr)


def sphere_points_2d(k0: float, angles) -> np.ndarray:
    """半徑 k0 圓上角度 angles 對應的點"""
    angles = np.asarray(angles, dtype=float)
    return k0 * np.stack([np.cos(angles), np.sin(angles)], axis=-1)


# ---------------------------------------------------------------------------
# Σ 分類
# ---------------------------------------------------------------------------

def classify_sigma_array(
    sigmas,
    geometry: ScanGeometry,
    check_norm: bool = True,
) -> np.ndarray:
    """
    向量化的 Σ 分類，回傳 SigmaClass 整數碼陣列（int8）

    Args:
        sigmas: (..., d) 陣列，點須位於半徑 k0 的球面
        geometry: 掃描幾何
        check_norm: 是否檢查 ‖σ‖ = k0

    Raises:
        ContractError: ‖σ‖ ≠ k0
    """
    s = np.asarray(sigmas, dtype=float)
    if check_norm:
        norms = np.linalg.norm(s, axis=-1)
        if np.any(np.abs(norms - geometry.k0) > SPHERE_TOL * max(1.0, geometry.k0)):
            raise ContractError("classify_sigma：σ 必須位於半徑 k0 的球面上")

    tau = geometry.tau
    reflected = householder_reflect(s, geometry.nu_vec, check=False)
    p = s @ geometry.omega_vec
    q = reflected @ geometry.omega_vec

    out = np.full(s.shape[:-1], SigmaClass.BOUNDARY, dtype=np.int8)
    out[p <= -tau] = SigmaClass.OUTSIDE_SUPPORT
    inside = p > tau
    out[inside & (q <= -tau)] = SigmaClass.SIGMA1
    sigma2 = inside & (q > tau)
    out[sigma2] = SigmaClass.SIGMA2

    if geometry.d == 2:
        a = s[..., -1]
        b = reflected[..., -1]
        tilde = sigma2 & (a > tau) & (b <= -tau)
        near_axis = sigma2 & ((np.abs(a) <= tau) | (np.abs(b) <= tau))
        out[tilde] = SigmaClass.SIGMA2_TILDE
        out[near_axis & ~tilde] = SigmaClass.BOUNDARY
    return out


def classify_sigma(sigma, geometry: ScanGeometry) -> SigmaClass:
    """
    將單一點 σ 分類

    Args:
        sigma: 半徑 k0 球面上的點
        geometry: 掃描幾何

    Returns:
        SigmaClass

    Examples:
        >>> geo = ScanGeometry.from_angles(k0=1.0, omega_deg=90, nu_deg=90)
        >>> classify_sigma([0.0, 1.0], geo).name
        'SIGMA1'
    """
    code = classify_sigma_array(np.asarray(sigma, dtype=float)[None, :], geometry)[0]
    return SigmaClass(int(code))


def in_sigma2(codes: np.ndarray) -> np.ndarray:
    """Σ₂（含 Σ̃）的布林遮罩"""
    return (codes == SigmaClass.SIGMA2) | (codes == SigmaClass.SIGMA2_TILDE)


# ---------------------------------------------------------------------------
# 二維弧段
# ---------------------------------------------------------------------------

Arc = Tuple[float, float]  # (起始角, 弧長)


def _half_circle_arc(vec: np.ndarray) -> Arc:
    center = math.atan2(vec[1], vec[0])
    return ((center - math.pi / 2.0) % (2.0 * math.pi), math.pi)


def _intersect_arcs(first: Optional[Arc], second: Optional[Arc]) -> Optional[Arc]:
    """兩段長度 ≤ π 的開弧交集（至多一段）"""
    if first is None or second is None:
        return None
    start_a, len_a = first
    start_b, len_b = second
    offset = (start_b - start_a) % (2.0 * math.pi)
    best: Optional[Arc] = None
    for shift in (offset, offset - 2.0 * math.pi):
        lo = max(0.0, shift)
        hi = min(len_a, shift + len_b)
        if hi - lo > 1e-12 and (best is None or hi - lo > best[1]):
            best = ((start_a + lo) % (2.0 * math.pi), hi - lo)
    return best


def _arc_to_intervals(arc: Optional[Arc]) -> List[Tuple[float, float]]:
    if arc is None:
        return []
    start, length = arc
    end = start + length
    two_pi = 2.0 * math.pi
    if end <= two_pi:
        return [(start, end)]
    return [(start, two_pi), (0.0, end - two_pi)]


def _sigma_arcs(geometry: ScanGeometry) -> Dict[str, Optional[Arc]]:
    omega = geometry.omega_vec
    h_omega = householder_reflect(omega, geometry.nu_vec)
    h_e2 = householder_reflect(geometry.e_d, geometry.nu_vec)
    support = _half_circle_arc(omega)
    sigma1 = _intersect_arcs(support, _half_circle_arc(-h_omega))
    sigma2 = _intersect_arcs(support, _half_circle_arc(h_omega))
    tilde = _intersect_arcs(
        _intersect_arcs(sigma2, _half_circle_arc(geometry.e_d)),
        _half_circle_arc(-h_e2),
    )
    return {"sigma1": sigma1, "sigma2": sigma2, "sigma_tilde": tilde}


def sigma_arcs_2d(geometry: ScanGeometry) -> Dict[str, List[Tuple[float, float]]]:
    """
    二維時 Σ₁、Σ₂、Σ̃ 在 [0, 2π) 上的閉角度區間

    跨越角度 0 的弧段拆成兩個區間。

    Args:
        geometry: 二維掃描幾何

    Returns:
        Dict: {"sigma1": [...], "sigma2": [...], "sigma_tilde": [...]}

    Raises:
        UnsupportedDimensionError: d ≠ 2

    Examples:
        >>> geo = ScanGeometry.from_angles(k0=1.0, omega_deg=90, nu_deg=0)
        >>> sigma_arcs_2d(geo)["sigma1"]
        []
    """
    if geometry.d != 2:
        raise UnsupportedDimensionError(f"sigma_arcs_2d 僅支援 d=2，收到 d={geometry.d}")
    return {name: _arc_to_intervals(arc) for name, arc in _sigma_arcs(geometry).items()}


def arc_length_total(intervals: Sequence[Tuple[float, float]]) -> float:
    return float(sum(end - start for start, end in intervals))


# ---------------------------------------------------------------------------
# 覆蓋集合判定
# ---------------------------------------------------------------------------

def frequency_axis(k0: float, N: int) -> np.ndarray:
    """[−2k0, 2k0] 上 N 個網格中心點"""
    h = 4.0 * k0 / N
    return -2.0 * k0 + (np.arange(N) + 0.5) * h


def _candidates_2d(points: np.ndarray, k0: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    y = η − σ 且 ‖η‖ = ‖σ‖ = k0 的至多兩組 η 候選（兩圓交點）

    Returns:
        (eta, valid)：eta 形狀 (P, 2, 2)，valid 形狀 (P, 2)
    """
    rho = np.linalg.norm(points, axis=-1)
    valid = (rho <= 2.0 * k0) & (rho > 0.0)
    safe_rho = np.where(rho > 0.0, rho, 1.0)
    half_chord = np.sqrt(np.maximum(k0 * k0 - rho * rho / 4.0, 0.0))
    perp = np.stack([-points[:, 1], points[:, 0]], axis=-1) / safe_rho[:, None]
    mid = points / 2.0
    eta = np.stack(
        [mid + half_chord[:, None] * perp, mid - half_chord[:, None] * perp],
        axis=1,
    )
    return eta, np.repeat(valid[:, None], 2, axis=1)


def _candidates_3d(points: np.ndarray, k0: float, samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """三維：兩球面交線圓上取樣的 η 候選，形狀 (P, samples, 3)"""
    rho = np.linalg.norm(points, axis=-1)
    valid = (rho <= 2.0 * k0) & (rho > 0.0)
    safe_rho = np.where(rho > 0.0, rho, 1.0)
    unit = points / safe_rho[:, None]
    helper = np.where(
        (np.abs(unit[:, 0]) < 0.9)[:, None],
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
    )
    u = helper - np.sum(helper * unit, axis=-1)[:, None] * unit
    u /= np.linalg.norm(u, axis=-1)[:, None]
    w = np.cross(unit, u)
    radius = np.sqrt(np.maximum(k0 * k0 - rho * rho / 4.0, 0.0))
    phi = 2.0 * math.pi * np.arange(samples) / samples
    ring = (
        np.cos(phi)[None, :, None] * u[:, None, :]
        + np.sin(phi)[None, :, None] * w[:, None, :]
    )
    eta = points[:, None, :] / 2.0 + radius[:, None, None] * ring
    return eta, np.repeat(valid[:, None], samples, axis=1)


def _origin_flags(geometry: ScanGeometry) -> Tuple[bool, bool]:
    """y = 0 時 (η = σ) 是否屬於 Y₁ / Y₂"""
    if geometry.d == 2:
        arcs = _sigma_arcs(geometry)
        upper = _half_circle_arc(geometry.e_d)
        return (
            _intersect_arcs(arcs["sigma1"], upper) is not None,
            _intersect_arcs(arcs["sigma2"], upper) is not None,
        )
    upper = fibonacci_sphere(4096, geometry.k0)
    upper = upper[upper[:, -1] > geometry.tau]
    codes = classify_sigma_array(upper, geometry, check_norm=False)
    return bool(np.any(codes == SigmaClass.SIGMA1)), bool(np.any(in_sigma2(codes)))


def coverage_tags(
    points,
    geometry: ScanGeometry,
    mode: str = "naive",
    circle_samples: int = CIRCLE_SAMPLES_3D,
) -> np.ndarray:
    """
    向量化的覆蓋區域標籤（RegionTag 整數碼）

    Args:
        points: (P, d) 頻率點
        geometry: 掃描幾何
        mode: "naive" 或 "advanced"
        circle_samples: 三維交線圓取樣點數
    """
    if mode not in COVERAGE_MODES:
        raise ContractError(f"未知的覆蓋模式: {mode}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k0 = geometry.k0
    tau = geometry.tau
    if geometry.d == 2:
        eta, valid = _candidates_2d(pts, k0)
    else:
        eta, valid = _candidates_3d(pts, k0, circle_samples)
    sigma = eta - pts[:, None, :]
    eta_up = valid & (eta[..., -1] > tau)
    codes = classify_sigma_array(sigma, geometry, check_norm=False)

    in_y1 = np.any(eta_up & (codes == SigmaClass.SIGMA1), axis=1)
    in_y2 = np.any(eta_up & in_sigma2(codes), axis=1)
    in_tilde = np.zeros_like(in_y1)
    if geometry.d == 2:
        minus_eta = classify_sigma_array(-eta, geometry, check_norm=False)
        in_tilde = np.any(
            eta_up
            & (minus_eta == SigmaClass.SIGMA1)
            & (codes == SigmaClass.SIGMA2_TILDE),
            axis=1,
        )

    at_origin = np.linalg.norm(pts, axis=-1) <= 1e-12 * k0
    if np.any(at_origin):
        origin_y1, origin_y2 = _origin_flags(geometry)
        in_y1 = np.where(at_origin, origin_y1, in_y1)
        in_y2 = np.where(at_origin, origin_y2, in_y2)
        in_tilde = np.where(at_origin, False, in_tilde)

    tags = np.full(pts.shape[0], RegionTag.OUTSIDE, dtype=np.int8)
    tags[in_y2] = RegionTag.Y2_GRAY
    if mode == "advanced" and geometry.d == 2:
        tags[in_tilde] = RegionTag.Y_TILDE
    tags[in_y1] = RegionTag.Y1
    return tags


def coverage_membership(y, geometry: ScanGeometry, mode: str = "naive") -> RegionTag:
    """
    判定單一頻率點 y 所屬的覆蓋區域

    二維以半徑 k0 的兩圓（中心 0 與 y）交點列舉所有 (η, σ)，
    再檢查弧段條件；三維則取樣兩球面的交線圓。

    Examples:
        >>> geo = ScanGeometry.from_angles(k0=1.0, omega_deg=90, nu_deg=90)
        >>> coverage_membership([1.0, 0.0], geo).name
        'Y1'
        >>> coverage_membership([0.0, 1.5], geo).name
        'OUTSIDE'
    """
    point = np.asarray(y, dtype=float)
    if point.shape != (geometry.d,):
        raise ContractError(f"頻率點維度須為 {geometry.d}")
    return RegionTag(int(coverage_tags(point[None, :], geometry, mode)[0]))


def region_mask(tags: np.ndarray, mode: str, d: int) -> np.ndarray:
    """
    依模式取得反投影使用的遮罩

    naive：Y₁；advanced：d = 2 時 Y₁ ∪ Ỹ，d ≥ 3 時 Y = Y₁ ∪ Y₂
    """
    if mode == "naive":
        return tags == RegionTag.Y1
    if d == 2:
        return (tags == RegionTag.Y1) | (tags == RegionTag.Y_TILDE)
    return tags != RegionTag.OUTSIDE


def _check_grid_size(N: int, d: int) -> None:
    if N < 16:
        raise ContractError(f"網格解析度須 ≥ 16，收到 N={N}")
    limit = MAX_GRID_2D if d == 2 else MAX_GRID_3D
    if N > limit:
        raise GridSizeError(f"網格解析度 N={N} 超過上限 {limit}（out-of-memory guard）")


def coverage_mask(
    geometry: ScanGeometry,
    mode: str = "naive",
    N: int = 512,
    workers: int = 1,
) -> np.ndarray:
    """
    在 [−2k0, 2k0]^d 的 N^d 網格中心計算區域標籤

    Args:
        geometry: 掃描幾何
        mode: "naive" 或 "advanced"
        N: 每軸格數（16 ≤ N ≤ 8192；三維 ≤ 256）
        workers: 逐列平行計算的執行緒數

    Returns:
        np.ndarray: int8 標籤陣列，第 a 軸對應第 a 個座標（ij 索引）

    Raises:
        ContractError: N < 16
        GridSizeError: N 超過上限
    """
    _check_grid_size(N, geometry.d)
    axis = frequency_axis(geometry.k0, N)
    d = geometry.d

    def _row(index: int) -> np.ndarray:
        rest = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
        pts = np.stack(
            [np.full(rest[0].size, axis[index])] + [g.ravel() for g in rest],
            axis=-1,
        )
        return coverage_tags(pts, geometry, mode).reshape((N,) * (d - 1))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, range(N)))
    else:
        rows = [_row(i) for i in range(N)]
    tags = np.stack(rows, axis=0)
    logging.info(
        f"[coverage_mask] 模式={mode} N={N} Y₁ 格數={int(np.sum(tags == RegionTag.Y1))}"
    )
    return tags


def covered_area_fractions(tags: np.ndarray) -> Dict[str, float]:
    """各區域佔 [−2k0, 2k0]^d 的面積比例"""
    total = float(tags.size)
    return {
        "Y1": float(np.sum(tags == RegionTag.Y1)) / total,
        "Y_tilde": float(np.sum(tags == RegionTag.Y_TILDE)) / total,
        "Y2_gray": float(np.sum(tags == RegionTag.Y2_GRAY)) / total,
        "covered": float(np.sum((tags == RegionTag.Y1) | (tags == RegionTag.Y_TILDE))) / total,
    }


def coverage_mask_bruteforce(
    geometry: ScanGeometry,
    mode: str = "naive",
    N: int = 512,
    M: int = 720,
) -> np.ndarray:
    """
    暴力法覆蓋標籤：在 M×M 的 (η, σ) 角度網格上列舉 y = η − σ

    每個取樣點落入最近的格子後再做 3×3 膨脹以填補取樣間隙，
    因此與 coverage_mask 的差異僅出現在區域邊界附近。

    Raises:
        UnsupportedDimensionError: d ≠ 2
    """
    if geometry.d != 2:
        raise UnsupportedDimensionError("coverage_mask_bruteforce 僅支援 d=2")
    _check_grid_size(N, 2)
    k0 = geometry.k0
    tau = geometry.tau
    h = 4.0 * k0 / N
    circle = sphere_points_2d(k0, 2.0 * math.pi * np.arange(M) / M)
    codes = classify_sigma_array(circle, geometry, check_norm=False)
    minus_codes = classify_sigma_array(-circle, geometry, check_norm=False)
    eta_up = circle[:, -1] > tau

    def _scatter(eta: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        hit = np.zeros((N, N), dtype=bool)
        if eta.size and sigma.size:
            diff = (eta[:, None, :] - sigma[None, :, :]).reshape(-1, 2)
            idx = np.floor((diff + 2.0 * k0) / h).astype(np.int64)
            keep = np.all((idx >= 0) & (idx < N), axis=1)
            hit[idx[keep, 0], idx[keep, 1]] = True
        return ndimage.binary_dilation(hit, structure=np.ones((3, 3), dtype=bool))

    y1 = _scatter(circle[eta_up], circle[codes == SigmaClass.SIGMA1])
    y2 = _scatter(circle[eta_up], circle[in_sigma2(codes)])
    tilde = _scatter(
        circle[eta_up & (minus_codes == SigmaClass.SIGMA1)],
        circle[codes == SigmaClass.SIGMA2_TILDE],
    )

    tags = np.full((N, N), RegionTag.OUTSIDE, dtype=np.int8)
    tags[y2] = RegionTag.Y2_GRAY
    if mode == "advanced":
        tags[tilde] = RegionTag.Y_TILDE
    tags[y1] = RegionTag.Y1
    return tags


def boundary_band(tags: np.ndarray, width: int = 2) -> np.ndarray:
    """標籤在 Chebyshev 距離 width 內有變化的格子"""
    size = 2 * width + 1
    hi = ndimage.maximum_filter(tags, size=size, mode="nearest")
    lo = ndimage.minimum_filter(tags, size=size, mode="nearest")
    return hi != lo


def reflection_shape_report(k0: float = 1.0, N: int = 512) -> Dict[str, Any]:
    """
    比對標準反射（ω = ν = −e₂）的 Y₁ 與兩種解析描述

    候選一：上半圓盤（半徑 2k0）扣除中心 (0, ±k0) 的兩個半徑 k0 圓盤
    候選二：上半圓盤（半徑 2k0）扣除中心 (±k0, 0) 的兩個半徑 k0 圓盤

    Returns:
        Dict: 兩候選的對稱差面積比例與吻合者
    """
    geometry = ScanGeometry.from_angles(k0=k0, omega_deg=-90, nu_deg=-90)
    tags = coverage_mask(geometry, "naive", N)
    computed = tags == RegionTag.Y1
    axis = frequency_axis(k0, N)
    y1, y2 = np.meshgrid(axis, axis, indexing="ij")
    half_disk = (y2 > 0) & (y1 ** 2 + y2 ** 2 < 4 * k0 * k0)

    def _minus_disks(centers: Sequence[Tuple[float, float]]) -> np.ndarray:
        region = half_disk.copy()
        for cx, cy in centers:
            region &= (y1 - cx) ** 2 + (y2 - cy) ** 2 > k0 * k0
        return region

    candidates = {
        "disks_at_(0,±k0)": _minus_disks([(0.0, k0), (0.0, -k0)]),
        "disks_at_(±k0,0)": _minus_disks([(k0, 0.0), (-k0, 0.0)]),
    }
    report: Dict[str, Any] = {"k0": k0, "N": N, "symmetric_difference": {}}
    for name, region in candidates.items():
        symdiff = float(np.sum(region ^ computed)) / max(float(np.sum(region)), 1.0)
        report["symmetric_difference"][name] = symdiff
    best = min(report["symmetric_difference"], key=report["symmetric_difference"].get)
    report["matches"] = best if report["symmetric_difference"][best] <= 0.01 else None
    logging.info(f"[reflection_shape_report] 標準反射覆蓋吻合：{report['matches']}")
    return report


def fibonacci_sphere(count: int, radius: float = 1.0) -> np.ndarray:
    """三維球面上近似均勻的 count 個點（Fibonacci 格點）"""
    index = np.arange(count) + 0.5
    z = 1.0 - 2.0 * index / count
    phi = math.pi * (3.0 - math.sqrt(5.0)) * index
    rho = np.sqrt(1.0 - z * z)
    return radius * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)

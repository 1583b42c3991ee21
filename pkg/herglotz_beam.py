# -*- coding: utf-8 -*-
"""
Herglotz 光束模組
半徑 k0 球面上的 Herglotz 密度 a(s)、入射場求積與高斯光束唯一性條件檢查

密度種類：
    - gaussian：a(s) = exp(−A‖s − ⟨s,ω⟩ω‖²)，⟨s,ω⟩ > 0
    - uniform_half：S_ω 上恆為 1
    - tabulated：角度節點上的複數值，週期線性內插（僅 d=2）
所有種類在 ⟨s,ω⟩ ≤ 0 時皆為 0。
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre

from rdt_errors import ContractError, DomainError, UnsupportedDimensionError
from scan_geometry import GEO_TOL_FACTOR, SPHERE_TOL, UNIT_TOL, fibonacci_sphere, householder_reflect

DENSITY_VARIANTS = ("gaussian", "uniform_half", "tabulated")
MIN_QUADRATURE_ORDER = 16
# 比值 b(σ) 的分母下限
RATIO_FLOOR = 1e-300
# |Db| 視為零的門檻與允許的零集合比例
ZERO_DERIVATIVE_TOL = 1e-12
MAX_ZERO_FRACTION = 0.05


@dataclass(frozen=True)
class HerglotzDensity:
    """
    Herglotz 密度

    Args:
        variant: "gaussian" / "uniform_half" / "tabulated"
        k0: 波數
        omega: 光束方向
        A: 高斯光束腰參數（僅 gaussian）
        table_angles: 表格節點角度（弧度，僅 tabulated）
        table_values: 表格節點複數值
        taper_deg: 支撐邊界的 C² 漸變寬度（度），0 表示硬遮罩
    """

    variant: str
    k0: float
    omega: Tuple[float, ...]
    A: float = 0.0
    table_angles: Tuple[float, ...] = ()
    table_values: Tuple[complex, ...] = ()
    taper_deg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(v) for v in self.omega))
        if self.variant not in DENSITY_VARIANTS:
            raise ContractError(f"未知的密度種類: {self.variant}")
        if abs(math.sqrt(sum(v * v for v in self.omega)) - 1.0) > UNIT_TOL:
            raise ContractError("密度的 ω 必須為單位向量")
        if self.variant == "gaussian" and not self.A > 0:
            raise ContractError(f"高斯光束腰參數 A 必須 > 0，收到 {self.A}")
        if self.variant == "tabulated":
            if self.d != 2:
                raise UnsupportedDimensionError("tabulated 密度僅支援 d=2")
            if len(self.table_angles) < 2 or len(self.table_angles) != len(self.table_values):
                raise ContractError("tabulated 密度需要至少兩個節點，且角度與數值數量一致")
        if self.taper_deg < 0:
            raise ContractError("taper_deg 不可為負")

    @property
    def d(self) -> int:
        return len(self.omega)

    @property
    def omega_vec(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        """密度描述（寫入 RDT1 標頭與設定檔）"""
        data: Dict[str, Any] = {"variant": self.variant}
        if self.variant == "gaussian":
            data["A"] = self.A
        if self.variant == "tabulated":
            data["table"] = {
                "angles_deg": [math.degrees(a) for a in self.table_angles],
                "re": [complex(v).real for v in self.table_values],
                "im": [complex(v).imag for v in self.table_values],
            }
        if self.taper_deg:
            data["taper_deg"] = self.taper_deg
        return data


def create_density(descriptor: Dict[str, Any], k0: float, omega: Sequence[float]) -> HerglotzDensity:
    """
    由設定檔描述建立密度

    Examples:
        >>> dens = create_density({"variant": "gaussian", "A": 0.5}, 1.0, (0.0, 1.0))
        >>> dens.variant
        'gaussian'
    """
    table = descriptor.get("table") or {}
    angles = tuple(math.radians(a) for a in table.get("angles_deg", []))
    re = table.get("re", [])
    im = table.get("im", [0.0] * len(re))
    return HerglotzDensity(
        variant=descriptor["variant"],
        k0=float(k0),
        omega=tuple(omega),
        A=float(descriptor.get("A", 0.0)),
        table_angles=angles,
        table_values=tuple(complex(a, b) for a, b in zip(re, im)),
        taper_deg=float(descriptor.get("taper_deg", 0.0)),
    )


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def eval_density_array(density: HerglotzDensity, points, check: bool = True) -> np.ndarray:
    """
    向量化計算 a(s)

    Args:
        density: 密度
        points: (..., d) 半徑 k0 球面上的點
        check: 是否檢查 ‖s‖ = k0

    Raises:
        ContractError: ‖s‖ ≠ k0
    """
    s = np.asarray(points, dtype=float)
    k0 = density.k0
    if check:
        norms = np.linalg.norm(s, axis=-1)
        if np.any(np.abs(norms - k0) > SPHERE_TOL * max(1.0, k0)):
            raise ContractError("eval_density：s 必須位於半徑 k0 的球面上")
    omega = density.omega_vec
    along = s @ omega
    inside = along > 0.0

    if density.variant == "gaussian":
        transverse = s - np.multiply.outer(along, omega)
        values = np.exp(-density.A * np.sum(transverse * transverse, axis=-1)).astype(complex)
    elif density.variant == "uniform_half":
        values = np.ones(s.shape[:-1], dtype=complex)
    else:
        angles = np.mod(np.arctan2(s[..., 1], s[..., 0]), 2.0 * math.pi)
        nodes = np.mod(np.asarray(density.table_angles), 2.0 * math.pi)
        order = np.argsort(nodes)
        table = np.asarray(density.table_values, dtype=complex)[order]
        nodes = nodes[order]
        values = (
            np.interp(angles, nodes, table.real, period=2.0 * math.pi)
            + 1j * np.interp(angles, nodes, table.imag, period=2.0 * math.pi)
        )

    if density.taper_deg > 0:
        elevation = np.arcsin(np.clip(along / k0, -1.0, 1.0))
        values = values * _smoothstep(elevation / math.radians(density.taper_deg))
    return np.where(inside, values, 0.0)


def eval_density(density: HerglotzDensity, s) -> complex:
    """
    單點密度值

    Examples:
        >>> dens = create_density({"variant": "gaussian", "A": 1.0}, 1.0, (0.0, 1.0))
        >>> eval_density(dens, [0.0, 1.0])
        (1+0j)
        >>> eval_density(dens, [0.0, -1.0])
        0j
    """
    return complex(eval_density_array(density, np.asarray(s, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class BeamQuadrature:
    """
    球面求積節點表（建構後不再變動）

    nodes 只保留密度非零的節點；weights 為面積元素權重；amplitudes = a(s_q)。
    """

    nodes: np.ndarray
    weights: np.ndarray
    amplitudes: np.ndarray
    order: int

    @property
    def weighted_amplitudes(self) -> np.ndarray:
        return self.weights * self.amplitudes

    def __len__(self) -> int:
        return int(self.nodes.shape[0])


def _orthonormal_complement(vec: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(vec[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    first = helper - (helper @ vec) * vec
    first /= np.linalg.norm(first)
    return first, np.cross(vec, first)


def create_beam_quadrature(density: HerglotzDensity, Ns: int) -> BeamQuadrature:
    """
    建立密度支撐上的求積節點

    d=2：整圓梯形法，節點以 ω 為中心對稱；Ns 向上取到 4 的倍數，使半圓恰含 Ns/2 個節點。
    d=3：以 ω 為極軸，cos θ ∈ (0,1) 上 Ns/2 階 Gauss–Legendre 乘上 φ 的 Ns 點梯形法。

    Raises:
        DomainError: Ns < 16（quadrature order too low）
    """
    if Ns < MIN_QUADRATURE_ORDER:
        raise DomainError(f"quadrature order too low：Ns={Ns} < {MIN_QUADRATURE_ORDER}")
    k0 = density.k0
    omega = density.omega_vec

    if density.d == 2:
        Ns = int(4 * math.ceil(Ns / 4))
        center = math.atan2(omega[1], omega[0])
        phi = center - math.pi + 2.0 * math.pi * (np.arange(Ns) + 0.5) / Ns
        nodes = k0 * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        weights = np.full(Ns, k0 * 2.0 * math.pi / Ns)
    elif density.d == 3:
        x, wx = legendre.leggauss(max(Ns // 2, 2))
        u = 0.5 * (x + 1.0)
        wu = 0.5 * wx
        phi = 2.0 * math.pi * np.arange(Ns) / Ns
        e1, e2 = _orthonormal_complement(omega)
        uu, pp = np.meshgrid(u, phi, indexing="ij")
        ss = np.sqrt(1.0 - uu * uu)
        nodes = k0 * (
            (ss * np.cos(pp))[..., None] * e1
            + (ss * np.sin(pp))[..., None] * e2
            + uu[..., None] * omega
        )
        nodes = nodes.reshape(-1, 3)
        weights = (k0 * k0 * np.outer(wu, np.full(Ns, 2.0 * math.pi / Ns))).ravel()
    else:
        raise UnsupportedDimensionError(f"光束求積不支援 d={density.d}")

    amplitudes = eval_density_array(density, nodes, check=False)
    keep = amplitudes != 0
    return BeamQuadrature(
        nodes=nodes[keep],
        weights=weights[keep],
        amplitudes=amplitudes[keep],
        order=Ns,
    )


def incident_field(
    density: HerglotzDensity,
    x,
    y_shift,
    Ns: int,
    nu: Optional[Sequence[float]] = None,
    quadrature: Optional[BeamQuadrature] = None,
):
    """
    平移後的入射場 u^inc(x − y) = ∫ a(s) e^{i⟨x−y, s⟩} dS(s)

    Args:
        density: 密度
        x: 觀測點（(d,) 或 (P, d)）
        y_shift: 掃描平移量 y ∈ ν⊥
        Ns: 求積階數
        nu: 掃描法向量；提供時檢查 ⟨y, ν⟩ = 0
        quadrature: 預先建立的節點表（省略時依 Ns 建立）

    Returns:
        complex 或 np.ndarray

    Raises:
        ContractError: y 不在 ν⊥ 中
        DomainError: Ns < 16
    """
    shift = np.asarray(y_shift, dtype=float)
    if nu is not None and abs(float(shift @ np.asarray(nu, dtype=float))) > 1e-10 * max(1.0, float(np.linalg.norm(shift))):
        raise ContractError("incident_field：平移量 y 必須位於 ν⊥")
    quad = quadrature if quadrature is not None else create_beam_quadrature(density, Ns)
    pts = np.asarray(x, dtype=float)
    rel = pts - shift
    phases = np.exp(1j * (rel @ quad.nodes.T))
    values = phases @ quad.weighted_amplitudes
    return complex(values) if np.ndim(values) == 0 else values


def density_ratio_b(density: HerglotzDensity, sigma, nu) -> complex:
    """
    b(σ) = a(σ) / a(H_ν σ)

    Raises:
        DomainError: |a(H_ν σ)| < 1e−300（ratio undefined outside Σ₂）

    Examples:
        >>> dens = create_density({"variant": "uniform_half"}, 1.0, (0.0, 1.0))
        >>> density_ratio_b(dens, [0.6, 0.8], [0.0, 1.0])
        Traceback (most recent call last):
        ...
        rdt_errors.DomainError: ratio undefined outside Σ₂：|a(H_νσ)| = 0
    """
    point = np.asarray(sigma, dtype=float)
    reflected = householder_reflect(point, nu)
    denominator = eval_density(density, reflected)
    if abs(denominator) < RATIO_FLOOR:
        raise DomainError(f"ratio undefined outside Σ₂：|a(H_νσ)| = {abs(denominator):.3g}")
    return eval_density(density, point) / denominator


def gaussian_ratio_closed_form(A: float, omega, nu, sigma) -> float:
    """高斯光束 b(σ) = exp(A(‖π_ω H_νσ‖² − ‖π_ω σ‖²))"""
    omega = np.asarray(omega, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    reflected = householder_reflect(sigma, nu, check=False)
    proj_h = reflected @ reflected - (reflected @ omega) ** 2
    proj_s = sigma @ sigma - (sigma @ omega) ** 2
    return float(np.exp(A * (proj_h - proj_s)))


def gaussian_derivative_closed_form(A: float, omega, nu, sigma) -> np.ndarray:
    """
    Db(σ)(ν×σ) = 4A·b(σ)·⟨σ,ν⟩⟨ν,ω⟩⟨ω,ν×σ⟩（σ 可為 (P, 3) 陣列）
    """
    omega = np.asarray(omega, dtype=float)
    nu = np.asarray(nu, dtype=float)
    s = np.atleast_2d(np.asarray(sigma, dtype=float))
    reflected = householder_reflect(s, nu, check=False)
    exponent = A * (
        np.sum(reflected * reflected, axis=-1) - (reflected @ omega) ** 2
        - np.sum(s * s, axis=-1) + (s @ omega) ** 2
    )
    cross = np.cross(nu, s)
    return 4.0 * A * np.exp(exponent) * (s @ nu) * float(nu @ omega) * (cross @ omega)


def rotate_about_axis(points, axis, angle: float) -> np.ndarray:
    """Rodrigues 旋轉（axis 為單位向量）"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    axis = np.asarray(axis, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return (
        pts * c
        + np.cross(axis, pts) * s
        + np.multiply.outer(pts @ axis, axis) * (1.0 - c)
    )


def gaussian_condition_check(
    A: float,
    omega,
    nu,
    k0: float,
    M: int = 2000,
) -> Dict[str, Any]:
    """
    三維高斯光束的唯一性條件檢查

    在 Σ₂ 的準均勻取樣點上計算 Db(σ)(ν×σ)；條件成立當且僅當
    |⟨ν,ω⟩| > τ_geo 且 |Db| < 1e−12 的取樣比例 ≤ 5%。Σ₂ 為空時條件自動成立。

    Args:
        A: 光束腰參數
        omega: 光束方向（3 維單位向量）
        nu: 掃描法向量（3 維單位向量）
        k0: 波數
        M: 球面取樣點數

    Returns:
        Dict: status、satisfied、nu_dot_omega、samples、zero_fraction、
              max_abs_derivative、derivatives

    Raises:
        UnsupportedDimensionError: 非三維向量
    """
    omega = np.asarray(omega, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if omega.shape != (3,) or nu.shape != (3,):
        raise UnsupportedDimensionError("gaussian_condition_check 僅支援 d=3（d>3 條件不檢查）")
    for name, vec in (("omega", omega), ("nu", nu)):
        if abs(float(np.linalg.norm(vec)) - 1.0) > UNIT_TOL:
            raise ContractError(f"{name} 必須為單位向量")

    tau = GEO_TOL_FACTOR * k0
    sigmas = fibonacci_sphere(M, k0)
    reflected = householder_reflect(sigmas, nu, check=False)
    in_sigma2 = (sigmas @ omega > tau) & (reflected @ omega > tau)
    sigmas = sigmas[in_sigma2]

    nu_dot_omega = float(nu @ omega)
    derivatives = gaussian_derivative_closed_form(A, omega, nu, sigmas) if len(sigmas) else np.zeros(0)
    zero_fraction = float(np.mean(np.abs(derivatives) < ZERO_DERIVATIVE_TOL)) if len(sigmas) else 0.0
    satisfied = abs(nu_dot_omega) > GEO_TOL_FACTOR and zero_fraction <= MAX_ZERO_FRACTION

    logging.info(
        f"[beam_check] ⟨ν,ω⟩={nu_dot_omega:.6g}，Σ₂ 取樣 {len(sigmas)} 點，"
        f"零導數比例 {zero_fraction:.3%}，條件{'成立' if satisfied else '不成立'}"
    )
    return {
        "status": "satisfied" if satisfied else "unsatisfied",
        "satisfied": bool(satisfied),
        "nu_dot_omega": nu_dot_omega,
        "samples": int(len(sigmas)),
        "zero_fraction": zero_fraction,
        "max_abs_derivative": float(np.max(np.abs(derivatives))) if len(sigmas) else 0.0,
        "derivatives": derivatives,
    }

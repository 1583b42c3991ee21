# -*- coding: utf-8 -*-
"""
Born 前向模擬模組
Green 函數、平面波 Born 場 w(x, s) 以及完整的掃描量測紀錄 m(x, y) = u_y(x)

計算路徑（分解式）：
    1. 體積中點法預先計算 w(x_i, s_q)：G[偵測點 × 體素] @ (f·e^{i⟨x',s_q⟩}·ΔV)
    2. 每個掃描位置以 a(s_q)·e^{−i⟨y_j, s_q⟩}·權重 收縮求積節點
偵測點分塊與掃描列分塊由執行緒池平行處理，各工作者寫入互不重疊的輸出區塊。
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from herglotz_beam import (
    BeamQuadrature,
    HerglotzDensity,
    create_beam_quadrature,
    incident_field,
)
from phantom_model import Phantom, eval_potential_array, voxel_grid
from rdt_errors import (
    ContractError,
    DomainError,
    NyquistError,
    SingularityError,
    UnsupportedDimensionError,
)
from scan_geometry import ScanGeometry, UNIT_TOL

# 估算執行時間用的每秒複數運算量（保守值）
ASSUMED_OPS_PER_SECOND = 2e8
DEFAULT_RUNTIME_BUDGET_S = 600.0
# 每塊偵測點 / 掃描位置數
CHUNK_ROWS = 64


# ---------------------------------------------------------------------------
# Green 函數
# ---------------------------------------------------------------------------

def greens_array(distance, k0: float, d: int) -> np.ndarray:
    """
    向量化外行基本解

    d=2：(i/4)·H₀⁽¹⁾(k0·r)；d=3：e^{ik0 r}/(4πr)

    Raises:
        SingularityError: r = 0
        UnsupportedDimensionError: d 不是 2 或 3
    """
    r = np.asarray(distance, dtype=float)
    if np.any(r <= 0.0):
        raise SingularityError("Green 函數在原點奇異（‖x‖ = 0）")
    if d == 2:
        return 0.25j * special.hankel1(0, k0 * r)
    if d == 3:
        return np.exp(1j * k0 * r) / (4.0 * math.pi * r)
    raise UnsupportedDimensionError(f"Green 函數不支援 d={d}")


def greens(x, k0: float, d: int) -> complex:
    """
    單點 Green 函數值

    Examples:
        >>> import cmath, math
        >>> abs(greens([1.0, 0.0, 0.0], 1.0, 3) - cmath.exp(1j) / (4 * math.pi)) < 1e-15
        True
    """
    vec = np.asarray(x, dtype=float)
    if vec.shape != (d,):
        raise ContractError(f"greens：x 的維度須為 {d}")
    return complex(greens_array(np.linalg.norm(vec), k0, d))


# ---------------------------------------------------------------------------
# 網格型別
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorGrid:
    """
    偵測器平面 e_d⊥ + L·e_d 上的均勻網格（每個切向軸 count 點）

    Args:
        spacing: Δx
        count: Nx
        override_nyquist: 允許 Δx > π/k0
    """

    spacing: float
    count: int
    override_nyquist: bool = False

    def __post_init__(self):
        if not self.spacing > 0:
            raise ContractError(f"偵測器間距必須 > 0，收到 {self.spacing}")
        if self.count < 2:
            raise ContractError(f"偵測器點數必須 ≥ 2，收到 {self.count}")

    @property
    def aperture(self) -> float:
        """孔徑半寬 X = Δx·Nx/2"""
        return self.spacing * self.count / 2.0

    def axis(self) -> np.ndarray:
        """切向座標 (i − Nx/2)·Δx"""
        return (np.arange(self.count) - self.count // 2) * self.spacing

    def positions(self, geometry: ScanGeometry) -> np.ndarray:
        """所有偵測點，形狀 (Nx^(d−1), d)，列優先"""
        mesh = np.meshgrid(*([self.axis()] * (geometry.d - 1)), indexing="ij")
        tangential = [g.ravel() for g in mesh]
        normal = np.full(tangential[0].shape, geometry.L)
        return np.stack(tangential + [normal], axis=-1)

    def check_nyquist(self, k0: float) -> None:
        limit = math.pi / k0
        if self.spacing > limit and not self.override_nyquist:
            raise NyquistError(
                f"偵測器間距 Δx={self.spacing:.6g} 超過半波長 π/k0={limit:.6g}，"
                f"如需略過請設定 override_nyquist"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spacing": self.spacing,
            "count": self.count,
            "override_nyquist": self.override_nyquist,
        }


@dataclass(frozen=True)
class ScanGrid:
    """
    掃描平面 ν⊥ 上的均勻網格

    Args:
        spacing: Δy
        count: 每軸 Ny
        basis: ν⊥ 的正交基底（d−1 個向量）
    """

    spacing: float
    count: int
    basis: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "basis", tuple(tuple(float(v) for v in vec) for vec in self.basis)
        )
        if not self.spacing > 0:
            raise ContractError(f"掃描間距必須 > 0，收到 {self.spacing}")
        if self.count < 2:
            raise ContractError(f"掃描點數必須 ≥ 2，收到 {self.count}")
        gram = self.basis_matrix @ self.basis_matrix.T
        if np.max(np.abs(gram - np.eye(len(self.basis)))) > UNIT_TOL:
            raise ContractError("掃描基底必須為正交單位向量")

    @property
    def basis_matrix(self) -> np.ndarray:
        return np.asarray(self.basis, dtype=float)

    def axis(self) -> np.ndarray:
        return (np.arange(self.count) - self.count // 2) * self.spacing

    def positions(self) -> np.ndarray:
        """所有掃描平移量 y_j，形狀 (Ny^(d−1), d)"""
        mesh = np.meshgrid(*([self.axis()] * len(self.basis)), indexing="ij")
        coords = np.stack([g.ravel() for g in mesh], axis=-1)
        return coords @ self.basis_matrix

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spacing": self.spacing,
            "count": self.count,
            "basis": [list(vec) for vec in self.basis],
        }


def scan_basis(nu: Sequence[float]) -> Tuple[Tuple[float, ...], ...]:
    """
    ν⊥ 的正交基底

    d=2 取 (ν₂, −ν₁)，使 ν = e₂ 時基底為 e₁；d=3 對標準基底做 Gram–Schmidt。

    Examples:
        >>> scan_basis((0.0, 1.0))
        ((1.0, 0.0),)
    """
    nu_vec = np.asarray(nu, dtype=float)
    if nu_vec.size == 2:
        return ((float(nu_vec[1]), float(-nu_vec[0])),)
    vectors: List[np.ndarray] = []
    for candidate in np.eye(nu_vec.size):
        vec = candidate - (candidate @ nu_vec) * nu_vec
        for prev in vectors:
            vec = vec - (vec @ prev) * prev
        norm = np.linalg.norm(vec)
        if norm > 1e-6:
            vectors.append(vec / norm)
        if len(vectors) == nu_vec.size - 1:
            break
    return tuple(tuple(float(v) for v in vec) for vec in vectors)


def create_scan_grid(spacing: float, count: int, nu: Sequence[float]) -> ScanGrid:
    return ScanGrid(spacing=spacing, count=count, basis=scan_basis(nu))


@dataclass
class MeasurementRecord:
    """
    掃描量測紀錄 samples[j, i] = u_{y_j}(x_i)

    形狀為 (Ny^(d−1), Nx^(d−1))。
    """

    geometry: ScanGeometry
    detector: DetectorGrid
    scan: ScanGrid
    density: HerglotzDensity
    samples: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        d = self.geometry.d
        expected = (self.scan.count ** (d - 1), self.detector.count ** (d - 1))
        if tuple(self.samples.shape) != expected:
            raise ContractError(f"量測陣列形狀 {self.samples.shape} 應為 {expected}")


@dataclass(frozen=True)
class SimulationSettings:
    """精度與執行設定"""

    Ns: int = 256
    Nv: int = 128
    workers: int = 1
    runtime_budget_s: float = DEFAULT_RUNTIME_BUDGET_S
    noise_snr_db: Optional[float] = None
    seed: Optional[int] = None


# ---------------------------------------------------------------------------
# 體積積分
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _VolumeSource:
    points: np.ndarray
    weighted_potential: np.ndarray  # f(x')·ΔV
    diagonal: float


def _volume_source(phantom: Phantom, Nv: int) -> _VolumeSource:
    points, cell = voxel_grid(phantom.r, Nv, phantom.d)
    values = eval_potential_array(phantom, points)
    keep = values != 0
    h = 2.0 * phantom.r / Nv
    return _VolumeSource(points[keep], values[keep] * cell, h * math.sqrt(phantom.d))


def _check_observation(points: np.ndarray, phantom: Phantom, diagonal: float) -> None:
    clearance = np.linalg.norm(points, axis=-1).min() - phantom.r
    if clearance < diagonal:
        raise DomainError(
            "observation inside scatterer unsupported："
            f"觀測點需距支撐球至少一個體素對角線（{diagonal:.4g}）"
        )


def _green_block(obs: np.ndarray, source: _VolumeSource, k0: float, d: int) -> np.ndarray:
    diff = obs[:, None, :] - source.points[None, :, :]
    return greens_array(np.linalg.norm(diff, axis=-1), k0, d)


def plane_wave_field(
    phantom: Phantom,
    s,
    x,
    k0: float,
    Nv: int = 128,
):
    """
    平面波 Born 場 w(x, s) = ∫ G(x − x') f(x') e^{i⟨x', s⟩} dx'

    Args:
        phantom: 假體
        s: 入射方向（半徑 k0 球面上）
        x: 觀測點（(d,) 或 (P, d)）
        k0: 波數
        Nv: 每軸體素數

    Raises:
        DomainError: 觀測點距支撐不足一個體素對角線
    """
    obs = np.atleast_2d(np.asarray(x, dtype=float))
    source = _volume_source(phantom, Nv)
    if source.points.shape[0] == 0:
        out = np.zeros(obs.shape[0], dtype=complex)
    else:
        _check_observation(obs, phantom, source.diagonal)
        plane = np.exp(1j * source.points @ np.asarray(s, dtype=float)) * source.weighted_potential
        out = _green_block(obs, source, k0, phantom.d) @ plane
    return complex(out[0]) if np.ndim(x) == 1 else out


def born_field(
    phantom: Phantom,
    density: HerglotzDensity,
    y_shift,
    x,
    Nv: int = 128,
    Ns: int = 256,
    quadrature: Optional[BeamQuadrature] = None,
) -> complex:
    """
    Born 場 u_y(x) = ∫ a(s) w(x, s) e^{−i⟨y, s⟩} dS(s)，以光束求積節點計算
    """
    quad = quadrature if quadrature is not None else create_beam_quadrature(density, Ns)
    shift = np.asarray(y_shift, dtype=float)
    obs = np.atleast_2d(np.asarray(x, dtype=float))
    source = _volume_source(phantom, Nv)
    if source.points.shape[0] == 0 or len(quad) == 0:
        return 0j
    _check_observation(obs, phantom, source.diagonal)
    plane = np.exp(1j * source.points @ quad.nodes.T) * source.weighted_potential[:, None]
    w = _green_block(obs, source, density.k0, phantom.d) @ plane
    coeff = quad.weighted_amplitudes * np.exp(-1j * quad.nodes @ shift)
    return complex((w @ coeff)[0])


def born_field_direct(
    phantom: Phantom,
    density: HerglotzDensity,
    y_shift,
    x,
    Nv: int = 128,
    Ns: int = 256,
) -> complex:
    """
    直接二重積分 ∫ G(x − x') f(x') u^inc(x' − y) dx'，與 born_field 以不同求和順序計算同一積分
    """
    shift = np.asarray(y_shift, dtype=float)
    obs = np.atleast_2d(np.asarray(x, dtype=float))
    source = _volume_source(phantom, Nv)
    if source.points.shape[0] == 0:
        return 0j
    _check_observation(obs, phantom, source.diagonal)
    quad = create_beam_quadrature(density, Ns)
    incident = incident_field(density, source.points, shift, Ns, quadrature=quad)
    green = _green_block(obs, source, density.k0, phantom.d)
    return complex((green @ (source.weighted_potential * incident))[0])


# ---------------------------------------------------------------------------
# 掃描模擬
# ---------------------------------------------------------------------------

def estimate_runtime(
    n_detector: int,
    n_voxels: int,
    n_nodes: int,
    n_scan: int,
) -> float:
    """分解式路徑的粗估秒數（Green 函數計算約以 20 次乘加計）"""
    ops = n_detector * n_voxels * (20 + n_nodes) + n_scan * n_detector * n_nodes
    return ops / ASSUMED_OPS_PER_SECOND


def recommended_quadrature_order(k0: float, scan_points: np.ndarray, r: float) -> int:
    """
    光束求積的建議階數 4·k0·(max‖y‖ + r)，向上取到 4 的倍數

    Examples:
        >>> recommended_quadrature_order(1.0, np.array([[3.0, 0.0]]), 1.0)
        16
    """
    reach = float(np.max(np.linalg.norm(scan_points, axis=-1))) if len(scan_points) else 0.0
    return int(4 * math.ceil(k0 * (reach + r)))


def _parallel_rows(count: int, workers: int, task) -> None:
    starts = list(range(0, count, CHUNK_ROWS))
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(task, starts))
    else:
        for start in starts:
            task(start)


def detector_plane_waves(
    phantom: Phantom,
    nodes: np.ndarray,
    detector_points: np.ndarray,
    k0: float,
    Nv: int,
    workers: int = 1,
) -> np.ndarray:
    """
    所有偵測點與方向節點的 w(x_i, s_q)，形狀 (偵測點數, 節點數)
    """
    source = _volume_source(phantom, Nv)
    out = np.zeros((detector_points.shape[0], nodes.shape[0]), dtype=complex)
    if source.points.shape[0] == 0 or nodes.shape[0] == 0:
        return out
    _check_observation(detector_points, phantom, source.diagonal)
    plane = np.exp(1j * source.points @ nodes.T) * source.weighted_potential[:, None]

    def _task(start: int) -> None:
        block = detector_points[start:start + CHUNK_ROWS]
        out[start:start + CHUNK_ROWS] = _green_block(block, source, k0, phantom.d) @ plane

    _parallel_rows(detector_points.shape[0], workers, _task)
    return out


def plane_wave_detector_field(
    phantom: Phantom,
    s,
    geometry: ScanGeometry,
    detector: DetectorGrid,
    Nv: int = 128,
    workers: int = 1,
) -> np.ndarray:
    """
    單一平面波 w(·, s) 在偵測器網格上的值，形狀 (Nx^(d−1),)
    """
    detector.check_nyquist(geometry.k0)
    nodes = np.asarray(s, dtype=float)[None, :]
    field_values = detector_plane_waves(
        phantom, nodes, detector.positions(geometry), geometry.k0, Nv, workers
    )
    return field_values[:, 0]


def add_complex_noise(samples: np.ndarray, snr_db: float, seed: Optional[int]) -> np.ndarray:
    """依 SNR（dB）加入加性複數高斯雜訊"""
    power = float(np.mean(np.abs(samples) ** 2))
    if power == 0.0:
        return samples
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0) / 2.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
    return samples + sigma * noise


def simulate_scan(
    phantom: Phantom,
    density: HerglotzDensity,
    geometry: ScanGeometry,
    detector: DetectorGrid,
    scan: ScanGrid,
    settings: Optional[SimulationSettings] = None,
) -> MeasurementRecord:
    """
    產生完整掃描量測紀錄

    Args:
        phantom: 假體（支撐半徑須 < L）
        density: Herglotz 密度
        geometry: 掃描幾何
        detector: 偵測器網格
        scan: 掃描網格
        settings: 精度與執行設定

    Returns:
        MeasurementRecord

    Raises:
        NyquistError: Δx > π/k0 且未設定 override
        ContractError: 網格與幾何不一致
    """
    settings = settings or SimulationSettings()
    start_time = datetime.now()
    d = geometry.d
    if phantom.d != d or density.d != d:
        raise ContractError("假體、密度與幾何的維度不一致")
    if phantom.r >= geometry.L:
        raise ContractError(f"假體支撐半徑 {phantom.r} 必須 < L={geometry.L}")
    nu = geometry.nu_vec
    if np.max(np.abs(scan.basis_matrix @ nu)) > UNIT_TOL:
        raise ContractError("掃描基底必須與 ν 正交")
    detector.check_nyquist(geometry.k0)

    quad = create_beam_quadrature(density, settings.Ns)
    detector_points = detector.positions(geometry)
    scan_points = scan.positions()
    recommended = recommended_quadrature_order(geometry.k0, scan_points, phantom.r)
    if quad.order < recommended:
        logging.warning(
            f"[simulate_scan] 求積階數 Ns={quad.order} 低於建議值 {recommended}"
            f"（4·k0·(max‖y‖ + r)），遠端掃描位置會出現週期性光束複本"
        )
    n_voxels = settings.Nv ** d
    estimate = estimate_runtime(len(detector_points), n_voxels, len(quad), len(scan_points))
    if estimate > settings.runtime_budget_s:
        logging.warning(
            f"[simulate_scan] 預估執行時間 {estimate:.0f} 秒，超過預算 {settings.runtime_budget_s:.0f} 秒"
        )
    logging.info(
        f"[simulate_scan] 開始模擬：偵測點 {len(detector_points)}、掃描位置 {len(scan_points)}、"
        f"求積節點 {len(quad)}、體素 {n_voxels}"
    )

    tic = time.perf_counter()
    try:
        w = detector_plane_waves(
            phantom, quad.nodes, detector_points, geometry.k0, settings.Nv, settings.workers
        )
        samples = np.zeros((len(scan_points), len(detector_points)), dtype=complex)

        def _contract(start: int) -> None:
            block = scan_points[start:start + CHUNK_ROWS]
            coeff = np.exp(-1j * block @ quad.nodes.T) * quad.weighted_amplitudes
            samples[start:start + CHUNK_ROWS] = coeff @ w.T

        _parallel_rows(len(scan_points), settings.workers, _contract)
    except Exception as e:
        logging.error(f"[simulate_scan] 模擬失敗: {e}")
        raise

    if settings.noise_snr_db is not None:
        samples = add_complex_noise(samples, settings.noise_snr_db, settings.seed)
        logging.info(f"[simulate_scan] 已加入雜訊（SNR {settings.noise_snr_db} dB）")

    elapsed = time.perf_counter() - tic
    end_time = datetime.now()
    logging.info(f"[simulate_scan] 完成，耗時 {elapsed:.2f} 秒")
    return MeasurementRecord(
        geometry=geometry,
        detector=detector,
        scan=scan,
        density=density,
        samples=samples,
        metadata={
            "Ns": quad.order,
            "Nv": settings.Nv,
            "nodes": len(quad),
            "estimated_seconds": estimate,
            "elapsed_seconds": elapsed,
            "start_time": start_time.isoformat(),
            "end_time": end_time.isoformat(),
            "noise_snr_db": settings.noise_snr_db,
        },
    )

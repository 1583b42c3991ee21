# -*- coding: utf-8 -*-
"""
傅立葉重建模組
由簡化量測還原 F f 的取樣（Σ₁ 直接填入、Σ₂ 耦合方程消去），
網格化後以 naive / advanced 反投影得到影像

流程：
    reduce_measurements → direct_fill → (advanced) elimination_solve
    → grid_samples → backpropagate
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from fourier_transformer import ReducedMeasurements, planar_dft
from herglotz_beam import HerglotzDensity, eval_density_array
from phantom_model import Phantom, eval_potential_fourier_array
from rdt_errors import (
    ContractError,
    EmptyCoverageError,
    UnsupportedDimensionError,
)
from scan_geometry import (
    COVERAGE_MODES,
    ScanGeometry,
    SigmaClass,
    classify_sigma_array,
    coverage_mask,
    frequency_axis,
    householder_reflect,
    in_sigma2,
    region_mask,
    sphere_points_2d,
)

DIRECT = 0
ELIMINATED = 1

# |a(σ)| 低於 AMPLITUDE_FLOOR·max|a| 的取樣略過
AMPLITUDE_FLOOR = 1e-8
DEFAULT_GRID = 256
MIN_GRID = 32
DEFAULT_W_MIN = 0.5
DEFAULT_GROWTH_THRESHOLD = 1e-3
DEFAULT_MAX_SWEEPS = 10
DEFAULT_CONFLICT_TOLERANCE = 1e-3
# 精確點比對的量化步長（乘上 k0）
EXACT_MATCH_QUANTUM = 1e-7
BACKPROP_PAD_FACTOR = 2


@dataclass
class SpectralSampleSet:
    """
    F f 的取樣集合

    points 形狀 (P, d)；provenance 為 DIRECT / ELIMINATED；
    pair_index 與 sigma_choice 指向來源的 (η, σ)（sigma_choice=1 表示使用 H_νσ）。
    """

    points: np.ndarray
    values: np.ndarray
    provenance: np.ndarray
    pair_index: np.ndarray
    sigma_choice: np.ndarray
    partner_exact: np.ndarray
    conflicts: List[Dict[str, Any]] = field(default_factory=list)
    sweeps: int = 0
    skipped_low_amplitude: int = 0

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    @property
    def direct_count(self) -> int:
        return int(np.sum(self.provenance == DIRECT))

    @property
    def eliminated_count(self) -> int:
        return int(np.sum(self.provenance == ELIMINATED))

    def subset(self, mask: np.ndarray) -> "SpectralSampleSet":
        return SpectralSampleSet(
            points=self.points[mask],
            values=self.values[mask],
            provenance=self.provenance[mask],
            pair_index=self.pair_index[mask],
            sigma_choice=self.sigma_choice[mask],
            partner_exact=self.partner_exact[mask],
            conflicts=list(self.conflicts),
            sweeps=self.sweeps,
            skipped_low_amplitude=self.skipped_low_amplitude,
        )

    def with_values(self, values: np.ndarray) -> "SpectralSampleSet":
        """相同取樣點、替換數值（用於解析真值的對照組）"""
        return SpectralSampleSet(
            points=self.points,
            values=np.asarray(values, dtype=complex),
            provenance=self.provenance,
            pair_index=self.pair_index,
            sigma_choice=self.sigma_choice,
            partner_exact=self.partner_exact,
            conflicts=list(self.conflicts),
            sweeps=self.sweeps,
            skipped_low_amplitude=self.skipped_low_amplitude,
        )


def _empty_samples(d: int) -> SpectralSampleSet:
    return SpectralSampleSet(
        points=np.zeros((0, d)),
        values=np.zeros(0, dtype=complex),
        provenance=np.zeros(0, dtype=np.int8),
        pair_index=np.zeros(0, dtype=np.int64),
        sigma_choice=np.zeros(0, dtype=np.int8),
        partner_exact=np.zeros(0, dtype=bool),
    )


# ---------------------------------------------------------------------------
# 合成簡化量測
# ---------------------------------------------------------------------------

def synthesize_reduced_measurements(
    phantom: Phantom,
    density: HerglotzDensity,
    geometry: ScanGeometry,
    M: int = 720,
) -> ReducedMeasurements:
    """
    在均勻角度格點上由解析 F f 直接組出精確的 m̂(η, σ)

    η、σ 取自角度 2πj/M 的圓上格點（η ∈ S_{e₂}、σ ∈ S_ν）；
    當 ν 的角度使 H_ν 保持格點時，格點在 (η, σ) ↦ (−H_νσ, −η) 下封閉。

    Raises:
        UnsupportedDimensionError: d ≠ 2
    """
    if geometry.d != 2:
        raise UnsupportedDimensionError("synthesize_reduced_measurements 僅支援 d=2")
    if M % 2:
        raise ContractError("角度格點數 M 必須為偶數")
    tau = geometry.tau
    circle = sphere_points_2d(geometry.k0, 2.0 * math.pi * np.arange(M) / M)
    eta_idx = np.flatnonzero(circle[:, 1] > tau)
    sigma_idx = np.flatnonzero(circle @ geometry.nu_vec > tau)
    jj, ii = np.meshgrid(sigma_idx, eta_idx, indexing="ij")
    eta = circle[ii.ravel()]
    sigma = circle[jj.ravel()]
    reflected = householder_reflect(sigma, geometry.nu_vec, check=False)
    values = (
        eval_density_array(density, sigma, check=False) * eval_potential_fourier_array(phantom, eta - sigma)
        + eval_density_array(density, reflected, check=False) * eval_potential_fourier_array(phantom, eta - reflected)
    )
    logging.info(f"[synthesize] 合成 {values.size} 組精確簡化量測（M={M}）")
    return ReducedMeasurements(
        eta=eta,
        sigma=sigma,
        sigma_reflected=reflected,
        values=values,
        indices=np.stack([jj.ravel(), ii.ravel()], axis=-1),
        clipped_count=0,
        geometry=geometry,
    )


# ---------------------------------------------------------------------------
# 直接填入
# ---------------------------------------------------------------------------

def direct_fill(
    reduced: ReducedMeasurements,
    density: HerglotzDensity,
    geometry: ScanGeometry,
) -> SpectralSampleSet:
    """
    Σ₁ 上的直接還原 F f(η − σ) = m̂(η, σ) / a(σ)

    每組 (η, σ) 同時考慮 σ 與 H_νσ 兩個候選，保留屬於 Σ₁ 者。

    Args:
        reduced: 簡化量測
        density: 密度
        geometry: 掃描幾何

    Returns:
        SpectralSampleSet（全部為 DIRECT）
    """
    points: List[np.ndarray] = []
    values: List[np.ndarray] = []
    pairs: List[np.ndarray] = []
    choices: List[np.ndarray] = []
    skipped = 0
    candidates = (reduced.sigma, reduced.sigma_reflected)
    amplitudes = [eval_density_array(density, c, check=False) for c in candidates]
    peak = max((float(np.max(np.abs(a))) for a in amplitudes if a.size), default=0.0)

    for choice, (sigma, amp) in enumerate(zip(candidates, amplitudes)):
        codes = classify_sigma_array(sigma, geometry, check_norm=False)
        in_sigma1 = codes == SigmaClass.SIGMA1
        strong = np.abs(amp) >= AMPLITUDE_FLOOR * peak
        skipped += int(np.sum(in_sigma1 & ~strong))
        keep = np.flatnonzero(in_sigma1 & strong & (peak > 0))
        points.append(reduced.eta[keep] - sigma[keep])
        values.append(reduced.values[keep] / amp[keep])
        pairs.append(keep)
        choices.append(np.full(keep.size, choice, dtype=np.int8))

    total = int(sum(v.size for v in values))
    logging.info(f"[direct_fill] 直接還原 {total} 個取樣，低振幅略過 {skipped} 個")
    return SpectralSampleSet(
        points=np.concatenate(points) if total else np.zeros((0, geometry.d)),
        values=np.concatenate(values) if total else np.zeros(0, dtype=complex),
        provenance=np.full(total, DIRECT, dtype=np.int8),
        pair_index=np.concatenate(pairs).astype(np.int64) if total else np.zeros(0, dtype=np.int64),
        sigma_choice=np.concatenate(choices) if total else np.zeros(0, dtype=np.int8),
        partner_exact=np.zeros(total, dtype=bool),
        skipped_low_amplitude=skipped,
    )


# ---------------------------------------------------------------------------
# 網格化
# ---------------------------------------------------------------------------

@dataclass
class GriddedSpectrum:
    """
    [−2k0, 2k0]^d 上 N^d 格的加權平均頻譜

    values 為格子平均值；coverage 為 weight > w_min 且（給定幾何時）落在該模式覆蓋區域。
    """

    values: np.ndarray
    weights: np.ndarray
    coverage: np.ndarray
    k0: float
    N: int
    d: int
    mode: Optional[str] = None

    @property
    def h(self) -> float:
        return 4.0 * self.k0 / self.N

    @property
    def axis(self) -> np.ndarray:
        return frequency_axis(self.k0, self.N)

    @property
    def covered_fraction(self) -> float:
        return float(np.mean(self.coverage))


def _tent_corners(points: np.ndarray, k0: float, N: int):
    """各取樣點的 2^d 個鄰近格索引與帳篷權重"""
    h = 4.0 * k0 / N
    u = (points + 2.0 * k0) / h - 0.5
    base = np.floor(u).astype(np.int64)
    frac = u - base
    d = points.shape[1]
    for offsets in itertools.product((0, 1), repeat=d):
        off = np.asarray(offsets)
        idx = base + off
        weight = np.prod(np.where(off == 1, frac, 1.0 - frac), axis=1)
        yield idx, weight


def _scatter(points: np.ndarray, values: np.ndarray, weights_in: np.ndarray, k0: float, N: int):
    d = points.shape[1]
    sum_wv = np.zeros((N,) * d, dtype=complex)
    sum_w = np.zeros((N,) * d)
    for idx, weight in _tent_corners(points, k0, N):
        ok = np.all((idx >= 0) & (idx < N), axis=1) & (weight > 0)
        target = tuple(idx[ok].T)
        np.add.at(sum_wv, target, weight[ok] * weights_in[ok] * values[ok])
        np.add.at(sum_w, target, weight[ok] * weights_in[ok])
    return sum_wv, sum_w


def _cell_means(sum_wv: np.ndarray, sum_w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(sum_wv)
    filled = sum_w > 0
    out[filled] = sum_wv[filled] / sum_w[filled]
    return out


def grid_samples(
    samples: SpectralSampleSet,
    N: int = DEFAULT_GRID,
    k0: Optional[float] = None,
    geometry: Optional[ScanGeometry] = None,
    mode: Optional[str] = None,
    w_min: float = DEFAULT_W_MIN,
    density_compensation: bool = False,
) -> GriddedSpectrum:
    """
    帳篷核線性散佈取樣到 N^d 格

    Args:
        samples: 取樣集合
        N: 每軸格數（≥ 32）
        k0: 波數（提供 geometry 時可省略）
        geometry: 提供時覆蓋遮罩與該模式的覆蓋區域取交集
        mode: "naive" / "advanced"（與 geometry 一同使用）
        w_min: 覆蓋所需的最小累積權重
        density_compensation: 依最近格的取樣數降低密集區權重（實驗用，預設關閉）

    Returns:
        GriddedSpectrum

    Raises:
        ContractError: N < 32 或缺少 k0
    """
    if N < MIN_GRID:
        raise ContractError(f"網格解析度須 ≥ {MIN_GRID}，收到 N={N}")
    if k0 is None:
        if geometry is None:
            raise ContractError("grid_samples 需要 k0 或 geometry")
        k0 = geometry.k0
    d = samples.d
    per_sample = np.ones(len(samples))
    if density_compensation and len(samples):
        h = 4.0 * k0 / N
        nearest = np.clip(np.floor((samples.points + 2.0 * k0) / h).astype(np.int64), 0, N - 1)
        flat = np.ravel_multi_index(tuple(nearest.T), (N,) * d)
        counts = np.bincount(flat, minlength=N ** d)
        per_sample = 1.0 / counts[flat]

    sum_wv, sum_w = _scatter(samples.points, samples.values, per_sample, k0, N)
    coverage = sum_w > w_min
    if geometry is not None and mode is not None:
        tags = coverage_mask(geometry, mode, N)
        coverage &= region_mask(tags, mode, geometry.d)
    logging.info(
        f"[grid_samples] N={N}，覆蓋格數 {int(np.sum(coverage))}（{float(np.mean(coverage)):.3%}）"
    )
    return GriddedSpectrum(
        values=_cell_means(sum_wv, sum_w),
        weights=sum_w,
        coverage=coverage,
        k0=k0,
        N=N,
        d=d,
        mode=mode,
    )


# ---------------------------------------------------------------------------
# 消去法
# ---------------------------------------------------------------------------

class _KnownValues:
    """已知 F f 值：精確點字典 + 每回合凍結的網格"""

    def __init__(self, k0: float, N: int, d: int, w_min: float):
        self.k0 = k0
        self.N = N
        self.d = d
        self.w_min = w_min
        self.quantum = EXACT_MATCH_QUANTUM * k0
        self.exact: Dict[Tuple[int, ...], complex] = {}
        self.sum_wv = np.zeros((N,) * d, dtype=complex)
        self.sum_w = np.zeros((N,) * d)
        self.means = np.zeros((N,) * d, dtype=complex)
        self.resolvable = np.zeros((N,) * d, dtype=bool)

    def key(self, point: np.ndarray) -> Tuple[int, ...]:
        return tuple(np.round(point / self.quantum).astype(np.int64).tolist())

    def add(self, points: np.ndarray, values: np.ndarray) -> None:
        for point, value in zip(points, values):
            self.exact.setdefault(self.key(point), complex(value))
        if len(values):
            wv, w = _scatter(points, values, np.ones(len(values)), self.k0, self.N)
            self.sum_wv += wv
            self.sum_w += w

    def covered_cells(self) -> int:
        return int(np.sum(self.sum_w > self.w_min))

    def freeze(self) -> None:
        """回合開始時更新網格平均與可查詢區域（侵蝕一格以避免外插）"""
        self.means = _cell_means(self.sum_wv, self.sum_w)
        covered = self.sum_w > self.w_min
        structure = np.ones((3,) * self.d, dtype=bool)
        self.resolvable = ndimage.binary_erosion(covered, structure=structure)

    def grid_lookup(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ok = np.ones(points.shape[0], dtype=bool)
        values = np.zeros(points.shape[0], dtype=complex)
        for idx, weight in _tent_corners(points, self.k0, self.N):
            inside = np.all((idx >= 0) & (idx < self.N), axis=1)
            clipped = np.clip(idx, 0, self.N - 1)
            target = tuple(clipped.T)
            ok &= inside & self.resolvable[target]
            values += weight * self.means[target]
        return ok, values


def elimination_solve(
    reduced: ReducedMeasurements,
    density: HerglotzDensity,
    geometry: ScanGeometry,
    seed: SpectralSampleSet,
    N: int = DEFAULT_GRID,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    conflict_tolerance: float = DEFAULT_CONFLICT_TOLERANCE,
    w_min: float = DEFAULT_W_MIN,
) -> SpectralSampleSet:
    """
    Σ₂ 耦合方程的迭代消去

    對每組 σ ∈ Σ₂ 的 (η, σ)：令 y = η − σ、p = η − H_νσ，
    若 {y, p} 恰有一個可由已知值求得，則由
    m̂(η, σ) = a(σ)φ(y) + a(H_νσ)φ(p) 解出另一個並加入 ELIMINATED 取樣。
    已知值先以精確點比對（量化 1e−7·k0），再以侵蝕後覆蓋區內的雙線性內插查詢。
    每組 (η, σ) 只使用一次；回合新增覆蓋格少於 growth_threshold 或達 max_sweeps 時停止。

    Args:
        reduced: 簡化量測
        density: 密度
        geometry: 掃描幾何
        seed: 初始取樣（通常為 direct_fill 的輸出）
        N: 會合網格解析度
        growth_threshold: 回合新增覆蓋格比例門檻
        max_sweeps: 最大回合數
        conflict_tolerance: 重複推導的相對差異門檻
        w_min: 網格覆蓋所需權重

    Returns:
        SpectralSampleSet：seed 加上新增的 ELIMINATED 取樣
    """
    start_time = datetime.now()
    k0 = geometry.k0
    known = _KnownValues(k0, N, geometry.d, w_min)
    known.add(seed.points, seed.values)

    codes = classify_sigma_array(reduced.sigma, geometry, check_norm=False)
    candidates = np.flatnonzero(in_sigma2(codes))
    amp_sigma = eval_density_array(density, reduced.sigma[candidates], check=False)
    amp_reflected = eval_density_array(density, reduced.sigma_reflected[candidates], check=False)
    peak = max(float(np.max(np.abs(amp_sigma), initial=0.0)), float(np.max(np.abs(amp_reflected), initial=0.0)))
    floor = AMPLITUDE_FLOOR * peak
    y_points = reduced.eta[candidates] - reduced.sigma[candidates]
    p_points = reduced.eta[candidates] - reduced.sigma_reflected[candidates]
    consumed = np.zeros(candidates.size, dtype=bool)

    new_points: List[np.ndarray] = []
    new_values: List[complex] = []
    new_pairs: List[int] = []
    new_choices: List[int] = []
    new_exact: List[bool] = []
    conflicts: List[Dict[str, Any]] = list(seed.conflicts)
    sweeps = 0

    while candidates.size and sweeps < max_sweeps:
        sweeps += 1
        known.freeze()
        before_cells = known.covered_cells()
        open_idx = np.flatnonzero(~consumed)
        grid_y_ok, grid_y_val = known.grid_lookup(y_points[open_idx])
        grid_p_ok, grid_p_val = known.grid_lookup(p_points[open_idx])
        sweep_points: List[np.ndarray] = []
        sweep_values: List[complex] = []

        for local, idx in enumerate(open_idx):
            y_key = known.key(y_points[idx])
            p_key = known.key(p_points[idx])
            y_val = known.exact.get(y_key)
            p_val = known.exact.get(p_key)
            y_exact = y_val is not None
            p_exact = p_val is not None
            if y_val is None and grid_y_ok[local]:
                y_val = complex(grid_y_val[local])
            if p_val is None and grid_p_ok[local]:
                p_val = complex(grid_p_val[local])

            m_value = complex(reduced.values[candidates[idx]])
            a_y = complex(amp_sigma[idx])
            a_p = complex(amp_reflected[idx])
            if y_val is not None and p_val is not None:
                consumed[idx] = True
                residual = abs(m_value - a_y * y_val - a_p * p_val)
                if residual > conflict_tolerance * max(abs(m_value), 1e-300):
                    conflicts.append({
                        "pair": int(candidates[idx]),
                        "y": y_points[idx].tolist(),
                        "p": p_points[idx].tolist(),
                        "residual": residual,
                    })
                continue
            if y_val is None and p_val is None:
                continue

            if y_val is not None:
                if abs(a_p) < floor:
                    continue
                target, value, choice, exact = p_points[idx], (m_value - a_y * y_val) / a_p, 1, y_exact
                target_key = p_key
            else:
                if abs(a_y) < floor:
                    continue
                target, value, choice, exact = y_points[idx], (m_value - a_p * p_val) / a_y, 0, p_exact
                target_key = y_key
            consumed[idx] = True
            known.exact[target_key] = value
            sweep_points.append(target)
            sweep_values.append(value)
            new_pairs.append(int(candidates[idx]))
            new_choices.append(choice)
            new_exact.append(bool(exact))

        if sweep_points:
            batch = np.asarray(sweep_points)
            batch_values = np.asarray(sweep_values, dtype=complex)
            wv, w = _scatter(batch, batch_values, np.ones(len(batch_values)), k0, N)
            known.sum_wv += wv
            known.sum_w += w
            new_points.extend(sweep_points)
            new_values.extend(sweep_values)
        growth = (known.covered_cells() - before_cells) / max(before_cells, 1)
        logging.info(
            f"[elimination_solve] 第 {sweeps} 回合：新增 {len(sweep_points)} 個取樣，"
            f"覆蓋格成長 {growth:.3%}"
        )
        if not sweep_points or growth < growth_threshold:
            break

    added = len(new_values)
    result = SpectralSampleSet(
        points=np.concatenate([seed.points, np.asarray(new_points).reshape(-1, geometry.d)]),
        values=np.concatenate([seed.values, np.asarray(new_values, dtype=complex)]),
        provenance=np.concatenate([seed.provenance, np.full(added, ELIMINATED, dtype=np.int8)]),
        pair_index=np.concatenate([seed.pair_index, np.asarray(new_pairs, dtype=np.int64)]),
        sigma_choice=np.concatenate([seed.sigma_choice, np.asarray(new_choices, dtype=np.int8)]),
        partner_exact=np.concatenate([seed.partner_exact, np.asarray(new_exact, dtype=bool)]),
        conflicts=conflicts,
        sweeps=sweeps,
        skipped_low_amplitude=seed.skipped_low_amplitude,
    )
    duration = (datetime.now() - start_time).total_seconds()
    logging.info(
        f"[elimination_solve] 完成：{sweeps} 回合、新增 {added} 個取樣、衝突 {len(conflicts)} 筆，"
        f"耗時 {duration:.2f} 秒"
    )
    return result


# ---------------------------------------------------------------------------
# 反投影
# ---------------------------------------------------------------------------

@dataclass
class ReconImage:
    """重建影像：axis 為每軸共用的空間座標，values 形狀 (n,)*d（ij 索引）"""

    axis: np.ndarray
    values: np.ndarray
    mode: str
    d: int


def default_output_axis(r: float, count: int = 128) -> np.ndarray:
    """涵蓋支撐球 [−r, r] 的輸出座標"""
    return np.linspace(-r, r, count)


def backpropagate(
    gridded: GriddedSpectrum,
    mode: str,
    output_axis: np.ndarray,
) -> ReconImage:
    """
    遮罩後的逆傅立葉轉換 f(x) = (2π)^{−d/2} ∫ 1_cov(y) F f(y) e^{i⟨x,y⟩} dy

    頻譜補零至 2N 以加密空間取樣，再以三次樣條重新取樣到 output_axis。

    Raises:
        ContractError: 模式與網格遮罩不一致
    """
    if mode not in COVERAGE_MODES:
        raise ContractError(f"未知的反投影模式: {mode}")
    if gridded.mode is not None and gridded.mode != mode:
        raise ContractError(f"反投影模式 {mode} 與網格遮罩模式 {gridded.mode} 不一致")
    d = gridded.d
    h = gridded.h
    masked = np.where(gridded.coverage, gridded.values, 0.0)
    padded_size = BACKPROP_PAD_FACTOR * gridded.N
    masked = np.pad(masked, [(0, padded_size - gridded.N)] * d)
    image, positions = planar_dft(
        masked,
        spacing=h,
        direction="inverse",
        origin=-2.0 * gridded.k0 + 0.5 * h,
    )
    grid_x = positions[0]
    dx = grid_x[1] - grid_x[0]
    out_axis = np.asarray(output_axis, dtype=float)
    mesh = np.meshgrid(*([out_axis] * d), indexing="ij")
    coords = np.stack([(g - grid_x[0]) / dx for g in mesh])
    values = (
        ndimage.map_coordinates(image.real, coords, order=3, mode="nearest")
        + 1j * ndimage.map_coordinates(image.imag, coords, order=3, mode="nearest")
    )
    logging.info(f"[backpropagate] 模式={mode}，輸出 {out_axis.size}^{d} 影像")
    return ReconImage(axis=out_axis, values=values, mode=mode, d=d)


def analytic_samples(samples: SpectralSampleSet, phantom: Phantom) -> SpectralSampleSet:
    """相同取樣點上的解析 F f（反投影對照組）"""
    return samples.with_values(eval_potential_fourier_array(phantom, samples.points))


def reconstruct(
    reduced: ReducedMeasurements,
    density: HerglotzDensity,
    geometry: ScanGeometry,
    mode: str = "naive",
    N: int = DEFAULT_GRID,
    output_axis: Optional[np.ndarray] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    conflict_tolerance: float = DEFAULT_CONFLICT_TOLERANCE,
) -> Dict[str, Any]:
    """
    完整重建流程

    Returns:
        Dict: status、image、gridded、samples、metrics

    Raises:
        EmptyCoverageError: Σ₁ = ∅，沒有直接取樣（advanced 模式亦無消去起點）
    """
    start_time = datetime.now()
    if mode not in COVERAGE_MODES:
        raise ContractError(f"未知的重建模式: {mode}")
    try:
        samples = direct_fill(reduced, density, geometry)
        # Σ₁ 為空時 advanced 模式也沒有消去的起始值，兩種模式同樣視為覆蓋為空
        if len(samples) == 0:
            raise EmptyCoverageError("Σ₁ 為空，沒有可直接還原的傅立葉係數")
        if mode == "advanced":
            samples = elimination_solve(
                reduced,
                density,
                geometry,
                samples,
                N=N,
                growth_threshold=growth_threshold,
                max_sweeps=max_sweeps,
                conflict_tolerance=conflict_tolerance,
            )
        gridded = grid_samples(samples, N, geometry=geometry, mode=mode)
        axis = output_axis if output_axis is not None else default_output_axis(geometry.r)
        image = backpropagate(gridded, mode, axis)
    except Exception as e:
        logging.error(f"[reconstruct] 重建失敗: {e}")
        raise

    end_time = datetime.now()
    metrics = {
        "mode": mode,
        "covered_fraction": gridded.covered_fraction,
        "conflict_count": len(samples.conflicts),
        "sweeps": samples.sweeps,
        "direct_entries": samples.direct_count,
        "eliminated_entries": samples.eliminated_count,
        "clipped_bins": reduced.clipped_count,
    }
    return {
        "status": "success",
        "image": image,
        "gridded": gridded,
        "samples": samples,
        "metrics": metrics,
        "start_time": start_time.isoformat(),
        "end_time": end_time.isoformat(),
        "duration_seconds": (end_time - start_time).total_seconds(),
    }

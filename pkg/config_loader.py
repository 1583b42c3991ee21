# -*- coding: utf-8 -*-
"""
配置載入模組
讀取並驗證 RunConfig JSON，轉換成各模組使用的型別；另提供環境變數設定與日誌初始化

RunConfig 結構：
    {
        "geometry": {"d", "k0", "omega", "nu", "L", "r"},
        "phantom": [{"kind", "center", "radius"|"width", "contrast_re", "contrast_im"}, ...],
        "density": {"variant", "A"?, "table"?, "taper_deg"?},
        "detector": {"spacing", "count", "override_nyquist"?},
        "scan": {"spacing", "count"},
        "accuracy": {"Ns", "Nv", "gamma", "taper", ...},
        "seed"?: int
    }
任何層級出現未知欄位都視為錯誤。
"""

import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from born_simulator import (
    DEFAULT_RUNTIME_BUDGET_S,
    DetectorGrid,
    ScanGrid,
    SimulationSettings,
    create_scan_grid,
)
from herglotz_beam import DENSITY_VARIANTS, HerglotzDensity, create_density
from phantom_model import DEFAULT_TRUNCATION_WIDTHS, PRIMITIVE_KINDS, Phantom, create_phantom
from rdt_errors import ConfigError, RdtError
from scan_geometry import ScanGeometry

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

TOP_LEVEL_KEYS = {"geometry", "phantom", "density", "detector", "scan", "accuracy", "seed"}
REQUIRED_KEYS = {"geometry", "phantom", "density", "detector", "scan"}
GEOMETRY_KEYS = {"d", "k0", "omega", "nu", "L", "r"}
PRIMITIVE_KEYS = {"kind", "center", "radius", "width", "contrast_re", "contrast_im"}
DENSITY_KEYS = {"variant", "A", "table", "taper_deg"}
TABLE_KEYS = {"angles_deg", "re", "im"}
DETECTOR_KEYS = {"spacing", "count", "override_nyquist"}
SCAN_KEYS = {"spacing", "count"}
ACCURACY_KEYS = {
    "Ns",
    "Nv",
    "gamma",
    "taper",
    "truncation_widths",
    "fdt_threshold",
    "noise_snr_db",
    "growth_threshold",
    "max_sweeps",
    "conflict_tolerance",
}


@dataclass(frozen=True)
class AccuracySettings:
    """精度設定（預設值即桌機規模的驗證設定）"""

    Ns: int = 256
    Nv: int = 128
    gamma: float = 0.95
    taper: Optional[float] = 0.6
    truncation_widths: float = DEFAULT_TRUNCATION_WIDTHS
    fdt_threshold: float = 0.05
    noise_snr_db: Optional[float] = None
    growth_threshold: float = 1e-3
    max_sweeps: int = 10
    conflict_tolerance: float = 1e-3


@dataclass
class RunConfig:
    """驗證後的執行設定"""

    geometry: ScanGeometry
    phantom: Phantom
    density: HerglotzDensity
    detector: DetectorGrid
    scan: ScanGrid
    accuracy: AccuracySettings
    seed: Optional[int] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    def simulation_settings(
        self,
        workers: int = 1,
        runtime_budget_s: float = DEFAULT_RUNTIME_BUDGET_S,
    ) -> SimulationSettings:
        return SimulationSettings(
            Ns=self.accuracy.Ns,
            Nv=self.accuracy.Nv,
            workers=workers,
            runtime_budget_s=runtime_budget_s,
            noise_snr_db=self.accuracy.noise_snr_db,
            seed=self.seed,
        )


def setup_logging(level: str = "INFO") -> None:
    """
    設定日誌（輸出到 stderr，stdout 保留給 JSON 結果）

    Args:
        level: 日誌等級（DEBUG, INFO, WARNING, ERROR）
    """
    handler = logging.StreamHandler(sys.stderr)
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[handler],
        force=True,
    )


def read_json(file_path: Union[str, Path]) -> Any:
    """
    讀取 JSON 檔案

    Raises:
        ConfigError: 檔案不存在或不是合法 JSON
    """
    path = Path(file_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"找不到設定檔: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"設定檔不是合法的 JSON: {path}（{e}）") from e


def write_json(data: Any, file_path: Union[str, Path]) -> Path:
    """寫入 JSON 檔案（UTF-8、縮排 2、鍵排序）"""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_settings_from_env(env_file: Optional[str] = None) -> Dict[str, Any]:
    """
    從環境變數（與 .env）載入執行設定

    Returns:
        Dict: threads、log_level、runtime_budget_s

    Raises:
        ConfigError: 數值格式錯誤
    """
    load_dotenv(env_file) if env_file else load_dotenv()
    try:
        threads = int(os.getenv("RDT_THREADS", "1"))
        budget = float(os.getenv("RDT_RUNTIME_BUDGET_S", str(DEFAULT_RUNTIME_BUDGET_S)))
    except ValueError as e:
        raise ConfigError(f"環境變數格式錯誤: {e}") from e
    return {
        "threads": max(threads, 1),
        "log_level": os.getenv("RDT_LOG_LEVEL", "INFO"),
        "runtime_budget_s": budget,
    }


# ---------------------------------------------------------------------------
# 驗證工具
# ---------------------------------------------------------------------------

def _check_keys(section: Any, allowed: set, where: str, required: Optional[set] = None) -> Dict[str, Any]:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} 必須是物件")
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"未知的設定欄位: {where}.{unknown[0]}")
    missing = sorted((required or set()) - set(section))
    if missing:
        raise ConfigError(f"缺少必要的設定欄位: {where}.{missing[0]}")
    return section


def _number(value: Any, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where} 必須是有限數值，收到 {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where} 必須 > 0，收到 {value!r}")
    return float(value)


def _integer(value: Any, where: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} 必須是整數，收到 {value!r}")
    if value < minimum:
        raise ConfigError(f"{where} 必須 ≥ {minimum}，收到 {value}")
    return value


def _vector(value: Any, where: str, d: int, normalize: bool) -> List[float]:
    if not isinstance(value, list) or len(value) != d:
        raise ConfigError(f"{where} 必須是長度 {d} 的陣列")
    vec = [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]
    if normalize:
        norm = math.sqrt(sum(v * v for v in vec))
        if norm == 0:
            raise ConfigError(f"{where} 不可為零向量")
        vec = [v / norm for v in vec]
    return vec


def _parse_geometry(section: Any) -> ScanGeometry:
    section = _check_keys(section, GEOMETRY_KEYS, "geometry", GEOMETRY_KEYS)
    d = _integer(section["d"], "geometry.d", 2)
    if d > 3:
        raise ConfigError(f"geometry.d 僅支援 2 或 3，收到 {d}")
    k0 = _number(section["k0"], "geometry.k0", positive=True)
    omega = _vector(section["omega"], "geometry.omega", d, normalize=True)
    nu = _vector(section["nu"], "geometry.nu", d, normalize=True)
    L = _number(section["L"], "geometry.L")
    r = _number(section["r"], "geometry.r", positive=True)
    if not L > r:
        raise ConfigError(f"geometry.L 不合法：需滿足 L > r（L={L}, r={r}）")
    try:
        return ScanGeometry(d=d, k0=k0, omega=tuple(omega), nu=tuple(nu), L=L, r=r)
    except RdtError as e:
        raise ConfigError(f"geometry 不合法: {e}") from e


def _parse_phantom(section: Any, geometry: ScanGeometry, truncation_widths: float) -> Phantom:
    if not isinstance(section, list):
        raise ConfigError("phantom 必須是陣列")
    entries: List[Dict[str, Any]] = []
    for i, item in enumerate(section):
        where = f"phantom[{i}]"
        item = _check_keys(item, PRIMITIVE_KEYS, where, {"kind", "center"})
        if item["kind"] not in PRIMITIVE_KINDS:
            raise ConfigError(f"{where}.kind 必須是 {PRIMITIVE_KINDS} 之一")
        size_key = "radius" if item["kind"] == "ball" else "width"
        if size_key not in item:
            raise ConfigError(f"缺少必要的設定欄位: {where}.{size_key}")
        entries.append({
            "kind": item["kind"],
            "center": _vector(item["center"], f"{where}.center", geometry.d, normalize=False),
            size_key: _number(item[size_key], f"{where}.{size_key}", positive=True),
            "contrast_re": _number(item.get("contrast_re", 0.0), f"{where}.contrast_re"),
            "contrast_im": _number(item.get("contrast_im", 0.0), f"{where}.contrast_im"),
        })
    try:
        return create_phantom(entries, geometry.r, geometry.d, truncation_widths)
    except RdtError as e:
        raise ConfigError(f"phantom 不合法: {e}") from e


def _parse_density(section: Any, geometry: ScanGeometry) -> HerglotzDensity:
    section = _check_keys(section, DENSITY_KEYS, "density", {"variant"})
    if section["variant"] not in DENSITY_VARIANTS:
        raise ConfigError(f"density.variant 必須是 {DENSITY_VARIANTS} 之一")
    if "A" in section:
        _number(section["A"], "density.A", positive=True)
    if "taper_deg" in section:
        _number(section["taper_deg"], "density.taper_deg")
    if "table" in section:
        _check_keys(section["table"], TABLE_KEYS, "density.table", {"angles_deg", "re"})
    try:
        return create_density(section, geometry.k0, geometry.omega)
    except RdtError as e:
        raise ConfigError(f"density 不合法: {e}") from e


def _parse_accuracy(section: Any) -> AccuracySettings:
    section = _check_keys(section if section is not None else {}, ACCURACY_KEYS, "accuracy")
    defaults = AccuracySettings()
    taper = section.get("taper", defaults.taper)
    if taper is not None:
        taper = _number(taper, "accuracy.taper")
        if not 0.0 <= taper <= 1.0:
            raise ConfigError("accuracy.taper 必須介於 0 與 1（平坦比例）")
    gamma = _number(section.get("gamma", defaults.gamma), "accuracy.gamma")
    if not 0.0 < gamma < 1.0:
        raise ConfigError("accuracy.gamma 必須介於 0 與 1")
    snr = section.get("noise_snr_db", defaults.noise_snr_db)
    return AccuracySettings(
        Ns=_integer(section.get("Ns", defaults.Ns), "accuracy.Ns", 16),
        Nv=_integer(section.get("Nv", defaults.Nv), "accuracy.Nv", 2),
        gamma=gamma,
        taper=taper,
        truncation_widths=_number(
            section.get("truncation_widths", defaults.truncation_widths),
            "accuracy.truncation_widths",
            positive=True,
        ),
        fdt_threshold=_number(section.get("fdt_threshold", defaults.fdt_threshold), "accuracy.fdt_threshold", positive=True),
        noise_snr_db=None if snr is None else _number(snr, "accuracy.noise_snr_db"),
        growth_threshold=_number(section.get("growth_threshold", defaults.growth_threshold), "accuracy.growth_threshold"),
        max_sweeps=_integer(section.get("max_sweeps", defaults.max_sweeps), "accuracy.max_sweeps", 1),
        conflict_tolerance=_number(
            section.get("conflict_tolerance", defaults.conflict_tolerance),
            "accuracy.conflict_tolerance",
            positive=True,
        ),
    )


def validate_run_config(data: Any) -> RunConfig:
    """
    驗證 RunConfig 並轉換成型別物件

    Args:
        data: 已解析的 JSON 物件

    Returns:
        RunConfig

    Raises:
        ConfigError: 欄位未知、缺漏、型別或範圍錯誤（訊息含欄位路徑）
    """
    data = _check_keys(data, TOP_LEVEL_KEYS, "config", REQUIRED_KEYS)
    geometry = _parse_geometry(data["geometry"])
    accuracy = _parse_accuracy(data.get("accuracy"))
    phantom = _parse_phantom(data["phantom"], geometry, accuracy.truncation_widths)
    density = _parse_density(data["density"], geometry)

    detector_section = _check_keys(data["detector"], DETECTOR_KEYS, "detector", {"spacing", "count"})
    override = detector_section.get("override_nyquist", False)
    if not isinstance(override, bool):
        raise ConfigError("detector.override_nyquist 必須是布林值")
    detector = DetectorGrid(
        spacing=_number(detector_section["spacing"], "detector.spacing", positive=True),
        count=_integer(detector_section["count"], "detector.count", 2),
        override_nyquist=override,
    )
    scan_section = _check_keys(data["scan"], SCAN_KEYS, "scan", SCAN_KEYS)
    scan = create_scan_grid(
        _number(scan_section["spacing"], "scan.spacing", positive=True),
        _integer(scan_section["count"], "scan.count", 2),
        geometry.nu,
    )
    seed = data.get("seed")
    if seed is not None:
        seed = _integer(seed, "seed", 0)
    return RunConfig(
        geometry=geometry,
        phantom=phantom,
        density=density,
        detector=detector,
        scan=scan,
        accuracy=accuracy,
        seed=seed,
        raw=data,
    )


def load_run_config(file_path: Union[str, Path]) -> RunConfig:
    """
    讀取並驗證 RunConfig 檔案

    Examples:
        >>> cfg = load_run_config("example_config.json")  # doctest: +SKIP
        >>> cfg.geometry.k0  # doctest: +SKIP
        6.283185307179586
    """
    config = validate_run_config(read_json(file_path))
    logging.info(
        f"[config] 已載入設定 {file_path}：d={config.geometry.d}、k0={config.geometry.k0:.6g}、"
        f"元件 {len(config.phantom.primitives)} 個"
    )
    return config

# -*- coding: utf-8 -*-
"""
覆蓋圖輸出模組
將二維覆蓋標籤網格輸出為 SVG（marching squares 輪廓）或 8-bit PGM

SVG 圖層：Y₂ 灰色、Ỹ 綠色、Y₁ 藍色；−Σ₁ / −Σ̃ 以虛線弧標示；
並繪製半徑 k0 與 2k0 的參考圓。座標一律輸出 6 位小數以確保結果可重現。
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from skimage import measure

from rdt_errors import ContainerError, ContractError, UnsupportedDimensionError
from scan_geometry import RegionTag, ScanGeometry, sigma_arcs_2d

# PGM 區域灰階碼
PGM_CODES: Dict[int, int] = {
    RegionTag.OUTSIDE: 0,
    RegionTag.Y2_GRAY: 85,
    RegionTag.Y_TILDE: 170,
    RegionTag.Y1: 255,
}

LAYER_STYLES: List[Tuple[str, RegionTag, str]] = [
    ("y2_gray", RegionTag.Y2_GRAY, "#b0b0b0"),
    ("y_tilde", RegionTag.Y_TILDE, "#2ca02c"),
    ("y1", RegionTag.Y1, "#1f77b4"),
]
ARC_STYLES = {"sigma1": "#ff7f0e", "sigma_tilde": "#d62728"}
ARC_SAMPLES = 64


def _fmt(value: float) -> str:
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _contour_path(mask: np.ndarray, k0: float) -> str:
    """遮罩的輪廓路徑（evenodd 填色），座標為頻率單位"""
    N = mask.shape[0]
    h = 4.0 * k0 / N
    padded = np.pad(mask.astype(float), 1)
    commands: List[str] = []
    for contour in measure.find_contours(padded, 0.5):
        y1 = -2.0 * k0 + (contour[:, 0] - 1 + 0.5) * h
        y2 = -2.0 * k0 + (contour[:, 1] - 1 + 0.5) * h
        points = [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(y1, y2)]
        commands.append("M " + " L ".join(points) + " Z")
    return " ".join(commands)


def _arc_polyline(k0: float, start: float, end: float) -> str:
    angles = np.linspace(start, end, ARC_SAMPLES)
    return " ".join(f"{_fmt(k0 * math.cos(a))},{_fmt(k0 * math.sin(a))}" for a in angles)


def render_coverage_svg(tags: np.ndarray, geometry: ScanGeometry) -> str:
    """組出 SVG 文字（y₂ 軸向上）"""
    k0 = geometry.k0
    extent = 2.2 * k0
    stroke = _fmt(0.01 * k0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        (
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{_fmt(-extent)} {_fmt(-extent)} {_fmt(2 * extent)} {_fmt(2 * extent)}" '
            f'width="600" height="600">'
        ),
        '<g transform="scale(1,-1)">',
        f'<rect x="{_fmt(-extent)}" y="{_fmt(-extent)}" width="{_fmt(2 * extent)}" '
        f'height="{_fmt(2 * extent)}" fill="#ffffff"/>',
    ]
    for name, tag, color in LAYER_STYLES:
        layer = tags == tag
        if not np.any(layer):
            continue
        lines.append(
            f'<path id="{name}" d="{_contour_path(layer, k0)}" fill="{color}" '
            f'fill-rule="evenodd" stroke="none"/>'
        )

    for radius in (k0, 2.0 * k0):
        lines.append(
            f'<circle cx="0.000000" cy="0.000000" r="{_fmt(radius)}" fill="none" '
            f'stroke="#000000" stroke-width="{stroke}"/>'
        )
    lines.append(
        f'<line x1="{_fmt(-extent)}" y1="0.000000" x2="{_fmt(extent)}" y2="0.000000" '
        f'stroke="#000000" stroke-width="{stroke}"/>'
    )
    lines.append(
        f'<line x1="0.000000" y1="{_fmt(-extent)}" x2="0.000000" y2="{_fmt(extent)}" '
        f'stroke="#000000" stroke-width="{stroke}"/>'
    )

    arcs = sigma_arcs_2d(geometry)
    for name, color in ARC_STYLES.items():
        for start, end in arcs[name]:
            lines.append(
                f'<polyline id="minus_{name}" points="{_arc_polyline(k0, start + math.pi, end + math.pi)}" '
                f'fill="none" stroke="{color}" stroke-width="{_fmt(0.03 * k0)}" '
                f'stroke-dasharray="{_fmt(0.08 * k0)},{_fmt(0.05 * k0)}"/>'
            )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def coverage_image(tags: np.ndarray) -> np.ndarray:
    """轉為影像方向：第一列為最大的 y₂，欄對應 y₁"""
    return np.asarray(tags).T[::-1, :]


def render_coverage_pgm(tags: np.ndarray) -> bytes:
    """8-bit P5 PGM"""
    image = coverage_image(tags)
    lookup = np.zeros(256, dtype=np.uint8)
    for tag, code in PGM_CODES.items():
        lookup[int(tag)] = code
    pixels = lookup[image.astype(np.int64)]
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def emit_coverage_figure(
    tags: np.ndarray,
    geometry: ScanGeometry,
    path: Union[str, Path],
    fmt: str = "svg",
) -> Path:
    """
    輸出覆蓋圖

    Args:
        tags: coverage_mask 的標籤網格（ij 索引，第 0 軸為 y₁）
        geometry: 二維掃描幾何
        path: 輸出路徑
        fmt: "svg" 或 "pgm"

    Returns:
        Path: 輸出檔案

    Raises:
        UnsupportedDimensionError: d ≠ 2
        ContainerError: 寫入失敗
    """
    if geometry.d != 2 or np.asarray(tags).ndim != 2:
        raise UnsupportedDimensionError("覆蓋圖僅支援 d=2")
    if fmt not in ("svg", "pgm"):
        raise ContractError(f"不支援的圖檔格式: {fmt}")
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "svg":
            target.write_text(render_coverage_svg(tags, geometry), encoding="utf-8")
        else:
            target.write_bytes(render_coverage_pgm(tags))
    except OSError as e:
        logging.error(f"[emit_coverage_figure] 寫入失敗 {target}: {e}")
        raise ContainerError(f"無法寫入覆蓋圖 {target}: {e}") from e
    logging.info(f"[emit_coverage_figure] 已輸出 {target}（{fmt}）")
    return target

# -*- coding: utf-8 -*-
"""
RDT1 容器與 CSV 輸出模組

容器格式：
    魔術字 b"RDT1"（4 bytes）
    標頭長度：uint32 little-endian
    標頭：UTF-8 JSON（鍵排序、無空白）
        {version, d, k0, L, omega, nu, r, density, detector, scan, payload{kind, shape, dtype}}
        網格化陣列另含 grid 鍵
    酬載：列優先的 little-endian complex128（實部、虛部交錯）
"""

import csv
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from born_simulator import DetectorGrid, MeasurementRecord, ScanGrid
from herglotz_beam import HerglotzDensity, create_density
from rdt_errors import ContainerError, ContractError
from scan_geometry import ScanGeometry

MAGIC = b"RDT1"
VERSION = 1
PAYLOAD_DTYPE = "<c16"
PAYLOAD_KINDS = ("measurement", "spectrum", "mask", "image")


def _encode_header(header: Dict[str, Any]) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _base_header(
    geometry: ScanGeometry,
    density: Optional[HerglotzDensity],
    detector: Optional[DetectorGrid],
    scan: Optional[ScanGrid],
) -> Dict[str, Any]:
    return {
        "version": VERSION,
        "d": geometry.d,
        "k0": geometry.k0,
        "L": geometry.L,
        "omega": list(geometry.omega),
        "nu": list(geometry.nu),
        "r": geometry.r,
        "density": density.to_dict() if density is not None else None,
        "detector": detector.to_dict() if detector is not None else None,
        "scan": scan.to_dict() if scan is not None else None,
    }


def rdtm_write(
    data: Union[MeasurementRecord, np.ndarray],
    path: Union[str, Path],
    geometry: Optional[ScanGeometry] = None,
    kind: Optional[str] = None,
    density: Optional[HerglotzDensity] = None,
    grid: Optional[Dict[str, Any]] = None,
) -> int:
    """
    寫入 RDT1 容器

    Args:
        data: 量測紀錄或陣列（頻譜、遮罩、影像）
        path: 輸出路徑
        geometry: 陣列輸出時必填
        kind: 陣列種類（"spectrum" / "mask" / "image"）
        density: 陣列輸出時可附上的密度描述
        grid: 網格描述（例如 {"N", "k0", "mode", "axis"}）

    Returns:
        int: 寫入的位元組數

    Raises:
        ContainerError: 寫入失敗（含路徑資訊）
        ContractError: 參數不完整
    """
    if isinstance(data, MeasurementRecord):
        header = _base_header(data.geometry, data.density, data.detector, data.scan)
        array = data.samples
        kind = "measurement"
    else:
        if geometry is None or kind not in PAYLOAD_KINDS or kind == "measurement":
            raise ContractError("陣列輸出需要 geometry 與 kind（spectrum / mask / image）")
        header = _base_header(geometry, density, None, None)
        array = np.asarray(data)
    if grid is not None:
        header["grid"] = grid

    payload = np.ascontiguousarray(array, dtype=PAYLOAD_DTYPE)
    header["payload"] = {"kind": kind, "shape": list(payload.shape), "dtype": "complex128"}
    encoded = _encode_header(header)
    blob = MAGIC + struct.pack("<I", len(encoded)) + encoded + payload.tobytes()

    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(blob)
    except OSError as e:
        logging.error(f"[rdtm_write] 寫入失敗 {target}: {e}")
        raise ContainerError(f"無法寫入 RDT1 容器 {target}: {e}") from e
    logging.info(f"[rdtm_write] 已寫入 {target}（{kind}，{len(blob)} bytes）")
    return len(blob)


def rdtm_read_raw(path: Union[str, Path]) -> Tuple[Dict[str, Any], np.ndarray]:
    """
    讀取容器標頭與酬載陣列

    Raises:
        ContainerError: 檔案無法讀取、魔術字錯誤或長度不符
    """
    source = Path(path)
    try:
        blob = source.read_bytes()
    except OSError as e:
        raise ContainerError(f"無法讀取 RDT1 容器 {source}: {e}") from e
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise ContainerError(f"not an RDT1 container: {source}")
    (header_len,) = struct.unpack("<I", blob[4:8])
    if 8 + header_len > len(blob):
        raise ContainerError(f"RDT1 標頭長度超出檔案大小: {source}")
    try:
        header = json.loads(blob[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ContainerError(f"RDT1 標頭不是合法的 JSON: {source}") from e

    payload_info = header.get("payload") or {}
    shape = tuple(int(n) for n in payload_info.get("shape", []))
    payload = blob[8 + header_len:]
    expected = int(np.prod(shape)) * 16
    if expected != len(payload):
        raise ContainerError(
            f"RDT1 酬載長度 {len(payload)} 與形狀 {shape} 不符（應為 {expected} bytes）: {source}"
        )
    array = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).reshape(shape).copy()
    return header, array


def geometry_from_header(header: Dict[str, Any]) -> ScanGeometry:
    return ScanGeometry(
        d=header["d"],
        k0=header["k0"],
        omega=tuple(header["omega"]),
        nu=tuple(header["nu"]),
        L=header["L"],
        r=header["r"],
    )


def rdtm_read(path: Union[str, Path]):
    """
    讀取 RDT1 容器

    Returns:
        kind 為 "measurement" 時回傳 MeasurementRecord，
        其他種類回傳 (header, array)
    """
    header, array = rdtm_read_raw(path)
    kind = header["payload"].get("kind")
    if kind != "measurement":
        return header, array
    geometry = geometry_from_header(header)
    if header.get("density") is None or header.get("detector") is None or header.get("scan") is None:
        raise ContainerError(f"量測容器缺少密度或網格資訊: {path}")
    detector_info = header["detector"]
    scan_info = header["scan"]
    return MeasurementRecord(
        geometry=geometry,
        detector=DetectorGrid(
            spacing=detector_info["spacing"],
            count=detector_info["count"],
            override_nyquist=detector_info.get("override_nyquist", False),
        ),
        scan=ScanGrid(
            spacing=scan_info["spacing"],
            count=scan_info["count"],
            basis=tuple(tuple(vec) for vec in scan_info["basis"]),
        ),
        density=create_density(header["density"], geometry.k0, geometry.omega),
        samples=array,
    )


def _format_cell(value) -> str:
    if np.iscomplexobj(value):
        z = complex(value)
        return f"{z.real:.17g}{z.imag:+.17g}j"
    return f"{float(value):.17g}"


def emit_csv(array2d, path: Union[str, Path]) -> Path:
    """
    以 RFC-4180 CSV 輸出二維陣列（列優先，17 位有效數字，複數為 "re+imj"）

    Examples:
        >>> _format_cell(np.complex128(0))
        '0+0j'
    """
    array = np.asarray(array2d)
    if array.ndim != 2:
        raise ContractError(f"emit_csv 只接受二維陣列，收到 {array.ndim} 維")
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\r\n")
            for row in array:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as e:
        logging.error(f"[emit_csv] 寫入失敗 {target}: {e}")
        raise ContainerError(f"無法寫入 CSV {target}: {e}") from e
    return target


def read_csv(path: Union[str, Path]) -> np.ndarray:
    """讀回 emit_csv 的輸出（一律為複數陣列）"""
    with open(Path(path), newline="", encoding="utf-8") as f:
        rows = [[complex(cell) for cell in row] for row in csv.reader(f)]
    return np.asarray(rows, dtype=complex)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
掃描式繞射斷層攝影命令列工具

子命令：
    simulate     依設定檔模擬掃描量測並寫入 RDT1 容器
    coverage     計算二維傅立葉覆蓋並輸出 SVG / PGM / CSV
    reconstruct  由量測容器重建影像（naive / advanced）
    verify       模擬並驗證傅立葉繞射定理（--classical 為單一平面波版本）
    beam-check   檢查三維高斯光束的唯一性條件

stdout 只輸出一行 JSON 結果；人讀訊息一律寫到 stderr。
結束碼：0 成功、2 設定錯誤、3 I/O 錯誤、4 Nyquist、5 覆蓋為空、6 驗證未過門檻、7 光束條件不成立
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

# 確保從其他目錄執行時能找到專案根目錄的模組
ROOT_DIR = os.path.abspath(os.path.dirname(__file__))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

from born_simulator import simulate_scan
from config_loader import load_run_config, load_settings_from_env, setup_logging, write_json
from coverage_figure import coverage_image, emit_coverage_figure
from fourier_reconstructor import default_output_axis, reconstruct
from fourier_transformer import (
    DEFAULT_GAMMA,
    DEFAULT_TAPER,
    measurement_spectrum,
    reduce_measurements,
    verify_classical_fdt,
    verify_fdt,
)
from herglotz_beam import gaussian_condition_check
from rdt_errors import (
    ConfigError,
    ContainerError,
    ContractError,
    DomainError,
    EmptyCoverageError,
    NyquistError,
    RdtError,
)
from rdtm_container import emit_csv, rdtm_read, rdtm_write
from scan_geometry import ScanGeometry, coverage_mask, covered_area_fractions
from scan_presets import PRESET_DESCRIPTIONS, get_all_preset_names, get_preset_angles

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NYQUIST = 4
EXIT_EMPTY_COVERAGE = 5
EXIT_THRESHOLD = 6
EXIT_BEAM_CONDITION = 7


def emit_json_line(payload: Dict[str, Any]) -> None:
    """輸出一行 JSON 到 stdout"""
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    sys.stdout.flush()


def parse_vector(text: str) -> List[float]:
    """
    解析逗號分隔向量

    Examples:
        >>> parse_vector("0,0,1")
        [0.0, 0.0, 1.0]
    """
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"向量格式錯誤: {text!r}") from e


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    tic = time.perf_counter()
    record = simulate_scan(
        config.phantom,
        config.density,
        config.geometry,
        config.detector,
        config.scan,
        config.simulation_settings(args.threads, args.runtime_budget_s),
    )
    size = rdtm_write(record, args.out)
    emit_json_line({
        "command": "simulate",
        "status": "success",
        "out": str(args.out),
        "bytes": size,
        "shape": list(record.samples.shape),
        "detector": config.detector.to_dict(),
        "scan": {"spacing": config.scan.spacing, "count": config.scan.count},
        "runtime_seconds": round(time.perf_counter() - tic, 3),
    })
    return EXIT_OK


def cmd_coverage(args: argparse.Namespace) -> int:
    if args.preset:
        omega_deg, nu_deg = get_preset_angles(args.preset)
    elif args.omega_deg is None or args.nu_deg is None:
        raise ConfigError("需要 --preset，或同時提供 --omega-deg 與 --nu-deg")
    else:
        omega_deg, nu_deg = args.omega_deg, args.nu_deg
    if not args.k0 > 0:
        raise ConfigError(f"--k0 必須 > 0，收到 {args.k0}")

    geometry = ScanGeometry.from_angles(k0=args.k0, omega_deg=omega_deg, nu_deg=nu_deg)
    tags = coverage_mask(geometry, args.mode, args.grid, workers=args.threads)
    if args.format == "csv":
        emit_csv(coverage_image(tags).astype(float), args.out)
    else:
        emit_coverage_figure(tags, geometry, args.out, args.format)
    emit_json_line({
        "command": "coverage",
        "status": "success",
        "out": str(args.out),
        "mode": args.mode,
        "omega_deg": omega_deg,
        "nu_deg": nu_deg,
        "grid": args.grid,
        "area_fractions": covered_area_fractions(tags),
    })
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace) -> int:
    loaded = rdtm_read(args.meas)
    if isinstance(loaded, tuple):
        raise ConfigError(f"{args.meas} 不是量測容器（payload.kind 應為 measurement）")
    record = loaded
    geometry = record.geometry
    spectrum = measurement_spectrum(record, args.taper, workers=args.threads)
    reduced = reduce_measurements(spectrum, geometry, args.gamma)
    result = reconstruct(
        reduced,
        record.density,
        geometry,
        mode=args.mode,
        N=args.grid,
        output_axis=default_output_axis(geometry.r, args.output_size),
    )
    image = result["image"]
    out = Path(args.out)
    rdtm_write(
        image.values,
        out,
        geometry=geometry,
        kind="image",
        density=record.density,
        grid={"axis": [float(image.axis[0]), float(image.axis[-1]), int(image.axis.size)], "mode": args.mode},
    )
    if geometry.d == 2:
        emit_csv(image.values, out.with_suffix(".csv"))
    metrics = dict(result["metrics"])
    write_json(metrics, out.with_suffix(".metrics.json"))
    emit_json_line({"command": "reconstruct", "status": "success", "out": str(out), **metrics})
    return EXIT_OK


def _report_without_arrays(report: Dict[str, Any]) -> Dict[str, Any]:
    return {key: value for key, value in report.items() if not isinstance(value, np.ndarray)}


def cmd_verify(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    threshold = config.accuracy.fdt_threshold
    if args.classical:
        report = verify_classical_fdt(
            config.phantom,
            config.geometry,
            config.detector,
            Nv=config.accuracy.Nv,
            gamma=config.accuracy.gamma,
            taper=config.accuracy.taper,
            workers=args.threads,
        )
    else:
        record = simulate_scan(
            config.phantom,
            config.density,
            config.geometry,
            config.detector,
            config.scan,
            config.simulation_settings(args.threads, args.runtime_budget_s),
        )
        report = verify_fdt(
            record,
            config.phantom,
            config.density,
            config.geometry,
            gamma=config.accuracy.gamma,
            taper=config.accuracy.taper,
            workers=args.threads,
        )
    summary = _report_without_arrays(report)
    summary["threshold"] = threshold
    summary["passed"] = report["interior_max_rel"] <= threshold
    summary["classical"] = bool(args.classical)
    write_json(summary, args.report)
    emit_json_line({"command": "verify", **summary})
    if not summary["passed"]:
        logging.error(f"[verify] 內部最大相對誤差 {report['interior_max_rel']:.4g} 超過門檻 {threshold}")
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_beam_check(args: argparse.Namespace) -> int:
    omega = np.asarray(parse_vector(args.omega))
    nu = np.asarray(parse_vector(args.nu))
    if omega.size != 3 or nu.size != 3:
        raise ConfigError("--omega 與 --nu 必須是三維向量")
    if not np.linalg.norm(omega) > 0 or not np.linalg.norm(nu) > 0:
        raise ConfigError("--omega 與 --nu 不可為零向量")
    if not args.A > 0 or not args.k0 > 0:
        raise ConfigError("--A 與 --k0 必須 > 0")
    report = gaussian_condition_check(
        args.A,
        omega / np.linalg.norm(omega),
        nu / np.linalg.norm(nu),
        args.k0,
        args.samples,
    )
    emit_json_line({"command": "beam-check", **_report_without_arrays(report)})
    return EXIT_OK if report["satisfied"] else EXIT_BEAM_CONDITION


# ---------------------------------------------------------------------------
# 參數解析
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="掃描式繞射斷層攝影：模擬、覆蓋、重建與驗證")
    parser.add_argument("--threads", type=int, default=None, help="工作執行緒上限（預設讀取 RDT_THREADS）")
    parser.add_argument("--log-level", type=str, default=None, help="日誌層級（預設讀取 RDT_LOG_LEVEL）")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="模擬掃描量測")
    p_sim.add_argument("--config", required=True, help="RunConfig JSON 路徑")
    p_sim.add_argument("--out", required=True, help="輸出 RDT1 容器路徑")
    p_sim.set_defaults(handler=cmd_simulate)

    p_cov = sub.add_parser("coverage", help="計算二維傅立葉覆蓋")
    p_cov.add_argument("--k0", type=float, default=1.0, help="波數")
    p_cov.add_argument("--omega-deg", type=float, default=None, help="光束方向角度（度）")
    p_cov.add_argument("--nu-deg", type=float, default=None, help="掃描法向量角度（度）")
    p_cov.add_argument(
        "--preset",
        choices=get_all_preset_names(),
        default=None,
        help="預設組態：" + "；".join(f"{k}={v}" for k, v in PRESET_DESCRIPTIONS.items()),
    )
    p_cov.add_argument("--mode", choices=["naive", "advanced"], default="naive", help="覆蓋模式")
    p_cov.add_argument("--grid", type=int, default=512, help="每軸格數")
    p_cov.add_argument("--out", required=True, help="輸出檔案路徑")
    p_cov.add_argument("--format", choices=["svg", "pgm", "csv"], default="svg", help="輸出格式")
    p_cov.set_defaults(handler=cmd_coverage)

    p_rec = sub.add_parser("reconstruct", help="由量測重建影像")
    p_rec.add_argument("--meas", required=True, help="量測 RDT1 容器路徑")
    p_rec.add_argument("--mode", choices=["naive", "advanced"], default="naive", help="反投影模式")
    p_rec.add_argument("--grid", type=int, default=256, help="頻譜網格每軸格數")
    p_rec.add_argument("--out", required=True, help="輸出影像容器路徑")
    p_rec.add_argument("--output-size", type=int, default=128, help="輸出影像每軸點數")
    p_rec.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="邊緣裁切係數 γ")
    p_rec.add_argument("--taper", type=float, default=DEFAULT_TAPER, help="Tukey 視窗平坦比例")
    p_rec.set_defaults(handler=cmd_reconstruct)

    p_ver = sub.add_parser("verify", help="驗證傅立葉繞射定理")
    p_ver.add_argument("--config", required=True, help="RunConfig JSON 路徑")
    p_ver.add_argument("--report", required=True, help="輸出 JSON 報告路徑")
    p_ver.add_argument("--classical", action="store_true", help="改為驗證單一平面波的經典定理")
    p_ver.set_defaults(handler=cmd_verify)

    p_beam = sub.add_parser("beam-check", help="檢查三維高斯光束條件")
    p_beam.add_argument("--A", type=float, required=True, help="光束腰參數")
    p_beam.add_argument("--omega", type=str, required=True, help="光束方向 x,y,z")
    p_beam.add_argument("--nu", type=str, required=True, help="掃描法向量 x,y,z")
    p_beam.add_argument("--k0", type=float, default=1.0, help="波數")
    p_beam.add_argument("--samples", type=int, default=2000, help="球面取樣點數")
    p_beam.set_defaults(handler=cmd_beam_check)
    return parser


def exit_code_for(error: BaseException) -> int:
    """例外對應的結束碼"""
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, NyquistError):
        return EXIT_NYQUIST
    if isinstance(error, EmptyCoverageError):
        return EXIT_EMPTY_COVERAGE
    if isinstance(error, (ContainerError, OSError)):
        return EXIT_IO
    if isinstance(error, (ContractError, DomainError)):
        return EXIT_CONFIG
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = load_settings_from_env()
    except ConfigError as e:
        setup_logging("INFO")
        logging.error(str(e))
        return EXIT_CONFIG
    setup_logging(args.log_level or env["log_level"])
    args.threads = max(args.threads or env["threads"], 1)
    args.runtime_budget_s = env["runtime_budget_s"]

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (RdtError, OSError) as e:
        code = exit_code_for(e)
        logging.error(f"[{args.command}] 執行失敗（結束碼 {code}）: {e}")
        emit_json_line({"command": args.command, "status": "error", "exit_code": code, "message": str(e)})
        return code


if __name__ == "__main__":
    sys.exit(main())

# -*- coding: utf-8 -*-
"""
掃描式繞射斷層攝影（RDT）例外類別

各模組共用的錯誤階層；CLI 依類別對應結束碼：
    ConfigError → 2、ContainerError / OSError → 3、NyquistError → 4、
    EmptyCoverageError → 5
"""


class RdtError(Exception):
    """所有 RDT 錯誤的基底類別"""


class ConfigError(RdtError, ValueError):
    """RunConfig 內容不合法（未知欄位、型別或範圍錯誤）"""


class ContractError(RdtError, ValueError):
    """呼叫端違反函數前置條件"""


class GeometryError(ContractError):
    """ScanGeometry 不變量不成立（單位向量、k0 > 0、L > r）"""


class GeometryMismatchError(ContractError):
    """量測紀錄的幾何資訊與呼叫參數不一致"""


class UnsupportedDimensionError(ContractError):
    """此運算不支援該維度"""


class DomainError(RdtError, ValueError):
    """數值定義域錯誤（例如 evanescent frequency）"""


class SingularityError(DomainError):
    """Green 函數在原點的奇異點"""


class NyquistError(RdtError):
    """取樣間距超過 π/k0 且未設定 override"""


class ContainerError(RdtError, OSError):
    """RDT1 容器格式錯誤或讀寫失敗"""


class EmptyCoverageError(RdtError):
    """Σ₁ 為空，naive 反投影沒有任何資料"""


class GridSizeError(RdtError, MemoryError):
    """網格解析度超過記憶體保護上限"""

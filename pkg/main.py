"""
命令列入口點檔案
實際邏輯在 rdt_main.py 中實作，可用 `python main.py <子命令>` 執行
"""

import sys

from rdt_main import main

__all__ = ['main']

if __name__ == "__main__":
    sys.exit(main())

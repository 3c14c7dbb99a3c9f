"""
结果数据处理模块
"""
import logging
from pathlib import Path
from typing import Optional

import pandas as pd

logger = logging.getLogger(__name__)

FINGERPRINT_PREFIX = "# config-fingerprint: "


class ResultWriter:
    """
    @class ResultWriter
    @description 把仿真结果写成带配置指纹注释行的 CSV
    """

    def __init__(self, out_dir, fingerprint: str):
        self.out_dir = Path(out_dir)
        self.fingerprint = fingerprint

    def path_for(self, name: str) -> Path:
        return self.out_dir / name

    def save(self, df: pd.DataFrame, name: str) -> Path:
        """
        @param {pd.DataFrame} df - 结果表
        @param {str} name - 文件名
        @return {Path} - 写入的文件路径
        """
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(f"{FINGERPRINT_PREFIX}{self.fingerprint}\n")
            df.to_csv(f, index=False, lineterminator="\n", float_format="%.15g")
        logger.info("结果已保存: %s (%d 行)", path, len(df))
        return path

    def save_text(self, text: str, name: str) -> Path:
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info("已写出: %s", path)
        return path


def load_result(path) -> pd.DataFrame:
    """
    @param {str|Path} path - 结果 CSV
    @return {pd.DataFrame} - 去掉指纹注释行后的结果表
    """
    return pd.read_csv(path, comment="#")


def read_fingerprint(path) -> Optional[str]:
    with open(path, 'r', encoding='utf-8') as f:
        first = f.readline().rstrip("\n")
    if first.startswith(FINGERPRINT_PREFIX):
        return first[len(FINGERPRINT_PREFIX):]
    return None

"""
配置管理模块
"""
import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_DIR = PROJECT_ROOT / "config"

VALID_MODES = ("det", "stoch")


@dataclass
class RunConfig:
    """一次批处理运行的完整配置"""
    source: Path
    catalog_path: Path
    phonon_path: Path
    out_dir: Path
    seed: int
    mode: str
    max_concurrent: int
    worst_case: bool
    raw: Dict[str, Any] = field(default_factory=dict)

    def section(self, name: str) -> Dict[str, Any]:
        return self.raw.get(name, {}) or {}

    def sweep_axis(self, name: str) -> List[Any]:
        return list(self.section("sweep").get(name, []))

    def fingerprint(self, **extra) -> str:
        """配置指纹，写入每个结果文件的首行；extra 为命令行附加参数"""
        payload = copy.deepcopy(self.raw)
        payload["run"] = {"seed": self.seed, "mode": self.mode, "worst_case": self.worst_case}
        payload["command"] = extra
        return ConfigManager.fingerprint(payload)


class ConfigManager:
    """配置管理类"""

    def __init__(self, config_dir: Optional[Path] = None):
        """初始化配置管理器"""
        self.config_dir = Path(config_dir) if config_dir else DEFAULT_CONFIG_DIR
        self.run_config_file = self.config_dir / "simulation.yaml"
        self.catalog_file = self.config_dir / "catalog.json"
        self.phonon_file = self.config_dir / "phonon_modes.json"

    @staticmethod
    def _read_json(path: Path) -> dict:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"找不到配置文件: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"JSON 格式错误 {path}: {e}") from e

    @staticmethod
    def _read_yaml(path: Path) -> dict:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"找不到配置文件: {path}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML 格式错误 {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"配置文件顶层必须是映射: {path}")
        return data

    def load_catalog(self, path: Optional[Path] = None):
        """
        加载元件参数库

        Returns:
            Catalog: 只读参数库
        """
        from core.components import Catalog
        return Catalog.from_dict(self._read_json(Path(path) if path else self.catalog_file))

    def load_phonon_modes(self, path: Optional[Path] = None) -> dict:
        """加载声子模参数文件（原始字典，由 raman 模块解析）"""
        data = self._read_json(Path(path) if path else self.phonon_file)
        if not data.get("modes"):
            raise ConfigError("声子模参数文件缺少 modes")
        return data

    def load_job(self, path: Path) -> dict:
        """加载任务文件"""
        path = Path(path)
        if path.suffix in (".yaml", ".yml"):
            return self._read_yaml(path)
        return self._read_json(path)

    def load_run_config(self, path: Optional[Path] = None, seed: Optional[int] = None,
                        mode: Optional[str] = None, out_dir: Optional[Path] = None,
                        worst_case: Optional[bool] = None) -> RunConfig:
        """
        加载运行配置，命令行参数优先于文件中的取值

        Args:
            path: simulation.yaml 路径
            seed/mode/out_dir/worst_case: 命令行覆盖值
        """
        path = Path(path) if path else self.run_config_file
        raw = self._read_yaml(path)
        base = path.resolve().parent

        paths = raw.get("paths", {}) or {}
        run = raw.get("run", {}) or {}

        def resolve(key: str, default: Path) -> Path:
            value = paths.get(key)
            return (base / value).resolve() if value else default

        config = RunConfig(
            source=path,
            catalog_path=resolve("catalog", self.catalog_file),
            phonon_path=resolve("phonon_modes", self.phonon_file),
            out_dir=Path(out_dir) if out_dir else resolve("out_dir", Path("out")),
            seed=int(seed if seed is not None else run.get("seed", 0)),
            mode=mode or run.get("mode", "det"),
            max_concurrent=int(run.get("max_concurrent", 4)),
            worst_case=bool(worst_case if worst_case is not None else run.get("worst_case", False)),
            raw=raw,
        )
        self.validate(config)
        logger.debug("已加载运行配置 %s", path)
        return config

    def validate(self, config: RunConfig):
        """检查运行配置的不变量"""
        for label, p in (("catalog", config.catalog_path), ("phonon_modes", config.phonon_path)):
            if not p.exists():
                raise ConfigError(f"paths.{label} 指向的文件不存在: {p}")
        if config.mode not in VALID_MODES:
            raise ConfigError(f"run.mode 必须是 {VALID_MODES} 之一: {config.mode}")
        if config.max_concurrent < 1:
            raise ConfigError("run.max_concurrent 必须 >= 1")
        sweep = config.section("sweep")
        for axis in ("n_tot", "nodes", "temperatures_K"):
            if not sweep.get(axis):
                raise ConfigError(f"sweep.{axis} 不能为空")
        pump = sweep.get("pump_nm", {}) or {}
        if not all(k in pump for k in ("start", "end", "step")) or pump["step"] <= 0:
            raise ConfigError("sweep.pump_nm 需要 start/end/step 且 step > 0")

    @staticmethod
    def fingerprint(obj: Any) -> str:
        """对象的规范 JSON 串的 sha256"""
        text = json.dumps(obj, sort_keys=True, ensure_ascii=False, default=str)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

"""
异常定义模块
"""


class SimulatorError(Exception):
    """仿真器异常基类"""


class ConfigError(SimulatorError):
    """配置文件缺失、格式错误或取值非法"""


class DomainError(SimulatorError, ValueError):
    """数值定义域错误（如非正波长、负损耗）"""

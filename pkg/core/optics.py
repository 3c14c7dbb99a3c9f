"""
光学计算模块

波长/频率换算、ITU DWDM 信道网格、三种频率转换过程的波长规划以及温度调谐。
波长一律为真空波长（nm），频率单位 GHz。
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from core.exceptions import DomainError

logger = logging.getLogger(__name__)

# λ[nm]·f[GHz] = c[m/s] 数值相同
C_NM_GHZ = SPEED_OF_LIGHT


class ConversionKind(str, Enum):
    DFG_CHI2 = "DFG_chi2"
    FWM_BG_CHI3 = "FWM_BG_chi3"
    TDFG_CHI3 = "TDFG_chi3"


# 每种过程的光子角色及能量守恒符号：Σ sign·ω = 0
PROCESS_ROLES = {
    ConversionKind.DFG_CHI2: (("signal", 1), ("pump", -1), ("idler", -1)),
    ConversionKind.FWM_BG_CHI3: (("signal", 1), ("pump1", 1), ("pump2", -1), ("idler", -1)),
    ConversionKind.TDFG_CHI3: (("signal", 1), ("pump", -2), ("idler", -1)),
}


@dataclass(frozen=True)
class ConversionProcess:
    """一次规划好的转换过程，photons 为 {角色: 波长nm}"""
    kind: ConversionKind
    photons: dict

    def energy_residual(self) -> float:
        """带符号频率之和相对于信号频率的残差"""
        total = 0.0
        for role, sign in PROCESS_ROLES[self.kind]:
            total += sign * wavelength_frequency_convert(self.photons[role])
        return total / wavelength_frequency_convert(self.photons["signal"])


@dataclass(frozen=True)
class TuningModel:
    """
    线性温度调谐模型

    slope 为相位匹配波长随温度的漂移 nm/°C；reference_temperature 为相位匹配
    落在网格首个信道时的器件温度 °C。
    """
    slope: float = 0.27
    reference_temperature: float = 25.0

    def __post_init__(self):
        if not self.slope > 0:
            raise DomainError(f"调谐斜率必须为正: {self.slope}")


@dataclass(frozen=True)
class ChannelGrid:
    """以短波长端为锚点的等频率间隔信道网格"""
    start_wavelength: float
    end_wavelength: float
    spacing: float
    channels: Tuple[float, ...] = field(default=())

    @property
    def frequencies(self) -> np.ndarray:
        anchor = wavelength_frequency_convert(self.start_wavelength)
        return anchor - self.spacing * np.arange(len(self.channels))

    def __len__(self) -> int:
        return len(self.channels)

    def nearest(self, wavelength: float) -> Tuple[int, float]:
        """返回最接近给定波长的信道 (下标, 中心波长)"""
        target = wavelength_frequency_convert(wavelength)
        freqs = self.frequencies
        idx = int(np.argmin(np.abs(freqs - target)))
        return idx, self.channels[idx]


def wavelength_frequency_convert(wavelength_nm: float) -> float:
    """波长(nm) -> 频率(GHz)，f = c/λ"""
    if not wavelength_nm > 0:
        raise DomainError(f"波长必须为正: {wavelength_nm}")
    return C_NM_GHZ / wavelength_nm


def frequency_wavelength_convert(frequency_ghz: float) -> float:
    """频率(GHz) -> 波长(nm)"""
    if not frequency_ghz > 0:
        raise DomainError(f"频率必须为正: {frequency_ghz}")
    return C_NM_GHZ / frequency_ghz


def build_itu_grid(start: float, end: float, spacing: float = 50.0) -> ChannelGrid:
    """
    构建 ITU DWDM 信道网格

    Args:
        start: 短波长端（锚点）nm
        end: 长波长端 nm
        spacing: 信道间隔 GHz

    Returns:
        ChannelGrid: 信道从锚点起按频率递减（波长递增）排列
    """
    if not start > 0 or not end > 0:
        raise DomainError("网格端点波长必须为正")
    if not start < end:
        raise DomainError(f"起始波长必须小于终止波长: {start} >= {end}")
    if not spacing > 0:
        raise DomainError(f"信道间隔必须为正: {spacing}")

    f_start = wavelength_frequency_convert(start)
    f_end = wavelength_frequency_convert(end)
    span = f_start - f_end
    # 容忍端点处的浮点舍入
    count = math.floor(span / spacing + 1e-9) + 1
    if count < 2:
        raise DomainError(f"区间 [{start}, {end}] nm 内不足一个完整信道间隔")

    freqs = f_start - spacing * np.arange(count)
    # 锚点信道保持输入值本身
    channels = (float(start),) + tuple(frequency_wavelength_convert(float(f)) for f in freqs[1:])
    logger.debug("构建信道网格: %d 个信道, 间隔 %.1f GHz", count, spacing)
    return ChannelGrid(start, end, spacing, channels)


def _inverse_sum(terms: List[Tuple[float, float]], label: str) -> float:
    """由 Σ coef/λ 计算波长，结果频率必须为正"""
    inv = sum(coef / wl for coef, wl in terms)
    if not inv > 0:
        raise DomainError(f"{label}频率非正，无法满足能量守恒")
    return 1.0 / inv


def _check_positive(**wavelengths):
    for name, value in wavelengths.items():
        if not value > 0:
            raise DomainError(f"{name} 波长必须为正: {value}")


def dfg_pump_for(signal: float, idler: float) -> float:
    """χ² DFG：ω_signal = ω_idler + ω_pump，返回泵浦波长"""
    _check_positive(signal=signal, idler=idler)
    if not idler > signal:
        raise DomainError(f"闲频波长必须大于信号波长: idler={idler}, signal={signal}")
    return _inverse_sum([(1, signal), (-1, idler)], "泵浦")


def dfg_idler_for(signal: float, pump: float) -> float:
    """χ² DFG 的闲频波长"""
    _check_positive(signal=signal, pump=pump)
    return _inverse_sum([(1, signal), (-1, pump)], "闲频")


def tdfg_idler_for(signal: float, pump: float) -> float:
    """χ³ TDFG：ω_idler = ω_signal − 2ω_pump"""
    _check_positive(signal=signal, pump=pump)
    return _inverse_sum([(1, signal), (-2, pump)], "闲频")


def tdfg_pump_for(signal: float, idler: float) -> float:
    """χ³ TDFG 所需的（简并）泵浦波长"""
    _check_positive(signal=signal, idler=idler)
    if not idler > signal:
        raise DomainError(f"闲频波长必须大于信号波长: idler={idler}, signal={signal}")
    return 2.0 / (1.0 / signal - 1.0 / idler)


def fwm_bs_idler_for(signal: float, pump1: float, pump2: float) -> float:
    """χ³ FWM-BG：ω_idler = ω_signal + ω_p1 − ω_p2"""
    _check_positive(signal=signal, pump1=pump1, pump2=pump2)
    return _inverse_sum([(1, signal), (1, pump1), (-1, pump2)], "闲频")


def temperature_for_target(current_signal: float, target_signal: float,
                           model: Optional[TuningModel] = None) -> float:
    """目标波长所需的温度变化 ΔT（°C，带符号）"""
    model = model or TuningModel()
    return (target_signal - current_signal) / model.slope


@dataclass(frozen=True)
class TuningPlan:
    """单个目标信道的调谐方案"""
    signal_nm: float
    channel_index: int
    channel_nm: float
    channel_ghz: float
    dfg_pump_nm: float
    delta_t_c: float
    set_point_c: float
    tdfg_pump_nm: float


def plan_channel(signal: float, target: float, grid: ChannelGrid,
                 current_channel: float, model: Optional[TuningModel] = None) -> TuningPlan:
    """
    把目标波长对齐到网格信道，并给出 DFG 泵浦、温度变化、温控设定点与 TDFG 泵浦

    Args:
        signal: 原子发射波长 nm
        target: 目标信道波长 nm（对齐到最近信道）
        grid: 信道网格
        current_channel: 转换器当前工作的信道波长 nm（同样对齐到最近信道）
    """
    model = model or TuningModel()
    idx, channel = grid.nearest(target)
    _, current = grid.nearest(current_channel)
    plan = TuningPlan(
        signal_nm=signal,
        channel_index=idx,
        channel_nm=channel,
        channel_ghz=wavelength_frequency_convert(channel),
        dfg_pump_nm=dfg_pump_for(signal, channel),
        delta_t_c=temperature_for_target(current, channel, model),
        set_point_c=model.reference_temperature + temperature_for_target(grid.channels[0], channel, model),
        tdfg_pump_nm=tdfg_pump_for(signal, channel),
    )
    logger.info("调谐方案: 信道 %d (%.4f nm), 泵浦 %.4f nm, ΔT %.4f °C, 设定点 %.4f °C",
                idx, channel, plan.dfg_pump_nm, plan.delta_t_c, plan.set_point_c)
    return plan

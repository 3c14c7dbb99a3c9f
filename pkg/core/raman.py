"""
自发拉曼散射噪声模块

LiNbO3 波导中泵浦光引起的拉曼噪声：洛伦兹型拉曼极化率、声子占据数、
非谐温度修正、模场重叠、噪声谱密度(NSD)以及光子数演化方程的数值积分。

对外频率单位为 cm^-1，内部换算为 rad/s（系数 2πc·100）。
Ω = ω_s − ω_0：Ω < 0 为 Stokes，Ω > 0 为反 Stokes。
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import constants
from scipy.integrate import solve_ivp

from core.exceptions import ConfigError, DomainError

logger = logging.getLogger(__name__)

# cm^-1 -> rad/s
WAVENUMBER_TO_ANGULAR = 2.0 * math.pi * constants.c * 100.0

SPECTRUM_COLUMNS = ["pump_nm", "scattered_nm", "raman_shift_cm1", "temperature_K",
                    "nsd_per_s_per_nm", "branch"]


def to_angular(wavenumber_cm1):
    return np.asarray(wavenumber_cm1, dtype=float) * WAVENUMBER_TO_ANGULAR


def wavenumber_of(wavelength_nm: float) -> float:
    """真空波长(nm) -> 波数(cm^-1)"""
    if not wavelength_nm > 0:
        raise DomainError(f"波长必须为正: {wavelength_nm}")
    return 1e7 / wavelength_nm


@dataclass(frozen=True)
class PhononMode:
    """单个声子模；omega0/gamma0/B/D 为 cm^-1，C 为 cm^-1/K^2，K 为 1/K，f 为 m^2/V^2·cm^-2"""
    label: str
    omega0: float
    gamma0: float
    f: float
    B: float = 0.0
    C: float = 0.0
    D: float = 0.0
    K: float = 0.0
    source: str = ""

    def __post_init__(self):
        if not self.omega0 > 0 or not self.gamma0 > 0:
            raise DomainError(f"声子模 {self.label}: omega0 与 gamma0 必须为正")


@dataclass(frozen=True)
class RamanModel:
    modes: Tuple[PhononMode, ...]
    n_s: float = 2.14
    n_0: float = 2.14
    temperature: float = 300.0
    populated_from_reference: bool = False

    def __post_init__(self):
        if self.n_s < 1 or self.n_0 < 1:
            raise DomainError("折射率必须 >= 1")

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "RamanModel":
        """由声子模参数文件构建模型"""
        try:
            modes = tuple(
                PhononMode(label=m["label"], omega0=float(m["omega0"]), gamma0=float(m["gamma0"]),
                           f=float(m["f"]), B=float(m.get("B", 0)), C=float(m.get("C", 0)),
                           D=float(m.get("D", 0)), K=float(m.get("K", 0)),
                           source=m.get("source", ""))
                for m in data["modes"])
        except (KeyError, TypeError) as e:
            raise ConfigError(f"声子模参数不完整: {e}") from e
        return cls(modes=modes,
                   temperature=float(data.get("reference_temperature_K", 300.0)),
                   populated_from_reference=bool(data.get("populated_from_reference", False)),
                   **overrides)

    def with_(self, **changes) -> "RamanModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class WaveguideGeometry:
    """波导长度 L(m)，重叠积分 Θ_R(m^-2) 直接给出或由两个高斯模场半径计算"""
    length: float
    overlap: Optional[float] = None
    pump_waist: Optional[float] = None
    signal_waist: Optional[float] = None

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"波导长度必须为正: {self.length}")
        if self.overlap is None and (self.pump_waist is None or self.signal_waist is None):
            raise DomainError("需要给出 overlap 或两个模场半径")
        if not self.theta > 0:
            raise DomainError("重叠积分必须为正")

    @property
    def theta(self) -> float:
        if self.overlap is not None:
            return self.overlap
        return overlap_gaussian(self.pump_waist, self.signal_waist)


@dataclass(frozen=True)
class PumpConfig:
    wavelength: float
    power: float = 0.2
    signal_wavelength: float = 1520.0

    def __post_init__(self):
        if self.power < 0:
            raise DomainError(f"泵浦功率不能为负: {self.power}")
        if not self.wavelength > 0 or not self.signal_wavelength > 0:
            raise DomainError("波长必须为正")


def phonon_occupation(omega_cm1: float, temperature: float) -> float:
    """玻色-爱因斯坦占据数 1/(exp(ħ|Ω|/kT) - 1)"""
    if not temperature > 0:
        raise DomainError(f"温度必须为正: {temperature}")
    if omega_cm1 == 0:
        raise DomainError("Ω = 0 时占据数发散")
    x = constants.hbar * abs(float(to_angular(omega_cm1))) / (constants.k * temperature)
    return 1.0 / math.expm1(x)


def occupation_factor(omega_cm1: float, temperature: float) -> float:
    """h(Ω)：Stokes 为 1 + n，反 Stokes 为 n"""
    n = phonon_occupation(omega_cm1, temperature)
    return 1.0 + n if omega_cm1 < 0 else n


def mode_params_at_temperature(mode: PhononMode, temperature: float) -> Tuple[float, float]:
    """非谐修正后的 (ω(T), γ(T))，单位 cm^-1"""
    if not temperature > 0:
        raise DomainError(f"温度必须为正: {temperature}")
    anharmonic = 1.0 + 2.0 * phonon_occupation(mode.omega0 / 2.0, temperature)
    omega = mode.omega0 * (1.0 + mode.K * temperature) - mode.D * anharmonic
    gamma = mode.gamma0 + mode.B * anharmonic + mode.C * temperature ** 2
    return omega, gamma


def susceptibility(omega_cm1: float, model: RamanModel,
                   temperature: Optional[float] = None) -> complex:
    """拉曼极化率 χ_R(Ω) = Σ f_j / (ω_j² + 2iγ_jΩ − Ω²)，单位 m^2/V^2"""
    temperature = model.temperature if temperature is None else temperature
    big_omega = float(to_angular(omega_cm1))
    chi = 0j
    for mode in model.modes:
        w_cm, g_cm = mode_params_at_temperature(mode, temperature)
        w, g = float(to_angular(w_cm)), float(to_angular(g_cm))
        f = mode.f * WAVENUMBER_TO_ANGULAR ** 2
        chi += f / (w * w + 2j * g * big_omega - big_omega * big_omega)
    return chi


def overlap_gaussian(pump_waist: float, signal_waist: float) -> float:
    """归一化高斯模的重叠积分 2/(π(w0² + ws²))"""
    if not pump_waist > 0 or not signal_waist > 0:
        raise DomainError("模场半径必须为正")
    return 2.0 / (math.pi * (pump_waist ** 2 + signal_waist ** 2))


def raman_shift(pump_nm: float, scattered_nm: float) -> float:
    """Ω = ω_s − ω_0，单位 cm^-1"""
    return wavenumber_of(scattered_nm) - wavenumber_of(pump_nm)


def noise_spectral_density(pump: PumpConfig, geom: WaveguideGeometry, model: RamanModel,
                           temperature: Optional[float] = None,
                           scattered_nm: Optional[float] = None) -> float:
    """
    拉曼噪声谱密度，单位 photons·s^-1·nm^-1

    Args:
        scattered_nm: 散射光波长，缺省为 pump.signal_wavelength
    """
    temperature = model.temperature if temperature is None else temperature
    scattered_nm = pump.signal_wavelength if scattered_nm is None else scattered_nm
    if scattered_nm == pump.wavelength:
        raise DomainError("散射波长等于泵浦波长，Ω = 0")
    omega = raman_shift(pump.wavelength, scattered_nm)
    h = occupation_factor(omega, temperature)
    im_chi = abs(susceptibility(omega, model, temperature).imag)
    lam = scattered_nm * 1e-9
    per_m = (6.0 * math.pi ** 2 * pump.power * h * geom.theta * im_chi * geom.length
             / (constants.epsilon_0 * lam ** 3 * model.n_s * model.n_0))
    return per_m * 1e-9


def gain_coefficient(pump: PumpConfig, geom: WaveguideGeometry, model: RamanModel,
                     temperature: Optional[float] = None,
                     scattered_nm: Optional[float] = None) -> float:
    """光子数演化方程 dN_s/dz = G(N_s + 1) 的系数 G（含泵浦功率 P0）"""
    temperature = model.temperature if temperature is None else temperature
    scattered_nm = pump.signal_wavelength if scattered_nm is None else scattered_nm
    omega = raman_shift(pump.wavelength, scattered_nm)
    h = occupation_factor(omega, temperature)
    im_chi = abs(susceptibility(omega, model, temperature).imag)
    omega_s = 2.0 * math.pi * constants.c / (scattered_nm * 1e-9)
    return (3.0 * omega_s * pump.power * im_chi * h * geom.theta
            / (2.0 * model.n_s * model.n_0 * constants.epsilon_0 * constants.c ** 2))


def nsd_from_gain(gain: float, length: float, scattered_nm: float) -> float:
    """由 G·L 经 |dω/dλ| = 2πc/λ² 换算为每 nm 的谱密度"""
    lam = scattered_nm * 1e-9
    return gain * length * 2.0 * math.pi * constants.c / lam ** 2 * 1e-9


def integrate_gain_equation(gain: float, length: float, steps: int = 100) -> float:
    """数值积分 dN/dz = G(N + 1)，N(0) = 0，返回 N(L)"""
    if steps < 1:
        raise DomainError(f"steps 必须 >= 1: {steps}")
    if gain == 0:
        return 0.0
    sol = solve_ivp(lambda z, n: gain * (n + 1.0), (0.0, length), [0.0],
                    method="DOP853", rtol=1e-12, atol=1e-20, max_step=length / steps)
    if not sol.success:
        raise DomainError(f"光子数演化积分失败: {sol.message}")
    return float(sol.y[0, -1])


def evolve_photon_number(pump: PumpConfig, geom: WaveguideGeometry, model: RamanModel,
                         temperature: Optional[float] = None, omega_cm1: Optional[float] = None,
                         steps: int = 100) -> float:
    """沿波导积分拉曼光子数；omega_cm1 缺省时由泵浦与目标信号波长决定"""
    if omega_cm1 is None:
        scattered = pump.signal_wavelength
    else:
        scattered = 1e7 / (wavenumber_of(pump.wavelength) + omega_cm1)
    gain = gain_coefficient(pump, geom, model, temperature, scattered)
    return integrate_gain_equation(gain, geom.length, steps)


def noise_counts_in_filter(nsd: float, bandwidth_nm: float, efficiency: float = 1.0) -> float:
    """滤波器通带内的噪声计数率（通带内 NSD 视为常数）"""
    if bandwidth_nm < 0:
        raise DomainError(f"带宽不能为负: {bandwidth_nm}")
    return nsd * bandwidth_nm * efficiency


def mirror_wavelength(pump_nm: float, scattered_nm: float) -> float:
    """同 |Ω| 的另一支散射波长"""
    mirrored = 2.0 * wavenumber_of(pump_nm) - wavenumber_of(scattered_nm)
    if not mirrored > 0:
        raise DomainError("镜像散射频率非正")
    return 1e7 / mirrored


def stokes_antistokes_ratio(pump: PumpConfig, geom: WaveguideGeometry, model: RamanModel,
                            temperature: Optional[float] = None) -> float:
    """目标波长与其镜像波长处 Stokes / 反 Stokes 谱密度之比"""
    mirror = mirror_wavelength(pump.wavelength, pump.signal_wavelength)
    a = noise_spectral_density(pump, geom, model, temperature, pump.signal_wavelength)
    b = noise_spectral_density(pump, geom, model, temperature, mirror)
    stokes, anti = (a, b) if pump.signal_wavelength > pump.wavelength else (b, a)
    if anti == 0:
        raise DomainError("反 Stokes 谱密度为零")
    return stokes / anti


def spectrum_rows(pump_nm: float, temperature: float, pump: PumpConfig,
                  geom: WaveguideGeometry, model: RamanModel) -> List[dict]:
    """单个 (泵浦波长, 温度) 点上两支散射的谱密度行"""
    point = replace(pump, wavelength=pump_nm)
    rows = []
    for scattered in (pump.signal_wavelength, mirror_wavelength(pump_nm, pump.signal_wavelength)):
        omega = raman_shift(pump_nm, scattered)
        rows.append({
            "pump_nm": pump_nm,
            "scattered_nm": scattered,
            "raman_shift_cm1": omega,
            "temperature_K": temperature,
            "nsd_per_s_per_nm": noise_spectral_density(point, geom, model, temperature, scattered),
            "branch": "stokes" if omega < 0 else "antistokes",
        })
    return rows


def raman_spectrum(pump_nms: Sequence[float], temperatures: Iterable[float], pump: PumpConfig,
                   geom: WaveguideGeometry, model: RamanModel) -> pd.DataFrame:
    """泵浦波长 × 温度网格上的 Stokes / 反 Stokes 谱密度表"""
    rows = []
    for temperature in temperatures:
        for pump_nm in pump_nms:
            rows.extend(spectrum_rows(float(pump_nm), float(temperature), pump, geom, model))
    return pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)


def pump_grid(start: float, end: float, step: float) -> np.ndarray:
    """闭区间泵浦波长网格"""
    if not step > 0 or not end >= start:
        raise DomainError("泵浦波长网格参数非法")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(count)
    if grid[-1] < end - 1e-9:
        grid = np.append(grid, end)
    return np.round(grid, 6)

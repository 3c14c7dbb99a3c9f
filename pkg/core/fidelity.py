"""
保真度模块

开关/复用器串扰与转换器噪声导致的 Bell 对保真度累积，F = F_src · Π(1 − ε_i)。
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import pandas as pd

from core.exceptions import ConfigError, DomainError
from core.raman import noise_counts_in_filter

logger = logging.getLogger(__name__)

FIDELITY_COLUMNS = ["architecture", "nodes", "fidelity", "converter_kind"]


class NoiseSource(str, Enum):
    SWITCH_CROSSTALK = "SwitchCrosstalk"
    MUX_CROSSTALK = "MuxCrosstalk"
    CONVERTER_NOISE = "ConverterNoise"


class ConverterKind(str, Enum):
    CHI2_DFG = "Chi2_DFG"
    CHI3_FWM_BG = "Chi3_FWM_BG"
    CHI3_TDFG = "Chi3_TDFG"
    NONE = "None"


def infidelity_from_crosstalk(crosstalk_db: float) -> float:
    """串扰(dB) -> 单次经过的不保真度 10^(−dB/10)"""
    if not crosstalk_db > 0:
        raise DomainError(f"串扰必须为正 dB: {crosstalk_db}")
    if math.isinf(crosstalk_db):
        return 0.0
    return 10.0 ** (-crosstalk_db / 10.0)


def snr_to_infidelity(signal_rate: float, noise_rate: float) -> float:
    """噪声计数占总计数的比例"""
    if signal_rate < 0 or noise_rate < 0:
        raise DomainError("计数率不能为负")
    total = signal_rate + noise_rate
    if total == 0:
        raise DomainError("信号与噪声计数率不能同时为零")
    return noise_rate / total


@dataclass(frozen=True)
class NoiseContribution:
    source: NoiseSource
    infidelity: float

    def __post_init__(self):
        if not 0 <= self.infidelity <= 1:
            raise DomainError(f"不保真度必须在 [0, 1] 内: {self.infidelity}")

    @classmethod
    def crosstalk(cls, source: NoiseSource, crosstalk_db: float) -> "NoiseContribution":
        return cls(source, infidelity_from_crosstalk(crosstalk_db))


@dataclass(frozen=True)
class ConverterProfile:
    kind: ConverterKind
    infidelity: float = 0.0
    noise_counts: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.infidelity <= 1:
            raise DomainError(f"转换器不保真度必须在 [0, 1] 内: {self.infidelity}")
        if self.kind is ConverterKind.CHI3_TDFG and self.infidelity != 0:
            raise DomainError("TDFG 转换器本征噪声为零")

    @classmethod
    def from_counts(cls, kind: ConverterKind, signal_rate: float,
                    noise_rate: float) -> "ConverterProfile":
        """由滤波后的信号/噪声计数率构造"""
        return cls(kind, snr_to_infidelity(signal_rate, noise_rate), noise_rate)

    @classmethod
    def from_noise_density(cls, kind: ConverterKind, nsd: float, bandwidth_nm: float,
                           efficiency: float, signal_rate: float) -> "ConverterProfile":
        """
        由拉曼噪声谱密度构造：噪声计数 = NSD × 滤波带宽 × 滤波效率

        Args:
            nsd: 信号波长处的噪声谱密度 photons·s^-1·nm^-1
            bandwidth_nm: 滤波器带宽
            efficiency: 滤波器透过率
            signal_rate: 同一滤波器后的信号光子计数率
        """
        noise = noise_counts_in_filter(nsd, bandwidth_nm, efficiency)
        profile = cls.from_counts(kind, signal_rate, noise)
        logger.debug("%s 噪声计数 %.6g /s, 信号 %.6g /s -> 不保真度 %.6g",
                     kind.value, noise, signal_rate, profile.infidelity)
        return profile

    def contribution(self) -> NoiseContribution:
        return NoiseContribution(NoiseSource.CONVERTER_NOISE, self.infidelity)


@dataclass(frozen=True)
class PairFidelityModel:
    """两个光子各自经历的噪声贡献（有序）"""
    photon_a: Tuple[NoiseContribution, ...] = ()
    photon_b: Tuple[NoiseContribution, ...] = ()
    source_fidelity: float = 1.0

    def __post_init__(self):
        if not 0 <= self.source_fidelity <= 1:
            raise DomainError(f"源保真度必须在 [0, 1] 内: {self.source_fidelity}")

    def append(self, contribution: NoiseContribution, photon: str = "a") -> "PairFidelityModel":
        if photon == "a":
            return PairFidelityModel(self.photon_a + (contribution,), self.photon_b,
                                     self.source_fidelity)
        return PairFidelityModel(self.photon_a, self.photon_b + (contribution,),
                                 self.source_fidelity)


def pair_fidelity(model: PairFidelityModel) -> float:
    """F = F_src · Π(1 − ε)"""
    fidelity = model.source_fidelity
    for contribution in model.photon_a + model.photon_b:
        fidelity *= 1.0 - contribution.infidelity
    return fidelity


@dataclass(frozen=True)
class FidelityParams:
    """各架构使用的串扰与转换器参数"""
    photonic_crosstalk_db: float = 25.0
    mechanical_crosstalk_db: float = 60.0
    mux_crosstalk_db: float = 60.0
    qfc_converter: ConverterProfile = ConverterProfile(ConverterKind.CHI2_DFG, 0.0275)
    rqi_converter: ConverterProfile = ConverterProfile(ConverterKind.CHI2_DFG, 0.0275)
    source_fidelity: float = 1.0

    @classmethod
    def from_config(cls, section: dict, catalog=None, rqi_kind: Optional[str] = None,
                    chi2_profile: Optional[ConverterProfile] = None) -> "FidelityParams":
        """
        由 simulation.yaml 的 fidelity 段与元件参数库构造

        Args:
            section: fidelity 配置段
            catalog: 元件参数库，提供开关串扰
            rqi_kind: 覆盖 RQI 使用的转换器类型
            chi2_profile: 覆盖配置中的 χ² DFG 噪声（例如由拉曼谱密度换算）
        """
        profiles = converter_profiles(section.get("converters", {}))
        if chi2_profile is not None:
            profiles[ConverterKind.CHI2_DFG] = chi2_profile
        kind = ConverterKind(rqi_kind or section.get("rqi_converter", ConverterKind.CHI2_DFG.value))
        photonic, mechanical = 25.0, 60.0
        if catalog is not None:
            photonic = catalog.get("photonic_switch").crosstalk_db
            mechanical = catalog.get("mechanical_switch").crosstalk_db
        return cls(
            photonic_crosstalk_db=photonic,
            mechanical_crosstalk_db=mechanical,
            mux_crosstalk_db=float(section.get("mux_crosstalk_db", 60.0)),
            qfc_converter=profiles[ConverterKind.CHI2_DFG],
            rqi_converter=profiles[kind],
            source_fidelity=float(section.get("source_fidelity", 1.0)),
        )


def converter_profiles(section: Dict[str, dict]) -> Dict[ConverterKind, ConverterProfile]:
    """
    解析配置中的转换器噪声参数，未给出的类型取零噪声

    每个条目给出 infidelity，或同时给出 noise_counts 与 signal_counts（由计数比换算）。
    """
    profiles = {kind: ConverterProfile(kind) for kind in ConverterKind}
    for name, entry in section.items():
        try:
            kind = ConverterKind(str(name))
        except ValueError as e:
            raise ConfigError(f"未知的转换器类型: {name}") from e
        entry = entry or {}
        counts = "noise_counts" in entry or "signal_counts" in entry
        if counts and "infidelity" in entry:
            raise ConfigError(f"转换器 {name} 不能同时给出 infidelity 与计数率")
        if counts and not ("noise_counts" in entry and "signal_counts" in entry):
            raise ConfigError(f"转换器 {name} 需要同时给出 noise_counts 与 signal_counts")
        try:
            if counts:
                profiles[kind] = ConverterProfile.from_counts(
                    kind, float(entry["signal_counts"]), float(entry["noise_counts"]))
            else:
                profiles[kind] = ConverterProfile(kind, float(entry.get("infidelity", 0.0)))
        except DomainError as e:
            raise ConfigError(f"转换器 {name} 参数非法: {e}") from e
    return profiles


def architecture_model(architecture: str, nodes: int, params: FidelityParams) -> PairFidelityModel:
    """
    各架构每个光子的噪声贡献：
    NoQfcSingle 每节点一个光子开关；QfcSingle 另加一次 χ² 转换；
    RqiDwdm 每节点一个机械开关加两次复用器，另加一次 RQI 转换
    """
    if nodes < 1:
        raise DomainError(f"节点数必须 >= 1: {nodes}")
    photon: List[NoiseContribution] = []
    if architecture == "NoQfcSingle":
        photon += [NoiseContribution.crosstalk(NoiseSource.SWITCH_CROSSTALK,
                                               params.photonic_crosstalk_db)] * nodes
    elif architecture == "QfcSingle":
        photon.append(params.qfc_converter.contribution())
        photon += [NoiseContribution.crosstalk(NoiseSource.SWITCH_CROSSTALK,
                                               params.photonic_crosstalk_db)] * nodes
    elif architecture == "RqiDwdm":
        photon.append(params.rqi_converter.contribution())
        switch = NoiseContribution.crosstalk(NoiseSource.SWITCH_CROSSTALK,
                                             params.mechanical_crosstalk_db)
        mux = NoiseContribution.crosstalk(NoiseSource.MUX_CROSSTALK, params.mux_crosstalk_db)
        photon += [switch, mux, mux] * nodes
    else:
        raise DomainError(f"未知架构: {architecture}")
    return PairFidelityModel(tuple(photon), tuple(photon), params.source_fidelity)


def converter_kind_of(architecture: str, params: FidelityParams) -> str:
    if architecture == "NoQfcSingle":
        return ConverterKind.NONE.value
    if architecture == "QfcSingle":
        return params.qfc_converter.kind.value
    return params.rqi_converter.kind.value


def fidelity_vs_nodes(architecture: str, node_counts: Iterable[int],
                      params: Optional[FidelityParams] = None) -> pd.DataFrame:
    """给定架构在各节点数下的保真度曲线"""
    params = params or FidelityParams()
    rows = [{
        "architecture": architecture,
        "nodes": int(n),
        "fidelity": pair_fidelity(architecture_model(architecture, int(n), params)),
        "converter_kind": converter_kind_of(architecture, params),
    } for n in node_counts]
    return pd.DataFrame(rows, columns=FIDELITY_COLUMNS)


def crossover_nodes(params: Optional[FidelityParams] = None, baseline: str = "NoQfcSingle",
                    max_nodes: int = 1000) -> Optional[int]:
    """最小的 n*，使得对所有 n >= n*（直到 max_nodes）RQI 保真度不低于基线架构"""
    params = params or FidelityParams()
    nodes = range(1, max_nodes + 1)
    rqi = fidelity_vs_nodes("RqiDwdm", nodes, params)["fidelity"].to_numpy()
    base = fidelity_vs_nodes(baseline, nodes, params)["fidelity"].to_numpy()
    ahead = rqi >= base
    if not ahead[-1]:
        return None
    behind = [i for i, ok in enumerate(ahead) if not ok]
    n_star = behind[-1] + 2 if behind else 1
    logger.debug("保真度交叉点 n* = %d（相对 %s）", n_star, baseline)
    return n_star

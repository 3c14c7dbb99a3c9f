"""
光学元件模块

元件参数库（插入损耗、串扰、重构延迟）以及单光子路径链的透过率计算。
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

from core.exceptions import ConfigError, DomainError

logger = logging.getLogger(__name__)


class ComponentKind(str, Enum):
    FIBER = "Fiber"
    PHOTONIC_SWITCH = "PhotonicSwitch"
    MECHANICAL_SWITCH = "MechanicalSwitch"
    DWDM_MUX = "DwdmMux"
    DWDM_DEMUX = "DwdmDemux"
    RQI_CONVERTER = "RqiConverter"
    DETECTOR = "Detector"
    FP_FILTER = "FpFilter"
    CHIP_COUPLING = "ChipCoupling"
    COLLECTION_OPTICS = "CollectionOptics"
    SMF_COUPLING = "SmfCoupling"
    WSS = "Wss"


class FiberBand(str, Enum):
    NIR = "NIR"
    TELECOM = "Telecom"


SWITCH_KINDS = (ComponentKind.PHOTONIC_SWITCH, ComponentKind.MECHANICAL_SWITCH)


def db_to_transmittance(loss_db: float) -> float:
    """插入损耗(dB) -> 透过率"""
    if loss_db < 0:
        raise DomainError(f"插入损耗不能为负（不建模增益）: {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def transmittance_to_db(efficiency: float) -> float:
    """透过率 -> 插入损耗(dB)"""
    if not 0 < efficiency <= 1:
        raise DomainError(f"透过率必须在 (0, 1] 内: {efficiency}")
    return -10.0 * math.log10(efficiency)


@dataclass(frozen=True)
class ComponentSpec:
    """
    单个光学元件

    光纤的 insertion_loss_db 为每公里损耗，实际损耗为 insertion_loss_db * length_km。
    crosstalk_db 为 inf 表示无串扰。
    """
    name: str
    kind: ComponentKind
    insertion_loss_db: float = 0.0
    crosstalk_db: float = math.inf
    reconfig_latency_s: float = 0.0
    length_km: float = 0.0
    band: Optional[FiberBand] = None
    provenance: str = ""

    def __post_init__(self):
        if self.insertion_loss_db < 0:
            raise DomainError(f"{self.name}: 插入损耗不能为负")
        if not self.crosstalk_db > 0:
            raise DomainError(f"{self.name}: 串扰必须为正 dB")
        if self.reconfig_latency_s < 0:
            raise DomainError(f"{self.name}: 重构延迟不能为负")
        if self.length_km < 0:
            raise DomainError(f"{self.name}: 光纤长度不能为负")

    @property
    def total_loss_db(self) -> float:
        if self.kind is ComponentKind.FIBER:
            return self.insertion_loss_db * self.length_km
        return self.insertion_loss_db

    @property
    def transmittance(self) -> float:
        return db_to_transmittance(self.total_loss_db)

    @property
    def is_switch(self) -> bool:
        return self.kind in SWITCH_KINDS


@dataclass(frozen=True)
class PathChain:
    """单个光子从发射到探测经过的有序元件序列"""
    components: Tuple[ComponentSpec, ...] = ()

    def __add__(self, other: "PathChain") -> "PathChain":
        return PathChain(self.components + other.components)

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def append(self, *specs: ComponentSpec) -> "PathChain":
        return PathChain(self.components + tuple(specs))

    def names(self) -> Tuple[str, ...]:
        return tuple(spec.name for spec in self.components)

    def of_kind(self, kind: ComponentKind) -> Tuple[ComponentSpec, ...]:
        return tuple(spec for spec in self.components if spec.kind is kind)


def chain_transmittance(chain: Iterable[ComponentSpec]) -> float:
    """路径链总透过率（各元件透过率之积）"""
    total_db = sum(spec.total_loss_db for spec in chain)
    return db_to_transmittance(total_db)


def nir_vs_telecom_excess_loss(length_km: float, catalog: Optional["Catalog"] = None) -> float:
    """同样长度下 780 nm 光纤相对通信波段多出的损耗(dB)"""
    if length_km < 0:
        raise DomainError(f"光纤长度不能为负: {length_km}")
    catalog = catalog or Catalog.defaults()
    nir = catalog.get("fiber_nir").insertion_loss_db
    tele = catalog.get("fiber_telecom").insertion_loss_db
    return (nir - tele) * length_km


def wss_loss(demux: ComponentSpec, switch: ComponentSpec, mux: ComponentSpec) -> float:
    """波长选择开关（解复用 + N×M 开关 + 复用）的插入损耗(dB)"""
    return demux.insertion_loss_db + switch.insertion_loss_db + mux.insertion_loss_db


def make_wss(demux: ComponentSpec, switch: ComponentSpec, mux: ComponentSpec) -> ComponentSpec:
    """把 WSS 折合成单个元件，串扰取内部最差值"""
    return ComponentSpec(
        name=f"wss[{demux.name}|{switch.name}|{mux.name}]",
        kind=ComponentKind.WSS,
        insertion_loss_db=wss_loss(demux, switch, mux),
        crosstalk_db=min(demux.crosstalk_db, switch.crosstalk_db, mux.crosstalk_db),
        reconfig_latency_s=switch.reconfig_latency_s,
    )


@dataclass(frozen=True)
class RqiProfile:
    """
    RQI 转换器的器件参数

    temporal_mode 为 True 时 RQI 同时整形光子时间模式，额外乘以 temporal_mode_efficiency；
    为 False 时两端光子时间模式不匹配，Bell 交换干涉按 mode_overlap 折算进透过率。
    """
    kind: str
    conversion_efficiency: float = 1.0
    temporal_mode: bool = True
    temporal_mode_efficiency: float = 1.0
    mode_overlap: float = 1.0
    pump_nm: Optional[float] = None
    pump_power_w: Optional[float] = None
    overcoupling: Optional[float] = None
    provenance: str = ""

    def __post_init__(self):
        for name in ("conversion_efficiency", "temporal_mode_efficiency", "mode_overlap"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise DomainError(f"{self.kind}: {name} 必须在 (0, 1] 内: {value}")
        if self.pump_power_w is not None and self.pump_power_w < 0:
            raise DomainError(f"{self.kind}: 泵浦功率不能为负")

    @property
    def efficiency(self) -> float:
        """光子数转换效率（含时间模式整形或失配）"""
        if self.temporal_mode:
            return self.conversion_efficiency * self.temporal_mode_efficiency
        return self.conversion_efficiency * self.mode_overlap

    @classmethod
    def from_entry(cls, kind: str, entry: dict) -> "RqiProfile":
        known = {f for f in cls.__dataclass_fields__ if f != "kind"}
        unknown = set(entry) - known
        if unknown:
            raise ConfigError(f"转换器 {kind} 含未知字段: {sorted(unknown)}")
        try:
            return cls(kind=kind, **entry)
        except (TypeError, DomainError) as e:
            raise ConfigError(f"转换器 {kind} 参数非法: {e}") from e


def _spec_from_entry(name: str, entry: dict) -> ComponentSpec:
    """把参数库中的一条记录转换为 ComponentSpec"""
    try:
        kind = ComponentKind(entry["kind"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"元件 {name} 类型无效: {entry.get('kind')}") from e

    if kind is ComponentKind.FIBER:
        if "loss_db_per_km" not in entry or "band" not in entry:
            raise ConfigError(f"光纤 {name} 缺少 loss_db_per_km 或 band")
        loss = float(entry["loss_db_per_km"])
        band = FiberBand(entry["band"])
    elif "efficiency" in entry:
        loss = transmittance_to_db(float(entry["efficiency"]))
        band = None
    else:
        loss = float(entry.get("insertion_loss_db", 0.0))
        band = None

    crosstalk = entry.get("crosstalk_db")
    try:
        return ComponentSpec(
            name=name,
            kind=kind,
            insertion_loss_db=loss,
            crosstalk_db=math.inf if crosstalk is None else float(crosstalk),
            reconfig_latency_s=float(entry.get("reconfig_latency_s", 0.0)),
            band=band,
            provenance=entry.get("provenance", ""),
        )
    except DomainError as e:
        raise ConfigError(f"元件 {name} 参数非法: {e}") from e


@dataclass(frozen=True)
class Catalog:
    """只读的元件参数库"""
    entries: Dict[str, ComponentSpec] = field(default_factory=dict)
    p_emit: float = 0.5
    version: str = ""
    converters: Dict[str, RqiProfile] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "Catalog":
        if "components" not in data:
            raise ConfigError("参数库缺少 components 字段")
        entries = {name: _spec_from_entry(name, entry)
                   for name, entry in data["components"].items()}
        converters = {kind: RqiProfile.from_entry(kind, entry)
                      for kind, entry in (data.get("converters") or {}).items()}
        p_emit = data.get("p_emit", {}).get("value", 0.5)
        if not 0 <= p_emit <= 1:
            raise ConfigError(f"p_emit 必须在 [0, 1] 内: {p_emit}")
        logger.debug("加载元件参数库 v%s: %d 个元件, %d 种转换器", data.get("version", "?"),
                     len(entries), len(converters))
        return cls(entries=entries, p_emit=float(p_emit), version=str(data.get("version", "")),
                   converters=converters)

    @classmethod
    def defaults(cls) -> "Catalog":
        from core.config_manager import ConfigManager
        return ConfigManager().load_catalog()

    def get(self, name: str) -> ComponentSpec:
        try:
            return self.entries[name]
        except KeyError as e:
            raise ConfigError(f"参数库中找不到元件: {name}") from e

    def fiber(self, band: FiberBand, length_km: float) -> ComponentSpec:
        """取对应波段的光纤并设置长度"""
        name = "fiber_nir" if band is FiberBand.NIR else "fiber_telecom"
        return replace(self.get(name), length_km=length_km)

    def with_overrides(self, **aliases: str) -> "Catalog":
        """
        用别的条目替换某个条目，例如 mechanical_switch="mechanical_switch_worst"

        Returns:
            Catalog: 新的参数库
        """
        entries = dict(self.entries)
        for target, source in aliases.items():
            entries[target] = replace(self.get(source), name=target)
        return replace(self, entries=entries)

    def converter(self, kind: str) -> RqiProfile:
        try:
            return self.converters[kind]
        except KeyError as e:
            raise ConfigError(f"参数库中找不到转换器: {kind}") from e

    def with_converter(self, kind: str) -> "Catalog":
        """按转换器效率重设 rqi_converter 条目的插入损耗"""
        profile = self.converter(kind)
        spec = replace(self.get("rqi_converter"),
                       insertion_loss_db=transmittance_to_db(profile.efficiency))
        logger.debug("RQI 转换器 %s: 效率 %.4g, 时间模式整形 %s", kind, profile.efficiency,
                     profile.temporal_mode)
        return replace(self, entries={**self.entries, "rqi_converter": spec})

    def lossless(self) -> "Catalog":
        """全部元件零损耗、零串扰的参数库，发射概率保持不变"""
        entries = {name: replace(spec, insertion_loss_db=0.0, crosstalk_db=math.inf)
                   for name, spec in self.entries.items()}
        return replace(self, entries=entries)

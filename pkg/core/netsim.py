"""
网络仿真模块

场景（机架内、相邻机架、跨数据中心）、三种架构的单光子路径组装、
DWDM 聚合速率，以及主/次重构的事件驱动调度。
"""
import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.components import Catalog, FiberBand, PathChain, make_wss
from core.exceptions import ConfigError, DomainError
from core.fidelity import FidelityParams, pair_fidelity, architecture_model
from core.tdm import (EmissionConvention, SuccessModel, TdmParams, bell_pair_rate, optimal_M,
                      p_success)

logger = logging.getLogger(__name__)

RATE_COLUMNS = ["scenario", "architecture", "n_tot", "n_channels",
                "per_channel_hz", "aggregate_hz", "effective_hz"]
EVENT_COLUMNS = ["time_s", "event_kind", "qpu_pair", "channel"]


class ScenarioName(str, Enum):
    INTRA_RACK = "IntraRack"
    INTER_RACK = "InterRack"
    CROSS_DC = "CrossDC"


class Architecture(str, Enum):
    NO_QFC_SINGLE = "NoQfcSingle"
    QFC_SINGLE = "QfcSingle"
    RQI_DWDM = "RqiDwdm"

    @property
    def single_channel(self) -> bool:
        return self is not Architecture.RQI_DWDM


@dataclass(frozen=True)
class Topology:
    """Clos 拓扑描述"""
    qpus_per_rack: int = 16
    racks: int = 1
    spines: int = 0
    data_centers: int = 1

    @property
    def n_qpus(self) -> int:
        return self.qpus_per_rack * self.racks * self.data_centers


@dataclass(frozen=True)
class Scenario:
    """hops 为两台 QPU 之间路径经过的开关总数，BSM 位于中点"""
    name: ScenarioName
    fiber_km: float
    hops: int
    topology: Topology = Topology()

    def __post_init__(self):
        if self.fiber_km < 0:
            raise DomainError(f"光纤长度不能为负: {self.fiber_km}")
        if self.hops < 0:
            raise DomainError(f"开关跳数不能为负: {self.hops}")

    @property
    def arm_fiber_km(self) -> float:
        return self.fiber_km / 2.0

    @property
    def arm_hops(self) -> Tuple[int, int]:
        """两臂各自经过的开关数；奇数跳时多出的一跳记在 A 臂，两臂之和等于 hops"""
        return (self.hops + 1) // 2, self.hops // 2


def scenarios_from_config(section: Dict[str, dict]) -> Dict[ScenarioName, Scenario]:
    """解析 network.scenarios 配置段"""
    scenarios = {}
    for name, entry in section.items():
        try:
            key = ScenarioName(name)
            scenario = Scenario(key, float(entry["fiber_km"]), int(entry["hops"]),
                                Topology(**(entry.get("topology") or {})))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"场景 {name} 配置非法: {e}") from e
        if scenario.hops < 1:
            raise ConfigError(f"场景 {name} 的 hops 必须 >= 1")
        scenarios[key] = scenario
    return scenarios


def configure_catalog(catalog: Catalog, worst_case: bool = False,
                      mux_variant: str = "standard", rqi_converter: Optional[str] = None) -> Catalog:
    """按运行选项替换机械开关、复用器和 RQI 转换器条目"""
    if worst_case:
        catalog = catalog.with_overrides(mechanical_switch="mechanical_switch_worst")
    if mux_variant == "grating":
        catalog = catalog.with_overrides(dwdm_mux="dwdm_mux_grating",
                                         dwdm_demux="dwdm_demux_grating")
    elif mux_variant != "standard":
        raise ConfigError(f"未知的复用器类型: {mux_variant}")
    if rqi_converter is not None:
        catalog = catalog.with_converter(rqi_converter)
    return catalog


def _arm_chain(scenario: Scenario, architecture: Architecture, catalog: Catalog,
               switches: int) -> PathChain:
    get = catalog.get
    chain = PathChain((get("collection_optics"), get("smf_coupling")))

    if architecture is Architecture.RQI_DWDM:
        chain = chain.append(get("chip_coupling"), get("rqi_converter"), get("chip_coupling"),
                             get("fp_filter"),
                             catalog.fiber(FiberBand.TELECOM, scenario.arm_fiber_km))
        # 每跳一个 WSS：解复用 + 机械开关 + 复用
        wss = make_wss(get("dwdm_demux"), get("mechanical_switch"), get("dwdm_mux"))
        return chain.append(*[wss] * switches, get("detector"))

    if architecture is Architecture.QFC_SINGLE:
        chain = chain.append(get("qfc_converter"), get("fp_filter"),
                             catalog.fiber(FiberBand.TELECOM, scenario.arm_fiber_km))
    elif architecture is Architecture.NO_QFC_SINGLE:
        chain = chain.append(catalog.fiber(FiberBand.NIR, scenario.arm_fiber_km))
    else:
        raise DomainError(f"未知架构: {architecture}")

    # 每跳为带两个芯片端面的集成光子开关
    hop = (get("chip_coupling"), get("photonic_switch"), get("chip_coupling"))
    return chain.append(*(hop * switches), get("detector"))


def build_paths(scenario: Scenario, architecture, catalog: Catalog) -> Tuple[PathChain, PathChain]:
    """返回两个光子各自的路径链，开关跳数按 Scenario.arm_hops 分到两臂"""
    try:
        architecture = Architecture(architecture)
    except ValueError as e:
        raise DomainError(f"未知架构: {architecture}") from e
    hops_a, hops_b = scenario.arm_hops
    return (_arm_chain(scenario, architecture, catalog, hops_a),
            _arm_chain(scenario, architecture, catalog, hops_b))


def success_probability(scenario: Scenario, architecture, catalog: Catalog, p_bsm: float = 0.5,
                        convention: EmissionConvention = EmissionConvention.JOINT) -> float:
    arm_a, arm_b = build_paths(scenario, architecture, catalog)
    return p_success(SuccessModel(arm_a, arm_b, p_bsm, catalog.p_emit, EmissionConvention(convention)))


def per_channel_rate(scenario: Scenario, architecture, tdm: TdmParams, catalog: Catalog,
                     p_bsm: float = 0.5,
                     convention: EmissionConvention = EmissionConvention.JOINT) -> float:
    """单个信道（单个腔，k = tdm.k）的 Bell 对速率"""
    p = success_probability(scenario, architecture, catalog, p_bsm, convention)
    return bell_pair_rate(tdm.with_(p_suc=p)).rate


def channels_for(architecture, n_channels: int) -> int:
    return 1 if Architecture(architecture).single_channel else n_channels


def aggregate_dwdm_rate(n_tot: int, n_channels: int, scenario: Scenario, architecture,
                        tdm: TdmParams, catalog: Catalog, p_bsm: float = 0.5,
                        convention: EmissionConvention = EmissionConvention.JOINT) -> float:
    """N 个信道的聚合速率，每腔 k = ceil(N_tot/N)；单信道架构 N 固定为 1"""
    if n_channels < 1:
        raise DomainError(f"信道数必须 >= 1: {n_channels}")
    n = channels_for(architecture, n_channels)
    if n_tot < n:
        raise DomainError(f"通信量子比特数 {n_tot} 少于信道数 {n}")
    k = math.ceil(n_tot / n)
    return n * per_channel_rate(scenario, architecture, tdm.with_(k=k), catalog, p_bsm, convention)


def effective_rate_with_reconfig(rate: float, epoch_pairs: int, reconfig_s: float) -> float:
    """每 epoch_pairs 个 Bell 对后重构一次的有效速率"""
    if not rate > 0:
        raise DomainError(f"速率必须为正: {rate}")
    if reconfig_s < 0:
        raise DomainError(f"重构时间不能为负: {reconfig_s}")
    t_gen = epoch_pairs / rate
    return rate * t_gen / (t_gen + reconfig_s)


@dataclass(frozen=True)
class NetworkModel:
    """速率计算所需的公共参数"""
    catalog: Catalog
    tdm: TdmParams = TdmParams()
    p_bsm: float = 0.5
    convention: EmissionConvention = EmissionConvention.JOINT
    n_tot: int = 144000
    n_channels: int = 144

    @classmethod
    def from_run_config(cls, config, catalog: Catalog, tdm: Optional[TdmParams] = None) -> "NetworkModel":
        network = config.section("network")
        success = config.section("success")
        catalog = configure_catalog(catalog, config.worst_case,
                                    network.get("mux_variant", "standard"),
                                    config.section("fidelity").get("rqi_converter"))
        if tdm is None:
            tdm_section = config.section("tdm")
            presets = tdm_section.get("presets", {})
            name = tdm_section.get("preset", "default")
            if name not in presets:
                raise ConfigError(f"找不到 TDM 预设: {name}")
            tdm = TdmParams.from_preset(presets[name])
        try:
            convention = EmissionConvention(success.get("emission_convention", "joint"))
        except ValueError as e:
            raise ConfigError(f"emission_convention 非法: {e}") from e
        return cls(catalog=catalog, tdm=tdm, p_bsm=float(success.get("p_bsm", 0.5)),
                   convention=convention, n_tot=int(network.get("n_tot", 144000)),
                   n_channels=int(network.get("n_channels", 144)))

    def per_channel(self, scenario: Scenario, architecture, n_tot: Optional[int] = None) -> float:
        n_tot = self.n_tot if n_tot is None else n_tot
        k = math.ceil(n_tot / channels_for(architecture, self.n_channels))
        return per_channel_rate(scenario, architecture, self.tdm.with_(k=k), self.catalog,
                                self.p_bsm, self.convention)

    def aggregate(self, scenario: Scenario, architecture, n_tot: Optional[int] = None) -> float:
        n_tot = self.n_tot if n_tot is None else n_tot
        return aggregate_dwdm_rate(n_tot, self.n_channels, scenario, architecture, self.tdm,
                                   self.catalog, self.p_bsm, self.convention)

    def optimized_aggregate(self, scenario: Scenario, architecture, M_max: int) -> Tuple[int, float]:
        """每腔轮数 M 取 [1, M_max] 内最优值时的 (M, 聚合速率)"""
        n = channels_for(architecture, self.n_channels)
        p = success_probability(scenario, architecture, self.catalog, self.p_bsm, self.convention)
        M, rate = optimal_M(self.tdm.with_(k=math.ceil(self.n_tot / n), p_suc=p), M_max)
        return M, n * rate

    def rate_row(self, scenario: Scenario, architecture, n_tot: int, epoch_pairs: int,
                 reconfig_s: float) -> dict:
        per_channel = self.per_channel(scenario, architecture, n_tot)
        aggregate = self.aggregate(scenario, architecture, n_tot)
        effective = (effective_rate_with_reconfig(aggregate, epoch_pairs, reconfig_s)
                     if aggregate > 0 else 0.0)
        return {
            "scenario": scenario.name.value,
            "architecture": Architecture(architecture).value,
            "n_tot": n_tot,
            "n_channels": channels_for(architecture, self.n_channels),
            "per_channel_hz": per_channel,
            "aggregate_hz": aggregate,
            "effective_hz": effective,
        }


# ---- 任务调度 ----

@dataclass(frozen=True)
class Demand:
    qpu_a: int
    qpu_b: int
    pairs: int

    @property
    def label(self) -> str:
        return f"{self.qpu_a}-{self.qpu_b}"


@dataclass(frozen=True)
class ReconfigPolicy:
    minor_s: float = 1e-9
    major_s: float = 1e-3


@dataclass(frozen=True)
class JobSpec:
    demands: Tuple[Demand, ...]
    epoch_pairs: int = 100
    policy: ReconfigPolicy = ReconfigPolicy()

    def __post_init__(self):
        if not self.demands:
            raise DomainError("任务至少需要一个需求")
        if any(d.pairs <= 0 for d in self.demands):
            raise DomainError("每个需求的 Bell 对数必须 > 0")
        if self.epoch_pairs < 1:
            raise DomainError("epoch_pairs 必须 >= 1")
        if self.policy.minor_s < 0 or self.policy.major_s < 0:
            raise DomainError("重构时间不能为负")

    @classmethod
    def from_dict(cls, data: dict, defaults: Optional[dict] = None) -> "JobSpec":
        """由任务文件构造，缺省值取 simulation.yaml 的 simulate 段"""
        defaults = defaults or {}
        policy = {**{k: defaults[k] for k in ("minor_reconfig_s", "major_reconfig_s") if k in defaults},
                  **(data.get("policy") or {})}
        try:
            demands = tuple(Demand(int(d["qpus"][0]), int(d["qpus"][1]), int(d["pairs"]))
                            for d in data["demands"])
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ConfigError(f"任务需求格式错误: {e}") from e
        return cls(
            demands=demands,
            epoch_pairs=int(data.get("epoch_pairs", defaults.get("epoch_pairs", 100))),
            policy=ReconfigPolicy(float(policy.get("minor_reconfig_s", 1e-9)),
                                  float(policy.get("major_reconfig_s", 1e-3))),
        )

    @property
    def pairs_demanded(self) -> int:
        return sum(d.pairs for d in self.demands)

    def epochs(self) -> List[Tuple[Demand, int]]:
        """按 epoch 切分的 (需求, 本 epoch 对数) 序列"""
        out = []
        for demand in self.demands:
            left = demand.pairs
            while left > 0:
                size = min(self.epoch_pairs, left)
                out.append((demand, size))
                left -= size
        return out


@dataclass(frozen=True)
class SimReport:
    per_channel_rate: float
    aggregate_rate: float
    effective_rate: float
    makespan: float
    expected_makespan: float
    pairs_demanded: int
    pairs_delivered: int
    events: pd.DataFrame = field(repr=False, compare=False, default=None)

    def summary(self) -> dict:
        return {
            "per_channel_hz": self.per_channel_rate,
            "aggregate_hz": self.aggregate_rate,
            "effective_hz": self.effective_rate,
            "makespan_s": self.makespan,
            "expected_makespan_s": self.expected_makespan,
            "pairs_demanded": self.pairs_demanded,
            "pairs_delivered": self.pairs_delivered,
            "events": len(self.events),
        }


def _check_demands(job: JobSpec, scenario: Scenario):
    n_qpus = scenario.topology.n_qpus
    for d in job.demands:
        if d.qpu_a == d.qpu_b or not (0 <= d.qpu_a < n_qpus and 0 <= d.qpu_b < n_qpus):
            raise DomainError(f"QPU 对 {d.label} 在场景 {scenario.name.value} 中不存在"
                              f"（QPU 编号范围 0..{n_qpus - 1}）")


class JobScheduler:
    """
    事件驱动执行：载入任务时一次主重构，之后每个 epoch 结束进行一次
    次重构（RQI 重新调谐）或开关重构（单信道架构，光子开关延迟）
    """

    def __init__(self, job: JobSpec, rate: float, between_epochs_s: float, n_channels: int,
                 between_kind: str, stochastic: bool = False, seed: Optional[int] = None):
        if not rate > 0:
            raise DomainError("信道速率为零，任务无法完成")
        self.job = job
        self.rate = rate
        self.between_epochs_s = between_epochs_s
        self.n_channels = n_channels
        self.between_kind = between_kind
        self.stochastic = stochastic
        self.rng = np.random.default_rng(seed)
        self._queue: List[tuple] = []
        self._seq = itertools.count()
        self.events: List[tuple] = []

    def _push(self, time: float, kind: str, payload):
        heapq.heappush(self._queue, (time, next(self._seq), kind, payload))

    def _intervals(self, size: int) -> np.ndarray:
        if self.stochastic:
            return self.rng.exponential(1.0 / self.rate, size=size)
        return np.full(size, 1.0 / self.rate)

    def _record(self, time: float, kind: str, demand: Demand, channel: int) -> float:
        # 时间戳严格递增
        if self.events and time <= self.events[-1][0]:
            time = float(np.nextafter(self.events[-1][0], np.inf))
        self.events.append((time, kind, demand.label, channel))
        return time

    def _start_epoch(self, time: float, index: int, epochs):
        demand, size = epochs[index]
        intervals = self._intervals(size)
        self._push(time + float(intervals[0]), "pair_generated", (index, 0, intervals))

    def run(self) -> float:
        epochs = self.job.epochs()
        first = epochs[0][0]
        self._push(self.job.policy.major_s, "major_reconfig", (0, first))
        makespan = 0.0
        while self._queue:
            time, _, kind, payload = heapq.heappop(self._queue)
            if kind == "pair_generated":
                index, j, intervals = payload
                demand = epochs[index][0]
                time = self._record(time, kind, demand, j % self.n_channels)
                if j + 1 < len(intervals):
                    self._push(time + float(intervals[j + 1]), kind, (index, j + 1, intervals))
                elif index + 1 < len(epochs):
                    self._push(time + self.between_epochs_s, self.between_kind,
                               (index + 1, epochs[index + 1][0]))
            else:
                index, demand = payload
                time = self._record(time, kind, demand, -1)
                self._start_epoch(time, index, epochs)
            makespan = time
        return makespan


def simulate_job(job: JobSpec, scenario: Scenario, architecture, model: NetworkModel,
                 seed: Optional[int] = None, stochastic: bool = False) -> SimReport:
    """
    执行一个纠缠需求任务

    Args:
        job: 任务描述
        scenario: 网络场景
        architecture: 架构
        model: 速率参数
        seed: 随机种子（仅随机模式使用）
        stochastic: True 时生成间隔服从指数分布，否则取平均间隔
    """
    architecture = Architecture(architecture)
    _check_demands(job, scenario)

    per_channel = model.per_channel(scenario, architecture)
    aggregate = model.aggregate(scenario, architecture)
    if architecture.single_channel:
        between = model.catalog.get("photonic_switch").reconfig_latency_s
        kind = "switch_reconfig"
    else:
        between = job.policy.minor_s
        kind = "minor_reconfig"

    scheduler = JobScheduler(job, aggregate, between, channels_for(architecture, model.n_channels),
                             kind, stochastic, seed)
    makespan = scheduler.run()
    events = pd.DataFrame(scheduler.events, columns=EVENT_COLUMNS)
    delivered = int((events["event_kind"] == "pair_generated").sum())

    n_epochs = len(job.epochs())
    expected = job.policy.major_s + (n_epochs - 1) * between + job.pairs_demanded / aggregate
    report = SimReport(
        per_channel_rate=per_channel,
        aggregate_rate=aggregate,
        effective_rate=delivered / makespan,
        makespan=makespan,
        expected_makespan=expected,
        pairs_demanded=job.pairs_demanded,
        pairs_delivered=delivered,
        events=events,
    )
    logger.info("任务完成: %d 对, 用时 %.6g s, 有效速率 %.6g Hz",
                delivered, makespan, report.effective_rate)
    return report


# ---- 基准表汇总 ----

@dataclass(frozen=True)
class Table1Report:
    rows: pd.DataFrame
    rates_khz: pd.DataFrame
    ratios: Dict[str, float]
    ordering: Dict[str, bool]

    @property
    def all_within_tolerance(self) -> bool:
        return bool(self.rows["within_tolerance"].all())


def table1_report(model: NetworkModel, scenarios: Dict[ScenarioName, Scenario],
                  targets: dict, fidelity_params: Optional[FidelityParams] = None) -> Table1Report:
    """
    九个速率单元、保真度行、相对误差及排序检查

    Args:
        targets: simulation.yaml 的 table1 段
    """
    tolerance = float(targets.get("tolerance", 0.10))
    fid_tolerance = float(targets.get("fidelity_tolerance", 0.02))
    fidelity_params = fidelity_params or FidelityParams()
    rows = []
    rates: Dict[str, Dict[str, float]] = {}
    for name, scenario in scenarios.items():
        rates[name.value] = {}
        for arch in Architecture:
            value = model.aggregate(scenario, arch) / 1e3
            rates[name.value][arch.value] = value
            target = targets.get("rates_khz", {}).get(name.value, {}).get(arch.value)
            rows.append(_table_row("rate_khz", name.value, arch.value, value, target,
                                   tolerance, relative=True))
    for nodes, entry in sorted((targets.get("fidelity") or {}).items(), key=lambda kv: int(kv[0])):
        for arch in Architecture:
            value = pair_fidelity(architecture_model(arch.value, int(nodes), fidelity_params))
            rows.append(_table_row(f"fidelity_{int(nodes)}_nodes", "", arch.value, value,
                                   entry.get(arch.value), fid_tolerance, relative=False))

    ratios, ordering = {}, {}
    for scen, cells in rates.items():
        rqi = cells[Architecture.RQI_DWDM.value]
        for single in (Architecture.NO_QFC_SINGLE, Architecture.QFC_SINGLE):
            base = cells[single.value]
            ratios[f"{scen}:{single.value}"] = rqi / base if base > 0 else math.inf
        ordering[f"{scen}:rqi_dominates"] = all(
            rqi > 100 * cells[s.value] for s in (Architecture.NO_QFC_SINGLE, Architecture.QFC_SINGLE))
    for scen in (ScenarioName.INTER_RACK.value, ScenarioName.CROSS_DC.value):
        if scen in rates:
            ordering[f"{scen}:qfc_beats_no_qfc"] = (rates[scen]["QfcSingle"] > rates[scen]["NoQfcSingle"])
    if ScenarioName.INTRA_RACK.value in rates:
        intra = rates[ScenarioName.INTRA_RACK.value]
        ordering["IntraRack:no_qfc_at_least_qfc"] = intra["NoQfcSingle"] >= intra["QfcSingle"]

    frame = pd.DataFrame(rows)
    for row in rows:
        if not row["within_tolerance"]:
            logger.warning("%s %s %s 偏离目标: %.6g vs %.6g", row["metric"], row["scenario"],
                           row["architecture"], row["value"], row["target"])
    return Table1Report(rows=frame, rates_khz=pd.DataFrame(rates).T, ratios=ratios,
                        ordering=ordering)


def _table_row(metric: str, scenario: str, architecture: str, value: float,
               target: Optional[float], tolerance: float, relative: bool) -> dict:
    if target is None:
        error, ok = float("nan"), True
    elif relative:
        error = (value - target) / target
        ok = abs(error) <= tolerance
    else:
        error = value - target
        ok = abs(error) <= tolerance
    return {"metric": metric, "scenario": scenario, "architecture": architecture,
            "value": value, "target": target, "error": error, "within_tolerance": ok}

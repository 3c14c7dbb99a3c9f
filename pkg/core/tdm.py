"""
腔内时分复用(TDM)速率引擎

按轮次尝试纠缠：N_1 = k，N_i = N_{i-1}(1 - p_suc)，
R = Σ N_i p_suc / (t_move + M t_init + Σ N_i t_ent)。
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from core.components import PathChain, chain_transmittance
from core.exceptions import ConfigError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TdmParams:
    """TDM 协议参数，时间单位 s"""
    t_move: float = 100e-6
    t_init: float = 10e-6
    t_ent: float = 1.09e-6
    M: int = 5
    k: int = 1
    p_suc: float = 0.25

    def __post_init__(self):
        if min(self.t_move, self.t_init, self.t_ent) < 0:
            raise DomainError("TDM 时间参数不能为负")
        if not 0 <= self.p_suc <= 1:
            raise DomainError(f"p_suc 必须在 [0, 1] 内: {self.p_suc}")
        if self.M < 1 or self.k < 1:
            raise DomainError(f"M 与 k 必须 >= 1: M={self.M}, k={self.k}")

    def with_(self, **changes) -> "TdmParams":
        return replace(self, **changes)

    @classmethod
    def from_preset(cls, preset: dict, **overrides) -> "TdmParams":
        try:
            values = {name: preset[name] for name in ("t_move", "t_init", "t_ent", "M")}
        except KeyError as e:
            raise ConfigError(f"TDM 预设缺少参数: {e}") from e
        values["M"] = int(values["M"])
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class RateResult:
    rate: float
    attempts_per_round: Tuple[float, ...]
    expected_successes_per_cycle: float
    expected_cycle_time: float


class EmissionConvention(str, Enum):
    JOINT = "joint"
    PER_ARM = "per_arm"


@dataclass(frozen=True)
class SuccessModel:
    """单次尝试成功概率的组成：BSM 成功率、发射概率、两臂路径链"""
    arm_a: PathChain = PathChain()
    arm_b: PathChain = PathChain()
    p_bsm: float = 0.5
    p_emit: float = 0.5
    emission_convention: EmissionConvention = EmissionConvention.JOINT


def attempt_counts(k: int, M: int, p_suc: float) -> List[float]:
    """每轮期望尝试次数 N_1..N_M"""
    counts = [float(k)]
    for _ in range(M - 1):
        counts.append(counts[-1] * (1.0 - p_suc))
    return counts


def bell_pair_rate(params: TdmParams) -> RateResult:
    """按期望尝试次数计算 Bell 对分发速率"""
    counts = attempt_counts(params.k, params.M, params.p_suc)
    attempts = sum(counts)
    successes = attempts * params.p_suc
    cycle_time = params.t_move + params.M * params.t_init + attempts * params.t_ent
    if cycle_time <= 0:
        raise DomainError("周期时间为零，速率无定义")
    return RateResult(
        rate=successes / cycle_time,
        attempts_per_round=tuple(counts),
        expected_successes_per_cycle=successes,
        expected_cycle_time=cycle_time,
    )


def asymptotic_rate(params: TdmParams) -> float:
    """k -> ∞ 时的速率上限 p_suc / t_ent"""
    if not params.t_ent > 0:
        raise DomainError("t_ent 必须为正")
    return params.p_suc / params.t_ent


def t_ent_for_rate(target_rate: float, p_suc: float = 0.25) -> float:
    """给定上限速率反推单次尝试时间"""
    if not target_rate > 0:
        raise DomainError(f"目标速率必须为正: {target_rate}")
    return p_suc / target_rate


def p_success(model: SuccessModel) -> float:
    """每次尝试的 Bell 交换成功概率"""
    eta_a = chain_transmittance(model.arm_a)
    eta_b = chain_transmittance(model.arm_b)
    if model.emission_convention is EmissionConvention.JOINT:
        p = model.p_bsm * model.p_emit * eta_a * eta_b
    else:
        p = model.p_bsm * (model.p_emit * eta_a) * (model.p_emit * eta_b)
    return min(max(p, 0.0), 1.0)


def optimal_M(params: TdmParams, M_max: int) -> Tuple[int, float]:
    """在 [1, M_max] 中穷举最优轮数，速率相同时取较小的 M"""
    if M_max < 1:
        raise DomainError(f"M_max 必须 >= 1: {M_max}")
    best_M, best_rate = 1, -1.0
    for M in range(1, M_max + 1):
        rate = bell_pair_rate(params.with_(M=M)).rate
        if rate > best_rate:
            best_M, best_rate = M, rate
    return best_M, best_rate


def monte_carlo_rate(params: TdmParams, cycles: int, seed: Optional[int] = None) -> float:
    """
    蒙特卡洛更新过程估计：每轮原子以 p_suc 独立成功并移出腔，返回总成功数/总时间

    Args:
        params: TDM 参数
        cycles: 周期数（对周期向量化）
        seed: 随机种子
    """
    if cycles < 1:
        raise DomainError(f"cycles 必须 >= 1: {cycles}")
    rng = np.random.default_rng(seed)
    remaining = np.full(cycles, params.k, dtype=np.int64)
    attempts = 0
    successes = 0
    for _ in range(params.M):
        attempts += int(remaining.sum())
        won = rng.binomial(remaining, params.p_suc)
        successes += int(won.sum())
        remaining -= won
    total_time = cycles * (params.t_move + params.M * params.t_init) + attempts * params.t_ent
    if total_time <= 0:
        raise DomainError("总时间为零，速率无定义")
    rate = successes / total_time
    logger.debug("蒙特卡洛 %d 周期: 成功 %d 次, 速率 %.6g Hz", cycles, successes, rate)
    return rate

"""
参数扫描命令：rate / fidelity / raman

扫描点交给线程池并发计算，executor.map 保证结果顺序与扫描点顺序一致，
最后由单个收集者写出 CSV。
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Sequence

import pandas as pd

from core.config_manager import ConfigManager, RunConfig
from core.data import ResultWriter
from core.exceptions import ConfigError
from core.fidelity import (FIDELITY_COLUMNS, ConverterKind, ConverterProfile, FidelityParams,
                           crossover_nodes, fidelity_vs_nodes)
from core.netsim import (RATE_COLUMNS, Architecture, NetworkModel, effective_rate_with_reconfig,
                         scenarios_from_config, success_probability)
from core.optics import dfg_pump_for
from core.raman import (SPECTRUM_COLUMNS, PumpConfig, RamanModel, WaveguideGeometry,
                        noise_spectral_density, pump_grid, spectrum_rows)
from core.tdm import TdmParams, monte_carlo_rate
from .plot_scripts import fidelity_script, raman_script, rate_script

logger = logging.getLogger(__name__)


def run_points(fn: Callable, points: Sequence, max_concurrent: int) -> List:
    """并发计算扫描点，返回值顺序与 points 一致"""
    with ThreadPoolExecutor(max_workers=max_concurrent) as executor:
        return list(executor.map(fn, points))


def load_model(config: RunConfig, preset: str = None) -> NetworkModel:
    manager = ConfigManager()
    catalog = manager.load_catalog(config.catalog_path)
    tdm = None
    if preset:
        presets = config.section("tdm").get("presets", {})
        if preset not in presets:
            raise ConfigError(f"找不到 TDM 预设: {preset}")
        tdm = TdmParams.from_preset(presets[preset])
    return NetworkModel.from_run_config(config, catalog, tdm)


def reconfig_between_epochs(model: NetworkModel, architecture: Architecture,
                            config: RunConfig) -> float:
    """单信道架构取光子开关延迟，RQI 取次重构时间"""
    if architecture.single_channel:
        return model.catalog.get("photonic_switch").reconfig_latency_s
    return float(config.section("simulate").get("minor_reconfig_s", 1e-9))


def cmd_rate(args, config: RunConfig):
    """九个场景×架构单元随 N_tot 的速率扫描"""
    model = load_model(config, getattr(args, "tdm_preset", None))
    scenarios = scenarios_from_config(config.section("network").get("scenarios", {}))
    if not scenarios:
        raise ConfigError("network.scenarios 不能为空")
    epoch = int(config.section("simulate").get("epoch_pairs", 100))
    cycles = getattr(args, "mc_cycles", None) or int(config.section("sweep").get("mc_cycles", 10000))
    n_tots = [int(n) for n in config.sweep_axis("n_tot")]
    points = [(scenario, arch, n_tot)
              for scenario in scenarios.values() for arch in Architecture for n_tot in n_tots]

    def evaluate(indexed):
        index, (scenario, arch, n_tot) = indexed
        # N_tot 小于信道数时只点亮 N_tot 个信道
        point_model = replace(model, n_channels=max(1, min(model.n_channels, n_tot)))
        row = point_model.rate_row(scenario, arch, n_tot, epoch,
                                   reconfig_between_epochs(model, arch, config))
        if config.mode == "stoch":
            n = row["n_channels"]
            k = -(-n_tot // n)
            p = success_probability(scenario, arch, point_model.catalog,
                                    point_model.p_bsm, point_model.convention)
            tdm = point_model.tdm.with_(k=k, p_suc=p)
            row["per_channel_hz"] = monte_carlo_rate(tdm, cycles, seed=config.seed + index)
            row["aggregate_hz"] = n * row["per_channel_hz"]
            row["effective_hz"] = (effective_rate_with_reconfig(
                row["aggregate_hz"], epoch, reconfig_between_epochs(model, arch, config))
                if row["aggregate_hz"] > 0 else 0.0)
        logger.debug("rate %s/%s N_tot=%d -> %.6g Hz", scenario.name.value, arch.value,
                     n_tot, row["aggregate_hz"])
        return row

    rows = run_points(evaluate, list(enumerate(points)), config.max_concurrent)
    df = pd.DataFrame(rows, columns=RATE_COLUMNS)
    writer = ResultWriter(config.out_dir, config.fingerprint(tdm_preset=getattr(args, "tdm_preset", None),
                                                          mc_cycles=cycles))
    writer.save(df, "rate.csv")
    if getattr(args, "gnuplot", False):
        writer.save_text(rate_script("rate.csv"), "rate.gp")
    return df


def raman_chi2_profile(config: RunConfig) -> ConverterProfile:
    """
    由拉曼谱密度换算 χ² DFG 转换器噪声

    泵浦取把原子发射波长转换到 raman.target_signal_nm 所需的 DFG 泵浦，
    噪声计数 = NSD × filter_bandwidth_nm × filter_efficiency，与 signal_counts_per_s 比较。
    """
    section = config.section("raman")
    pump, geom, model = raman_inputs(config)
    signal_nm = float(config.section("grid").get("signal_nm", 780.0))
    pump = replace(pump, wavelength=dfg_pump_for(signal_nm, pump.signal_wavelength))
    nsd = noise_spectral_density(pump, geom, model)
    try:
        profile = ConverterProfile.from_noise_density(
            ConverterKind.CHI2_DFG, nsd, float(section["filter_bandwidth_nm"]),
            float(section["filter_efficiency"]), float(section["signal_counts_per_s"]))
    except KeyError as e:
        raise ConfigError(f"raman 配置缺少字段: {e}") from e
    logger.info("拉曼噪声 %.6g photons/s/nm (泵浦 %.4f nm) -> χ² 不保真度 %.6g",
                nsd, pump.wavelength, profile.infidelity)
    return profile


def fidelity_params_for(config: RunConfig, converter: str = None, chi2_noise: str = None) -> FidelityParams:
    section = config.section("fidelity")
    source = chi2_noise or section.get("chi2_noise", "fitted")
    if source == "raman":
        chi2 = raman_chi2_profile(config)
    elif source == "fitted":
        chi2 = None
    else:
        raise ConfigError(f"未知的 χ² 噪声来源: {source}")
    catalog = ConfigManager().load_catalog(config.catalog_path)
    try:
        return FidelityParams.from_config(section, catalog, converter, chi2)
    except ValueError as e:
        raise ConfigError(f"转换器类型非法: {converter}") from e


def cmd_fidelity(args, config: RunConfig):
    """三种架构的保真度随节点数曲线"""
    chi2_noise = getattr(args, "chi2_noise", None)
    params = fidelity_params_for(config, getattr(args, "converter", None), chi2_noise)
    nodes = [int(n) for n in config.sweep_axis("nodes")]
    frames = run_points(lambda arch: fidelity_vs_nodes(arch.value, nodes, params),
                        list(Architecture), config.max_concurrent)
    df = pd.concat(frames, ignore_index=True)[FIDELITY_COLUMNS]

    n_star = crossover_nodes(params)
    if n_star is None:
        logger.warning("在扫描范围内 RQI 保真度始终低于无 QFC 单信道")
    else:
        logger.info("RQI 保真度自 %d 个节点起不低于无 QFC 单信道", n_star)

    writer = ResultWriter(config.out_dir, config.fingerprint(converter=getattr(args, "converter", None),
                                                          chi2_noise=chi2_noise))
    writer.save(df, "fidelity.csv")
    if getattr(args, "gnuplot", False):
        writer.save_text(fidelity_script("fidelity.csv"), "fidelity.gp")
    return df


def raman_inputs(config: RunConfig, pump_power: float = None):
    """由配置构造 (泵浦配置, 波导几何, 声子模型)"""
    section = config.section("raman")
    try:
        model = RamanModel.from_dict(ConfigManager().load_phonon_modes(config.phonon_path),
                                     n_s=float(section.get("n_signal", 2.14)),
                                     n_0=float(section.get("n_pump", 2.14)))
        geom = WaveguideGeometry(length=float(section["length_m"]),
                                 pump_waist=float(section["pump_waist_m"]),
                                 signal_waist=float(section["signal_waist_m"]))
        pump = PumpConfig(wavelength=float(config.section("sweep")["pump_nm"]["start"]),
                          power=float(pump_power if pump_power is not None else section["pump_power_w"]),
                          signal_wavelength=float(section["target_signal_nm"]))
    except KeyError as e:
        raise ConfigError(f"raman 配置缺少字段: {e}") from e
    return pump, geom, model


def cmd_raman(args, config: RunConfig):
    """泵浦波长×温度网格上的 Stokes / 反 Stokes 谱密度"""
    pump, geom, model = raman_inputs(config, getattr(args, "pump_power", None))
    if not model.populated_from_reference:
        logger.warning("声子模参数为估算值，跳过 >1e6 photons/s/nm 绝对量级检查")
    axis = config.section("sweep")["pump_nm"]
    pumps = pump_grid(float(axis["start"]), float(axis["end"]), float(axis["step"]))
    temperatures = [float(t) for t in config.sweep_axis("temperatures_K")]
    points = [(t, p) for t in temperatures for p in pumps]

    chunks = run_points(lambda tp: spectrum_rows(float(tp[1]), tp[0], pump, geom, model),
                        points, config.max_concurrent)
    df = pd.DataFrame([row for chunk in chunks for row in chunk], columns=SPECTRUM_COLUMNS)

    writer = ResultWriter(config.out_dir, config.fingerprint(pump_power=pump.power))
    writer.save(df, "raman.csv")
    if getattr(args, "gnuplot", False):
        writer.save_text(raman_script("raman.csv", temperatures[0]), "raman.gp")
    return df

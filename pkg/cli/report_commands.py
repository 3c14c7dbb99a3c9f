"""
报告类命令：tune / simulate / table1
"""
import logging
from dataclasses import asdict
from pathlib import Path

import pandas as pd

from core.config_manager import DEFAULT_CONFIG_DIR, ConfigManager, RunConfig
from core.data import ResultWriter
from core.exceptions import ConfigError
from core.netsim import (Architecture, JobSpec, ScenarioName, scenarios_from_config,
                         simulate_job, table1_report)
from core.optics import TuningModel, build_itu_grid, plan_channel
from .sweep_commands import fidelity_params_for, load_model, run_points

logger = logging.getLogger(__name__)

DEFAULT_JOB = DEFAULT_CONFIG_DIR / "jobs" / "example_job.json"


def cmd_tune(args, config: RunConfig):
    """目标信道的 DFG 泵浦波长、温度变化与 TDFG 泵浦"""
    grid_cfg = config.section("grid")
    try:
        grid = build_itu_grid(float(grid_cfg["start_nm"]), float(grid_cfg["end_nm"]),
                              float(grid_cfg.get("spacing_ghz", 50.0)))
        model = TuningModel(float(grid_cfg.get("tuning_slope_nm_per_c", 0.27)),
                            float(grid_cfg.get("reference_temperature_c", 25.0)))
    except KeyError as e:
        raise ConfigError(f"grid 配置缺少字段: {e}") from e

    signal = args.signal if getattr(args, "signal", None) is not None else float(grid_cfg.get("signal_nm", 780.0))
    target = args.target if getattr(args, "target", None) is not None else grid.channels[0]
    current = args.current if getattr(args, "current", None) is not None else grid.channels[0]

    plan = plan_channel(signal, target, grid, current, model)
    df = pd.DataFrame([asdict(plan)])
    writer = ResultWriter(config.out_dir, config.fingerprint(signal=signal, target=target, current=current))
    writer.save(df, "tune.csv")
    return plan


def _job_path(args) -> Path:
    path = getattr(args, "job", None)
    return Path(path) if path else DEFAULT_JOB


def cmd_simulate(args, config: RunConfig):
    """执行任务文件，输出报告与事件日志"""
    manager = ConfigManager()
    job_path = _job_path(args)
    data = manager.load_job(job_path)
    job = JobSpec.from_dict(data, config.section("simulate"))

    scenarios = scenarios_from_config(config.section("network").get("scenarios", {}))
    try:
        scenario = scenarios[ScenarioName(data.get("scenario", "IntraRack"))]
        architecture = Architecture(data.get("architecture", "RqiDwdm"))
    except (KeyError, ValueError) as e:
        raise ConfigError(f"任务文件中的场景或架构无效: {e}") from e

    model = load_model(config)
    stochastic = config.mode == "stoch"
    runs = max(1, int(getattr(args, "runs", 1) or 1)) if stochastic else 1

    reports = run_points(
        lambda i: simulate_job(job, scenario, architecture, model, seed=config.seed + i,
                               stochastic=stochastic),
        list(range(runs)), config.max_concurrent)

    writer = ResultWriter(config.out_dir, config.fingerprint(job=manager.fingerprint(data), runs=runs))
    summary = pd.DataFrame([{"run": i, "scenario": scenario.name.value,
                             "architecture": architecture.value, **r.summary()}
                            for i, r in enumerate(reports)])
    writer.save(summary, "simulate_report.csv")
    writer.save(reports[0].events, "events.csv")
    if runs > 1:
        mean = summary["makespan_s"].mean()
        logger.info("%d 次随机运行平均用时 %.6g s（确定性 %.6g s）", runs, mean,
                    reports[0].expected_makespan)
    return reports


def fast_attempt_headroom(config: RunConfig, scenarios) -> dict:
    """快速尝试预设下、每腔轮数取最优时的 RQI 聚合速率"""
    section = config.section("table1").get("headroom")
    if not section:
        return {}
    try:
        scenario = scenarios[ScenarioName(section.get("scenario", "IntraRack"))]
        preset, M_max = section["preset"], int(section.get("M_max", 20))
        floor = float(section["min_rate_hz"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"table1.headroom 配置非法: {e}") from e
    M, rate = load_model(config, preset).optimized_aggregate(scenario, Architecture.RQI_DWDM, M_max)
    (logger.info if rate > floor else logger.warning)(
        "%s 预设下 %s RqiDwdm 聚合速率 %.6g Hz (M=%d)，下限 %.6g Hz",
        preset, scenario.name.value, rate, M, floor)
    return {"rate_hz": rate, "M": M, "above_floor": rate > floor,
            "key": f"{scenario.name.value}:RqiDwdm:{preset}"}


def cmd_table1(args, config: RunConfig):
    """基准表：九个速率单元、保真度行与相对误差"""
    model = load_model(config)
    scenarios = scenarios_from_config(config.section("network").get("scenarios", {}))
    report = table1_report(model, scenarios, config.section("table1"), fidelity_params_for(config))

    for key, ratio in report.ratios.items():
        logger.info("RQI/单信道速率比 %s: %.1f", key, ratio)
    for key, ok in report.ordering.items():
        (logger.info if ok else logger.warning)("排序检查 %s: %s", key, "通过" if ok else "未通过")
    headroom = fast_attempt_headroom(config, scenarios)

    checks = pd.DataFrame(
        [{"check": f"ratio:{k}", "value": v} for k, v in report.ratios.items()]
        + [{"check": f"ordering:{k}", "value": float(v)} for k, v in report.ordering.items()]
        + ([{"check": f"headroom:{headroom['key']}", "value": headroom["rate_hz"]},
            {"check": f"headroom_M:{headroom['key']}", "value": float(headroom["M"])},
            {"check": f"headroom_above_floor:{headroom['key']}", "value": float(headroom["above_floor"])}]
           if headroom else []))
    writer = ResultWriter(config.out_dir, config.fingerprint())
    writer.save(report.rows, "table1.csv")
    writer.save(checks, "table1_checks.csv")
    return report

"""
命令行入口：参数解析、日志设置与子命令分发
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from core.config_manager import ConfigManager
from core.exceptions import ConfigError, DomainError
from .report_commands import cmd_simulate, cmd_table1, cmd_tune
from .sweep_commands import cmd_fidelity, cmd_raman, cmd_rate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DOMAIN_ERROR = 3

COMMANDS = {
    "rate": cmd_rate,
    "fidelity": cmd_fidelity,
    "raman": cmd_raman,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "table1": cmd_table1,
}


def setup_logging(verbose: bool = False):
    """设置日志格式"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] [%(name)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="运行配置文件 (simulation.yaml)")
    common.add_argument("--out", type=Path, default=None, help="输出目录")
    common.add_argument("--seed", type=int, default=None, help="随机种子")
    common.add_argument("--mode", choices=("det", "stoch"), default=None, help="确定性/随机模式")
    common.add_argument("--worst-case", action="store_true", default=None,
                        help="机械开关取 0.7 dB 最差插入损耗")
    common.add_argument("--gnuplot", action="store_true", help="同时输出 gnuplot 绘图脚本")
    common.add_argument("-v", "--verbose", action="store_true", help="输出调试日志")

    parser = argparse.ArgumentParser(prog="dwdm-qnet", description="DWDM 量子网络速率/保真度/噪声仿真")
    sub = parser.add_subparsers(dest="cmd", required=True)

    rate = sub.add_parser("rate", parents=[common], help="九种场景×架构的速率随 N_tot 扫描")
    rate.add_argument("--tdm-preset", default=None, help="TDM 参数预设名")
    rate.add_argument("--mc-cycles", type=int, default=None, help="随机模式下每点的蒙特卡洛周期数")

    fidelity = sub.add_parser("fidelity", parents=[common], help="保真度随节点数曲线")
    fidelity.add_argument("--converter", default=None,
                          help="RQI 使用的转换器类型 (Chi2_DFG | Chi3_FWM_BG | Chi3_TDFG)")
    fidelity.add_argument("--chi2-noise", choices=("fitted", "raman"), default=None,
                          help="χ² DFG 噪声来源：配置中的拟合值或由拉曼谱密度换算")

    raman = sub.add_parser("raman", parents=[common], help="泵浦波长×温度的拉曼噪声谱密度")
    raman.add_argument("--pump-power", type=float, default=None, help="泵浦功率 W")

    tune = sub.add_parser("tune", parents=[common], help="目标信道的泵浦波长与温度调谐方案")
    tune.add_argument("--signal", type=float, default=None, help="原子发射波长 nm")
    tune.add_argument("--target", type=float, default=None, help="目标信道波长 nm")
    tune.add_argument("--current", type=float, default=None, help="当前信道波长 nm")

    simulate = sub.add_parser("simulate", parents=[common], help="执行纠缠需求任务")
    simulate.add_argument("--job", type=Path, default=None, help="任务文件")
    simulate.add_argument("--runs", type=int, default=1, help="随机模式下的重复次数")

    sub.add_parser("table1", parents=[common], help="基准速率与保真度对比表")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行子命令，返回退出码"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        config = ConfigManager().load_run_config(
            args.config, seed=args.seed, mode=args.mode, out_dir=args.out,
            worst_case=args.worst_case)
        logger.info("开始执行 %s (mode=%s, seed=%d)", args.cmd, config.mode, config.seed)
        COMMANDS[args.cmd](args, config)
    except ConfigError as e:
        logger.error("配置错误: %s", e)
        return EXIT_CONFIG_ERROR
    except DomainError as e:
        logger.error("数值定义域错误: %s", e)
        return EXIT_DOMAIN_ERROR
    logger.info("%s 完成，输出目录 %s", args.cmd, config.out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

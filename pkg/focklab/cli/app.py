"""CLI 入口：解析参数、运行场景、输出报告"""

import argparse
from pathlib import Path

from .. import __version__
from ..constant import Check, OutputFormat
from ..engine import ConfigError, ScenarioEngine, config_schema, load_config, load_corpus
from ..object import RunReport, ScenarioConfig
from ..report import emit, parse_formats
from ..tracer import setup_logging
from ..utility import dump_json, write_atomic
from .factory import apply_eps, get_cli_value, get_jobs, set_cli_value
from .renderer import Renderer


# 子命令对应的检查项，None 表示全部
SUBCOMMANDS: dict[str, set[Check] | None] = {
    "classify": {Check.VERDICT, Check.DIFFERENCE},
    "matrix": {Check.MATRIX},
    "svals": {Check.SVALS},
    "schatten": {Check.SCHATTEN},
    "berezin": {Check.BEREZIN, Check.KERNEL, Check.LITTLEWOOD_PALEY},
    "spectrum": {Check.SPECTRUM},
    "verify": None,
    "emit": None,
}

# emit 未指定 --out 时的输出目录
DEFAULT_OUT: str = "focklab_report"

# 退出码
EXIT_OK: int = 0
EXIT_FAILED: int = 1
EXIT_CONFIG: int = 2


def _parse_args(argv: list[str] | None) -> argparse.Namespace:
    """解析命令行参数"""
    parser = argparse.ArgumentParser(
        prog="focklab",
        description="Fock 空间广义 Volterra 型算子的判定与数值验证",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=f"运行 {name} 相关检查")
        sub.add_argument("--config", default="", help="场景配置文件（JSON）")
        sub.add_argument("--out", default="", help="报告输出目录")
        sub.add_argument("--formats", default="", help="输出格式，逗号分隔：json,csv,plotdata")
        sub.add_argument("--jobs", type=int, default=0, help="并行场景数")
        sub.add_argument("--seed", type=int, default=0, help="保留参数，当前计算均为确定性的")
        sub.add_argument("--quiet", action="store_true", help="不在终端显示汇总表")

    setting = subparsers.add_parser("config", help="查看或修改 cli_setting.json")
    setting.add_argument("key", nargs="?", default="", help="配置项名称")
    setting.add_argument("value", nargs="?", default=None, help="新的取值")

    schema = subparsers.add_parser("schema", help="输出场景配置文件的 JSON Schema")
    schema.add_argument("--out", default="", help="写入的文件路径，默认输出到终端")

    return parser.parse_args(argv)


def _load(args: argparse.Namespace) -> ScenarioConfig:
    """读取场景配置，verify 与 emit 未指定时使用随包语料"""
    if args.config:
        config: ScenarioConfig = load_config(args.config)
    elif args.command in ("verify", "emit"):
        config = load_corpus()
    else:
        raise ConfigError(["--config: 该子命令需要指定场景配置文件"])

    return apply_eps(config, get_cli_value("eps"))


def _handle_setting(args: argparse.Namespace, renderer: Renderer) -> int:
    """config 子命令"""
    if not args.key:
        for key in ("jobs", "formats", "eps"):
            renderer.console.print(f"  {key} = {get_cli_value(key)!r}")
        return EXIT_OK

    if args.value is None:
        renderer.console.print(f"  {args.key} = {get_cli_value(args.key)!r}")
        return EXIT_OK

    set_cli_value(args.key, args.value)
    renderer.show_info(f"已保存 {args.key} = {args.value!r}")
    return EXIT_OK


def _handle_schema(args: argparse.Namespace, renderer: Renderer) -> int:
    """schema 子命令"""
    text: str = dump_json(config_schema())
    if not args.out:
        renderer.console.print_json(text)
        return EXIT_OK

    try:
        write_atomic(args.out, text)
    except OSError as e:
        renderer.show_error(str(e))
        return EXIT_FAILED

    renderer.show_written([Path(args.out)])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """CLI 主函数，返回进程退出码"""
    setup_logging(enable_console=False)

    args: argparse.Namespace = _parse_args(argv)
    renderer: Renderer = Renderer(quiet=getattr(args, "quiet", False))

    try:
        if args.command == "config":
            return _handle_setting(args, renderer)
        if args.command == "schema":
            return _handle_schema(args, renderer)

        config: ScenarioConfig = _load(args)
        jobs: int = args.jobs or get_jobs()
        formats: list[OutputFormat] = parse_formats(args.formats or get_cli_value("formats"))
    except ConfigError as e:
        renderer.show_config_error(e.problems)
        return EXIT_CONFIG
    except ValueError as e:
        renderer.show_error(str(e))
        return EXIT_CONFIG

    engine: ScenarioEngine = ScenarioEngine(jobs=jobs)
    report: RunReport = engine.run(config, SUBCOMMANDS[args.command])
    renderer.show_report(report)

    out: str = args.out or (DEFAULT_OUT if args.command == "emit" else "")
    if out:
        try:
            paths: list[Path] = emit(report, formats, out)
        except OSError as e:
            renderer.show_error(str(e))
            return EXIT_FAILED
        renderer.show_written(paths)

    return EXIT_OK if report.passed else EXIT_FAILED

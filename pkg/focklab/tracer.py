import sys
from collections.abc import Callable
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from loguru import Logger, Record
from loguru import logger

from .object import CheckResult, RunReport, Scenario
from .utility import get_folder_path


_CONSOLE_FORMAT: str = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{extra[run_id]}</cyan> | "
    "<level>{message}</level>"
)

_FILE_FORMAT: str = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
    "{level: <8} | "
    "{extra[run_id]} | "
    "{message}"
)


# 全局 handler 只注册一次
_initialized: bool = False


# 按 run_id 记录文件 sink 的 handler ID
_file_sink_map: dict[str, int] = {}


def _is_focklab_record(record: "Record") -> bool:
    """判断日志记录是否来自 focklab 模块。"""
    return record["extra"].get("focklab_module") is True


def _make_run_filter(run_id: str) -> Callable[["Record"], bool]:
    """创建指定运行的日志过滤函数。"""
    def _filter(record: "Record") -> bool:
        return _is_focklab_record(record) and record["extra"].get("run_id") == run_id
    return _filter


def setup_logging(*, enable_console: bool = True) -> None:
    """
    初始化 focklab 日志系统，应在应用入口处调用一次。

    若未显式调用，RunTracer 首次实例化时会以默认参数自动初始化。

    Args:
        enable_console: 是否将日志输出到终端（CLI 使用 rich 输出时设为 False）。
    """
    global _initialized

    if _initialized:
        return

    # 移除 loguru 默认 handler
    try:
        logger.remove(0)
    except ValueError:
        pass

    if enable_console:
        logger.add(
            sys.stderr,
            level="INFO",
            filter=_is_focklab_record,
            format=_CONSOLE_FORMAT,
        )

    _initialized = True


def _add_file_sink(run_id: str) -> None:
    """为指定运行添加文件日志 sink（同一 run_id 只添加一次）。"""
    if run_id in _file_sink_map:
        return

    log_path: Path = get_folder_path("log")
    file_path: Path = log_path / f"{run_id}.log"

    handler_id: int = logger.add(
        file_path,
        level="DEBUG",
        filter=_make_run_filter(run_id),
        format=_FILE_FORMAT,
    )
    _file_sink_map[run_id] = handler_id


def remove_file_sink(run_id: str) -> None:
    """移除指定运行的文件日志 sink。"""
    handler_id: int | None = _file_sink_map.pop(run_id, None)
    if handler_id is not None:
        try:
            logger.remove(handler_id)
        except ValueError:
            pass


class RunTracer:
    """
    使用 loguru 记录场景运行过程的追踪器。
    """

    def __init__(self, run_id: str) -> None:
        """
        绑定运行上下文。文件日志 sink 在 open 时注册，close 时移除。

        Args:
            run_id: 运行唯一标识，用于日志文件命名和 filter 隔离。
        """
        self.run_id: str = run_id

        setup_logging()

        # focklab_module=True 用于 filter，不影响宿主应用的其他 loguru 日志
        self.logger: Logger = logger.bind(
            run_id=self.run_id,
            focklab_module=True,
        )

    def open(self) -> None:
        """注册本次运行的文件日志 sink"""
        _add_file_sink(self.run_id)

    def close(self) -> None:
        """移除本次运行的文件日志 sink，释放文件句柄"""
        remove_file_sink(self.run_id)

    def on_run_start(self, count: int, jobs: int) -> None:
        """记录运行开始事件。"""
        self.logger.info(f"运行开始: {count} 个场景, {jobs} 个工作线程")

    def on_scenario_start(self, scenario: Scenario) -> None:
        """记录场景开始事件。"""
        checks: str = ", ".join(c.value for c in scenario.checks)
        self.logger.info(f"场景 -> {scenario.id} [{checks}]")
        self.logger.debug(f"场景 -> 完整配置: {scenario.model_dump_json()}")

    def on_check_start(self, scenario_id: str, check: str) -> None:
        """记录检查开始事件。"""
        self.logger.debug(f"检查 -> {scenario_id}/{check}")

    def on_check_end(self, scenario_id: str, result: CheckResult, seconds: float) -> None:
        """记录检查结束事件。"""
        self.logger.debug(
            f"检查 <- {scenario_id}/{result.check.value} "
            f"一致性={result.agreement} 耗时={seconds:.3f}s"
        )

    def on_check_error(self, scenario_id: str, check: str, error: Exception) -> None:
        """记录检查失败事件。"""
        self.logger.error(f"检查失败 {scenario_id}/{check}: {type(error).__name__}: {error}")

    def on_run_end(self, report: RunReport) -> None:
        """记录运行结束事件。"""
        status: str = "通过" if report.passed else "未通过"
        self.logger.info(f"运行结束: {len(report.results)} 个场景, {status}")

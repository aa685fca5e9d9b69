"""运行报告输出：report.json、tables.csv 与 plotdata/*.csv"""
import csv
import io
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from .constant import Check, OutputFormat
from .object import CheckResult, RunReport
from .utility import dump_json, write_atomic


REPORT_FILENAME: str = "report.json"
TABLE_FILENAME: str = "tables.csv"
PLOT_FOLDER: str = "plotdata"

# 展开到 tables.csv 的列表最大长度，更长的序列只出现在 plotdata 中
TABLE_LIST_LIMIT: int = 16


def _to_csv(header: list[str], rows: Iterable[Iterable[Any]]) -> str:
    buffer: io.StringIO = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _flatten(prefix: str, value: Any) -> Iterable[tuple[str, Any]]:
    """把嵌套结构展开为 (路径, 标量) 对"""
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _flatten(f"{prefix}.{key}" if prefix else str(key), item)
    elif isinstance(value, list):
        if len(value) > TABLE_LIST_LIMIT:
            return
        for i, item in enumerate(value):
            yield from _flatten(f"{prefix}[{i}]", item)
    else:
        yield prefix, value


def render_json(report: RunReport) -> str:
    """完整报告，不含耗时，相同配置得到逐字节相同的输出"""
    return dump_json(report.model_dump(mode="json", exclude={"timings"}))


def render_table(report: RunReport) -> str:
    """扁平的 场景 × 指标 表"""
    rows: list[tuple[str, str, str, Any]] = []

    for scenario in report.results:
        rows.append((scenario.id, "", "agreement", scenario.agreement))

        for result in scenario.results:
            check: str = result.check.value
            rows.append((scenario.id, check, "agreement", result.agreement))
            if result.failed:
                rows.append((scenario.id, check, "error", result.error))
            for metric, value in _flatten("", result.data):
                rows.append((scenario.id, check, metric, value))

            seconds: float | None = report.timings.get(scenario.id, {}).get(check)
            if seconds is not None:
                rows.append((scenario.id, check, "wall_time", f"{seconds:.6f}"))

    return _to_csv(["scenario", "check", "metric", "value"], rows)


def _suffix(index: int) -> str:
    """第一个符号对不加后缀，其余加 _<序号>"""
    return "" if index == 0 else f"_{index}"


def render_plotdata(report: RunReport) -> dict[str, str | bytes]:
    """生成 plotdata 目录下的文件内容，键为文件名"""
    files: dict[str, str | bytes] = {}

    for scenario in report.results:
        sid: str = scenario.id
        for result in scenario.results:
            if result.failed:
                continue

            files.update(_plot_files(sid, result))

            for name, content in result.artifacts.items():
                files[name] = content

    return files


def _plot_files(sid: str, result: CheckResult) -> dict[str, str]:
    """按检查类型生成绘图数据"""
    data: dict[str, Any] = result.data
    files: dict[str, str] = {}

    if result.check == Check.VERDICT:
        rows: list[tuple[Any, ...]] = []
        for entry in data["pairs"]:
            profile: dict[str, list] = entry["profile"]
            rows.extend((entry["pair"], r, s) for r, s in zip(profile["radii"], profile["sup"]))
        files[f"annulus_{sid}.csv"] = _to_csv(["pair", "radius", "sup"], rows)

    elif result.check == Check.SVALS:
        for entry in data["pairs"]:
            values: list[Any] = entry["values"]
            name: str = f"svals_{sid}{_suffix(entry['pair'])}.csv"
            files[name] = _to_csv(["index", "value"], enumerate(values))

    elif result.check == Check.SPECTRUM:
        rows = []
        for sample in data["samples"]:
            lam: list[float] = sample["lambda"]
            rows.extend((lam[0], lam[1], n, v) for n, v in zip(data["dims"], sample["trajectory"]))
        files[f"resolvent_{sid}.csv"] = _to_csv(["lambda_re", "lambda_im", "dim", "norm"], rows)

    elif result.check == Check.BEREZIN:
        rows = []
        for entry in data["pairs"]:
            for zeta, value in zip(data["zetas"], entry.get("growth", [])):
                rows.append((entry["pair"], zeta, value))
        files[f"berezin_{sid}.csv"] = _to_csv(["pair", "zeta", "value"], rows)

    elif result.check == Check.SCHATTEN:
        rows = []
        for entry in data["pairs"]:
            rows.extend((entry["pair"], entry["p"], n, v) for n, v in zip(entry["dims"], entry["norms"]))
        files[f"schatten_{sid}.csv"] = _to_csv(["pair", "p", "dim", "norm"], rows)

    return files


def emit(report: RunReport, formats: Iterable[OutputFormat], out_dir: str | Path) -> list[Path]:
    """
    按格式写出报告文件，返回写出的路径。

    每个文件先写临时文件再重命名；文件系统错误以 OSError 抛出，消息带路径。
    """
    folder: Path = Path(out_dir)
    selected: set[OutputFormat] = set(formats)
    written: list[Path] = []

    if OutputFormat.JSON in selected:
        path: Path = folder.joinpath(REPORT_FILENAME)
        write_atomic(path, render_json(report))
        written.append(path)

    if OutputFormat.CSV in selected:
        path = folder.joinpath(TABLE_FILENAME)
        write_atomic(path, render_table(report))
        written.append(path)

    if OutputFormat.PLOTDATA in selected:
        plot_folder: Path = folder.joinpath(PLOT_FOLDER)
        for name, content in sorted(render_plotdata(report).items()):
            path = plot_folder.joinpath(name)
            write_atomic(path, content)
            written.append(path)

    return written


def parse_formats(text: str) -> list[OutputFormat]:
    """解析逗号分隔的格式列表，例如 "json,csv" """
    formats: list[OutputFormat] = []
    for item in text.split(","):
        name: str = item.strip().lower()
        if not name:
            continue
        try:
            fmt: OutputFormat = OutputFormat(name)
        except ValueError:
            choices: str = ", ".join(f.value for f in OutputFormat)
            raise ValueError(f"未知的输出格式 {name!r}，可选: {choices}") from None
        if fmt not in formats:
            formats.append(fmt)

    if not formats:
        raise ValueError("至少需要指定一种输出格式")
    return formats

"""CLI 渲染器：把运行报告渲染为终端表格"""

from pathlib import Path

from rich.console import Console
from rich.table import Table

from ..object import RunReport, ScenarioResult


def _mark(flag: bool | None) -> str:
    """一致性标志的显示文本"""
    if flag is None:
        return "[dim]-[/dim]"
    return "[green]✓[/green]" if flag else "[bold red]✗[/bold red]"


class Renderer:
    """CLI 渲染器"""

    def __init__(self, quiet: bool = False) -> None:
        """构造函数"""
        self.console: Console = Console()
        self.quiet: bool = quiet

    def show_report(self, report: RunReport) -> None:
        """显示场景汇总表与错误明细"""
        if self.quiet:
            return

        table: Table = Table(title=f"focklab {report.version}", title_style="bold blue")
        table.add_column("场景", style="cyan")
        table.add_column("检查")
        table.add_column("一致", justify="center")
        table.add_column("耗时(s)", justify="right", style="dim")

        for result in report.results:
            timing: dict[str, float] = report.timings.get(result.id, {})
            checks: str = " ".join(self._format_check(result, name) for name in timing)
            table.add_row(
                result.id,
                checks,
                _mark(result.agreement),
                f"{sum(timing.values()):.2f}",
            )

        self.console.print(table)

        for result in report.results:
            for check in result.errors:
                self.show_error(f"  ✗ {result.id}/{check.check.value}: {check.error}")

        if report.passed:
            self.console.print("  全部检查一致", style="bold green")
        else:
            self.console.print("  存在不一致或出错的检查", style="bold red")

    def _format_check(self, result: ScenarioResult, name: str) -> str:
        """单项检查的简写"""
        for check in result.results:
            if check.check.value == name:
                if check.failed:
                    return f"[red]{name}![/red]"
                if check.agreement is False:
                    return f"[red]{name}[/red]"
                return name
        return name

    def show_written(self, paths: list[Path]) -> None:
        """显示写出的文件"""
        for path in paths:
            self.console.print(f"  → {path}", style="dim")

    def show_config_error(self, problems: list[str]) -> None:
        """显示配置错误列表"""
        self.console.print("配置无效:", style="bold red")
        for problem in problems:
            self.console.print(f"  {problem}", style="red", markup=False)

    def show_info(self, text: str) -> None:
        """显示提示信息"""
        self.console.print(text, style="dim")

    def show_error(self, text: str) -> None:
        """显示错误信息"""
        self.console.print(text, style="bold red", markup=False)

"""CLI 配置管理：cli_setting.json 中的默认参数"""

from ..object import Scenario, ScenarioConfig
from ..utility import load_json, save_json


CLI_SETTING_FILENAME: str = "cli_setting.json"

# 可持久化的配置项及默认值
CLI_DEFAULTS: dict[str, str] = {
    "jobs": "1",
    "formats": "json,csv,plotdata",
    "eps": "",
}


def load_cli_setting() -> dict[str, str]:
    """加载 CLI 配置"""
    return load_json(CLI_SETTING_FILENAME)


def save_cli_setting(setting: dict[str, str]) -> None:
    """保存 CLI 配置"""
    save_json(CLI_SETTING_FILENAME, setting)


def get_cli_value(key: str, default: str = "") -> str:
    """获取 CLI 配置项"""
    setting: dict[str, str] = load_cli_setting()
    return setting.get(key, CLI_DEFAULTS.get(key, default))


def set_cli_value(key: str, value: str) -> None:
    """设置 CLI 配置项并持久化"""
    if key not in CLI_DEFAULTS:
        choices: str = ", ".join(CLI_DEFAULTS)
        raise ValueError(f"未知的配置项 {key!r}，可选: {choices}")

    setting: dict[str, str] = load_cli_setting()
    setting[key] = value
    save_cli_setting(setting)


def get_jobs() -> int:
    """默认工作线程数"""
    text: str = get_cli_value("jobs")
    try:
        return max(1, int(text))
    except ValueError:
        raise ValueError(f"cli_setting.json 中 jobs 必须为整数，收到 {text!r}") from None


def apply_eps(config: ScenarioConfig, text: str) -> ScenarioConfig:
    """用给定的 eps 覆盖所有场景的积分精度，text 为空时原样返回"""
    if not text:
        return config

    eps: float = float(text)
    scenarios: list[Scenario] = [
        s.model_copy(update={"settings": s.settings.model_copy(update={"eps": eps})})
        for s in config.scenarios
    ]
    return ScenarioConfig.model_validate({"scenarios": [s.model_dump() for s in scenarios]})

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np


DEFAULT_MAX_DIM: int = 512


def _get_runtime_dir(temp_name: str) -> tuple[Path, Path]:
    """获取运行时目录"""
    cwd: Path = Path.cwd()
    temp_path: Path = cwd.joinpath(temp_name)

    # 如果.focklab目录存在，则使用它作为运行时目录
    if temp_path.exists():
        return cwd, temp_path

    # 否则使用系统用户目录
    home_path: Path = Path.home()
    temp_path = home_path.joinpath(temp_name)

    if not temp_path.exists():
        temp_path.mkdir()

    return home_path, temp_path


# 获取运行目录
WORKING_DIR, TEMP_DIR = _get_runtime_dir(".focklab")


def get_file_path(filename: str) -> Path:
    """获取临时文件路径"""
    return TEMP_DIR.joinpath(filename)


def get_folder_path(folder_name: str) -> Path:
    """获取临时文件夹路径"""
    folder_path: Path = TEMP_DIR.joinpath(folder_name)
    if not folder_path.exists():
        folder_path.mkdir()
    return folder_path


def load_json(filename: str) -> dict:
    """加载运行时目录下的JSON文件"""
    filepath: Path = get_file_path(filename)

    if filepath.exists():
        with open(filepath, encoding="UTF-8") as f:
            data: dict = json.load(f)
        return data
    else:
        return {}


def save_json(filename: str, data: dict | list) -> None:
    """保存JSON文件到运行时目录"""
    write_atomic(get_file_path(filename), dump_json(data))


def read_text_file(path: str | Path) -> str:
    """读取文本文件，使用 UTF-8 编码。"""
    return Path(path).read_text(encoding="utf-8")


def write_atomic(path: str | Path, content: str | bytes) -> None:
    """
    先写临时文件再重命名，保证目标文件要么完整要么不存在。

    出错时抛出 OSError，消息中带有目标路径。
    """
    target: Path = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    data: bytes = content.encode("utf-8") if isinstance(content, str) else content

    fd, temp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(temp_name, target)
    except OSError as e:
        Path(temp_name).unlink(missing_ok=True)
        raise OSError(f"写入文件失败: {target} ({e})") from e


def to_jsonable(value: Any) -> Any:
    """
    把检查结果中的数值转换为可写入 JSON 的结构。

    复数转为 [re, im]，+∞ 转为 "inf"，numpy 标量和数组转为 Python 内置类型。
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]

    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]

    if isinstance(value, (bool, np.bool_)):
        return bool(value)

    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]

    if isinstance(value, (float, np.floating)):
        number: float = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number

    if isinstance(value, np.integer):
        return int(value)

    return value


def dump_json(data: Any) -> str:
    """固定格式的 JSON 文本，相同输入得到逐字节相同的输出"""
    return json.dumps(data, indent=4, ensure_ascii=False, sort_keys=False) + "\n"


def get_max_dim() -> int:
    """截断维数上限，读取环境变量 FOCKLAB_MAX_DIM"""
    text: str | None = os.environ.get("FOCKLAB_MAX_DIM")
    if not text:
        return DEFAULT_MAX_DIM

    try:
        value: int = int(text)
    except ValueError:
        raise ValueError(f"FOCKLAB_MAX_DIM 必须为整数，收到 {text!r}") from None

    if value < 4:
        raise ValueError(f"FOCKLAB_MAX_DIM 不能小于 4，收到 {value}")

    return value

"""
项目配置模块

优先从环境变量读取，其次使用默认值。
"""
import os

from fsdfi_errors import ConfigError

TOOL_NAME = "fsdfi"
TOOL_VERSION = "0.4.0"
# tables.json 的结构版本，修改字段时递增
TABLE_SCHEMA_VERSION = "1"

# 解释器指令预算默认值, 环境变量 FSDFI_BUDGET 在 budget_from_env 中读取
FSDFI_BUDGET = 10**8

# 模拟内存 arena 配置
FSDFI_ARENA_SIZE = int(os.environ.get("FSDFI_ARENA_SIZE", str(1 << 20)))
FSDFI_MIN_CLASS = int(os.environ.get("FSDFI_MIN_CLASS", "16"))
FSDFI_MAX_CLASS = int(os.environ.get("FSDFI_MAX_CLASS", "4096"))

# 语料并发执行数
FSDFI_MAX_CONCURRENT_CASES = int(os.environ.get("FSDFI_MAX_CONCURRENT_CASES", "4"))

FSDFI_CORPUS_DIR = os.environ.get(
    "FSDFI_CORPUS_DIR",
    os.path.join(
        os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
        "files",
        "corpus",
    ),
)

# 日志配置
FSDFI_LOG_DIR = os.environ.get(
    "FSDFI_LOG_DIR",
    os.path.join(
        os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
        "logs",
    ),
)
FSDFI_LOG_LEVEL = os.environ.get("FSDFI_LOG_LEVEL", "INFO")
FSDFI_CONSOLE_LEVEL = os.environ.get("FSDFI_CONSOLE_LEVEL", "WARNING")


def budget_from_env(default: int = FSDFI_BUDGET) -> int:
    """
    重新读取 FSDFI_BUDGET（测试或 CLI 运行期间可能被修改）

    Returns:
        int: 指令预算
    """
    value = os.environ.get("FSDFI_BUDGET")
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"FSDFI_BUDGET must be an integer, got '{value}'") from None

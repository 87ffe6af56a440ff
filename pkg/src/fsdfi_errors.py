"""
前端, 分析, 运行时与评测共用的异常层次

每个异常可携带源码位置; 位置已知时 ``str(err)`` 输出 ``path:line:col: message``。
"""

from typing import Optional


class FsdfiError(Exception):
    """工具链所有异常的基类"""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        path: str = "",
    ):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        where = f"{self.path}:" if self.path else ""
        col = f":{self.column}" if self.column is not None else ""
        return f"{where}{self.line}{col}: {self.message}"


class ParseError(FsdfiError):
    pass


class MiniCTypeError(FsdfiError):
    pass


class LayoutError(FsdfiError):
    pass


class LoweringError(FsdfiError):
    pass


class IRError(FsdfiError):
    pass


class ConfigError(FsdfiError):
    pass


class AllocFailure(FsdfiError):
    pass


class FreeError(FsdfiError):
    pass


class MemoryFault(FsdfiError):
    def __init__(self, message: str, address: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.address = address


class ResourceLimit(FsdfiError):
    pass


class TableMismatch(FsdfiError):
    pass


class CorpusError(FsdfiError):
    def __init__(self, message: str, problems: Optional[list] = None):
        super().__init__(message)
        self.problems = list(problems or [])

    def __str__(self) -> str:
        if not self.problems:
            return self.message
        return self.message + "\n" + "\n".join(f"  - {p}" for p in self.problems)


class MetricsError(FsdfiError):
    pass


class ReportFormatError(FsdfiError):
    pass

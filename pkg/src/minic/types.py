"""
MiniC 类型模型

int 4 字节, char 1 字节, 指针 8 字节; 结构体按名称引用, 数组为定长。
"""

from dataclasses import dataclass

INT_SIZE = 4
CHAR_SIZE = 1
POINTER_SIZE = 8


@dataclass(frozen=True)
class CType:
    def is_integral(self) -> bool:
        return False

    def is_pointer(self) -> bool:
        return False

    def is_scalar(self) -> bool:
        """int / char / 指针: 可放入寄存器的值"""
        return self.is_integral() or self.is_pointer()


@dataclass(frozen=True)
class IntType(CType):
    def is_integral(self) -> bool:
        return True

    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class CharType(CType):
    def is_integral(self) -> bool:
        return True

    def __str__(self) -> str:
        return "char"


@dataclass(frozen=True)
class VoidType(CType):
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class PointerType(CType):
    target: CType

    def is_pointer(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"{self.target}*"


@dataclass(frozen=True)
class StructType(CType):
    name: str

    def __str__(self) -> str:
        return f"struct {self.name}"


@dataclass(frozen=True)
class ArrayType(CType):
    element: CType
    length: int

    def __str__(self) -> str:
        base, dims = array_dims(self)
        return f"{base}" + "".join(f"[{n}]" for n in dims)


INT = IntType()
CHAR = CharType()
VOID = VoidType()


def array_dims(ctype: CType) -> tuple:
    """``int[2][3]`` 拆分为 (int, [2, 3])"""
    dims = []
    while isinstance(ctype, ArrayType):
        dims.append(ctype.length)
        ctype = ctype.element
    return ctype, dims


def scalar_size(ctype: CType) -> int:
    if isinstance(ctype, IntType):
        return INT_SIZE
    if isinstance(ctype, CharType):
        return CHAR_SIZE
    if isinstance(ctype, PointerType):
        return POINTER_SIZE
    raise ValueError(f"{ctype} is not a scalar type")


def render_declaration(ctype: CType, name: str) -> str:
    """C 声明文本, 如 ``struct S* p`` 或 ``int a[4]``"""
    base, dims = array_dims(ctype)
    stars = 0
    while isinstance(base, PointerType):
        stars += 1
        base = base.target
    if isinstance(base, ArrayType):
        raise ValueError(f"pointer to array is not expressible in MiniC: {ctype}")
    text = f"{base} {'*' * stars}{name}" if name else f"{base}{'*' * stars}"
    return text + "".join(f"[{n}]" for n in dims)


# ---------------------------------------------------------------------------
# 值语义: 32 位补码整数, char 为有符号字节
# ---------------------------------------------------------------------------

INT_MIN = -(1 << 31)


def wrap32(value: int) -> int:
    return ((value - INT_MIN) % (1 << 32)) + INT_MIN


def wrap8(value: int) -> int:
    return ((value + 128) % 256) - 128


def narrow(value: int, ctype: CType) -> int:
    """赋值给 ``ctype`` 时的值转换"""
    if isinstance(ctype, CharType):
        return wrap8(value)
    if isinstance(ctype, IntType):
        return wrap32(value)
    return value


def c_divide(left: int, right: int) -> int:
    """C 除法: 向零截断后回绕到 32 位"""
    quotient = abs(left) // abs(right)
    if (left < 0) != (right < 0):
        quotient = -quotient
    return wrap32(quotient)


def encode_scalar(value: int, ctype: CType) -> bytes:
    size = scalar_size(ctype)
    if isinstance(ctype, PointerType):
        return (value % (1 << 64)).to_bytes(size, "little", signed=False)
    return narrow(value, ctype).to_bytes(size, "little", signed=True)


def decode_scalar(raw: bytes, ctype: CType) -> int:
    return int.from_bytes(raw, "little", signed=not isinstance(ctype, PointerType))

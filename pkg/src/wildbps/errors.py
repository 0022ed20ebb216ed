"""引擎内所有异常的统一层次"""


class WildBpsError(Exception):
    """基类"""


class PartitionError(WildBpsError, ValueError):
    """非法的分拆，或尺寸不匹配"""


class VariableMismatchError(WildBpsError):
    """两个运算对象的变量对不同"""


class InexactDivision(WildBpsError, ArithmeticError):
    """exact_divide 得到非零余式"""


class EpsilonMismatchError(WildBpsError):
    """ε 指数不同的量不能相加"""


class LatticeError(WildBpsError):
    """需要整数指数的地方出现了半整数指数"""


class SeriesError(WildBpsError):
    """级数形状不符，或对常数项不为 1 的级数取对数"""


class ConsistencyError(WildBpsError):
    """运行期自检失败（两条计算路径不一致）"""

    def __init__(self, message: str, diff: dict | None = None):
        super().__init__(message)
        self.diff = diff or {}


class PreconditionError(WildBpsError, ValueError):
    """违反操作前置条件"""


class CacheError(WildBpsError):
    """缓存文件头损坏或版本不符"""

from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional, Dict, List, Tuple, Any
from datetime import datetime
from enum import Enum


class Command(str, Enum):
    """子命令枚举"""
    COMPUTE_Z = "compute-z"
    EXTRACT_BPS = "extract-bps"
    COMPARE_HMW = "compare-hmw"
    SELFTEST = "selftest"
    GOLDEN = "golden"


class Pipeline(str, Enum):
    """配分函数管线选择"""
    GW = "gw"
    REFINED = "refined"
    HMW = "hmw"
    BOTH = "both"


def _parse_ints(value: Any) -> List[int]:
    if isinstance(value, str):
        text = value.strip().strip("[]()")
        return [int(x) for x in text.split(",") if x.strip()]
    return [int(x) for x in value]


class JobConfig(BaseModel):
    """一次运行的完整配置，会原样嵌入每个输出文档"""
    command: Command = Field(..., description="子命令")
    g: int = Field(0, ge=0, description="亏格")
    n: List[int] = Field(default_factory=list, description="每个标记点的 n_a")
    l: List[int] = Field(default_factory=list, description="每个标记点的 ℓ_a")
    mu: Optional[List[List[int]]] = Field(None, description="目标分拆元组 μ_1..μ_m")
    r_max: Optional[int] = Field(None, ge=1, description="截断次数")
    cache_dir: Optional[str] = Field(None, description="表格缓存目录")
    output: Optional[str] = Field(None, description="输出文件，缺省写到标准输出")
    pipeline: Pipeline = Field(Pipeline.REFINED, description="管线选择")
    threads: int = Field(1, ge=1, description="工作线程数")
    sizes: str = Field("small", description="selftest 网格: small 或 large")
    golden: Optional[str] = Field(None, description="golden 文件路径")
    perturb: bool = Field(False, description="测试模式：扰动 ℍ 以检查差异报告")

    @field_validator("n", "l", mode="before")
    @classmethod
    def _ints(cls, value):
        return _parse_ints(value)

    @field_validator("mu", mode="before")
    @classmethod
    def _tuples(cls, value):
        if value is None or not isinstance(value, str):
            return value
        from .partitions import parse_tuple
        return [list(p) for p in parse_tuple(value)]

    @field_validator("sizes")
    @classmethod
    def _sizes(cls, value):
        if value not in ("small", "large"):
            raise ValueError(f"sizes 只能是 small 或 large: {value}")
        return value

    @model_validator(mode="after")
    def _check(self):
        if self.command in (Command.SELFTEST, Command.GOLDEN):
            return self
        if not self.n:
            raise ValueError("必须给出 n")
        if not self.l:
            self.l = [max(len(p), 1) for p in self.mu] if self.mu else [1] * len(self.n)
        if len(self.l) != len(self.n):
            raise ValueError(f"n 与 l 的长度不同: {self.n} / {self.l}")
        if any(x < 1 for x in self.n) or any(x < 1 for x in self.l):
            raise ValueError("n_a 与 ℓ_a 必须为正")
        if self.mu is not None:
            if len(self.mu) != len(self.n):
                raise ValueError(f"μ 元组长度 {len(self.mu)} 与 m = {len(self.n)} 不符")
            sizes = {sum(p) for p in self.mu}
            if len(sizes) != 1:
                raise ValueError(f"所有 |μ_a| 必须相等: {self.mu}")
            r = sizes.pop()
            if self.r_max is None:
                self.r_max = r
            if self.r_max < r:
                raise ValueError(f"r_max = {self.r_max} 小于 |μ_a| = {r}")
        if self.r_max is None:
            raise ValueError("必须给出 r_max 或 μ")
        return self


class CheckResult(BaseModel):
    """单项结构检验或恒等式检验的结果"""
    name: str = Field(..., description="检验名称")
    passed: bool = Field(..., description="是否通过")
    detail: Optional[str] = Field(None, description="说明或失败原因")
    informational: bool = Field(False, description="仅作记录，不计入失败数")


class CacheRecord(BaseModel):
    """缓存文件中的一条记录"""
    version: int = Field(..., description="缓存格式版本")
    kind: str = Field(..., description="表格种类")
    key: str = Field(..., description="规范键")
    value: str = Field(..., description="序列化的值")


class DocumentBase(BaseModel):
    engine: str = Field("wildbps", description="引擎名")
    version: str = Field(..., description="引擎版本")
    config: Dict[str, Any] = Field(..., description="产生本文档的配置")


class XSeriesTerm(BaseModel):
    exponents: List[List[int]] = Field(..., description="平衡的指数矩阵")
    coefficient: str = Field(..., description="规范化的有理函数文本")
    numerator: List[Tuple[int, int, str]] = Field(..., description="分子，加倍格指数")
    denominator: List[Tuple[int, int, str]] = Field(..., description="分母，加倍格指数")


class XSeriesDocument(DocumentBase):
    """截断级数的 JSON 形式"""
    variables: List[str] = Field(..., description="系数的名义变量")
    lattice: int = Field(2, description="指数均为加倍格整数")
    shape: List[int] = Field(..., description="每组变量数")
    r_max: int = Field(..., description="截断次数")
    terms: List[XSeriesTerm] = Field(default_factory=list)


class BpsDocument(DocumentBase):
    """BPS 多项式 P_{μ,n}(u,v)"""
    mu: List[List[int]] = Field(..., description="分拆元组")
    n: List[int] = Field(..., description="n_a")
    g: int = Field(..., description="亏格")
    d: int = Field(..., description="维数")
    terms: List[Tuple[int, int, str]] = Field(..., description="(u 指数, v 指数, 系数)")
    checks: List[CheckResult] = Field(default_factory=list)
    checks_failed: int = Field(0, description="未通过的检验数")
    failure: Optional[str] = Field(None, description="提取失败时的说明")


class Verdict(DocumentBase):
    """GV 与 HMW 两条管线的比较结果"""
    mu: List[List[int]] = Field(..., description="分拆元组")
    n: List[int] = Field(..., description="n_a")
    g: int = Field(..., description="亏格")
    verdict: str = Field(..., description="equal 或 diff")
    diff: List[Tuple[int, int, str, str]] = Field(
        default_factory=list, description="(a, b, GV 系数, HMW 系数)")
    checks: List[CheckResult] = Field(default_factory=list)


class IdentityResult(CheckResult):
    sizes: str = Field("", description="覆盖的尺寸")
    seconds: float = Field(0.0, description="耗时（秒）")


class SelftestReport(DocumentBase):
    """selftest 的逐项结果"""
    results: List[IdentityResult] = Field(default_factory=list)
    passed: bool = Field(..., description="全部通过")


class ErrorDocument(BaseModel):
    """写到标准错误的错误信息"""
    error_code: str = Field(..., description="错误代码")
    error_message: str = Field(..., description="错误消息")
    detail: Optional[Dict[str, Any]] = Field(None, description="详细信息")
    timestamp: datetime = Field(default_factory=datetime.now, description="时间戳")

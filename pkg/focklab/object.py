import math
from typing import Annotated, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    RootModel,
    WithJsonSchema,
    field_serializer,
    field_validator,
    model_validator,
)

from .constant import Check, DifferenceBranch, OperatorKind, Rule


def parse_complex(value: Any) -> complex:
    """将 [re, im] 二元组或实数/复数解析为 complex"""
    if isinstance(value, complex):
        return value

    if isinstance(value, bool):
        raise ValueError("复数不能为布尔值")

    if isinstance(value, (int, float)):
        return complex(value)

    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))

    raise ValueError(f"无法解析为复数: {value!r}，应为 [re, im]")


def dump_complex(value: complex) -> list[float]:
    """复数序列化为 [re, im]"""
    return [value.real, value.imag]


def dump_extended(value: float) -> float | str:
    """扩展实数序列化，+∞ 编码为字符串 "inf" """
    if math.isinf(value):
        return "inf"
    return value


# 复数在配置中写作实数或 [re, im]
COMPLEX_JSON_SCHEMA: dict[str, Any] = {
    "anyOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

ComplexValue = Annotated[
    complex,
    PlainValidator(parse_complex),
    PlainSerializer(dump_complex, return_type=list),
    WithJsonSchema(COMPLEX_JSON_SCHEMA),
]


class ComplexPolynomial(RootModel[tuple[ComplexValue, ...]]):
    """
    复系数多项式，下标 k 为 z^k 的系数。

    末尾的零系数在构造时被裁掉，零多项式对应空序列。
    """
    model_config = ConfigDict(frozen=True)

    root: tuple[ComplexValue, ...] = ()

    @field_validator("root", mode="after")
    @classmethod
    def _trim(cls, coeffs: tuple[complex, ...]) -> tuple[complex, ...]:
        """裁掉最高次的零系数"""
        end: int = len(coeffs)
        while end and coeffs[end - 1] == 0:
            end -= 1
        return tuple(coeffs[:end])

    @property
    def coeffs(self) -> tuple[complex, ...]:
        """系数序列"""
        return self.root

    def degree(self) -> int:
        """多项式次数，零多项式返回 -1（配合 is_zero 使用）"""
        return len(self.root) - 1

    def is_zero(self) -> bool:
        """是否为零多项式"""
        return not self.root

    def coefficient(self, k: int) -> complex:
        """z^k 的系数，越界时为 0"""
        if 0 <= k < len(self.root):
            return self.root[k]
        return 0j

    def evaluate(self, z: ArrayLike) -> NDArray[np.complex128]:
        """在 z 处求值，支持 numpy 数组"""
        points: NDArray[np.complex128] = np.asarray(z, dtype=np.complex128)
        if self.is_zero():
            return np.zeros_like(points)

        # Horner
        result: NDArray[np.complex128] = np.full_like(points, self.root[-1])
        for c in reversed(self.root[:-1]):
            result = result * points + c
        return result

    def __len__(self) -> int:
        return len(self.root)


class AffineMap(BaseModel):
    """仿射自映射 ψ(z) = a·z + b"""
    model_config = ConfigDict(frozen=True)

    a: ComplexValue = 1 + 0j
    b: ComplexValue = 0j

    @classmethod
    def identity(cls) -> "AffineMap":
        """恒等映射"""
        return cls(a=1, b=0)

    def evaluate(self, z: ArrayLike) -> NDArray[np.complex128]:
        """在 z 处求值"""
        return self.a * np.asarray(z, dtype=np.complex128) + self.b

    def to_polynomial(self) -> ComplexPolynomial:
        """转换为一次多项式"""
        return ComplexPolynomial((self.b, self.a))


class SymbolPair(BaseModel):
    """
    符号对 (g, ψ) 以及算子类型。

    ψ 一般为 AffineMap；为了能对非仿射 ψ 给出判定，也允许传入更高次的多项式。
    """
    model_config = ConfigDict(frozen=True)

    g: ComplexPolynomial
    psi: AffineMap | ComplexPolynomial = Field(default_factory=AffineMap.identity)
    kind: OperatorKind = OperatorKind.V

    @field_validator("kind")
    @classmethod
    def _check_kind(cls, kind: OperatorKind) -> OperatorKind:
        """符号对只描述 V 或 J 型算子"""
        if kind not in (OperatorKind.V, OperatorKind.J):
            raise ValueError(f"符号对的算子类型只能为 V 或 J，收到 {kind.value}")
        return kind

    @property
    def affine(self) -> AffineMap | None:
        """ψ 的仿射形式，非仿射时返回 None"""
        if isinstance(self.psi, AffineMap):
            return self.psi

        if self.psi.degree() > 1:
            return None

        return AffineMap(a=self.psi.coefficient(1), b=self.psi.coefficient(0))

    def psi_at(self, z: ArrayLike) -> NDArray[np.complex128]:
        """计算 ψ(z)"""
        return self.psi.evaluate(z)

    def with_symbol(self, g: ComplexPolynomial) -> "SymbolPair":
        """替换 g，保留 ψ 与类型"""
        return SymbolPair(g=g, psi=self.psi, kind=self.kind)


class ClassificationVerdict(BaseModel):
    """单个算子的判定结果"""
    bounded: bool
    compact: bool
    schatten_cutoff: float = Field(default=math.inf, ge=0)
    reasons: list[Rule] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ClassificationVerdict":
        """紧 ⇒ 有界；Schatten 阈值有限 ⇒ 紧"""
        if self.compact and not self.bounded:
            raise ValueError("紧算子必须有界")
        if math.isfinite(self.schatten_cutoff) and not self.compact:
            raise ValueError("Schatten 类算子必须是紧的")
        return self

    @field_serializer("schatten_cutoff")
    def _dump_cutoff(self, value: float) -> float | str:
        return dump_extended(value)

    def in_schatten(self, p: float) -> bool:
        """算子是否属于 S_p（阈值本身不包含在内）"""
        return p > self.schatten_cutoff


class CancellationEvidence(BaseModel):
    """差算子抵消分支的证据"""
    psi_equal: bool
    limit: float

    @field_serializer("limit")
    def _dump_limit(self, value: float) -> float | str:
        return dump_extended(value)


class DifferenceVerdict(BaseModel):
    """两个算子之差的判定结果"""
    compact: bool
    schatten_for_p: bool | None = None
    branch: DifferenceBranch
    cancellation_evidence: CancellationEvidence | None = None

    @model_validator(mode="after")
    def _check_branch(self) -> "DifferenceVerdict":
        """抵消分支要求 ψ1 = ψ2"""
        if self.branch == DifferenceBranch.CANCELLATION:
            if not self.cancellation_evidence or not self.cancellation_evidence.psi_equal:
                raise ValueError("抵消分支要求 ψ1 与 ψ2 完全相同")
        return self


class LrNorm(BaseModel):
    """判据函数的 L^r 范数（r 次方积分）"""
    finite: bool
    value: float | None = None


class NumericSettings(BaseModel):
    """场景的数值参数"""
    eps: float = Field(default=1e-10, gt=0, le=1e-2)
    dims: list[int] = Field(default_factory=lambda: [32, 64, 128], min_length=3)
    radii: list[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0], min_length=3)
    tail_fraction: float = Field(default=0.1, gt=0, lt=1)
    tol: float = Field(default=0.2, gt=0)
    growth_tol: float = Field(default=0.05, gt=0)
    # Berezin 下界的采样点 ζ
    points: list[ComplexValue] = Field(default_factory=lambda: [1 + 0j, 2 + 0j, 2 + 1j, 4j])
    # 核函数范数的采样点 w
    kernel_points: list[ComplexValue] = Field(default_factory=lambda: [0j, 1 + 0j, 2j, 2 + 2j, 3 + 0j])
    lambdas: list[ComplexValue] = Field(default_factory=lambda: [1.5 + 0j, 2.5 + 0j])

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims: list[int]) -> list[int]:
        """维数序列需严格递增且不小于 4"""
        if any(n < 4 for n in dims):
            raise ValueError("截断维数不能小于 4")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError("截断维数需严格递增")
        return dims

    @field_validator("lambdas")
    @classmethod
    def _check_lambdas(cls, lambdas: list[complex]) -> list[complex]:
        """截断矩阵都是幂零的，λ = 0 没有探测意义"""
        if any(lam == 0 for lam in lambdas):
            raise ValueError("预解式探测点 λ 不能为 0")
        return lambdas

    @field_validator("radii")
    @classmethod
    def _check_radii(cls, radii: list[float]) -> list[float]:
        """半径序列需严格递增"""
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("半径序列需严格递增")
        return radii


class Scenario(BaseModel):
    """一个验证场景"""
    id: str = Field(min_length=1)
    pairs: list[SymbolPair] = Field(min_length=1, max_length=2)
    p: float = Field(default=2.0, gt=0)
    q: float = Field(default=2.0, gt=0)
    checks: list[Check] = Field(min_length=1)
    settings: NumericSettings = Field(default_factory=NumericSettings)


class ScenarioConfig(BaseModel):
    """场景配置文件"""
    scenarios: list[Scenario]

    @field_validator("scenarios")
    @classmethod
    def _check_scenarios(cls, scenarios: list[Scenario]) -> list[Scenario]:
        """场景列表非空，且编号唯一"""
        if not scenarios:
            raise ValueError("no scenarios")

        seen: set[str] = set()
        for scenario in scenarios:
            if scenario.id in seen:
                raise ValueError(f"场景编号重复: {scenario.id}")
            seen.add(scenario.id)

        return scenarios


class CheckResult(BaseModel):
    """单项检查的结果"""
    check: Check
    data: dict[str, Any] = Field(default_factory=dict)
    agreement: bool | None = None
    error: str = ""
    # 二进制导出（矩阵），不进入 report.json
    artifacts: dict[str, bytes] = Field(default_factory=dict, exclude=True, repr=False)

    @property
    def failed(self) -> bool:
        """是否出错"""
        return bool(self.error)


class ScenarioResult(BaseModel):
    """单个场景的全部检查结果"""
    id: str
    results: list[CheckResult] = Field(default_factory=list)
    agreement: bool | None = None

    @property
    def errors(self) -> list[CheckResult]:
        """出错的检查"""
        return [r for r in self.results if r.failed]


class RunReport(BaseModel):
    """一次运行的汇总报告"""
    version: str
    results: list[ScenarioResult] = Field(default_factory=list)
    # 墙钟耗时，不写入 report.json
    timings: dict[str, dict[str, float]] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """全部一致且无错误"""
        for result in self.results:
            if result.agreement is False or result.errors:
                return False
        return True

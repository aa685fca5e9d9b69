"""
Fock 空间标准正交基 e_n(z) = z^n/√(n!) 下的截断矩阵。

矩阵第 n 列为 T e_n 的基系数，逐列精确构造：
    ∫_0^z e_k = e_{k+1}/√(k+1)
    e_m·z^j = √((m+1)…(m+j))·e_{m+j}
    e_n∘(az+b) = Σ_m C(n,m)·a^m·b^{n−m}·√(m!/n!)·e_m

列向量先完整计算再截去第 N 行以后的部分，因此 N×N 矩阵恰为 2N×2N 矩阵的左上角。
"""
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .constant import OperatorKind
from .object import AffineMap, ComplexPolynomial, SymbolPair
from .symbols import derivative
from .utility import get_max_dim, to_jsonable, write_atomic


# 非零奇异值的相对阈值
ZERO_TOL: float = 1e-12

# JSON 导出的最大维数
JSON_MAX_DIM: int = 32


@dataclass
class TruncatedOperator:
    """N×N 截断矩阵，entries[m, n] = ⟨T e_n, e_m⟩"""

    entries: NDArray[np.complex128]
    kind: OperatorKind
    pair: SymbolPair | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"截断矩阵必须为方阵，收到形状 {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("截断矩阵含有非有限元素")

    @property
    def dim(self) -> int:
        """维数 N"""
        return int(self.entries.shape[0])

    def to_dict(self) -> dict[str, Any]:
        """元数据"""
        data: dict[str, Any] = {
            "dim": self.dim,
            "kind": self.kind.value,
            "label": self.label,
        }
        if self.pair is not None:
            data["pair"] = self.pair.model_dump(mode="json")
        return data


@dataclass
class SingularSpectrum:
    """降序排列的奇异值"""

    values: NDArray[np.float64] = field(repr=False)
    source_dim: int

    def __post_init__(self) -> None:
        if np.any(self.values < 0) or np.any(np.diff(self.values) > 0):
            raise ValueError("奇异值必须非负且降序排列")

    @property
    def largest(self) -> float:
        """最大奇异值，即截断矩阵的算子范数"""
        return float(self.values[0]) if self.values.size else 0.0

    def nonzero(self) -> NDArray[np.float64]:
        """超过相对阈值的奇异值"""
        threshold: float = ZERO_TOL * max(1.0, self.largest)
        return self.values[self.values > threshold]

    def schatten(self, p: float) -> float:
        """(Σ s_k^p)^{1/p}"""
        if p <= 0:
            raise ValueError(f"Schatten 指数必须为正数，收到 {p}")
        total: float = float(np.sum(self.values**p))
        return total ** (1 / p)

    def to_rows(self) -> list[tuple[int, float]]:
        """(序号, 奇异值) 行，用于 CSV 导出"""
        return [(i, float(s)) for i, s in enumerate(self.values)]


@dataclass
class ProxyEvidence:
    """数值判据的证据轨迹"""

    holds: bool
    dims: list[int]
    trajectory: list[float]
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "dims": self.dims,
            "trajectory": self.trajectory,
            **self.detail,
        }


OperatorSource = SymbolPair | Callable[[int], TruncatedOperator]


def _check_dim(n: int) -> None:
    """检查截断维数"""
    if n < 4:
        raise ValueError(f"截断维数不能小于 4，收到 {n}")

    max_dim: int = get_max_dim()
    if n > max_dim:
        raise ValueError(f"截断维数 {n} 超过上限 {max_dim}（FOCKLAB_MAX_DIM）")


def _require_affine(pair: SymbolPair) -> AffineMap:
    affine: AffineMap | None = pair.affine
    if affine is None:
        raise ValueError("截断矩阵只支持仿射 ψ")
    return affine


def compose_basis(n: int, m: AffineMap, size: int) -> NDArray[np.complex128]:
    """
    e_n∘(az+b) 在基 {e_k} 下的系数，长度为 size。

    系数以对数模长加相位的形式组装，避免阶乘溢出。
    """
    column: NDArray[np.complex128] = np.zeros(size, dtype=np.complex128)
    a: complex = complex(m.a)
    b: complex = complex(m.b)

    if b == 0:
        if n < size:
            column[n] = a**n
        return column

    if a == 0:
        column[0] = np.exp(n * np.log(abs(b)) - 0.5 * gammaln(n + 1) + 1j * n * np.angle(b))
        return column

    k: NDArray[np.int64] = np.arange(min(n + 1, size))
    log_mag: NDArray[np.float64] = (
        0.5 * gammaln(n + 1)
        - 0.5 * gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * math.log(abs(a))
        + (n - k) * math.log(abs(b))
    )
    phase: NDArray[np.float64] = k * np.angle(a) + (n - k) * np.angle(b)
    column[: k.size] = np.exp(log_mag + 1j * phase)
    return column


def multiply_basis(v: NDArray[np.complex128], h: ComplexPolynomial) -> NDArray[np.complex128]:
    """基系数向量乘以多项式 h，超出长度的部分舍弃"""
    size: int = v.size
    result: NDArray[np.complex128] = np.zeros(size, dtype=np.complex128)
    m: NDArray[np.int64] = np.arange(size)

    for j, c in enumerate(h.coeffs):
        if c == 0 or j >= size:
            continue
        # √((m+1)…(m+j))，按整数乘积开方
        factor: NDArray[np.float64] = np.ones(size - j)
        for i in range(1, j + 1):
            factor = factor * (m[: size - j] + i)
        result[j:] += c * np.sqrt(factor) * v[: size - j]

    return result


def integrate_basis(v: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """从 0 出发的路径积分：e_k ↦ e_{k+1}/√(k+1)"""
    result: NDArray[np.complex128] = np.zeros_like(v)
    k: NDArray[np.int64] = np.arange(v.size - 1)
    result[1:] = v[:-1] / np.sqrt(k + 1)
    return result


def _column(kind: OperatorKind, pair: SymbolPair, affine: AffineMap, n: int, size: int) -> NDArray[np.complex128]:
    """按算子类型计算第 n 列（长度 size，尚未截断）"""
    if kind == OperatorKind.V:
        return integrate_basis(multiply_basis(compose_basis(n, affine, size), derivative(pair.g)))

    if kind == OperatorKind.J:
        if n == 0:
            return np.zeros(size, dtype=np.complex128)
        composed: NDArray[np.complex128] = math.sqrt(n) * compose_basis(n - 1, affine, size)
        return integrate_basis(multiply_basis(composed, pair.g))

    if kind == OperatorKind.C:
        return compose_basis(n, affine, size)

    unit: NDArray[np.complex128] = np.zeros(size, dtype=np.complex128)
    unit[n] = 1
    return multiply_basis(unit, pair.g)


def build(pair: SymbolPair, n: int, kind: OperatorKind | None = None) -> TruncatedOperator:
    """
    构造截断矩阵。

    kind 缺省时取 pair.kind；传入 C 时按 pair.psi 构造复合算子，传入 M 时按 pair.g 构造乘法算子。
    """
    _check_dim(n)
    kind = kind or pair.kind
    affine: AffineMap = _require_affine(pair) if kind != OperatorKind.M else AffineMap.identity()

    # 列支撑最多下移 deg g + 1 行
    size: int = n + max(pair.g.degree(), 0) + 2

    entries: NDArray[np.complex128] = np.zeros((n, n), dtype=np.complex128)
    for col in range(n):
        entries[:, col] = _column(kind, pair, affine, col, size)[:n]

    return TruncatedOperator(entries=entries, kind=kind, pair=pair, label=f"{kind.value}[{n}]")


def build_composition(psi: AffineMap, n: int) -> TruncatedOperator:
    """复合算子 C_ψ 的截断矩阵"""
    pair: SymbolPair = SymbolPair(g=ComplexPolynomial((1,)), psi=psi, kind=OperatorKind.J)
    return build(pair, n, OperatorKind.C)


def build_multiplication(g: ComplexPolynomial, n: int) -> TruncatedOperator:
    """乘法算子 M_g 的截断矩阵"""
    return build(SymbolPair(g=g), n, OperatorKind.M)


def difference(t1: TruncatedOperator, t2: TruncatedOperator) -> TruncatedOperator:
    """两个同维截断矩阵之差"""
    if t1.dim != t2.dim:
        raise ValueError(f"维数不一致: {t1.dim} 与 {t2.dim}")
    return TruncatedOperator(
        entries=t1.entries - t2.entries,
        kind=t1.kind,
        label=f"{t1.label} - {t2.label}",
    )


def parts_identity_residual(g: ComplexPolynomial, n: int, relative: bool = True) -> float:
    """
    分部积分恒等式 V_g + J_g = M_g − R 的残差，R e_0 = g(0)·e_0。

    残差取 V_g + J_g − M_g + R 在左上 (N−d)×(N−d) 块上的最大模。
    relative 为 True（默认）时返回相对残差，即除以 max(1, 该块上 M_g 的最大模)；
    为 False 时返回未归一化的最大模。
    """
    degree: int = max(g.degree(), 0)
    if n <= degree + 2:
        raise ValueError(f"维数 {n} 必须大于 deg g + 2 = {degree + 2}")

    if g.is_zero():
        return 0.0

    pair: SymbolPair = SymbolPair(g=g)
    v: NDArray[np.complex128] = build(pair, n, OperatorKind.V).entries
    j: NDArray[np.complex128] = build(pair, n, OperatorKind.J).entries
    m: NDArray[np.complex128] = build(pair, n, OperatorKind.M).entries

    block: int = n - degree
    total: NDArray[np.complex128] = v + j - m
    total[0, 0] += g.coefficient(0)

    residual: float = float(np.max(np.abs(total[:block, :block])))
    if not relative:
        return residual

    scale: float = max(1.0, float(np.max(np.abs(m[:block, :block]))))
    return residual / scale


def singular_values(t: TruncatedOperator) -> SingularSpectrum:
    """完整 SVD，奇异值降序；不收敛时抛出 LinAlgError"""
    values: NDArray[np.float64] = np.linalg.svd(t.entries, compute_uv=False)
    return SingularSpectrum(values=np.asarray(values, dtype=np.float64), source_dim=t.dim)


def schatten_norm(t: TruncatedOperator | SingularSpectrum, p: float) -> float:
    """截断谱上的 Schatten 范数，是真实范数的下估计，随 N 单调不减"""
    if p <= 0:
        raise ValueError(f"Schatten 指数必须为正数，收到 {p}")

    spectrum: SingularSpectrum = t if isinstance(t, SingularSpectrum) else singular_values(t)
    return spectrum.schatten(p)


def _builder(source: OperatorSource) -> Callable[[int], TruncatedOperator]:
    if isinstance(source, SymbolPair):
        pair: SymbolPair = source
        return lambda n: build(pair, n)
    return source


def _check_dims(dims: list[int] | tuple[int, ...]) -> list[int]:
    ladder: list[int] = list(dims)
    if len(ladder) < 3:
        raise ValueError("维数序列至少需要 3 个")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("维数序列需严格递增")
    return ladder


def _spectra(source: OperatorSource, dims: list[int]) -> list[SingularSpectrum]:
    make: Callable[[int], TruncatedOperator] = _builder(source)
    return [singular_values(make(n)) for n in dims]


def boundedness_signature(
    source: OperatorSource,
    dims: list[int] | tuple[int, ...],
    growth_tol: float = 0.05,
    spectra: list[SingularSpectrum] | None = None,
) -> ProxyEvidence:
    """最大奇异值在最后一次加密时增长不超过 growth_tol 视为有界（0/0 视为稳定）"""
    ladder: list[int] = _check_dims(dims)
    spectra = spectra or _spectra(source, ladder)

    norms: list[float] = [s.largest for s in spectra]
    previous, last = norms[-2], norms[-1]
    if previous == 0:
        stable: bool = last == 0
    else:
        stable = last / previous < 1 + growth_tol

    return ProxyEvidence(holds=stable, dims=ladder, trajectory=norms)


def compactness_proxy(
    source: OperatorSource,
    dims: list[int] | tuple[int, ...],
    tail_fraction: float = 0.1,
    tol: float = 0.2,
    growth_tol: float = 0.05,
    spectra: list[SingularSpectrum] | None = None,
) -> ProxyEvidence:
    """
    紧性的数值代理。

    要求有界签名稳定；在每个维数 N 上取谱尾部 ⌈tail_fraction·N⌉ 个奇异值（低于相对阈值的记为 0），
    尾部起点处的分位值沿维数序列不增，且最大维数下尾部最小的非零奇异值小于 tol。
    """
    if not 0 < tail_fraction < 1:
        raise ValueError(f"tail_fraction 必须位于 (0, 1)，收到 {tail_fraction}")

    ladder: list[int] = _check_dims(dims)
    spectra = spectra or _spectra(source, ladder)

    bounded: ProxyEvidence = boundedness_signature(source, ladder, growth_tol, spectra)

    quantiles: list[float] = []
    tails: list[NDArray[np.float64]] = []
    for spectrum in spectra:
        values: NDArray[np.float64] = spectrum.values.copy()
        values[values <= ZERO_TOL * max(1.0, spectrum.largest)] = 0.0

        count: int = math.ceil(tail_fraction * values.size)
        tail: NDArray[np.float64] = values[values.size - count:]
        tails.append(tail)
        quantiles.append(float(tail[0]))

    non_increasing: bool = all(b <= a + ZERO_TOL for a, b in zip(quantiles, quantiles[1:]))

    last_tail: NDArray[np.float64] = tails[-1]
    positive: NDArray[np.float64] = last_tail[last_tail > 0]
    tail_min: float = float(positive.min()) if positive.size else 0.0

    holds: bool = bounded.holds and non_increasing and tail_min < tol
    return ProxyEvidence(
        holds=holds,
        dims=ladder,
        trajectory=quantiles,
        detail={
            "bounded": bounded.holds,
            "norms": bounded.trajectory,
            "tail_min": tail_min,
        },
    )


def resolvent_norm(t: TruncatedOperator, lam: complex) -> float:
    """1/σ_min(T − λI)，σ_min = 0 时为 +∞"""
    shifted: NDArray[np.complex128] = t.entries - lam * np.eye(t.dim)
    values: NDArray[np.float64] = np.linalg.svd(shifted, compute_uv=False)
    smallest: float = float(values[-1])
    if smallest == 0:
        return math.inf
    return 1 / smallest


def to_bytes(t: TruncatedOperator) -> bytes:
    """行优先、小端序的 (re, im) float64 对"""
    return np.ascontiguousarray(t.entries, dtype="<c16").tobytes(order="C")


def export_binary(t: TruncatedOperator, path: str | Path) -> Path:
    """导出二进制矩阵文件"""
    target: Path = Path(path)
    write_atomic(target, to_bytes(t))
    return target


def export_json(t: TruncatedOperator) -> dict[str, Any]:
    """导出 JSON 结构，仅支持 N ≤ 32"""
    if t.dim > JSON_MAX_DIM:
        raise ValueError(f"JSON 导出只支持 N ≤ {JSON_MAX_DIM}，收到 {t.dim}")

    data: dict[str, Any] = t.to_dict()
    data["entries"] = to_jsonable(t.entries)
    return data


def export_svals_csv(spectrum: SingularSpectrum, path: str | Path) -> Path:
    """导出奇异值 CSV（index,value）"""
    lines: list[str] = ["index,value"]
    lines.extend(f"{i},{value!r}" for i, value in spectrum.to_rows())

    target: Path = Path(path)
    write_atomic(target, "\n".join(lines) + "\n")
    return target

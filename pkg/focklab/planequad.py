"""
复平面上带高斯权的数值积分。

积分采用极坐标乘积公式：径向 Gauss–Legendre，角向等距。被积函数一律以对数值提供，
累加时先减去最大值再取指数，避免 e^{|w|²/2} 量级的因子溢出。
"""
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from scipy.optimize import brentq

from .object import ComplexPolynomial
from .symbols import derivative


DEFAULT_EPS: float = 1e-10
DEFAULT_RADII: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 32.0)


LogIntegrand = Callable[[NDArray[np.complex128]], NDArray[np.float64]]
PointFunction = Callable[[NDArray[np.complex128]], NDArray[np.float64]]


class QuadratureError(ArithmeticError):
    """被积函数在节点处出现 NaN 或 +∞"""
    pass


@dataclass(frozen=True)
class QuadratureGrid:
    """极坐标乘积积分网格，覆盖圆盘 |z| < outer_radius"""

    radial_nodes: NDArray[np.float64]
    radial_weights: NDArray[np.float64]
    angular_count: int
    outer_radius: float
    target_eps: float
    growth_degree: float = 0.0
    shift: float = 0.0

    def __post_init__(self) -> None:
        """检查网格的基本性质"""
        nodes: NDArray[np.float64] = self.radial_nodes
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("径向节点必须为非空一维数组")
        if nodes.shape != self.radial_weights.shape:
            raise ValueError("径向节点与权重长度不一致")
        if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0 or nodes[-1] >= self.outer_radius:
            raise ValueError("径向节点必须严格递增且位于 (0, R) 内")
        if np.any(self.radial_weights <= 0):
            raise ValueError("径向权重必须为正")
        if self.angular_count < 8 or self.angular_count % 2:
            raise ValueError(f"角向点数必须为不小于 8 的偶数，收到 {self.angular_count}")

    @property
    def radial_count(self) -> int:
        """径向节点数"""
        return int(self.radial_nodes.size)

    def points(self) -> NDArray[np.complex128]:
        """全部积分节点，形状为 (径向, 角向)"""
        theta: NDArray[np.float64] = 2 * np.pi * np.arange(self.angular_count) / self.angular_count
        return self.radial_nodes[:, None] * np.exp(1j * theta)[None, :]

    def log_weights(self) -> NDArray[np.float64]:
        """节点权重的对数，形状与 points 一致（dA = r dr dθ）"""
        radial: NDArray[np.float64] = np.log(
            self.radial_weights * self.radial_nodes * (2 * np.pi / self.angular_count)
        )
        return np.broadcast_to(radial[:, None], (self.radial_count, self.angular_count))

    def to_dict(self) -> dict[str, Any]:
        """网格元数据"""
        return {
            "outer_radius": self.outer_radius,
            "radial_count": self.radial_count,
            "angular_count": self.angular_count,
            "target_eps": self.target_eps,
            "growth_degree": self.growth_degree,
            "shift": self.shift,
        }


@dataclass(frozen=True)
class AnnulusProfile:
    """各半径圆周上的采样上确界"""

    radii: NDArray[np.float64]
    sup_values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.radii) != len(self.sup_values) or len(self.radii) < 3:
            raise ValueError("半径与上确界序列长度需相同且不少于 3")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("半径序列需严格递增")

    def to_dict(self) -> dict[str, Any]:
        """序列化为 {radii, sup}"""
        return {
            "radii": [float(r) for r in self.radii],
            "sup": [float(s) for s in self.sup_values],
        }


def envelope_radius(p: float, growth_degree: float, eps: float) -> float:
    """
    求 R 使包络 r^d·e^{−p r²/2} 在 R 处降到其最大值的 eps 倍。

    d = 0 时有闭式解 R = √(2 ln(1/eps) / p)。
    """
    log_eps: float = math.log(eps)
    if growth_degree <= 0:
        return math.sqrt(-2 * log_eps / p)

    d: float = growth_degree
    peak: float = math.sqrt(d / p)
    log_peak: float = d * math.log(peak) - p * peak**2 / 2

    def gap(r: float) -> float:
        return d * math.log(r) - p * r**2 / 2 - log_peak - log_eps

    upper: float = peak + 1.0
    while gap(upper) > 0:
        upper *= 2

    return float(brentq(gap, peak, upper, xtol=1e-12))


def _build_grid(
    outer_radius: float,
    radial_count: int,
    angular_count: int,
    eps: float,
    growth_degree: float,
    shift: float,
) -> QuadratureGrid:
    """把 Legendre 节点映射到 [0, R] 并组装网格"""
    x, w = leggauss(radial_count)
    half: float = outer_radius / 2
    return QuadratureGrid(
        radial_nodes=half * (x + 1),
        radial_weights=half * w,
        angular_count=angular_count,
        outer_radius=outer_radius,
        target_eps=eps,
        growth_degree=growth_degree,
        shift=shift,
    )


def make_grid(p: float, growth_degree: float, eps: float = DEFAULT_EPS, shift: float = 0.0) -> QuadratureGrid:
    """
    生成积分网格。

    shift 为被积函数质量中心偏离原点的距离（例如核函数的 |w|），直接加到截断半径上。
    """
    if p <= 0:
        raise ValueError(f"权指数 p 必须为正数，收到 {p}")
    if not 0 < eps <= 1e-2:
        raise ValueError(f"eps 必须位于 (0, 1e-2]，收到 {eps}")
    if growth_degree < 0:
        raise ValueError(f"增长次数不能为负，收到 {growth_degree}")
    if shift < 0:
        raise ValueError(f"偏移量不能为负，收到 {shift}")

    outer_radius: float = envelope_radius(p, growth_degree, eps) + shift
    radial_count: int = 32 + 8 * math.ceil(outer_radius * math.sqrt(max(p, 1.0)))
    angular_count: int = 4 * (math.ceil(outer_radius**2) + 8)

    return _build_grid(outer_radius, radial_count, angular_count, eps, growth_degree, shift)


def refine(grid: QuadratureGrid) -> QuadratureGrid:
    """径向与角向节点数同时加倍"""
    return _build_grid(
        grid.outer_radius,
        grid.radial_count * 2,
        grid.angular_count * 2,
        grid.target_eps,
        grid.growth_degree,
        grid.shift,
    )


def log_integrate_weighted(log_f: LogIntegrand, grid: QuadratureGrid) -> float:
    """返回 ln ∫ f dA，被积函数全为零时返回 −∞"""
    with np.errstate(divide="ignore", invalid="ignore"):
        values: NDArray[np.float64] = np.asarray(log_f(grid.points()), dtype=np.float64)

    if values.shape != (grid.radial_count, grid.angular_count):
        values = np.broadcast_to(values, (grid.radial_count, grid.angular_count))

    if np.any(np.isnan(values)) or np.any(values == np.inf):
        raise QuadratureError("被积函数在积分节点处取到非有限值")

    terms: NDArray[np.float64] = values + grid.log_weights()
    top: float = float(np.max(terms))
    if top == -np.inf:
        return -math.inf

    # np.sum 对连续数组做成对求和，顺序固定，结果可复现
    total: float = float(np.sum(np.exp(terms - top)))
    return top + math.log(total)


def integrate_weighted(log_f: LogIntegrand, grid: QuadratureGrid) -> float:
    """
    计算 ∫_ℂ f dA 的数值近似，不带 p/2π 前因子。

    log_f 接受节点数组，返回同形状的 ln f；允许 −∞（表示该点为零）。
    """
    log_value: float = log_integrate_weighted(log_f, grid)
    if log_value == -math.inf:
        return 0.0
    return math.exp(log_value)


def circle_points(radius: float) -> NDArray[np.complex128]:
    """圆周 |z| = r 上的等距采样点，点数为 max(64, 8⌈r²⌉)"""
    count: int = max(64, 8 * math.ceil(radius**2))
    theta: NDArray[np.float64] = 2 * np.pi * np.arange(count) / count
    return radius * np.exp(1j * theta)


def sup_on_annuli(f: PointFunction, radii: tuple[float, ...] | list[float]) -> AnnulusProfile:
    """在每个半径的圆周上采样 f 并记录最大值"""
    radii_array: NDArray[np.float64] = np.asarray(radii, dtype=np.float64)
    if radii_array.size < 3 or np.any(np.diff(radii_array) <= 0):
        raise ValueError("半径序列需严格递增且不少于 3 个")

    sups: list[float] = []
    for r in radii_array:
        values: NDArray[np.float64] = np.asarray(f(circle_points(float(r))), dtype=np.float64)
        sups.append(float(np.max(values)))

    return AnnulusProfile(radii=radii_array, sup_values=np.asarray(sups))


def decays_to_zero(profile: AnnulusProfile, tol: float) -> bool:
    """最后三个上确界严格递减，且末值小于 tol"""
    last: NDArray[np.float64] = profile.sup_values[-3:]
    decreasing: bool = bool(last[0] > last[1] > last[2])
    return decreasing and bool(last[2] < tol)


def log_abs(values: NDArray[np.complex128]) -> NDArray[np.float64]:
    """ln|·|，零点处为 −∞"""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values))


def littlewood_paley_ratio(f: ComplexPolynomial, p: float, grid: QuadratureGrid) -> float:
    """
    计算 LHS / RHS，两侧均不带前因子：

        LHS = ∫|f|^p e^{−p|z|²/2} dA
        RHS = |f(0)|^p + ∫|f'|^p (1+|z|)^{−p} e^{−p|z|²/2} dA
    """
    if f.is_zero():
        raise ValueError("零多项式没有 Littlewood–Paley 比值")
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    df: ComplexPolynomial = derivative(f)

    def log_lhs(z: NDArray[np.complex128]) -> NDArray[np.float64]:
        return p * log_abs(f.evaluate(z)) - p * np.abs(z) ** 2 / 2

    def log_rhs(z: NDArray[np.complex128]) -> NDArray[np.float64]:
        r: NDArray[np.float64] = np.abs(z)
        return p * log_abs(df.evaluate(z)) - p * np.log1p(r) - p * r**2 / 2

    lhs: float = integrate_weighted(log_lhs, grid)
    rhs: float = abs(f.coefficient(0)) ** p + integrate_weighted(log_rhs, grid)
    if rhs <= 0:
        raise QuadratureError("Littlewood–Paley 右端为零")

    return lhs / rhs

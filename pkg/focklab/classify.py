"""
广义 Volterra 型算子的符号判定。

对多项式符号 g 与仿射自映射 ψ(z) = az + b，按判据函数 M（V 型）或 M̃（J 型）的
有界性、衰减性与可积性给出有界、紧与 Schatten 类判定；同时提供 Berezin 型变换、
核函数范数等数值求值，用来与矩阵截断结果相互印证。
"""
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad

from .constant import DifferenceBranch, OperatorKind, Rule
from .object import (
    AffineMap,
    CancellationEvidence,
    ClassificationVerdict,
    ComplexPolynomial,
    DifferenceVerdict,
    LrNorm,
    SymbolPair,
)
from .planequad import (
    DEFAULT_EPS,
    LogIntegrand,
    QuadratureGrid,
    integrate_weighted,
    log_abs,
    log_integrate_weighted,
    make_grid,
)
from .symbols import constant, derivative, exp_polynomial_in_fock, scale, subtract


# |a| 与 1 的比较容差
UNIT_TOL: float = 1e-12


def governing_symbol(pair: SymbolPair) -> ComplexPolynomial:
    """判据中出现的多项式：V 型为 g'，J 型为 g"""
    if pair.kind == OperatorKind.V:
        return derivative(pair.g)
    return pair.g


def is_zero_operator(pair: SymbolPair) -> bool:
    """V 型 g 为常数或 J 型 g ≡ 0 时算子为零"""
    return governing_symbol(pair).is_zero()


def _dilation(m: AffineMap) -> int:
    """比较 |a| 与 1，返回 −1、0 或 1"""
    modulus: float = abs(m.a)
    if abs(modulus - 1) <= UNIT_TOL:
        return 0
    return 1 if modulus > 1 else -1


def log_criterion_values(pair: SymbolPair, z: ArrayLike) -> NDArray[np.float64]:
    """判据函数的自然对数，按算子类型分派到 M 或 M̃"""
    points: NDArray[np.complex128] = np.asarray(z, dtype=np.complex128)
    r: NDArray[np.float64] = np.abs(points)
    psi: NDArray[np.complex128] = pair.psi_at(points)
    gauss: NDArray[np.float64] = (np.abs(psi) ** 2 - r**2) / 2

    if pair.kind == OperatorKind.V:
        return log_abs(derivative(pair.g).evaluate(points)) - np.log1p(r) + gauss

    return log_abs(pair.g.evaluate(points)) + np.log1p(np.abs(psi)) - np.log1p(r) + gauss


def log_eval_M(pair: SymbolPair, z: complex) -> float:
    """ln M_{(g,ψ)}(z)，g'(z) = 0 时为 −∞"""
    if pair.kind != OperatorKind.V:
        raise ValueError("M 判据只适用于 V 型算子")
    return float(log_criterion_values(pair, z))


def eval_M(pair: SymbolPair, z: complex) -> float:
    """M_{(g,ψ)}(z) = |g'(z)|/(1+|z|)·e^{(|ψ(z)|²−|z|²)/2}"""
    return math.exp(log_eval_M(pair, z))


def log_eval_Mtilde(pair: SymbolPair, z: complex) -> float:
    """ln M̃_{(g,ψ)}(z)"""
    if pair.kind != OperatorKind.J:
        raise ValueError("M̃ 判据只适用于 J 型算子")
    return float(log_criterion_values(pair, z))


def eval_Mtilde(pair: SymbolPair, z: complex) -> float:
    """M̃_{(g,ψ)}(z) = |g(z)|(1+|ψ(z)|)/(1+|z|)·e^{(|ψ(z)|²−|z|²)/2}"""
    return math.exp(log_eval_Mtilde(pair, z))


def log_criterion(pair: SymbolPair, z: complex) -> float:
    """按类型求判据函数的对数"""
    return float(log_criterion_values(pair, z))


def criterion(pair: SymbolPair, z: complex) -> float:
    """按类型求判据函数值"""
    return math.exp(log_criterion(pair, z))


def _make_verdict(
    bounded: bool,
    compact: bool,
    cutoff: float,
    reasons: list[Rule],
) -> ClassificationVerdict:
    """组装判定结果，非紧时阈值一律为 +∞"""
    if not compact:
        cutoff = math.inf
    return ClassificationVerdict(
        bounded=bounded,
        compact=compact,
        schatten_cutoff=cutoff,
        reasons=reasons,
    )


def verdict(pair: SymbolPair, p: float, q: float) -> ClassificationVerdict:
    """
    判定 T: F_p → F_q 的有界性与紧性，并给出 F_2 上的 Schatten 阈值。

    规则按以下顺序匹配：
        1. 判据恒为零（零算子）
        2. ψ 非仿射：无界
        3. |a| > 1：无界
        4. |a| < 1：紧，且属于全部 S_p
        5. |a| = 1, b ≠ 0：无界
        6. |a| = 1, b = 0：由 g 的次数决定；q < p 时再要求判据属于 L^{pq/(p−q)}
    """
    if p <= 0 or q <= 0:
        raise ValueError(f"指数 p、q 必须为正数，收到 p={p}, q={q}")

    if is_zero_operator(pair):
        return _make_verdict(True, True, 0.0, [Rule.ZERO_OPERATOR])

    affine: AffineMap | None = pair.affine
    if affine is None:
        return _make_verdict(False, False, math.inf, [Rule.NON_AFFINE_SYMBOL])

    dilation: int = _dilation(affine)
    if dilation > 0:
        return _make_verdict(False, False, math.inf, [Rule.DILATION_ABOVE_ONE])
    if dilation < 0:
        return _make_verdict(True, True, 0.0, [Rule.GAUSSIAN_DECAY])
    if affine.b != 0:
        return _make_verdict(False, False, math.inf, [Rule.TRANSLATION_GROWTH])

    degree: int = pair.g.degree()

    if pair.kind == OperatorKind.V:
        reasons: list[Rule] = [Rule.POLYNOMIAL_GROWTH]
        if p <= q:
            bounded: bool = degree <= 2
            compact: bool = degree <= 1
        else:
            reasons.append(Rule.INTEGRABILITY)
            bounded = compact = degree <= 1 and radial_integrable(p * q / (p - q))

        if compact:
            reasons.append(Rule.SCHATTEN_RADIAL)
        return _make_verdict(bounded, compact, 2.0, reasons)

    # J 型在 |a| = 1, b = 0 时 M̃ = |g|
    reasons = [Rule.CONSTANT_SYMBOL]
    if p <= q:
        return _make_verdict(degree == 0, False, math.inf, reasons)

    reasons.append(Rule.INTEGRABILITY)
    return _make_verdict(False, False, math.inf, reasons)


def radial_integrable(r: float) -> bool:
    """∫(1+|z|)^{−r} dA 有限当且仅当 r > 2，边界 r = 2 发散"""
    return r > 2


def criterion_limit(pair: SymbolPair) -> float:
    """判据函数在 |z| → ∞ 时的上极限（符号计算）"""
    if is_zero_operator(pair):
        return 0.0

    affine: AffineMap | None = pair.affine
    if affine is None:
        return math.inf

    dilation: int = _dilation(affine)
    if dilation < 0:
        return 0.0
    if dilation > 0 or affine.b != 0:
        return math.inf

    degree: int = pair.g.degree()
    if pair.kind == OperatorKind.V:
        if degree <= 1:
            return 0.0
        if degree == 2:
            return 2 * abs(pair.g.coefficient(2))
        return math.inf

    if degree == 0:
        return abs(pair.g.coefficient(0))
    return math.inf


def _gaussian_grid(pair: SymbolPair, r: float, eps: float) -> QuadratureGrid:
    """|a| < 1 时判据 r 次方的积分网格：配方后中心为 āb/(1−|a|²)"""
    affine: AffineMap | None = pair.affine
    assert affine is not None

    contraction: float = 1 - abs(affine.a) ** 2
    shift: float = abs(affine.a.conjugate() * affine.b) / contraction
    growth: float = r * max(governing_symbol(pair).degree(), 0)

    return make_grid(r * contraction, growth, eps, shift=shift)


def lr_norm_M(pair: SymbolPair, r: float, grid: QuadratureGrid | None = None) -> LrNorm:
    """
    判据函数的 L^r 可积性与 ∫ M^r dA 的值（J 型使用 M̃）。

    有限性由符号规则决定，有限时再数值求值；grid 省略时按 ψ 自动生成。
    """
    if r <= 0:
        raise ValueError(f"指数 r 必须为正数，收到 {r}")

    if is_zero_operator(pair):
        return LrNorm(finite=True, value=0.0)

    affine: AffineMap | None = pair.affine
    if affine is None:
        return LrNorm(finite=False)

    dilation: int = _dilation(affine)
    if dilation > 0 or (dilation == 0 and affine.b != 0):
        return LrNorm(finite=False)

    if dilation == 0:
        if pair.kind == OperatorKind.J:
            return LrNorm(finite=False)

        if pair.g.degree() > 1 or not radial_integrable(r):
            return LrNorm(finite=False)

        # M = |c|/(1+|z|)，化为径向积分
        c: float = abs(pair.g.coefficient(1))
        radial, _ = quad(lambda t: t * (1 + t) ** (-r), 0, np.inf, epsabs=0, epsrel=1e-10, limit=200)
        return LrNorm(finite=True, value=c**r * 2 * math.pi * radial)

    if grid is None:
        grid = _gaussian_grid(pair, r, DEFAULT_EPS)

    value: float = integrate_weighted(lambda z: r * log_criterion_values(pair, z), grid)
    return LrNorm(finite=True, value=value)


def _log_berezin_integrand(pair: SymbolPair, p: float, w: complex) -> LogIntegrand:
    """Berezin 型变换被积函数的对数"""
    g_poly: ComplexPolynomial = governing_symbol(pair)
    w_bar: complex = complex(w).conjugate()
    log_norm: float = -abs(w) ** 2 / 2
    if pair.kind == OperatorKind.J:
        log_norm += math.log1p(abs(w))

    def log_f(z: NDArray[np.complex128]) -> NDArray[np.float64]:
        r: NDArray[np.float64] = np.abs(z)
        return p * (
            np.real(w_bar * pair.psi_at(z))
            + log_norm
            + log_abs(g_poly.evaluate(z))
            - np.log1p(r)
            - r**2 / 2
        )

    return log_f



def berezin(pair: SymbolPair, p: float, w: complex, grid: QuadratureGrid | None = None) -> float:
    """
    V 型求 B_{(|g|^p,ψ)}(w)，J 型求 B̃_{(|g|^p,ψ)}(w)。

    被积函数为 |k_w(ψ(z))|^p·|g'(z)|^p·(1+|z|)^{−p}·e^{−p|z|²/2}，
    J 型把 |g'| 换成 |g| 并乘上 (1+|w|)^p。
    """
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    affine: AffineMap | None = pair.affine
    if affine is None:
        raise ValueError("Berezin 型变换只对仿射 ψ 求值")

    if is_zero_operator(pair):
        return 0.0

    if grid is None:
        growth: float = p * governing_symbol(pair).degree()
        grid = make_grid(p, growth, DEFAULT_EPS, shift=abs(affine.a) * abs(w))

    return integrate_weighted(_log_berezin_integrand(pair, p, w), grid)


def berezin_lower_constant(p: float) -> float:
    """
    下界 B(ψ(ζ)) ≥ c·M(ζ)^p 中的常数 c(p) = 2^{−p}·(2π/p)·(1 − e^{−p/2})。

    来自在以 ζ 为心的单位圆盘上的次均值性质，对任意仿射 ψ 成立。
    """
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")
    return 2.0 ** (-p) * (2 * math.pi / p) * (1 - math.exp(-p / 2))


def kernel_norm(w: complex, p: float, grid: QuadratureGrid | None = None) -> float:
    """数值计算 ‖K_w‖_p = ((p/2π)∫e^{pRe(w̄z)−p|z|²/2} dA)^{1/p}，理论值为 e^{|w|²/2}"""
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    if grid is None:
        grid = make_grid(p, 0, DEFAULT_EPS, shift=abs(w))

    w_bar: complex = complex(w).conjugate()

    def log_f(z: NDArray[np.complex128]) -> NDArray[np.float64]:
        return p * np.real(w_bar * z) - p * np.abs(z) ** 2 / 2

    log_value: float = log_integrate_weighted(log_f, grid)
    return math.exp((math.log(p / (2 * math.pi)) + log_value) / p)


def _check_same_kind(pair1: SymbolPair, pair2: SymbolPair) -> None:
    if pair1.kind != pair2.kind:
        raise ValueError(f"两个算子类型不同: {pair1.kind.value} 与 {pair2.kind.value}")


def psi_equal(pair1: SymbolPair, pair2: SymbolPair) -> bool:
    """两个 ψ 的系数完全相同"""
    m1: AffineMap | None = pair1.affine
    m2: AffineMap | None = pair2.affine
    if m1 is None or m2 is None:
        return pair1.psi == pair2.psi
    return m1.a == m2.a and m1.b == m2.b


def difference_pair(pair1: SymbolPair, pair2: SymbolPair) -> SymbolPair:
    """符号为 g1 − g2、ψ 取 ψ1 的符号对"""
    return pair1.with_symbol(subtract(pair1.g, pair2.g))


def difference_compact(pair1: SymbolPair, pair2: SymbolPair, p: float, q: float) -> DifferenceVerdict:
    """
    判定两个有界算子之差是否为紧算子。

    两者都紧，或者 ψ1 = ψ2 且差符号 (g1 − g2, ψ1) 的判据趋于零。
    该判据只对 F_p → F_q 且 p ≤ q 成立，q < p 时抛出 ValueError。
    """
    if q < p:
        raise ValueError(f"差算子紧性判定要求 p ≤ q，收到 p={p}, q={q}")

    _check_same_kind(pair1, pair2)

    verdict1: ClassificationVerdict = verdict(pair1, p, q)
    verdict2: ClassificationVerdict = verdict(pair2, p, q)
    if not (verdict1.bounded and verdict2.bounded):
        raise ValueError("差算子判定要求两个算子都有界")

    same_psi: bool = psi_equal(pair1, pair2)
    evidence: CancellationEvidence | None = None
    if same_psi:
        evidence = CancellationEvidence(
            psi_equal=True,
            limit=criterion_limit(difference_pair(pair1, pair2)),
        )

    if verdict1.compact and verdict2.compact:
        return DifferenceVerdict(
            compact=True,
            branch=DifferenceBranch.BOTH_COMPACT,
            cancellation_evidence=evidence,
        )

    if same_psi and verdict(difference_pair(pair1, pair2), p, q).compact:
        return DifferenceVerdict(
            compact=True,
            branch=DifferenceBranch.CANCELLATION,
            cancellation_evidence=evidence,
        )

    return DifferenceVerdict(
        compact=False,
        branch=DifferenceBranch.NEITHER,
        cancellation_evidence=evidence,
    )


def difference_schatten(pair1: SymbolPair, pair2: SymbolPair, p: float) -> DifferenceVerdict:
    """
    判定 F_2 上两个算子之差是否属于 S_p。

    两者都属于 S_p，或者 ψ1 = ψ2 且差符号判据的 p 次方可积。
    branch 记录的是 S_p 判定所依据的分支。
    """
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    compactness: DifferenceVerdict = difference_compact(pair1, pair2, 2.0, 2.0)

    verdict1: ClassificationVerdict = verdict(pair1, 2.0, 2.0)
    verdict2: ClassificationVerdict = verdict(pair2, 2.0, 2.0)
    if verdict1.in_schatten(p) and verdict2.in_schatten(p):
        return DifferenceVerdict(
            compact=True,
            schatten_for_p=True,
            branch=DifferenceBranch.BOTH_COMPACT,
            cancellation_evidence=compactness.cancellation_evidence,
        )

    if psi_equal(pair1, pair2):
        norm: LrNorm = lr_norm_M(difference_pair(pair1, pair2), p)
        if norm.finite:
            return DifferenceVerdict(
                compact=True,
                schatten_for_p=True,
                branch=DifferenceBranch.CANCELLATION,
                cancellation_evidence=compactness.cancellation_evidence,
            )

    return DifferenceVerdict(
        compact=compactness.compact,
        schatten_for_p=False,
        branch=DifferenceBranch.NEITHER,
        cancellation_evidence=compactness.cancellation_evidence,
    )


def _check_quadratic(g1: ComplexPolynomial, g2: ComplexPolynomial) -> None:
    if g1.degree() > 2 or g2.degree() > 2:
        raise ValueError("degree > 2: 谱判定只适用于次数不超过 2 的符号")


def spectrum_disk(g1: ComplexPolynomial, g2: ComplexPolynomial) -> float:
    """V_{g1} − V_{g2} 的谱为闭圆盘 |λ| ≤ 2|a1 − a2|，a 为 z² 的系数"""
    _check_quadratic(g1, g2)
    return 2 * abs(g1.coefficient(2) - g2.coefficient(2))


def spectrum_contains(g1: ComplexPolynomial, g2: ComplexPolynomial, lam: complex, p: float = 2.0) -> bool:
    """λ 属于谱当且仅当 λ = 0 或 e^{(g1−g2)/λ} ∉ F_p"""
    _check_quadratic(g1, g2)
    if lam == 0:
        return True
    return not exp_polynomial_in_fock(scale(subtract(g1, g2), 1 / complex(lam)), p)


def composition_verdict(psi: AffineMap | ComplexPolynomial, p: float, q: float) -> ClassificationVerdict:
    """复合算子 C_ψ = J_{(ψ',ψ)} + 在 ψ(0) 处求值（秩一），判定与 J_{(ψ',ψ)} 相同"""
    if isinstance(psi, AffineMap):
        symbol: ComplexPolynomial = constant(psi.a)
    else:
        symbol = derivative(psi)

    return verdict(SymbolPair(g=symbol, psi=psi, kind=OperatorKind.J), p, q)


def multiplication_verdict(g: ComplexPolynomial) -> ClassificationVerdict:
    """乘法算子 M_g 有界当且仅当 g 为常数，紧当且仅当 g ≡ 0"""
    if g.is_zero():
        return _make_verdict(True, True, 0.0, [Rule.ZERO_OPERATOR])
    return _make_verdict(g.degree() == 0, False, math.inf, [Rule.CONSTANT_SYMBOL])

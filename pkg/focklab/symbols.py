"""
多项式符号与仿射自映射上的精确代数运算。

系数统一使用双精度复数，"精确" 指的是在舍入误差范围内精确。
"""
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import comb

from .object import AffineMap, ComplexPolynomial


def polynomial(coeffs: Sequence[complex] | NDArray[np.complex128]) -> ComplexPolynomial:
    """由系数序列构造多项式（下标即次数）"""
    return ComplexPolynomial(tuple(complex(c) for c in coeffs))


def monomial(k: int, c: complex = 1) -> ComplexPolynomial:
    """构造单项式 c·z^k"""
    if k < 0:
        raise ValueError(f"单项式次数不能为负: {k}")
    return polynomial([0j] * k + [complex(c)])


def constant(c: complex) -> ComplexPolynomial:
    """构造常数多项式"""
    return polynomial([c])


def derivative(p: ComplexPolynomial) -> ComplexPolynomial:
    """逐项求导，次数降一"""
    coeffs: tuple[complex, ...] = p.coeffs
    return polynomial([k * coeffs[k] for k in range(1, len(coeffs))])


def antiderivative(p: ComplexPolynomial) -> ComplexPolynomial:
    """常数项为零的原函数，对应从 0 出发的路径积分"""
    coeffs: tuple[complex, ...] = p.coeffs
    if not coeffs:
        return p
    return polynomial([0j] + [c / (k + 1) for k, c in enumerate(coeffs)])


def compose_affine(p: ComplexPolynomial, m: AffineMap) -> ComplexPolynomial:
    """
    计算 p(a·z + b) 并按二项式展开。

    z^m 的系数为 Σ_n c_n·C(n, m)·a^m·b^(n−m)，约定 0^0 = 1。
    """
    coeffs: tuple[complex, ...] = p.coeffs
    if not coeffs:
        return p

    a: complex = complex(m.a)
    b: complex = complex(m.b)

    result: list[complex] = []
    for j in range(len(coeffs)):
        total: complex = 0j
        for n in range(j, len(coeffs)):
            total += coeffs[n] * comb(n, j, exact=True) * b ** (n - j)
        result.append(total * a**j)

    return polynomial(result)


def add(p: ComplexPolynomial, q: ComplexPolynomial) -> ComplexPolynomial:
    """多项式相加"""
    size: int = max(len(p), len(q))
    return polynomial([p.coefficient(k) + q.coefficient(k) for k in range(size)])


def subtract(p: ComplexPolynomial, q: ComplexPolynomial) -> ComplexPolynomial:
    """多项式相减 p − q"""
    size: int = max(len(p), len(q))
    return polynomial([p.coefficient(k) - q.coefficient(k) for k in range(size)])


def scale(p: ComplexPolynomial, c: complex) -> ComplexPolynomial:
    """数乘"""
    return polynomial([c * x for x in p.coeffs])


def multiply(p: ComplexPolynomial, q: ComplexPolynomial) -> ComplexPolynomial:
    """多项式相乘（系数卷积）"""
    if p.is_zero() or q.is_zero():
        return ComplexPolynomial(())

    product: NDArray[np.complex128] = np.convolve(
        np.asarray(p.coeffs, dtype=np.complex128),
        np.asarray(q.coeffs, dtype=np.complex128),
    )
    return polynomial(product)


def evaluate(p: ComplexPolynomial, z: ArrayLike) -> NDArray[np.complex128]:
    """在 z 处求值"""
    return p.evaluate(z)


def affine_from_polynomial(p: ComplexPolynomial) -> AffineMap | None:
    """识别次数不超过 1 的多项式为仿射映射，否则返回 None"""
    if p.degree() > 1:
        return None
    return AffineMap(a=p.coefficient(1), b=p.coefficient(0))


def exp_quadratic_in_fock(alpha: complex, beta: complex, p: float) -> bool:
    """
    判断 z ↦ exp(α·z² + β·z + γ) 是否属于 F_p。

    对所有 p > 0 与 β，当且仅当 |α| < 1/2 时成立，边界 |α| = 1/2 发散。
    """
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    return bool(abs(alpha) < 0.5)


def exp_polynomial_in_fock(q: ComplexPolynomial, p: float) -> bool:
    """判断 exp(q) 是否属于 F_p：一次以下总成立，三次以上总不成立"""
    if p <= 0:
        raise ValueError(f"指数 p 必须为正数，收到 {p}")

    degree: int = q.degree()
    if degree <= 1:
        return True
    if degree >= 3:
        return False

    return exp_quadratic_in_fock(q.coefficient(2), q.coefficient(1), p)

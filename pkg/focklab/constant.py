from enum import Enum


class OperatorKind(str, Enum):
    """算子类型"""
    V = "V"     # V_{(g,ψ)}，判据为 M
    J = "J"     # J_{(g,ψ)}，判据为 M̃
    C = "C"     # 复合算子 C_ψ（仅用于截断矩阵）
    M = "M"     # 乘法算子 M_g（仅用于截断矩阵）


class DifferenceBranch(str, Enum):
    """差算子判定分支"""
    BOTH_COMPACT = "both_compact"
    CANCELLATION = "cancellation"
    NEITHER = "neither"


class Check(str, Enum):
    """场景可请求的检查项"""
    VERDICT = "verdict"
    BEREZIN = "berezin"
    MATRIX = "matrix"
    SVALS = "svals"
    SCHATTEN = "schatten"
    DIFFERENCE = "difference"
    SPECTRUM = "spectrum"
    KERNEL = "kernel"
    LITTLEWOOD_PALEY = "littlewood_paley"


class OutputFormat(str, Enum):
    """报告输出格式"""
    JSON = "json"
    CSV = "csv"
    PLOTDATA = "plotdata"


class Rule(str, Enum):
    """判定规则标识，按触发顺序写入 reasons"""
    ZERO_OPERATOR = "zero-operator"
    NON_AFFINE_SYMBOL = "non-affine-symbol"
    DILATION_ABOVE_ONE = "dilation-above-one"
    GAUSSIAN_DECAY = "gaussian-decay"
    TRANSLATION_GROWTH = "translation-growth"
    POLYNOMIAL_GROWTH = "polynomial-growth"
    CONSTANT_SYMBOL = "constant-symbol"
    INTEGRABILITY = "integrability"
    SCHATTEN_RADIAL = "schatten-radial"
    SCHATTEN_NONE = "schatten-none"

import json
import math
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError

from . import __version__
from .classify import (
    berezin,
    berezin_lower_constant,
    criterion,
    criterion_limit,
    difference_compact,
    difference_schatten,
    kernel_norm,
    log_criterion_values,
    spectrum_contains,
    spectrum_disk,
    verdict,
)
from .constant import Check, OperatorKind
from .fockmat import (
    JSON_MAX_DIM,
    ProxyEvidence,
    SingularSpectrum,
    TruncatedOperator,
    boundedness_signature,
    build,
    compactness_proxy,
    difference,
    export_json,
    parts_identity_residual,
    resolvent_norm,
    singular_values,
    to_bytes,
)
from .object import (
    AffineMap,
    CheckResult,
    ClassificationVerdict,
    ComplexPolynomial,
    DifferenceVerdict,
    NumericSettings,
    RunReport,
    Scenario,
    ScenarioConfig,
    ScenarioResult,
    SymbolPair,
)
from .planequad import (
    AnnulusProfile,
    QuadratureGrid,
    decays_to_zero,
    littlewood_paley_ratio,
    make_grid,
    refine,
    sup_on_annuli,
)
from .symbols import monomial, subtract
from .tracer import RunTracer
from .utility import get_max_dim, read_text_file, to_jsonable


# 随包发布的验证语料
CORPUS_PATH: Path = Path(__file__).parent.joinpath("corpus", "verification.json")

# Berezin 型变换：有界时 25 点网格上的统一上界，以及无界时的增长探测点 |ζ|
BEREZIN_BOUND: float = 1e3
BEREZIN_ZETAS: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0)
BEREZIN_AXIS: NDArray[np.float64] = np.linspace(-2.0, 2.0, 5)

# 截断 Schatten 范数 p 次方在最后一次加密时的增长阈值
SCHATTEN_GROWTH: float = 0.1

# 核函数范数的相对误差、参与检查的指数
KERNEL_RTOL: float = 1e-6
KERNEL_EXPONENTS: tuple[float, ...] = (1.0, 2.0, 4.0)

# Littlewood–Paley 比值的单项式族、指数与实测区间
LP_MAX_DEGREE: int = 40
LP_EXPONENTS: tuple[float, ...] = (1.0, 2.0, 4.0)
LP_INTERVAL: tuple[float, float] = (1 / 50, 50.0)
LP_REFINE_RTOL: float = 1e-6

# 截断矩阵的嵌套与分部积分恒等式容差
MATRIX_TOL: float = 1e-12

# 谱圆盘外预解式范数的稳定性阈值；圆盘边界附近截断误差约为 O(1/N)，
# 因此在维数序列之后再加密一次，稳定性只看最后一次加密
RESOLVENT_RTOL: float = 0.05


def _spectrum_ladder(dims: list[int]) -> list[int]:
    """谱检查使用的维数序列：在配置的序列后追加一次加倍（不超过维数上限）"""
    extra: int = 2 * dims[-1]
    if extra > get_max_dim():
        return list(dims)
    return [*dims, extra]


class ConfigError(ValueError):
    """配置文件无效，problems 中每一项为 "路径: 原因" """

    def __init__(self, problems: list[str]) -> None:
        self.problems: list[str] = problems
        super().__init__("配置无效:\n" + "\n".join(f"  {p}" for p in problems))


def parse_config(data: Any) -> ScenarioConfig:
    """校验配置数据"""
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        problems: list[str] = []
        for error in e.errors():
            path: str = ".".join(str(x) for x in error["loc"]) or "<root>"
            problems.append(f"{path}: {error['msg']}")
        raise ConfigError(problems) from None


def load_config(path: str | Path) -> ScenarioConfig:
    """读取并校验 JSON 配置文件"""
    filepath: Path = Path(path)
    try:
        data: Any = json.loads(read_text_file(filepath))
    except FileNotFoundError:
        raise ConfigError([f"{filepath}: 文件不存在"]) from None
    except json.JSONDecodeError as e:
        raise ConfigError([f"{filepath}: 第 {e.lineno} 行 JSON 格式错误 ({e.msg})"]) from None

    return parse_config(data)


def load_corpus() -> ScenarioConfig:
    """加载随包发布的验证语料"""
    return load_config(CORPUS_PATH)


def config_schema() -> dict[str, Any]:
    """场景配置文件的 JSON Schema"""
    return ScenarioConfig.model_json_schema()


def _strictly_increasing(values: list[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


def _relative_growth(previous: float, last: float) -> float:
    """相对增长量，0 → 0 记为 0"""
    if previous == 0:
        return 0.0 if last == 0 else math.inf
    return (last - previous) / previous


def _combine(flags: list[bool | None]) -> bool | None:
    """合并一致性标志：任一为 False 即 False，全部缺失为 None"""
    present: list[bool] = [f for f in flags if f is not None]
    if not present:
        return None
    return all(present)


class ScenarioEngine:
    """
    场景引擎：逐个场景执行检查项，比较符号判定与数值代理，汇总为 RunReport。
    """

    def __init__(self, jobs: int = 1, run_id: str = "") -> None:
        """构造函数"""
        if jobs < 1:
            raise ValueError(f"工作线程数必须为正整数，收到 {jobs}")

        self.jobs: int = jobs
        self.run_id: str = run_id or datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        self.tracer: RunTracer = RunTracer(self.run_id)

        self._handlers: dict[Check, Callable[[Scenario], CheckResult]] = {
            Check.VERDICT: self._check_verdict,
            Check.BEREZIN: self._check_berezin,
            Check.MATRIX: self._check_matrix,
            Check.SVALS: self._check_svals,
            Check.SCHATTEN: self._check_schatten,
            Check.DIFFERENCE: self._check_difference,
            Check.SPECTRUM: self._check_spectrum,
            Check.KERNEL: self._check_kernel,
            Check.LITTLEWOOD_PALEY: self._check_littlewood_paley,
        }

    def run(self, config: ScenarioConfig, checks: set[Check] | None = None) -> RunReport:
        """
        执行全部场景。

        checks 不为空时只执行其中的检查项，剩余检查为空的场景被跳过。
        单个检查出错只记录在对应结果中，不中断运行。
        """
        scenarios: list[Scenario] = []
        for scenario in config.scenarios:
            if checks is not None:
                selected: list[Check] = [c for c in scenario.checks if c in checks]
                if not selected:
                    continue
                scenario = scenario.model_copy(update={"checks": selected})
            scenarios.append(scenario)

        self.tracer.open()
        try:
            self.tracer.on_run_start(len(scenarios), self.jobs)

            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                outputs: list[tuple[ScenarioResult, dict[str, float]]] = list(
                    executor.map(self.run_scenario, scenarios)
                )

            report: RunReport = RunReport(version=__version__)
            for result, timing in outputs:
                report.results.append(result)
                report.timings[result.id] = timing

            self.tracer.on_run_end(report)
        finally:
            self.tracer.close()

        return report

    def run_scenario(self, scenario: Scenario) -> tuple[ScenarioResult, dict[str, float]]:
        """执行单个场景，返回结果与各检查耗时"""
        self.tracer.on_scenario_start(scenario)

        result: ScenarioResult = ScenarioResult(id=scenario.id)
        timing: dict[str, float] = {}

        for check in scenario.checks:
            start: float = time.perf_counter()
            check_result: CheckResult = self.execute_check(scenario, check)
            seconds: float = time.perf_counter() - start

            result.results.append(check_result)
            timing[check.value] = seconds
            if not check_result.failed:
                self.tracer.on_check_end(scenario.id, check_result, seconds)

        result.agreement = _combine([r.agreement for r in result.results])
        return result, timing

    def execute_check(self, scenario: Scenario, check: Check) -> CheckResult:
        """执行单项检查，异常转为错误结果"""
        self.tracer.on_check_start(scenario.id, check.value)

        try:
            return self._handlers[check](scenario)
        except Exception as e:
            self.tracer.on_check_error(scenario.id, check.value, e)
            return CheckResult(check=check, error=f"{type(e).__name__}: {e}")

    def _check_verdict(self, scenario: Scenario) -> CheckResult:
        """符号判定，并与判据函数在同心圆上的上确界轨迹对照（仅 p ≤ q）"""
        settings: NumericSettings = scenario.settings
        entries: list[dict[str, Any]] = []
        flags: list[bool | None] = []

        for index, pair in enumerate(scenario.pairs):
            result: ClassificationVerdict = verdict(pair, scenario.p, scenario.q)

            log_profile: AnnulusProfile = sup_on_annuli(
                lambda z, pair=pair: log_criterion_values(pair, z), settings.radii
            )
            with np.errstate(over="ignore"):
                sups: NDArray[np.float64] = np.exp(log_profile.sup_values)
            profile: AnnulusProfile = AnnulusProfile(radii=log_profile.radii, sup_values=sups)

            entry: dict[str, Any] = {
                "pair": index,
                "verdict": result.model_dump(mode="json"),
                "limit": criterion_limit(pair),
                "criterion": [{"z": z, "value": criterion(pair, z)} for z in settings.points],
                "profile": profile.to_dict(),
            }

            if scenario.p <= scenario.q:
                logs: NDArray[np.float64] = log_profile.sup_values
                if np.all(sups == 0):
                    numeric_bounded: bool = True
                    numeric_compact: bool = True
                else:
                    numeric_bounded = bool(logs[-1] - logs[-2] <= math.log1p(settings.growth_tol))
                    numeric_compact = decays_to_zero(profile, settings.tol)

                entry["numeric"] = {"bounded": numeric_bounded, "compact": numeric_compact}
                flags.append(numeric_bounded == result.bounded and numeric_compact == result.compact)

            entries.append(entry)

        return CheckResult(
            check=Check.VERDICT,
            data=to_jsonable({"pairs": entries}),
            agreement=_combine(flags),
        )

    def _check_berezin(self, scenario: Scenario) -> CheckResult:
        """Berezin 型变换：有界性桥接与下界 B(ψ(ζ)) ≥ c·M(ζ)^p"""
        p: float = scenario.p
        constant: float = berezin_lower_constant(p)
        entries: list[dict[str, Any]] = []
        flags: list[bool | None] = []

        for index, pair in enumerate(scenario.pairs):
            affine: AffineMap | None = pair.affine
            if affine is None or abs(affine.a) > 1 + 1e-12:
                entries.append({"pair": index, "skipped": "仅对 |a| ≤ 1 的仿射 ψ 求值"})
                continue

            bounded: bool = verdict(pair, p, p).bounded

            grid_values: list[float] = [
                berezin(pair, p, complex(x, y)) for x in BEREZIN_AXIS for y in BEREZIN_AXIS
            ]
            growth: list[float] = [
                berezin(pair, p, complex(affine.evaluate(zeta))) for zeta in BEREZIN_ZETAS
            ]

            lower: list[dict[str, Any]] = []
            for zeta in scenario.settings.points:
                value: float = berezin(pair, p, complex(affine.evaluate(zeta)))
                bound: float = constant * criterion(pair, zeta) ** p
                lower.append({"zeta": zeta, "berezin": value, "bound": bound, "holds": value >= bound * (1 - 1e-9)})

            if bounded:
                bridge: bool = max(grid_values) < BEREZIN_BOUND
            else:
                bridge = _strictly_increasing(growth)

            entries.append({
                "pair": index,
                "bounded": bounded,
                "grid_max": max(grid_values),
                "growth": growth,
                "lower_constant": constant,
                "lower": lower,
            })
            flags.append(bridge and all(item["holds"] for item in lower))

        return CheckResult(
            check=Check.BEREZIN,
            data=to_jsonable({"zetas": list(BEREZIN_ZETAS), "pairs": entries}),
            agreement=_combine(flags),
        )

    def _check_matrix(self, scenario: Scenario) -> CheckResult:
        """截断矩阵：嵌套性、V 型首行为零、分部积分恒等式"""
        dims: list[int] = scenario.settings.dims
        entries: list[dict[str, Any]] = []
        artifacts: dict[str, bytes] = {}
        flags: list[bool | None] = []

        for index, pair in enumerate(scenario.pairs):
            matrices: list[TruncatedOperator] = [build(pair, n) for n in dims]

            nesting: float = 0.0
            for small, big in zip(matrices, matrices[1:]):
                n: int = small.dim
                nesting = max(nesting, float(np.max(np.abs(big.entries[:n, :n] - small.entries))))

            support: bool = True
            if pair.kind == OperatorKind.V:
                support = bool(np.all(matrices[-1].entries[0] == 0))

            residual: float | None = None
            residual_abs: float | None = None
            if max(pair.g.degree(), 0) + 2 < dims[-1]:
                residual = parts_identity_residual(pair.g, dims[-1])
                residual_abs = parts_identity_residual(pair.g, dims[-1], relative=False)

            entry: dict[str, Any] = {
                "pair": index,
                "dims": dims,
                "nesting": nesting,
                "zero_first_row": support,
                "parts_residual": residual,
                "parts_residual_abs": residual_abs,
            }
            if dims[0] <= JSON_MAX_DIM:
                entry["matrix"] = export_json(matrices[0])
            entries.append(entry)

            artifacts[f"matrix_{scenario.id}_{index}_{dims[-1]}.bin"] = to_bytes(matrices[-1])
            flags.append(nesting <= MATRIX_TOL and support and (residual is None or residual <= MATRIX_TOL))

        return CheckResult(
            check=Check.MATRIX,
            data=to_jsonable({"pairs": entries}),
            agreement=_combine(flags),
            artifacts=artifacts,
        )

    def _check_svals(self, scenario: Scenario) -> CheckResult:
        """奇异值谱，请求了 verdict 时与有界签名、紧性代理对照"""
        settings: NumericSettings = scenario.settings
        entries: list[dict[str, Any]] = []
        flags: list[bool | None] = []

        for index, pair in enumerate(scenario.pairs):
            spectra: list[SingularSpectrum] = [singular_values(build(pair, n)) for n in settings.dims]
            bounded: ProxyEvidence = boundedness_signature(pair, settings.dims, settings.growth_tol, spectra)
            compact: ProxyEvidence = compactness_proxy(
                pair, settings.dims, settings.tail_fraction, settings.tol, settings.growth_tol, spectra
            )

            entry: dict[str, Any] = {
                "pair": index,
                "dim": spectra[-1].source_dim,
                "values": spectra[-1].values,
                "bounded": bounded.to_dict(),
                "compact": compact.to_dict(),
            }

            if Check.VERDICT in scenario.checks:
                symbolic: ClassificationVerdict = verdict(pair, 2.0, 2.0)
                entry["verdict"] = symbolic.model_dump(mode="json")
                flags.append(bounded.holds == symbolic.bounded and compact.holds == symbolic.compact)

            entries.append(entry)

        return CheckResult(
            check=Check.SVALS,
            data=to_jsonable({"pairs": entries}),
            agreement=_combine(flags),
        )

    def _check_schatten(self, scenario: Scenario) -> CheckResult:
        """截断 Schatten 范数的收敛或发散趋势与符号阈值对照"""
        p: float = scenario.p
        dims: list[int] = scenario.settings.dims
        entries: list[dict[str, Any]] = []
        flags: list[bool | None] = []

        for index, pair in enumerate(scenario.pairs):
            norms: list[float] = [singular_values(build(pair, n)).schatten(p) for n in dims]
            growth: float = _relative_growth(norms[-2] ** p, norms[-1] ** p)
            monotone: bool = all(b >= a * (1 - 1e-12) for a, b in zip(norms, norms[1:]))

            symbolic: ClassificationVerdict = verdict(pair, 2.0, 2.0)
            expected: bool = symbolic.in_schatten(p)
            numeric: bool = growth < SCHATTEN_GROWTH

            entries.append({
                "pair": index,
                "p": p,
                "dims": dims,
                "norms": norms,
                "power_growth": growth,
                "cutoff": symbolic.schatten_cutoff,
                "in_schatten": expected,
            })
            flags.append(monotone and numeric == expected)

        return CheckResult(
            check=Check.SCHATTEN,
            data=to_jsonable({"pairs": entries}),
            agreement=_combine(flags),
        )

    def _two_pairs(self, scenario: Scenario, check: Check) -> tuple[SymbolPair, SymbolPair]:
        if len(scenario.pairs) != 2:
            raise ValueError(f"{check.value} 检查需要两个符号对")
        return scenario.pairs[0], scenario.pairs[1]

    def _check_difference(self, scenario: Scenario) -> CheckResult:
        """差算子的紧性与 Schatten 判定，对照差矩阵的紧性代理"""
        settings: NumericSettings = scenario.settings
        pair1, pair2 = self._two_pairs(scenario, Check.DIFFERENCE)

        compactness: DifferenceVerdict = difference_compact(pair1, pair2, scenario.p, scenario.q)
        on_hilbert: DifferenceVerdict = difference_compact(pair1, pair2, 2.0, 2.0)
        schatten: DifferenceVerdict = difference_schatten(pair1, pair2, scenario.p)

        def make(n: int) -> TruncatedOperator:
            return difference(build(pair1, n), build(pair2, n))

        proxy: ProxyEvidence = compactness_proxy(
            make, settings.dims, settings.tail_fraction, settings.tol, settings.growth_tol
        )
        summands: list[bool] = [
            compactness_proxy(pair, settings.dims, settings.tail_fraction, settings.tol, settings.growth_tol).holds
            for pair in (pair1, pair2)
        ]

        data: dict[str, Any] = {
            "compact": compactness.model_dump(mode="json"),
            "schatten": schatten.model_dump(mode="json"),
            "proxy": proxy.to_dict(),
            "summand_proxies": summands,
        }
        return CheckResult(
            check=Check.DIFFERENCE,
            data=to_jsonable(data),
            agreement=proxy.holds == on_hilbert.compact,
        )

    def _check_spectrum(self, scenario: Scenario) -> CheckResult:
        """谱圆盘半径，对照截断矩阵预解式范数随维数的增长或稳定"""
        settings: NumericSettings = scenario.settings
        for pair in scenario.pairs:
            affine: AffineMap | None = pair.affine
            if pair.kind != OperatorKind.V or affine is None or affine.a != 1 or affine.b != 0:
                raise ValueError("谱判定只适用于 ψ = id 的 V 型算子")

        g1: ComplexPolynomial = scenario.pairs[0].g
        g2: ComplexPolynomial = scenario.pairs[1].g if len(scenario.pairs) == 2 else ComplexPolynomial(())

        radius: float = spectrum_disk(g1, g2)
        pair: SymbolPair = SymbolPair(g=subtract(g1, g2))
        dims: list[int] = _spectrum_ladder(settings.dims)
        matrices: list[TruncatedOperator] = [build(pair, n) for n in dims]

        samples: list[dict[str, Any]] = []
        flags: list[bool | None] = []
        for lam in settings.lambdas:
            trajectory: list[float] = [resolvent_norm(t, lam) for t in matrices]
            inside: bool = spectrum_contains(g1, g2, lam, scenario.p)

            if inside:
                numeric: bool = _strictly_increasing(trajectory)
            else:
                numeric = abs(_relative_growth(trajectory[-2], trajectory[-1])) <= RESOLVENT_RTOL

            samples.append({"lambda": lam, "inside": inside, "trajectory": trajectory})
            flags.append(numeric and inside == (abs(lam) <= radius))

        return CheckResult(
            check=Check.SPECTRUM,
            data=to_jsonable({"radius": radius, "dims": dims, "samples": samples}),
            agreement=_combine(flags),
        )

    def _check_kernel(self, scenario: Scenario) -> CheckResult:
        """‖K_w‖_p 的数值积分与 e^{|w|²/2} 对照"""
        exponents: list[float] = sorted({*KERNEL_EXPONENTS, scenario.p})
        rows: list[dict[str, Any]] = []
        worst: float = 0.0

        for w in scenario.settings.kernel_points:
            expected: float = math.exp(abs(w) ** 2 / 2)
            for p in exponents:
                value: float = kernel_norm(w, p)
                error: float = abs(value - expected) / expected
                worst = max(worst, error)
                rows.append({"w": w, "p": p, "value": value, "expected": expected, "rel_error": error})

        return CheckResult(
            check=Check.KERNEL,
            data=to_jsonable({"values": rows, "max_rel_error": worst}),
            agreement=worst < KERNEL_RTOL,
        )

    def _check_littlewood_paley(self, scenario: Scenario) -> CheckResult:
        """单项式族 {z^n : n ≤ 40} 的 Littlewood–Paley 比值区间与网格加密稳定性"""
        eps: float = scenario.settings.eps
        ratios: dict[str, list[float]] = {}
        drift: float = 0.0

        for p in LP_EXPONENTS:
            series: list[float] = []
            for n in range(1, LP_MAX_DEGREE + 1):
                f: ComplexPolynomial = monomial(n)
                grid: QuadratureGrid = make_grid(p, p * n, eps)
                ratio: float = littlewood_paley_ratio(f, p, grid)
                refined: float = littlewood_paley_ratio(f, p, refine(grid))
                drift = max(drift, abs(refined - ratio) / ratio)
                series.append(ratio)
            ratios[str(p)] = series

        symbols: list[float] = []
        for pair in scenario.pairs:
            if not pair.g.is_zero():
                grid = make_grid(scenario.p, scenario.p * pair.g.degree(), eps)
                symbols.append(littlewood_paley_ratio(pair.g, scenario.p, grid))

        values: list[float] = [r for series in ratios.values() for r in series]
        low, high = LP_INTERVAL
        inside: bool = all(low <= r <= high for r in values)

        data: dict[str, Any] = {
            "ratios": ratios,
            "min": min(values),
            "max": max(values),
            "interval": list(LP_INTERVAL),
            "refine_drift": drift,
            "symbols": symbols,
        }
        return CheckResult(
            check=Check.LITTLEWOOD_PALEY,
            data=to_jsonable(data),
            agreement=inside and drift < LP_REFINE_RTOL,
        )

#!/usr/bin/env python3
"""
定理検証モジュール
Q 級数の構築、モジュラー形式の基底へのあてはめ、h 係数の再導出、
各定理・系を特性形式の厳密な多項式恒等式として検証する
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fnmatch import fnmatchcase
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Dict, Any, List, Tuple, Callable, Mapping, Union

import sympy as sp

from charforms import (
    ALL_CONVENTIONS,
    BUNDLE_LABELS,
    DEFAULT_CONVENTION,
    AnomalyClass,
    LambdaOp,
    LineConvention,
    ManifoldContext,
    Twist,
    a_hat,
    anomaly_class,
    c2_alias,
    ch_line,
    ch_tangent,
    e8_character,
    e8_theta_series,
    genus_factor,
    hirzebruch_l,
    impose_vanishing,
    lambda_sym,
    line_factor,
    manifold_context,
    resolve_l_convention,
    witten_exponent,
)
from engine_error_handler import (
    EngineErrorType,
    InternalEngineError,
    RingContextError,
    SeriesTruncationError,
    UnknownNameError,
)
from graded_ring import (
    GeneratorTable,
    GradedPoly,
    format_rational,
    make_ring_context,
    poly_exp,
    substitute,
    to_rational,
)
from modforms import named_series
from qseries import QSeries, qs_coefficient, qs_exp


logger = logging.getLogger('TheoremVerifier')

Coefficient = Union[Fraction, GradedPoly]


def _is_zero(value: Coefficient) -> bool:
    if isinstance(value, GradedPoly):
        return value.is_zero()
    return value == 0


# モジュラー群

class ModularGroup(Enum):
    """あてはめに使うモジュラー群"""
    SL2Z = "SL2Z"
    GAMMA0_2 = "GAMMA0_2"        # Γ_0(2)
    GAMMA_UP0_2 = "GAMMA_UP0_2"  # Γ^0(2)


_GROUP_ALIASES = {
    "SL2(Z)": ModularGroup.SL2Z,
    "Γ0(2)": ModularGroup.GAMMA0_2,
    "Γ_0(2)": ModularGroup.GAMMA0_2,
    "Γ⁰(2)": ModularGroup.GAMMA_UP0_2,
    "Γ^0(2)": ModularGroup.GAMMA_UP0_2,
}

_GRID_STEP = {
    ModularGroup.SL2Z: Fraction(1),
    ModularGroup.GAMMA0_2: Fraction(1),
    ModularGroup.GAMMA_UP0_2: Fraction(1, 2),
}


def parse_group(text: str) -> ModularGroup:
    """群の名前（SL2Z, GAMMA0_2, GAMMA_UP0_2 または Γ 表記）を解釈

    Raises:
        UnknownNameError: 未登録の名前
    """
    if text in _GROUP_ALIASES:
        return _GROUP_ALIASES[text]
    try:
        return ModularGroup(text.upper())
    except ValueError:
        raise UnknownNameError(f"unknown modular group '{text}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': [g.value for g in ModularGroup]}) from None


# Q 級数の種類

@dataclass(frozen=True)
class SeriesVariant:
    """Q 級数の種類（文脈・Witten 束・アノマリー類・重さ・群）"""
    variant_id: str
    context_name: str
    twist: Twist
    anomaly: AnomalyClass
    expected_weight: int
    group: ModularGroup

    @property
    def context(self) -> ManifoldContext:
        return manifold_context(self.context_name)


SERIES_VARIANTS: Dict[str, SeriesVariant] = {v.variant_id: v for v in (
    SeriesVariant("Q14_TWO_BUNDLES", "D14C", Twist.SPINC_Q, AnomalyClass.A, 14, ModularGroup.SL2Z),
    SeriesVariant("Q14_ONE_BUNDLE", "D14C1", Twist.SPINC_Q, AnomalyClass.A1, 10, ModularGroup.SL2Z),
    SeriesVariant("R10_ONE_BUNDLE", "D10C1", Twist.SPINC_Q, AnomalyClass.A1, 8, ModularGroup.SL2Z),
    SeriesVariant("Q1_12", "D12", Twist.SPIN_Q1, AnomalyClass.A2, 14, ModularGroup.GAMMA0_2),
    SeriesVariant("Q2_12", "D12", Twist.SPIN_Q2, AnomalyClass.A2, 14, ModularGroup.GAMMA_UP0_2),
    SeriesVariant("Q1_12_ONE_BUNDLE", "D12_1", Twist.SPIN_Q1, AnomalyClass.A3, 10,
                  ModularGroup.GAMMA0_2),
    SeriesVariant("Q2_12_ONE_BUNDLE", "D12_1", Twist.SPIN_Q2, AnomalyClass.A3, 10,
                  ModularGroup.GAMMA_UP0_2),
)}


def series_variant(name: str) -> SeriesVariant:
    if name not in SERIES_VARIANTS:
        raise UnknownNameError(f"unknown series variant '{name}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': list(SERIES_VARIANTS)})
    return SERIES_VARIANTS[name]


def build_q(variant: Union[SeriesVariant, str], order: Any,
            l_convention: Union[LineConvention, str, None] = None,
            top_component: bool = False) -> QSeries:
    """Q 級数 exp(E₂A/24)·種数·(線束因子)·ch(Witten 束)·∏φ⁸ch(V_b) を構築

    Args:
        variant: 級数の種類または名前
        order: 打ち切り次数
        l_convention: spin^c の場合の線束の規約（省略時 REAL2）
        top_component: True なら各係数を最高次数の成分に制限

    Returns:
        文脈の環に値をとる q 級数
    """
    if isinstance(variant, str):
        variant = series_variant(variant)
    convention = None
    if variant.twist is Twist.SPINC_Q:
        convention = LineConvention(l_convention or DEFAULT_CONVENTION)
    series = _build_q_cached(variant, to_rational(order), convention)
    if top_component:
        dimension = variant.context.dimension
        series = series.map_coefficients(lambda poly: poly.component(dimension))
    return series


@lru_cache(maxsize=64)
def _build_q_cached(variant: SeriesVariant, order: Fraction,
                    convention: Optional[LineConvention]) -> QSeries:
    started = time.perf_counter()
    ctx = variant.context
    anomaly = anomaly_class(ctx, variant.anomaly).scale(Fraction(1, 24))
    exponent = named_series("E2", order).promote(ctx.ring).scale(anomaly)
    exponent = exponent + witten_exponent(ctx, variant.twist, convention, order)
    series = qs_exp(exponent).scale(genus_factor(ctx, variant.twist))
    if convention is not None:
        series = series.scale(line_factor(ctx, convention))
    for bundle in ctx.bundles:
        series = series * e8_theta_series(ctx, bundle, order)
    elapsed = (time.perf_counter() - started) * 1000
    logger.debug(f"{variant.variant_id} through q^{order} built in {elapsed:.0f} ms")
    return series.truncate(order)


# モジュラー形式の基底へのあてはめ

@dataclass
class ModularFitResult:
    """基底へのあてはめ結果"""
    group: ModularGroup
    weight: int
    basis: List[str]
    coefficients: List[Coefficient]
    fit_orders: List[Fraction]
    residuals: Dict[Fraction, Coefficient]

    @property
    def passed(self) -> bool:
        return all(_is_zero(value) for value in self.residuals.values())

    @property
    def first_failure(self) -> Optional[Fraction]:
        failing = [e for e, value in self.residuals.items() if not _is_zero(value)]
        return min(failing) if failing else None

    @property
    def certified_through(self) -> Fraction:
        return max(list(self.residuals) + self.fit_orders)


_SL2Z_BASIS = {8: "E4^2", 10: "E4*E6", 14: "E4^2*E6"}
_LEVEL2_GENERATORS = {
    ModularGroup.GAMMA0_2: ("delta1", "eps1"),
    ModularGroup.GAMMA_UP0_2: ("delta2", "eps2"),
}


def _level2_name(delta: str, eps: str, a: int, r: int) -> str:
    pieces = []
    if a:
        pieces.append(f"(8{delta})" + (f"^{a}" if a > 1 else ""))
    if r:
        pieces.append(eps + (f"^{r}" if r > 1 else ""))
    return "*".join(pieces) or "1"


def modular_basis(group: ModularGroup, weight: int, order: Any) -> List[Tuple[str, QSeries]]:
    """重さ weight のモジュラー形式の基底

    SL2Z は単項式1つ、レベル2は (8δ)^{w/2−2r}ε^r（r = 0, 1, …）。

    Raises:
        RingContextError: 対応しない重さ
    """
    group = ModularGroup(group)
    if group is ModularGroup.SL2Z:
        if weight not in _SL2Z_BASIS:
            raise RingContextError(f"unsupported SL2Z weight {weight}",
                                   EngineErrorType.UNSUPPORTED_ARGUMENT,
                                   {'weights': sorted(_SL2Z_BASIS)})
        name = _SL2Z_BASIS[weight]
        return [(name, named_series(name, order))]

    if weight <= 0 or weight % 2:
        raise RingContextError(f"unsupported level 2 weight {weight}",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    delta_name, eps_name = _LEVEL2_GENERATORS[group]
    delta = named_series(delta_name, order).scale(8)
    eps = named_series(eps_name, order)
    basis = []
    for r in range(weight // 4 + 1):
        a = weight // 2 - 2 * r
        basis.append((_level2_name(delta_name, eps_name, a, r), (delta ** a) * (eps ** r)))
    return basis


def solve_basis_system(matrix: List[List[Any]], rhs: List[Coefficient]) -> List[Coefficient]:
    """有理数の係数行列と係数環の右辺の連立一次方程式

    行列は sympy で有理数のまま逆行列にし、右辺（有理数または多項式）に掛ける。

    Raises:
        InternalEngineError: 行列が特異な場合
    """
    size = len(matrix)
    if len(rhs) != size or any(len(row) != size for row in matrix):
        raise RingContextError("fit system must be square", EngineErrorType.UNSUPPORTED_ARGUMENT)
    if not size:
        return []
    rows = [[to_rational(x) for x in row] for row in matrix]
    basis_matrix = sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row]
                              for row in rows])
    try:
        inverse = basis_matrix.inv()
    except ValueError as e:
        raise InternalEngineError(f"singular fit system: {e}", EngineErrorType.SINGULAR_SYSTEM,
                                  {'size': size}) from e

    solution: List[Coefficient] = []
    for i in range(size):
        total: Coefficient = Fraction(0)
        for j in range(size):
            entry = inverse[i, j]
            if entry != 0:
                total = rhs[j] * Fraction(int(entry.p), int(entry.q)) + total
        solution.append(total)
    return solution


def _check_triangular(matrix: List[List[Fraction]]) -> None:
    for i, row in enumerate(matrix):
        if not row[i] or any(row[j] for j in range(i + 1, len(row))):
            raise InternalEngineError("level 2 fit system is not triangular",
                                      EngineErrorType.SINGULAR_SYSTEM, {'row': i})


def _combine(basis: List[Tuple[str, QSeries]], coefficients: List[Coefficient],
             ring: Optional[GeneratorTable], order: Any) -> QSeries:
    total = QSeries.zero(order, ring)
    for (_, series), coefficient in zip(basis, coefficients):
        if ring is not None:
            series = series.promote(ring)
        total = total + series.scale(coefficient)
    return total


def _fit(series: QSeries, group: ModularGroup, weight: int,
         extra_orders: int = 2) -> ModularFitResult:
    cap = series.order_cap
    step = _GRID_STEP[group]
    basis = modular_basis(group, weight, cap)
    fit_orders = [step * i for i in range(len(basis))]
    needed = fit_orders[-1] + extra_orders * step
    if cap < needed:
        raise SeriesTruncationError(
            f"fit of weight {weight} over {group.value} needs the series through q^{needed}, "
            f"got q^{cap}",
            EngineErrorType.TRUNCATION_EXCEEDED,
            {'order_cap': str(cap), 'requested': str(needed)})

    matrix = [[qs_coefficient(b, e) for _, b in basis] for e in fit_orders]
    rhs = [qs_coefficient(series, e) for e in fit_orders]
    if group is ModularGroup.GAMMA_UP0_2:
        _check_triangular(matrix)
    coefficients = solve_basis_system(matrix, rhs)
    logger.debug(f"{group.value} weight {weight}: solved {len(basis)}x{len(basis)} system")

    difference = series - _combine(basis, coefficients, series.ring, cap)
    residuals: Dict[Fraction, Coefficient] = {}
    exponent = fit_orders[-1] + step
    while exponent <= cap:
        residuals[exponent] = qs_coefficient(difference, exponent)
        exponent += step
    for exponent, value in difference.coefficients.items():
        if exponent not in residuals and exponent not in fit_orders:
            residuals[exponent] = value
    return ModularFitResult(group, weight, [name for name, _ in basis], coefficients,
                            fit_orders, dict(sorted(residuals.items())))


def fit_sl2z(series: QSeries, weight: int) -> ModularFitResult:
    """SL2(Z) の重さ 8/10/14 の1次元空間へのあてはめ（q⁰ で係数を決め、残りは残差）"""
    return _fit(series, ModularGroup.SL2Z, weight)


def fit_gamma(series: QSeries, group: Union[ModularGroup, str], weight: int) -> ModularFitResult:
    """レベル2の基底 (8δ)^{w/2−2r}ε^r へのあてはめ

    Γ^0(2) は指数 0, 1/2, 1, … で三角な連立方程式、Γ_0(2) は整数指数で一般の消去。

    Raises:
        SeriesTruncationError: 基底の次元より2段以上多い次数がない場合
    """
    group = ModularGroup(group)
    if group is ModularGroup.SL2Z:
        raise RingContextError("fit_gamma needs a level 2 group",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    return _fit(series, group, weight)


def fit_series(series: QSeries, group: Union[ModularGroup, str], weight: int) -> ModularFitResult:
    group = ModularGroup(group)
    if group is ModularGroup.SL2Z:
        return fit_sl2z(series, weight)
    return fit_gamma(series, group, weight)


# 束の語の形式環

WORD_SYMBOLS = ("T", "L2T", "L3T", "Wi", "Wj", "A")
FORMAL_ORDER = Fraction(3, 2)


@lru_cache(maxsize=None)
def word_ring() -> GeneratorTable:
    """T̃, Λ²T̃, Λ³T̃, W_i, W_j, A を独立な記号とみなす環（語の長さ3まで）"""
    return make_ring_context([(symbol, 2) for symbol in WORD_SYMBOLS], 6)


def word(*symbols: str) -> GradedPoly:
    ring = word_ring()
    result = GradedPoly.one(ring)
    for symbol in symbols:
        result = result * GradedPoly.generator(ring, symbol)
    return result


def word_coefficient(poly: GradedPoly, *symbols: str) -> Fraction:
    """語の係数（記号なしなら定数項）"""
    exponent = [0] * len(WORD_SYMBOLS)
    for symbol in symbols:
        exponent[WORD_SYMBOLS.index(symbol)] += 1
    return poly.terms.get(tuple(exponent), Fraction(0))


def formal_q2_series(bundles: int) -> QSeries:
    """Q2 型の級数の q^{3/2} までの形式展開"""
    ring = word_ring()
    T, L2T, L3T, A = word("T"), word("L2T"), word("L3T"), word("A")
    anomaly = QSeries({0: 1, 1: -A}, FORMAL_ORDER, ring)
    twist = QSeries({0: 1, Fraction(1, 2): -T, 1: L2T + T,
                     FORMAL_ORDER: -(L3T + T + T * T)}, FORMAL_ORDER, ring)
    phi_name = "phi16" if bundles == 2 else "phi8"
    series = anomaly * twist * named_series(phi_name, FORMAL_ORDER).promote(ring)
    for label in BUNDLE_LABELS[:bundles]:
        series = series * QSeries({0: 1, 1: word("W" + label)}, FORMAL_ORDER, ring)
    return series


@dataclass(frozen=True)
class FormalSkeleton:
    """形式展開を Γ^0(2) の基底にあてはめた h 係数"""
    bundles: int
    weight: int
    h: Tuple[GradedPoly, ...]


@lru_cache(maxsize=None)
def formal_skeleton(bundles: int) -> FormalSkeleton:
    """h_r（bundles=2、重さ14）または h′_r（bundles=1、重さ10）を語の多項式として求める"""
    if bundles not in (1, 2):
        raise RingContextError(f"formal skeleton needs 1 or 2 bundles, got {bundles}",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    weight = 14 if bundles == 2 else 10
    series = formal_q2_series(bundles)
    basis = modular_basis(ModularGroup.GAMMA_UP0_2, weight, FORMAL_ORDER)
    fit_orders = [Fraction(i, 2) for i in range(len(basis))]
    matrix = [[qs_coefficient(b, e) for _, b in basis] for e in fit_orders]
    _check_triangular(matrix)
    h = solve_basis_system(matrix, [qs_coefficient(series, e) for e in fit_orders])
    return FormalSkeleton(bundles, weight, tuple(h))


def swap_combination(h: List[Coefficient], weight: int, exponent: Any) -> Coefficient:
    """2⁶Σ h_r(8δ₁)^{w/2−2r}ε₁^r の q^exponent の係数"""
    exponent = to_rational(exponent)
    basis = modular_basis(ModularGroup.GAMMA0_2, weight, max(exponent, Fraction(1)))
    total: Coefficient = Fraction(0)
    for (_, series), value in zip(basis, h):
        total = value * (64 * qs_coefficient(series, exponent)) + total
    return total


def printed_h_displays(bundles: int, value: Callable[[str], Fraction]) -> List[GradedPoly]:
    """h_r（h′_r）の表示を語の多項式として組み立てる"""
    T, L2T, L3T, A = word("T"), word("L2T"), word("L3T"), word("A")
    one = word()
    if bundles == 1:
        return [
            -one,
            T + value("120"),
            -(L2T + word("Wi") + T.scale(value("81")) + value("3712")) + A,
        ]
    W = word("Wi") + word("Wj")
    c168, c9224, c129, c88 = value("168"), value("9224"), value("129"), value("88")
    h3 = (T * T + T * (W - 16) + T + L3T
          + value("508704") - (T + c168).scale(value("6868"))
          + c88 * c9224 + T.scale(c88 * c129) + (L2T + W).scale(c88)
          - A * (T + c88))
    return [
        -one,
        T + c168,
        -(T.scale(c129) + L2T + W + c9224) + A,
        h3,
    ]


def realize_words(ctx: ManifoldContext, poly: GradedPoly,
                  anomaly: Union[AnomalyClass, str]) -> GradedPoly:
    """語の多項式を文脈のチャーン指標（A はアノマリー類）に写す"""
    tangent = ch_tangent(ctx)
    images = {
        "T": tangent.value,
        "L2T": lambda_sym(LambdaOp.LAMBDA2, tangent).value,
        "L3T": lambda_sym(LambdaOp.LAMBDA3, tangent).value,
        "A": anomaly_class(ctx, anomaly),
    }
    for bundle in ctx.bundles:
        images["W" + bundle] = e8_character(ctx, bundle, 1).extract_W(1).value
    result = GradedPoly.zero(ctx.ring)
    for exponent, coefficient in poly.terms.items():
        term = GradedPoly.constant(ctx.ring, coefficient)
        for symbol, power in zip(WORD_SYMBOLS, exponent):
            if not power:
                continue
            if symbol not in images:
                raise RingContextError(f"word symbol {symbol} has no image in {ctx.name}",
                                       EngineErrorType.INVALID_GENERATOR)
            term = term * images[symbol] ** power
        result = result + term
    return result


# 検証結果

class CheckStatus(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    CONVENTION_DEPENDENT = "CONVENTION_DEPENDENT"


@dataclass
class ConstantCheck:
    """印刷された定数と基底の展開から再導出した値"""
    name: str
    expected: Fraction
    computed: Fraction

    @property
    def matches(self) -> bool:
        return self.expected == self.computed


@dataclass
class TheoremReport:
    """定理・系ごとの検証結果"""
    theorem_id: str
    status: CheckStatus
    lhs: GradedPoly
    rhs: GradedPoly
    difference: GradedPoly
    constants_checked: List[ConstantCheck] = field(default_factory=list)
    convention: Optional[LineConvention] = None
    side_checks: Dict[str, Coefficient] = field(default_factory=dict)
    residuals: Dict[Fraction, Coefficient] = field(default_factory=dict)
    certification: str = "exact identity"
    q_order: Fraction = Fraction(0)
    ms: int = 0
    passing_conventions: List[LineConvention] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL

    def failing_side_checks(self) -> List[str]:
        return [name for name, value in self.side_checks.items() if not _is_zero(value)]

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        """JSON 用（有理数はすべて "p/q" 文字列）"""
        return {
            'theorem': self.theorem_id,
            'status': self.status.value,
            'convention': self.convention.value if self.convention else None,
            'difference': self.difference.render(),
            'constants': [
                {'name': c.name, 'expected': format_rational(c.expected),
                 'computed': format_rational(c.computed)}
                for c in self.constants_checked
            ],
            'side_checks': {name: _render(value) for name, value in self.side_checks.items()},
            'certification': self.certification,
            'q_order': format_rational(self.q_order),
            'ms': self.ms if include_timings else 0,
        }


def _render(value: Coefficient) -> str:
    if isinstance(value, GradedPoly):
        return value.render()
    return format_rational(value)


@dataclass
class _Outcome:
    lhs: GradedPoly
    rhs: GradedPoly
    constants: List[ConstantCheck]
    side_checks: Dict[str, Coefficient] = field(default_factory=dict)
    residuals: Dict[Fraction, Coefficient] = field(default_factory=dict)
    certification: str = "exact identity"
    q_order: Fraction = Fraction(0)


class _PrintedConstants:
    """定理に現れる定数（perturb で故意にずらせる）"""

    def __init__(self, printed: Mapping[str, Fraction],
                 perturb: Optional[Mapping[str, Any]] = None) -> None:
        perturb = dict(perturb or {})
        unknown = set(perturb) - set(printed)
        if unknown:
            raise UnknownNameError(f"unknown constant name(s): {', '.join(sorted(unknown))}",
                                   EngineErrorType.UNKNOWN_NAME, {'registry': list(printed)})
        self._values = {name: to_rational(value) + to_rational(perturb.get(name, 0))
                        for name, value in printed.items()}

    def __call__(self, name: str) -> Fraction:
        return self._values[name]

    def check(self, name: str, computed: Any) -> ConstantCheck:
        return ConstantCheck(name, self._values[name], to_rational(computed))


def _certify(fit: ModularFitResult) -> str:
    if fit.passed:
        return f"certified through q^{format_rational(fit.certified_through)}"
    return f"fit residual at q^{format_rational(fit.first_failure)}"


def _anomaly_quotient(anomaly: GradedPoly) -> GradedPoly:
    """(e^{A/24}−1)/A = Σ_{k≥1} A^{k−1}/(24^k k!)"""
    total = GradedPoly.zero(anomaly.context)
    power = GradedPoly.one(anomaly.context)
    k = 1
    denominator = 24
    while not power.is_zero():
        total = total + power.scale(Fraction(1, denominator))
        k += 1
        denominator *= 24 * k
        power = power * anomaly
    return total


# spin^c（2.x 系列）の特性形式

@dataclass(frozen=True)
class _SpincForms:
    ctx: ManifoldContext
    anomaly: GradedPoly
    e: GradedPoly
    g: GradedPoly
    Y: GradedPoly
    B1: GradedPoly
    B2: GradedPoly
    W: Tuple[GradedPoly, ...]
    Wbar: Tuple[GradedPoly, ...]


@lru_cache(maxsize=None)
def _spinc_forms(variant_id: str, convention: LineConvention) -> _SpincForms:
    variant = SERIES_VARIANTS[variant_id]
    ctx = variant.context
    anomaly = anomaly_class(ctx, variant.anomaly)
    tangent = ch_tangent(ctx)
    line = ch_line(ctx, convention)
    B2 = (lambda_sym(LambdaOp.LAMBDA2, line) - line - lambda_sym(LambdaOp.TENSOR, tangent, line)
          + lambda_sym(LambdaOp.SYM2, tangent) + tangent)
    characters = [e8_character(ctx, bundle, 2) for bundle in ctx.bundles]
    return _SpincForms(
        ctx=ctx,
        anomaly=anomaly,
        e=poly_exp(anomaly.scale(Fraction(1, 24))),
        g=_anomaly_quotient(anomaly),
        Y=a_hat(ctx) * line_factor(ctx, convention),
        B1=(tangent - line).value,
        B2=B2.value,
        W=tuple(c.extract_W(1).value for c in characters),
        Wbar=tuple(c.extract_W(2).value for c in characters),
    )


def _sl2z_data(variant: SeriesVariant) -> Dict[str, Fraction]:
    """φ^{8b} と SL2Z 基底の q¹, q² 係数"""
    phi = named_series("phi16" if variant.context.e8_bundles == 2 else "phi8", 2)
    basis = named_series(_SL2Z_BASIS[variant.expected_weight], 2)
    return {
        'phi1': qs_coefficient(phi, 1), 'phi2': qs_coefficient(phi, 2),
        'f1': qs_coefficient(basis, 1), 'f2': qs_coefficient(basis, 2),
    }


def _sl2z_certificate(variant: SeriesVariant, order: Fraction,
                      convention: LineConvention) -> ModularFitResult:
    series = build_q(variant, order, convention, top_component=True)
    return fit_sl2z(series, variant.expected_weight)


def _section2_order(order: Fraction) -> Fraction:
    return max(order, Fraction(2))


def _check_anomaly_shift(variant_id: str, shift_name: str, order: Fraction,
                         convention: LineConvention, value: _PrintedConstants) -> _Outcome:
    """{Y ch(B1+s+ΣW)}^{(d)} = A{eY − gY ch(B1+s+ΣW)}^{(d−4)}、s = φ₁ − f₁"""
    variant = SERIES_VARIANTS[variant_id]
    forms = _spinc_forms(variant_id, convention)
    d = forms.ctx.dimension
    twisted = forms.Y * (forms.B1 + value(shift_name) + sum(forms.W))
    lhs = twisted.component(d)
    rhs = forms.anomaly * (forms.e * forms.Y - forms.g * twisted).component(d - 4)
    data = _sl2z_data(variant)
    order = _section2_order(order)
    fit = _sl2z_certificate(variant, order, convention)
    return _Outcome(lhs, rhs, [value.check(shift_name, data['phi1'] - data['f1'])],
                    residuals=fit.residuals, certification=_certify(fit), q_order=order)


def _ladder_checks(theorem_id: str, variant_id: str, shift: Fraction, factor: Fraction,
                   convention: LineConvention) -> Tuple[ConstantCheck, Dict[str, Coefficient]]:
    """アノマリー類を消した定理の両辺の差と系の差の比較

    定理のずれ s_T、系のずれ s_C と係数 r について
    (定理の差)|_{A=0} = {Y ch(B1+s_C+ΣW)}^{(d)} + (s_T − s_C){Y}^{(d)} なので、
    系の差との食い違いは (s_T − s_C + r){Y}^{(d)} で、s_T = s_C − r のとき 0。
    """
    variant = SERIES_VARIANTS[variant_id]
    forms = _spinc_forms(variant_id, convention)
    d = forms.ctx.dimension
    shift_name, theorem_shift = THEOREM_REGISTRY[theorem_id].printed[0]
    twisted = forms.Y * (forms.B1 + theorem_shift + sum(forms.W))
    theorem_difference = (twisted.component(d)
                          - (forms.anomaly * (forms.e * forms.Y - forms.g * twisted))
                          .component(d - 4))
    reduced = impose_vanishing(forms.ctx, variant.anomaly, theorem_difference)
    corollary = (forms.Y * (forms.B1 + shift + sum(forms.W))).component(d)
    corollary = corollary - forms.Y.scale(factor).component(d)
    corollary = impose_vanishing(forms.ctx, variant.anomaly, corollary)
    return (ConstantCheck(f"{theorem_id} {shift_name}", theorem_shift, shift - factor),
            {f"ladder {theorem_id}": reduced - corollary})


def _check_first_order(theorem_id: str, variant_id: str, shift_name: Optional[str],
                       factor_name: str, order: Fraction, convention: LineConvention,
                       value: _PrintedConstants) -> _Outcome:
    """アノマリー類が消えるとき {Y ch(B1+s+ΣW)}^{(d)} = r{Y}^{(d)}

    theorem_id の定理に A = 0 を代入した式とも照合する。
    """
    variant = SERIES_VARIANTS[variant_id]
    forms = _spinc_forms(variant_id, convention)
    d = forms.ctx.dimension
    data = _sl2z_data(variant)
    shift = value(shift_name) if shift_name else Fraction(0)
    lhs = (forms.Y * (forms.B1 + shift + sum(forms.W))).component(d)
    rhs = forms.Y.scale(value(factor_name)).component(d)
    if shift_name:
        constants = [value.check(shift_name, data['phi1']), value.check(factor_name, data['f1'])]
    else:
        constants = [value.check(factor_name, data['f1'] - data['phi1'])]
    ladder_constant, ladder = _ladder_checks(theorem_id, variant_id, shift,
                                             value(factor_name), convention)
    constants.append(ladder_constant)
    which = variant.anomaly
    order = _section2_order(order)
    fit = _sl2z_certificate(variant, order, convention)
    return _Outcome(impose_vanishing(forms.ctx, which, lhs),
                    impose_vanishing(forms.ctx, which, rhs), constants, ladder,
                    residuals=fit.residuals, certification=_certify(fit), q_order=order)


def _check_second_order(variant_id: str, phi1_name: str, phi2_name: str, factor_name: str,
                        order: Fraction, convention: LineConvention,
                        value: _PrintedConstants) -> _Outcome:
    """アノマリー類が消えるときの q² の係数の恒等式"""
    variant = SERIES_VARIANTS[variant_id]
    forms = _spinc_forms(variant_id, convention)
    d = forms.ctx.dimension
    data = _sl2z_data(variant)
    p1, p2 = value(phi1_name), value(phi2_name)
    bundle_sum = sum(forms.W)
    bracket = (forms.B2 + forms.B1 * (bundle_sum + p1) + p2 + bundle_sum * p1
               + sum(forms.Wbar))
    if len(forms.W) == 2:
        bracket = bracket + forms.W[0] * forms.W[1]
    lhs = (forms.Y * bracket).component(d)
    rhs = forms.Y.scale(value(factor_name)).component(d)
    constants = [
        value.check(phi1_name, data['phi1']),
        value.check(phi2_name, data['phi2']),
        value.check(factor_name, data['f2']),
    ]
    which = variant.anomaly
    order = _section2_order(order)
    fit = _sl2z_certificate(variant, order, convention)
    return _Outcome(impose_vanishing(forms.ctx, which, lhs),
                    impose_vanishing(forms.ctx, which, rhs), constants,
                    residuals=fit.residuals, certification=_certify(fit), q_order=order)


# spin（3.x 系列）の特性形式

@dataclass(frozen=True)
class _SpinForms:
    ctx: ManifoldContext
    which: AnomalyClass
    anomaly: GradedPoly
    e: GradedPoly
    A_hat: GradedPoly
    X: GradedPoly
    L_hat: GradedPoly
    T: GradedPoly
    L2: GradedPoly
    L3: GradedPoly
    W: Tuple[GradedPoly, ...]
    c2: GradedPoly


@lru_cache(maxsize=None)
def _spin_forms(context_name: str, which: AnomalyClass) -> _SpinForms:
    ctx = manifold_context(context_name)
    anomaly = anomaly_class(ctx, which)
    e = poly_exp(anomaly.scale(Fraction(1, 24)))
    genus = a_hat(ctx)
    tangent = ch_tangent(ctx)
    return _SpinForms(
        ctx=ctx,
        which=which,
        anomaly=anomaly,
        e=e,
        A_hat=genus,
        X=e * genus,
        L_hat=hirzebruch_l(ctx),
        T=tangent.value,
        L2=lambda_sym(LambdaOp.LAMBDA2, tangent).value,
        L3=lambda_sym(LambdaOp.LAMBDA3, tangent).value,
        W=tuple(e8_character(ctx, b, 1).extract_W(1).value for b in ctx.bundles),
        c2=c2_alias(ctx, "i"),
    )


def _h_side_checks(forms: _SpinForms, variant_id: str, order: Fraction,
                   value: _PrintedConstants) -> Tuple[Dict[str, Coefficient], ModularFitResult]:
    """形式展開の h と実際の Q2 のあてはめの h を、それぞれ表示と比較"""
    bundles = len(forms.W)
    skeleton = formal_skeleton(bundles)
    displays = printed_h_displays(bundles, value)
    variant = SERIES_VARIANTS[variant_id]
    fit = fit_gamma(build_q(variant, order, top_component=True), variant.group,
                    variant.expected_weight)
    prime = "" if bundles == 2 else "'"
    checks: Dict[str, Coefficient] = {}
    for r, display in enumerate(displays):
        realized = (forms.X * realize_words(forms.ctx, display, forms.which)).component(12)
        checks[f"h{prime}{r} formal"] = skeleton.h[r] - display
        checks[f"h{prime}{r} fitted"] = fit.coefficients[r] - realized
    return checks, fit


def _check_signature_pair(order: Fraction, value: _PrintedConstants,
                          vanishing: bool) -> _Outcome:
    """32{e^{A2/24}L̂}^{(12)} と Â の指標の組合せ（2つの束）"""
    forms = _spin_forms("D12", AnomalyClass.A2)
    W = forms.W[0] + forms.W[1]
    bracket = (value("2240") + forms.T.scale(value("309")) + (forms.L2 + W).scale(value("24"))
               + forms.T * forms.T + forms.T * W + forms.L3)
    correction = forms.anomaly * (value("576") + forms.T.scale(24))
    if vanishing:
        lhs = impose_vanishing(forms.ctx, forms.which, forms.L_hat.scale(32).component(12))
        rhs = impose_vanishing(forms.ctx, forms.which, (forms.A_hat * bracket).component(12))
    else:
        lhs = (forms.e * forms.L_hat).scale(32).component(12)
        rhs = (forms.X * bracket - (forms.X * correction).scale(Fraction(1, 24))).component(12)

    skeleton = formal_skeleton(2)
    combination = swap_combination(list(skeleton.h), 14, 0).scale(32)
    T, A = word("T"), word("A")
    Ww = word("Wi") + word("Wj")
    printed = (value("2240") + T.scale(value("309")) + (word("L2T") + Ww).scale(value("24"))
               + T * T + T * Ww + word("L3T") - (A * (value("576") + T.scale(24))).scale(Fraction(1, 24)))
    constants = [
        value.check("2240", word_coefficient(combination)),
        value.check("309", word_coefficient(combination, "T")),
        value.check("24", word_coefficient(combination, "L2T")),
        value.check("576", -24 * word_coefficient(combination, "A")),
    ]
    outcome = _Outcome(lhs, rhs, constants, {"formal combination": combination - printed})
    if not vanishing:
        h = skeleton.h
        outcome.constants.extend([
            value.check("168", word_coefficient(h[1])),
            value.check("9224", -word_coefficient(h[2])),
            value.check("129", -word_coefficient(h[2], "T")),
        ])
        order = max(order, Fraction(5, 2))
        checks, fit = _h_side_checks(forms, "Q2_12", order, value)
        outcome.side_checks.update(checks)
        outcome.residuals = fit.residuals
        outcome.certification = _certify(fit)
        outcome.q_order = order
    return outcome


def _check_signature_single(order: Fraction, value: _PrintedConstants,
                            vanishing: bool) -> _Outcome:
    """{e^{A3/24}L̂}^{(12)} = −½{X ch[17T+Λ²T+W+128]} + (1/60){c₂X}"""
    forms = _spin_forms("D12_1", AnomalyClass.A3)
    bracket = forms.T.scale(value("17")) + forms.L2 + forms.W[0] + value("128")
    if vanishing:
        lhs = impose_vanishing(forms.ctx, forms.which, forms.L_hat.scale(-2).component(12))
        rhs = impose_vanishing(forms.ctx, forms.which, (forms.A_hat * bracket).component(12))
    else:
        lhs = (forms.e * forms.L_hat).component(12)
        rhs = ((forms.X * bracket).scale(Fraction(-1, 2))
               + (forms.c2 * forms.X).scale(value("1/60"))).component(12)

    skeleton = formal_skeleton(1)
    combination = swap_combination(list(skeleton.h), 10, 0)
    printed = ((word("T").scale(value("17")) + word("L2T") + word("Wi") + value("128"))
               .scale(Fraction(-1, 2)) + word("A").scale(30 * value("1/60")))
    constants = [
        value.check("17", -2 * word_coefficient(combination, "T")),
        value.check("128", -2 * word_coefficient(combination)),
        value.check("1/60", word_coefficient(combination, "A") / 30),
    ]
    outcome = _Outcome(lhs, rhs, constants, {"formal combination": combination - printed})
    if not vanishing:
        h = skeleton.h
        outcome.constants.extend([
            value.check("120", word_coefficient(h[1])),
            value.check("3712", -word_coefficient(h[2])),
            value.check("81", -word_coefficient(h[2], "T")),
        ])
        order = max(order, Fraction(2))
        checks, fit = _h_side_checks(forms, "Q2_12_ONE_BUNDLE", order, value)
        outcome.side_checks.update(checks)
        outcome.residuals = fit.residuals
        outcome.certification = _certify(fit)
        outcome.q_order = order
    return outcome


def _tangent_multiplicity(ctx: ManifoldContext, twist: Twist) -> Fraction:
    """Witten 束の q¹ の係数に現れる T̃ の重複度"""
    first = qs_coefficient(witten_exponent(ctx, twist, None, 1), 1).component(4)
    s1 = ctx.generator("s1")
    exponent = next(iter(s1.terms))
    return first.terms.get(exponent, Fraction(0)) / ch_tangent(ctx).component(4).terms[exponent]


def _check_first_order_signature(order: Fraction, value: _PrintedConstants,
                                 vanishing: bool) -> _Outcome:
    """Q1 の q¹ の係数から得られる恒等式（1つの束）"""
    forms = _spin_forms("D12_1", AnomalyClass.A3)
    left = forms.T.scale(value("2")) + value("-8") + forms.W[0]
    bracket = (forms.T.scale(value("2116")) + (forms.L2 + forms.W[0]).scale(value("4"))
               + value("-15872"))
    if vanishing:
        lhs = impose_vanishing(forms.ctx, forms.which, (forms.L_hat * left).component(12))
        rhs = impose_vanishing(forms.ctx, forms.which, (forms.A_hat * bracket).component(12))
    else:
        lhs = (forms.e * forms.L_hat * (left - forms.anomaly)).component(12)
        rhs = ((forms.X * bracket)
               - (forms.c2 * forms.X).scale(value("2/15"))).component(12)

    skeleton = formal_skeleton(1)
    combination = swap_combination(list(skeleton.h), 10, 1)
    printed = (word("T").scale(value("2116")) + (word("L2T") + word("Wi")).scale(value("4"))
               + value("-15872") - word("A").scale(30 * value("2/15")))
    phi = named_series("phi8", 1)
    constants = [
        value.check("2", _tangent_multiplicity(forms.ctx, Twist.SPIN_Q1)),
        value.check("-8", qs_coefficient(phi, 1)),
        value.check("2116", word_coefficient(combination, "T")),
        value.check("4", word_coefficient(combination, "L2T")),
        value.check("-15872", word_coefficient(combination)),
        value.check("2/15", -word_coefficient(combination, "A") / 30),
    ]
    return _Outcome(lhs, rhs, constants, {"formal combination": combination - printed})


# Γ_0(2) と Γ^0(2) の入れ替え

_SWAP_PAIRS = (("Q1_12", "Q2_12"), ("Q1_12_ONE_BUNDLE", "Q2_12_ONE_BUNDLE"))


def _check_gamma_swap(order: Fraction, value: _PrintedConstants) -> _Outcome:
    """Q1 = 2⁶Σ h_r(8δ₁)^{w/2−2r}ε₁^r（h_r は Q2 のあてはめから）を次数ごとに確認

    value("h0") … value("h3") は h_r に加えるずれ（既定は 0）。
    """
    order = max(order, Fraction(1))
    fit_order = max(order, Fraction(5, 2))
    side_checks: Dict[str, Coefficient] = {}
    lhs = rhs = None
    for q1_id, q2_id in _SWAP_PAIRS:
        q2_variant = SERIES_VARIANTS[q2_id]
        weight = q2_variant.expected_weight
        fit = fit_gamma(build_q(q2_variant, fit_order, top_component=True),
                        ModularGroup.GAMMA_UP0_2, weight)
        h = [coefficient + value(f"h{r}") for r, coefficient in enumerate(fit.coefficients)]
        q1 = build_q(q1_id, order, top_component=True)
        basis = modular_basis(ModularGroup.GAMMA0_2, weight, order)
        swapped = _combine(basis, h, q1.ring, order).scale(64)
        difference = q1 - swapped
        for n in range(int(order) + 1):
            side_checks[f"{q1_id} q^{n}"] = qs_coefficient(difference, n)
        if lhs is None:
            lhs, rhs = qs_coefficient(q1, 0), qs_coefficient(swapped, 0)
        logger.debug(f"{q1_id} against swapped {q2_id} fit through q^{order}")

    passed = all(_is_zero(v) for v in side_checks.values())
    certification = (f"certified through q^{int(order)}" if passed
                     else "swap relation fails")
    return _Outcome(lhs, rhs, [], side_checks, certification=certification, q_order=order)


def gamma_swap_check(order: Any = 3,
                     h_perturbation: Optional[Mapping[str, Any]] = None) -> TheoremReport:
    """L3.2 の入れ替え関係を検証

    Args:
        order: Q1 を展開する打ち切り次数
        h_perturbation: {"h1": 1} のように h_r に加える値（検出の確認用）
    """
    return verify_theorem("L3.2", order, perturb=h_perturbation)


# 定理の登録

@dataclass(frozen=True)
class TheoremEntry:
    """登録された検証"""
    theorem_id: str
    statement: str
    context_name: str
    printed: Tuple[Tuple[str, Fraction], ...]
    evaluate: Callable[..., _Outcome]
    uses_line_bundle: bool = False


def _constants(*pairs: Tuple[str, Any]) -> Tuple[Tuple[str, Fraction], ...]:
    return tuple((name, to_rational(v)) for name, v in pairs)


_H_CONSTANTS = (("168", 168), ("9224", 9224), ("129", 129), ("508704", 508704),
                ("6868", 6868), ("88", 88))
_H_PRIME_CONSTANTS = (("120", 120), ("3712", 3712), ("81", 81))


def _section2(theorem_id: str, statement: str, context_name: str,
              constants: Tuple[Tuple[str, Any], ...],
              evaluate: Callable[..., _Outcome]) -> TheoremEntry:
    return TheoremEntry(theorem_id, statement, context_name, _constants(*constants), evaluate,
                        uses_line_bundle=True)


THEOREM_REGISTRY: Dict[str, TheoremEntry] = {entry.theorem_id: entry for entry in (
    _section2("T2.3", "{Y ch(T-L+8+Wi+Wj)}^(14) = A{eY - gY ch(T-L+8+Wi+Wj)}^(10)", "D14C",
              (("8", 8),),
              lambda o, c, v: _check_anomaly_shift("Q14_TWO_BUNDLES", "8", o, c, v)),
    _section2("C2.4", "A=0: {Y ch(T-L-16+Wi+Wj)}^(14) = -24{Y}^(14)", "D14C",
              (("-16", -16), ("-24", -24)),
              lambda o, c, v: _check_first_order("T2.3", "Q14_TWO_BUNDLES", "-16", "-24",
                                                 o, c, v)),
    _section2("T2.6", "{Y ch(T-L+256+Wi)}^(14) = A1{eY - gY ch(T-L+256+Wi)}^(10)", "D14C1",
              (("256", 256),),
              lambda o, c, v: _check_anomaly_shift("Q14_ONE_BUNDLE", "256", o, c, v)),
    _section2("C2.7", "A1=0: {Y ch(T-L-8+Wi)}^(14) = -264{Y}^(14)", "D14C1",
              (("-8", -8), ("-264", -264)),
              lambda o, c, v: _check_first_order("T2.6", "Q14_ONE_BUNDLE", "-8", "-264",
                                                 o, c, v)),
    _section2("T2.9", "{Y ch(T-L-488+Wi)}^(10) = A1{eY - gY ch(T-L-488+Wi)}^(6)", "D10C1",
              (("-488", -488),),
              lambda o, c, v: _check_anomaly_shift("R10_ONE_BUNDLE", "-488", o, c, v)),
    _section2("C2.10", "A1=0: {Y ch(T-L+Wi)}^(10) = 488{Y}^(10)", "D10C1",
              (("488", 488),),
              lambda o, c, v: _check_first_order("T2.9", "R10_ONE_BUNDLE", None, "488",
                                                 o, c, v)),
    _section2("T2.11", "A=0: q^2 identity with 104 and -196632", "D14C",
              (("-16", -16), ("104", 104), ("-196632", -196632)),
              lambda o, c, v: _check_second_order("Q14_TWO_BUNDLES", "-16", "104", "-196632",
                                                  o, c, v)),
    _section2("T2.12", "A1=0: q^2 identity with 20 and -135432", "D14C1",
              (("-8", -8), ("20", 20), ("-135432", -135432)),
              lambda o, c, v: _check_second_order("Q14_ONE_BUNDLE", "-8", "20", "-135432",
                                                  o, c, v)),
    _section2("T2.13", "A1=0: q^2 identity with 20 and 61920", "D10C1",
              (("-8", -8), ("20", 20), ("61920", 61920)),
              lambda o, c, v: _check_second_order("R10_ONE_BUNDLE", "-8", "20", "61920",
                                                  o, c, v)),
    TheoremEntry("L3.2", "Q1 = 2^6 sum h_r (8 delta1)^(w/2-2r) eps1^r", "D12",
                 _constants(("h0", 0), ("h1", 0), ("h2", 0), ("h3", 0)),
                 lambda o, c, v: _check_gamma_swap(o, v)),
    TheoremEntry("T3.3", "32{e L}^(12) = {X ch[2240+309T+24(L2T+Wi+Wj)+...] - X A2 ch(576+24T)/24}",
                 "D12", _constants(("2240", 2240), ("309", 309), ("24", 24), ("576", 576),
                                   *_H_CONSTANTS),
                 lambda o, c, v: _check_signature_pair(o, v, vanishing=False)),
    TheoremEntry("C3.4", "A2=0: 32{L}^(12) = {Ahat ch[2240+309T+...]}^(12)", "D12",
                 _constants(("2240", 2240), ("309", 309), ("24", 24), ("576", 576)),
                 lambda o, c, v: _check_signature_pair(o, v, vanishing=True)),
    TheoremEntry("T3.6", "{e L}^(12) = -1/2{X ch[17T+L2T+Wi+128]} + 1/60{c2 X}", "D12_1",
                 _constants(("17", 17), ("128", 128), ("1/60", Fraction(1, 60)),
                            *_H_PRIME_CONSTANTS),
                 lambda o, c, v: _check_signature_single(o, v, vanishing=False)),
    TheoremEntry("C3.7", "c2=0: -2{L}^(12) = {Ahat ch[17T+L2T+Wi+128]}^(12)", "D12_1",
                 _constants(("17", 17), ("128", 128), ("1/60", Fraction(1, 60))),
                 lambda o, c, v: _check_signature_single(o, v, vanishing=True)),
    TheoremEntry("T3.8", "{e L[-A3+2T-8+Wi]} = {X ch[2116T+4L2T+4Wi-15872]} - 2/15{c2 X}",
                 "D12_1", _constants(("2", 2), ("-8", -8), ("2116", 2116), ("4", 4),
                                     ("-15872", -15872), ("2/15", Fraction(2, 15))),
                 lambda o, c, v: _check_first_order_signature(o, v, vanishing=False)),
    TheoremEntry("C3.9", "c2=0: {L[2T-8+Wi]} = {Ahat ch[2116T+4L2T+4Wi-15872]}", "D12_1",
                 _constants(("2", 2), ("-8", -8), ("2116", 2116), ("4", 4),
                            ("-15872", -15872), ("2/15", Fraction(2, 15))),
                 lambda o, c, v: _check_first_order_signature(o, v, vanishing=True)),
)}

THEOREM_IDS: Tuple[str, ...] = tuple(THEOREM_REGISTRY)


def select_theorems(pattern: Optional[str]) -> List[str]:
    """登録順に、パターンに一致する検証の id を返す

    数字で始まるパターンは T/C の番号部分（"3.*" で 3.x 系列の定理と系）、
    文字で始まるパターンは id 全体と照合する。
    """
    if not pattern or pattern == "*":
        return list(THEOREM_IDS)
    if pattern[0].isdigit():
        return [tid for tid in THEOREM_IDS
                if tid[0] in "TC" and fnmatchcase(tid[1:], pattern)]
    return [tid for tid in THEOREM_IDS if fnmatchcase(tid, pattern)]


def _finish(theorem_id: str, outcome: _Outcome, convention: Optional[LineConvention],
            substitutions: Optional[Mapping[str, Any]]) -> TheoremReport:
    lhs, rhs = outcome.lhs, outcome.rhs
    if substitutions:
        lhs = substitute(lhs, substitutions)
        rhs = substitute(rhs, substitutions)
    difference = lhs - rhs
    passed = (difference.is_zero()
              and all(c.matches for c in outcome.constants)
              and all(_is_zero(v) for v in outcome.side_checks.values())
              and all(_is_zero(v) for v in outcome.residuals.values()))
    return TheoremReport(
        theorem_id=theorem_id,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        lhs=lhs,
        rhs=rhs,
        difference=difference,
        constants_checked=outcome.constants,
        convention=convention,
        side_checks=outcome.side_checks,
        residuals=outcome.residuals,
        certification=outcome.certification,
        q_order=outcome.q_order,
        passing_conventions=[convention] if passed and convention else [],
    )


def verify_theorem(theorem_id: str, order: Any = 3,
                   l_convention: Union[LineConvention, str, None] = None,
                   substitutions: Optional[Mapping[str, Any]] = None,
                   perturb: Optional[Mapping[str, Any]] = None) -> TheoremReport:
    """登録された定理・系を検証

    Args:
        theorem_id: T2.3 などの id
        order: あてはめの証明書に使う打ち切り次数
        l_convention: 線束の規約（省略時は決定された規約と他の候補すべてで評価）
        substitutions: 両辺に追加で施す生成元の代入
        perturb: 定数名からずらす量への写像（故意の誤り）

    Raises:
        UnknownNameError: 未登録の id または定数名
    """
    if theorem_id not in THEOREM_REGISTRY:
        raise UnknownNameError(f"unknown theorem id '{theorem_id}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': list(THEOREM_IDS)})
    started = time.perf_counter()
    order = to_rational(order)

    entry = THEOREM_REGISTRY[theorem_id]
    value = _PrintedConstants(dict(entry.printed), perturb)
    if entry.uses_line_bundle:
        report = _verify_with_conventions(entry, order, l_convention, value, substitutions)
    else:
        report = _finish(theorem_id, entry.evaluate(order, None, value), None, substitutions)

    report.ms = int((time.perf_counter() - started) * 1000)
    logger.debug(f"{theorem_id}: {report.status.value} in {report.ms} ms")
    return report


def _verify_with_conventions(entry: TheoremEntry, order: Fraction,
                             l_convention: Union[LineConvention, str, None],
                             value: _PrintedConstants,
                             substitutions: Optional[Mapping[str, Any]]) -> TheoremReport:
    if l_convention is not None:
        convention = LineConvention(l_convention)
        return _finish(entry.theorem_id, entry.evaluate(order, convention, value), convention,
                       substitutions)

    ctx = manifold_context(entry.context_name)
    resolved = resolve_l_convention(ctx).resolved or DEFAULT_CONVENTION
    reports = {}
    for convention in [resolved] + [c for c in ALL_CONVENTIONS if c is not resolved]:
        reports[convention] = _finish(entry.theorem_id, entry.evaluate(order, convention, value),
                                      convention, substitutions)
    passing = [c for c in ALL_CONVENTIONS if reports[c].status is CheckStatus.PASS]
    report = reports[resolved]
    if report.status is CheckStatus.PASS and len(passing) < len(ALL_CONVENTIONS):
        report.status = CheckStatus.CONVENTION_DEPENDENT
    report.passing_conventions = passing
    return report


# スイートの実行

def verify_theorem_worker(theorem_id: str, order: Any,
                          l_convention: Optional[str]) -> TheoremReport:
    """並列処理用のワーカー関数（プロセスプール用）"""
    return verify_theorem(theorem_id, order, l_convention)


def summarize(reports: List[TheoremReport]) -> Dict[str, int]:
    summary = {status.value: 0 for status in CheckStatus}
    for report in reports:
        summary[report.status.value] += 1
    summary['total'] = len(reports)
    return summary


def run_suite(pattern: Optional[str] = "*", order: Any = 3,
              l_convention: Union[LineConvention, str, None] = None,
              max_workers: Optional[int] = None,
              use_threading: bool = False) -> Tuple[List[TheoremReport], Dict[str, int]]:
    """パターンに一致する検証をすべて実行（結果は登録順）

    Args:
        pattern: 検証 id のパターン
        order: 打ち切り次数
        l_convention: 線束の規約
        max_workers: 2以上なら並列実行
        use_threading: スレッドプールを使うか（False ならプロセスプール）

    Returns:
        (報告のリスト, 状態ごとの件数)
    """
    ids = select_theorems(pattern)
    convention = LineConvention(l_convention).value if l_convention else None
    reports: List[TheoremReport] = []
    if max_workers and max_workers > 1 and len(ids) > 1:
        reports = _run_parallel(ids, order, convention, max_workers, use_threading)
    else:
        reports = [verify_theorem(tid, order, convention) for tid in ids]
    return reports, summarize(reports)


def _run_parallel(ids: List[str], order: Any, convention: Optional[str],
                  max_workers: int, use_threading: bool) -> List[TheoremReport]:
    executor_class = ThreadPoolExecutor if use_threading else ProcessPoolExecutor
    logger.debug(f"Running {len(ids)} checks with {max_workers} "
                 f"{'threads' if use_threading else 'processes'}")
    try:
        collected: Dict[str, TheoremReport] = {}
        with executor_class(max_workers=max_workers) as executor:
            future_to_id = {executor.submit(verify_theorem_worker, tid, order, convention): tid
                            for tid in ids}
            for future in as_completed(future_to_id):
                collected[future_to_id[future]] = future.result()
        return [collected[tid] for tid in ids]
    except Exception as e:
        logger.warning(f"Parallel verification failed ({e}); falling back to sequential run")
        return [verify_theorem(tid, order, convention) for tid in ids]

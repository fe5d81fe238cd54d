#!/usr/bin/env python3
"""
特性形式モジュール
多様体・E8 束の文脈、Â/L̂ 種数、チャーン指標と λ 環演算、E8 指標、
Witten 束の q 展開（直接計算とテータ商の2経路）、アノマリー類を扱う
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Dict, Any, List, Tuple, Union

from engine_error_handler import (
    EngineErrorType,
    RingContextError,
    UnknownNameError,
)
from graded_ring import (
    GeneratorTable,
    GradedPoly,
    NewtonDirection,
    make_ring_context,
    newton_convert,
    poly_exp,
    substitute,
    to_rational,
)
from modforms import (
    NormalizedThetaKind,
    ZERO,
    log_normalized_theta,
    named_series,
    pair_log_terms,
    theta_product,
)
from qseries import QSeries, qs_coefficient, qs_exp, qs_reciprocal


logger = logging.getLogger('CharacteristicForms')

BUNDLE_LABELS = ('i', 'j')
E8_RANK = 8


class Structure(Enum):
    """多様体の構造"""
    SPIN = "spin"
    SPIN_C = "spin_c"


@dataclass(frozen=True)
class ManifoldContext:
    """多様体と E8 束の文脈

    生成元: c（spin^c のみ、次数2）、接束の冪和 s_k（次数4k）、
    E8 束 b ごとの冪和 g{k}{b}（次数4k）。次数上限は次元。
    """
    name: str
    dimension: int
    structure: Structure
    root_pairs: int
    e8_bundles: int
    ring: GeneratorTable = field(compare=False)

    @property
    def is_spin_c(self) -> bool:
        return self.structure is Structure.SPIN_C

    @property
    def bundles(self) -> Tuple[str, ...]:
        return BUNDLE_LABELS[:self.e8_bundles]

    @property
    def top_degree(self) -> int:
        return self.dimension

    def tangent_names(self) -> List[str]:
        return [f"s{k}" for k in range(1, self.dimension // 4 + 1)]

    def bundle_names(self, bundle: str) -> List[str]:
        if bundle not in self.bundles:
            raise RingContextError(f"context {self.name} has no E8 bundle '{bundle}'",
                                   EngineErrorType.INVALID_GENERATOR,
                                   {'bundles': list(self.bundles)})
        return [f"g{k}{bundle}" for k in range(1, self.dimension // 4 + 1)]

    def generator(self, name: str) -> GradedPoly:
        if name not in self.ring:
            raise RingContextError(f"generator '{name}' is not available in context {self.name}",
                                   EngineErrorType.INVALID_GENERATOR,
                                   {'generators': list(self.ring.names)})
        return GradedPoly.generator(self.ring, name)

    def one(self) -> GradedPoly:
        return GradedPoly.one(self.ring)


def make_manifold_context(dimension: int, structure: Union[Structure, str], e8_bundles: int,
                          name: Optional[str] = None) -> ManifoldContext:
    """文脈を構築

    Raises:
        RingContextError: 次元が偶数でない、E8 束の数が 0..2 でない場合
    """
    structure = Structure(structure)
    if dimension <= 0 or dimension % 2:
        raise RingContextError(f"dimension must be a positive even integer, got {dimension}",
                               EngineErrorType.INVALID_GENERATOR)
    if not 0 <= e8_bundles <= len(BUNDLE_LABELS):
        raise RingContextError(f"e8_bundles must be 0, 1 or 2, got {e8_bundles}",
                               EngineErrorType.INVALID_GENERATOR)
    generators: List[Tuple[str, int]] = []
    if structure is Structure.SPIN_C:
        generators.append(("c", 2))
    top = dimension // 4
    generators.extend((f"s{k}", 4 * k) for k in range(1, top + 1))
    for bundle in BUNDLE_LABELS[:e8_bundles]:
        generators.extend((f"g{k}{bundle}", 4 * k) for k in range(1, top + 1))
    ring = make_ring_context(generators, dimension)
    return ManifoldContext(name or f"D{dimension}", dimension, structure,
                           dimension // 2, e8_bundles, ring)


_CONTEXT_TABLE = {
    "D14C": (14, Structure.SPIN_C, 2),
    "D14C1": (14, Structure.SPIN_C, 1),
    "D10C1": (10, Structure.SPIN_C, 1),
    "D12": (12, Structure.SPIN, 2),
    "D12_1": (12, Structure.SPIN, 1),
}


def context_names() -> List[str]:
    return list(_CONTEXT_TABLE)


@lru_cache(maxsize=None)
def manifold_context(name: str) -> ManifoldContext:
    """登録済みの文脈（D14C, D14C1, D10C1, D12, D12_1）

    Raises:
        UnknownNameError: 未登録の名前
    """
    if name not in _CONTEXT_TABLE:
        raise UnknownNameError(f"unknown context '{name}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': context_names()})
    dimension, structure, bundles = _CONTEXT_TABLE[name]
    return make_manifold_context(dimension, structure, bundles, name)


# 根の1変数環からの持ち上げ

def lift_root_form(ctx: ManifoldContext, poly: GradedPoly, names: List[str],
                   rank: Any = 0) -> GradedPoly:
    """z の偶数冪の式を冪和へ持ち上げる（z^{2m} ↦ names[m−1]、z⁰ ↦ rank 倍）

    Raises:
        RingContextError: z の奇数冪を含む場合
    """
    result = GradedPoly.zero(ctx.ring)
    for exponent, coefficient in poly.terms.items():
        power = exponent[0]
        if power % 2:
            raise RingContextError("odd power of a Chern root cannot be lifted to power sums",
                                   EngineErrorType.DEGREE_VIOLATION)
        m = power // 2
        if m == 0:
            result = result + coefficient * to_rational(rank)
        else:
            result = result + ctx.generator(names[m - 1]).scale(coefficient)
    return result


def lift_root_series(ctx: ManifoldContext, series: QSeries, names: List[str],
                     rank: Any = 0) -> QSeries:
    return series.map_coefficients(lambda poly: lift_root_form(ctx, poly, names, rank),
                                   ctx.ring)


def _root_log(kind: NormalizedThetaKind, ctx: ManifoldContext, order: Any = 0) -> QSeries:
    return log_normalized_theta(NormalizedThetaKind(kind), to_rational(order), ctx.dimension)


# 種数

def a_hat(ctx: ManifoldContext) -> GradedPoly:
    """Â = exp(Σ a_k s_k)、a_k は log((z/2)/sinh(z/2)) の z^{2k} の係数"""
    log_sinh = qs_coefficient(_root_log(NormalizedThetaKind.THETA, ctx), 0)
    return poly_exp(-lift_root_form(ctx, log_sinh, ctx.tangent_names()))


def l_hat(ctx: ManifoldContext) -> GradedPoly:
    """∏(z/2)/tanh(z/2) = exp(Σ l_k s_k)"""
    log_sinh = qs_coefficient(_root_log(NormalizedThetaKind.THETA, ctx), 0)
    log_cosh = qs_coefficient(_root_log(NormalizedThetaKind.THETA1, ctx), 0)
    return poly_exp(lift_root_form(ctx, log_cosh - log_sinh, ctx.tangent_names()))


def hirzebruch_l(ctx: ManifoldContext) -> GradedPoly:
    """L̂ = 2^{root_pairs}·∏(z/2)/tanh(z/2)"""
    return l_hat(ctx).scale(2 ** ctx.root_pairs)


# チャーン指標

@dataclass(frozen=True)
class ChernCharacterData:
    """仮想束のチャーン指標（全次数）"""
    value: GradedPoly

    @property
    def context(self) -> GeneratorTable:
        return self.value.context

    @property
    def rank(self) -> Fraction:
        return self.value.constant_term

    def component(self, degree: int) -> GradedPoly:
        return self.value.component(degree)

    def _other(self, other: Any) -> GradedPoly:
        if isinstance(other, ChernCharacterData):
            return other.value
        return other

    def __add__(self, other: Any) -> 'ChernCharacterData':
        return ChernCharacterData(self.value + self._other(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> 'ChernCharacterData':
        return ChernCharacterData(self.value - self._other(other))

    def __rsub__(self, other: Any) -> 'ChernCharacterData':
        return ChernCharacterData(self._other(other) - self.value)

    def __neg__(self) -> 'ChernCharacterData':
        return ChernCharacterData(-self.value)

    def __mul__(self, other: Any) -> 'ChernCharacterData':
        return ChernCharacterData(self.value * self._other(other))

    __rmul__ = __mul__

    def render(self) -> str:
        return self.value.render()


class LineConvention(Enum):
    """ch(L̃_C) と q⁰ の線束因子の読み方"""
    REAL2 = "REAL2"      # e^c + e^{−c} − 2、因子 (e^{c/2}−e^{−c/2})/2
    LINE1 = "LINE1"      # e^c − 1、因子 e^{c/2}
    TRIVIAL = "TRIVIAL"  # 0、因子 (e^{c/2}−e^{−c/2})/2


DEFAULT_CONVENTION = LineConvention.REAL2


def _require_spin_c(ctx: ManifoldContext, what: str) -> None:
    if not ctx.is_spin_c:
        raise RingContextError(f"{what} needs a spin_c context, {ctx.name} is spin",
                               EngineErrorType.UNSUPPORTED_ARGUMENT, {'context': ctx.name})


def ch_trivial(ctx: ManifoldContext, rank: Any) -> ChernCharacterData:
    return ChernCharacterData(GradedPoly.constant(ctx.ring, rank))


def ch_tangent(ctx: ManifoldContext) -> ChernCharacterData:
    """ch(T̃) = Σ_k 2 s_k/(2k)!（階数0）"""
    value = GradedPoly.zero(ctx.ring)
    factorial = 1
    for k, name in enumerate(ctx.tangent_names(), start=1):
        factorial *= (2 * k - 1) * (2 * k)
        value = value + ctx.generator(name).scale(Fraction(2, factorial))
    return ChernCharacterData(value)


def ch_line(ctx: ManifoldContext,
            convention: Union[LineConvention, str] = DEFAULT_CONVENTION) -> ChernCharacterData:
    """ch(L̃_C)

    Raises:
        RingContextError: spin 文脈の場合
    """
    _require_spin_c(ctx, "ch(L~)")
    convention = LineConvention(convention)
    c = ctx.generator("c")
    if convention is LineConvention.REAL2:
        value = poly_exp(c) + poly_exp(-c) - 2
    elif convention is LineConvention.LINE1:
        value = poly_exp(c) - 1
    else:
        value = GradedPoly.zero(ctx.ring)
    return ChernCharacterData(value)


def line_factor(ctx: ManifoldContext,
                convention: Union[LineConvention, str] = DEFAULT_CONVENTION) -> GradedPoly:
    """q⁰ の線束因子"""
    _require_spin_c(ctx, "line factor")
    convention = LineConvention(convention)
    half = ctx.generator("c").scale(Fraction(1, 2))
    if convention is LineConvention.LINE1:
        return poly_exp(half)
    return (poly_exp(half) - poly_exp(-half)).scale(Fraction(1, 2))


def adams(k: int, x: ChernCharacterData) -> ChernCharacterData:
    """アダムス作用素 ψ^k（次数 2d 成分を k^d 倍）"""
    if k < 1:
        raise RingContextError(f"Adams operation needs k >= 1, got {k}",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    degree = x.value.context.exponent_degree
    terms = {e: c * k ** (degree(e) // 2) for e, c in x.value.terms.items()}
    return ChernCharacterData(GradedPoly(x.value.context, terms))


class LambdaOp(Enum):
    """λ 環の演算"""
    LAMBDA2 = "lambda2"
    LAMBDA3 = "lambda3"
    SYM2 = "sym2"
    TENSOR = "tensor"


def lambda_sym(op: Union[LambdaOp, str], *args: ChernCharacterData) -> ChernCharacterData:
    """Λ², Λ³, S², ⊗ のチャーン指標（仮想束にも有効な普遍公式）"""
    op = LambdaOp(op)
    if op is LambdaOp.TENSOR:
        if not args:
            raise RingContextError("tensor product needs at least one argument",
                                   EngineErrorType.UNSUPPORTED_ARGUMENT)
        result = args[0]
        for arg in args[1:]:
            result = result * arg
        return result
    if len(args) != 1:
        raise RingContextError(f"{op.value} takes exactly one argument",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    x = args[0].value
    psi2 = adams(2, args[0]).value
    if op is LambdaOp.LAMBDA2:
        return ChernCharacterData((x * x - psi2).scale(Fraction(1, 2)))
    if op is LambdaOp.SYM2:
        return ChernCharacterData((x * x + psi2).scale(Fraction(1, 2)))
    psi3 = adams(3, args[0]).value
    return ChernCharacterData((x * x * x - (x * psi2).scale(3) + psi3.scale(2))
                              .scale(Fraction(1, 6)))


# E8 束

@dataclass(frozen=True)
class E8BundleModel:
    """E8 束 V_b の指標 ch(V_b) = 1 + ch(W_b)q + ch(W̄_b)q² + …"""
    context: ManifoldContext
    bundle: str
    series: QSeries

    def extract_W(self, n: int) -> ChernCharacterData:
        """q^n の係数（n=1 で ch(W_b)、n=2 で ch(W̄_b)）

        Raises:
            SeriesTruncationError: 打ち切り次数を超える場合
        """
        return ChernCharacterData(qs_coefficient(self.series, n))

    def c2_alias(self) -> GradedPoly:
        """c₂(W_b) = −30·g_{b,1}"""
        return c2_alias(self.context, self.bundle)


def c2_alias(ctx: ManifoldContext, bundle: str) -> GradedPoly:
    return ctx.generator(ctx.bundle_names(bundle)[0]).scale(-30)


_E8_KINDS = (NormalizedThetaKind.THETA1, NormalizedThetaKind.THETA2, NormalizedThetaKind.THETA3)
_THETA_CONSTANTS = {
    NormalizedThetaKind.THETA1: "theta1_0",
    NormalizedThetaKind.THETA2: "theta2_0",
    NormalizedThetaKind.THETA3: "theta3_0",
}


def e8_theta_series(ctx: ManifoldContext, bundle: str, order: Any) -> QSeries:
    """φ⁸·ch(V_b) = ½ Σ_k ∏_l NΘ_k(y_l)（k = 1, 2, 3）"""
    names = ctx.bundle_names(bundle)
    total: Optional[QSeries] = None
    for kind in _E8_KINDS:
        constant = (named_series(_THETA_CONSTANTS[kind], order) ** E8_RANK).promote(ctx.ring)
        lifted = lift_root_series(ctx, _root_log(kind, ctx, order), names)
        piece = constant * qs_exp(lifted)
        total = piece if total is None else total + piece
    return total.scale(Fraction(1, 2)).truncate(order)


def e8_character(ctx: ManifoldContext, bundle: str, order: Any) -> E8BundleModel:
    """ch(V_b) = φ^{−8}·½(Π₁+Π₂+Π₃)"""
    inverse = qs_reciprocal(named_series("phi8", order)).promote(ctx.ring)
    series = (inverse * e8_theta_series(ctx, bundle, order)).truncate(order)
    return E8BundleModel(ctx, bundle, series)


# アノマリー類

class AnomalyClass(Enum):
    A = "A"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


def anomaly_class(ctx: ManifoldContext, which: Union[AnomalyClass, str]) -> GradedPoly:
    """A = s1 − c² − g1i − g1j、A1 = s1 − c² − g1i、A2 = −g1i − g1j、A3 = −g1i

    Raises:
        RingContextError: 必要な生成元が文脈にない場合
    """
    which = AnomalyClass(which)
    if which is AnomalyClass.A:
        return (ctx.generator("s1") - ctx.generator("c") ** 2
                - ctx.generator("g1i") - ctx.generator("g1j"))
    if which is AnomalyClass.A1:
        return ctx.generator("s1") - ctx.generator("c") ** 2 - ctx.generator("g1i")
    if which is AnomalyClass.A2:
        return -ctx.generator("g1i") - ctx.generator("g1j")
    return -ctx.generator("g1i")


def vanishing_bindings(ctx: ManifoldContext,
                       which: Union[AnomalyClass, str]) -> Dict[str, GradedPoly]:
    """アノマリー類を 0 とする消去代入"""
    which = AnomalyClass(which)
    if which is AnomalyClass.A:
        return {"s1": ctx.generator("c") ** 2 + ctx.generator("g1i") + ctx.generator("g1j")}
    if which is AnomalyClass.A1:
        return {"s1": ctx.generator("c") ** 2 + ctx.generator("g1i")}
    if which is AnomalyClass.A2:
        return {"g1j": -ctx.generator("g1i")}
    ctx.generator("g1i")
    return {"g1i": GradedPoly.zero(ctx.ring)}


def impose_vanishing(ctx: ManifoldContext, which: Union[AnomalyClass, str],
                     poly: GradedPoly) -> GradedPoly:
    return substitute(poly, vanishing_bindings(ctx, which))


# Witten 束

class Twist(Enum):
    """Witten 束の種類"""
    SPINC_Q = "SPINC_Q"
    SPIN_Q1 = "SPIN_Q1"
    SPIN_Q2 = "SPIN_Q2"


def _check_twist(ctx: ManifoldContext, twist: Twist) -> None:
    if twist is Twist.SPINC_Q and not ctx.is_spin_c:
        raise RingContextError(f"twist {twist.value} needs a spin_c context",
                               EngineErrorType.UNSUPPORTED_ARGUMENT, {'context': ctx.name})
    if twist is not Twist.SPINC_Q and ctx.is_spin_c:
        raise RingContextError(f"twist {twist.value} needs a spin context",
                               EngineErrorType.UNSUPPORTED_ARGUMENT, {'context': ctx.name})


def _adams_sum(x: ChernCharacterData, steps: List[Tuple[Fraction, int, Fraction]],
               ring: GeneratorTable, order: Any) -> QSeries:
    cache: Dict[int, GradedPoly] = {}
    coefficients: Dict[Fraction, GradedPoly] = {}
    for exponent, k, coefficient in steps:
        if k not in cache:
            cache[k] = adams(k, x).value
        value = cache[k].scale(coefficient)
        coefficients[exponent] = coefficients[exponent] + value if exponent in coefficients else value
    return QSeries(coefficients, order, ring)


def _symmetric_steps(order: Fraction, shift: Fraction, sign: int
                     ) -> List[Tuple[Fraction, int, Fraction]]:
    """Σ_{n,k} sign_k·q^{(n−shift)k}/k の項（sign=+1: 1/k、−1: −1/k、0: (−1)^{k+1}/k）"""
    steps = []
    n = 1
    while n - shift <= order:
        base = n - shift
        k = 1
        while base * k <= order:
            if sign == 0:
                coefficient = Fraction((-1) ** (k + 1), k)
            else:
                coefficient = Fraction(sign, k)
            steps.append((base * k, k, coefficient))
            k += 1
        n += 1
    return steps


def witten_exponent(ctx: ManifoldContext, twist: Union[Twist, str],
                    l_convention: Union[LineConvention, str, None], order: Any) -> QSeries:
    """Witten 束のチャーン指標の対数（アダムス作用素の和）"""
    twist = Twist(twist)
    _check_twist(ctx, twist)
    order = to_rational(order)
    tangent = ch_tangent(ctx)
    # ⊗ S_{qⁿ}(T̃)
    exponent = _adams_sum(tangent, _symmetric_steps(order, Fraction(0), 1), ctx.ring, order)
    if twist is Twist.SPINC_Q:
        line = ch_line(ctx, l_convention or DEFAULT_CONVENTION)
        exponent = exponent + _adams_sum(line, _symmetric_steps(order, Fraction(0), -1),
                                         ctx.ring, order)
    elif twist is Twist.SPIN_Q1:
        exponent = exponent + _adams_sum(tangent, _symmetric_steps(order, Fraction(0), 0),
                                         ctx.ring, order)
    else:
        exponent = exponent + _adams_sum(tangent, _symmetric_steps(order, Fraction(1, 2), -1),
                                         ctx.ring, order)
    return exponent


def witten_direct(ctx: ManifoldContext, twist: Union[Twist, str],
                  l_convention: Union[LineConvention, str, None], order: Any) -> QSeries:
    """Witten 束のチャーン指標の q 展開（生成関数による直接計算）

    Raises:
        RingContextError: 文脈が対応しない twist の場合
    """
    return qs_exp(witten_exponent(ctx, twist, l_convention, order))


_RATIO_KINDS = {
    Twist.SPINC_Q: None,
    Twist.SPIN_Q1: NormalizedThetaKind.THETA1,
    Twist.SPIN_Q2: NormalizedThetaKind.THETA2,
}


def tangent_log_series(ctx: ManifoldContext, twist: Union[Twist, str], order: Any) -> QSeries:
    """根の組ごとの比 z·NΘ′(0)/NΘ(z)（×NΘ_k(z)/NΘ_k(0)）の対数を冪和へ持ち上げたもの"""
    twist = Twist(twist)
    log_ratio = -_root_log(NormalizedThetaKind.THETA, ctx, order)
    kind = _RATIO_KINDS[twist]
    if kind is not None:
        log_ratio = log_ratio + _root_log(kind, ctx, order)
    return lift_root_series(ctx, log_ratio, ctx.tangent_names())


def theta_line_factor(ctx: ManifoldContext, order: Any) -> QSeries:
    """NΘ(c)/(NΘ₁NΘ₂NΘ₃)(0) = (e^{c/2}−e^{−c/2})/2·tp(c)/(tp₁tp₂tp₃)(0)"""
    _require_spin_c(ctx, "line theta factor")
    c = ctx.generator("c")
    denominator = QSeries.one(order)
    for kind in _E8_KINDS:
        denominator = denominator * theta_product(kind, ZERO, order)
    numerator = theta_product(NormalizedThetaKind.THETA, c, order)
    quotient = numerator * qs_reciprocal(denominator).promote(ctx.ring)
    return quotient.scale(line_factor(ctx, LineConvention.REAL2)).truncate(order)


def witten_theta(ctx: ManifoldContext, twist: Union[Twist, str], order: Any) -> QSeries:
    """テータ商による同じ対象（種数因子と q⁰ の線束因子を含む）

    SPIN_Q1 は 2^{root_pairs} 倍する。
    """
    twist = Twist(twist)
    _check_twist(ctx, twist)
    result = qs_exp(tangent_log_series(ctx, twist, order))
    if twist is Twist.SPINC_Q:
        result = result * theta_line_factor(ctx, order)
    elif twist is Twist.SPIN_Q1:
        result = result.scale(2 ** ctx.root_pairs)
    return result.truncate(order)


def genus_factor(ctx: ManifoldContext, twist: Union[Twist, str]) -> GradedPoly:
    """witten_theta の q⁰ 極限に現れる種数（Â または L̂）"""
    twist = Twist(twist)
    if twist is Twist.SPIN_Q1:
        return hirzebruch_l(ctx)
    return a_hat(ctx)


# 線束の規約の決定

@dataclass
class ConventionReport:
    """resolve_l_convention の結果"""
    order: Fraction
    candidates: List[LineConvention]
    matching: List[LineConvention]
    residuals: Dict[LineConvention, Dict[Fraction, GradedPoly]]

    @property
    def resolved(self) -> Optional[LineConvention]:
        return self.matching[0] if len(self.matching) == 1 else None

    def first_mismatch(self, convention: LineConvention) -> Optional[Fraction]:
        nonzero = [e for e, poly in self.residuals[convention].items() if not poly.is_zero()]
        return min(nonzero) if nonzero else None


ALL_CONVENTIONS = (LineConvention.REAL2, LineConvention.LINE1, LineConvention.TRIVIAL)


def resolve_l_convention(ctx: ManifoldContext,
                         candidates: Optional[Tuple[LineConvention, ...]] = None,
                         order: Any = 2) -> ConventionReport:
    """直接計算とテータ商を比較して ch(L̃_C) の規約を決める

    一致しない場合も正当な結果として報告する。
    """
    _require_spin_c(ctx, "convention resolution")
    order = to_rational(order)
    candidates = tuple(LineConvention(c) for c in (candidates or ALL_CONVENTIONS))
    return _resolve_cached(ctx, candidates, order)


@lru_cache(maxsize=None)
def _resolve_cached(ctx: ManifoldContext, candidates: Tuple[LineConvention, ...],
                    order: Fraction) -> ConventionReport:
    reference = witten_theta(ctx, Twist.SPINC_Q, order)
    genus = a_hat(ctx)
    residuals: Dict[LineConvention, Dict[Fraction, GradedPoly]] = {}
    matching = []
    for convention in candidates:
        direct = witten_direct(ctx, Twist.SPINC_Q, convention, order)
        direct = direct.scale(genus * line_factor(ctx, convention))
        difference = reference - direct
        table = {}
        for n in range(int(order) + 1):
            table[Fraction(n)] = qs_coefficient(difference, n)
        residuals[convention] = table
        if all(poly.is_zero() for poly in table.values()):
            matching.append(convention)
        logger.debug(f"convention {convention.value} through q^{order}: "
                     f"{'match' if convention in matching else 'mismatch'}")
    return ConventionReport(order, list(candidates), matching, residuals)


# ポントリャーギン類による表示

@lru_cache(maxsize=None)
def pontryagin_ring(ctx: ManifoldContext) -> GeneratorTable:
    entries = [(f"p{name[1:]}" if name in ctx.tangent_names() else name, degree)
               for name, degree in ctx.ring.entries]
    return make_ring_context(entries, ctx.dimension)


def pontryagin_form(ctx: ManifoldContext, poly: GradedPoly) -> GradedPoly:
    """冪和 s_k をポントリャーギン類 p_k で書き直す（ニュートンの恒等式）"""
    target = pontryagin_ring(ctx)
    classes = [GradedPoly.generator(target, f"p{k}")
               for k in range(1, len(ctx.tangent_names()) + 1)]
    power_sums = newton_convert(NewtonDirection.ELEMENTARY_TO_POWER, classes, ctx.root_pairs)
    bindings = {name: value for name, value in zip(ctx.tangent_names(), power_sums)}
    return substitute(poly, bindings, target)


# 名前付きの対象

FORM_OBJECT_NAMES = ("Ahat", "Lhat", "chT", "chL", "chW1", "chW2", "chWbar1", "chWbar2",
                     "A", "A1", "A2", "A3", "Q_theta", "Q_direct")


def default_twist(ctx: ManifoldContext) -> Twist:
    return Twist.SPINC_Q if ctx.is_spin_c else Twist.SPIN_Q2


def form_object(ctx: ManifoldContext, name: str, order: Any,
                convention: Union[LineConvention, str, None] = None,
                twist: Union[Twist, str, None] = None) -> Union[GradedPoly, QSeries]:
    """CLI から展開できる特性形式の対象

    Raises:
        UnknownNameError: 未登録の名前
    """
    if name not in FORM_OBJECT_NAMES:
        raise UnknownNameError(f"unknown object name '{name}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': list(FORM_OBJECT_NAMES)})
    convention = LineConvention(convention or DEFAULT_CONVENTION)
    twist = Twist(twist) if twist else default_twist(ctx)
    if name == "Ahat":
        return a_hat(ctx)
    if name == "Lhat":
        return l_hat(ctx)
    if name == "chT":
        return ch_tangent(ctx).value
    if name == "chL":
        return ch_line(ctx, convention).value
    if name in ("chW1", "chW2", "chWbar1", "chWbar2"):
        bundle = BUNDLE_LABELS[int(name[-1]) - 1]
        n = 2 if "bar" in name else 1
        return e8_character(ctx, bundle, max(to_rational(order), n)).extract_W(n).value
    if name in ("A", "A1", "A2", "A3"):
        return anomaly_class(ctx, name)
    if name == "Q_theta":
        return witten_theta(ctx, twist, order)
    direct = witten_direct(ctx, twist, convention, order).scale(genus_factor(ctx, twist))
    if twist is Twist.SPINC_Q:
        direct = direct.scale(line_factor(ctx, convention))
    return direct

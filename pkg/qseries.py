#!/usr/bin/env python3
"""
打ち切り q 級数モジュール
指数は 1/24 の格子上、係数は有理数または GradedPoly（形式的な特性形式）
"""

from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Optional, Dict, Any, List, Tuple, Callable, Mapping, Union

import numpy as np

from engine_error_handler import (
    EngineErrorType,
    NilpotencyError,
    NumericPrecisionError,
    RingContextError,
    SeriesTruncationError,
)
from graded_ring import (
    GeneratorTable,
    GradedPoly,
    format_rational,
    join_signed,
    poly_exp,
    poly_inverse,
    poly_log,
    to_rational,
)


GRID_DENOMINATOR = 24
Coefficient = Union[Fraction, GradedPoly]


def to_ticks(exponent: Any) -> int:
    """指数を 1/24 単位の整数に変換

    Raises:
        SeriesTruncationError: 1/24 の整数倍でない場合
    """
    value = to_rational(exponent) * GRID_DENOMINATOR
    if value.denominator != 1:
        raise SeriesTruncationError(f"exponent {exponent} is not on the 1/24 grid",
                                    EngineErrorType.GRID_VIOLATION, {'exponent': str(exponent)})
    return int(value)


def from_ticks(ticks: int) -> Fraction:
    return Fraction(ticks, GRID_DENOMINATOR)


class QSeries:
    """q の打ち切り級数

    coefficients は指数（1/24 単位の整数 tick）から係数への写像で、order_cap 以下の
    指数の係数はすべて確定している。ring が None なら有理数係数。
    """

    __slots__ = ('ring', '_coefficients', 'cap_ticks')

    def __init__(self, coefficients: Optional[Mapping[Any, Any]] = None,
                 order_cap: Any = 0, ring: Optional[GeneratorTable] = None) -> None:
        self.ring = ring
        self.cap_ticks = to_ticks(order_cap)
        clean: Dict[int, Coefficient] = {}
        for exponent, value in (coefficients or {}).items():
            ticks = to_ticks(exponent)
            if ticks > self.cap_ticks:
                continue
            value = self._coerce_coefficient(value)
            if value:
                clean[ticks] = clean[ticks] + value if ticks in clean else value
        self._coefficients = {t: c for t, c in clean.items() if c}

    @classmethod
    def _from_ticks(cls, coefficients: Dict[int, Coefficient], cap_ticks: int,
                    ring: Optional[GeneratorTable]) -> 'QSeries':
        series = cls.__new__(cls)
        series.ring = ring
        series.cap_ticks = cap_ticks
        series._coefficients = {t: c for t, c in coefficients.items() if c and t <= cap_ticks}
        return series

    def _coerce_coefficient(self, value: Any) -> Coefficient:
        if self.ring is None:
            if isinstance(value, GradedPoly):
                raise RingContextError("form-valued coefficient in a rational series",
                                       EngineErrorType.CONTEXT_MISMATCH)
            return to_rational(value)
        if isinstance(value, GradedPoly):
            if value.context is not self.ring and value.context != self.ring:
                raise RingContextError("coefficient from another generator table",
                                       EngineErrorType.CONTEXT_MISMATCH)
            return value
        return GradedPoly.constant(self.ring, value)

    # 構築ヘルパー

    @classmethod
    def zero(cls, order_cap: Any, ring: Optional[GeneratorTable] = None) -> 'QSeries':
        return cls._from_ticks({}, to_ticks(order_cap), ring)

    @classmethod
    def one(cls, order_cap: Any, ring: Optional[GeneratorTable] = None) -> 'QSeries':
        return cls.monomial(0, 1, order_cap, ring)

    @classmethod
    def monomial(cls, exponent: Any, coefficient: Any, order_cap: Any,
                 ring: Optional[GeneratorTable] = None) -> 'QSeries':
        return cls({exponent: coefficient}, order_cap, ring)

    # プロパティ

    @property
    def order_cap(self) -> Fraction:
        return from_ticks(self.cap_ticks)

    @property
    def coefficients(self) -> Mapping[Fraction, Coefficient]:
        return MappingProxyType({from_ticks(t): c for t, c in sorted(self._coefficients.items())})

    def tick_items(self) -> List[Tuple[int, Coefficient]]:
        return sorted(self._coefficients.items())

    def is_zero(self) -> bool:
        return not self._coefficients

    def valuation_ticks(self) -> int:
        """最低次の指数（零級数なら order_cap）"""
        return min(self._coefficients) if self._coefficients else self.cap_ticks

    @property
    def valuation(self) -> Fraction:
        return from_ticks(self.valuation_ticks())

    def _zero_coefficient(self) -> Coefficient:
        return Fraction(0) if self.ring is None else GradedPoly.zero(self.ring)

    def _one_coefficient(self) -> Coefficient:
        return Fraction(1) if self.ring is None else GradedPoly.one(self.ring)

    def _check_same_ring(self, other: 'QSeries') -> None:
        if other.ring is not self.ring and other.ring != self.ring:
            raise RingContextError(
                "mismatched coefficient rings in q-series arithmetic "
                "(promote rational series explicitly)",
                EngineErrorType.CONTEXT_MISMATCH)

    # 比較

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.ring == other.ring and self.cap_ticks == other.cap_ticks
                and self._coefficients == other._coefficients)

    def __hash__(self) -> int:
        return hash((self.ring, self.cap_ticks, frozenset(self._coefficients.items())))

    def agrees_with(self, other: 'QSeries', through: Any = None) -> bool:
        """共通の打ち切り次数（と through）以下で係数が一致するか"""
        self._check_same_ring(other)
        limit = min(self.cap_ticks, other.cap_ticks)
        if through is not None:
            limit = min(limit, to_ticks(through))
        keys = {t for t in self._coefficients if t <= limit}
        keys |= {t for t in other._coefficients if t <= limit}
        return all(self._coefficients.get(t, 0) == other._coefficients.get(t, 0) for t in keys)

    # 算術

    def __add__(self, other: Any) -> 'QSeries':
        if not isinstance(other, QSeries):
            return NotImplemented
        self._check_same_ring(other)
        cap = min(self.cap_ticks, other.cap_ticks)
        result = {t: c for t, c in self._coefficients.items() if t <= cap}
        for t, c in other._coefficients.items():
            if t > cap:
                continue
            result[t] = result[t] + c if t in result else c
        return QSeries._from_ticks(result, cap, self.ring)

    def __neg__(self) -> 'QSeries':
        return QSeries._from_ticks({t: -c for t, c in self._coefficients.items()},
                                   self.cap_ticks, self.ring)

    def __sub__(self, other: Any) -> 'QSeries':
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: Any) -> 'QSeries':
        """係数環の元（有理数または同じ環の GradedPoly）倍"""
        if isinstance(factor, GradedPoly):
            if self.ring is None:
                raise RingContextError("form-valued factor on a rational series",
                                       EngineErrorType.CONTEXT_MISMATCH)
            factor = self._coerce_coefficient(factor)
        else:
            factor = to_rational(factor)
        return QSeries._from_ticks({t: c * factor for t, c in self._coefficients.items()},
                                   self.cap_ticks, self.ring)

    def __mul__(self, other: Any) -> 'QSeries':
        if not isinstance(other, QSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check_same_ring(other)
        cap = min(self.cap_ticks + other.valuation_ticks(),
                  other.cap_ticks + self.valuation_ticks())
        right = other.tick_items()
        result: Dict[int, Coefficient] = {}
        for ta, ca in self._coefficients.items():
            room = cap - ta
            for tb, cb in right:
                if tb > room:
                    break
                t = ta + tb
                product = ca * cb
                result[t] = result[t] + product if t in result else product
        return QSeries._from_ticks(result, cap, self.ring)

    def __rmul__(self, other: Any) -> 'QSeries':
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, exponent: int) -> 'QSeries':
        if not isinstance(exponent, int) or isinstance(exponent, bool):
            return NotImplemented
        if exponent < 0:
            return qs_reciprocal(self) ** (-exponent)
        result = QSeries.one(self.order_cap, self.ring)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    # 変形

    def shift(self, exponent: Any) -> 'QSeries':
        """q^exponent 倍"""
        ticks = to_ticks(exponent)
        return QSeries._from_ticks({t + ticks: c for t, c in self._coefficients.items()},
                                   self.cap_ticks + ticks, self.ring)

    def truncate(self, order_cap: Any) -> 'QSeries':
        """打ち切り次数を下げる

        Raises:
            SeriesTruncationError: 現在の打ち切り次数より高い次数を要求した場合
        """
        ticks = to_ticks(order_cap)
        if ticks > self.cap_ticks:
            raise SeriesTruncationError(
                f"cannot extend series known through q^{self.order_cap} to q^{order_cap}",
                EngineErrorType.TRUNCATION_EXCEEDED,
                {'order_cap': str(self.order_cap), 'requested': str(order_cap)})
        return QSeries._from_ticks(dict(self._coefficients), ticks, self.ring)

    def promote(self, ring: GeneratorTable) -> 'QSeries':
        """有理数係数の級数を GradedPoly 係数へ明示的に持ち上げる"""
        if self.ring is not None:
            if self.ring == ring:
                return self
            raise RingContextError("only rational series can be promoted",
                                   EngineErrorType.CONTEXT_MISMATCH)
        return QSeries._from_ticks(
            {t: GradedPoly.constant(ring, c) for t, c in self._coefficients.items()},
            self.cap_ticks, ring)

    def map_coefficients(self, function: Callable[[Coefficient], Coefficient],
                         ring: Optional[GeneratorTable] = None) -> 'QSeries':
        """各係数に関数を適用（成分抽出・代入・生成元の持ち上げ用）"""
        target = self.ring if ring is None else ring
        return QSeries._from_ticks({t: function(c) for t, c in self._coefficients.items()},
                                   self.cap_ticks, target)

    def coefficient(self, exponent: Any) -> Coefficient:
        return qs_coefficient(self, exponent)

    # 表示

    def render(self) -> str:
        return render_series(self)

    def __str__(self) -> str:
        return render_series(self)

    def __repr__(self) -> str:
        return f"QSeries({render_series(self)} ; cap q^{self.order_cap})"


class SeriesOp(Enum):
    """qs_arith の演算種別"""
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    POW = "pow"
    RECIPROCAL = "reciprocal"


def qs_arith(op: Union[SeriesOp, str], a: QSeries, b: Any = None) -> QSeries:
    """q 級数の算術演算

    Args:
        op: add / sub / mul / pow / reciprocal
        a: 左オペランド
        b: 右オペランド（級数・係数・整数指数、reciprocal では不要）

    Returns:
        打ち切られた厳密な結果

    Raises:
        RingContextError: 係数環が異なる場合
        NilpotencyError: reciprocal で最低次係数が可逆でない場合
    """
    op = SeriesOp(op)
    if op is SeriesOp.ADD:
        return a + b
    if op is SeriesOp.SUB:
        return a - b
    if op is SeriesOp.MUL:
        return a * b
    if op is SeriesOp.POW:
        return a ** int(b)
    return qs_reciprocal(a)


def _invert_coefficient(value: Coefficient) -> Coefficient:
    if isinstance(value, GradedPoly):
        return poly_inverse(value)
    if not value:
        raise NilpotencyError("reciprocal of a series with zero leading coefficient",
                              EngineErrorType.NON_INVERTIBLE)
    return 1 / value


def qs_reciprocal(a: QSeries) -> QSeries:
    """逆数級数（a·reciprocal(a) = 1 が order_cap まで成立）"""
    if a.is_zero():
        raise NilpotencyError("reciprocal of the zero series", EngineErrorType.NON_INVERTIBLE)
    v = a.valuation_ticks()
    leading_inverse = _invert_coefficient(a._coefficients[v])
    shifted = {t - v: c for t, c in a._coefficients.items()}
    cap = a.cap_ticks - v
    items = sorted((t, c) for t, c in shifted.items() if t > 0)
    result: Dict[int, Coefficient] = {0: leading_inverse}
    for t in range(1, cap + 1):
        total = None
        for s, c in items:
            if s > t:
                break
            previous = result.get(t - s)
            if previous is None:
                continue
            term = c * previous
            total = term if total is None else total + term
        if total is not None and total:
            value = -(total * leading_inverse)
            if value:
                result[t] = value
    return QSeries._from_ticks(result, cap, a.ring).shift(from_ticks(-v))


def qs_exp(a: QSeries) -> QSeries:
    """q 級数の指数関数

    q·d/dq による漸化式 t·F_t = Σ t'·a_{t'}·F_{t−t'} で計算し、定数係数は poly_exp。

    Raises:
        NilpotencyError: q^0 の係数が冪零でない場合
    """
    if any(t < 0 for t in a._coefficients):
        raise NilpotencyError("exp of a series with negative exponents",
                              EngineErrorType.NON_NILPOTENT)
    constant = a._coefficients.get(0)
    if constant is None:
        start = a._one_coefficient()
    elif isinstance(constant, GradedPoly):
        start = poly_exp(constant)
    else:
        raise NilpotencyError(f"exp of a series with nonzero constant term {constant}",
                              EngineErrorType.NON_NILPOTENT)

    items = sorted((t, c) for t, c in a._coefficients.items() if t > 0)
    result: Dict[int, Coefficient] = {0: start}
    for t in range(1, a.cap_ticks + 1):
        total = None
        for s, c in items:
            if s > t:
                break
            previous = result.get(t - s)
            if previous is None:
                continue
            term = (c * previous) * Fraction(s, t)
            total = term if total is None else total + term
        if total is not None and total:
            result[t] = total
    return QSeries._from_ticks(result, a.cap_ticks, a.ring)


def qs_log(a: QSeries) -> QSeries:
    """定数係数が 1 に退化する級数の対数（qs_exp の逆）

    Raises:
        NilpotencyError: 最低次が q^0 でないか、q^0 の係数の定数項が 1 でない場合
    """
    constant = a._coefficients.get(0)
    if constant is None or any(t < 0 for t in a._coefficients):
        raise NilpotencyError("log needs a series starting at q^0",
                              EngineErrorType.NON_NILPOTENT)
    if isinstance(constant, GradedPoly):
        start = poly_log(constant)
        constant_inverse = poly_inverse(constant)
    else:
        if constant != 1:
            raise NilpotencyError(f"log needs constant term 1, got {constant}",
                                  EngineErrorType.NON_NILPOTENT)
        start = Fraction(0)
        constant_inverse = Fraction(1)

    items = sorted((t, c) for t, c in a._coefficients.items() if t > 0)
    result: Dict[int, Coefficient] = {0: start}
    for t in range(1, a.cap_ticks + 1):
        total = a._coefficients.get(t)
        for s, g in sorted((s, g) for s, g in result.items() if 0 < s < t):
            f = a._coefficients.get(t - s)
            if f is None:
                continue
            term = (g * f) * Fraction(-s, t)
            total = term if total is None else total + term
        if total is not None and total:
            value = total * constant_inverse
            if value:
                result[t] = value
    return QSeries._from_ticks(result, a.cap_ticks, a.ring)


def product_threshold(order_cap: Any) -> int:
    """積表示で寄与し得る最大の因子番号（因子 n は指数 n/2 以上でのみ 1 と異なる）"""
    return int(to_rational(order_cap) * 2)


def qs_product_form(factor: Callable[[int], QSeries], n_max: int, order_cap: Any,
                    ring: Optional[GeneratorTable] = None) -> QSeries:
    """無限積 ∏_{n≥1} factor(n) の打ち切り

    Args:
        factor: n から因子級数を返す関数
        n_max: 掛ける因子の最大番号
        order_cap: 結果の打ち切り次数
        ring: 係数環

    Returns:
        n ≤ n_max の因子の積（閾値以上では n_max に依存しない）

    Raises:
        SeriesTruncationError: n_max が閾値未満、または因子が前提に反する場合
    """
    threshold = product_threshold(order_cap)
    if n_max < threshold:
        raise SeriesTruncationError(
            f"n_max={n_max} is below the threshold {threshold} for order q^{order_cap}: "
            "a later factor could still contribute",
            EngineErrorType.TRUNCATION_EXCEEDED,
            {'n_max': n_max, 'threshold': threshold})

    cap = to_ticks(order_cap)
    result = QSeries.one(order_cap, ring)
    for n in range(1, n_max + 1):
        piece = factor(n)
        if piece._coefficients.get(0) != piece._one_coefficient() or any(
                0 < t < n * GRID_DENOMINATOR // 2 or t < 0 for t in piece._coefficients):
            raise SeriesTruncationError(
                f"factor {n} differs from 1 below exponent {Fraction(n, 2)}",
                EngineErrorType.UNSUPPORTED_ARGUMENT, {'factor': n})
        if piece.cap_ticks < cap:
            raise SeriesTruncationError(
                f"factor {n} is only known through q^{piece.order_cap}",
                EngineErrorType.TRUNCATION_EXCEEDED, {'factor': n})
        if len(piece._coefficients) == 1:
            continue
        result = result * piece
    return result.truncate(order_cap)


def qs_coefficient(a: QSeries, exponent: Any) -> Coefficient:
    """指定指数の係数（格納されていなければ 0）

    Raises:
        SeriesTruncationError: 指数が order_cap を超える場合
    """
    ticks = to_ticks(exponent)
    if ticks > a.cap_ticks:
        raise SeriesTruncationError(
            f"coefficient of q^{exponent} requested beyond order cap q^{a.order_cap}; "
            "rebuild the series at higher order",
            EngineErrorType.TRUNCATION_EXCEEDED,
            {'exponent': str(exponent), 'order_cap': str(a.order_cap)})
    return a._coefficients.get(ticks, a._zero_coefficient())


def _check_numeric(a: QSeries, tau: complex) -> None:
    if a.ring is not None:
        raise NumericPrecisionError("numeric evaluation needs rational coefficients",
                                    EngineErrorType.NUMERIC_DOMAIN)
    if complex(tau).imag <= 0:
        raise NumericPrecisionError(f"tau {tau} not in the upper half-plane",
                                    EngineErrorType.NUMERIC_DOMAIN, {'tau': str(tau)})


def qs_eval_numeric(a: QSeries, tau: complex) -> complex:
    """Σ coeff·e^{2π√−1·τ·exponent} を倍精度複素数で評価

    Raises:
        NumericPrecisionError: 形式係数の級数、または上半平面外の τ
    """
    _check_numeric(a, tau)
    if a.is_zero():
        return 0j
    items = a.tick_items()
    exponents = np.array([t / GRID_DENOMINATOR for t, _ in items], dtype=float)
    values = np.array([float(c) for _, c in items], dtype=float)
    phases = np.exp(2j * np.pi * complex(tau) * exponents)
    return complex(np.sum(values * phases))


def tail_bound(a: QSeries, tau: complex) -> float:
    """打ち切り誤差の粗い上界 max|c|·(cap+1)²·|q|^cap/(1−|q|)"""
    _check_numeric(a, tau)
    nome = float(np.exp(-2.0 * np.pi * complex(tau).imag))
    largest = max((abs(float(c)) for c in a._coefficients.values()), default=0.0)
    cap = float(a.order_cap)
    return max(largest, 1.0) * (cap + 1.0) ** 2 * nome ** cap / (1.0 - nome)


def _render_exponent(ticks: int) -> str:
    value = from_ticks(ticks)
    if value == 1:
        return "q"
    if value.denominator == 1:
        return f"q^{value.numerator}"
    return f"q^({format_rational(value)})"


def render_series(a: QSeries) -> str:
    """正準テキスト表示 "c0 + c1 q^{e1} + …"（指数の昇順）"""
    if a.is_zero():
        return "0"
    pieces = []
    for ticks, coefficient in a.tick_items():
        if isinstance(coefficient, GradedPoly):
            text = coefficient.render()
            single = len(coefficient) == 1
            scalar = single and coefficient.constant_term != 0
        else:
            text = format_rational(coefficient)
            single = scalar = True
        if ticks == 0:
            pieces.append(text if single else f"({text})")
            continue
        power = _render_exponent(ticks)
        if scalar and text == "1":
            pieces.append(power)
        elif scalar and text == "-1":
            pieces.append(f"-{power}")
        elif single:
            pieces.append(f"{text} {power}")
        else:
            pieces.append(f"({text}) {power}")
    return join_signed(pieces)

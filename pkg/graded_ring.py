#!/usr/bin/env python3
"""
次数付き多項式環モジュール
偶数次数の生成元を持つ疎な多項式を、次数上限で打ち切りながら厳密な有理数演算で扱う
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Optional, Dict, Any, List, Tuple, Iterable, Mapping, Union

from engine_error_handler import (
    EngineErrorType,
    NilpotencyError,
    RingContextError,
)


Rational = Fraction
Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


def to_rational(value: Any) -> Fraction:
    """スカラーを厳密な有理数に変換

    Args:
        value: int / Fraction / "p/q" 形式の文字列

    Returns:
        既約分数

    Raises:
        TypeError: 浮動小数点数など厳密でない値の場合
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational scalar")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"not an exact rational scalar: {value!r}")


@dataclass(frozen=True)
class GeneratorTable:
    """生成元テーブル（名前と次数の順序付きリスト、次数上限）"""
    entries: Tuple[Tuple[str, int], ...]
    degree_cap: int
    _index: Dict[str, int] = field(default=None, init=False, repr=False,
                                   compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, '_index',
                           {name: i for i, (name, _) in enumerate(self.entries)})

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(degree for _, degree in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RingContextError(
                f"unknown generator '{name}' (table: {', '.join(self.names)})",
                EngineErrorType.INVALID_GENERATOR,
                {'generator': name, 'table': list(self.names)},
            ) from None

    def degree_of(self, name: str) -> int:
        return self.entries[self.index(name)][1]

    def exponent_degree(self, exponent: Exponent) -> int:
        return sum(e * d for e, d in zip(exponent, self.degrees) if e)


def make_ring_context(generators: Iterable[Tuple[str, int]], degree_cap: int) -> GeneratorTable:
    """生成元テーブルを作成

    Args:
        generators: (名前, 次数) のリスト
        degree_cap: 次数上限（正の偶数）

    Returns:
        凍結された GeneratorTable

    Raises:
        RingContextError: 名前の重複・奇数次数・上限超過の場合
    """
    entries = tuple((str(name), int(degree)) for name, degree in generators)

    if degree_cap <= 0 or degree_cap % 2:
        raise RingContextError(f"degree cap must be a positive even integer: {degree_cap}",
                               EngineErrorType.INVALID_GENERATOR)

    seen = set()
    for name, degree in entries:
        if not name.isidentifier():
            raise RingContextError(f"generator name is not an identifier: {name!r}",
                                   EngineErrorType.INVALID_GENERATOR)
        if name in seen:
            raise RingContextError(f"duplicate generator name: {name}",
                                   EngineErrorType.INVALID_GENERATOR, {'generator': name})
        seen.add(name)
        if degree <= 0 or degree % 2:
            raise RingContextError(f"odd degree or non-positive degree for {name}: {degree}",
                                   EngineErrorType.INVALID_GENERATOR, {'generator': name})
        if degree > degree_cap:
            raise RingContextError(
                f"degree of {name} ({degree}) exceeds degree cap {degree_cap}",
                EngineErrorType.INVALID_GENERATOR, {'generator': name})

    return GeneratorTable(entries, degree_cap)


class GradedPoly:
    """次数上限で打ち切られる疎な多項式

    terms は指数ベクトル（生成元ごとの非負整数）から非零有理数への写像。
    次数上限を超える項は構築時に捨てられる。
    """

    __slots__ = ('context', '_terms', '_hash')

    def __init__(self, context: GeneratorTable,
                 terms: Optional[Mapping[Exponent, Scalar]] = None) -> None:
        self.context = context
        self._hash = None
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            width = len(context)
            cap = context.degree_cap
            for exponent, coefficient in terms.items():
                exponent = tuple(exponent)
                if len(exponent) != width or any(e < 0 for e in exponent):
                    raise RingContextError(f"malformed exponent vector {exponent}",
                                           EngineErrorType.INVALID_GENERATOR)
                if context.exponent_degree(exponent) > cap:
                    continue
                value = to_rational(coefficient)
                if value:
                    clean[exponent] = clean.get(exponent, 0) + value
            clean = {e: c for e, c in clean.items() if c}
        self._terms = clean

    @classmethod
    def _from_clean(cls, context: GeneratorTable, terms: Dict[Exponent, Fraction]) -> 'GradedPoly':
        poly = cls.__new__(cls)
        poly.context = context
        poly._terms = terms
        poly._hash = None
        return poly

    # 構築ヘルパー

    @classmethod
    def zero(cls, context: GeneratorTable) -> 'GradedPoly':
        return cls._from_clean(context, {})

    @classmethod
    def constant(cls, context: GeneratorTable, value: Scalar) -> 'GradedPoly':
        value = to_rational(value)
        if not value:
            return cls.zero(context)
        return cls._from_clean(context, {(0,) * len(context): value})

    @classmethod
    def one(cls, context: GeneratorTable) -> 'GradedPoly':
        return cls.constant(context, 1)

    @classmethod
    def generator(cls, context: GeneratorTable, name: str) -> 'GradedPoly':
        index = context.index(name)
        exponent = tuple(1 if i == index else 0 for i in range(len(context)))
        return cls._from_clean(context, {exponent: Fraction(1)})

    # 基本プロパティ

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * len(self.context), Fraction(0))

    def term_degrees(self) -> List[int]:
        return sorted({self.context.exponent_degree(e) for e in self._terms})

    def min_positive_degree(self) -> Optional[int]:
        degrees = [d for d in self.term_degrees() if d > 0]
        return degrees[0] if degrees else None

    def homogeneous_degree(self) -> Optional[int]:
        """斉次ならその次数、零多項式や非斉次なら None"""
        degrees = self.term_degrees()
        return degrees[0] if len(degrees) == 1 else None

    # 比較

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GradedPoly):
            return self.context == other.context and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self == GradedPoly.constant(self.context, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.context, frozenset(self._terms.items())))
        return self._hash

    # 算術

    def _coerce(self, other: Any) -> 'GradedPoly':
        if isinstance(other, GradedPoly):
            if other.context is not self.context and other.context != self.context:
                raise RingContextError(
                    "mismatched generator tables in polynomial arithmetic",
                    EngineErrorType.CONTEXT_MISMATCH,
                    {'left': list(self.context.names), 'right': list(other.context.names)},
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GradedPoly.constant(self.context, other)
        raise TypeError(f"cannot combine GradedPoly with {type(other).__name__}")

    def __add__(self, other: Any) -> 'GradedPoly':
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        result = dict(self._terms)
        for exponent, coefficient in other._terms.items():
            value = result.get(exponent, 0) + coefficient
            if value:
                result[exponent] = value
            else:
                result.pop(exponent, None)
        return GradedPoly._from_clean(self.context, result)

    __radd__ = __add__

    def __neg__(self) -> 'GradedPoly':
        return GradedPoly._from_clean(self.context, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: Any) -> 'GradedPoly':
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> 'GradedPoly':
        return (-self) + other

    def scale(self, factor: Scalar) -> 'GradedPoly':
        factor = to_rational(factor)
        if not factor:
            return GradedPoly.zero(self.context)
        return GradedPoly._from_clean(self.context,
                                      {e: c * factor for e, c in self._terms.items()})

    def __mul__(self, other: Any) -> 'GradedPoly':
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return GradedPoly._from_clean(self.context,
                                      _multiply_terms(self.context, self._terms, other._terms))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> 'GradedPoly':
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(1 / to_rational(other))
        return NotImplemented

    def __pow__(self, exponent: int) -> 'GradedPoly':
        if not isinstance(exponent, int) or isinstance(exponent, bool):
            return NotImplemented
        if exponent < 0:
            return poly_inverse(self) ** (-exponent)
        result = GradedPoly.one(self.context)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    # 成分

    def component(self, degree: int) -> 'GradedPoly':
        return component(self, degree)

    def components(self) -> Dict[int, 'GradedPoly']:
        buckets: Dict[int, Dict[Exponent, Fraction]] = {}
        for exponent, coefficient in self._terms.items():
            buckets.setdefault(self.context.exponent_degree(exponent), {})[exponent] = coefficient
        return {d: GradedPoly._from_clean(self.context, t) for d, t in sorted(buckets.items())}

    def truncate_degree(self, max_degree: int) -> 'GradedPoly':
        return GradedPoly._from_clean(
            self.context,
            {e: c for e, c in self._terms.items()
             if self.context.exponent_degree(e) <= max_degree})

    # 表示

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        """次数付き辞書式順（次数の昇順、同次数内はテーブル順で指数の大きい方から）"""
        degree = self.context.exponent_degree
        return sorted(self._terms.items(),
                      key=lambda item: (degree(item[0]), tuple(-e for e in item[0])))

    def render(self) -> str:
        return render_poly(self)

    def __str__(self) -> str:
        return render_poly(self)

    def __repr__(self) -> str:
        return f"GradedPoly({render_poly(self)})"


def _multiply_terms(context: GeneratorTable, left: Mapping[Exponent, Fraction],
                    right: Mapping[Exponent, Fraction]) -> Dict[Exponent, Fraction]:
    if not left or not right:
        return {}
    cap = context.degree_cap
    degree = context.exponent_degree
    right_items = sorted(((degree(e), e, c) for e, c in right.items()), key=lambda t: t[0])
    result: Dict[Exponent, Fraction] = {}
    for exp_a, coef_a in left.items():
        room = cap - degree(exp_a)
        for deg_b, exp_b, coef_b in right_items:
            if deg_b > room:
                break
            key = tuple(x + y for x, y in zip(exp_a, exp_b))
            result[key] = result.get(key, 0) + coef_a * coef_b
    return {e: c for e, c in result.items() if c}


def ring_generators(context: GeneratorTable) -> Dict[str, GradedPoly]:
    """テーブルの全生成元を名前付きで返す"""
    return {name: GradedPoly.generator(context, name) for name in context.names}


class PolyOp(Enum):
    """poly_arith の演算種別"""
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    POW = "pow"
    SCALE = "scale"


def poly_arith(op: Union[PolyOp, str], a: GradedPoly, b: Any) -> GradedPoly:
    """多項式の二項演算

    Args:
        op: add / sub / mul / pow / scale
        a: 左オペランド
        b: 多項式・有理数・指数

    Returns:
        次数上限で打ち切られた厳密な結果

    Raises:
        RingContextError: 生成元テーブルが異なる場合
    """
    op = PolyOp(op)
    if op is PolyOp.ADD:
        return a + a._coerce(b)
    if op is PolyOp.SUB:
        return a - a._coerce(b)
    if op is PolyOp.MUL:
        return a * a._coerce(b)
    if op is PolyOp.POW:
        return a ** int(b)
    return a.scale(b)


def poly_exp(a: GradedPoly) -> GradedPoly:
    """冪零元の指数関数 Σ a^k/k!

    Raises:
        NilpotencyError: 定数項が非零の場合
    """
    if a.constant_term:
        raise NilpotencyError(f"exp of an element with nonzero constant term {a.constant_term}",
                              EngineErrorType.NON_NILPOTENT)
    result = GradedPoly.one(a.context)
    power = result
    k = 0
    while True:
        k += 1
        power = (power * a).scale(Fraction(1, k))
        if power.is_zero():
            return result
        result = result + power


def poly_log(a: GradedPoly) -> GradedPoly:
    """定数項 1 の元の対数 Σ (-1)^{k+1} u^k/k（u = a - 1）

    Raises:
        NilpotencyError: 定数項が 1 でない場合
    """
    if a.constant_term != 1:
        raise NilpotencyError(f"log needs constant term 1, got {a.constant_term}",
                              EngineErrorType.NON_NILPOTENT)
    u = a - 1
    result = GradedPoly.zero(a.context)
    power = GradedPoly.one(a.context)
    k = 0
    while True:
        k += 1
        power = power * u
        if power.is_zero():
            return result
        result = result + power.scale(Fraction((-1) ** (k + 1), k))


def poly_inverse(a: GradedPoly) -> GradedPoly:
    """可逆元（定数項が非零）の逆元

    Raises:
        NilpotencyError: 定数項が 0 の場合
    """
    c = a.constant_term
    if not c:
        raise NilpotencyError("inverse of an element with zero constant term",
                              EngineErrorType.NON_INVERTIBLE)
    u = a.scale(1 / c) - 1
    result = GradedPoly.one(a.context)
    power = result
    while True:
        power = -(power * u)
        if power.is_zero():
            return result.scale(1 / c)
        result = result + power


def component(a: GradedPoly, degree: int) -> GradedPoly:
    """指定次数の斉次成分 {a}^{(degree)}"""
    if degree < 0 or degree > a.context.degree_cap:
        raise RingContextError(
            f"component degree {degree} outside 0..{a.context.degree_cap}",
            EngineErrorType.DEGREE_VIOLATION)
    exponent_degree = a.context.exponent_degree
    return GradedPoly._from_clean(
        a.context, {e: c for e, c in a.terms.items() if exponent_degree(e) == degree})


def substitute(a: GradedPoly, bindings: Mapping[str, GradedPoly],
               target: Optional[GeneratorTable] = None) -> GradedPoly:
    """生成元への斉次式の代入（環準同型）

    Args:
        a: 代入元の多項式
        bindings: 生成元名から置換式への写像（置換式は target のテーブル上）
        target: 結果のテーブル（省略時は a と同じ）。束縛されない生成元は同名の生成元へ写る

    Returns:
        代入結果（次数上限で再度打ち切り）

    Raises:
        RingContextError: 置換式が生成元と同じ次数の斉次式でない場合
    """
    source = a.context
    target = target or source
    images: List[GradedPoly] = []

    for name, degree in source.entries:
        if name in bindings:
            image = bindings[name]
            if isinstance(image, (int, Fraction)) and not isinstance(image, bool):
                image = GradedPoly.constant(target, image)
            if image.context != target:
                raise RingContextError(f"binding for {name} lives in another table",
                                       EngineErrorType.CONTEXT_MISMATCH)
            if not image.is_zero() and image.homogeneous_degree() != degree:
                raise RingContextError(
                    f"binding for {name} is not homogeneous of degree {degree}",
                    EngineErrorType.DEGREE_VIOLATION, {'generator': name})
        else:
            if name not in target:
                raise RingContextError(f"generator {name} has no image in target table",
                                       EngineErrorType.INVALID_GENERATOR)
            image = GradedPoly.generator(target, name)
        images.append(image)

    unknown = set(bindings) - set(source.names)
    if unknown:
        raise RingContextError(f"bindings for unknown generators: {sorted(unknown)}",
                               EngineErrorType.INVALID_GENERATOR)

    power_cache: Dict[Tuple[int, int], GradedPoly] = {}

    def image_power(index: int, e: int) -> GradedPoly:
        key = (index, e)
        if key not in power_cache:
            power_cache[key] = images[index] ** e
        return power_cache[key]

    result = GradedPoly.zero(target)
    for exponent, coefficient in a.terms.items():
        term = GradedPoly.constant(target, coefficient)
        for index, e in enumerate(exponent):
            if e:
                term = term * image_power(index, e)
                if term.is_zero():
                    break
        result = result + term
    return result


class NewtonDirection(Enum):
    """ニュートン恒等式の変換方向"""
    POWER_TO_ELEMENTARY = "power->elementary"
    ELEMENTARY_TO_POWER = "elementary->power"


def newton_convert(direction: Union[NewtonDirection, str], values: List[GradedPoly],
                   num_variables: int) -> List[GradedPoly]:
    """冪和と基本対称式の相互変換（ニュートンの恒等式）

    Args:
        direction: 変換方向
        values: 最初の m 個の冪和（または基本対称式）
        num_variables: 変数の個数

    Returns:
        変換後の m 個の式

    Raises:
        RingContextError: m が変数の個数を超える場合
    """
    direction = NewtonDirection(direction)
    m = len(values)
    if m > num_variables:
        raise RingContextError(
            f"{m} symmetric functions requested from {num_variables} variables",
            EngineErrorType.UNSUPPORTED_ARGUMENT)
    if not values:
        return []

    context = values[0].context
    for value in values:
        values[0]._coerce(value)

    if direction is NewtonDirection.POWER_TO_ELEMENTARY:
        power = values
        elementary = [GradedPoly.one(context)]
        for k in range(1, m + 1):
            total = GradedPoly.zero(context)
            for i in range(1, k + 1):
                term = elementary[k - i] * power[i - 1]
                total = total + term if i % 2 else total - term
            elementary.append(total.scale(Fraction(1, k)))
        return elementary[1:]

    elementary = [GradedPoly.one(context)] + list(values)
    power: List[GradedPoly] = []
    for k in range(1, m + 1):
        total = elementary[k].scale(k if k % 2 else -k)
        for i in range(1, k):
            term = elementary[i] * power[k - i - 1]
            total = total + term if i % 2 else total - term
        power.append(total)
    return power


def format_rational(value: Fraction) -> str:
    """有理数を "num/den" 形式で表示"""
    return str(to_rational(value))


def render_monomial(context: GeneratorTable, exponent: Exponent) -> str:
    factors = []
    for name, e in zip(context.names, exponent):
        if e == 1:
            factors.append(name)
        elif e:
            factors.append(f"{name}^{e}")
    return "*".join(factors)


def render_poly(a: GradedPoly) -> str:
    """正準テキスト表示（次数付き辞書式順、係数は num/den）"""
    if a.is_zero():
        return "0"
    pieces = []
    for exponent, coefficient in a.sorted_terms():
        monomial = render_monomial(a.context, exponent)
        if not monomial:
            pieces.append(format_rational(coefficient))
        elif coefficient == 1:
            pieces.append(monomial)
        elif coefficient == -1:
            pieces.append(f"-{monomial}")
        else:
            pieces.append(f"{format_rational(coefficient)} {monomial}")
    return join_signed(pieces)


def join_signed(pieces: List[str]) -> str:
    text = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith('-'):
            text += f" - {piece[1:]}"
        else:
            text += f" + {piece}"
    return text

#!/usr/bin/env python3
"""
モジュラー形式モジュール
正規化テータ関数・アイゼンシュタイン級数・レベル2の δ/ε・φ の冪を q 級数として構築し、
変換則を数値的に確認する
"""

import logging
import re
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Optional, Dict, Any, List, Tuple, Callable, Union

import numpy as np

from engine_error_handler import (
    EngineErrorType,
    NumericPrecisionError,
    RingContextError,
    UnknownNameError,
)
from graded_ring import (
    GeneratorTable,
    GradedPoly,
    make_ring_context,
    poly_exp,
    poly_log,
    to_rational,
)
from qseries import (
    QSeries,
    qs_eval_numeric,
    qs_exp,
    qs_product_form,
    product_threshold,
    tail_bound,
    to_ticks,
)


logger = logging.getLogger('ModularForms')

DEFAULT_TAU_SAMPLES = (2j, 1 + 2j, 0.5 + 2j)
DEFAULT_NUMERIC_ORDER = 40
DEFAULT_TOLERANCE = 1e-9
DEFAULT_V_SAMPLE = 0.1 + 0.05j


class NormalizedThetaKind(Enum):
    """正規化テータ関数の種類"""
    THETA = "theta"
    THETA1 = "theta1"
    THETA2 = "theta2"
    THETA3 = "theta3"


class _ZeroArgument:
    """スカラーの零引数（ZERO）"""

    _instance = None

    def __new__(cls) -> '_ZeroArgument':
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO"

    def __reduce__(self) -> str:
        return "ZERO"


ZERO = _ZeroArgument()
ThetaArgument = Union[GradedPoly, _ZeroArgument]


# 積表示の対数

def _pair_shift(kind: NormalizedThetaKind) -> Fraction:
    """因子 (1∓e^{±z}q^{n−shift}) の指数のずれ"""
    if kind in (NormalizedThetaKind.THETA2, NormalizedThetaKind.THETA3):
        return Fraction(1, 2)
    return Fraction(0)


def _pair_sign_plus(kind: NormalizedThetaKind) -> bool:
    return kind in (NormalizedThetaKind.THETA1, NormalizedThetaKind.THETA3)


def pair_log_terms(kind: NormalizedThetaKind, order: Any) -> List[Tuple[Fraction, int, Fraction]]:
    """log ∏(1∓e^z q^a)(1∓e^{−z} q^a) の項 (指数 a·k, k, 係数) の一覧

    各項は 係数·(e^{kz}+e^{−kz})·q^{a·k} を表す。
    """
    order = to_rational(order)
    shift = _pair_shift(kind)
    plus = _pair_sign_plus(kind)
    terms = []
    n = 1
    while n - shift <= order:
        base = n - shift
        k = 1
        while base * k <= order:
            if plus:
                coefficient = Fraction((-1) ** (k + 1), k)
            else:
                coefficient = Fraction(-1, k)
            terms.append((base * k, k, coefficient))
            k += 1
        n += 1
    return terms


def _phi_log_terms(order: Any) -> List[Tuple[Fraction, Fraction]]:
    """log ∏(1−qⁿ) = −Σ q^{nk}/k"""
    order = to_rational(order)
    terms = []
    for n in range(1, int(order) + 1):
        for k in range(1, int(order) // n + 1):
            terms.append((Fraction(n * k), Fraction(-1, k)))
    return terms


def _check_theta_argument(z: ThetaArgument) -> None:
    if z is ZERO:
        return
    if not isinstance(z, GradedPoly):
        raise RingContextError(f"theta argument must be a degree-2 form or ZERO, got {z!r}",
                               EngineErrorType.UNSUPPORTED_ARGUMENT)
    if any(degree != 2 for degree in z.term_degrees()):
        raise RingContextError("theta argument is not homogeneous of degree 2",
                               EngineErrorType.DEGREE_VIOLATION,
                               {'degrees': z.term_degrees()})


def theta_product(kind: NormalizedThetaKind, z: ThetaArgument, order: Any) -> QSeries:
    """q^{1/8} と前因子を除いた積部分 ∏(1−qⁿ)(1∓e^z q^a)(1∓e^{−z} q^a)

    Args:
        kind: テータ関数の種類
        z: 次数2の冪零形式、または ZERO
        order: 打ち切り次数

    Returns:
        exp(log 積) として計算した q 級数
    """
    kind = NormalizedThetaKind(kind)
    _check_theta_argument(z)
    ring: Optional[GeneratorTable] = None if z is ZERO else z.context

    doubled: Dict[int, Any] = {}
    if ring is not None:
        for k in {k for _, k, _ in pair_log_terms(kind, order)}:
            doubled[k] = poly_exp(z.scale(k)) + poly_exp(z.scale(-k))

    coefficients: Dict[Fraction, Any] = {}
    for exponent, coefficient in _phi_log_terms(order):
        coefficients[exponent] = coefficients.get(exponent, 0) + coefficient
    for exponent, k, coefficient in pair_log_terms(kind, order):
        value = doubled[k].scale(coefficient) if ring is not None else 2 * coefficient
        previous = coefficients.get(exponent, 0)
        coefficients[exponent] = value + previous

    log_series = QSeries(coefficients, order, ring)
    return qs_exp(log_series)


def theta(kind: NormalizedThetaKind, z: ThetaArgument, order: Any) -> QSeries:
    """正規化テータ関数 NΘ(z), NΘ₁(z), NΘ₂(z), NΘ₃(z)

    NΘ(z) = q^{1/8}(e^{z/2}−e^{−z/2})∏(1−qⁿ)(1−e^z qⁿ)(1−e^{−z}qⁿ) など。
    楕円変数 v（z = 2π√−1·v）の θ(v,τ) とは θ = −√−1·NΘ、θ_k = NΘ_k で対応する。

    Raises:
        RingContextError: 引数が次数2の斉次式でない場合
    """
    kind = NormalizedThetaKind(kind)
    _check_theta_argument(z)
    ring = None if z is ZERO else z.context
    if kind in (NormalizedThetaKind.THETA2, NormalizedThetaKind.THETA3):
        return theta_product(kind, z, order)

    if z is ZERO:
        prefactor: Any = Fraction(0) if kind is NormalizedThetaKind.THETA else Fraction(2)
    else:
        half_up = poly_exp(z.scale(Fraction(1, 2)))
        half_down = poly_exp(z.scale(Fraction(-1, 2)))
        prefactor = half_up - half_down if kind is NormalizedThetaKind.THETA else half_up + half_down
    if not prefactor:
        return QSeries.zero(order, ring)
    product = theta_product(kind, z, order).scale(prefactor)
    return product.shift(Fraction(1, 8)).truncate(order)


def phi(order: Any) -> QSeries:
    """φ(τ) = ∏(1−qⁿ)"""
    order = to_rational(order)

    def factor(n: int) -> QSeries:
        return QSeries({0: 1, n: -1}, order)

    return qs_product_form(factor, max(product_threshold(order), 1), order)


def phi_power(power: int, order: Any) -> QSeries:
    """φ^power（負の冪は逆数級数）"""
    return phi(order) ** power


def theta_prime_zero(order: Any) -> QSeries:
    """NΘ′(0) = q^{1/8}φ³（θ′(0,τ) = 2π·NΘ′(0)）"""
    return phi_power(3, order).shift(Fraction(1, 8)).truncate(order)


def _divisor_sigma(n: int, power: int) -> int:
    return sum(d ** power for d in range(1, n + 1) if n % d == 0)


_EISENSTEIN = {2: (-24, 1), 4: (240, 3), 6: (-504, 5)}


def eisenstein(k: int, order: Any) -> QSeries:
    """アイゼンシュタイン級数 E₂, E₄, E₆（約数和による展開）

    Raises:
        RingContextError: k が 2, 4, 6 以外の場合
    """
    if k not in _EISENSTEIN:
        raise RingContextError(f"Eisenstein series of weight {k} is not supported",
                               EngineErrorType.UNSUPPORTED_ARGUMENT, {'weight': k})
    scale, power = _EISENSTEIN[k]
    order = to_rational(order)
    coefficients = {0: 1}
    for n in range(1, int(order) + 1):
        coefficients[n] = scale * _divisor_sigma(n, power)
    return QSeries(coefficients, order)


class DeltaEps(Enum):
    """レベル2の明示的なモジュラー形式"""
    DELTA1 = "delta1"
    EPS1 = "eps1"
    DELTA2 = "delta2"
    EPS2 = "eps2"


def delta_eps(which: Union[DeltaEps, str], order: Any) -> QSeries:
    """δ₁ = (θ₂⁴+θ₃⁴)/8, ε₁ = θ₂⁴θ₃⁴/16, δ₂ = −(θ₁⁴+θ₃⁴)/8, ε₂ = θ₁⁴θ₃⁴/16"""
    which = DeltaEps(which)
    theta3 = theta(NormalizedThetaKind.THETA3, ZERO, order) ** 4
    if which in (DeltaEps.DELTA1, DeltaEps.EPS1):
        other = theta(NormalizedThetaKind.THETA2, ZERO, order) ** 4
    else:
        other = theta(NormalizedThetaKind.THETA1, ZERO, order) ** 4

    if which is DeltaEps.DELTA1:
        result = (other + theta3).scale(Fraction(1, 8))
    elif which is DeltaEps.DELTA2:
        result = (other + theta3).scale(Fraction(-1, 8))
    else:
        result = (other * theta3).scale(Fraction(1, 16))
    return result.truncate(order)


# 名前付き級数

def _product(*names: str) -> Callable[[Fraction], QSeries]:
    def build(order: Fraction) -> QSeries:
        result = QSeries.one(order)
        for name in names:
            result = result * named_series(name, order)
        return result
    return build


_SERIES_BUILDERS: Dict[str, Callable[[Fraction], QSeries]] = {
    "E2": lambda order: eisenstein(2, order),
    "E4": lambda order: eisenstein(4, order),
    "E6": lambda order: eisenstein(6, order),
    "phi": phi,
    "phi8": lambda order: phi_power(8, order),
    "phi16": lambda order: phi_power(16, order),
    "theta_prime_0": theta_prime_zero,
    "theta1_0": lambda order: theta(NormalizedThetaKind.THETA1, ZERO, order),
    "theta2_0": lambda order: theta(NormalizedThetaKind.THETA2, ZERO, order),
    "theta3_0": lambda order: theta(NormalizedThetaKind.THETA3, ZERO, order),
    "delta1": lambda order: delta_eps(DeltaEps.DELTA1, order),
    "eps1": lambda order: delta_eps(DeltaEps.EPS1, order),
    "delta2": lambda order: delta_eps(DeltaEps.DELTA2, order),
    "eps2": lambda order: delta_eps(DeltaEps.EPS2, order),
    "E4^2*E6": _product("E4", "E4", "E6"),
    "E4*E6": _product("E4", "E6"),
    "E4^2": _product("E4", "E4"),
}


def series_names() -> List[str]:
    return list(_SERIES_BUILDERS)


class SeriesCache:
    """名前付きスカラー級数のシングルトンキャッシュ - 再計算を削減"""
    _instances: Dict[Tuple[str, int], QSeries] = {}
    _lock = threading.RLock()

    @classmethod
    def get_series(cls, name: str, order: Any) -> QSeries:
        """(名前, 打ち切り次数) ごとに一度だけ構築した級数を返す

        Raises:
            UnknownNameError: 未登録の名前
        """
        if name not in _SERIES_BUILDERS:
            raise UnknownNameError(f"unknown series name '{name}'",
                                   EngineErrorType.UNKNOWN_NAME,
                                   {'registry': series_names()})
        key = (name, to_ticks(order))
        with cls._lock:
            if key not in cls._instances:
                logger.debug(f"Building series {name} through q^{order}")
                cls._instances[key] = _SERIES_BUILDERS[name](to_rational(order))
            else:
                logger.debug(f"Reusing cached series {name} through q^{order}")
            return cls._instances[key]

    @classmethod
    def clear_cache(cls) -> None:
        """キャッシュされた級数をクリア"""
        with cls._lock:
            cls._instances.clear()


def named_series(name: str, order: Any) -> QSeries:
    return SeriesCache.get_series(name, order)


# 根の1変数環での正規化テータの対数

ROOT_VARIABLE = "z"


@lru_cache(maxsize=None)
def root_ring(dimension: int) -> GeneratorTable:
    """形式的なチャーン根 1 個（次数2）だけを持つ環"""
    return make_ring_context([(ROOT_VARIABLE, 2)], dimension)


def _even_exponential(ring: GeneratorTable, k: int) -> GradedPoly:
    """e^{kz} + e^{−kz} − 2"""
    z = GradedPoly.generator(ring, ROOT_VARIABLE)
    return poly_exp(z.scale(k)) + poly_exp(z.scale(-k)) - 2


def _prefactor_log(kind: NormalizedThetaKind, ring: GeneratorTable) -> GradedPoly:
    z = GradedPoly.generator(ring, ROOT_VARIABLE)
    cap = ring.degree_cap // 2
    if kind is NormalizedThetaKind.THETA:
        # sinh(z/2)/(z/2) = Σ (z/2)^{2m}/(2m+1)!
        terms = [(z.scale(Fraction(1, 2)) ** (2 * m)).scale(Fraction(1, factorial(2 * m + 1)))
                 for m in range(cap // 2 + 1)]
    elif kind is NormalizedThetaKind.THETA1:
        terms = [(z.scale(Fraction(1, 2)) ** (2 * m)).scale(Fraction(1, factorial(2 * m)))
                 for m in range(cap // 2 + 1)]
    else:
        return GradedPoly.zero(ring)
    return poly_log(sum(terms, GradedPoly.zero(ring)))


@lru_cache(maxsize=None)
def log_normalized_theta(kind: NormalizedThetaKind, order: Fraction,
                         dimension: int) -> QSeries:
    """根 1 個あたりの正規化テータ商の対数

    THETA は log(NΘ(z)/(z·NΘ′(0)))、THETA_k は log(NΘ_k(z)/NΘ_k(0))。
    係数は root_ring(dimension) の z の偶数冪だけを含む。
    """
    kind = NormalizedThetaKind(kind)
    ring = root_ring(dimension)
    coefficients: Dict[Fraction, GradedPoly] = {0: _prefactor_log(kind, ring)}
    cache: Dict[int, GradedPoly] = {}
    for exponent, k, coefficient in pair_log_terms(kind, order):
        if k not in cache:
            cache[k] = _even_exponential(ring, k)
        value = cache[k].scale(coefficient)
        coefficients[exponent] = coefficients[exponent] + value if exponent in coefficients else value
    logger.debug(f"log of normalized {kind.value} through q^{order} built")
    return QSeries(coefficients, order, ring)


# 数値評価

def theta_numeric(kind: NormalizedThetaKind, v: complex, tau: complex,
                  n_terms: int = DEFAULT_NUMERIC_ORDER) -> complex:
    """θ(v,τ), θ₁, θ₂, θ₃（楕円変数 v）を積表示から倍精度で評価"""
    kind = NormalizedThetaKind(kind)
    tau = complex(tau)
    if tau.imag <= 0:
        raise NumericPrecisionError(f"tau {tau} not in the upper half-plane",
                                    EngineErrorType.NUMERIC_DOMAIN, {'tau': str(tau)})
    n = np.arange(1, n_terms + 1, dtype=float)
    q_n = np.exp(2j * np.pi * tau * n)
    a = n - float(_pair_shift(kind))
    q_a = np.exp(2j * np.pi * tau * a)
    x = np.exp(2j * np.pi * complex(v))
    sign = 1.0 if _pair_sign_plus(kind) else -1.0
    value = np.prod((1 - q_n) * (1 + sign * x * q_a) * (1 + sign * q_a / x))
    eighth = np.exp(2j * np.pi * tau / 8)
    if kind is NormalizedThetaKind.THETA:
        value = value * 2 * eighth * np.sin(np.pi * complex(v))
    elif kind is NormalizedThetaKind.THETA1:
        value = value * 2 * eighth * np.cos(np.pi * complex(v))
    return complex(value)


def product_tail_bound(tau: complex, v: complex, n_terms: int, magnitude: float) -> float:
    """打ち切った積の誤差上界（exp(Σ|δ_n|) − 1 による粗い評価）"""
    nome = float(np.exp(-2 * np.pi * complex(tau).imag))
    spread = float(np.exp(2 * np.pi * abs(complex(v).imag)))
    tail = (nome + 2 * spread * nome ** 0.5) * nome ** n_terms / (1 - nome)
    return (magnitude + 1.0) * float(np.expm1(tail))


@dataclass
class LawCheck:
    """変換則の数値確認結果"""
    law_id: str
    tau: complex
    residual: float
    tail_bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance


@dataclass(frozen=True)
class TransformationLaw:
    """登録済みの変換則"""
    law_id: str
    statement: str
    evaluate: Callable[[complex, Fraction, complex], Tuple[complex, complex, float]]


def _series_value(name: str, tau: complex, order: Fraction) -> Tuple[complex, float]:
    series = named_series(name, order)
    return qs_eval_numeric(series, tau), tail_bound(series, tau)


def _theta_prime_value(tau: complex, order: Fraction) -> Tuple[complex, float]:
    value, bound = _series_value("theta_prime_0", tau, order)
    return 2 * np.pi * value, 2 * np.pi * bound


def _root(tau: complex) -> complex:
    """(τ/√−1)^{1/2}（主枝）"""
    return complex(np.sqrt(complex(tau) / 1j))


def _modular_law(name: str, weight: int, other: Optional[str] = None
                 ) -> Callable[[complex, Fraction, complex], Tuple[complex, complex, float]]:
    def evaluate(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
        lhs, bound_left = _series_value(name, -1 / tau, order)
        rhs, bound_right = _series_value(other or name, tau, order)
        return lhs, tau ** weight * rhs, max(bound_left, abs(tau) ** weight * bound_right)
    return evaluate


def _e2_s(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
    lhs, bound_left = _series_value("E2", -1 / tau, order)
    rhs, bound_right = _series_value("E2", tau, order)
    return lhs, tau ** 2 * rhs - 6j * tau / np.pi, max(bound_left, abs(tau) ** 2 * bound_right)


def _e2_t(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
    lhs, bound_left = _series_value("E2", tau + 1, order)
    rhs, bound_right = _series_value("E2", tau, order)
    return lhs, rhs, max(bound_left, bound_right)


_THETA_SERIES = {
    NormalizedThetaKind.THETA1: "theta1_0",
    NormalizedThetaKind.THETA2: "theta2_0",
    NormalizedThetaKind.THETA3: "theta3_0",
}

# S 変換で移る先: θ→θ, θ₁→θ₂, θ₂→θ₁, θ₃→θ₃
_S_IMAGE = {
    NormalizedThetaKind.THETA: NormalizedThetaKind.THETA,
    NormalizedThetaKind.THETA1: NormalizedThetaKind.THETA2,
    NormalizedThetaKind.THETA2: NormalizedThetaKind.THETA1,
    NormalizedThetaKind.THETA3: NormalizedThetaKind.THETA3,
}

# T 変換: θ, θ₁ は e^{πi/4} 倍、θ₂ ↔ θ₃
_T_IMAGE = {
    NormalizedThetaKind.THETA: (NormalizedThetaKind.THETA, np.exp(1j * np.pi / 4)),
    NormalizedThetaKind.THETA1: (NormalizedThetaKind.THETA1, np.exp(1j * np.pi / 4)),
    NormalizedThetaKind.THETA2: (NormalizedThetaKind.THETA3, 1.0),
    NormalizedThetaKind.THETA3: (NormalizedThetaKind.THETA2, 1.0),
}


def _theta_s(kind: NormalizedThetaKind
             ) -> Callable[[complex, Fraction, complex], Tuple[complex, complex, float]]:
    image = _S_IMAGE[kind]
    unit = 1 / 1j if kind is NormalizedThetaKind.THETA else 1.0

    def evaluate(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
        n_terms = int(order)
        factor = unit * _root(tau) * np.exp(1j * np.pi * tau * v * v)
        lhs = theta_numeric(kind, v, -1 / tau, n_terms)
        rhs = factor * theta_numeric(image, tau * v, tau, n_terms)
        bound = max(product_tail_bound(-1 / tau, v, n_terms, abs(lhs)),
                    abs(factor) * product_tail_bound(tau, tau * v, n_terms, abs(rhs / factor)))
        if kind in _THETA_SERIES:
            scalar_lhs, bound_left = _series_value(_THETA_SERIES[kind], -1 / tau, order)
            scalar_rhs, bound_right = _series_value(_THETA_SERIES[image], tau, order)
            scalar_rhs = _root(tau) * scalar_rhs
            # v = 0 の級数評価と比べて大きい方の残差を採用
            if abs(scalar_lhs - scalar_rhs) > abs(lhs - rhs):
                lhs, rhs = scalar_lhs, scalar_rhs
            bound = max(bound, bound_left, abs(_root(tau)) * bound_right)
        return lhs, rhs, bound
    return evaluate


def _theta_t(kind: NormalizedThetaKind
             ) -> Callable[[complex, Fraction, complex], Tuple[complex, complex, float]]:
    image, phase = _T_IMAGE[kind]

    def evaluate(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
        n_terms = int(order)
        lhs = theta_numeric(kind, v, tau + 1, n_terms)
        rhs = phase * theta_numeric(image, v, tau, n_terms)
        bound = max(product_tail_bound(tau + 1, v, n_terms, abs(lhs)),
                    product_tail_bound(tau, v, n_terms, abs(rhs)))
        if kind in _THETA_SERIES:
            scalar_lhs, bound_left = _series_value(_THETA_SERIES[kind], tau + 1, order)
            scalar_rhs, bound_right = _series_value(_THETA_SERIES[image], tau, order)
            scalar_rhs = phase * scalar_rhs
            if abs(scalar_lhs - scalar_rhs) > abs(lhs - rhs):
                lhs, rhs = scalar_lhs, scalar_rhs
            bound = max(bound, bound_left, bound_right)
        return lhs, rhs, bound
    return evaluate


def _theta_prime_s(tau: complex, order: Fraction, v: complex) -> Tuple[complex, complex, float]:
    lhs, bound_left = _theta_prime_value(-1 / tau, order)
    rhs, bound_right = _theta_prime_value(tau, order)
    factor = (1 / 1j) * _root(tau) * tau
    return lhs, factor * rhs, max(bound_left, abs(factor) * bound_right)


TRANSFORMATION_LAWS: Dict[str, TransformationLaw] = {
    law.law_id: law for law in [
        TransformationLaw("E2_S", "E2(-1/tau) = tau^2 E2(tau) - 6 i tau / pi", _e2_s),
        TransformationLaw("E2_T", "E2(tau+1) = E2(tau)", _e2_t),
        TransformationLaw("E4_S", "E4(-1/tau) = tau^4 E4(tau)", _modular_law("E4", 4)),
        TransformationLaw("E6_S", "E6(-1/tau) = tau^6 E6(tau)", _modular_law("E6", 6)),
        TransformationLaw("theta_S",
                          "theta(v,-1/tau) = (1/i)(tau/i)^(1/2) e^(pi i tau v^2) theta(tau v,tau)",
                          _theta_s(NormalizedThetaKind.THETA)),
        TransformationLaw("theta_T", "theta(v,tau+1) = e^(pi i/4) theta(v,tau)",
                          _theta_t(NormalizedThetaKind.THETA)),
        TransformationLaw("theta1_S",
                          "theta1(v,-1/tau) = (tau/i)^(1/2) e^(pi i tau v^2) theta2(tau v,tau)",
                          _theta_s(NormalizedThetaKind.THETA1)),
        TransformationLaw("theta1_T", "theta1(v,tau+1) = e^(pi i/4) theta1(v,tau)",
                          _theta_t(NormalizedThetaKind.THETA1)),
        TransformationLaw("theta2_S",
                          "theta2(v,-1/tau) = (tau/i)^(1/2) e^(pi i tau v^2) theta1(tau v,tau)",
                          _theta_s(NormalizedThetaKind.THETA2)),
        TransformationLaw("theta2_T", "theta2(v,tau+1) = theta3(v,tau)",
                          _theta_t(NormalizedThetaKind.THETA2)),
        TransformationLaw("theta3_S",
                          "theta3(v,-1/tau) = (tau/i)^(1/2) e^(pi i tau v^2) theta3(tau v,tau)",
                          _theta_s(NormalizedThetaKind.THETA3)),
        TransformationLaw("theta3_T", "theta3(v,tau+1) = theta2(v,tau)",
                          _theta_t(NormalizedThetaKind.THETA3)),
        TransformationLaw("theta_prime_S",
                          "theta'(0,-1/tau) = (1/i)(tau/i)^(1/2) tau theta'(0,tau)",
                          _theta_prime_s),
        TransformationLaw("delta_S", "delta2(-1/tau) = tau^2 delta1(tau)",
                          _modular_law("delta2", 2, "delta1")),
        TransformationLaw("eps_S", "eps2(-1/tau) = tau^4 eps1(tau)",
                          _modular_law("eps2", 4, "eps1")),
    ]
}


def law_names() -> List[str]:
    return list(TRANSFORMATION_LAWS)


def check_transformation_numeric(law_id: str, tau: complex,
                                 order: Any = DEFAULT_NUMERIC_ORDER,
                                 tol: float = DEFAULT_TOLERANCE,
                                 v: complex = DEFAULT_V_SAMPLE) -> LawCheck:
    """変換則の両辺を数値評価して残差を返す

    Args:
        law_id: 変換則の名前（TRANSFORMATION_LAWS のキー）
        tau: 標本点（上半平面）
        order: 級数の打ち切り次数（積の因子数にも使う）
        tol: 許容誤差
        v: 楕円変数の標本点

    Returns:
        LawCheck

    Raises:
        UnknownNameError: 未登録の変換則
        NumericPrecisionError: 打ち切り誤差の上界が tol を超える、または τ が上半平面外
    """
    if law_id not in TRANSFORMATION_LAWS:
        raise UnknownNameError(f"unknown transformation law '{law_id}'",
                               EngineErrorType.UNKNOWN_NAME, {'registry': law_names()})
    tau = complex(tau)
    if tau.imag <= 0:
        raise NumericPrecisionError(f"tau {tau} not in the upper half-plane",
                                    EngineErrorType.NUMERIC_DOMAIN, {'tau': str(tau)})
    order = to_rational(order)
    lhs, rhs, bound = TRANSFORMATION_LAWS[law_id].evaluate(tau, order, complex(v))
    if not bound < tol:
        raise NumericPrecisionError(
            f"truncation tail bound {bound:.3e} exceeds tolerance {tol:.1e} "
            f"for {law_id} at tau={tau}; raise the numeric order",
            EngineErrorType.TAIL_BOUND,
            {'law': law_id, 'tau': str(tau), 'tail_bound': bound, 'order': str(order)})
    residual = float(abs(lhs - rhs))
    logger.debug(f"{law_id} at tau={tau}: residual {residual:.3e}, tail {bound:.3e}")
    return LawCheck(law_id, tau, residual, bound, tol)


_NUMBER = r'\d+(?:\.\d*)?(?:/\d+)?'
_TAU_PATTERN = re.compile(
    rf'^(?:(?P<real>[+-]?{_NUMBER})(?=[+-]))?(?P<imag>[+-]?(?:{_NUMBER})?)i$')


def parse_tau(text: str) -> complex:
    """"2i", "1+2i", "1/2+2i", "0.1i" 形式の文字列を複素数に変換

    Raises:
        ValueError: 形式が不正な場合
    """
    compact = text.replace(' ', '').replace('j', 'i')
    match = _TAU_PATTERN.match(compact)
    if not match:
        raise ValueError(f"cannot parse tau sample '{text}'")
    real_text = match.group('real') or '0'
    imag_text = match.group('imag')
    if imag_text in ('', '+'):
        imag_text = '1'
    elif imag_text == '-':
        imag_text = '-1'
    return complex(float(Fraction(real_text)), float(Fraction(imag_text)))

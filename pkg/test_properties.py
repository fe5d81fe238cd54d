#!/usr/bin/env python3
"""
代数的性質のランダムテスト（シード固定）
多項式環の公理、exp/log、代入の準同型性、ニュートン恒等式、λ 環の恒等式、
q 級数の逆数と exp の加法性、積表示の打ち切りの安定性
"""

import random
import unittest
from fractions import Fraction

from charforms import ChernCharacterData, LambdaOp, adams, lambda_sym
from graded_ring import (
    GradedPoly,
    NewtonDirection,
    make_ring_context,
    newton_convert,
    poly_exp,
    poly_inverse,
    poly_log,
    substitute,
)
from qseries import QSeries, product_threshold, qs_exp, qs_log, qs_product_form, qs_reciprocal

CASES = 120


def random_rational(rng, allow_zero=True):
    while True:
        value = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
        if value or allow_zero:
            return value


def random_poly(rng, ring, constant=True, terms=4):
    """生成元 x（次数2）, y（次数4）の多項式"""
    x = GradedPoly.generator(ring, "x")
    y = GradedPoly.generator(ring, "y")
    result = GradedPoly.constant(ring, random_rational(rng)) if constant else GradedPoly.zero(ring)
    for _ in range(terms):
        i, j = rng.randint(0, 4), rng.randint(0, 2)
        if i == 0 and j == 0:
            continue
        result = result + (x ** i) * (y ** j) * random_rational(rng)
    return result


def random_series(rng, order, constant=None, valuation=Fraction(0)):
    """1/2 刻みの指数を持つ有理数係数の級数"""
    coefficients = {}
    if constant is not None:
        coefficients[Fraction(0)] = constant
    exponent = max(valuation, Fraction(1, 2)) if constant is not None else valuation
    while exponent <= order:
        if rng.random() < 0.7:
            coefficients[exponent] = random_rational(rng)
        exponent += Fraction(1, 2)
    return QSeries(coefficients, order)


class TestRingProperties(unittest.TestCase):
    """多項式環の性質"""

    def setUp(self):
        """テストセットアップ"""
        self.rng = random.Random(20240601)
        self.ring = make_ring_context([("x", 2), ("y", 4)], 8)

    def test_ring_axioms(self):
        """可換・結合・分配法則"""
        for case in range(CASES):
            a, b, c = (random_poly(self.rng, self.ring) for _ in range(3))
            with self.subTest(case=case):
                self.assertEqual(a * b, b * a)
                self.assertEqual((a * b) * c, a * (b * c))
                self.assertEqual(a * (b + c), a * b + a * c)
                self.assertTrue((a - a).is_zero())

    def test_components_sum_to_whole(self):
        """斉次成分の和は元の多項式"""
        for case in range(CASES):
            a = random_poly(self.rng, self.ring)
            total = GradedPoly.zero(self.ring)
            for degree in range(0, 9, 2):
                total = total + a.component(degree)
            with self.subTest(case=case):
                self.assertEqual(total, a)

    def test_exp_log(self):
        """exp(log(1 + a)) = 1 + a、exp(a + b) = exp(a)exp(b)"""
        for case in range(CASES):
            a = random_poly(self.rng, self.ring, constant=False)
            b = random_poly(self.rng, self.ring, constant=False)
            with self.subTest(case=case):
                self.assertEqual(poly_exp(poly_log(1 + a)), 1 + a)
                self.assertEqual(poly_exp(a + b), poly_exp(a) * poly_exp(b))

    def test_inverse(self):
        """定数項が非零なら a·a⁻¹ = 1"""
        for case in range(CASES):
            a = random_poly(self.rng, self.ring, constant=False) + random_rational(
                self.rng, allow_zero=False)
            with self.subTest(case=case):
                self.assertEqual(a * poly_inverse(a), 1)

    def test_substitution_is_homomorphism(self):
        """y ↦ 斉次式の代入は積と和を保つ"""
        x = GradedPoly.generator(self.ring, "x")
        for case in range(CASES):
            image = (x ** 2).scale(random_rational(self.rng))
            image = image + GradedPoly.generator(self.ring, "y").scale(random_rational(self.rng))
            a, b = random_poly(self.rng, self.ring), random_poly(self.rng, self.ring)
            bindings = {"y": image}
            with self.subTest(case=case):
                self.assertEqual(substitute(a * b, bindings),
                                 substitute(a, bindings) * substitute(b, bindings))
                self.assertEqual(substitute(a + b, bindings),
                                 substitute(a, bindings) + substitute(b, bindings))


class TestNewtonProperties(unittest.TestCase):
    """ニュートン恒等式の性質"""

    def setUp(self):
        """テストセットアップ"""
        self.rng = random.Random(7)
        # 平方チャーン根の冪和に合わせて次数 4, 8, 12 の生成元
        self.ring = make_ring_context([("a", 4), ("b", 8), ("c", 12)], 32)
        self.a, self.b, self.c = (GradedPoly.generator(self.ring, name) for name in "abc")

    def random_homogeneous(self, weight):
        """次数 4·weight の斉次式"""
        result = GradedPoly.zero(self.ring)
        for c_power in range(weight // 3 + 1):
            for b_power in range((weight - 3 * c_power) // 2 + 1):
                a_power = weight - 3 * c_power - 2 * b_power
                if self.rng.random() < 0.6:
                    monomial = ((self.a ** a_power) * (self.b ** b_power)
                                * (self.c ** c_power))
                    result = result + monomial.scale(random_rational(self.rng))
        return result

    def test_rational_values_round_trip(self):
        """有理数の基本対称式 → 冪和 → 基本対称式"""
        ring = make_ring_context([("e", 2)], 2)
        for case in range(CASES):
            values = [GradedPoly.constant(ring, random_rational(self.rng)) for _ in range(4)]
            power = newton_convert(NewtonDirection.ELEMENTARY_TO_POWER, values, 4)
            with self.subTest(case=case):
                self.assertEqual(newton_convert(NewtonDirection.POWER_TO_ELEMENTARY, power, 4),
                                 values)

    def test_graded_round_trip(self):
        """次数 4k の斉次式の組で両方向の往復が恒等写像（変数の個数 5〜8）"""
        for case in range(CASES):
            num_variables = 5 + case % 4
            m = self.rng.randint(1, num_variables)
            values = [self.random_homogeneous(k) for k in range(1, m + 1)]
            with self.subTest(case=case, num_variables=num_variables, m=m):
                power = newton_convert(NewtonDirection.ELEMENTARY_TO_POWER, values,
                                       num_variables)
                self.assertEqual(newton_convert(NewtonDirection.POWER_TO_ELEMENTARY, power,
                                                num_variables), values)
                elementary = newton_convert(NewtonDirection.POWER_TO_ELEMENTARY, values,
                                            num_variables)
                self.assertEqual(newton_convert(NewtonDirection.ELEMENTARY_TO_POWER,
                                                elementary, num_variables), values)

    def test_graded_output_is_homogeneous(self):
        """斉次な入力の k 番目の出力は次数 4k の斉次式"""
        for case in range(CASES):
            num_variables = 5 + case % 4
            values = [self.random_homogeneous(k) for k in range(1, num_variables + 1)]
            power = newton_convert(NewtonDirection.ELEMENTARY_TO_POWER, values, num_variables)
            for k, poly in enumerate(power, start=1):
                with self.subTest(case=case, k=k):
                    self.assertEqual(poly.component(4 * k), poly)


class TestLambdaRingProperties(unittest.TestCase):
    """アダムス作用素と λ 演算の性質"""

    def setUp(self):
        """テストセットアップ"""
        self.rng = random.Random(314159)
        self.ring = make_ring_context([("x", 2), ("y", 4)], 8)

    def random_class(self):
        return ChernCharacterData(random_poly(self.rng, self.ring))

    def test_adams_is_ring_homomorphism(self):
        """ψ^k は加法的かつ乗法的で、ψ^j ψ^k = ψ^{jk}"""
        for case in range(CASES):
            u, v = self.random_class(), self.random_class()
            j, k = self.rng.randint(1, 4), self.rng.randint(1, 4)
            with self.subTest(case=case, j=j, k=k):
                self.assertEqual(adams(k, u + v), adams(k, u) + adams(k, v))
                self.assertEqual(adams(k, u * v), adams(k, u) * adams(k, v))
                self.assertEqual(adams(j, adams(k, u)), adams(j * k, u))

    def test_lambda_of_direct_sum(self):
        """λ_t(V⊕W) = λ_t(V)λ_t(W) の t², t³ の係数"""
        for case in range(CASES):
            u, v = self.random_class(), self.random_class()
            l2u, l2v = lambda_sym(LambdaOp.LAMBDA2, u), lambda_sym(LambdaOp.LAMBDA2, v)
            with self.subTest(case=case):
                self.assertEqual(lambda_sym(LambdaOp.LAMBDA2, u + v), l2u + u * v + l2v)
                self.assertEqual(lambda_sym(LambdaOp.LAMBDA3, u + v),
                                 lambda_sym(LambdaOp.LAMBDA3, u) + l2u * v + u * l2v
                                 + lambda_sym(LambdaOp.LAMBDA3, v))

    def test_square_splits(self):
        """S²V + Λ²V = V⊗V"""
        for case in range(CASES):
            u = self.random_class()
            with self.subTest(case=case):
                self.assertEqual(lambda_sym(LambdaOp.SYM2, u) + lambda_sym(LambdaOp.LAMBDA2, u),
                                 lambda_sym(LambdaOp.TENSOR, u, u))

    def test_line_elements(self):
        """階数1の元 e^a では Λ² = Λ³ = 0、ψ^k(e^a) = e^{ka}"""
        x = GradedPoly.generator(self.ring, "x")
        for case in range(CASES):
            a = x.scale(random_rational(self.rng))
            line = ChernCharacterData(poly_exp(a))
            k = self.rng.randint(1, 5)
            with self.subTest(case=case):
                self.assertTrue(lambda_sym(LambdaOp.LAMBDA2, line).value.is_zero())
                self.assertTrue(lambda_sym(LambdaOp.LAMBDA3, line).value.is_zero())
                self.assertEqual(adams(k, line).value, poly_exp(a.scale(k)))


class TestSeriesProperties(unittest.TestCase):
    """q 級数の性質"""

    def setUp(self):
        """テストセットアップ"""
        self.rng = random.Random(1729)

    def test_reciprocal(self):
        """s·(1/s) = 1"""
        for case in range(CASES):
            s = random_series(self.rng, Fraction(3), constant=random_rational(
                self.rng, allow_zero=False))
            with self.subTest(case=case):
                self.assertEqual(s * qs_reciprocal(s), QSeries.one(3))

    def test_exp_additive(self):
        """exp(a + b) = exp(a)·exp(b)（定数項 0）"""
        for case in range(CASES):
            a = random_series(self.rng, Fraction(3), valuation=Fraction(1, 2))
            b = random_series(self.rng, Fraction(3), valuation=Fraction(1, 2))
            with self.subTest(case=case):
                self.assertEqual(qs_exp(a + b), qs_exp(a) * qs_exp(b))

    def test_log_of_product(self):
        """log(st) = log s + log t（定数項 1）"""
        for case in range(CASES):
            s = random_series(self.rng, Fraction(3), constant=Fraction(1))
            t = random_series(self.rng, Fraction(3), constant=Fraction(1))
            with self.subTest(case=case):
                self.assertEqual(qs_log(s * t), qs_log(s) + qs_log(t))

    def test_multiplication_commutes(self):
        """積は可換で、打ち切り次数も対称"""
        for case in range(CASES):
            s = random_series(self.rng, Fraction(self.rng.randint(1, 4)))
            t = random_series(self.rng, Fraction(self.rng.randint(1, 4)))
            with self.subTest(case=case):
                self.assertEqual(s * t, t * s)
                self.assertEqual((s * t).order_cap, (t * s).order_cap)

    def test_product_truncation_stable(self):
        """閾値以上では因子を増やしても打ち切り次数までの係数は変わらない"""
        for case in range(CASES):
            order = Fraction(self.rng.randint(2, 7), 2)
            threshold = product_threshold(order)
            factors = {}
            for n in range(1, threshold + 6):
                coefficients = {Fraction(0): Fraction(1)}
                exponent = Fraction(n, 2)
                while exponent <= order:
                    if self.rng.random() < 0.6:
                        coefficients[exponent] = random_rational(self.rng)
                    exponent += Fraction(1, 2)
                factors[n] = QSeries(coefficients, order)
            extra = self.rng.randint(1, 5)
            with self.subTest(case=case, order=order):
                self.assertEqual(
                    qs_product_form(factors.__getitem__, threshold, order),
                    qs_product_form(factors.__getitem__, threshold + extra, order))


if __name__ == '__main__':
    unittest.main(verbosity=2)

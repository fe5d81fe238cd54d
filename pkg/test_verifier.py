#!/usr/bin/env python3
"""
定理検証モジュールのテストファイル
基底へのあてはめ、形式展開、定理・系の検証、故意の誤りの検出、スイート実行
"""

import unittest
from fractions import Fraction

from charforms import LineConvention
from engine_error_handler import (
    InternalEngineError,
    RingContextError,
    SeriesTruncationError,
    UnknownNameError,
)
from modforms import named_series
from verifier import (
    CheckStatus,
    ModularGroup,
    THEOREM_IDS,
    fit_gamma,
    fit_series,
    fit_sl2z,
    formal_skeleton,
    gamma_swap_check,
    modular_basis,
    parse_group,
    printed_h_displays,
    run_suite,
    select_theorems,
    series_variant,
    solve_basis_system,
    summarize,
    swap_combination,
    verify_theorem,
    word,
    word_coefficient,
)


class TestModularGroups(unittest.TestCase):
    """群の名前と基底のテスト"""

    def test_parse_group(self):
        """正準名と Γ 表記"""
        self.assertIs(parse_group("SL2Z"), ModularGroup.SL2Z)
        self.assertIs(parse_group("sl2z"), ModularGroup.SL2Z)
        self.assertIs(parse_group("Γ0(2)"), ModularGroup.GAMMA0_2)
        self.assertIs(parse_group("Γ^0(2)"), ModularGroup.GAMMA_UP0_2)
        with self.assertRaises(UnknownNameError):
            parse_group("GAMMA1_4")

    def test_level2_basis_names(self):
        """重さ14の Γ^0(2) の基底"""
        names = [name for name, _ in modular_basis(ModularGroup.GAMMA_UP0_2, 14, 2)]
        self.assertEqual(names, ["(8delta2)^7", "(8delta2)^5*eps2", "(8delta2)^3*eps2^2",
                                 "(8delta2)*eps2^3"])

    def test_unsupported_sl2z_weight(self):
        """SL2Z の重さ12は対象外"""
        with self.assertRaises(RingContextError):
            modular_basis(ModularGroup.SL2Z, 12, 2)

    def test_series_variant_lookup(self):
        """Q 級数の種類"""
        variant = series_variant("Q2_12")
        self.assertEqual(variant.expected_weight, 14)
        self.assertIs(variant.group, ModularGroup.GAMMA_UP0_2)
        with self.assertRaises(UnknownNameError):
            series_variant("Q3_12")


class TestFits(unittest.TestCase):
    """基底へのあてはめのテスト"""

    def test_sl2z_pass(self):
        """E4² は重さ8で q³ まで確認される"""
        fit = fit_sl2z(named_series("E4^2", 3), 8)
        self.assertTrue(fit.passed)
        self.assertEqual(fit.coefficients, [1])
        self.assertEqual(fit.certified_through, 3)
        self.assertIsNone(fit.first_failure)

    def test_sl2z_failure_reported(self):
        """E6 を重さ14にあてはめると q¹ で残差"""
        fit = fit_series(named_series("E6", 3), "SL2Z", 14)
        self.assertFalse(fit.passed)
        self.assertEqual(fit.first_failure, 1)
        self.assertEqual(fit.residuals[Fraction(1)], -480)

    def test_series_too_short(self):
        """あてはめには基底の次元より2段多い次数が必要"""
        with self.assertRaises(SeriesTruncationError):
            fit_sl2z(named_series("E4^2", 1), 8)

    def test_level2_fit(self):
        """E4 = (8δ₂)² − 48ε₂"""
        fit = fit_gamma(named_series("E4", 2), ModularGroup.GAMMA_UP0_2, 4)
        self.assertTrue(fit.passed)
        self.assertEqual(fit.coefficients, [1, -48])
        self.assertEqual(fit.fit_orders, [0, Fraction(1, 2)])

    def test_level2_non_modular(self):
        """E2 は重さ2の Γ_0(2) 形式ではない"""
        fit = fit_gamma(named_series("E2", 3), "GAMMA0_2", 2)
        self.assertFalse(fit.passed)

    def test_fit_gamma_rejects_sl2z(self):
        """fit_gamma はレベル2専用"""
        with self.assertRaises(RingContextError):
            fit_gamma(named_series("E4", 3), ModularGroup.SL2Z, 4)

    def test_singular_system(self):
        """特異な行列は SINGULAR_SYSTEM"""
        with self.assertRaises(InternalEngineError):
            solve_basis_system([[1, 2], [2, 4]], [Fraction(1), Fraction(2)])

    def test_solve(self):
        """2x2 の連立方程式"""
        self.assertEqual(solve_basis_system([[2, 1], [1, 3]], [Fraction(3), Fraction(4)]),
                         [1, 1])

    def test_solve_polynomial_rhs(self):
        """右辺が多項式でも有理数の逆行列を掛けて解く"""
        T, A = word("T"), word("A")
        solution = solve_basis_system([[1, 1], [0, 2]], [T, A])
        self.assertEqual(solution[0], T - A.scale(Fraction(1, 2)))
        self.assertEqual(solution[1], A.scale(Fraction(1, 2)))

    def test_solve_rational_entries(self):
        """有理数の成分のまま厳密に解く"""
        self.assertEqual(solve_basis_system([[Fraction(1, 3), 0], [1, Fraction(1, 4)]],
                                            [Fraction(1), Fraction(2)]),
                         [3, -4])


class TestFormalSkeleton(unittest.TestCase):
    """形式展開のテスト"""

    def test_two_bundle_displays(self):
        """h_r の形式的な値が表示と一致"""
        skeleton = formal_skeleton(2)
        self.assertEqual(skeleton.weight, 14)
        displays = printed_h_displays(2, Fraction)
        for r, display in enumerate(displays):
            with self.subTest(r=r):
                self.assertEqual(skeleton.h[r], display)

    def test_one_bundle_displays(self):
        """h′_r の形式的な値が表示と一致"""
        skeleton = formal_skeleton(1)
        self.assertEqual(skeleton.weight, 10)
        for r, display in enumerate(printed_h_displays(1, Fraction)):
            with self.subTest(r=r):
                self.assertEqual(skeleton.h[r], display)

    def test_leading_coefficient(self):
        """h₀ = −1"""
        self.assertEqual(formal_skeleton(2).h[0], -word())

    def test_swap_constants(self):
        """入れ替えの q⁰ の係数から 128 と 17 が出る"""
        combination = swap_combination(list(formal_skeleton(1).h), 10, 0)
        self.assertEqual(word_coefficient(combination), -64)
        self.assertEqual(word_coefficient(combination, "T"), Fraction(-17, 2))

    def test_unsupported_bundle_count(self):
        """束の数は1か2"""
        with self.assertRaises(RingContextError):
            formal_skeleton(3)


class TestSpinTheorems(unittest.TestCase):
    """3.x 系列の定理と系のテスト"""

    def test_section3_pass(self):
        """3.x 系列の定理と系はすべて PASS"""
        for theorem_id in select_theorems("3.*"):
            with self.subTest(theorem=theorem_id):
                report = verify_theorem(theorem_id, order=1)
                self.assertIs(report.status, CheckStatus.PASS, report.to_dict())
                self.assertTrue(report.difference.is_zero())
                self.assertTrue(all(c.matches for c in report.constants_checked))

    def test_fit_certificate(self):
        """T3.6 は Γ^0(2) のあてはめで確認される"""
        report = verify_theorem("T3.6", order=1)
        self.assertEqual(report.q_order, 2)
        self.assertTrue(report.certification.startswith("certified through"))
        self.assertIn("h'0 fitted", report.side_checks)

    def test_perturbed_constant_fails(self):
        """定数 17 を 18 にすると FAIL"""
        report = verify_theorem("C3.7", order=1, perturb={"17": 1})
        self.assertIs(report.status, CheckStatus.FAIL)
        mismatched = [c.name for c in report.constants_checked if not c.matches]
        self.assertIn("17", mismatched)
        self.assertFalse(report.difference.is_zero())

    def test_unknown_constant(self):
        """存在しない定数名"""
        with self.assertRaises(UnknownNameError):
            verify_theorem("C3.7", perturb={"19": 1})

    def test_unknown_theorem(self):
        """未登録の id"""
        with self.assertRaises(UnknownNameError) as ctx:
            verify_theorem("T9.9")
        self.assertEqual(ctx.exception.details['registry'], list(THEOREM_IDS))


class TestSpincTheorems(unittest.TestCase):
    """2.x 系列の定理と系のテスト（線束の規約）"""

    def test_real2_passes(self):
        """REAL2 では PASS"""
        report = verify_theorem("C2.10", l_convention="REAL2")
        self.assertIs(report.status, CheckStatus.PASS)
        self.assertIs(report.convention, LineConvention.REAL2)
        self.assertEqual(report.q_order, 3)

    def test_trivial_fails(self):
        """TRIVIAL では FAIL"""
        report = verify_theorem("C2.10", order=2, l_convention=LineConvention.TRIVIAL)
        self.assertIs(report.status, CheckStatus.FAIL)

    def test_default_is_convention_dependent(self):
        """規約を指定しなければ決定された規約で評価し、規約依存と報告する"""
        report = verify_theorem("C2.10", order=2)
        self.assertIs(report.status, CheckStatus.CONVENTION_DEPENDENT)
        self.assertIs(report.convention, LineConvention.REAL2)
        self.assertIn(LineConvention.REAL2, report.passing_conventions)
        self.assertNotIn(LineConvention.TRIVIAL, report.passing_conventions)
        self.assertTrue(report.passed)

    def test_shift_constant(self):
        """T2.9 の −488 は φ⁸ と E4² の q¹ の係数から再導出される"""
        report = verify_theorem("T2.9", order=2, l_convention="REAL2")
        self.assertIs(report.status, CheckStatus.PASS)
        self.assertEqual([(c.name, c.computed) for c in report.constants_checked],
                         [("-488", -488)])

    def test_consistency_ladder(self):
        """A = 0 を代入した定理の差は系の差に一致し、定理のずれは系のずれと係数から決まる"""
        for corollary, theorem, shift in (("C2.4", "T2.3", 8), ("C2.7", "T2.6", 256),
                                          ("C2.10", "T2.9", -488)):
            with self.subTest(corollary=corollary):
                report = verify_theorem(corollary, order=2, l_convention="REAL2")
                self.assertTrue(report.side_checks[f"ladder {theorem}"].is_zero())
                ladder = [c for c in report.constants_checked if c.name.startswith(theorem)]
                self.assertEqual([(c.computed, c.matches) for c in ladder], [(shift, True)])

    def test_consistency_ladder_detects_factor_change(self):
        """系の係数をずらすと定理との照合も崩れる"""
        report = verify_theorem("C2.10", order=2, l_convention="REAL2", perturb={"488": 1})
        self.assertIs(report.status, CheckStatus.FAIL)
        self.assertIn("ladder T2.9", report.failing_side_checks())
        mismatched = [c.name for c in report.constants_checked if not c.matches]
        self.assertIn("T2.9 -488", mismatched)


class TestGammaSwap(unittest.TestCase):
    """Γ_0(2) と Γ^0(2) の入れ替えのテスト"""

    def test_swap_passes(self):
        """入れ替えの関係が q¹ まで成り立つ"""
        report = gamma_swap_check(order=1)
        self.assertIs(report.status, CheckStatus.PASS)
        self.assertIn("Q1_12 q^1", report.side_checks)
        self.assertIn("Q1_12_ONE_BUNDLE q^0", report.side_checks)

    def test_perturbed_h_fails(self):
        """h₁ をずらすと FAIL"""
        report = gamma_swap_check(order=1, h_perturbation={"h1": 1})
        self.assertIs(report.status, CheckStatus.FAIL)
        self.assertTrue(report.failing_side_checks())

    def test_unknown_h(self):
        """h₅ は存在しない"""
        with self.assertRaises(UnknownNameError):
            gamma_swap_check(order=1, h_perturbation={"h5": 1})

    def test_registry_entry(self):
        """L3.2 も登録された評価関数を通り、ずれの名前は h0〜h3"""
        report = verify_theorem("L3.2", order=1)
        self.assertIs(report.status, CheckStatus.PASS)
        self.assertEqual(report.constants_checked, [])
        self.assertEqual(report.certification, "certified through q^1")
        report = verify_theorem("L3.2", order=1, perturb={"h0": Fraction(1, 2)})
        self.assertIs(report.status, CheckStatus.FAIL)
        self.assertEqual(report.certification, "swap relation fails")


class TestSuite(unittest.TestCase):
    """選択とスイート実行のテスト"""

    def test_select(self):
        """パターンによる選択"""
        self.assertEqual(len(select_theorems("*")), 16)
        self.assertEqual(select_theorems("3.*"),
                         ["T3.3", "C3.4", "T3.6", "C3.7", "T3.8", "C3.9"])
        self.assertEqual(select_theorems("L*"), ["L3.2"])
        self.assertEqual(select_theorems("C2.1?"), ["C2.10"])
        self.assertEqual(select_theorems("Z*"), [])

    def test_run_suite(self):
        """系の検証をまとめて実行"""
        reports, summary = run_suite("C3.*", order=1)
        self.assertEqual([r.theorem_id for r in reports], ["C3.4", "C3.7", "C3.9"])
        self.assertEqual(summary, {'PASS': 3, 'FAIL': 0, 'CONVENTION_DEPENDENT': 0, 'total': 3})

    def test_run_suite_threads(self):
        """スレッドプールでも登録順に返る"""
        reports, summary = run_suite("C3.*", order=1, max_workers=2, use_threading=True)
        self.assertEqual([r.theorem_id for r in reports], ["C3.4", "C3.7", "C3.9"])
        self.assertEqual(summary['PASS'], 3)

    def test_summarize_empty(self):
        """空の集計"""
        self.assertEqual(summarize([])['total'], 0)

    def test_to_dict(self):
        """JSON 用の辞書"""
        payload = verify_theorem("C3.7", order=1).to_dict()
        self.assertEqual(payload['theorem'], "C3.7")
        self.assertEqual(payload['status'], "PASS")
        self.assertEqual(payload['difference'], "0")
        self.assertEqual(payload['ms'], 0)
        self.assertEqual(payload['constants'][2], {'name': "1/60", 'expected': "1/60",
                                                   'computed': "1/60"})


if __name__ == '__main__':
    unittest.main(verbosity=2)

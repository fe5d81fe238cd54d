#!/usr/bin/env python3
"""
計算エンジンのエラーハンドリングのテストファイル
例外の分類、ユーザー向けメッセージ、回復提案、エラーレポート
"""

import unittest

from engine_error_handler import (
    EngineError,
    EngineErrorHandler,
    EngineErrorType,
    InternalEngineError,
    NilpotencyError,
    NumericPrecisionError,
    RingContextError,
    SeriesTruncationError,
    UnknownNameError,
)
from graded_ring import GradedPoly, make_ring_context, poly_inverse
from modforms import named_series
from qseries import QSeries, qs_coefficient


class TestExceptionHierarchy(unittest.TestCase):
    """例外クラスのテスト"""

    def test_builtin_bases(self):
        """組み込み例外としても捕捉できること"""
        self.assertTrue(issubclass(RingContextError, ValueError))
        self.assertTrue(issubclass(NilpotencyError, ValueError))
        self.assertTrue(issubclass(SeriesTruncationError, ValueError))
        self.assertTrue(issubclass(NumericPrecisionError, ValueError))
        self.assertTrue(issubclass(UnknownNameError, KeyError))
        self.assertTrue(issubclass(InternalEngineError, RuntimeError))

    def test_default_types(self):
        """エラータイプの既定値"""
        self.assertIs(RingContextError("x").error_type, EngineErrorType.CONTEXT_MISMATCH)
        self.assertIs(SeriesTruncationError("x").error_type,
                      EngineErrorType.TRUNCATION_EXCEEDED)
        self.assertIs(EngineError("x").error_type, EngineErrorType.UNKNOWN_ERROR)
        self.assertEqual(EngineError("x").details, {})

    def test_unknown_name_message(self):
        """UnknownNameError の文字列は引用符なしのメッセージ"""
        self.assertEqual(str(UnknownNameError("unknown theorem id 'T9.9'")),
                         "unknown theorem id 'T9.9'")


class TestEngineErrorHandler(unittest.TestCase):
    """エラーハンドラのテスト"""

    def setUp(self):
        """テストセットアップ"""
        self.error_handler = EngineErrorHandler(debug=True)

    def test_invalid_generator_report(self):
        """生成元テーブルの重複"""
        with self.assertRaises(RingContextError) as context:
            make_ring_context([("s1", 4), ("s1", 8)], 12)

        error_report = self.error_handler.create_error_report(context.exception)
        self.assertEqual(error_report['error_type'], 'invalid_generator')
        self.assertIn('生成元テーブルが不正です', error_report['user_message'])
        self.assertIn('生成元の名前を一意にする', error_report['recovery_suggestions'])
        self.assertEqual(error_report['technical_details']['exception_class'], 'RingContextError')

    def test_non_invertible_report(self):
        """冪零元の逆元"""
        ring = make_ring_context([("x", 2)], 4)
        with self.assertRaises(NilpotencyError) as context:
            poly_inverse(GradedPoly.generator(ring, "x"))

        error_report = self.error_handler.create_error_report(context.exception)
        self.assertEqual(error_report['error_type'], 'non_invertible')
        self.assertIn('逆元が存在しません', error_report['user_message'])

    def test_truncation_report(self):
        """打ち切り次数を超える係数"""
        with self.assertRaises(SeriesTruncationError) as context:
            qs_coefficient(QSeries.one(2), 3)

        error_report = self.error_handler.create_error_report(context.exception)
        self.assertEqual(error_report['error_type'], 'truncation_exceeded')
        self.assertIn('--q-order を上げて再実行する', error_report['recovery_suggestions'])

    def test_unknown_name_lists_registry(self):
        """未登録の名前では登録一覧を示す"""
        with self.assertRaises(UnknownNameError) as context:
            named_series("E10", 2)

        error_report = self.error_handler.create_error_report(context.exception)
        self.assertEqual(error_report['error_type'], 'unknown_name')
        self.assertIn('E4^2*E6', error_report['user_message'])
        self.assertIn('registry', error_report['technical_details'])

    def test_numeric_domain_message(self):
        """下半平面の τ"""
        error = NumericPrecisionError("tau must lie in the upper half plane",
                                      EngineErrorType.NUMERIC_DOMAIN)
        error_type, message, details = self.error_handler.analyze_exception(error)
        self.assertIs(error_type, EngineErrorType.NUMERIC_DOMAIN)
        self.assertIn('上半平面', self.error_handler.get_user_friendly_message(error_type, details))

    def test_plain_exception_patterns(self):
        """エンジン外の例外はメッセージのパターンで分類"""
        analyze = self.error_handler.analyze_exception
        self.assertIs(analyze(RuntimeError("odd degree 3"))[0], EngineErrorType.INVALID_GENERATOR)
        self.assertIs(analyze(ValueError("exponent off the grid"))[0],
                      EngineErrorType.GRID_VIOLATION)
        self.assertIs(analyze(KeyError("E10"))[0], EngineErrorType.UNKNOWN_NAME)
        self.assertIs(analyze(ZeroDivisionError("division by zero"))[0],
                      EngineErrorType.NON_INVERTIBLE)

    def test_unknown_error_report(self):
        """分類できない例外"""
        error_report = self.error_handler.create_error_report(Exception("boom"))
        self.assertEqual(error_report['error_type'], 'unknown_error')
        self.assertIn('不明なエラー', error_report['user_message'])
        self.assertIn('--debug を付けてログを確認する', error_report['recovery_suggestions'])

    def test_report_structure(self):
        """エラーレポートの構造"""
        error_report = self.error_handler.create_error_report(
            InternalEngineError("singular fit system at column 1"))
        for key in ('timestamp', 'error_type', 'error_message', 'user_message',
                    'recovery_suggestions', 'technical_details', 'system_info'):
            self.assertIn(key, error_report)
        self.assertEqual(error_report['error_type'], 'singular_system')
        self.assertIn('numpy_version', error_report['system_info'])
        self.assertIn('python_version', error_report['system_info'])


if __name__ == '__main__':
    unittest.main(verbosity=2)

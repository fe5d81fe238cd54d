#!/usr/bin/env python3
"""
計算エンジンのエラーハンドリング専用モジュール
環・q級数・検証器で発生する例外の分類、ユーザー向けメッセージ、回復提案
"""

import sys
import platform
from datetime import datetime
from enum import Enum
from typing import Optional, Dict, Any, List, Tuple
import logging

import numpy as np


class EngineErrorType(Enum):
    """計算エンジンエラーの種類"""
    CONTEXT_MISMATCH = "context_mismatch"
    INVALID_GENERATOR = "invalid_generator"
    DEGREE_VIOLATION = "degree_violation"
    NON_NILPOTENT = "non_nilpotent"
    NON_INVERTIBLE = "non_invertible"
    TRUNCATION_EXCEEDED = "truncation_exceeded"
    GRID_VIOLATION = "grid_violation"
    UNSUPPORTED_ARGUMENT = "unsupported_argument"
    UNKNOWN_NAME = "unknown_name"
    SINGULAR_SYSTEM = "singular_system"
    TAIL_BOUND = "tail_bound"
    NUMERIC_DOMAIN = "numeric_domain"
    UNKNOWN_ERROR = "unknown_error"


class EngineError(Exception):
    """計算エンジン例外の基底クラス"""

    default_type = EngineErrorType.UNKNOWN_ERROR

    def __init__(self, message: str, error_type: Optional[EngineErrorType] = None,
                 details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.error_type = error_type or self.default_type
        self.details = details or {}


class RingContextError(EngineError, ValueError):
    """生成元テーブル・次数・文脈の不整合"""
    default_type = EngineErrorType.CONTEXT_MISMATCH


class NilpotencyError(EngineError, ValueError):
    """exp/log/逆元の前提条件違反"""
    default_type = EngineErrorType.NON_NILPOTENT


class SeriesTruncationError(EngineError, ValueError):
    """打ち切り次数を超える係数の要求"""
    default_type = EngineErrorType.TRUNCATION_EXCEEDED


class NumericPrecisionError(EngineError, ValueError):
    """数値評価の精度・定義域エラー"""
    default_type = EngineErrorType.TAIL_BOUND


class UnknownNameError(EngineError, KeyError):
    """未登録の名前（級数・定理・変換則）"""
    default_type = EngineErrorType.UNKNOWN_NAME

    def __str__(self) -> str:
        # KeyError は引数を repr で表示するため通常のメッセージに戻す
        return str(self.args[0]) if self.args else ''


class InternalEngineError(EngineError, RuntimeError):
    """起こり得ない内部状態（特異な連立方程式など）"""
    default_type = EngineErrorType.SINGULAR_SYSTEM


class EngineErrorHandler:
    """計算エンジンエラーハンドリングクラス"""

    def __init__(self, debug: bool = False):
        """初期化

        Args:
            debug: デバッグモードの有効/無効
        """
        self.debug = debug
        self.logger = self._setup_logger()

        # 例外メッセージに含まれる典型パターン
        self.ERROR_PATTERNS = {
            "mismatched": EngineErrorType.CONTEXT_MISMATCH,
            "duplicate generator": EngineErrorType.INVALID_GENERATOR,
            "odd degree": EngineErrorType.INVALID_GENERATOR,
            "not homogeneous": EngineErrorType.DEGREE_VIOLATION,
            "beyond order cap": EngineErrorType.TRUNCATION_EXCEEDED,
            "grid": EngineErrorType.GRID_VIOLATION,
        }

    def _setup_logger(self) -> logging.Logger:
        """ロガーのセットアップ

        Returns:
            設定済みロガー
        """
        logger = logging.getLogger('EngineErrorHandler')
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        logger.setLevel(logging.DEBUG if self.debug else logging.INFO)
        return logger

    def analyze_exception(self, exc: BaseException) -> Tuple[EngineErrorType, str, Dict[str, Any]]:
        """例外の詳細分析

        Args:
            exc: 発生した例外

        Returns:
            (エラータイプ, エラーメッセージ, 詳細情報)
        """
        message = str(exc)
        details: Dict[str, Any] = {
            'exception_class': type(exc).__name__,
            'error_details': message,
        }

        if isinstance(exc, EngineError):
            details.update(exc.details)
            return exc.error_type, message, details

        lowered = message.lower()
        for pattern, error_type in self.ERROR_PATTERNS.items():
            if pattern in lowered:
                return error_type, message, details

        if isinstance(exc, KeyError):
            return EngineErrorType.UNKNOWN_NAME, message, details
        if isinstance(exc, ZeroDivisionError):
            return EngineErrorType.NON_INVERTIBLE, message, details

        return EngineErrorType.UNKNOWN_ERROR, message, details

    def get_user_friendly_message(self, error_type: EngineErrorType, details: Dict[str, Any]) -> str:
        """ユーザーフレンドリーなエラーメッセージを生成

        Args:
            error_type: エラータイプ
            details: エラー詳細情報

        Returns:
            ユーザー向けエラーメッセージ
        """
        detail = details.get('error_details', 'No details available')

        messages = {
            EngineErrorType.CONTEXT_MISMATCH:
                f"❌ 異なる生成元テーブル同士の演算です\n"
                f"   詳細: {detail}\n"
                f"   💡 同じ ManifoldContext から作られた式同士で計算してください",

            EngineErrorType.INVALID_GENERATOR:
                f"❌ 生成元テーブルが不正です\n"
                f"   詳細: {detail}\n"
                f"   💡 名前の重複・奇数次数・次数上限超過を確認してください",

            EngineErrorType.DEGREE_VIOLATION:
                f"❌ 次数の条件を満たしていません\n"
                f"   詳細: {detail}\n"
                f"   💡 代入や引数は生成元と同じ次数の斉次式にしてください",

            EngineErrorType.NON_NILPOTENT:
                f"❌ 冪零でない元に exp/log を適用しようとしました\n"
                f"   詳細: {detail}\n"
                f"   💡 定数項を取り除いてから exp を計算してください",

            EngineErrorType.NON_INVERTIBLE:
                f"❌ 逆元が存在しません\n"
                f"   詳細: {detail}\n"
                f"   💡 最低次の係数が可逆（非零の有理数定数項）か確認してください",

            EngineErrorType.TRUNCATION_EXCEEDED:
                f"❌ 打ち切り次数を超える係数が要求されました\n"
                f"   詳細: {detail}\n"
                f"   💡 --q-order を上げて再計算してください",

            EngineErrorType.GRID_VIOLATION:
                f"❌ q の指数が 1/24 の格子上にありません\n"
                f"   詳細: {detail}\n"
                f"   💡 指数は 1/24 の整数倍で指定してください",

            EngineErrorType.UNSUPPORTED_ARGUMENT:
                f"❌ サポートされていない引数です\n"
                f"   詳細: {detail}",

            EngineErrorType.UNKNOWN_NAME:
                f"❌ 未登録の名前です\n"
                f"   詳細: {detail}\n"
                f"   💡 登録済み: {', '.join(details.get('registry', [])) or '-'}",

            EngineErrorType.SINGULAR_SYSTEM:
                f"❌ 基底への当てはめ連立方程式が特異です（内部エラー）\n"
                f"   詳細: {detail}",

            EngineErrorType.TAIL_BOUND:
                f"❌ 打ち切り誤差の上界が許容誤差を超えています\n"
                f"   詳細: {detail}\n"
                f"   💡 --numeric-order を上げるか、Im(τ) の大きい標本点を使ってください",

            EngineErrorType.NUMERIC_DOMAIN:
                f"❌ 数値評価の定義域外です\n"
                f"   詳細: {detail}\n"
                f"   💡 τ は上半平面（Im τ > 0）から選んでください",
        }

        return messages.get(error_type,
            f"❌ 不明なエラーが発生しました\n"
            f"   詳細: {detail}"
        )

    def get_recovery_suggestions(self, error_type: EngineErrorType) -> List[str]:
        """エラー回復のための提案を取得

        Args:
            error_type: エラータイプ

        Returns:
            回復提案のリスト
        """
        suggestions = {
            EngineErrorType.CONTEXT_MISMATCH: [
                "同じ ManifoldContext から式を作り直す",
                "有理数係数の級数は promote で明示的に持ち上げる",
            ],
            EngineErrorType.INVALID_GENERATOR: [
                "生成元の名前を一意にする",
                "次数を正の偶数にする",
                "次数上限を生成元の最大次数以上にする",
            ],
            EngineErrorType.DEGREE_VIOLATION: [
                "代入先の式を斉次成分だけにする",
                "theta の引数は次数2の項だけにする",
            ],
            EngineErrorType.NON_NILPOTENT: [
                "定数項を分離して exp を計算する",
                "log は定数項 1 の元にだけ適用する",
            ],
            EngineErrorType.NON_INVERTIBLE: [
                "最低次の係数を確認する",
            ],
            EngineErrorType.TRUNCATION_EXCEEDED: [
                "--q-order を上げて再実行する",
                "積表示の n_max を閾値以上にする",
            ],
            EngineErrorType.GRID_VIOLATION: [
                "指数を 1/24 の整数倍にする",
            ],
            EngineErrorType.UNKNOWN_NAME: [
                "登録済みの名前一覧を確認する",
                "定理IDは T2.3 のように接頭辞付きで指定する",
            ],
            EngineErrorType.TAIL_BOUND: [
                "--numeric-order を上げる",
                "Im(τ) と Im(−1/τ) がともに大きい標本点を選ぶ",
                "--tolerance を緩める",
            ],
            EngineErrorType.NUMERIC_DOMAIN: [
                "上半平面の τ を指定する",
                "形式係数の級数ではなく有理数係数の級数を評価する",
            ],
        }

        return suggestions.get(error_type, [
            "入力と設定を確認する",
            "--debug を付けてログを確認する",
        ])

    def create_error_report(self, exc: BaseException) -> Dict[str, Any]:
        """詳細なエラーレポートを作成

        Args:
            exc: 発生した例外

        Returns:
            エラーレポート辞書
        """
        error_type, message, details = self.analyze_exception(exc)

        report = {
            'timestamp': datetime.now().isoformat(),
            'error_type': error_type.value,
            'error_message': message,
            'user_message': self.get_user_friendly_message(error_type, details),
            'recovery_suggestions': self.get_recovery_suggestions(error_type),
            'technical_details': details,
            'system_info': {
                'numpy_version': np.__version__,
                'python_version': sys.version,
                'platform': platform.platform()
            }
        }

        if self.debug:
            self.logger.debug(f"Error report created: {report}")

        return report

#!/usr/bin/env python3
"""
レポートファイルパス生成モジュール
<command>_<target>_report.<txt|json> の命名、重複時の連番、出力ディレクトリの解決
"""

import os
import re
from pathlib import Path
from typing import Optional, Tuple, List
import logging


OUTPUT_DIR_ENV = "E8_ANOMALY_OUTPUT_DIR"


class ReportPathGenerator:
    """レポートファイルパス生成クラス"""

    EXTENSIONS = {'text': '.txt', 'json': '.json'}
    MAX_COLLISION_ATTEMPTS = 999

    def __init__(self, debug: bool = False):
        """初期化

        Args:
            debug: デバッグモードの有効/無効
        """
        self.debug = debug
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        """ロガーのセットアップ

        Returns:
            設定済みロガー
        """
        logger = logging.getLogger('ReportPathGenerator')
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        logger.setLevel(logging.DEBUG if self.debug else logging.INFO)
        return logger

    @staticmethod
    def sanitize_target(target: str) -> str:
        """ファイル名に使える形へ変換（ワイルドカードは all、その他の記号は _）"""
        cleaned = target.replace('*', 'all').replace('?', 'x')
        cleaned = re.sub(r'[^A-Za-z0-9.\-]+', '_', cleaned).strip('_.')
        return cleaned or 'all'

    def environment_output_dir(self) -> Optional[str]:
        """環境変数 E8_ANOMALY_OUTPUT_DIR（未設定または空なら None）"""
        value = os.environ.get(OUTPUT_DIR_ENV, '').strip()
        return value or None

    def generate_report_path(self, command: str, target: str, output_format: str = 'text',
                             output_dir: Optional[str] = None) -> str:
        """レポートファイルパスを生成

        Args:
            command: サブコマンド名（verify など）
            target: 対象（検証パターンや対象名）
            output_format: text または json
            output_dir: 出力ディレクトリ（省略時は環境変数、それもなければカレント）

        Returns:
            既存ファイルと重複しないパス

        Raises:
            ValueError: 未対応の出力形式
            PermissionError: 出力ディレクトリへの書き込み権限がない場合
        """
        if output_format not in self.EXTENSIONS:
            raise ValueError(f"Unsupported report format: {output_format}")
        if output_dir is None:
            output_dir = self.environment_output_dir() or os.getcwd()

        self._ensure_output_directory(output_dir)
        name = f"{command}_{self.sanitize_target(target)}_report{self.EXTENSIONS[output_format]}"
        candidate = os.path.join(output_dir, name)
        if self.debug:
            self.logger.debug(f"Base report path: {candidate}")

        final_path = self._resolve_path_collision(candidate)
        if self.debug:
            self.logger.debug(f"Final report path: {final_path}")
        return final_path

    def _ensure_output_directory(self, output_dir: str) -> None:
        """出力ディレクトリの作成と書き込み権限の確認

        Raises:
            PermissionError: 書き込み権限がない場合
            OSError: ディレクトリ作成に失敗した場合
        """
        output_path = Path(output_dir)
        if not output_path.exists():
            try:
                output_path.mkdir(parents=True, exist_ok=True)
                if self.debug:
                    self.logger.debug(f"Created output directory: {output_dir}")
            except OSError as e:
                raise OSError(f"Failed to create output directory: {output_dir} - {e}")

        if not os.access(output_dir, os.W_OK):
            raise PermissionError(f"No write permission for output directory: {output_dir}")

    def _resolve_path_collision(self, base_path: str) -> str:
        """既存ファイルがあれば _001, _002, … を付ける"""
        if not os.path.exists(base_path):
            return base_path

        if self.debug:
            self.logger.debug(f"Path collision detected: {base_path}")
        path_obj = Path(base_path)
        counter = 1
        new_path = path_obj.parent / f"{path_obj.stem}_{counter:03d}{path_obj.suffix}"
        while new_path.exists() and counter <= self.MAX_COLLISION_ATTEMPTS:
            counter += 1
            new_path = path_obj.parent / f"{path_obj.stem}_{counter:03d}{path_obj.suffix}"

        if new_path.exists():
            raise RuntimeError(
                f"Failed to resolve path collision after {self.MAX_COLLISION_ATTEMPTS} attempts")
        return str(new_path)

    def validate_output_path(self, output_path: str,
                             allow_overwrite: bool = True) -> Tuple[bool, List[str]]:
        """出力パスの妥当性を検証

        Args:
            output_path: 出力ファイルのパス
            allow_overwrite: 既存ファイルの上書きを許すか（--out は上書きを許す）

        Returns:
            (妥当性, 問題のリスト)
        """
        issues = []
        output_path_obj = Path(output_path)
        parent_dir = output_path_obj.parent

        if not parent_dir.exists():
            issues.append(f"出力ディレクトリが存在しません: {parent_dir}")
        elif not os.access(str(parent_dir), os.W_OK):
            issues.append(f"出力ディレクトリへの書き込み権限がありません: {parent_dir}")

        invalid_chars = set('<>:"|?*')
        if any(char in output_path_obj.name for char in invalid_chars):
            issues.append(f"ファイル名に無効な文字が含まれています: {output_path_obj.name}")

        if output_path_obj.is_dir():
            issues.append(f"出力先がディレクトリです: {output_path}")
        elif output_path_obj.exists() and not allow_overwrite:
            issues.append(f"出力ファイルが既に存在します: {output_path}")

        return len(issues) == 0, issues

    def write_report(self, output_path: str, content: str) -> str:
        """レポートを書き込む（UTF-8）

        Raises:
            ValueError: 出力パスが妥当でない場合
        """
        self._ensure_output_directory(str(Path(output_path).parent))
        is_valid, issues = self.validate_output_path(output_path)
        if not is_valid:
            raise ValueError("; ".join(issues))
        Path(output_path).write_text(content, encoding='utf-8')
        self.logger.debug(f"Report written: {output_path}")
        return output_path

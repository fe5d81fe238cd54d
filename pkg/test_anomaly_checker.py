#!/usr/bin/env python3
"""
コマンドラインツールのテストファイル
expand / fit / verify / check-transforms の出力と終了コード、レポートの書き込み
"""

import io
import json
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from pathlib import Path
from unittest import mock

from anomaly_checker import AnomalyFormulaChecker, RunConfig, _to_json, build_parser, main
from report_path_generator import OUTPUT_DIR_ENV


class CLITestCase(unittest.TestCase):
    """main() を stdout/stderr を捕捉して呼び出す共通処理"""

    def setUp(self):
        """テストセットアップ"""
        self.temp_dir = tempfile.mkdtemp()
        self.env = mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: ""})
        self.env.start()

    def tearDown(self):
        """テスト後処理"""
        self.env.stop()
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def run_cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()


class TestExpandCommand(CLITestCase):
    """expand のテスト"""

    def test_expand_delta1(self):
        """δ₁ の q² までの展開"""
        code, out, _ = self.run_cli("expand", "delta1", "--q-order", "2")
        self.assertEqual(code, 0)
        self.assertEqual(out, "1/4 + 6 q + 6 q^2\n")

    def test_expand_json(self):
        """JSON 出力の係数は文字列の有理数"""
        code, out, _ = self.run_cli("expand", "E4^2*E6", "--q-order", "2", "--format", "json")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload['name'], "E4^2*E6")
        self.assertEqual(payload['q_order'], "2")
        self.assertEqual(payload['value'], "1 - 24 q - 196632 q^2")
        self.assertEqual(payload['coefficients'], {"0": "1", "1": "-24", "2": "-196632"})

    def test_expand_form_component(self):
        """Â の次数4成分"""
        code, out, _ = self.run_cli("expand", "Ahat", "--context", "D12", "--degree", "4")
        self.assertEqual(code, 0)
        self.assertEqual(out, "-1/24 s1\n")

    def test_expand_pontryagin(self):
        """ポントリャーギン類での表示"""
        code, out, _ = self.run_cli("expand", "Ahat", "--degree", "4", "--pontryagin")
        self.assertEqual(code, 0)
        self.assertEqual(out, "-1/24 p1\n")

    def test_expand_unknown_name(self):
        """未登録の名前は終了コード 2 と登録一覧"""
        code, out, err = self.run_cli("expand", "E10")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("未登録の名前です", err)
        self.assertIn("delta1", err)


class TestFitCommand(CLITestCase):
    """fit のテスト"""

    def test_fit_pass(self):
        """E4² は重さ8の SL2Z 形式"""
        code, out, _ = self.run_cli("fit", "E4^2", "SL2Z", "8", "--q-order", "3")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines(), [
            "fit E4^2 over SL2Z weight 8 through q^3",
            "  E4^2: 1",
            "residuals:",
            "  q^1: 0",
            "  q^2: 0",
            "  q^3: 0",
            "status: PASS (certified through q^3)",
        ])

    def test_fit_failure_exit_code(self):
        """残差があれば終了コード 1"""
        code, out, _ = self.run_cli("fit", "E6", "SL2Z", "14", "--q-order", "3")
        self.assertEqual(code, 1)
        self.assertIn("status: FAIL (first residual at q^1)", out)

    def test_fit_json(self):
        """レベル2のあてはめの JSON"""
        code, out, _ = self.run_cli("fit", "E4", "GAMMA_UP0_2", "4", "--q-order", "2",
                                    "--format", "json")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual([b['coefficient'] for b in payload['basis']], ["1", "-48"])
        self.assertEqual(payload['fit_orders'], ["0", "1/2"])
        self.assertTrue(payload['passed'])

    def test_fit_unknown_group(self):
        """未登録の群"""
        code, _, err = self.run_cli("fit", "E4", "GAMMA1_4", "4")
        self.assertEqual(code, 2)
        self.assertIn("GAMMA0_2", err)


class TestVerifyCommand(CLITestCase):
    """verify のテスト"""

    def test_verify_corollaries(self):
        """3.x 系列の系はすべて PASS"""
        code, out, _ = self.run_cli("verify", "C3.*", "--q-order", "1")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith("C3.4 PASS (exact identity)"))
        self.assertIn("  constant 2240: expected 2240, computed 2240 ok", lines)
        self.assertEqual(lines[-1],
                         "summary: PASS 3, FAIL 0, CONVENTION_DEPENDENT 0, total 3")

    def test_verify_json(self):
        """JSON 出力"""
        code, out, _ = self.run_cli("verify", "C3.7", "--q-order", "1", "--format", "json")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(len(payload), 1)
        self.assertEqual(payload[0]['theorem'], "C3.7")
        self.assertEqual(payload[0]['status'], "PASS")

    def test_verify_json_round_trip(self):
        """JSON 出力は読み直して書き直しても同じバイト列"""
        code, out, _ = self.run_cli("verify", "C3.7", "--q-order", "1", "--format", "json")
        self.assertEqual(code, 0)
        self.assertEqual(_to_json(json.loads(out)), out)

    def test_verify_convention_flag(self):
        """--convention TRIVIAL では 2.x 系列の系が FAIL"""
        code, out, _ = self.run_cli("verify", "C2.10", "--q-order", "2",
                                    "--convention", "TRIVIAL")
        self.assertEqual(code, 1)
        self.assertTrue(out.startswith("C2.10 FAIL [convention TRIVIAL; passing: none]"))

    def test_verify_unknown_id(self):
        """未登録の id は終了コード 2"""
        code, _, err = self.run_cli("verify", "T9.9")
        self.assertEqual(code, 2)
        self.assertIn("T2.3", err)

    def test_timings(self):
        """--timings で経過時間が付く"""
        code, out, _ = self.run_cli("verify", "C3.7", "--q-order", "1", "--timings")
        self.assertEqual(code, 0)
        self.assertRegex(out.splitlines()[0], r" \d+ ms$")


class TestCheckTransformsCommand(CLITestCase):
    """check-transforms のテスト"""

    def test_single_law(self):
        """E4 の S 変換"""
        code, out, _ = self.run_cli("check-transforms", "--law", "E4_S", "--tau", "2i")
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("E4_S"))
        self.assertIn("tau samples: 0+2i", out)

    def test_json_rows(self):
        """JSON の行"""
        code, out, _ = self.run_cli("check-transforms", "--law", "theta_T", "--law", "delta_S",
                                    "--format", "json")
        self.assertEqual(code, 0)
        rows = json.loads(out)
        self.assertEqual([row['law'] for row in rows], ["theta_T", "delta_S"])
        self.assertTrue(all(row['passed'] for row in rows))

    def test_json_round_trip(self):
        """数値の行を含む JSON も読み直して同じバイト列に戻る"""
        code, out, _ = self.run_cli("check-transforms", "--law", "E4_S", "--law", "theta_T",
                                    "--format", "json")
        self.assertEqual(code, 0)
        self.assertEqual(_to_json(json.loads(out)), out)

    def test_strict_tolerance_partial_failures(self):
        """許容誤差 1e-15 では丸め誤差の大きい変換則だけが FAIL になり、終了コード 1"""
        code, out, _ = self.run_cli("check-transforms", "--tolerance", "1e-15",
                                    "--format", "json")
        self.assertEqual(code, 1)
        rows = json.loads(out)
        failing = [row['law'] for row in rows if not row['passed']]
        passing = [row['law'] for row in rows if row['passed']]
        self.assertIn("E4_S", failing)
        self.assertTrue(passing)
        for row in rows:
            with self.subTest(law=row['law']):
                self.assertLess(row['max_tail_bound'], 1e-15)
                self.assertEqual(row['passed'], row['max_residual'] < 1e-15)

    def test_tail_bound_refused(self):
        """Im τ が小さすぎる標本点は終了コード 2"""
        code, _, err = self.run_cli("check-transforms", "--law", "E4_S", "--tau", "0.1i")
        self.assertEqual(code, 2)
        self.assertIn("💡", err)


class TestArgumentErrors(CLITestCase):
    """引数の誤りのテスト"""

    def test_off_grid_order(self):
        """1/24 の格子外の次数"""
        code, _, err = self.run_cli("expand", "E4", "--q-order", "1/5")
        self.assertEqual(code, 2)
        self.assertIn("invalid argument", err)

    def test_malformed_order(self):
        """数でない次数"""
        code, _, _ = self.run_cli("expand", "E4", "--q-order", "six")
        self.assertEqual(code, 2)

    def test_unknown_subcommand(self):
        """未知のサブコマンド"""
        code, _, _ = self.run_cli("plot", "E4")
        self.assertEqual(code, 2)

    def test_parser_defaults(self):
        """verify のパターンの既定値は *"""
        args = build_parser().parse_args(["verify"])
        self.assertEqual(args.pattern, "*")
        self.assertEqual(args.q_order, "6")


class TestRunConfig(unittest.TestCase):
    """RunConfig の検証のテスト"""

    def test_defaults(self):
        """既定値"""
        config = RunConfig()
        self.assertEqual(config.q_order, Fraction(6))
        self.assertEqual(config.output_format, 'text')

    def test_normalization(self):
        """規約と twist は大文字に正規化"""
        config = RunConfig(convention="real2", twist="spin_q2")
        self.assertEqual(config.convention, "REAL2")
        self.assertEqual(config.twist, "SPIN_Q2")

    def test_invalid_values(self):
        """不正な値は ValueError"""
        with self.assertRaises(ValueError):
            RunConfig(tolerance=0)
        with self.assertRaises(ValueError):
            RunConfig(output_format='xml')
        with self.assertRaises(ValueError):
            RunConfig(q_order=Fraction(1, 5))
        with self.assertRaises(ValueError):
            RunConfig(degree_cap=-2)


class TestReportOutput(CLITestCase):
    """レポートの書き込みのテスト"""

    def test_out_flag(self):
        """--out のファイルに stdout と同じ内容が書かれる"""
        target = os.path.join(self.temp_dir, "reports", "delta1.txt")
        code, out, _ = self.run_cli("expand", "delta1", "--q-order", "2", "--out", target)
        self.assertEqual(code, 0)
        self.assertEqual(Path(target).read_text(encoding='utf-8'), out)

    def test_environment_directory(self):
        """E8_ANOMALY_OUTPUT_DIR に命名規則どおりのファイルが書かれる"""
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: self.temp_dir}):
            code, out, _ = self.run_cli("verify", "C3.7", "--q-order", "1", "--format", "json")
        self.assertEqual(code, 0)
        report = Path(self.temp_dir) / "verify_C3.7_report.json"
        self.assertTrue(report.exists())
        self.assertEqual(report.read_text(encoding='utf-8'), out)

    def test_emit_without_destination(self):
        """出力先がなければファイルは書かない"""
        checker = AnomalyFormulaChecker()
        config = RunConfig(q_order=2)
        result = checker.cmd_expand("delta1", config)
        with redirect_stdout(io.StringIO()):
            self.assertIsNone(checker.emit(result, config))
        self.assertEqual(result.payload['value'], "1/4 + 6 q + 6 q^2")


if __name__ == '__main__':
    unittest.main(verbosity=2)

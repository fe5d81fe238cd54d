#!/usr/bin/env python3
"""
E8 アノマリー相殺公式チェッカー
名前付き級数・特性形式の展開、モジュラー形式へのあてはめ、
定理の検証、テータ関数の変換則の数値確認を行うコマンドラインツール
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Dict, Any, List, Tuple, Union

from charforms import (
    FORM_OBJECT_NAMES,
    LineConvention,
    Twist,
    context_names,
    form_object,
    manifold_context,
    pontryagin_form,
    pontryagin_ring,
)
from engine_error_handler import (
    EngineError,
    EngineErrorHandler,
    EngineErrorType,
    NumericPrecisionError,
    RingContextError,
    UnknownNameError,
)
from graded_ring import GradedPoly, format_rational, to_rational
from modforms import (
    DEFAULT_NUMERIC_ORDER,
    DEFAULT_TAU_SAMPLES,
    DEFAULT_TOLERANCE,
    check_transformation_numeric,
    law_names,
    named_series,
    parse_tau,
    series_names,
)
from qseries import QSeries, render_series, to_ticks
from report_path_generator import ReportPathGenerator
from verifier import (
    SERIES_VARIANTS,
    CheckStatus,
    ModularFitResult,
    TheoremReport,
    build_q,
    fit_series,
    parse_group,
    run_suite,
    select_theorems,
)


LIBRARY_LOGGERS = ('ModularForms', 'CharacteristicForms', 'TheoremVerifier')
OUTPUT_FORMATS = ('text', 'json')
DEFAULT_CONTEXT = "D12"


@dataclass
class RunConfig:
    """コマンド共通の設定（フラグのみ、設定ファイルなし）"""
    q_order: Fraction = Fraction(6)
    degree_cap: Optional[int] = None
    convention: Optional[str] = None
    output_format: str = 'text'
    tau_samples: Tuple[complex, ...] = DEFAULT_TAU_SAMPLES
    tolerance: float = DEFAULT_TOLERANCE
    numeric_order: Fraction = Fraction(DEFAULT_NUMERIC_ORDER)
    context: Optional[str] = None
    twist: Optional[str] = None
    out: Optional[str] = None
    max_workers: Optional[int] = None
    use_threading: bool = False
    timings: bool = False
    debug: bool = False

    def __post_init__(self) -> None:
        self.q_order = to_rational(self.q_order)
        self.numeric_order = to_rational(self.numeric_order)
        # 1/24 の格子外なら SeriesTruncationError
        to_ticks(self.q_order)
        to_ticks(self.numeric_order)
        if self.q_order < 0:
            raise RingContextError(f"q order must be non-negative, got {self.q_order}",
                                   EngineErrorType.UNSUPPORTED_ARGUMENT)
        if not self.tolerance > 0:
            raise RingContextError(f"tolerance must be positive, got {self.tolerance}",
                                   EngineErrorType.UNSUPPORTED_ARGUMENT)
        if self.output_format not in OUTPUT_FORMATS:
            raise RingContextError(f"unknown output format '{self.output_format}'",
                                   EngineErrorType.UNSUPPORTED_ARGUMENT)
        if self.convention is not None:
            self.convention = LineConvention(self.convention.upper()).value
        if self.twist is not None:
            self.twist = Twist(self.twist.upper()).value
        if self.degree_cap is not None and self.degree_cap < 0:
            raise RingContextError(f"degree cap must be non-negative, got {self.degree_cap}",
                                   EngineErrorType.DEGREE_VIOLATION)


@dataclass
class CommandResult:
    """サブコマンドの出力（stdout の内容と終了コード）"""
    command: str
    target: str
    exit_code: int
    text: str
    payload: Any = None
    extra: Dict[str, Any] = field(default_factory=dict)


def _render_value(value: Union[GradedPoly, QSeries, Fraction]) -> str:
    if isinstance(value, QSeries):
        return render_series(value)
    if isinstance(value, GradedPoly):
        return value.render()
    return format_rational(value)


def _render_tau(tau: complex) -> str:
    return f"{tau.real:g}{tau.imag:+g}i"


def _to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


class AnomalyFormulaChecker:
    """チェッカーの窓口クラス"""

    def __init__(self, debug: bool = False):
        """初期化

        Args:
            debug: デバッグモードの有効/無効
        """
        self.debug = debug
        self.logger = self._setup_logger()
        self.error_handler = EngineErrorHandler(debug=debug)
        if debug:
            self._enable_library_debug()

    def _setup_logger(self) -> logging.Logger:
        """ロガーのセットアップ

        Returns:
            設定済みロガー
        """
        logger = logging.getLogger('AnomalyFormulaChecker')
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        logger.setLevel(logging.DEBUG if self.debug else logging.INFO)
        return logger

    def _enable_library_debug(self) -> None:
        """計算モジュールのロガーを DEBUG にする（出力先は stderr）"""
        for name in LIBRARY_LOGGERS:
            library_logger = logging.getLogger(name)
            if not library_logger.handlers:
                handler = logging.StreamHandler()
                handler.setFormatter(logging.Formatter(
                    '%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
                library_logger.addHandler(handler)
            library_logger.setLevel(logging.DEBUG)

    # expand

    def resolve_object(self, name: str, config: RunConfig) -> Union[GradedPoly, QSeries]:
        """名前を級数・特性形式・Q 級数の登録から探して展開

        Raises:
            UnknownNameError: どの登録にもない名前
        """
        if name in series_names():
            return named_series(name, config.q_order)
        if name in FORM_OBJECT_NAMES:
            ctx = manifold_context(config.context or DEFAULT_CONTEXT)
            return form_object(ctx, name, config.q_order, config.convention, config.twist)
        if name in SERIES_VARIANTS:
            return build_q(name, config.q_order, config.convention)
        registry = series_names() + list(FORM_OBJECT_NAMES) + list(SERIES_VARIANTS)
        raise UnknownNameError(f"unknown object name '{name}'", EngineErrorType.UNKNOWN_NAME,
                               {'registry': registry})

    def cmd_expand(self, name: str, config: RunConfig, degree: Optional[int] = None,
                   pontryagin: bool = False) -> CommandResult:
        """名前付きの対象を展開して正準表示する

        Args:
            name: 級数名（E4^2*E6 など）、特性形式名（Ahat など）または Q 級数の種類
            config: 実行設定（--context, --degree-cap, --convention, --twist を含む）
            degree: 指定すれば斉次成分のみ
            pontryagin: 冪和 s_k をポントリャーギン類 p_k で書き直すか
        """
        value = self.resolve_object(name, config)
        uses_forms = not (isinstance(value, QSeries) and value.ring is None)

        def present(poly: GradedPoly) -> GradedPoly:
            if degree is not None:
                poly = poly.component(degree)
            if config.degree_cap is not None:
                poly = poly.truncate_degree(config.degree_cap)
            return poly

        if uses_forms:
            ctx_name = config.context or DEFAULT_CONTEXT
            if name in SERIES_VARIANTS:
                ctx_name = SERIES_VARIANTS[name].context_name
            if isinstance(value, QSeries):
                value = value.map_coefficients(present)
            else:
                value = present(value)
            if pontryagin:
                ctx = manifold_context(ctx_name)
                target = pontryagin_ring(ctx)
                if isinstance(value, QSeries):
                    value = value.map_coefficients(lambda p: pontryagin_form(ctx, p), target)
                else:
                    value = pontryagin_form(ctx, value)

        rendered = _render_value(value)
        self.logger.debug(f"expand {name}: {len(rendered)} characters")
        payload = {'name': name, 'q_order': format_rational(config.q_order), 'value': rendered}
        if isinstance(value, QSeries):
            payload['coefficients'] = {format_rational(e): _render_value(c)
                                       for e, c in value.coefficients.items()}
        text = _to_json(payload) if config.output_format == 'json' else rendered + "\n"
        return CommandResult('expand', name, 0, text, payload)

    # fit

    def cmd_fit(self, series_name: str, group_name: str, weight: int,
                config: RunConfig) -> CommandResult:
        """級数をモジュラー形式の基底にあてはめ、残差がすべて 0 なら終了コード 0"""
        group = parse_group(group_name)
        if series_name in SERIES_VARIANTS:
            series = build_q(series_name, config.q_order, config.convention, top_component=True)
        elif series_name in series_names():
            series = named_series(series_name, config.q_order)
        else:
            raise UnknownNameError(f"unknown series name '{series_name}'",
                                   EngineErrorType.UNKNOWN_NAME,
                                   {'registry': series_names() + list(SERIES_VARIANTS)})
        fit = fit_series(series, group, weight)
        payload = self._fit_payload(series_name, fit, config)
        if config.output_format == 'json':
            text = _to_json(payload)
        else:
            text = self._fit_text(series_name, fit, config)
        return CommandResult('fit', series_name, 0 if fit.passed else 1, text, payload)

    def _fit_payload(self, series_name: str, fit: ModularFitResult,
                     config: RunConfig) -> Dict[str, Any]:
        return {
            'series': series_name,
            'group': fit.group.value,
            'weight': fit.weight,
            'q_order': format_rational(config.q_order),
            'basis': [{'name': name, 'coefficient': _render_value(c)}
                      for name, c in zip(fit.basis, fit.coefficients)],
            'fit_orders': [format_rational(e) for e in fit.fit_orders],
            'residuals': {format_rational(e): _render_value(v)
                          for e, v in fit.residuals.items()},
            'passed': fit.passed,
        }

    def _fit_text(self, series_name: str, fit: ModularFitResult, config: RunConfig) -> str:
        lines = [f"fit {series_name} over {fit.group.value} weight {fit.weight} "
                 f"through q^{format_rational(config.q_order)}"]
        for name, coefficient in zip(fit.basis, fit.coefficients):
            lines.append(f"  {name}: {_render_value(coefficient)}")
        lines.append("residuals:")
        for exponent, value in fit.residuals.items():
            lines.append(f"  q^{format_rational(exponent)}: {_render_value(value)}")
        if fit.passed:
            lines.append(f"status: PASS (certified through "
                         f"q^{format_rational(fit.certified_through)})")
        else:
            lines.append(f"status: FAIL (first residual at "
                         f"q^{format_rational(fit.first_failure)})")
        return "\n".join(lines) + "\n"

    # verify

    def cmd_verify(self, pattern: str, config: RunConfig) -> CommandResult:
        """パターンに一致する定理・系を検証し、FAIL がなければ終了コード 0

        Raises:
            UnknownNameError: ワイルドカードを含まないパターンが何にも一致しない場合
        """
        selected = select_theorems(pattern)
        if not selected and not any(ch in pattern for ch in "*?["):
            raise UnknownNameError(f"unknown theorem id '{pattern}'",
                                   EngineErrorType.UNKNOWN_NAME,
                                   {'registry': select_theorems("*")})
        reports, summary = run_suite(pattern, config.q_order, config.convention,
                                     max_workers=config.max_workers,
                                     use_threading=config.use_threading)
        payload = [report.to_dict(include_timings=config.timings) for report in reports]
        if config.output_format == 'json':
            text = _to_json(payload)
        else:
            text = self._verify_text(reports, summary, config)
        exit_code = 1 if summary[CheckStatus.FAIL.value] else 0
        self.logger.debug(f"verify {pattern}: {summary}")
        return CommandResult('verify', pattern, exit_code, text, payload, {'summary': summary})

    def _verify_text(self, reports: List[TheoremReport], summary: Dict[str, int],
                     config: RunConfig) -> str:
        lines = []
        for report in reports:
            header = f"{report.theorem_id} {report.status.value}"
            if report.convention is not None:
                passing = ", ".join(c.value for c in report.passing_conventions) or "none"
                header += f" [convention {report.convention.value}; passing: {passing}]"
            header += f" ({report.certification})"
            if config.timings:
                header += f" {report.ms} ms"
            lines.append(header)
            lines.append(f"  lhs: {report.lhs.render()}")
            lines.append(f"  rhs: {report.rhs.render()}")
            lines.append(f"  difference: {report.difference.render()}")
            for check in report.constants_checked:
                mark = "ok" if check.matches else "MISMATCH"
                lines.append(f"  constant {check.name}: expected "
                             f"{format_rational(check.expected)}, computed "
                             f"{format_rational(check.computed)} {mark}")
            for name in report.failing_side_checks():
                lines.append(f"  side check {name}: {_render_value(report.side_checks[name])}")
            failing = [e for e, v in report.residuals.items()
                       if not (v.is_zero() if isinstance(v, GradedPoly) else v == 0)]
            for exponent in failing:
                lines.append(f"  residual q^{format_rational(exponent)}: "
                             f"{_render_value(report.residuals[exponent])}")
        lines.append(
            f"summary: PASS {summary[CheckStatus.PASS.value]}, "
            f"FAIL {summary[CheckStatus.FAIL.value]}, "
            f"CONVENTION_DEPENDENT {summary[CheckStatus.CONVENTION_DEPENDENT.value]}, "
            f"total {summary['total']}")
        return "\n".join(lines) + "\n"

    # check-transforms

    def cmd_check_transforms(self, config: RunConfig,
                             laws: Optional[List[str]] = None) -> CommandResult:
        """登録された変換則を τ の標本点で数値確認（最大残差を変換則ごとに表示）

        Raises:
            NumericPrecisionError: 打ち切り誤差の上界が許容誤差を超える標本点がある場合
            UnknownNameError: 未登録の変換則
        """
        selected = laws or law_names()
        rows = []
        for law_id in selected:
            checks = [check_transformation_numeric(law_id, tau, config.numeric_order,
                                                   config.tolerance)
                      for tau in config.tau_samples]
            worst = max(checks, key=lambda c: c.residual)
            rows.append({
                'law': law_id,
                'max_residual': worst.residual,
                'max_tail_bound': max(c.tail_bound for c in checks),
                'worst_tau': _render_tau(worst.tau),
                'passed': all(c.passed for c in checks),
            })
        passed = all(row['passed'] for row in rows)
        if config.output_format == 'json':
            text = _to_json(rows)
        else:
            lines = [f"{row['law']:<14} max residual {row['max_residual']:.3e} "
                     f"(tau={row['worst_tau']}, tail bound {row['max_tail_bound']:.3e}) "
                     f"{'ok' if row['passed'] else 'FAIL'}" for row in rows]
            samples = ", ".join(_render_tau(t) for t in config.tau_samples)
            lines.append(f"tau samples: {samples}; tolerance {config.tolerance:.1e}; "
                         f"order q^{format_rational(config.numeric_order)}")
            text = "\n".join(lines) + "\n"
        return CommandResult('check-transforms', 'laws', 0 if passed else 1, text, rows)

    # 出力

    def emit(self, result: CommandResult, config: RunConfig,
             path_generator: Optional[ReportPathGenerator] = None) -> Optional[str]:
        """stdout へ出力し、--out または E8_ANOMALY_OUTPUT_DIR があればファイルにも書く

        Returns:
            書き込んだレポートのパス（なければ None）
        """
        sys.stdout.write(result.text)
        path_generator = path_generator or ReportPathGenerator(debug=self.debug)
        if config.out:
            return path_generator.write_report(config.out, result.text)
        output_dir = path_generator.environment_output_dir()
        if output_dir:
            path = path_generator.generate_report_path(result.command, result.target,
                                                       config.output_format, output_dir)
            return path_generator.write_report(path, result.text)
        return None


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--q-order', default='6',
                        help='q-series truncation order, a multiple of 1/24 (default: 6)')
    parser.add_argument('--degree-cap', type=int,
                        help='Drop form components above this degree from the rendering')
    parser.add_argument('--convention', choices=[c.value for c in LineConvention],
                        help='Line bundle convention for spin^c checks (default: resolve)')
    parser.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS,
                        default='text', help='Output format (default: text)')
    parser.add_argument('--out', help='Also write the report to this file')
    parser.add_argument('--max-workers', type=int,
                        help='Number of parallel workers for verify (default: sequential)')
    parser.add_argument('--use-threading', action='store_true',
                        help='Use threads instead of processes for parallel verify')
    parser.add_argument('--timings', action='store_true',
                        help='Report elapsed milliseconds per check')
    parser.add_argument('--debug', action='store_true', help='Enable debug output')


def build_parser() -> argparse.ArgumentParser:
    """コマンドライン引数のパーサー"""
    parser = argparse.ArgumentParser(
        prog='e8-anomaly-checker',
        description='Exact verification of E8 anomaly cancellation formulas',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  Expansions:
    %(prog)s expand "E4^2*E6" --q-order 2
    %(prog)s expand delta1 --q-order 2
    %(prog)s expand Ahat --context D12 --degree 4
    %(prog)s expand Ahat --context D12 --degree 8 --pontryagin

  Fits:
    %(prog)s fit Q2_12 GAMMA_UP0_2 14 --q-order 3
    %(prog)s fit E4^2 SL2Z 8

  Verification:
    %(prog)s verify "*"
    %(prog)s verify "3.*" --format json --out reports/section3.json
    %(prog)s verify T2.3 --convention REAL2

  Numeric transformation laws:
    %(prog)s check-transforms --tau 2i --tau 1/2+2i --tolerance 1e-9
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    expand = subparsers.add_parser('expand', help='Expand a named series or characteristic form')
    expand.add_argument('name', help='Series, form object or Q-series variant name')
    expand.add_argument('--context', choices=context_names(),
                        help=f'Manifold context for form objects (default: {DEFAULT_CONTEXT})')
    expand.add_argument('--degree', type=int, help='Show only this homogeneous component')
    expand.add_argument('--pontryagin', action='store_true',
                        help='Rewrite power sums s_k in Pontryagin classes p_k')
    expand.add_argument('--twist', choices=[t.value for t in Twist],
                        help='Witten bundle for Q_theta / Q_direct')
    _add_common_arguments(expand)

    fit = subparsers.add_parser('fit', help='Fit a series to a modular form basis')
    fit.add_argument('series', help='Named series or Q-series variant')
    fit.add_argument('group', help='SL2Z, GAMMA0_2 or GAMMA_UP0_2')
    fit.add_argument('weight', type=int, help='Modular weight')
    _add_common_arguments(fit)

    verify = subparsers.add_parser('verify', help='Verify theorems and corollaries')
    verify.add_argument('pattern', nargs='?', default='*',
                        help='Theorem id or pattern (e.g. T3.3, "2.*", "*")')
    _add_common_arguments(verify)

    transforms = subparsers.add_parser('check-transforms',
                                       help='Numerically check transformation laws')
    transforms.add_argument('--tau', action='append',
                            help='Sample point such as 2i or 1/2+2i (repeatable)')
    transforms.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE,
                            help=f'Residual tolerance (default: {DEFAULT_TOLERANCE})')
    transforms.add_argument('--numeric-order', default=str(DEFAULT_NUMERIC_ORDER),
                            help=f'q-order for numeric evaluation (default: {DEFAULT_NUMERIC_ORDER})')
    transforms.add_argument('--law', action='append', choices=law_names(),
                            help='Restrict to this law (repeatable)')
    _add_common_arguments(transforms)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """引数から RunConfig を組み立てる

    Raises:
        ValueError: q-order や τ の書式が不正な場合
    """
    tau_samples = tuple(parse_tau(t) for t in args.tau) if getattr(args, 'tau', None) \
        else DEFAULT_TAU_SAMPLES
    return RunConfig(
        q_order=Fraction(args.q_order),
        degree_cap=args.degree_cap,
        convention=args.convention,
        output_format=args.output_format,
        tau_samples=tau_samples,
        tolerance=getattr(args, 'tolerance', DEFAULT_TOLERANCE),
        numeric_order=Fraction(getattr(args, 'numeric_order', str(DEFAULT_NUMERIC_ORDER))),
        context=getattr(args, 'context', None),
        twist=getattr(args, 'twist', None),
        out=args.out,
        max_workers=args.max_workers,
        use_threading=args.use_threading,
        timings=args.timings,
        debug=args.debug,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """メイン関数

    Returns:
        終了コード（0: 成功、1: 検証失敗、2: 使い方の誤り）
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    handler = EngineErrorHandler(debug=args.debug)
    try:
        config = config_from_args(args)
    except (ValueError, ZeroDivisionError) as e:
        print(f"Error: invalid argument: {e}", file=sys.stderr)
        return 2

    checker = AnomalyFormulaChecker(debug=config.debug)
    try:
        if args.command == 'expand':
            result = checker.cmd_expand(args.name, config, degree=args.degree,
                                        pontryagin=args.pontryagin)
        elif args.command == 'fit':
            result = checker.cmd_fit(args.series, args.group, args.weight, config)
        elif args.command == 'verify':
            result = checker.cmd_verify(args.pattern, config)
        else:
            result = checker.cmd_check_transforms(config, args.law)
        checker.emit(result, config)
        return result.exit_code

    except UnknownNameError as e:
        error_type, _, details = handler.analyze_exception(e)
        print(handler.get_user_friendly_message(error_type, details), file=sys.stderr)
        return 2
    except NumericPrecisionError as e:
        error_type, _, details = handler.analyze_exception(e)
        print(handler.get_user_friendly_message(error_type, details), file=sys.stderr)
        for suggestion in handler.get_recovery_suggestions(error_type):
            print(f"💡 {suggestion}", file=sys.stderr)
        return 2
    except EngineError as e:
        error_type, _, details = handler.analyze_exception(e)
        print(handler.get_user_friendly_message(error_type, details), file=sys.stderr)
        if config.debug:
            checker.logger.debug(f"Error report: {handler.create_error_report(e)}")
        return 1
    except (OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())

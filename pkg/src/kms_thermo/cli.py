"""kms-thermo コマンドライン.

レポートはJSON（--format text で key: value 形式）を標準出力へ、要約を標準エラーへ書く。
終了コード: 0 成功、1 検証失敗（欠損が許容誤差超え）、2 入力エラー。
"""

import argparse
import json
import logging
import sys
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence

from .tools.session import CircleCheck, OctafoldCheck, ThermoSession

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def report_schema(command: str) -> Dict[str, Any]:
    """サブコマンドのレポートの JSON Schema（パッケージ同梱）."""
    text = resources.files("kms_thermo").joinpath("schemas", f"{command}.json").read_text(encoding="utf-8")
    schema: Dict[str, Any] = json.loads(text)
    return schema


def _beta_arg(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"数値または 'auto' を指定してください: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kms-thermo",
        description="Hausdorff次元・固有測度・KMS状態の数値検証",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("--format", choices=["json", "text"], default="json", help="レポート形式")
    parser.add_argument("--verbose", action="store_true", help="INFO レベルのログを出す")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_model(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True, help="モデルJSONのパスまたはカタログ名")
        return p

    with_model("dimension", "Hausdorff次元 β を求める")

    p = with_model("measure", "シリンダー質量の表")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--beta", type=_beta_arg, default=None, help="数値または auto")

    p = with_model("quasi-invariance", "準不変性欠損の表（β ± 0.5 の対照つき）")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--beta", type=_beta_arg, default=None, help="数値または auto")
    p.add_argument("--tol", type=float, default=None)

    p = with_model("kms-check", "KMS 条件の網羅的検証")
    p.add_argument("--beta", type=_beta_arg, default=None, help="数値または auto")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)

    with_model("entropy", "位相エントロピー")

    p = with_model("metric", "距離 ρ_f と局所スケーリング比")
    p.add_argument("--x", required=True, help="点 '前周期(周期)'")
    p.add_argument("--y", required=True, help="点 '前周期(周期)'")

    p = sub.add_parser("circle", help="円周の拡大被覆写像")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--f", help="重み f(t) の式")
    source.add_argument("--model", help="円周モデルのパスまたはカタログ名")
    p.add_argument("--check", choices=[c.value for c in CircleCheck], required=True)
    p.add_argument("--sections", type=int, default=20, help="準不変性の乱択区間数")

    p = sub.add_parser("octafold", help="Sierpinski オクタフォールド")
    p.add_argument("--check", choices=[c.value for c in OctafoldCheck], required=True)

    p = sub.add_parser("catalog", help="同梱モデルの一覧")
    p.add_argument("--export", metavar="DIR", default=None, help="正規JSONを書き出すディレクトリ")
    return parser


def _dispatch(session: ThermoSession, args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "catalog":
        return session.catalog(args.export)
    if args.command == "octafold":
        return session.octafold_check(args.check)
    if args.command == "circle" and args.f is not None:
        return session.circle_check(args.check, f=args.f, sections=args.sections)

    loaded = session.load_model(args.model)
    if not loaded["success"]:
        return loaded
    model_id = loaded["data"]["id"]

    if args.command == "dimension":
        return session.dimension(model_id)
    elif args.command == "measure":
        return session.measure(model_id, args.depth, args.beta)
    elif args.command == "quasi-invariance":
        return session.quasi_invariance(model_id, args.depth, args.beta, args.tol)
    elif args.command == "kms-check":
        return session.kms_check(model_id, args.beta, args.depth, args.tol)
    elif args.command == "entropy":
        return session.entropy(model_id)
    elif args.command == "metric":
        return session.metric(model_id, args.x, args.y)
    elif args.command == "circle":
        return session.circle_check(args.check, model_id=model_id, sections=args.sections)
    return {"success": False, "message": f"❌ 未知のサブコマンド: {args.command}"}


def _format_text(data: Dict[str, Any], prefix: str = "") -> List[str]:
    lines: List[str] = []
    for key, value in data.items():
        if isinstance(value, dict):
            lines.extend(_format_text(value, f"{prefix}{key}."))
        else:
            lines.append(f"{prefix}{key}: {value}")
    return lines


def run(argv: Optional[Sequence[str]] = None) -> int:
    """引数を解析して実行し、終了コードを返す."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    logger.info(f"Running subcommand {args.command}")
    result = _dispatch(ThermoSession(), args)
    print(result["message"], file=sys.stderr)
    if not result["success"]:
        return EXIT_INPUT

    data = result["data"]
    if args.format == "json":
        print(json.dumps(data, ensure_ascii=False, indent=2, default=str))
    else:
        print("\n".join(_format_text(data)))
    if data.get("passed") is False:
        return EXIT_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

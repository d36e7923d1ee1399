"""Tests for the kms-thermo command line."""

import json
import math

import jsonschema
import pytest

from kms_thermo.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, build_parser, report_schema, run


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


class TestCli:
    """コマンドラインのテストクラス"""

    def test_dimension(self, capsys):
        """dimension サブコマンドのテスト"""
        code, data = run_json(capsys, ["dimension", "--model", "cuntz_gasket"])
        assert code == EXIT_OK
        assert data["beta"] == pytest.approx(1.5849625007, abs=1e-10)

    def test_kms_check(self, capsys):
        """kms-check が成功するテスト"""
        code, data = run_json(capsys, ["kms-check", "--model", "o2_equal", "--beta", "auto"])
        assert code == EXIT_OK
        assert data["passed"] is True

    def test_kms_check_fails(self, capsys):
        """β = 2 では終了コード1になるテスト"""
        code, data = run_json(capsys, ["kms-check", "--model", "o2_equal", "--beta", "2", "--depth", "2"])
        assert code == EXIT_FAILED
        assert data["passed"] is False

    def test_quasi_invariance(self, capsys):
        """quasi-invariance サブコマンドのテスト"""
        code, data = run_json(capsys, ["quasi-invariance", "--model", "o3_ratios", "--depth", "2"])
        assert code == EXIT_OK
        assert len(data["defects"]) == 3 + 9

    def test_measure_from_file(self, capsys, tmp_path):
        """モデルファイルを指定した measure のテスト"""
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"kind": "cuntz", "potential": {"ratios": [0.5, 0.5]}}), encoding="utf-8")
        code, data = run_json(capsys, ["measure", "--model", str(path), "--depth", "1"])
        assert code == EXIT_OK
        assert data["masses"] == pytest.approx({"1": 0.5, "2": 0.5})

    def test_malformed_model(self, capsys, tmp_path):
        """不正なモデルファイルで終了コード2になるテスト"""
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        assert run(["dimension", "--model", str(path)]) == EXIT_INPUT
        assert "broken.json:1:" in capsys.readouterr().err

    def test_bad_arguments(self, capsys):
        """引数エラーで終了コード2になるテスト"""
        assert run(["dimension"]) == EXIT_INPUT
        assert run(["no-such-command"]) == EXIT_INPUT
        assert run(["kms-check", "--model", "o2_equal", "--beta", "hot"]) == EXIT_INPUT

    def test_text_format(self, capsys):
        """--format text の出力のテスト"""
        assert run(["--format", "text", "entropy", "--model", "o2_equal"]) == EXIT_OK
        out = capsys.readouterr().out
        assert f"entropy: {math.log(2)!r}" in out
        assert "method: adjacency" in out

    def test_metric(self, capsys):
        """metric サブコマンドのテスト"""
        code, data = run_json(capsys, ["metric", "--model", "o2_equal", "--x", "12(1)", "--y", "11(2)"])
        assert code == EXIT_OK
        assert data["distance"] == pytest.approx(0.5)

    def test_circle(self, capsys):
        """circle サブコマンドのテスト"""
        code, data = run_json(capsys, ["circle", "--f", "3", "--check", "entropy"])
        assert code == EXIT_OK
        assert data["degree"] == 3

    def test_octafold(self, capsys):
        """octafold サブコマンドのテスト"""
        code, data = run_json(capsys, ["octafold", "--check", "midpoints"])
        assert code == EXIT_OK
        assert len(data["midpoints"]) == 12

    def test_catalog_export(self, capsys, tmp_path):
        """catalog --export のテスト"""
        code, data = run_json(capsys, ["catalog", "--export", str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / "octafold.json").is_file()
        assert len(data["models"]) == 8


class TestReportSchemas:
    """レポートの JSON Schema のテストクラス"""

    @pytest.mark.parametrize("argv", [
        ["dimension", "--model", "graph_two_vertex"],
        ["dimension", "--model", "o2_generalized"],
        ["dimension", "--model", "circle_sine"],
        ["measure", "--model", "o2_generalized", "--depth", "2"],
        ["quasi-invariance", "--model", "o2_equal", "--depth", "2"],
        ["kms-check", "--model", "o2_equal", "--depth", "2"],
        ["entropy", "--model", "o2_equal"],
        ["entropy", "--model", "circle_f3"],
        ["metric", "--model", "o2_generalized", "--x", "1(2)", "--y", "2(1)"],
        ["circle", "--model", "circle_f3", "--check", "entropy"],
        ["circle", "--model", "circle_sine", "--check", "scaling"],
        ["octafold", "--check", "dimension"],
        ["octafold", "--check", "scaling"],
        ["catalog"],
    ])
    def test_report_validates(self, capsys, argv):
        """各サブコマンドのレポートが同梱の Schema に適合するテスト"""
        code, data = run_json(capsys, argv)
        assert code == EXIT_OK
        jsonschema.validate(instance=data, schema=report_schema(argv[0]))

    def test_failed_report_validates(self, capsys):
        """検査失敗時のレポートも Schema に適合するテスト"""
        code, data = run_json(capsys, ["kms-check", "--model", "o2_equal", "--beta", "2", "--depth", "2"])
        assert code == EXIT_FAILED
        jsonschema.validate(instance=data, schema=report_schema("kms-check"))

    def test_malformed_report_rejected(self, capsys):
        """型の誤ったレポートを Schema が拒否するテスト"""
        _, data = run_json(capsys, ["kms-check", "--model", "o2_equal", "--depth", "1"])
        schema = report_schema("kms-check")
        broken = dict(data, principal=1)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(instance=broken, schema=schema)
        broken = dict(data, controls={})
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(instance=broken, schema=schema)
        broken = dict(data, pair_count=1.5)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(instance=broken, schema=schema)

    def test_every_subcommand_has_schema(self):
        """全サブコマンドに正しい Schema が同梱されているテスト"""
        parser = build_parser()
        subparsers = next(a for a in parser._actions if a.dest == "command")
        for command in subparsers.choices:
            jsonschema.Draft202012Validator.check_schema(report_schema(command))

"""読み込んだモデルを保持し、各計算を実行して結果を辞書で返すセッション管理."""

import logging
import math
import os
import uuid
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..circle import (
    circle_entropy,
    circle_local_scaling_probe,
    quasi_invariance_suite,
    CircleMap,
    scaling_convergence,
)
from ..dimension import (
    DimensionResult,
    entropy_from_scaling,
    graph_dimension,
    kms_inverse_temperature,
    moran_dimension,
    pressure,
    structure_checks,
    topological_entropy,
)
from ..groupoid_kms import algebra_self_check, cuntz_krieger_defect, kms_verify_suite
from ..measure import (
    CylinderMeasure,
    eigenmeasure,
    hausdorff_measure,
    kolmogorov_defect,
    measure_table,
    quasi_invariance_table,
)
from ..models import ModelFile, ModelKind, catalog_model, catalog_names, export_catalog, load_model
from ..octafold import (
    octafold_dimension,
    octafold_entropy,
    octafold_measure_scaling,
    octafold_midpoints,
    octafold_scaling_probe,
    straddle_configuration,
    within_cell_pair,
)
from ..potentials import (
    bowen_constant,
    metric_scaling_ratio,
    principality_check,
    rho_f,
    w_sigma,
)
from ..shift_core import common_prefix, parse_point, word_text

logger = logging.getLogger(__name__)

SEED_ENV = "KMS_THERMO_SEED"
CONTROL_OFFSET = 0.5
SCALING_TOL = 1e-4
PROBE_POINTS = (0.1, 0.3, 0.7)


class CircleCheck(Enum):
    """円周写像の検査項目"""
    SCALING = "scaling"
    QUASI_INVARIANCE = "quasi-invariance"
    ENTROPY = "entropy"


class OctafoldCheck(Enum):
    """オクタフォールドの検査項目"""
    DIMENSION = "dimension"
    ENTROPY = "entropy"
    SCALING = "scaling"
    MEASURE_SCALING = "measure-scaling"
    MIDPOINTS = "midpoints"


def seeded_rng() -> np.random.Generator:
    """KMS_THERMO_SEED（既定0）で初期化した乱数生成器."""
    return np.random.default_rng(int(os.environ.get(SEED_ENV, "0")))


class LoadedModel:
    """セッションに読み込んだモデル"""
    def __init__(self, model: ModelFile, source: str):
        self.id = str(uuid.uuid4())[:8]
        self.model = model
        self.source = source
        self.solution: Optional[DimensionResult] = None
        self.loaded_at = datetime.now()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "source": self.source,
            **self.model.summary(),
            "solved_beta": self.solution.beta if self.solution else None,
            "loaded_at": self.loaded_at.strftime('%Y-%m-%d %H:%M:%S'),
        }


class ThermoSession:
    """モデルの読み込みと計算の窓口"""

    def __init__(self) -> None:
        self.models: Dict[str, LoadedModel] = {}

    def _error(self, message: str) -> Dict[str, Any]:
        logger.error(message)
        return {"success": False, "message": f"❌ {message}"}

    def _get(self, model_id: str) -> Optional[LoadedModel]:
        return self.models.get(model_id)

    def _not_found(self, model_id: str) -> Dict[str, Any]:
        return self._error(f"モデルID '{model_id}' が見つかりません")

    def load_model(self, source: str) -> Dict[str, Any]:
        """
        カタログ名またはファイルパスからモデルを読み込む.

        Args:
            source: カタログ名、またはモデルJSONのパス

        Returns:
            発行したモデルIDとモデルの概要
        """
        try:
            model = load_model(source)
        except ValueError as e:
            return self._error(f"モデル読み込みエラー: {str(e)}")
        entry = LoadedModel(model, source)
        self.models[entry.id] = entry
        return {
            "success": True,
            "message": f"✅ モデル '{model.name}' を読み込みました",
            "data": entry.to_dict(),
        }

    def add_model(self, model: ModelFile, source: str = "<memory>") -> str:
        entry = LoadedModel(model, source)
        self.models[entry.id] = entry
        return entry.id

    def list_models(self) -> Dict[str, Any]:
        if not self.models:
            return {"success": True, "message": "📋 モデルはまだ読み込まれていません", "data": {"models": []}}
        return {
            "success": True,
            "message": f"📋 {len(self.models)}件のモデル",
            "data": {"models": [m.to_dict() for m in self.models.values()]},
        }

    def catalog(self, export_dir: Optional[str] = None) -> Dict[str, Any]:
        """同梱モデルの一覧（export_dir 指定時は正規JSONで書き出す）."""
        entries = [catalog_model(name).summary() for name in catalog_names()]
        data: Dict[str, Any] = {"models": entries}
        if export_dir is not None:
            try:
                written = export_catalog(Path(export_dir))
            except OSError as e:
                return self._error(f"書き出しエラー: {str(e)}")
            data["exported"] = [str(p) for p in written]
        return {"success": True, "message": f"📋 カタログ {len(entries)}件", "data": data}

    # 記号力学系モデル

    def _solve(self, entry: LoadedModel) -> DimensionResult:
        if entry.solution is None:
            model = entry.model
            graph = model.require_graph()
            if model.ratios is not None:
                entry.solution = graph_dimension(graph, model.ratios)
            else:
                entry.solution = kms_inverse_temperature(graph, model.require_symbolic())
        return entry.solution

    def _measure(self, entry: LoadedModel, beta: Optional[float]) -> CylinderMeasure:
        model = entry.model
        graph = model.require_graph()
        solution = self._solve(entry)
        if beta is None or beta == solution.beta:
            if model.ratios is not None:
                return hausdorff_measure(graph, model.ratios, solution.beta, solution.perron_numbers)
            return eigenmeasure(graph, model.require_symbolic(), solution.beta)
        return eigenmeasure(graph, model.require_symbolic(), beta)

    def _resolve_beta(self, entry: LoadedModel, beta: Optional[float]) -> float:
        if beta is not None:
            return beta
        if entry.model.options.beta is not None:
            return entry.model.options.beta
        return self._solve(entry).beta

    def dimension(self, model_id: str) -> Dict[str, Any]:
        """
        Hausdorff次元（= KMS の逆温度 β）を求める.

        Args:
            model_id: モデルID

        Returns:
            β、求解方法（moran / perron / pressure / lebesgue）と構造チェック
        """
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        model = entry.model
        try:
            if model.kind is ModelKind.OCTAFOLD:
                result = octafold_dimension()
                data = {**result.to_dict(), "method": "moran"}
            elif model.kind is ModelKind.CIRCLE:
                assert model.circle is not None
                # Lebesgue 測度が Hausdorff 測度、β = 1
                data = {"beta": 1.0, "degree": model.circle.degree, "method": "lebesgue",
                        "warnings": list(model.circle.warnings)}
            else:
                solution = self._solve(entry)
                data = solution.to_dict()
                data["method"] = "perron" if model.ratios is not None else "pressure"
                data["structure"] = structure_checks(model.require_graph()).to_dict()
                if model.kind is ModelKind.CUNTZ and model.ratios is not None:
                    data["moran_beta"] = moran_dimension(model.ratios).beta
        except ValueError as e:
            return self._error(f"次元計算エラー: {str(e)}")
        return {
            "success": True,
            "message": f"📐 '{model.name}' の次元 β = {data['beta']:.10f}",
            "data": data,
        }

    def measure(self, model_id: str, depth: Optional[int] = None, beta: Optional[float] = None) -> Dict[str, Any]:
        """
        長さ depth のシリンダーの質量表を作る.

        Args:
            model_id: モデルID
            depth: シリンダーの語長（省略時はモデルの既定値）
            beta: 逆温度（省略時は解いた β と閉形式の測度）

        Returns:
            質量表、全質量、Kolmogorov 整合性の欠損
        """
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        depth = depth or entry.model.options.depth
        try:
            mu = self._measure(entry, beta)
            table = measure_table(mu, depth)
            data = {
                "beta": mu.beta,
                "depth": depth,
                "rule": mu.rule.value,
                "masses": table,
                "total_mass": mu.total_mass,
                "kolmogorov_defect": kolmogorov_defect(mu, depth),
                "warnings": list(mu.warnings),
            }
        except ValueError as e:
            return self._error(f"測度計算エラー: {str(e)}")
        return {"success": True, "message": f"📊 {len(table)}個のシリンダーの質量", "data": data}

    def quasi_invariance(self, model_id: str, depth: Optional[int] = None, beta: Optional[float] = None,
                         tol: Optional[float] = None) -> Dict[str, Any]:
        """
        解いた β の測度で準不変性欠損を求め、β ± 0.5 を負の対照とする.

        Args:
            model_id: モデルID
            depth: 検査するシリンダーの最大語長
            beta: 逆温度（省略時は解いた β）
            tol: 合格とする最大欠損

        Returns:
            シリンダーごとの欠損表、最大欠損、対照
        """
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        options = entry.model.options
        depth = depth or options.depth
        tol = options.tol if tol is None else tol
        try:
            p = entry.model.require_symbolic()
            mu = self._measure(entry, None)
            check_beta = self._resolve_beta(entry, beta)
            table = quasi_invariance_table(mu, p, check_beta, depth)
            controls = {
                "beta_minus": max(quasi_invariance_table(mu, p, check_beta - CONTROL_OFFSET, depth).values()),
                "beta_plus": max(quasi_invariance_table(mu, p, check_beta + CONTROL_OFFSET, depth).values()),
            }
        except ValueError as e:
            return self._error(f"準不変性計算エラー: {str(e)}")
        worst = max(table.values())
        passed = worst <= tol
        return {
            "success": True,
            "message": f"{'✅' if passed else '❌'} 最大欠損 {worst:.3e}（許容誤差 {tol:g}）",
            "data": {
                "beta": check_beta,
                "depth": depth,
                "tol": tol,
                "defects": table,
                "max_defect": worst,
                "controls": controls,
                "passed": passed,
            },
        }

    def kms_check(self, model_id: str, beta: Optional[float] = None, depth: Optional[int] = None,
                  tol: Optional[float] = None, self_check_trials: int = 50) -> Dict[str, Any]:
        """
        KMS 条件を網羅的に検証する.

        Args:
            model_id: モデルID
            beta: 逆温度（省略時は auto: 解いた β）
            depth: 双切断の語長の上限
            tol: 合格とする最大欠損
            self_check_trials: *-代数の自己検査の試行回数

        Returns:
            KMS レポート、Cuntz-Krieger 関係の欠損、代数の自己検査の結果
        """
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        options = entry.model.options
        depth = depth or options.depth
        tol = options.tol if tol is None else tol
        try:
            p = entry.model.require_symbolic()
            mu = self._measure(entry, None)
            check_beta = self._resolve_beta(entry, beta)
            report = kms_verify_suite(mu, p, check_beta, depth, tol, options.max_period)
            data = report.to_dict()
            data["cuntz_krieger_defect"] = cuntz_krieger_defect(mu.graph)
            data["algebra"] = algebra_self_check(mu, p, seeded_rng(), trials=self_check_trials)
        except ValueError as e:
            return self._error(f"KMS検証エラー: {str(e)}")
        mark = "✅" if report.passed else "❌"
        return {
            "success": True,
            "message": f"{mark} β = {check_beta:.10f}: {report.pair_count}組で最大欠損 {report.max_defect:.3e}",
            "data": data,
        }

    def entropy(self, model_id: str) -> Dict[str, Any]:
        """位相エントロピー h(T)."""
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        model = entry.model
        try:
            if model.kind is ModelKind.OCTAFOLD:
                data: Dict[str, Any] = {"entropy": octafold_entropy(), "method": "scaling",
                                        "beta": octafold_dimension().beta, "tau": 2.0}
            elif model.kind is ModelKind.CIRCLE:
                assert model.circle is not None
                data = {"entropy": circle_entropy(model.circle), "method": "degree",
                        "degree": model.circle.degree}
            else:
                graph = model.require_graph()
                p = model.require_symbolic()
                data = {
                    "entropy": topological_entropy(graph),
                    "pressure_at_zero": pressure(graph, p, 0.0),
                    "method": "adjacency",
                }
                if p.minimum == p.maximum:
                    beta = self._solve(entry).beta
                    data["scaling_entropy"] = entropy_from_scaling(beta, p.minimum)
        except ValueError as e:
            return self._error(f"エントロピー計算エラー: {str(e)}")
        return {"success": True, "message": f"🔥 h(T) = {data['entropy']:.10f}", "data": data}

    def metric(self, model_id: str, x: str, y: str) -> Dict[str, Any]:
        """
        経路空間上の距離 ρ_f(x, y) と局所スケーリング比を求める.

        Args:
            model_id: モデルID
            x: 点 "前周期(周期)"
            y: 点 "前周期(周期)"

        Returns:
            距離、共通接頭辞、スケーリング比、主性と Bowen 定数
        """
        entry = self._get(model_id)
        if entry is None:
            return self._not_found(model_id)
        try:
            graph = entry.model.require_graph()
            p = entry.model.require_symbolic()
            px, py = parse_point(graph, x), parse_point(graph, y)
            prefix = common_prefix(px, py)
            data: Dict[str, Any] = {
                "x": str(px),
                "y": str(py),
                "distance": rho_f(p, px, py),
                "common_prefix": word_text(graph, prefix) if prefix is not None else None,
                "bowen_constant": bowen_constant(p),
                "principality": principality_check(p, entry.model.options.max_period).to_dict(),
                "metric_violations": p.metric_violations(),
            }
            if prefix:
                data["w_sigma"] = w_sigma(p, prefix)
            if prefix is not None:
                data["scaling_ratio"] = metric_scaling_ratio(p, px, py)
        except ValueError as e:
            return self._error(f"距離計算エラー: {str(e)}")
        return {"success": True, "message": f"📏 ρ_f = {data['distance']:.10g}", "data": data}

    # 幾何的な例

    def _circle(self, model_id: Optional[str], f: Optional[str]) -> CircleMap:
        if f is not None:
            return CircleMap.parse(f)
        entry = self._get(model_id or "")
        if entry is None or entry.model.circle is None:
            raise ValueError(f"円周モデル '{model_id}' が見つかりません")
        return entry.model.circle

    def circle_check(self, check: str, model_id: Optional[str] = None, f: Optional[str] = None,
                     sections: int = 20) -> Dict[str, Any]:
        """
        円周写像を検査する.

        Args:
            check: scaling / quasi-invariance / entropy
            model_id: 円周モデルのID（f と排他）
            f: 重み f(t) の式
            sections: 準不変性の乱択区間数

        Returns:
            写像の概要と検査結果
        """
        try:
            kind = CircleCheck(check)
        except ValueError:
            return self._error(f"無効な検査項目: {check}")
        try:
            circle = self._circle(model_id, f)
            data: Dict[str, Any] = {"check": kind.value, "circle": circle.to_dict()}
            if kind is CircleCheck.SCALING:
                sweeps = [scaling_convergence(circle, x) for x in PROBE_POINTS]
                finest = max(s["errors"][-1] for s in sweeps)
                data.update({
                    "sweeps": sweeps,
                    "probe_at_1e-4": [circle_local_scaling_probe(circle, x, 1e-4) for x in PROBE_POINTS],
                    "max_error": finest,
                    "passed": finest <= SCALING_TOL,
                })
            elif kind is CircleCheck.QUASI_INVARIANCE:
                data.update(quasi_invariance_suite(circle, seeded_rng(), sections))
            else:
                data.update({"entropy": circle_entropy(circle), "degree": circle.degree,
                             "scaling_entropy": entropy_from_scaling(1.0, float(circle.degree))
                             if circle.min_f == circle.max_f else None,
                             "passed": True})
        except ValueError as e:
            return self._error(f"円周写像の検査エラー: {str(e)}")
        mark = "✅" if data.get("passed") else "❌"
        return {"success": True, "message": f"{mark} 円周写像 {kind.value} 検査", "data": data}

    def octafold_check(self, check: str) -> Dict[str, Any]:
        """
        Sierpinski オクタフォールドを検査する.

        Args:
            check: dimension / entropy / scaling / measure-scaling / midpoints

        Returns:
            検査結果（scaling では1セル内と中点をはさむ比の両方）
        """
        try:
            kind = OctafoldCheck(check)
        except ValueError:
            return self._error(f"無効な検査項目: {check}")
        try:
            data: Dict[str, Any] = {"check": kind.value}
            if kind is OctafoldCheck.DIMENSION:
                result = octafold_dimension()
                data.update({**result.to_dict(), "expected": math.log(3) / math.log(2)})
                data["passed"] = abs(result.beta - data["expected"]) <= 1e-10
            elif kind is OctafoldCheck.ENTROPY:
                h = octafold_entropy()
                data.update({"entropy": h, "expected": math.log(3), "passed": abs(h - math.log(3)) <= 1e-10})
            elif kind is OctafoldCheck.SCALING:
                within = octafold_scaling_probe(*within_cell_pair())
                x, y, z = straddle_configuration()
                straddle = octafold_scaling_probe(y, z, anchor=x)
                data.update({
                    "within_cell": within.to_dict(),
                    "across_midpoint": straddle.to_dict(),
                    "local_scaling_holds": straddle.ratio_squared == within.ratio_squared,
                    "passed": within.ratio_squared == 4 and straddle.radial_ratio_squared == 8,
                })
            elif kind is OctafoldCheck.MEASURE_SCALING:
                data.update(octafold_measure_scaling())
            else:
                rows = octafold_midpoints()
                data.update({"midpoints": rows, "passed": all(r["matches"] for r in rows)})
        except ValueError as e:
            return self._error(f"オクタフォールドの検査エラー: {str(e)}")
        mark = "✅" if data.get("passed") else "❌"
        return {"success": True, "message": f"{mark} オクタフォールド {kind.value} 検査", "data": data}

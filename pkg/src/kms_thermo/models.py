"""モデルファイル（JSON）の解析・正規化とカタログ."""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from .circle import CircleMap, CircleMapError
from .potentials import Potential, PotentialError, RatioList
from .shift_core import GraphModel, GraphValidationError, full_shift, parse_word

logger = logging.getLogger(__name__)


class ModelKind(Enum):
    """モデルの種類"""
    CUNTZ = "cuntz"
    GRAPH = "graph"
    GRAPH_GENERALIZED = "graph-generalized"
    CIRCLE = "circle"
    OCTAFOLD = "octafold"


SYMBOLIC_KINDS = (ModelKind.CUNTZ, ModelKind.GRAPH, ModelKind.GRAPH_GENERALIZED)


class ModelFormatError(ValueError):
    """モデルファイルの形式エラー（location は $.graph.edges[2].range のようなJSONパス）."""

    def __init__(self, message: str, location: str = "$") -> None:
        super().__init__(f"{location}: {message}")
        self.location = location
        self.detail = message


@dataclass
class SolverOptions:
    """実行ごとの既定値（モデルファイルの options で上書き）."""

    tol: float = 1e-10
    depth: int = 3
    beta: Optional[float] = None
    max_period: int = 6

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"tol": self.tol, "depth": self.depth, "max_period": self.max_period}
        if self.beta is not None:
            data["beta"] = self.beta
        return data


@dataclass
class ModelFile:
    """解析済みのモデル."""

    kind: ModelKind
    name: str
    description: str = ""
    graph: Optional[GraphModel] = None
    ratios: Optional[RatioList] = None
    potential: Optional[Potential] = None
    circle: Optional[CircleMap] = None
    options: SolverOptions = field(default_factory=SolverOptions)

    @property
    def is_symbolic(self) -> bool:
        return self.kind in SYMBOLIC_KINDS

    def require_symbolic(self) -> Potential:
        """記号力学系モデルのポテンシャル（比モデルなら f = 1/r）."""
        if self.potential is None:
            raise ModelFormatError(f"'{self.kind.value}' モデルには記号ポテンシャルがありません")
        return self.potential

    def require_graph(self) -> GraphModel:
        if self.graph is None:
            raise ModelFormatError(f"'{self.kind.value}' モデルにはグラフがありません")
        return self.graph

    def to_dict(self) -> Dict[str, Any]:
        """正規形のJSON辞書（キー順・辺順は固定）."""
        data: Dict[str, Any] = {"kind": self.kind.value, "name": self.name}
        if self.description:
            data["description"] = self.description
        if self.graph is not None:
            data["graph"] = self.graph.to_dict()
        if self.ratios is not None:
            data["potential"] = {"ratios": dict(sorted(self.ratios.ratios.items()))}
        elif self.potential is not None:
            data["potential"] = self.potential.to_dict()
        if self.circle is not None:
            data["circle"] = {"f": self.circle.expression}
        data["options"] = self.options.to_dict()
        return data

    def to_json(self) -> str:
        # float は repr で出力されるので往復で値が変わらない
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def summary(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"name": self.name, "kind": self.kind.value, "description": self.description}
        if self.graph is not None:
            info["vertices"] = len(self.graph.vertices)
            info["edges"] = len(self.graph.edges)
        if self.potential is not None:
            info["potential_depth"] = self.potential.depth
        return info


def _require(data: Mapping[str, Any], key: str, location: str) -> Any:
    if key not in data:
        raise ModelFormatError(f"必須フィールド '{key}' がありません", location)
    return data[key]


def _expect_object(value: Any, location: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ModelFormatError("オブジェクトが必要です", location)
    return value


def _expect_number(value: Any, location: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFormatError(f"数値が必要です: {value!r}", location)
    return float(value)


def _parse_graph(data: Any, location: str) -> GraphModel:
    obj = _expect_object(data, location)
    vertices = _require(obj, "vertices", location)
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ModelFormatError("頂点IDの文字列リストが必要です", f"{location}.vertices")
    edges_raw = _require(obj, "edges", location)
    if not isinstance(edges_raw, list):
        raise ModelFormatError("辺のリストが必要です", f"{location}.edges")
    known = set(vertices)
    edges = []
    for i, item in enumerate(edges_raw):
        where = f"{location}.edges[{i}]"
        edge = _expect_object(item, where)
        ident, source, rng = (_require(edge, key, where) for key in ("id", "source", "range"))
        for key, value in (("id", ident), ("source", source), ("range", rng)):
            if not isinstance(value, str) or not value or " " in value:
                raise ModelFormatError(f"空白を含まない文字列が必要です: {value!r}", f"{where}.{key}")
        for key, value in (("source", source), ("range", rng)):
            if value not in known:
                raise ModelFormatError(f"未知の頂点 '{value}'", f"{where}.{key}")
        edges.append((ident, source, rng))
    try:
        return GraphModel.build(vertices, edges)
    except GraphValidationError as exc:
        raise ModelFormatError(str(exc), location) from exc


def _parse_ratios(data: Any, graph: GraphModel, location: str) -> RatioList:
    if isinstance(data, list):
        if len(data) != len(graph.edges):
            raise ModelFormatError("比の数が辺の数と一致しません", location)
        data = dict(zip(graph.edges, data))
    obj = _expect_object(data, location)
    ratios: Dict[str, float] = {}
    for edge, value in obj.items():
        where = f"{location}.{edge}"
        if edge not in graph.edges:
            raise ModelFormatError(f"未知の辺 '{edge}'", where)
        ratios[edge] = _expect_number(value, where)
    try:
        result = RatioList(ratios)
        result.check_graph(graph)
    except PotentialError as exc:
        raise ModelFormatError(str(exc), location) from exc
    return result


def _parse_table_potential(data: Mapping[str, Any], graph: GraphModel, location: str) -> Potential:
    depth = _require(data, "depth", location)
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
        raise ModelFormatError("1以上の整数が必要です", f"{location}.depth")
    table_raw = _expect_object(_require(data, "table", location), f"{location}.table")
    table = {}
    for text, value in table_raw.items():
        where = f"{location}.table.{text}"
        try:
            word = parse_word(graph, text)
        except GraphValidationError as exc:
            raise ModelFormatError(str(exc), where) from exc
        if len(word) != depth:
            raise ModelFormatError(f"長さ {depth} の語が必要です", where)
        table[word] = _expect_number(value, where)
    weights: Optional[Dict[str, float]] = None
    if "vertex_weights" in data:
        raw = _expect_object(data["vertex_weights"], f"{location}.vertex_weights")
        weights = {v: _expect_number(q, f"{location}.vertex_weights.{v}") for v, q in raw.items()}
    try:
        return Potential(graph, depth, table, weights)
    except PotentialError as exc:
        raise ModelFormatError(str(exc), location) from exc


def _parse_options(data: Any, location: str) -> SolverOptions:
    obj = _expect_object(data, location)
    options = SolverOptions()
    for key, value in obj.items():
        where = f"{location}.{key}"
        if key in ("tol", "beta"):
            setattr(options, key, _expect_number(value, where))
        elif key in ("depth", "max_period"):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ModelFormatError("1以上の整数が必要です", where)
            setattr(options, key, value)
        else:
            raise ModelFormatError(f"未知のオプション '{key}'", where)
    return options


def parse_model(data: Any) -> ModelFile:
    """JSON辞書を検証して ModelFile にする."""
    obj = _expect_object(data, "$")
    kind_text = _require(obj, "kind", "$")
    try:
        kind = ModelKind(kind_text)
    except ValueError:
        choices = ", ".join(k.value for k in ModelKind)
        raise ModelFormatError(f"未知の kind '{kind_text}'（{choices}）", "$.kind") from None
    name = obj.get("name", kind.value)
    if not isinstance(name, str):
        raise ModelFormatError("文字列が必要です", "$.name")
    description = obj.get("description", "")
    options = _parse_options(obj.get("options", {}), "$.options")
    model = ModelFile(kind, name, str(description), options=options)

    if kind in SYMBOLIC_KINDS:
        potential = _expect_object(_require(obj, "potential", "$"), "$.potential")
        if "graph" in obj:
            model.graph = _parse_graph(obj["graph"], "$.graph")
        elif kind is ModelKind.CUNTZ:
            ratios = _require(potential, "ratios", "$.potential")
            count = len(ratios) if isinstance(ratios, (list, dict)) else 0
            if count < 2:
                raise ModelFormatError("Cuntz モデルには2つ以上の比が必要です", "$.potential.ratios")
            model.graph = full_shift(count)
        else:
            raise ModelFormatError("必須フィールド 'graph' がありません", "$")
        if kind is ModelKind.GRAPH_GENERALIZED:
            model.potential = _parse_table_potential(potential, model.graph, "$.potential")
        else:
            model.ratios = _parse_ratios(_require(potential, "ratios", "$.potential"), model.graph, "$.potential.ratios")
            model.potential = Potential.from_ratios(model.graph, model.ratios)
    elif kind is ModelKind.CIRCLE:
        circle = _expect_object(_require(obj, "circle", "$"), "$.circle")
        expression = _require(circle, "f", "$.circle")
        if not isinstance(expression, str):
            raise ModelFormatError("式の文字列が必要です", "$.circle.f")
        try:
            model.circle = CircleMap.parse(expression)
        except CircleMapError as exc:
            raise ModelFormatError(str(exc), "$.circle.f") from exc
    return model


def _catalog_data() -> Dict[str, Dict[str, Any]]:
    two_vertex = {
        "vertices": ["a", "b"],
        "edges": [
            {"id": "x", "source": "a", "range": "a"},
            {"id": "y", "source": "b", "range": "a"},
            {"id": "z", "source": "a", "range": "b"},
        ],
    }
    return {
        "o2_equal": {
            "kind": "cuntz",
            "name": "o2_equal",
            "description": "Cuntz 代数 O_2、比 (1/2, 1/2): β = 1",
            "potential": {"ratios": {"1": 0.5, "2": 0.5}},
        },
        "o3_ratios": {
            "kind": "cuntz",
            "name": "o3_ratios",
            "description": "O_3、比 (1/2, 1/4, 1/4): β = 1",
            "potential": {"ratios": {"1": 0.5, "2": 0.25, "3": 0.25}},
        },
        "cuntz_gasket": {
            "kind": "cuntz",
            "name": "cuntz_gasket",
            "description": "Sierpinski ガスケットの比 (1/2, 1/2, 1/2): β = log 3 / log 2",
            "potential": {"ratios": {"1": 0.5, "2": 0.5, "3": 0.5}},
        },
        "o2_generalized": {
            "kind": "graph-generalized",
            "name": "o2_generalized",
            "description": "O_2 上の深さ2の一般化ゲージ作用",
            "graph": {
                "vertices": ["v"],
                "edges": [{"id": "1", "source": "v", "range": "v"}, {"id": "2", "source": "v", "range": "v"}],
            },
            "potential": {"depth": 2, "table": {"11": 2.0, "12": 3.0, "21": 4.0, "22": 5.0}},
        },
        "graph_two_vertex": {
            "kind": "graph",
            "name": "graph_two_vertex",
            "description": "ループ付き2頂点の既約グラフ（Perron数あり）",
            "graph": two_vertex,
            "potential": {"ratios": {"x": 0.5, "y": 0.4, "z": 0.3}},
        },
        "circle_f3": {
            "kind": "circle",
            "name": "circle_f3",
            "description": "f ≡ 3: T(x) = 3x mod 1",
            "circle": {"f": "3"},
        },
        "circle_sine": {
            "kind": "circle",
            "name": "circle_sine",
            "description": "f(t) = 2 + 0.5 sin(2πt)",
            "circle": {"f": "2 + 0.5*sin(2*pi*t)"},
        },
        "octafold": {
            "kind": "octafold",
            "name": "octafold",
            "description": "正八面体の交互4面に貼った Sierpinski オクタフォールド",
        },
    }


CATALOG: Dict[str, Dict[str, Any]] = _catalog_data()


def catalog_names() -> List[str]:
    return list(CATALOG)


def catalog_model(name: str) -> ModelFile:
    if name not in CATALOG:
        raise ModelFormatError(f"カタログに '{name}' はありません（{', '.join(CATALOG)}）")
    return parse_model(CATALOG[name])


def load_model(source: str) -> ModelFile:
    """カタログ名またはJSONファイルのパスからモデルを読み込む."""
    if source in CATALOG:
        return catalog_model(source)
    path = Path(source)
    if not path.is_file():
        raise ModelFormatError(f"ファイルもカタログ名も見つかりません: {source}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"JSONの構文エラー: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from exc
    logger.info(f"Loaded model file {path}")
    return parse_model(data)


def export_catalog(directory: Path) -> List[Path]:
    """カタログの全モデルを正規JSONとして書き出す."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in CATALOG:
        path = directory / f"{name}.json"
        path.write_text(catalog_model(name).to_json(), encoding="utf-8")
        written.append(path)
    return written


"""経路空間上のポテンシャル f（φ = log f）、距離 ρ_f、コサイクルと各種診断."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .shift_core import (
    GraphModel,
    PathPoint,
    Word,
    common_prefix,
    enumerate_cylinders,
    extensions_of,
    periodic_points,
    shift_n,
    shift_point,
    word_text,
)

logger = logging.getLogger(__name__)

# |Birkhoff和| がこれ未満なら主性（principality）違反とみなす
PRINCIPALITY_TOL = 1e-9


class PotentialError(ValueError):
    """ポテンシャル・比リストの検証エラー."""


class NotInGroupoidError(ValueError):
    """(x, m, n, y) が T^m x = T^n y を満たさない."""


@dataclass(frozen=True)
class RatioList:
    """縮小比リスト {r_e}、各 r_e は (0, 1)."""

    ratios: Dict[str, float]

    def __post_init__(self) -> None:
        if not self.ratios:
            raise PotentialError("比リストが空です")
        for edge, value in self.ratios.items():
            if not 0.0 < value < 1.0:
                raise PotentialError(f"比 r_{edge} = {value} は (0,1) の範囲外です")

    def product(self, word: Word) -> float:
        """r_σ = ∏ r_{σ_i}."""
        return math.prod(self.ratios[e] for e in word)

    def check_graph(self, graph: GraphModel) -> None:
        missing = [e for e in graph.edges if e not in self.ratios]
        extra = [e for e in self.ratios if e not in graph.edges]
        if missing or extra:
            raise PotentialError(f"比リストと辺集合が一致しません（不足: {missing}, 余剰: {extra}）")


@dataclass(frozen=True)
class Potential:
    """深さ k のマルコフ型重み f（Z(w) 上の値を k 語ごとに保持）.

    vertex_weights は頂点重み q_v（未指定ならすべて1）。
    """

    graph: GraphModel
    depth: int
    table: Dict[Word, float]
    vertex_weights: Optional[Dict[str, float]] = None

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise PotentialError("depth は1以上が必要です")
        words = enumerate_cylinders(self.graph, self.depth)
        missing = [w for w in words if w not in self.table]
        if missing:
            raise PotentialError(
                f"表に値のない {self.depth} 語があります: {word_text(self.graph, missing[0])!r}"
            )
        if len(self.table) != len(words):
            extra = sorted(set(self.table) - set(words))
            raise PotentialError(f"許容されない語が表にあります: {word_text(self.graph, extra[0])!r}")
        for word, value in self.table.items():
            if not value > 0.0 or not math.isfinite(value):
                raise PotentialError(f"f({word_text(self.graph, word)}) = {value} は正の有限値ではありません")
        if self.vertex_weights is not None:
            for vertex in self.graph.vertices:
                q = self.vertex_weights.get(vertex)
                if q is None or not q > 0.0:
                    raise PotentialError(f"頂点重み q_{vertex} が正の値ではありません")

    @classmethod
    def from_ratios(
        cls,
        graph: GraphModel,
        ratios: RatioList,
        vertex_weights: Optional[Mapping[str, float]] = None,
    ) -> "Potential":
        """比ポテンシャル f(x) = 1/r_{x_0}."""
        ratios.check_graph(graph)
        table = {(e,): 1.0 / ratios.ratios[e] for e in graph.edges}
        weights = dict(vertex_weights) if vertex_weights is not None else None
        return cls(graph, 1, table, weights)

    @classmethod
    def constant(cls, graph: GraphModel, value: float, depth: int = 1) -> "Potential":
        return cls(graph, depth, {w: value for w in enumerate_cylinders(graph, depth)})

    def value(self, word: Word) -> float:
        """word で始まる点での f の値（先頭 k 文字で決まる）."""
        return self.table[word[: self.depth]]

    def log_value(self, word: Word) -> float:
        return math.log(self.value(word))

    def vertex_weight(self, vertex: str) -> float:
        if self.vertex_weights is None:
            return 1.0
        return self.vertex_weights[vertex]

    @property
    def minimum(self) -> float:
        return min(self.table.values())

    @property
    def maximum(self) -> float:
        return max(self.table.values())

    def metric_violations(self) -> List[str]:
        """距離構成の前提（f > 1 と f > q_s/q_r）に反する項目."""
        problems: List[str] = []
        for word, value in sorted(self.table.items()):
            if value <= 1.0:
                problems.append(f"f({word_text(self.graph, word)}) = {value} ≤ 1")
            if self.vertex_weights is not None:
                e = word[0]
                bound = self.vertex_weight(self.graph.source_of(e)) / self.vertex_weight(self.graph.range_of(e))
                if value <= bound:
                    problems.append(f"f({word_text(self.graph, word)}) = {value} ≤ q_s/q_r = {bound}")
        return problems

    def require_metric(self) -> None:
        problems = self.metric_violations()
        if problems:
            raise PotentialError("距離 ρ_f を構成できません: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "depth": self.depth,
            "table": {word_text(self.graph, w): v for w, v in sorted(self.table.items())},
        }
        if self.vertex_weights is not None:
            data["vertex_weights"] = dict(sorted(self.vertex_weights.items()))
        return data


def word_birkhoff_sum(p: Potential, word: Word, n: int) -> float:
    """∑_{i<n} log f(T^i z)、z は word で始まる任意の点（len(word) ≥ n+k−1）."""
    if len(word) < n + p.depth - 1:
        raise PotentialError("Birkhoff和を確定させるには語が短すぎます")
    return sum(math.log(p.table[word[i : i + p.depth]]) for i in range(n))


def birkhoff_sum(p: Potential, x: PathPoint, n: int) -> float:
    """∑_{i=0}^{n−1} φ(T^i x)."""
    if n < 0:
        raise PotentialError("n は0以上が必要です")
    x.validate(p.graph)
    return word_birkhoff_sum(p, x.prefix(n + p.depth - 1), n)


def cocycle_value(p: Potential, x: PathPoint, m: int, n: int, y: PathPoint) -> float:
    """c_φ(x, m−n, y) = ∑_{i<m} φ(T^i x) − ∑_{i<n} φ(T^i y)."""
    if m < 0 or n < 0:
        raise NotInGroupoidError("m, n は0以上が必要です")
    if shift_n(x, m) != shift_n(y, n):
        raise NotInGroupoidError(f"T^{m}({x}) ≠ T^{n}({y}): 亜群の元ではありません")
    return birkhoff_sum(p, x, m) - birkhoff_sum(p, y, n)


def w_sigma(p: Potential, sigma: Word) -> float:
    """w_σ = max_{z,w∈Z(σ)} (∏f(T^i z)·∏f(T^i w))^{−1/2}.

    深さ k の f では積が先頭 |σ|+k−1 文字で決まるので、拡張語上の
    最小積 P_min に対し w_σ = 1/P_min となる。
    """
    if len(sigma) < 1:
        raise PotentialError("w_σ には長さ1以上の語が必要です")
    p.graph.require_allowed(sigma)
    n = len(sigma)
    products = [
        math.prod(p.table[ext[i : i + p.depth]] for i in range(n))
        for ext in extensions_of(p.graph, sigma, n + p.depth - 1)
    ]
    return 1.0 / min(products)


def rho_f(p: Potential, x: PathPoint, y: PathPoint) -> float:
    """ρ_f(x, y) = w_σ·q_{s(σ)}（σ は最長共通接頭辞）."""
    prefix = common_prefix(x, y)
    if prefix is None:
        return 0.0
    if not prefix:
        # 別の1シリンダー（または別頂点成分）間の距離
        return max(
            p.vertex_weight(p.graph.range_of(x.letter(0))),
            p.vertex_weight(p.graph.range_of(y.letter(0))),
        )
    return w_sigma(p, prefix) * p.vertex_weight(p.graph.source_of(prefix[-1]))


def metric_scaling_ratio(p: Potential, x: PathPoint, y: PathPoint) -> float:
    """ρ_f(Tx, Ty)/ρ_f(x, y)。共通接頭辞が伸びると f(x) に収束する."""
    base = rho_f(p, x, y)
    if base == 0.0:
        raise PotentialError("x = y では比が定義されません")
    return rho_f(p, shift_point(x), shift_point(y)) / base


def local_scaling_ratio_bounds(p: Potential, sigma: Word) -> Tuple[float, float]:
    """Z(σ) 上の (f(z)f(w))^{1/2} の (最小, 最大)."""
    if len(sigma) < 2:
        raise PotentialError("局所スケーリングの評価には長さ2以上の語が必要です")
    p.graph.require_allowed(sigma)
    values = [p.value(ext) for ext in extensions_of(p.graph, sigma, max(len(sigma), p.depth))]
    return min(values), max(values)


@dataclass(frozen=True)
class PrincipalityReport:
    """c_φ^{−1}(0) の主性チェック結果."""

    passed: bool
    short_circuit: bool
    checked_points: int
    violating_orbit: Optional[PathPoint] = None
    violating_sum: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "short_circuit": self.short_circuit,
            "checked_points": self.checked_points,
            "violating_orbit": str(self.violating_orbit) if self.violating_orbit else None,
            "violating_sum": self.violating_sum,
        }


def principality_check(p: Potential, max_period: int, tol: float = PRINCIPALITY_TOL) -> PrincipalityReport:
    """周期 ≤ max_period の周期軌道上で φ の和が 0 でないことを確かめる."""
    logs = [math.log(v) for v in p.table.values()]
    if all(v > 0.0 for v in logs) or all(v < 0.0 for v in logs):
        return PrincipalityReport(passed=True, short_circuit=True, checked_points=0)

    points = periodic_points(p.graph, max_period)
    for x in points:
        total = birkhoff_sum(p, x, len(x.period))
        if abs(total) < tol:
            logger.warning(f"Principality violated on orbit {x} (sum={total})")
            return PrincipalityReport(False, False, len(points), x, total)
    return PrincipalityReport(passed=True, short_circuit=False, checked_points=len(points))


def bowen_constant(p: Potential) -> float:
    """Bowen 定数 C = (k−1)·osc(φ)."""
    logs = [math.log(v) for v in p.table.values()]
    return (p.depth - 1) * (max(logs) - min(logs))

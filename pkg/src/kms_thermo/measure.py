"""シリンダー測度: 閉形式のHausdorff測度、転送作用素の固有測度、準不変性の検証."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dimension import SolverError, spectral_radius
from .potentials import Potential, RatioList, cocycle_value
from .shift_core import (
    EMPTY_WORD,
    GraphModel,
    PathPoint,
    Word,
    enumerate_cylinders,
    extensions_of,
    word_text,
)

logger = logging.getLogger(__name__)

EIGENVALUE_TOL = 1e-8


class MeasureError(ValueError):
    """測度の構成・評価エラー."""


class ExtensionRule(Enum):
    """基底深さより深いシリンダーの質量の決め方."""
    CLOSED_FORM = "closed-form"
    TRANSFER = "transfer"


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """L_{f,β} の深さ max(k−1,1) シリンダー関数空間上の行列表現.

    entries[u, v] = f(e·u…)^{−β}（v = (e·u) の先頭 d 文字）。
    """

    beta: float
    index_words: Tuple[Word, ...]
    entries: np.ndarray

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        """シリンダー関数 a の係数ベクトルに L_{f,β} を作用させる."""
        return np.asarray(self.entries @ coefficients)


def transfer_matrix(graph: GraphModel, p: Potential, beta: float) -> TransferMatrix:
    """(L_{f,β}a)(x) = ∑_{s(e)=r(x)} f(ex)^{−β} a(ex) の厳密な有限行列."""
    if p.graph != graph:
        raise MeasureError("ポテンシャルのグラフが一致しません")
    d = max(p.depth - 1, 1)
    words = enumerate_cylinders(graph, d)
    index = {w: i for i, w in enumerate(words)}
    entries = np.zeros((len(words), len(words)))
    for u in words:
        for e in graph.edges_with_source(graph.range_of(u[0])):
            extended = (e,) + u
            entries[index[u], index[extended[:d]]] += p.value(extended) ** (-beta)
    return TransferMatrix(beta, tuple(words), entries)


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """有限語への質量の整合的な割り当て.

    TRANSFER では基底深さより深い語を μ(σ) = λ^{−1} f(σ…)^{−β} μ(σ') で延長し、
    CLOSED_FORM では μ(σ) = q_{s(σ)}^β r_σ^β / Z を直接評価する。
    """

    graph: GraphModel
    base_depth: int
    base_masses: Dict[Word, float]
    rule: ExtensionRule
    beta: float
    potential: Optional[Potential] = None
    ratios: Optional[RatioList] = None
    perron_numbers: Optional[Dict[str, float]] = None
    normalizer: float = 1.0
    eigenvalue: float = 1.0
    warnings: List[str] = field(default_factory=list)

    @property
    def total_mass(self) -> float:
        return float(sum(self.base_masses.values()))

    def _vertex_mass(self, vertex: str) -> float:
        return float(sum(m for w, m in self.base_masses.items() if self.graph.range_of(w[0]) == vertex))

    def _closed_form(self, word: Word) -> float:
        assert self.ratios is not None
        q = 1.0 if self.perron_numbers is None else self.perron_numbers[self.graph.source_of(word[-1])]
        return (q * self.ratios.product(word)) ** self.beta * self.normalizer

    def _transfer(self, word: Word) -> float:
        assert self.potential is not None
        d = self.base_depth
        if len(word) < d:
            return float(sum(self.base_masses[w] for w in extensions_of(self.graph, word, d)))
        steps = len(word) - d
        weight = math.prod(
            self.potential.value(word[i : i + self.potential.depth]) ** (-self.beta) / self.eigenvalue
            for i in range(steps)
        )
        return weight * self.base_masses[word[steps:]]

    def mass(self, word: Word, vertex: Optional[str] = None) -> float:
        """μ(Z(σ))。空語は全質量（頂点指定時は μ(vE^∞)）、非許容語は0."""
        if not word:
            return self.total_mass if vertex is None else self._vertex_mass(vertex)
        if not self.graph.is_allowed(word):
            return 0.0
        if self.rule is ExtensionRule.CLOSED_FORM:
            return self._closed_form(word)
        return self._transfer(word)


def eigenmeasure(graph: GraphModel, p: Potential, beta: float) -> CylinderMeasure:
    """L*_{f,β}(μ) = λμ の正規化された固有測度（λ = 1 が KMS の β）.

    Args:
        graph: 経路空間のグラフ
        p: 深さ k のポテンシャル
        beta: 逆温度

    Returns:
        転送行列の左Perronベクトルを深さ max(k−1, 1) の基底質量とする
        TRANSFER 規則の CylinderMeasure。λ ≠ 1 なら warnings に記録する。
    """
    matrix = transfer_matrix(graph, p, beta)
    try:
        eigenvalue, left = spectral_radius(matrix.entries.T)
    except SolverError as exc:
        raise MeasureError(f"転送行列が既約ではありません: {exc}") from exc
    warnings: List[str] = []
    if abs(eigenvalue - 1.0) > EIGENVALUE_TOL:
        warnings.append(f"β = {beta} での主固有値が {eigenvalue} で1ではありません（圧力が0でない）")
        logger.warning(warnings[-1])
    masses = {w: float(left[i]) for i, w in enumerate(matrix.index_words)}
    return CylinderMeasure(
        graph=graph,
        base_depth=len(matrix.index_words[0]),
        base_masses=masses,
        rule=ExtensionRule.TRANSFER,
        beta=beta,
        potential=p,
        eigenvalue=eigenvalue,
        warnings=warnings,
    )


def hausdorff_measure(
    graph: GraphModel,
    ratios: RatioList,
    beta: float,
    perron_numbers: Optional[Dict[str, float]] = None,
) -> CylinderMeasure:
    """閉形式の正規化Hausdorff測度 μ(Z(σ)) = q_{s(σ)}^β r_σ^β / Z."""
    ratios.check_graph(graph)

    def raw(edge: str) -> float:
        q = 1.0 if perron_numbers is None else perron_numbers[graph.source_of(edge)]
        return float((q * ratios.ratios[edge]) ** beta)

    total = sum(raw(e) for e in graph.edges)
    return CylinderMeasure(
        graph=graph,
        base_depth=1,
        base_masses={(e,): raw(e) / total for e in graph.edges},
        rule=ExtensionRule.CLOSED_FORM,
        beta=beta,
        ratios=ratios,
        perron_numbers=perron_numbers,
        normalizer=1.0 / total,
    )


def cylinder_mass(mu: CylinderMeasure, sigma: Word, vertex: Optional[str] = None) -> float:
    """μ(Z(σ))."""
    return mu.mass(sigma, vertex)


def quasi_invariance_check(mu: CylinderMeasure, p: Potential, beta: float, sigma: Word) -> float:
    """|μ(Z(σ)) − ∫_{Z(σ')} f(σ_0 x)^{−β} dμ(x)|（積分は精密化上の有限和）."""
    if not sigma:
        raise MeasureError("準不変性の検査には長さ1以上の語が必要です")
    graph = mu.graph
    graph.require_allowed(sigma)
    head, tail = sigma[0], sigma[1:]
    length = max(len(tail), p.depth - 1, 1)
    integral = sum(
        p.value((head,) + w) ** (-beta) * mu.mass(w)
        for w in extensions_of(graph, tail, length, vertex=graph.source_of(head))
    )
    return abs(mu.mass(sigma) - integral)


def radon_nikodym(p: Potential, beta: float, x: PathPoint, m: int, n: int, y: PathPoint) -> float:
    """dr^*μ/ds^*μ = e^{−β c_φ}."""
    return math.exp(-beta * cocycle_value(p, x, m, n, y))


def measure_table(mu: CylinderMeasure, depth: int) -> Dict[str, float]:
    """長さ depth の全シリンダーの質量."""
    return {word_text(mu.graph, w): mu.mass(w) for w in enumerate_cylinders(mu.graph, depth)}


def quasi_invariance_table(mu: CylinderMeasure, p: Potential, beta: float, depth: int) -> Dict[str, float]:
    """長さ1〜depth の全シリンダーでの準不変性欠損."""
    table: Dict[str, float] = {}
    for level in range(1, depth + 1):
        for w in enumerate_cylinders(mu.graph, level):
            table[word_text(mu.graph, w)] = quasi_invariance_check(mu, p, beta, w)
    return table


def kolmogorov_defect(mu: CylinderMeasure, depth: int) -> float:
    """長さ < depth の語について max |μ(σ) − ∑_e μ(σe)|（空語は頂点ごと）."""
    graph = mu.graph
    worst = 0.0
    for vertex in graph.vertices:
        children = sum(mu.mass((e,)) for e in graph.edges_with_range(vertex))
        worst = max(worst, abs(mu.mass(EMPTY_WORD, vertex) - children))
    for level in range(1, depth):
        for w in enumerate_cylinders(graph, level):
            children = sum(mu.mass(w + (e,)) for e in graph.successors(w[-1]))
            worst = max(worst, abs(mu.mass(w) - children))
    return worst

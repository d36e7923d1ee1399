"""Hausdorff次元のソルバー（Moran方程式・Perron数・圧力方程式）、エントロピー、構造チェック."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy import optimize

from .potentials import Potential, RatioList
from .shift_core import GraphModel

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-14
RESIDUAL_TOL = 1e-10
BRACKET_CAP = 2.0 ** 20
POWER_RTOL = 1e-13
POWER_MAX_ITER = 100_000


class SolverError(ValueError):
    """求解の前提違反（可約行列、ブラケット失敗など）."""


@dataclass
class DimensionResult:
    """Hausdorff次元 / 逆温度 β の求解結果."""

    beta: float
    leading_eigenvalue: float
    iterations: int
    residual: float
    perron_numbers: Optional[Dict[str, float]] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "perron_numbers": self.perron_numbers,
            "leading_eigenvalue": self.leading_eigenvalue,
            "residual": self.residual,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }


@dataclass
class StructureReport:
    """グラフの構造チェック結果."""

    irreducible: bool
    primitive: bool
    condition_l: bool
    positively_expansive: bool = True
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "irreducible": self.irreducible,
            "primitive": self.primitive,
            "condition_l": self.condition_l,
            "positively_expansive": self.positively_expansive,
            "notes": list(self.notes),
        }


def _expand_bracket(func: Callable[[float], float]) -> float:
    """func(0) > 0 の単調減少関数について func(hi) ≤ 0 となる hi を倍々で探す."""
    hi = 1.0
    while func(hi) > 0.0:
        hi *= 2.0
        if hi > BRACKET_CAP:
            raise SolverError(f"ブラケットが {BRACKET_CAP:g} を超えても符号が変わりません")
    logger.debug(f"Bracket found: [0, {hi}]")
    return hi


def _bisect(func: Callable[[float], float], lo: float, hi: float) -> Tuple[float, int]:
    root, info = optimize.bisect(func, lo, hi, xtol=ROOT_XTOL, full_output=True)
    return float(root), int(info.iterations)


def _is_irreducible(matrix: np.ndarray) -> bool:
    digraph = nx.from_numpy_array((matrix > 0).astype(int), create_using=nx.DiGraph)
    return bool(nx.is_strongly_connected(digraph))


def _power_iteration(matrix: np.ndarray) -> Tuple[float, np.ndarray, int]:
    # M+I は既約なら原始的なので、周期的な M でも反復が収束する
    n = matrix.shape[0]
    shifted = matrix + np.eye(n)
    vector = np.full(n, 1.0 / n)
    previous = math.inf
    eigenvalue = 0.0
    for iteration in range(1, POWER_MAX_ITER + 1):
        image = shifted @ vector
        total = float(image.sum())
        vector = image / total
        eigenvalue = total - 1.0
        residual = float(np.max(np.abs(matrix @ vector - eigenvalue * vector)))
        converged = abs(eigenvalue - previous) <= POWER_RTOL * max(abs(eigenvalue), 1.0)
        if converged and residual <= 1e-12 * float(np.max(vector)):
            return eigenvalue, vector, iteration
        previous = eigenvalue
    logger.warning(f"Power iteration hit the {POWER_MAX_ITER} iteration cap")
    return eigenvalue, vector, POWER_MAX_ITER


def spectral_radius(matrix: Union[np.ndarray, Sequence[Sequence[float]]]) -> Tuple[float, np.ndarray]:
    """非負既約行列のPerron固有値と正の右固有ベクトル（和1に正規化）."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise SolverError(f"正方行列ではありません: shape={m.shape}")
    if np.any(m < 0):
        raise SolverError("負の成分を含む行列です")
    if not _is_irreducible(m):
        raise SolverError("可約な行列です（強連結ではありません）")
    eigenvalue, vector, _ = _power_iteration(m)
    return eigenvalue, vector


def moran_dimension(ratios: Union[RatioList, Sequence[float]]) -> DimensionResult:
    """Moran方程式 ∑ r_i^s = 1 の解 s.

    Args:
        ratios: 縮小比 r_i ∈ (0, 1)（2つ以上）

    Returns:
        s を beta に持つ DimensionResult
    """
    values = list(ratios.ratios.values()) if isinstance(ratios, RatioList) else list(ratios)
    if len(values) < 2:
        raise SolverError("比は2つ以上必要です")
    if any(not 0.0 < r < 1.0 for r in values):
        raise SolverError("すべての比は (0,1) の範囲にある必要があります")
    r = np.asarray(values, dtype=float)

    def moran(s: float) -> float:
        return float(np.sum(r ** s)) - 1.0

    hi = _expand_bracket(moran)
    beta, iterations = _bisect(moran, 0.0, hi)
    residual = moran(beta)
    logger.info(f"Moran dimension {beta} after {iterations} bisection steps")
    return DimensionResult(beta, residual + 1.0, iterations, residual)


def _weighted_vertex_matrix(graph: GraphModel, weights: Dict[str, float], s: float) -> np.ndarray:
    """M(s)_{v,w} = ∑_{e∈vE^1w} weight_e^s."""
    index = graph.vertex_index()
    matrix = np.zeros((len(graph.vertices), len(graph.vertices)))
    for edge, rng, src in zip(graph.edges, graph.ranges, graph.sources):
        matrix[index[rng], index[src]] += weights[edge] ** s
    return matrix


def _perron_numbers(graph: GraphModel, weights: Dict[str, float], beta: float) -> Tuple[Dict[str, float], float]:
    """s 次元Perron数 q_v とその方程式の頂点ごと最大残差."""
    matrix = _weighted_vertex_matrix(graph, weights, beta)
    _, vector = spectral_radius(matrix)
    residual = float(np.max(np.abs(vector - matrix @ vector)))
    numbers = {v: float(vector[i]) ** (1.0 / beta) for i, v in enumerate(graph.vertices)}
    return numbers, residual


def graph_dimension(graph: GraphModel, ratios: RatioList) -> DimensionResult:
    """ρ(M(s)) = 1 を満たす s と s 次元Perron数 q_v.

    M(s)_{uv} = ∑_{r(e)=u, s(e)=v} r_e^s。既約でないグラフは SolverError。
    """
    ratios.check_graph(graph)
    report = structure_checks(graph)
    if not report.irreducible:
        raise SolverError("グラフが既約（強連結）ではありません")
    warnings: List[str] = []
    if not report.condition_l:
        warnings.append("条件(L)が成り立ちません（出口のないループがあります）: 一意性の主張は保証されません")
        logger.warning(warnings[-1])

    weights = dict(ratios.ratios)

    def excess(s: float) -> float:
        return spectral_radius(_weighted_vertex_matrix(graph, weights, s))[0] - 1.0

    if excess(0.0) <= 0.0:
        warnings.append("s = 0 でスペクトル半径が1です（Perron数は定義されません）")
        return DimensionResult(0.0, excess(0.0) + 1.0, 0, excess(0.0), None, warnings)

    hi = _expand_bracket(excess)
    beta, iterations = _bisect(excess, 0.0, hi)
    numbers, residual = _perron_numbers(graph, weights, beta)
    logger.info(f"Graph dimension {beta} after {iterations} bisection steps")
    return DimensionResult(beta, excess(beta) + 1.0, iterations, residual, numbers, warnings)


def equal_ratio_dimension(graph: GraphModel, ratio: float) -> float:
    """全辺の比が等しい r のとき λ = r^{−β} から β = log λ / log(1/r)."""
    if not 0.0 < ratio < 1.0:
        raise SolverError("比は (0,1) の範囲にある必要があります")
    return math.log(spectral_radius(graph.adjacency_matrix())[0]) / math.log(1.0 / ratio)


def pressure(graph: GraphModel, p: Potential, beta: float) -> float:
    """P(T, −βφ) = log λ(β)、λ(β) は L_{f,β} の行列表現のPerron固有値."""
    from .measure import transfer_matrix

    eigenvalue, _ = spectral_radius(transfer_matrix(graph, p, beta).entries)
    return math.log(eigenvalue)


def topological_entropy(graph: GraphModel) -> float:
    """h(T) = P(T, 0) = log λ(A_E)."""
    return math.log(spectral_radius(graph.adjacency_matrix())[0])


def kms_inverse_temperature(graph: GraphModel, p: Potential) -> DimensionResult:
    """圧力方程式 P(T, −βφ) = 0 の根 β."""
    if p.graph != graph:
        raise SolverError("ポテンシャルのグラフが一致しません")
    if p.minimum <= 1.0:
        raise SolverError(f"min f = {p.minimum} ≤ 1 のため圧力が単調減少になりません")
    warnings: List[str] = []
    report = structure_checks(graph)
    if not report.irreducible:
        raise SolverError("グラフが既約（強連結）ではありません")
    if not report.condition_l:
        warnings.append("条件(L)が成り立ちません（出口のないループがあります）")
        logger.warning(warnings[-1])

    def press(beta: float) -> float:
        return pressure(graph, p, beta)

    if press(0.0) <= 0.0:
        warnings.append("β = 0 で圧力が0です（位相エントロピー0）")
        return DimensionResult(0.0, 1.0, 0, press(0.0), None, warnings)

    hi = _expand_bracket(press)
    beta, iterations = _bisect(press, 0.0, hi)
    residual = press(beta)
    if abs(residual) > RESIDUAL_TOL:
        warnings.append(f"圧力の残差 {residual:.3e} が許容誤差を超えています")

    numbers: Optional[Dict[str, float]] = None
    if p.depth == 1 and beta > 0.0:
        weights = {e: 1.0 / p.table[(e,)] for e in graph.edges}
        numbers, _ = _perron_numbers(graph, weights, beta)
    logger.info(f"KMS inverse temperature {beta} after {iterations} bisection steps")
    return DimensionResult(beta, math.exp(residual), iterations, residual, numbers, warnings)


def entropy_from_scaling(beta: float, tau: float) -> float:
    """h(T) = β log τ（一定のスケーリング τ > 1）."""
    if not tau > 1.0:
        raise SolverError(f"τ = {tau} は1より大きい必要があります")
    if beta < 0.0:
        raise SolverError(f"β = {beta} は0以上である必要があります")
    return beta * math.log(tau)


def _is_primitive(adjacency: np.ndarray) -> bool:
    n = adjacency.shape[0]
    base = (adjacency > 0).astype(np.int64)
    power = base.copy()
    # Wielandt の上界 n²−2n+2
    for _ in range(n * n - 2 * n + 2):
        if np.all(power > 0):
            return True
        power = ((power @ base) > 0).astype(np.int64)
    return bool(np.all(power > 0))


def _cycles_without_exit(graph: GraphModel) -> List[List[str]]:
    simple = nx.DiGraph(graph.to_networkx())
    closed: List[List[str]] = []
    for cycle in nx.simple_cycles(simple):
        # 出口 = 同じ頂点に入る別の辺
        if all(len(graph.edges_with_range(v)) == 1 for v in cycle):
            closed.append(sorted(cycle))
    return closed


def structure_checks(graph: GraphModel) -> StructureReport:
    """既約性・原始性（完全性の代用）・条件(L)."""
    adjacency = graph.adjacency_matrix()
    irreducible = bool(nx.is_strongly_connected(graph.to_networkx()))
    primitive = irreducible and _is_primitive(adjacency)
    closed = _cycles_without_exit(graph)
    notes = [
        "原始性は有限型シフトの完全性（exactness）の同値条件として報告しています",
        "正拡大性は経路空間シフトでは構造的に成り立ちます",
    ]
    for cycle in closed:
        notes.append(f"出口のないループ: {', '.join(cycle)}")
    return StructureReport(irreducible, primitive, not closed, True, notes)

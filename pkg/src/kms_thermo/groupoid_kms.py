"""Deaconu-Renault 亜群のシリンダー双切断が張る畳み込み *-代数、時間発展 α と KMS 検証.

双切断 (σ, τ) は {(σx, |σ|−|τ|, τx) : x ∈ s(σ)E^∞} の指示関数で、
Cuntz-Krieger 生成元では S_σ S_τ* に当たる。
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from .measure import CylinderMeasure
from .potentials import Potential, principality_check, word_birkhoff_sum
from .shift_core import (
    EMPTY_WORD,
    Cylinder,
    GraphModel,
    Word,
    enumerate_cylinders,
    extensions_of,
    word_text,
)

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-15
CONTROL_OFFSET = 0.5


class AlgebraError(ValueError):
    """代数演算の前提違反（グラフ不一致、不正な双切断）."""


@dataclass(frozen=True, order=True)
class Bisection:
    """シリンダー双切断 (σ, τ)。vertex は s(σ) = s(τ)（空語でも頂点を保持する）."""

    out_word: Word
    in_word: Word
    vertex: str

    @property
    def lag(self) -> int:
        return len(self.out_word) - len(self.in_word)

    @property
    def is_diagonal(self) -> bool:
        return self.out_word == self.in_word

    def text(self, graph: GraphModel) -> str:
        out = word_text(graph, self.out_word) or "ε"
        inner = word_text(graph, self.in_word) or "ε"
        return f"({out}, {inner})@{self.vertex}"


def bisection(graph: GraphModel, out_word: Word, in_word: Word, vertex: Optional[str] = None) -> Bisection:
    """検証付きで双切断を作る。両方が空語のとき vertex が必要（1頂点なら省略可）."""
    for word in (out_word, in_word):
        if not graph.is_allowed(word):
            raise AlgebraError(f"許容されない語です: {word_text(graph, word)!r}")
    sources = {graph.source_of(w[-1]) for w in (out_word, in_word) if w}
    if vertex is not None:
        if vertex not in graph.vertices:
            raise AlgebraError(f"未知の頂点: '{vertex}'")
        sources.add(vertex)
    if len(sources) > 1:
        raise AlgebraError(f"s(σ) と s(τ) が一致しません: {sorted(sources)}")
    if not sources:
        if len(graph.vertices) != 1:
            raise AlgebraError("空語どうしの双切断には頂点の指定が必要です")
        sources.add(graph.vertices[0])
    return Bisection(tuple(out_word), tuple(in_word), sources.pop())


def _word_range(graph: GraphModel, word: Word, vertex: str) -> str:
    return graph.range_of(word[0]) if word else vertex


class AlgebraElement:
    """双切断の有限線形結合。係数0の項は持たず、項は正規順序で保持する."""

    __slots__ = ("graph", "_terms")

    def __init__(self, graph: GraphModel, terms: Optional[Mapping[Bisection, complex]] = None) -> None:
        self.graph = graph
        pruned = {b: complex(c) for b, c in sorted((terms or {}).items()) if abs(c) > ZERO_TOL}
        self._terms: Dict[Bisection, complex] = pruned

    @property
    def terms(self) -> Dict[Bisection, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Bisection, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.graph == other.graph and self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def _check(self, other: "AlgebraElement") -> None:
        if self.graph != other.graph:
            raise AlgebraError("異なるグラフ上の元どうしは演算できません")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        terms = dict(self._terms)
        for b, c in other.items():
            terms[b] = terms.get(b, 0j) + c
        return AlgebraElement(self.graph, terms)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1.0)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return convolve(self, other)

    def scale(self, factor: complex) -> "AlgebraElement":
        return AlgebraElement(self.graph, {b: c * factor for b, c in self.items()})

    def describe(self) -> Dict[str, Any]:
        return {
            b.text(self.graph): {"re": c.real, "im": c.imag}
            for b, c in self.items()
        }

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:.6g}·{b.text(self.graph)}" for b, c in self.items())
        return f"AlgebraElement({inner or '0'})"


def element(graph: GraphModel, out_word: Word, in_word: Word, vertex: Optional[str] = None,
            coefficient: complex = 1.0) -> AlgebraElement:
    """単一の双切断 coefficient·(σ, τ)."""
    return AlgebraElement(graph, {bisection(graph, out_word, in_word, vertex): coefficient})


def _product(graph: GraphModel, left: Bisection, right: Bisection) -> Optional[Bisection]:
    """(σ,τ)·(μ,ν)。0 なら None."""
    tau, mu = left.in_word, right.out_word
    if _word_range(graph, tau, left.vertex) != _word_range(graph, mu, right.vertex):
        return None
    if mu[: len(tau)] == tau:
        return Bisection(left.out_word + mu[len(tau):], right.in_word, right.vertex)
    if tau[: len(mu)] == mu:
        return Bisection(left.out_word, right.in_word + tau[len(mu):], left.vertex)
    return None


def convolve(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """畳み込み積（Cuntz-Krieger 関係による双線形拡張）."""
    a._check(b)
    terms: Dict[Bisection, complex] = {}
    for left, c in a.items():
        for right, d in b.items():
            product = _product(a.graph, left, right)
            if product is not None:
                terms[product] = terms.get(product, 0j) + c * d
    return AlgebraElement(a.graph, terms)


def adjoint(a: AlgebraElement) -> AlgebraElement:
    """(σ,τ) ↦ (τ,σ)、係数は複素共役."""
    return AlgebraElement(
        a.graph,
        {Bisection(b.in_word, b.out_word, b.vertex): c.conjugate() for b, c in a.items()},
    )


def _extend(graph: GraphModel, b: Bisection, length: int) -> List[Bisection]:
    if length <= 0:
        return [b]
    return [
        Bisection(b.out_word + w, b.in_word + w, graph.source_of(w[-1]))
        for w in extensions_of(graph, EMPTY_WORD, length, vertex=b.vertex)
    ]


def refine_to_constant_cocycle(a: AlgebraElement, p: Potential) -> AlgebraElement:
    """各 (σ,τ) を長さ k−1 の拡張 w についての和 ∑ (σw, τw) に置き換える."""
    if p.graph != a.graph:
        raise AlgebraError("ポテンシャルのグラフが一致しません")
    if p.depth == 1:
        return a
    terms: Dict[Bisection, complex] = {}
    for b, c in a.items():
        for refined in _extend(a.graph, b, p.depth - 1):
            terms[refined] = terms.get(refined, 0j) + c
    return AlgebraElement(a.graph, terms)


def uniform_refinement(a: AlgebraElement, length: int) -> AlgebraElement:
    """全項を min(|σ|,|τ|) ≥ length まで細分する（G 上の関数としては不変）."""
    terms: Dict[Bisection, complex] = {}
    for b, c in a.items():
        short = min(len(b.out_word), len(b.in_word))
        for refined in _extend(a.graph, b, length - short):
            terms[refined] = terms.get(refined, 0j) + c
    return AlgebraElement(a.graph, terms)


def element_distance(a: AlgebraElement, b: AlgebraElement) -> float:
    """G 上の関数としての差の sup ノルム（共通の細分で係数を比較）."""
    a._check(b)
    length = max((min(len(t.out_word), len(t.in_word)) for t, _ in [*a.items(), *b.items()]), default=0)
    difference = uniform_refinement(a, length) - uniform_refinement(b, length)
    return max((abs(c) for _, c in difference.items()), default=0.0)


def bisection_cocycle(p: Potential, b: Bisection) -> float:
    """細分済み双切断上で一定の c_φ（σ 沿いの Birkhoff 和 − τ 沿いの Birkhoff 和）.

    語が k−1 文字の余白を持たないとき（未細分）は PotentialError になる。
    """
    if not b.out_word and not b.in_word:
        return 0.0
    out_sum = word_birkhoff_sum(p, b.out_word, len(b.out_word) - p.depth + 1)
    in_sum = word_birkhoff_sum(p, b.in_word, len(b.in_word) - p.depth + 1)
    return out_sum - in_sum


def _refined_cocycles(p: Potential, b: Bisection) -> List[Tuple[Bisection, float]]:
    return [(r, bisection_cocycle(p, r)) for r in _extend(p.graph, b, p.depth - 1)]


def conditional_expectation(a: AlgebraElement) -> List[Tuple[Cylinder, complex]]:
    """単位空間への期待値 E: 対角項 (σ,σ) だけを残したシリンダー関数の係数."""
    return [
        (Cylinder(b.out_word, _word_range(a.graph, b.out_word, b.vertex)), c)
        for b, c in a.items()
        if b.is_diagonal
    ]


def state_omega(mu: CylinderMeasure, a: AlgebraElement) -> complex:
    """ω_μ(a) = ∫ E(a) dμ."""
    return sum(
        (c * mu.mass(cyl.word, cyl.vertex) for cyl, c in conditional_expectation(a)),
        0j,
    )


def apply_alpha(a: AlgebraElement, p: Potential, t: complex) -> AlgebraElement:
    """α_t(a): 細分後の各項に e^{itc} を掛ける。t = iβ なら因子は e^{−βc}."""
    refined = refine_to_constant_cocycle(a, p)
    return AlgebraElement(
        a.graph,
        {b: c * cmath.exp(1j * t * bisection_cocycle(p, b)) for b, c in refined.items()},
    )


def kms_defect(mu: CylinderMeasure, p: Potential, beta: float, a: AlgebraElement, b: AlgebraElement) -> float:
    """|ω_μ(a·b) − ω_μ(b·α_{iβ}(a))|."""
    lhs = state_omega(mu, convolve(a, b))
    rhs = state_omega(mu, convolve(b, apply_alpha(a, p, 1j * beta)))
    return abs(lhs - rhs)


def vertex_projection(graph: GraphModel, vertex: str) -> AlgebraElement:
    """P_v = (ε, ε)@v."""
    return element(graph, EMPTY_WORD, EMPTY_WORD, vertex)


def edge_isometry(graph: GraphModel, edge: str) -> AlgebraElement:
    """S_e = (e, ε)."""
    return element(graph, (edge,), EMPTY_WORD)


def unit(graph: GraphModel) -> AlgebraElement:
    """1 = ∑_v P_v."""
    return AlgebraElement(graph, {Bisection(EMPTY_WORD, EMPTY_WORD, v): 1.0 for v in graph.vertices})


def cuntz_krieger_defect(graph: GraphModel) -> float:
    """S_e*S_e = P_{s(e)} と P_v = ∑_{r(e)=v} S_eS_e* からの最大のずれ."""
    worst = 0.0
    for e in graph.edges:
        s_e = edge_isometry(graph, e)
        worst = max(worst, element_distance(adjoint(s_e) * s_e, vertex_projection(graph, graph.source_of(e))))
    for v in graph.vertices:
        total = AlgebraElement(graph)
        for e in graph.edges_with_range(v):
            s_e = edge_isometry(graph, e)
            total = total + s_e * adjoint(s_e)
        worst = max(worst, element_distance(total, vertex_projection(graph, v)))
    return worst


def all_bisections(graph: GraphModel, depth: int) -> List[Bisection]:
    """max(|σ|, |τ|) ≤ depth の双切断をすべて列挙する."""
    by_source: Dict[str, List[Word]] = {v: [EMPTY_WORD] for v in graph.vertices}
    for level in range(1, depth + 1):
        for w in enumerate_cylinders(graph, level):
            by_source[graph.source_of(w[-1])].append(w)
    return [
        Bisection(out, inner, v)
        for v in graph.vertices
        for out in by_source[v]
        for inner in by_source[v]
    ]


def random_element(graph: GraphModel, rng: np.random.Generator, depth: int, size: int = 3,
                   pool: Optional[List[Bisection]] = None) -> AlgebraElement:
    """max(|σ|, |τ|) ≤ depth の双切断 size 個に複素乱数係数を付けた元."""
    if pool is None:
        pool = all_bisections(graph, depth)
    picks = rng.choice(len(pool), size=min(size, len(pool)), replace=False)
    coefficients = rng.normal(size=len(picks)) + 1j * rng.normal(size=len(picks))
    return AlgebraElement(graph, {pool[int(i)]: complex(c) for i, c in zip(picks, coefficients)})


def reduced_bisection(graph: GraphModel, b: Bisection) -> Bisection:
    """σ と τ の共通の末尾 λ を取り除いた双切断（頂点は r(λ_0) に移る）."""
    out, inner = b.out_word, b.in_word
    common = 0
    while common < min(len(out), len(inner)) and out[len(out) - 1 - common] == inner[len(inner) - 1 - common]:
        common += 1
    if common == 0:
        return b
    suffix = out[len(out) - common:]
    return Bisection(out[: len(out) - common], inner[: len(inner) - common], graph.range_of(suffix[0]))


@dataclass
class KMSReport:
    """KMS 条件の網羅的検証結果."""

    beta: float
    depth: int
    tol: float
    max_defect: float
    pair_count: int
    evaluated_pairs: int
    controls: Dict[str, float]
    principal: bool
    passed: bool
    worst_pair: Optional[Tuple[str, str]] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "depth": self.depth,
            "tol": self.tol,
            "max_defect": self.max_defect,
            "pair_count": self.pair_count,
            "evaluated_pairs": self.evaluated_pairs,
            "controls": dict(self.controls),
            "principal": self.principal,
            "passed": self.passed,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "notes": list(self.notes),
        }


def _omega(mu: CylinderMeasure, b: Optional[Bisection]) -> float:
    if b is None or not b.is_diagonal:
        return 0.0
    return mu.mass(b.out_word, b.vertex)


def _pair_defects(
    mu: CylinderMeasure,
    betas: Tuple[float, ...],
    a: Bisection,
    b: Bisection,
    pieces: List[Tuple[Bisection, float]],
) -> List[float]:
    graph = mu.graph
    lhs = _omega(mu, _product(graph, a, b))
    right = [(_omega(mu, _product(graph, b, piece)), c) for piece, c in pieces]
    return [abs(lhs - sum(math.exp(-beta * c) * m for m, c in right)) for beta in betas]


def pair_defect(mu: CylinderMeasure, p: Potential, beta: float, a: Bisection, b: Bisection) -> float:
    """単一双切断どうしの |ω_μ(a·b) − ω_μ(b·α_{iβ}(a))|."""
    return _pair_defects(mu, (beta,), a, b, _refined_cocycles(p, a))[0]


def _sweep(
    mu: CylinderMeasure,
    p: Potential,
    betas: Tuple[float, ...],
    bisections: List[Bisection],
) -> Tuple[List[float], Tuple[Bisection, Bisection], int]:
    # ω(a·b) と ω(b·α(a)) は b* と a の共通末尾を除いた形が一致しない限り 0
    graph = mu.graph
    partners: Dict[Bisection, List[Bisection]] = {}
    for b in bisections:
        key = reduced_bisection(graph, Bisection(b.in_word, b.out_word, b.vertex))
        partners.setdefault(key, []).append(b)
    worst = [0.0] * len(betas)
    worst_pair = (bisections[0], bisections[0])
    evaluated = 0
    for a in bisections:
        pieces = _refined_cocycles(p, a)
        for b in partners.get(reduced_bisection(graph, a), []):
            evaluated += 1
            for i, defect in enumerate(_pair_defects(mu, betas, a, b, pieces)):
                if defect > worst[i]:
                    worst[i] = defect
                    if i == 0:
                        worst_pair = (a, b)
    return worst, worst_pair, evaluated


def kms_verify_suite(mu: CylinderMeasure, p: Potential, beta: float, depth: int, tol: float,
                     max_period: int = 6) -> KMSReport:
    """max(|σ|, |τ|) ≤ depth の単一双切断の全ペアで KMS 欠損の最大値を求める.

    β ± 0.5 での最大欠損を負の対照として併記する。両辺が恒等的に0になるペアは
    評価を省くが、pair_count は全ペア数を数える。

    Args:
        mu: 検証する状態を与えるシリンダー測度
        p: 時間発展を定めるポテンシャル
        beta: 逆温度
        depth: 双切断の語長の上限
        tol: 合格とする最大欠損
        max_period: 主性検査で調べる周期軌道の最大周期

    Returns:
        最大欠損、対照、最悪ペアを持つ KMSReport
    """
    if depth < 0:
        raise AlgebraError("depth は0以上が必要です")
    if p.graph != mu.graph:
        raise AlgebraError("ポテンシャルと測度のグラフが一致しません")
    bisections = all_bisections(mu.graph, depth)
    betas = (beta, beta - CONTROL_OFFSET, beta + CONTROL_OFFSET)
    worst, worst_pair, evaluated = _sweep(mu, p, betas, bisections)
    principal = principality_check(p, max_period).passed
    notes = list(mu.warnings)
    if principal:
        notes.append("c_φ^{-1}(0) は検査した周期軌道の範囲で主的: 一意性と矛盾しません")
    passed = worst[0] <= tol
    logger.info(
        f"KMS sweep over {len(bisections) ** 2} pairs ({evaluated} evaluated) at beta={beta}: "
        f"max defect {worst[0]:.3e}"
    )
    return KMSReport(
        beta=beta,
        depth=depth,
        tol=tol,
        max_defect=worst[0],
        pair_count=len(bisections) ** 2,
        evaluated_pairs=evaluated,
        controls={"beta_minus": worst[1], "beta_plus": worst[2]},
        principal=principal,
        passed=passed,
        worst_pair=(worst_pair[0].text(mu.graph), worst_pair[1].text(mu.graph)),
        notes=notes,
    )


def algebra_self_check(mu: CylinderMeasure, p: Potential, rng: np.random.Generator,
                       trials: int = 100, depth: int = 3) -> Dict[str, float]:
    """乱択した元で *-代数の公理と ω_μ の正値性・α 不変性を検査する."""
    graph = mu.graph
    involution = anti = multiplicative = invariance = 0.0
    positivity = math.inf
    pool = all_bisections(graph, depth)
    for _ in range(trials):
        a = random_element(graph, rng, depth, pool=pool)
        b = random_element(graph, rng, depth, pool=pool)
        t = float(rng.normal())
        involution = max(involution, element_distance(adjoint(adjoint(a)), a))
        anti = max(anti, element_distance(adjoint(a * b), adjoint(b) * adjoint(a)))
        multiplicative = max(
            multiplicative,
            element_distance(apply_alpha(a * b, p, t), apply_alpha(a, p, t) * apply_alpha(b, p, t)),
        )
        invariance = max(invariance, abs(state_omega(mu, apply_alpha(a, p, t)) - state_omega(mu, a)))
        positivity = min(positivity, state_omega(mu, a * adjoint(a)).real)
    return {
        "adjoint_involution": involution,
        "adjoint_anti_multiplicative": anti,
        "alpha_multiplicative": multiplicative,
        "alpha_invariance": invariance,
        "min_positivity": positivity,
    }

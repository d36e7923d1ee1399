"""有限有向グラフの経路空間・シリンダー・シフト写像の実装."""

import logging
from dataclasses import dataclass, field
from math import lcm
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

# 語は辺IDのタプル。経路の規約は s(σ_i) = r(σ_{i+1})
Word = Tuple[str, ...]
EMPTY_WORD: Word = ()


class GraphValidationError(ValueError):
    """グラフ・語・点の検証エラー."""


@dataclass(frozen=True)
class GraphModel:
    """有限有向グラフ E = (E^0, E^1, r, s).

    頂点と辺は辞書順に正規化して保持する。ranges[i], sources[i] は
    edges[i] の値域・始点。
    """

    vertices: Tuple[str, ...]
    edges: Tuple[str, ...]
    ranges: Tuple[str, ...]
    sources: Tuple[str, ...]
    _range_of: Dict[str, str] = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _source_of: Dict[str, str] = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _into: Dict[str, Tuple[str, ...]] = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.vertices:
            raise GraphValidationError("頂点が1つもありません")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphValidationError("頂点IDが重複しています")
        if len(set(self.edges)) != len(self.edges):
            raise GraphValidationError("辺IDが重複しています")
        if not (len(self.edges) == len(self.ranges) == len(self.sources)):
            raise GraphValidationError("edges/ranges/sources の長さが一致しません")
        known = set(self.vertices)
        for edge, rng, src in zip(self.edges, self.ranges, self.sources):
            if rng not in known or src not in known:
                raise GraphValidationError(f"辺 '{edge}' の端点が頂点集合にありません")
            self._range_of[edge] = rng
            self._source_of[edge] = src

        for vertex in self.vertices:
            into = tuple(e for e in self.edges if self._range_of[e] == vertex)
            # シンク禁止: 各頂点から無限経路が続くこと
            if not into:
                raise GraphValidationError(
                    f"頂点 '{vertex}' を値域とする辺がありません（無限経路が存在しない）"
                )
            self._into[vertex] = into

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[Tuple[str, str, str]]) -> "GraphModel":
        """(id, source, range) の列からグラフを構築する（辞書順に正規化）."""
        ordered = sorted(edges, key=lambda item: item[0])
        return cls(
            vertices=tuple(sorted(vertices)),
            edges=tuple(e for e, _, _ in ordered),
            ranges=tuple(r for _, _, r in ordered),
            sources=tuple(s for _, s, _ in ordered),
        )

    def range_of(self, edge: str) -> str:
        """辺の値域 r(e)."""
        try:
            return self._range_of[edge]
        except KeyError:
            raise GraphValidationError(f"未知の辺: '{edge}'") from None

    def source_of(self, edge: str) -> str:
        """辺の始点 s(e)."""
        try:
            return self._source_of[edge]
        except KeyError:
            raise GraphValidationError(f"未知の辺: '{edge}'") from None

    def edges_with_range(self, vertex: str) -> Tuple[str, ...]:
        """r(e) = vertex となる辺（経路 vE^1 の先頭文字候補）."""
        return self._into[vertex]

    def edges_with_source(self, vertex: str) -> Tuple[str, ...]:
        """s(e) = vertex となる辺（e·x の形で前に付けられる辺）."""
        return tuple(e for e in self.edges if self._source_of[e] == vertex)

    def successors(self, edge: str) -> Tuple[str, ...]:
        """edge の直後に置ける辺."""
        return self._into[self.source_of(edge)]

    def is_allowed(self, word: Sequence[str]) -> bool:
        """語が許容経路かどうか."""
        if any(letter not in self._range_of for letter in word):
            return False
        return all(
            self._source_of[word[i]] == self._range_of[word[i + 1]]
            for i in range(len(word) - 1)
        )

    def require_allowed(self, word: Sequence[str]) -> None:
        if not self.is_allowed(word):
            raise GraphValidationError(f"許容されない語です: {word_text(self, tuple(word))!r}")

    def word_range(self, word: Word, vertex: Optional[str] = None) -> str:
        """r(σ)。空語の場合は指定頂点を返す."""
        if word:
            return self.range_of(word[0])
        if vertex is None:
            if len(self.vertices) == 1:
                return self.vertices[0]
            raise GraphValidationError("空語には頂点の指定が必要です")
        return vertex

    def word_source(self, word: Word, vertex: Optional[str] = None) -> str:
        """s(σ)。空語の場合は指定頂点を返す."""
        if word:
            return self.source_of(word[-1])
        return self.word_range(word, vertex)

    def vertex_index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def adjacency_matrix(self) -> np.ndarray:
        """頂点行列 A_{v,w} = #{e : r(e)=v, s(e)=w}（多重辺を数える）."""
        index = self.vertex_index()
        matrix = np.zeros((len(self.vertices), len(self.vertices)))
        for edge, rng, src in zip(self.edges, self.ranges, self.sources):
            matrix[index[rng], index[src]] += 1.0
        return matrix

    def to_networkx(self) -> "nx.MultiDiGraph":
        """s(e) → r(e) 向きの networkx 多重有向グラフ."""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.vertices)
        for edge, rng, src in zip(self.edges, self.ranges, self.sources):
            graph.add_edge(src, rng, key=edge)
        return graph

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e, "source": s, "range": r}
                for e, r, s in zip(self.edges, self.ranges, self.sources)
            ],
        }

    @property
    def single_letter_ids(self) -> bool:
        return all(len(e) == 1 for e in self.edges)


def full_shift(n: int, vertex: str = "v") -> GraphModel:
    """n 文字の全シフト（1頂点に n 本のループ）."""
    if n < 1:
        raise GraphValidationError("文字数は1以上が必要です")
    return GraphModel.build([vertex], [(str(j), vertex, vertex) for j in range(1, n + 1)])


def word_text(graph: GraphModel, word: Word) -> str:
    """語の正規テキスト表現（1文字IDなら連結、それ以外は空白区切り）."""
    return ("" if graph.single_letter_ids else " ").join(word)


def parse_word(graph: GraphModel, text: str) -> Word:
    """テキストを語に変換する."""
    text = text.strip()
    if not text:
        return EMPTY_WORD
    if " " in text:
        word: Word = tuple(text.split())
    elif graph.single_letter_ids:
        word = tuple(text)
    else:
        word = (text,)
    graph.require_allowed(word)
    return word


@dataclass(frozen=True, order=True)
class Cylinder:
    """シリンダー Z(σ)。vertex は r(σ)（空語なら vE^∞ の v）."""

    word: Word
    vertex: str

    @classmethod
    def of(cls, graph: GraphModel, word: Word, vertex: Optional[str] = None) -> "Cylinder":
        graph.require_allowed(word)
        return cls(word, graph.word_range(word, vertex))

    def extensions(self, graph: GraphModel) -> List["Cylinder"]:
        """1文字の許容拡張（Z(σ) の分割）."""
        if self.word:
            nexts = graph.successors(self.word[-1])
        else:
            nexts = graph.edges_with_range(self.vertex)
        return [Cylinder(self.word + (e,), self.vertex) for e in nexts]


def _minimal_period(word: Word) -> Word:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class PathPoint:
    """最終的に周期的な無限経路 preperiod·period·period·….

    構築時に最小周期・最小前周期へ正規化するので、構造的等価が
    無限列としての等価に一致する。
    """

    preperiod: Word
    period: Word

    def __post_init__(self) -> None:
        if not self.period:
            raise GraphValidationError("周期語は空にできません")
        pre = tuple(self.preperiod)
        period = _minimal_period(tuple(self.period))
        while pre and pre[-1] == period[-1]:
            period = (period[-1],) + period[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", period)

    def letter(self, i: int) -> str:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def letters(self) -> Iterator[str]:
        i = 0
        while True:
            yield self.letter(i)
            i += 1

    def prefix(self, n: int) -> Word:
        """先頭 n 文字."""
        return tuple(self.letter(i) for i in range(n))

    def validate(self, graph: GraphModel) -> None:
        """接続（周期の折り返しを含む）を検証する."""
        if not graph.is_allowed(self.preperiod + self.period + self.period):
            raise GraphValidationError(f"許容されない点です: {self}")

    def __str__(self) -> str:
        pre = " ".join(self.preperiod)
        return f"{pre}({' '.join(self.period)})^∞" if pre else f"({' '.join(self.period)})^∞"


def enumerate_cylinders(graph: GraphModel, depth: int) -> List[Word]:
    """長さ depth の許容語を辞書順にすべて列挙する."""
    if depth < 0:
        raise GraphValidationError("depth は0以上が必要です")
    words: List[Word] = [EMPTY_WORD]
    for level in range(depth):
        if level == 0:
            words = [(e,) for e in graph.edges]
        else:
            words = [w + (e,) for w in words for e in graph.successors(w[-1])]
    return words


def extensions_of(graph: GraphModel, word: Word, length: int, vertex: Optional[str] = None) -> List[Word]:
    """word を長さ length まで伸ばした許容語をすべて返す."""
    if len(word) >= length:
        return [word]
    if word:
        words = [word]
    else:
        start = graph.word_range(word, vertex)
        words = [(e,) for e in graph.edges_with_range(start)]
    while len(words[0]) < length:
        words = [w + (e,) for w in words for e in graph.successors(w[-1])]
    return words


def shift_point(x: PathPoint) -> PathPoint:
    """左シフト T((x_k)) = (x_{k+1})."""
    if x.preperiod:
        return PathPoint(x.preperiod[1:], x.period)
    return PathPoint(EMPTY_WORD, x.period[1:] + x.period[:1])


def shift_n(x: PathPoint, n: int) -> PathPoint:
    """T^n(x)."""
    if n < 0:
        raise GraphValidationError("シフト回数は0以上が必要です")
    if n <= len(x.preperiod):
        return PathPoint(x.preperiod[n:], x.period)
    k = (n - len(x.preperiod)) % len(x.period)
    return PathPoint(EMPTY_WORD, x.period[k:] + x.period[:k])


def common_prefix(x: PathPoint, y: PathPoint) -> Optional[Word]:
    """最長共通接頭辞。x = y なら None."""
    # 前周期の後は両方とも lcm 周期なので、この窓で判定が尽きる
    bound = max(len(x.preperiod), len(y.preperiod)) + lcm(len(x.period), len(y.period))
    for i in range(bound):
        if x.letter(i) != y.letter(i):
            return x.prefix(i)
    return None


def periodic_points(graph: GraphModel, max_period: int) -> List[PathPoint]:
    """最小周期 ≤ max_period の周期点を周期・辞書順に1回ずつ返す."""
    if max_period < 1:
        raise GraphValidationError("max_period は1以上が必要です")
    points: List[PathPoint] = []
    for n in range(1, max_period + 1):
        for word in enumerate_cylinders(graph, n):
            closes = graph.source_of(word[-1]) == graph.range_of(word[0])
            if closes and len(_minimal_period(word)) == n:
                points.append(PathPoint(EMPTY_WORD, word))
    logger.debug(f"Found {len(points)} periodic points up to period {max_period}")
    return points


def _split_letters(graph: GraphModel, text: str) -> Word:
    text = text.strip()
    if not text:
        return EMPTY_WORD
    if " " in text or not graph.single_letter_ids:
        return tuple(text.split())
    return tuple(text)


def parse_point(graph: GraphModel, text: str) -> PathPoint:
    """'前周期(周期)' 形式（例: '12(1)', 'a b (c)'）を点に変換する."""
    body = text.strip()
    if not body.endswith(")") or "(" not in body:
        raise GraphValidationError(f"点は '前周期(周期)' の形式で指定してください: {text!r}")
    head, _, tail = body[:-1].rpartition("(")
    point = PathPoint(_split_letters(graph, head), _split_letters(graph, tail))
    point.validate(graph)
    return point

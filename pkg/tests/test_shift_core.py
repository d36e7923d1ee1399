"""Tests for graph path spaces, cylinders and the shift map."""

import numpy as np
import pytest

from kms_thermo.shift_core import (
    Cylinder,
    GraphModel,
    GraphValidationError,
    PathPoint,
    common_prefix,
    enumerate_cylinders,
    extensions_of,
    full_shift,
    parse_point,
    parse_word,
    periodic_points,
    shift_n,
    shift_point,
    word_text,
)


def two_vertex_graph() -> GraphModel:
    return GraphModel.build(["a", "b"], [("x", "a", "a"), ("y", "b", "a"), ("z", "a", "b")])


class TestGraphModel:
    """グラフモデルのテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される初期化処理"""
        self.full = full_shift(2)
        self.graph = two_vertex_graph()

    def test_full_shift(self):
        """全シフトの構築のテスト"""
        assert self.full.vertices == ("v",)
        assert self.full.edges == ("1", "2")
        assert self.full.successors("1") == ("1", "2")

    def test_sink_rejected(self):
        """値域にならない頂点（シンク）を拒否するテスト"""
        with pytest.raises(GraphValidationError):
            GraphModel.build(["a", "b"], [("x", "a", "a")])

    def test_unknown_endpoint_rejected(self):
        """未知の端点を持つ辺を拒否するテスト"""
        with pytest.raises(GraphValidationError):
            GraphModel.build(["a"], [("x", "a", "c")])

    def test_adjacency_matrix(self):
        """頂点行列 A[v,w] = #{e : r(e)=v, s(e)=w} のテスト"""
        np.testing.assert_array_equal(self.graph.adjacency_matrix(), [[1.0, 1.0], [1.0, 0.0]])

    def test_allowed_words(self):
        """許容語の判定のテスト"""
        assert self.graph.is_allowed(("x", "y"))
        assert self.graph.is_allowed(("y", "z"))
        assert not self.graph.is_allowed(("x", "z"))
        assert not self.graph.is_allowed(("w",))
        assert self.graph.is_allowed(())

    def test_edges_with_range_and_source(self):
        """頂点に入る辺・頂点から出る辺のテスト"""
        assert self.graph.edges_with_range("a") == ("x", "y")
        assert self.graph.edges_with_source("a") == ("x", "z")

    def test_to_networkx(self):
        """networkx 多重有向グラフへの変換のテスト"""
        g = self.graph.to_networkx()
        assert g.number_of_nodes() == 2
        assert g.number_of_edges() == 3
        assert g.has_edge("b", "a", key="y")


class TestWords:
    """語とシリンダーのテストクラス"""

    def setup_method(self):
        self.full = full_shift(2)
        self.graph = two_vertex_graph()

    def test_enumerate_cylinders(self):
        """長さ2の語の辞書順列挙のテスト"""
        assert enumerate_cylinders(self.full, 2) == [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")]
        assert enumerate_cylinders(self.full, 0) == [()]

    def test_enumerate_respects_graph(self):
        """グラフの接続を守った列挙のテスト"""
        words = enumerate_cylinders(self.graph, 2)
        assert all(self.graph.is_allowed(w) for w in words)
        assert ("x", "z") not in words
        assert words == [("x", "x"), ("x", "y"), ("y", "z"), ("z", "x"), ("z", "y")]

    def test_extensions_of(self):
        """語の拡張のテスト"""
        assert len(extensions_of(self.full, ("1",), 3)) == 4
        assert extensions_of(self.graph, (), 1, vertex="b") == [("z",)]

    def test_cylinder_extensions(self):
        """シリンダーの1文字分割のテスト"""
        cylinder = Cylinder.of(self.graph, (), "a")
        assert [c.word for c in cylinder.extensions(self.graph)] == [("x",), ("y",)]

    def test_parse_and_text(self):
        """語のテキスト変換のテスト"""
        assert parse_word(self.full, "12") == ("1", "2")
        assert parse_word(self.full, "1 2") == ("1", "2")
        assert word_text(self.full, ("1", "2")) == "12"
        with pytest.raises(GraphValidationError):
            parse_word(self.graph, "xz")


class TestPathPoint:
    """最終的に周期的な点のテストクラス"""

    def setup_method(self):
        self.full = full_shift(2)

    def test_canonical_form(self):
        """最小周期・最小前周期への正規化のテスト"""
        assert PathPoint(("1",), ("1", "1")) == PathPoint((), ("1",))
        assert PathPoint(("2", "1"), ("2", "1")) == PathPoint((), ("2", "1"))
        assert PathPoint(("1", "2"), ("1",)).preperiod == ("1", "2")

    def test_empty_period_rejected(self):
        """空の周期語を拒否するテスト"""
        with pytest.raises(GraphValidationError):
            PathPoint(("1",), ())

    def test_shift(self):
        """シフト写像のテスト"""
        assert shift_point(PathPoint(("2",), ("1",))) == PathPoint((), ("1",))
        assert shift_n(PathPoint((), ("1", "2")), 3) == PathPoint((), ("2", "1"))
        assert shift_n(PathPoint(("2", "2"), ("1",)), 2) == PathPoint((), ("1",))

    def test_common_prefix(self):
        """最長共通接頭辞のテスト"""
        x = PathPoint(("1", "2"), ("1",))
        y = PathPoint(("1", "1"), ("2",))
        assert common_prefix(x, y) == ("1",)
        assert common_prefix(x, x) is None
        assert common_prefix(PathPoint((), ("1",)), PathPoint((), ("1", "1"))) is None

    def test_periodic_points(self):
        """周期点の列挙のテスト"""
        points = periodic_points(self.full, 2)
        assert len(points) == 4
        assert PathPoint((), ("1", "2")) in points
        assert PathPoint((), ("2", "1")) in points

    def test_parse_point(self):
        """点のテキスト表記の解析のテスト"""
        assert parse_point(self.full, "12(1)") == PathPoint(("1", "2"), ("1",))
        assert parse_point(self.full, "(2)") == PathPoint((), ("2",))
        with pytest.raises(GraphValidationError):
            parse_point(self.full, "12")

    def test_validate_rejects_disallowed(self):
        """許容されない点の検出のテスト"""
        graph = two_vertex_graph()
        with pytest.raises(GraphValidationError):
            PathPoint(("x",), ("z",)).validate(graph)
        PathPoint((), ("y", "z")).validate(graph)

"""Tests for the Moran, Perron and pressure-equation solvers."""

import math

import numpy as np
import pytest
from scipy import linalg

from kms_thermo.dimension import (
    SolverError,
    entropy_from_scaling,
    equal_ratio_dimension,
    graph_dimension,
    kms_inverse_temperature,
    moran_dimension,
    pressure,
    spectral_radius,
    structure_checks,
    topological_entropy,
)
from kms_thermo.potentials import Potential, RatioList
from kms_thermo.shift_core import GraphModel, full_shift

GOLDEN = (1 + math.sqrt(5)) / 2


def two_vertex_graph() -> GraphModel:
    return GraphModel.build(["a", "b"], [("x", "a", "a"), ("y", "b", "a"), ("z", "a", "b")])


class TestSpectralRadius:
    """Perron固有値のテストクラス"""

    def test_golden_ratio(self):
        """[[1,1],[1,0]] の固有値が黄金比になるテスト"""
        eigenvalue, vector = spectral_radius([[1.0, 1.0], [1.0, 0.0]])
        assert eigenvalue == pytest.approx(GOLDEN, abs=1e-12)
        assert vector.sum() == pytest.approx(1.0)
        assert np.all(vector > 0)

    def test_matches_dense_eigensolver(self):
        """scipy.linalg の固有値との一致テスト"""
        rng = np.random.default_rng(7)
        matrix = rng.uniform(0.1, 1.0, size=(5, 5))
        eigenvalue, _ = spectral_radius(matrix)
        assert eigenvalue == pytest.approx(max(abs(linalg.eigvals(matrix))), rel=1e-10)

    def test_periodic_matrix(self):
        """周期的な既約行列でも収束するテスト"""
        eigenvalue, vector = spectral_radius([[0.0, 1.0], [1.0, 0.0]])
        assert eigenvalue == pytest.approx(1.0)
        np.testing.assert_allclose(vector, [0.5, 0.5])

    def test_reducible_rejected(self):
        """可約行列を拒否するテスト"""
        with pytest.raises(SolverError):
            spectral_radius([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(SolverError):
            spectral_radius([[1.0, -1.0], [1.0, 1.0]])


class TestMoran:
    """Moran方程式のテストクラス"""

    def test_sierpinski(self):
        """比 1/2 ×3 で log3/log2 になるテスト"""
        result = moran_dimension([0.5, 0.5, 0.5])
        assert result.beta == pytest.approx(math.log(3) / math.log(2), abs=1e-12)
        assert abs(result.residual) < 1e-10

    @pytest.mark.parametrize("n,s", [(2, 1.0), (3, 2.0), (4, 0.5)])
    def test_equal_ratios(self, n, s):
        """r = n^{-1/s} で次元 s になるテスト"""
        result = moran_dimension([n ** (-1.0 / s)] * n)
        assert result.beta == pytest.approx(s, abs=1e-10)

    def test_inverse_e(self):
        """比 1/e のとき次元 log n になるテスト"""
        assert moran_dimension([math.exp(-1.0)] * 5).beta == pytest.approx(math.log(5), abs=1e-10)

    def test_invalid(self):
        """比が1つ・範囲外の場合のテスト"""
        with pytest.raises(SolverError):
            moran_dimension([0.5])
        with pytest.raises(SolverError):
            moran_dimension([0.5, 1.5])


class TestGraphDimension:
    """グラフの次元とPerron数のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される初期化処理"""
        self.graph = two_vertex_graph()

    def test_equal_ratio(self):
        """全辺の比 1/2 で β = log φ / log 2 になるテスト"""
        ratios = RatioList({"x": 0.5, "y": 0.5, "z": 0.5})
        result = graph_dimension(self.graph, ratios)
        expected = math.log(GOLDEN) / math.log(2)
        assert result.beta == pytest.approx(expected, abs=1e-10)
        assert equal_ratio_dimension(self.graph, 0.5) == pytest.approx(expected, abs=1e-10)
        assert result.residual <= 1e-8

    def test_perron_numbers(self):
        """q_v^s = ∑_{r(e)=v} r_e^s q_{s(e)}^s を満たすテスト"""
        ratios = RatioList({"x": 0.5, "y": 0.4, "z": 0.3})
        result = graph_dimension(self.graph, ratios)
        q = result.perron_numbers
        s = result.beta
        assert q is not None
        for v in self.graph.vertices:
            rhs = sum(
                ratios.ratios[e] ** s * q[self.graph.source_of(e)] ** s
                for e in self.graph.edges_with_range(v)
            )
            assert q[v] ** s == pytest.approx(rhs, abs=1e-8)

    def test_full_shift_matches_moran(self):
        """1頂点グラフでは Moran 方程式と一致するテスト"""
        ratios = RatioList({"1": 0.5, "2": 0.25, "3": 0.25})
        result = graph_dimension(full_shift(3), ratios)
        assert result.beta == pytest.approx(moran_dimension(ratios).beta, abs=1e-10)
        assert result.beta == pytest.approx(1.0, abs=1e-10)

    def test_cycle_without_exit(self):
        """出口のないループでは警告付きで β = 0 になるテスト"""
        graph = GraphModel.build(["a", "b"], [("x", "a", "b"), ("y", "b", "a")])
        result = graph_dimension(graph, RatioList({"x": 0.5, "y": 0.5}))
        assert result.beta == 0.0
        assert result.perron_numbers is None
        assert len(result.warnings) == 2

    def test_reducible_rejected(self):
        """強連結でないグラフを拒否するテスト"""
        graph = GraphModel.build(["a", "b"], [("x", "a", "a"), ("y", "b", "b")])
        with pytest.raises(SolverError):
            graph_dimension(graph, RatioList({"x": 0.5, "y": 0.5}))


class TestPressure:
    """圧力方程式のテストクラス"""

    def test_pressure_at_zero(self):
        """P(T, 0) = log λ(A) のテスト"""
        graph = two_vertex_graph()
        p = Potential.from_ratios(graph, RatioList({"x": 0.5, "y": 0.4, "z": 0.3}))
        assert pressure(graph, p, 0.0) == pytest.approx(math.log(GOLDEN), abs=1e-10)
        assert topological_entropy(graph) == pytest.approx(math.log(GOLDEN), abs=1e-10)

    def test_three_solvers_agree(self):
        """乱択した比リストで Moran・Perron・圧力方程式が一致するテスト"""
        rng = np.random.default_rng(2024)
        graph = full_shift(3)
        for _ in range(10):
            values = rng.uniform(0.05, 0.3, size=3)
            ratios = RatioList({str(i + 1): float(r) for i, r in enumerate(values)})
            moran = moran_dimension(ratios).beta
            perron = graph_dimension(graph, ratios).beta
            kms = kms_inverse_temperature(graph, Potential.from_ratios(graph, ratios)).beta
            assert perron == pytest.approx(moran, abs=1e-8)
            assert kms == pytest.approx(moran, abs=1e-8)

    def test_graph_pressure_matches_perron(self):
        """多頂点グラフでも圧力の根が Perron の次元と一致するテスト"""
        graph = two_vertex_graph()
        ratios = RatioList({"x": 0.5, "y": 0.4, "z": 0.3})
        perron = graph_dimension(graph, ratios)
        kms = kms_inverse_temperature(graph, Potential.from_ratios(graph, ratios))
        assert kms.beta == pytest.approx(perron.beta, abs=1e-8)
        assert kms.perron_numbers is not None

    def test_depth_two_potential(self):
        """深さ2のポテンシャルで圧力が0になるテスト"""
        graph = full_shift(2)
        table = {("1", "1"): 2.0, ("1", "2"): 3.0, ("2", "1"): 4.0, ("2", "2"): 5.0}
        p = Potential(graph, 2, table)
        result = kms_inverse_temperature(graph, p)
        assert 0.0 < result.beta < 1.0
        assert pressure(graph, p, result.beta) == pytest.approx(0.0, abs=1e-10)

    def test_min_f_at_most_one(self):
        """min f ≤ 1 を拒否するテスト"""
        graph = full_shift(2)
        with pytest.raises(SolverError):
            kms_inverse_temperature(graph, Potential.constant(graph, 1.0))


class TestEntropyAndStructure:
    """エントロピーと構造チェックのテストクラス"""

    def test_entropy(self):
        """h(T) = log n と h = β log τ のテスト"""
        assert topological_entropy(full_shift(3)) == pytest.approx(math.log(3))
        beta = math.log(3) / math.log(2)
        assert entropy_from_scaling(beta, 2.0) == pytest.approx(math.log(3))
        with pytest.raises(SolverError):
            entropy_from_scaling(1.0, 1.0)

    def test_structure_full_shift(self):
        """全シフトは既約・原始的で条件(L)を満たすテスト"""
        report = structure_checks(full_shift(2))
        assert report.irreducible and report.primitive and report.condition_l

    def test_structure_cycle(self):
        """出口のないループのテスト"""
        graph = GraphModel.build(["a", "b"], [("x", "a", "b"), ("y", "b", "a")])
        report = structure_checks(graph)
        assert report.irreducible
        assert not report.primitive
        assert not report.condition_l
        assert report.to_dict()["condition_l"] is False

"""Tests for the Sierpinski octafold."""

import math
from fractions import Fraction

import pytest

from kms_thermo.octafold import (
    FACES,
    CellPoint,
    Face,
    Octafold,
    OctafoldAddress,
    OctafoldError,
    all_cells,
    euclidean,
    octafold_cell_measure,
    octafold_dimension,
    octafold_entropy,
    octafold_measure_scaling,
    octafold_midpoints,
    octafold_scaling_probe,
    octafold_shift,
    straddle_configuration,
    within_cell_pair,
)


class TestGeometry:
    """面とセルの幾何のテストクラス"""

    def test_faces(self):
        """交互4面の符号のテスト"""
        assert [f.signs for f in FACES] == [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
        assert FACES[1].label() == "+--"

    def test_invalid_address(self):
        """交互面でない面・不正な文字を拒否するテスト"""
        with pytest.raises(OctafoldError):
            OctafoldAddress(Face((1, 1, -1)), ())
        with pytest.raises(OctafoldError):
            OctafoldAddress(FACES[0], (4,))

    def test_invalid_coordinates(self):
        """重心座標の検証テスト"""
        with pytest.raises(OctafoldError):
            CellPoint(OctafoldAddress(FACES[0]), (Fraction(1), Fraction(1), Fraction(0)))

    def test_euclidean(self):
        """セルの角の座標のテスト"""
        corner = CellPoint(OctafoldAddress(FACES[0], (1, 2)), (Fraction(0), Fraction(1), Fraction(0)))
        # f_1(f_2(e_2)) = (e_1 + e_2)/2
        assert euclidean(corner) == (Fraction(1, 2), Fraction(1, 2), Fraction(0))


class TestShift:
    """写像 T のテストクラス"""

    def setup_method(self):
        """各テストメソッドの前に実行される初期化処理"""
        self.octafold = Octafold()

    def test_transition_table(self):
        """頂点 e_1 を共有する面への遷移のテスト"""
        target, perm = self.octafold.transition(FACES[0], 1)
        assert target == FACES[1]
        assert perm == (0, 2, 1)

    def test_shift(self):
        """T(F0, 111) = ((+,−,−), 11) のテスト"""
        image = octafold_shift(OctafoldAddress(FACES[0], (1, 1, 1)))
        assert image == OctafoldAddress(Face((1, -1, -1)), (1, 1))

    def test_shift_permutes_letters(self):
        """残りの語に置換が掛かるテスト"""
        image = octafold_shift(OctafoldAddress(FACES[0], (1, 2, 3)))
        assert image == OctafoldAddress(FACES[1], (3, 2))

    def test_zero_cell_rejected(self):
        """面全体は切断ではないテスト"""
        with pytest.raises(OctafoldError):
            octafold_shift(OctafoldAddress(FACES[0]))

    def test_midpoints(self):
        """12個の中点の像が −ε_jε_k e_l になるテスト"""
        rows = octafold_midpoints()
        assert len(rows) == 12
        assert all(row["matches"] for row in rows)
        first = rows[0]
        assert first["face"] == "+++"
        assert first["image"] == ["0", "0", "-1"]


class TestMeasure:
    """Hausdorff測度のテストクラス"""

    def test_cell_measure(self):
        """μ(C_w) = (1/4)·3^{-|w|} のテスト"""
        assert octafold_cell_measure(OctafoldAddress(FACES[2], (1, 3))) == Fraction(1, 36)
        assert sum(octafold_cell_measure(c) for c in all_cells(2)) == 1

    def test_measure_scaling(self):
        """深さ8までの全セルで μ(TC) = 3μ(C) のテスト"""
        result = octafold_measure_scaling(8)
        assert result["passed"]
        assert result["checked"] == 4 * sum(3 ** d for d in range(1, 9))
        assert result["failures"] == []


class TestScaling:
    """局所スケーリングのテストクラス"""

    def test_within_cell(self):
        """1-セル内では比が2になるテスト"""
        scaling = octafold_scaling_probe(*within_cell_pair())
        assert scaling.ratio_squared == 4
        assert scaling.ratio == pytest.approx(2.0)
        assert scaling.notes == []

    def test_across_midpoint(self):
        """中点をはさむと比が一定でなくなるテスト"""
        x, y, z = straddle_configuration()
        scaling = octafold_scaling_probe(y, z, anchor=x)
        assert scaling.ratio_squared == Fraction(8, 3)
        assert scaling.radial_ratio_squared == 8
        assert scaling.radial_ratio == pytest.approx(2 * math.sqrt(2), abs=1e-12)
        assert len(scaling.notes) == 1

    def test_same_point_rejected(self):
        """同じ点どうしを拒否するテスト"""
        y, _ = within_cell_pair()
        with pytest.raises(OctafoldError):
            octafold_scaling_probe(y, y)


class TestDimension:
    """次元とエントロピーのテストクラス"""

    def test_dimension(self):
        """β = log 3 / log 2 のテスト"""
        assert octafold_dimension().beta == pytest.approx(math.log(3) / math.log(2), abs=1e-12)

    def test_entropy(self):
        """h(T) = log 3 のテスト"""
        assert octafold_entropy() == pytest.approx(math.log(3), abs=1e-12)

"""Sierpinski オクタフォールド: 正八面体の交互の4面に貼った4枚のガスケットと写像 T.

面 F の 1-セル f_j(F) を、頂点 v_j を共有するもう一方の面 G(F,j) へ
アフィンに写す。座標はすべて Fraction で厳密に扱う。
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Tuple

from .dimension import DimensionResult, entropy_from_scaling, moran_dimension

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, Fraction, Fraction]
Barycentric = Tuple[Fraction, Fraction, Fraction]
Permutation = Tuple[int, int, int]  # 0始まりの添字 i ↦ perm[i]

LETTERS = (1, 2, 3)
CELL_RATIO = Fraction(1, 2)
FACE_MASS = Fraction(1, 4)


class OctafoldError(ValueError):
    """オクタフォールドのアドレス・点の検証エラー."""


@dataclass(frozen=True, order=True)
class Face:
    """符号 (ε1, ε2, ε3)（ε1ε2ε3 = +1）で決まる交互面。頂点 j は ε_j e_j."""

    signs: Tuple[int, int, int]

    @property
    def vertices(self) -> Tuple[Vector, Vector, Vector]:
        return tuple(_axis(j, self.signs[j]) for j in range(3))  # type: ignore[return-value]

    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


def _axis(j: int, sign: int) -> Vector:
    return tuple(Fraction(sign) if i == j else Fraction(0) for i in range(3))  # type: ignore[return-value]


FACES: Tuple[Face, ...] = tuple(
    Face(signs) for signs in sorted(product((1, -1), repeat=3), reverse=True) if math.prod(signs) == 1
)


@dataclass(frozen=True)
class OctafoldAddress:
    """面とセルを選ぶ語（文字 1,2,3 は面の頂点の方向）。空語は面全体."""

    face: Face
    word: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.face not in FACES:
            raise OctafoldError(f"交互面ではありません: {self.face.signs}")
        if any(letter not in LETTERS for letter in self.word):
            raise OctafoldError(f"語の文字は 1,2,3 のみです: {self.word}")

    def __str__(self) -> str:
        return f"{self.face.label()}:{''.join(map(str, self.word)) or 'ε'}"


@dataclass(frozen=True)
class CellPoint:
    """セル内の点（セルの角 f_w(v_i) に関する重心座標）."""

    address: OctafoldAddress
    coords: Barycentric

    def __post_init__(self) -> None:
        if sum(self.coords) != 1 or any(c < 0 for c in self.coords):
            raise OctafoldError(f"重心座標が不正です: {self.coords}")


def _cell_to_face(word: Tuple[int, ...], coords: Barycentric) -> Barycentric:
    # f_w = f_{w1}∘…∘f_{wn}、f_i(λ) = λ/2 + e_i/2
    lam = list(coords)
    for letter in reversed(word):
        lam = [c * CELL_RATIO for c in lam]
        lam[letter - 1] += CELL_RATIO
    return (lam[0], lam[1], lam[2])


def euclidean(point: CellPoint) -> Vector:
    """R^3 での厳密な座標."""
    lam = _cell_to_face(point.address.word, point.coords)
    vertices = point.address.face.vertices
    return tuple(sum(lam[i] * vertices[i][axis] for i in range(3)) for axis in range(3))  # type: ignore[return-value]


def squared_distance(a: Vector, b: Vector) -> Fraction:
    return sum(((x - y) ** 2 for x, y in zip(a, b)), Fraction(0))


class Octafold:
    """面の幾何から遷移表 (G(F,j), π_{F,j}) を導出して保持する."""

    def __init__(self) -> None:
        self._check_incidence()
        self.table: Dict[Tuple[Face, int], Tuple[Face, Permutation]] = {}
        for face in FACES:
            for j in LETTERS:
                self.table[(face, j)] = self._derive(face, j - 1)
        mismatches = [m for m in self.midpoints() if not m["matches"]]
        if mismatches:
            raise OctafoldError(f"遷移表が中点公式と一致しません: {mismatches[0]}")
        logger.debug(f"Octafold transition table derived for {len(self.table)} cells")

    @staticmethod
    def _check_incidence() -> None:
        for f, g in combinations(FACES, 2):
            shared = set(f.vertices) & set(g.vertices)
            if len(shared) != 1:
                raise OctafoldError(f"面 {f.label()} と {g.label()} の共有頂点が {len(shared)} 個です")
        counts: Dict[Vector, int] = {}
        for face in FACES:
            for v in face.vertices:
                counts[v] = counts.get(v, 0) + 1
        if len(counts) != 6 or any(n != 2 for n in counts.values()):
            raise OctafoldError("各八面体頂点はちょうど2面に属する必要があります")

    @staticmethod
    def _other_face(face: Face, vertex: Vector) -> Face:
        return next(g for g in FACES if g != face and vertex in g.vertices)

    def _derive(self, face: Face, j: int) -> Tuple[Face, Permutation]:
        target = self._other_face(face, face.vertices[j])
        perm = [0, 0, 0]
        perm[j] = j
        for k in range(3):
            if k == j:
                continue
            # 中点 m_jk の像 = G(F,j) と G(F,k) の共有頂点
            other = self._other_face(face, face.vertices[k])
            common = (set(target.vertices) & set(other.vertices)).pop()
            perm[k] = target.vertices.index(common)
        return target, (perm[0], perm[1], perm[2])

    def transition(self, face: Face, letter: int) -> Tuple[Face, Permutation]:
        return self.table[(face, letter)]

    def shift(self, address: OctafoldAddress) -> OctafoldAddress:
        """T(F, j·w) = (G(F,j), π_{F,j}(w))."""
        if not address.word:
            raise OctafoldError("0-セル（面全体）は T の切断ではありません")
        target, perm = self.transition(address.face, address.word[0])
        return OctafoldAddress(target, tuple(perm[letter - 1] + 1 for letter in address.word[1:]))

    def map_point(self, point: CellPoint) -> CellPoint:
        """T をセル内の点に適用する（角 i は角 π(i) へ）."""
        image = self.shift(point.address)
        _, perm = self.transition(point.address.face, point.address.word[0])
        coords = [Fraction(0)] * 3
        for i in range(3):
            coords[perm[i]] = point.coords[i]
        return CellPoint(image, (coords[0], coords[1], coords[2]))

    def midpoints(self) -> List[Dict[str, Any]]:
        """12個の中点 .5(ε_j e_j + ε_k e_k) の像を表と公式 −ε_jε_k e_l で比べる."""
        rows: List[Dict[str, Any]] = []
        for face in FACES:
            for j, k in combinations(range(3), 2):
                l = 3 - j - k
                coords = [Fraction(0)] * 3
                coords[k] = Fraction(1)
                point = CellPoint(OctafoldAddress(face, (j + 1,)), (coords[0], coords[1], coords[2]))
                midpoint = euclidean(point)
                image = euclidean(self.map_point(point))
                expected = _axis(l, -face.signs[j] * face.signs[k])
                rows.append({
                    "face": face.label(),
                    "edge": [j + 1, k + 1],
                    "midpoint": [str(c) for c in midpoint],
                    "image": [str(c) for c in image],
                    "formula": [str(c) for c in expected],
                    "matches": image == expected,
                })
        return rows


_DEFAULT: Optional[Octafold] = None


def default_octafold() -> Octafold:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Octafold()
    return _DEFAULT


def octafold_shift(address: OctafoldAddress) -> OctafoldAddress:
    return default_octafold().shift(address)


def octafold_cell_measure(address: OctafoldAddress) -> Fraction:
    """正規化Hausdorff測度 (1/4)·3^{−|w|}."""
    return FACE_MASS / 3 ** len(address.word)


def octafold_midpoints() -> List[Dict[str, Any]]:
    return default_octafold().midpoints()


def all_cells(depth: int) -> List[OctafoldAddress]:
    return [OctafoldAddress(face, word) for face in FACES for word in product(LETTERS, repeat=depth)]


def octafold_measure_scaling(max_depth: int = 8) -> Dict[str, Any]:
    """深さ 1..max_depth の全セルで μ(TC) = 3μ(C) を厳密に確かめる."""
    octafold = default_octafold()
    checked = 0
    failures: List[str] = []
    for depth in range(1, max_depth + 1):
        for cell in all_cells(depth):
            checked += 1
            if octafold_cell_measure(octafold.shift(cell)) != 3 * octafold_cell_measure(cell):
                failures.append(str(cell))
    return {"max_depth": max_depth, "checked": checked, "failures": failures[:10], "passed": not failures}


@dataclass
class ScalingProbe:
    """ρ(Ty,Tz)/ρ(y,z)。anchor を与えたときは ρ(Ty,Tz)/ρ(x,y) も併記する."""

    ratio_squared: Fraction
    radial_ratio_squared: Optional[Fraction] = None
    notes: List[str] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return math.sqrt(self.ratio_squared)

    @property
    def radial_ratio(self) -> Optional[float]:
        if self.radial_ratio_squared is None:
            return None
        return math.sqrt(self.radial_ratio_squared)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ratio": self.ratio,
            "ratio_squared": str(self.ratio_squared),
            "radial_ratio": self.radial_ratio,
            "radial_ratio_squared": str(self.radial_ratio_squared) if self.radial_ratio_squared is not None else None,
            "notes": list(self.notes),
        }


def octafold_scaling_probe(y: CellPoint, z: CellPoint, anchor: Optional[CellPoint] = None) -> ScalingProbe:
    """2点を T で写した前後のユークリッド距離の比."""
    octafold = default_octafold()
    before = squared_distance(euclidean(y), euclidean(z))
    if before == 0:
        raise OctafoldError("同じ点どうしでは比が定義されません")
    after = squared_distance(euclidean(octafold.map_point(y)), euclidean(octafold.map_point(z)))
    result = ScalingProbe(after / before)
    if anchor is not None:
        radial = squared_distance(euclidean(anchor), euclidean(y))
        if radial == 0:
            raise OctafoldError("anchor と y が一致しています")
        result.radial_ratio_squared = after / radial
    if y.address.word[:1] != z.address.word[:1] or y.address.face != z.address.face:
        result.notes.append("2点は中点をはさんで別の 1-セルにあります")
    return result


def within_cell_pair(face: Face = FACES[0], letter: int = 1) -> Tuple[CellPoint, CellPoint]:
    """同じ 1-セル内部の2点."""
    address = OctafoldAddress(face, (letter,))
    y = CellPoint(address, (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    z = CellPoint(address, (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)))
    return y, z


def straddle_configuration(h: Fraction = Fraction(1, 4), face: Face = FACES[0]) -> Tuple[CellPoint, CellPoint, CellPoint]:
    """中点 x = m_12 と、x から e_1 方向（セル1）と m_23 方向（セル2）に比 h だけ進んだ y, z."""
    if not 0 < h <= 1:
        raise OctafoldError(f"h = {h} は (0, 1] の範囲外です")
    x = CellPoint(OctafoldAddress(face, (1,)), (Fraction(0), Fraction(1), Fraction(0)))
    y = CellPoint(OctafoldAddress(face, (1,)), (h, 1 - h, Fraction(0)))
    z = CellPoint(OctafoldAddress(face, (2,)), (1 - h, Fraction(0), h))
    return x, y, z


def octafold_dimension() -> DimensionResult:
    """3つの比 1/2 の Moran 方程式: β = log 3 / log 2."""
    return moran_dimension([float(CELL_RATIO)] * 3)


def octafold_entropy() -> float:
    """h(T) = β log 2 = log 3."""
    return entropy_from_scaling(octafold_dimension().beta, 1 / float(CELL_RATIO))

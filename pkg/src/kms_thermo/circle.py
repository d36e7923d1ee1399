"""円周の拡大被覆写像 T(x) = ∫_0^x f(t)dt mod 1 と、その準不変性・局所スケーリングの検証."""

import ast
import logging
import math
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from scipy import integrate, optimize

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10
INVERSE_XTOL = 1e-12
DEGREE_TOL = 1e-10
PERIODIC_TOL = 1e-10
SECTION_TOL = 1e-6
MIN_SAMPLES = 4096

_BINARY: Dict[type, Callable[[float, float], float]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY: Dict[type, Callable[[float], float]] = {
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_FUNCTIONS: Dict[str, Callable[[float], float]] = {"sin": math.sin, "cos": math.cos}
_CONSTANTS: Dict[str, float] = {"pi": math.pi}


class CircleMapError(ValueError):
    """重み関数 f・区間・分枝の検証エラー."""


def _validate(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise CircleMapError(f"数値以外の定数は使えません: {node.value!r}")
    elif isinstance(node, ast.Name):
        if node.id != "t" and node.id not in _CONSTANTS:
            raise CircleMapError(f"未知の名前: '{node.id}'（使えるのは t, pi）")
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINARY:
            raise CircleMapError(f"使えない演算子: {type(node.op).__name__}")
        _validate(node.left)
        _validate(node.right)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNARY:
            raise CircleMapError(f"使えない単項演算子: {type(node.op).__name__}")
        _validate(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise CircleMapError("使える関数は sin, cos のみです")
        if len(node.args) != 1 or node.keywords:
            raise CircleMapError(f"{node.func.id} は引数を1つ取ります")
        _validate(node.args[0])
    else:
        raise CircleMapError(f"使えない構文: {type(node).__name__}")


def _evaluate(node: ast.AST, t: float) -> float:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, t)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return t if node.id == "t" else _CONSTANTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINARY[type(node.op)](_evaluate(node.left, t), _evaluate(node.right, t))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_evaluate(node.operand, t))
    assert isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
    return _FUNCTIONS[node.func.id](_evaluate(node.args[0], t))


def parse_weight(expression: str) -> Callable[[float], float]:
    """t の式（定数、pi、+ − * / **、sin、cos）を関数に変換する."""
    try:
        tree = ast.parse(expression.strip(), mode="eval")
    except SyntaxError as exc:
        raise CircleMapError(f"式を解釈できません: {expression!r} ({exc.msg})") from exc
    _validate(tree)
    return lambda t: _evaluate(tree, t)


@dataclass(frozen=True, eq=False)
class CircleMap:
    """重み f と次数 n = ∫_0^1 f."""

    expression: str
    f: Callable[[float], float] = field(repr=False)
    degree: int
    min_f: float
    max_f: float
    warnings: List[str] = field(default_factory=list)

    @classmethod
    def parse(cls, expression: str) -> "CircleMap":
        f = parse_weight(expression)
        if abs(f(0.0) - f(1.0)) > PERIODIC_TOL:
            raise CircleMapError(f"f(0) = {f(0.0)} と f(1) = {f(1.0)} が一致しません")
        samples = np.array([f(t) for t in np.linspace(0.0, 1.0, MIN_SAMPLES + 1)])
        i = int(np.argmin(samples))
        lo, hi = max(0.0, (i - 1) / MIN_SAMPLES), min(1.0, (i + 1) / MIN_SAMPLES)
        refined = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        min_f = min(float(samples[i]), float(refined.fun))
        max_f = float(samples.max())
        if not min_f > 0.0:
            raise CircleMapError(f"min f = {min_f} が正ではありません")
        total, _ = integrate.quad(f, 0.0, 1.0, epsabs=QUAD_TOL, limit=200)
        degree = round(total)
        if abs(total - degree) > DEGREE_TOL or degree < 2:
            raise CircleMapError(f"∫_0^1 f = {total} が2以上の整数ではありません")
        warnings: List[str] = []
        if min_f <= 1.0:
            warnings.append(f"min f = {min_f:.6g} ≤ 1: 一意性の仮定（f > 1）が成り立ちません")
            logger.warning(warnings[-1])
        return cls(expression, f, degree, min_f, max_f, warnings)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f": self.expression,
            "degree": self.degree,
            "min_f": self.min_f,
            "max_f": self.max_f,
            "warnings": list(self.warnings),
        }


def _quad(c: CircleMap, a: float, b: float) -> float:
    result = integrate.quad(c.f, a, b, epsabs=QUAD_TOL, limit=200, full_output=1)
    if len(result) > 3:
        raise CircleMapError(f"求積が収束しません: {result[3]}")
    return float(result[0])


def circle_lift(c: CircleMap, x: float) -> float:
    """持ち上げ F(x) = ∫_0^x f（[0,1] 上で狭義単調増加、F(1) = n）."""
    return _quad(c, 0.0, x)


def circle_T(c: CircleMap, x: float) -> float:
    """T(x) = ∫_0^x f(t)dt mod 1."""
    if not 0.0 <= x < 1.0:
        raise CircleMapError(f"x = {x} は [0,1) の範囲外です")
    return circle_lift(c, x) % 1.0


def circle_distance(x: float, y: float) -> float:
    """円周 R/Z 上の距離."""
    d = abs(x - y) % 1.0
    return min(d, 1.0 - d)


def circle_inverse_branch(c: CircleMap, y: float, branch: int) -> float:
    """branch 番目の単調区間上で T(x) = y となる唯一の x."""
    if not 0 <= branch < c.degree:
        raise CircleMapError(f"分枝 {branch} は 0..{c.degree - 1} の範囲外です")
    if not 0.0 <= y < 1.0:
        raise CircleMapError(f"y = {y} は [0,1) の範囲外です")
    target = y + branch
    if target == 0.0:
        return 0.0
    return float(optimize.bisect(lambda x: circle_lift(c, x) - target, 0.0, 1.0, xtol=INVERSE_XTOL))


def circle_preimages(c: CircleMap, y: float) -> List[float]:
    """T^{-1}(y) の n 個の点（分枝順）."""
    return [circle_inverse_branch(c, y, b) for b in range(c.degree)]


def circle_local_scaling_probe(c: CircleMap, x: float, h: float) -> float:
    """ρ(Tx, T(x+h))/h。h → 0 で f(x) に収束する."""
    if not 0.0 < h or h * c.max_f >= 0.5:
        raise CircleMapError(f"h = {h} は単射性のスケール外です")
    increment = _quad(c, x, x + h)
    return circle_distance(0.0, increment) / h


def scaling_convergence(c: CircleMap, x: float, steps: Tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)) -> Dict[str, Any]:
    """h を細かくしたときの |比(h) − f(x)| と観測された収束次数."""
    target = c.f(x)
    errors = [abs(circle_local_scaling_probe(c, x, h) - target) for h in steps]
    orders = [
        math.log(errors[i] / errors[i + 1]) / math.log(steps[i] / steps[i + 1])
        for i in range(len(steps) - 1)
        if errors[i] > 0.0 and errors[i + 1] > 0.0
    ]
    return {"x": x, "f": target, "h": list(steps), "errors": errors, "orders": orders}


def _inverse_lift(c: CircleMap, u: float) -> float:
    if u <= 0.0:
        return 0.0
    if u >= c.degree:
        return 1.0
    return float(optimize.brentq(lambda x: circle_lift(c, x) - u, 0.0, 1.0, xtol=1e-14))


def circle_quasi_invariance(c: CircleMap, interval: Tuple[float, float], beta: float = 1.0) -> float:
    """|(b − a) − ∫_{T(a)}^{T(b)} f(T|_U^{-1}u)^{−β} du|（β = 1 で Lebesgue 測度の準不変性）."""
    a, b = interval
    if not 0.0 <= a < b <= 1.0:
        raise CircleMapError(f"区間 ({a}, {b}) は [0,1] 内の空でない区間ではありません")
    start, end = circle_lift(c, a), circle_lift(c, b)
    if end - start >= 1.0:
        raise CircleMapError(f"区間 ({a}, {b}) は T の切断ではありません（像の長さ {end - start}）")
    integral, _ = integrate.quad(
        lambda u: c.f(_inverse_lift(c, u)) ** (-beta), start, end, epsabs=QUAD_TOL, limit=200
    )
    return abs((b - a) - float(integral))


def random_sections(c: CircleMap, rng: np.random.Generator, count: int = 20) -> List[Tuple[float, float]]:
    """像の長さが1未満になる乱択区間."""
    sections: List[Tuple[float, float]] = []
    for _ in range(count):
        length = float(rng.uniform(0.05, 0.9)) / c.max_f
        a = float(rng.uniform(0.0, 1.0 - length))
        sections.append((a, a + length))
    return sections


def quasi_invariance_suite(c: CircleMap, rng: np.random.Generator, count: int = 20,
                           beta: float = 1.0) -> Dict[str, Any]:
    """乱択区間での最大準不変性欠損と、β = 2 の負の対照."""
    sections = random_sections(c, rng, count)
    defects = [circle_quasi_invariance(c, s, beta) for s in sections]
    controls = [circle_quasi_invariance(c, s, beta + 1.0) for s in sections]
    return {
        "beta": beta,
        "sections": [list(s) for s in sections],
        "max_defect": max(defects),
        "control_beta": beta + 1.0,
        "control_min_defect": min(controls),
        "passed": max(defects) <= SECTION_TOL,
    }


def circle_degree(c: CircleMap) -> int:
    return c.degree


def circle_entropy(c: CircleMap) -> float:
    """h(T) = log n."""
    return math.log(c.degree)

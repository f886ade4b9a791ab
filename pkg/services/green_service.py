"""
Green 函数服务
构造并校验边值问题的 Green 函数 G(t,s)，计算锥常数 γ、η、σ，以及不动点算子 F

网格约定:
    全网格 t_i = ν-2+i, i = 0..b+2 (G 的行)
    求值网格 s+ν-1, s = 0..b (G 的列，也是 h、f 的取值点，对应全网格下标 s+1)
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from common.exception import (
    DegenerateCone,
    DomainError,
    GreenValidationError,
    SingularSystem,
)
from common.expr_parser import Expr, eval_expr, parse_expr, to_text
from common.frac_util import difference_operator, falling_factorial
from model.grid_models import LATTICE_TOL, FracOrder, GridFunction, ShiftedGrid
from model.schemas import ConeConstants, ProblemConfig, ShellProbe

logger = logging.getLogger(__name__)

# 构造 G 时校验用的容差
GREEN_ORACLE_TOL = 1e-8

# 非负性允许的舍入误差
NONNEG_TOL = 1e-12

# 视为正的对角元下限
DIAGONAL_FLOOR = 1e-14

# 锥不等式的容差
CONE_TOL = 1e-10


def full_grid(nu: float, b: int) -> ShiftedGrid:
    """[ν-2, ν+b] 上的网格，共 b+3 个点"""
    return ShiftedGrid(nu - 2.0, b + 3)


def eval_grid(nu: float, b: int) -> ShiftedGrid:
    """h、f 的取值点 s+ν-1, s = 0..b"""
    return ShiftedGrid(nu - 1.0, b + 1)


@dataclass(frozen=True)
class Problem:
    """
    边值问题 -Δ^ν y(t) = λ h(t+ν-1) f(t+ν-1, y(t+ν-1)), y(ν-2) = y(ν+b) = 0
    h 以求值网格上的网格函数保存，f 以语法树保存
    """

    nu: float
    b: int
    lambda_: float
    h: GridFunction
    f: Expr
    sigma_unweighted: bool = False

    def __post_init__(self):
        FracOrder(self.nu).check_bvp()
        if self.b < 1:
            raise DomainError(f"b 必须是正整数, 实际为 {self.b}")
        if not self.lambda_ > 0:
            raise DomainError(f"λ 必须为正, 实际为 {self.lambda_}")
        expected = eval_grid(self.nu, self.b)
        if self.h.grid.count != expected.count or abs(self.h.grid.offset - expected.offset) > LATTICE_TOL:
            raise DomainError(f"h 必须定义在 [{self.nu - 1}, {self.nu + self.b - 1}] 上")
        if np.any(self.h.values < 0):
            raise DomainError(f"h 必须非负, 最小值为 {self.h.values.min()!r}")

    @classmethod
    def create(
        cls,
        nu: float,
        b: int,
        lambda_: float,
        h: Union[str, Expr, GridFunction],
        f: Union[str, Expr],
        sigma_unweighted: bool = False,
    ) -> "Problem":
        """
        由表达式文本或语法树构造问题，h 在求值网格上列表
        """
        if isinstance(f, str):
            f = parse_expr(f)
        if not isinstance(h, GridFunction):
            tree = parse_expr(h) if isinstance(h, str) else h
            h = GridFunction.from_callable(eval_grid(nu, b), lambda t: eval_expr(tree, t=t))
        return cls(nu, b, lambda_, h, f, sigma_unweighted)

    @classmethod
    def from_config(cls, config: ProblemConfig) -> "Problem":
        return cls.create(
            config.nu, config.b, config.lambda_, config.h, config.f, config.sigma_unweighted
        )

    @property
    def grid(self) -> ShiftedGrid:
        return full_grid(self.nu, self.b)

    def f_at(self, t: float, y: float) -> float:
        return eval_expr(self.f, t=t, y=y)

    def describe(self) -> str:
        return f"ν={self.nu}, b={self.b}, λ={self.lambda_}, f={to_text(self.f)}"


@dataclass(frozen=True)
class GreenMatrix:
    """
    G(t_i, s) 表，b+3 行 (t_i = ν-2+i)、b+1 列 (s = 0..b)
    """

    nu: float
    b: int
    values: np.ndarray = field(repr=False)
    variant: str = "derived"
    discrepancy: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.b + 3, self.b + 1):
            raise DomainError(f"G 的形状应为 {(self.b + 3, self.b + 1)}, 实际为 {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> ShiftedGrid:
        return full_grid(self.nu, self.b)

    @property
    def diagonal(self) -> np.ndarray:
        """G(s+ν-1, s), s = 0..b"""
        s = np.arange(self.b + 1)
        return self.values[s + 1, s]

    def at(self, t: float, s: int) -> float:
        return float(self.values[self.grid.index_of(t), s])


def _green_entries(nu: float, b: int, variant: str) -> np.ndarray:
    gamma_nu = math.gamma(nu)
    if variant == "derived":
        scale = [falling_factorial(nu + b - s - 1.0, nu - 1.0) for s in range(b + 1)]
        norm = falling_factorial(nu + b, nu - 1.0)
    else:
        scale = [falling_factorial(nu + b - s, nu - 1.0) for s in range(b + 1)]
        norm = falling_factorial(nu + b - 1.0, nu - 1.0)

    entries = np.zeros((b + 3, b + 1))
    for i in range(b + 3):
        t = nu - 2.0 + i
        lead = falling_factorial(t, nu - 1.0)
        for s in range(b + 1):
            value = lead * scale[s] / norm
            # 指示函数 s < t-ν+1 在网格上等价于 s ≤ i-2
            if s <= i - 2:
                value -= falling_factorial(t - s - 1.0, nu - 1.0)
            entries[i, s] = value / gamma_nu
    return entries


@lru_cache(maxsize=64)
def _interior_system(nu: float, b: int) -> np.ndarray:
    """
    -Δ^ν y(t), t = 0..b 对内部未知量 y(ν-1..ν+b-1) 的系数矩阵 (边界值为 0)
    """
    grid = full_grid(nu, b)
    op = difference_operator(grid, nu, [float(t) for t in range(b + 1)])
    system = -op[:, 1: b + 2]
    system.setflags(write=False)
    return system


def solve_linear(nu: float, b: int, rhs: np.ndarray) -> np.ndarray:
    """
    直接求解 -Δ^ν y(t) = rhs(t+ν-1), y(ν-2) = y(ν+b) = 0，返回全网格上的 y
    """
    system = _interior_system(nu, b)
    try:
        interior = np.linalg.solve(system, np.asarray(rhs, dtype=float))
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"ν={nu}, b={b} 的差分方程组奇异: {e}")
    y = np.zeros(b + 3)
    y[1: b + 2] = interior
    return y


def validate_green(G: GreenMatrix, rhs: GridFunction) -> float:
    """
    用直接线性求解校验 G

    :param G: 待校验的 Green 函数表
    :param rhs: 定义在 s+ν-1 (s = 0..b) 上的右端项
    :return: ‖y₁ - y₂‖ / (1 + ‖y₂‖)，y₁ = Σ_s G(t,s) rhs(s)，y₂ 为直接求解的结果
    """
    expected = eval_grid(G.nu, G.b)
    if rhs.grid.count != expected.count or abs(rhs.grid.offset - expected.offset) > LATTICE_TOL:
        raise DomainError(f"右端项必须定义在 [{expected.offset}, {expected.last}] 上")
    y_green = G.values @ rhs.values
    y_direct = solve_linear(G.nu, G.b, rhs.values)
    return float(np.max(np.abs(y_green - y_direct)) / (1.0 + np.max(np.abs(y_direct))))


def _oracle_discrepancy(G: GreenMatrix) -> float:
    grid = eval_grid(G.nu, G.b)
    rng = np.random.default_rng(0)
    probes = [np.ones(grid.count), rng.uniform(0.0, 1.0, grid.count)]
    return max(validate_green(G, GridFunction(grid, rhs)) for rhs in probes)


def build_green(nu: float, b: int) -> GreenMatrix:
    """
    构造 Green 函数
    G(t,s) = (1/Γ(ν)) [t^(ν-1) (ν+b-s-1)^(ν-1) / (ν+b)^(ν-1) - (t-s-1)^(ν-1) 𝟙{s < t-ν+1}]

    构造后立即与直接线性求解比对，通过后把舍入误差造成的负值截为 0
    """
    FracOrder(nu).check_bvp()
    if b < 1:
        raise DomainError(f"b 必须是正整数, 实际为 {b}")

    entries = _green_entries(nu, b, "derived")
    # 两端的行在精确算术下为 0
    entries[0, :] = 0.0
    entries[-1, :] = 0.0

    raw = GreenMatrix(nu, b, entries)
    discrepancy = _oracle_discrepancy(raw)
    if discrepancy > GREEN_ORACLE_TOL:
        logger.error(f"❌ [GREEN] ν={nu}, b={b} 校验失败, 偏差 {discrepancy:.3e}")
        raise GreenValidationError(
            f"Green 函数与直接求解偏差 {discrepancy:.3e} 超过 {GREEN_ORACLE_TOL:g}", discrepancy
        )
    lowest = float(entries.min())
    if lowest < -NONNEG_TOL:
        raise GreenValidationError(f"Green 函数出现负值 {lowest:.3e}", discrepancy)

    logger.info(f"✅ [GREEN] ν={nu}, b={b} 校验通过, 偏差 {discrepancy:.3e}")
    return GreenMatrix(nu, b, np.maximum(entries, 0.0), "derived", discrepancy)


def green_printed_variant(nu: float, b: int) -> GreenMatrix:
    """
    按 (ν+b-s)^(ν-1) / (ν+b-1)^(ν-1) 形式列表的 Green 函数，不做校验也不截断
    仅用于与推导形式对比 (validate_green 给出其偏差)
    """
    FracOrder(nu).check_bvp()
    matrix = GreenMatrix(nu, b, _green_entries(nu, b, "printed"), "printed")
    discrepancy = _oracle_discrepancy(matrix)
    logger.info(f"[GREEN] 字面形式 ν={nu}, b={b} 的偏差 {discrepancy:.3e}")
    return GreenMatrix(nu, b, matrix.values, "printed", discrepancy)


def _floor(x: float) -> int:
    return math.floor(x + LATTICE_TOL)


def cone_constants(P: Problem, G: GreenMatrix, sigma_unweighted: Optional[bool] = None) -> ConeConstants:
    """
    计算 γ、η、σ 与四分区间

    :param P: 问题
    :param G: 已校验的 Green 函数
    :param sigma_unweighted: 为 True 时 σ 的求和不乘 h；默认取 P.sigma_unweighted
    """
    if sigma_unweighted is None:
        sigma_unweighted = P.sigma_unweighted
    nu, b = P.nu, P.b
    grid = G.grid

    quarter = grid.indices_between((nu + b) / 4.0, 3.0 * (nu + b) / 4.0)
    if not quarter:
        raise DegenerateCone(f"四分区间 [{(nu + b) / 4}, {3 * (nu + b) / 4}] 内没有网格点")

    diag = G.diagonal
    ratios = [
        G.values[quarter, s].min() / diag[s] for s in range(b + 1) if diag[s] > DIAGONAL_FLOOR
    ]
    if not ratios:
        raise DegenerateCone("G 的对角元全部为 0")
    gamma = float(min(ratios))
    if not gamma > 0:
        raise DegenerateCone(f"γ = {gamma!r} 不是正数")

    h = P.h.values
    eta_sum = float(diag @ h)
    if not eta_sum > 0:
        raise DegenerateCone("Σ G(s+ν-1,s) h(s+ν-1) = 0, η 无定义")
    eta = 1.0 / eta_sum

    offset = _floor((b - nu) / 2.0)
    midpoint = offset + nu
    midpoint_index = offset + 2
    s_lo = min(max(_floor((b + nu) / 4.0 - nu + 1.0), 0), b)
    s_hi = min(max(_floor(3.0 * (b + nu) / 4.0 - nu + 1.0), 0), b)
    weights = np.ones(b + 1) if sigma_unweighted else h
    sigma_sum = float(G.values[midpoint_index, s_lo: s_hi + 1] @ weights[s_lo: s_hi + 1])
    if s_lo > s_hi or not sigma_sum > 0:
        raise DegenerateCone(f"σ 的分母为 0 (s ∈ [{s_lo}, {s_hi}], t* = {midpoint})")
    sigma = 1.0 / (gamma * sigma_sum)

    constants = ConeConstants(
        gamma=gamma,
        eta=eta,
        sigma=sigma,
        quarter_lo=quarter[0],
        quarter_hi=quarter[-1],
        quarter_points=[grid.point_of(i) for i in quarter],
        midpoint_index=midpoint_index,
        midpoint=midpoint,
        midpoint_in_quarter=quarter[0] <= midpoint_index <= quarter[-1],
        s_lo=s_lo,
        s_hi=s_hi,
        sigma_unweighted=sigma_unweighted,
    )
    if not constants.midpoint_in_quarter:
        logger.warning(f"⚠️ [CONE] t* = {midpoint} 不在四分区间 {constants.quarter_points} 内")
    logger.info(f"[CONE] γ={gamma:.6g}, η={eta:.6g}, σ={sigma:.6g}")
    return constants


def nonlinearity(P: Problem, y: GridFunction) -> np.ndarray:
    """λ h(s+ν-1) f(s+ν-1, y(s+ν-1)), s = 0..b"""
    points = eval_grid(P.nu, P.b).points
    values = y.values[1: P.b + 2]
    f_values = np.array([P.f_at(float(t), float(v)) for t, v in zip(points, values)])
    return P.lambda_ * P.h.values * f_values


def apply_F(P: Problem, G: GreenMatrix, y: GridFunction) -> GridFunction:
    """
    不动点算子 (Fy)(t) = λ Σ_s G(t,s) h(s+ν-1) f(s+ν-1, y(s+ν-1))
    """
    if y.grid.count != P.b + 3:
        raise DomainError(f"y 必须定义在全网格上 ({P.b + 3} 个点)")
    result = G.values @ nonlinearity(P, y)
    result[0] = 0.0
    result[-1] = 0.0
    return GridFunction(y.grid, result)


def in_cone(y: GridFunction, C: ConeConstants) -> bool:
    """y ≥ 0 且 min_{四分区间} y ≥ γ‖y‖"""
    if np.any(y.values < -CONE_TOL):
        return False
    floor = y.restrict(C.quarter_points[0], C.quarter_points[-1]).values.min()
    return bool(floor >= C.gamma * y.norm() - CONE_TOL)


def _shell_samples(G: GreenMatrix, C: ConeConstants, r: float, samples: int) -> list[np.ndarray]:
    count = G.b + 3
    basis = [G.values[:, s] / G.values[:, s].max() for s in range(G.b + 1) if G.values[:, s].max() > 0]
    constant = np.zeros(count)
    constant[1:-1] = 1.0
    floor = np.zeros(count)
    floor[1:-1] = C.gamma
    floor[C.midpoint_index] = 1.0
    basis += [constant, floor]

    shapes = list(basis)
    rng = np.random.default_rng(0)
    while len(shapes) < samples:
        weights = rng.uniform(0.0, 1.0, len(basis))
        shapes.append(np.asarray(weights) @ np.asarray(basis))
    return [r * shape / np.abs(shape).max() for shape in shapes[:samples]]


def probe_shell(P: Problem, G: GreenMatrix, C: ConeConstants, r: float, samples: int = 64) -> ShellProbe:
    """
    在锥中 ‖y‖ = r 的确定性样本上计算 ‖Fy‖/‖y‖
    样本为归一化的 G 的列、内部常数函数、四分区间上取 γr 的下界形状以及它们的非负组合
    """
    if not r > 0:
        raise DomainError(f"半径必须为正, 实际为 {r}")
    if samples < 1:
        raise DomainError(f"样本数必须 ≥ 1, 实际为 {samples}")
    ratios = []
    for values in _shell_samples(G, C, r, samples):
        y = GridFunction(G.grid, values)
        ratios.append(apply_F(P, G, y).norm() / y.norm())
    probe = ShellProbe(
        radius=r,
        samples=len(ratios),
        min_ratio=min(ratios),
        max_ratio=max(ratios),
        compressive=max(ratios) <= 1.0,
        expansive=min(ratios) >= 1.0,
    )
    logger.info(f"[PROBE] r={r}: ‖Fy‖/‖y‖ ∈ [{probe.min_ratio:.6g}, {probe.max_ratio:.6g}]")
    return probe

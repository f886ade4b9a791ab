"""
离散分数阶微积分工具
下降阶乘 t^(ν)、ν 阶分数和 Δ^{-ν}、ν 阶分数差分 Δ^ν = Δ^N Δ^{ν-N}
所有函数均为纯函数，可并发调用
"""

import logging
import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln, gammasgn

from common.exception import DomainError, PoleNumerator
from model.grid_models import (
    INTEGER_TOL,
    LATTICE_TOL,
    FracOrder,
    GridFunction,
    ShiftedGrid,
    nearest_integer,
)

logger = logging.getLogger(__name__)


def _is_pole(x: float) -> bool:
    """x 为非正整数 (Γ 的极点)"""
    n = nearest_integer(x, LATTICE_TOL)
    return n is not None and n <= 0


def _integer_falling_factorial(t: float, k: int) -> float:
    """
    整数阶下降阶乘
    k ≥ 0: t(t-1)...(t-k+1)
    k < 0: 1 / ((t+1)(t+2)...(t-k))
    """
    if k >= 0:
        return float(math.prod(t - j for j in range(k)))
    factors = [t + j for j in range(1, -k + 1)]
    if any(nearest_integer(f) == 0 for f in factors):
        raise PoleNumerator(f"Γ({t + 1!r}) 为极点, t^({k}) 无定义")
    return 1.0 / float(math.prod(factors))


def falling_factorial(t: float, nu: float) -> float:
    """
    下降阶乘 t^(ν) = Γ(t+1) / Γ(t+1-ν)

    - 分母为极点、分子不是极点时按约定返回 0
    - 分子分母都是极点时 (此时 ν 为整数) 取整数下降阶乘的极限值
    - 只有分子为极点时抛出 PoleNumerator
    负自变量通过 log|Γ| 加单独记录的符号计算，避免溢出
    """
    k = nearest_integer(nu, INTEGER_TOL)
    if k is not None:
        return _integer_falling_factorial(t, k)

    num = t + 1.0
    den = t + 1.0 - nu
    num_pole = _is_pole(num)
    den_pole = _is_pole(den)
    if num_pole and den_pole:
        return _integer_falling_factorial(t, round(nu))
    if num_pole:
        raise PoleNumerator(f"Γ({num!r}) 为极点, {t!r}^({nu!r}) 无定义")
    if den_pole:
        return 0.0

    sign = gammasgn(num) * gammasgn(den)
    return float(sign * np.exp(gammaln(num) - gammaln(den)))


def power_function(grid: ShiftedGrid, nu: float) -> GridFunction:
    """在网格上列表 t^(ν)"""
    return GridFunction(grid, np.array([falling_factorial(float(t), nu) for t in grid.points]))


def _sum_kernel(nu: float, length: int) -> np.ndarray:
    """
    分数和的核 w_k = (k+ν-1)^(ν-1) / Γ(ν), k = 0..length-1
    k 为 t-ν 与 s 之间的距离，只依赖滞后量
    """
    gamma_nu = math.gamma(nu)
    return np.array([falling_factorial(k + nu - 1.0, nu - 1.0) / gamma_nu for k in range(length)])


def sum_operator(grid: ShiftedGrid, nu: float, targets: Sequence[float]) -> np.ndarray:
    """
    分数和的矩阵形式: (Δ^{-ν} f)(targets) = S @ f.values

    target t 必须在 a+ν-1+N_0 上 (a 为网格起点)；t = a+ν-1 时求和为空，该行为 0
    """
    FracOrder(nu)
    rows = np.zeros((len(targets), grid.count))
    kernel = _sum_kernel(nu, grid.count)
    for r, t in enumerate(targets):
        m = nearest_integer(t - grid.offset - nu)
        if m is None:
            raise DomainError(f"点 {t!r} 不在格点 {grid.offset!r}+{nu!r}+Z 上")
        if m < -1:
            raise DomainError(f"点 {t!r} 低于 Δ^(-{nu!r}) 的定义域起点 {grid.offset + nu - 1.0!r}")
        if m == -1:
            continue
        if m > grid.count - 1:
            raise DomainError(f"计算 Δ^(-{nu!r}) 在 {t!r} 处需要网格点 {grid.offset + m!r}, 超出网格范围")
        # s = a + j, 滞后 k = m - j
        rows[r, : m + 1] = kernel[m::-1]
    return rows


def difference_operator(grid: ShiftedGrid, nu: float, targets: Sequence[float]) -> np.ndarray:
    """
    分数差分的矩阵形式: (Δ^ν f)(targets) = D @ f.values

    Δ^ν f(t) = Δ^N g(t), g = Δ^{-(N-ν)} f；f 定义在 N_a 上时 t 取自 N_{a+N-ν}
    ν 为整数时退化为经典 N 阶前向差分
    """
    order = FracOrder(nu)
    big_n = order.N
    coeffs = [(-1) ** (big_n - k) * math.comb(big_n, k) for k in range(big_n + 1)]
    rows = np.zeros((len(targets), grid.count))

    if order.is_integer:
        for r, t in enumerate(targets):
            i = grid.lattice_index(t)
            if i is None or i < 0:
                raise DomainError(f"点 {t!r} 不在网格格点 {grid.offset!r}+N_0 上")
            if i + big_n > grid.count - 1:
                raise DomainError(f"计算 Δ^{big_n} 在 {t!r} 处需要超出网格的点")
            for k, c in enumerate(coeffs):
                rows[r, i + k] += c
        return rows

    mu = big_n - nu
    for r, t in enumerate(targets):
        m = nearest_integer(t - grid.offset - mu)
        if m is None or m < 0:
            raise DomainError(f"点 {t!r} 不在格点 N_(a+N-ν) = N_{grid.offset + mu!r} 上")
        partial = sum_operator(grid, mu, [t + k for k in range(big_n + 1)])
        rows[r] = np.asarray(coeffs, dtype=float) @ partial
    logger.debug("difference_operator: ν=%s, N=%d, %d 个目标点", nu, big_n, len(targets))
    return rows


def fractional_sum(f: GridFunction, nu: float, t: float) -> float:
    """
    ν 阶分数和 Δ^{-ν} f(t) = (1/Γ(ν)) Σ_{s=a}^{t-ν} (t-s-1)^(ν-1) f(s)
    """
    if not nu > 0:
        raise DomainError(f"分数和要求 ν > 0, 实际为 {nu}")
    return float(sum_operator(f.grid, nu, [t])[0] @ f.values)


def fractional_difference(f: GridFunction, nu: float, t: float) -> float:
    """
    ν 阶分数差分 Δ^ν f(t) = Δ^N Δ^{-(N-ν)} f(t)
    """
    if not nu > 0:
        raise DomainError(f"分数差分要求 ν > 0, 实际为 {nu}")
    return float(difference_operator(f.grid, nu, [t])[0] @ f.values)


def forward_difference(f: GridFunction) -> GridFunction:
    """一阶前向差分 g_i = f_{i+1} - f_i，网格起点不变、点数减一"""
    if f.grid.count < 2:
        raise DomainError("前向差分至少需要 2 个网格点")
    return GridFunction(ShiftedGrid(f.grid.offset, f.grid.count - 1), np.diff(f.values))

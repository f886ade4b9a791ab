"""
移位整数格点上的网格与网格函数
ShiftedGrid: {offset, offset+1, ..., offset+count-1}
GridFunction: 定义在 ShiftedGrid 上的实值函数，带 sup 范数
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from common.exception import DomainError

# 判断一个点是否落在移位格点上的容差
LATTICE_TOL = 1e-9

# 阶数与整数的距离小于该值时按整数阶处理
INTEGER_TOL = 1e-12


def nearest_integer(x: float, tol: float = LATTICE_TOL) -> int | None:
    """
    x 与某个整数的距离不超过 tol 时返回该整数，否则返回 None
    """
    n = round(x)
    if abs(x - n) <= tol:
        return int(n)
    return None


@dataclass(frozen=True)
class ShiftedGrid:
    """
    单位步长的移位格点 t_i = offset + i, i = 0..count-1
    """

    offset: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"网格点数必须 ≥ 1, 实际为 {self.count}")
        if not math.isfinite(self.offset):
            raise DomainError(f"网格起点必须是有限实数, 实际为 {self.offset}")

    @property
    def last(self) -> float:
        return self.offset + (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return self.offset + np.arange(self.count, dtype=float)

    def point_of(self, i: int) -> float:
        if not 0 <= i < self.count:
            raise DomainError(f"下标 {i} 超出网格范围 [0, {self.count - 1}]")
        return self.offset + i

    def lattice_index(self, t: float) -> int | None:
        """
        t 在格点 offset + Z 上时返回 (可能越界的) 整数下标，否则返回 None
        """
        return nearest_integer(t - self.offset)

    def index_of(self, t: float) -> int:
        i = self.lattice_index(t)
        if i is None or not 0 <= i < self.count:
            raise DomainError(f"点 {t!r} 不在网格 [{self.offset!r}, {self.last!r}] 上")
        return i

    def contains(self, t: float) -> bool:
        i = self.lattice_index(t)
        return i is not None and 0 <= i < self.count

    def indices_between(self, lo: float, hi: float, tol: float = LATTICE_TOL) -> list[int]:
        """
        返回满足 lo ≤ t_i ≤ hi (带 tol 松弛) 的下标列表
        """
        return [i for i, t in enumerate(self.points) if lo - tol <= t <= hi + tol]


@dataclass(frozen=True)
class GridFunction:
    """
    定义在 ShiftedGrid 上的网格函数，values 只读
    """

    grid: ShiftedGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.grid.count:
            raise DomainError(f"取值个数 {values.shape[0]} 与网格点数 {self.grid.count} 不一致")
        if not np.all(np.isfinite(values)):
            raise DomainError("网格函数取值必须全部有限")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: ShiftedGrid, fn: Callable[[float], float]) -> "GridFunction":
        return cls(grid, np.array([fn(float(t)) for t in grid.points], dtype=float))

    @classmethod
    def zeros(cls, grid: ShiftedGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.count))

    def norm(self) -> float:
        """sup 范数 ‖y‖ = max_i |y_i|"""
        return float(np.max(np.abs(self.values)))

    def value_at(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])

    def restrict(self, lo: float, hi: float) -> "GridFunction":
        """限制到子区间 [lo, hi] 上的网格点"""
        idx = self.grid.indices_between(lo, hi)
        if not idx:
            raise DomainError(f"区间 [{lo}, {hi}] 内没有网格点")
        sub = ShiftedGrid(self.grid.point_of(idx[0]), len(idx))
        return GridFunction(sub, self.values[idx[0]: idx[-1] + 1])


@dataclass(frozen=True)
class FracOrder:
    """
    分数阶 ν 以及 N = ⌈ν⌉ (满足 0 ≤ N-1 < ν ≤ N)
    """

    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise DomainError(f"阶数 ν 必须为正, 实际为 {self.nu}")

    @property
    def integer_value(self) -> int | None:
        return nearest_integer(self.nu, INTEGER_TOL)

    @property
    def is_integer(self) -> bool:
        return self.integer_value is not None

    @property
    def N(self) -> int:
        k = self.integer_value
        if k is not None:
            return k
        return math.ceil(self.nu)

    def check_bvp(self) -> "FracOrder":
        """边值问题要求 1 < ν ≤ 2"""
        if not 1.0 < self.nu <= 2.0 + INTEGER_TOL:
            raise DomainError(f"边值问题要求 1 < ν ≤ 2, 实际为 {self.nu}")
        return self

"""
求解服务
Picard 不动点迭代、Newton 迭代、多初值正解搜索，以及不经过 Green 函数的独立残差校验
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from common.exception import (
    Diverged,
    DomainError,
    MaxIterations,
    MyException,
    NegativeSolution,
    SingularJacobian,
)
from common.frac_util import difference_operator
from constants.code_enum import SolverMethodEnum, StartStatusEnum, get_method_name
from model.grid_models import GridFunction
from model.schemas import ConeConstants, SolutionReport, StartOutcome
from services.green_service import (
    GreenMatrix,
    Problem,
    apply_F,
    build_green,
    cone_constants,
    in_cone,
    nonlinearity,
)

logger = logging.getLogger(__name__)

# Picard 迭代范数上限，超过即判定发散
DIVERGENCE_NORM = 1e12

# Newton 有限差分步长系数: h_i = FD_STEP * (1 + |y_i|)
FD_STEP = 1e-6

MAX_HALVINGS = 30

# 收敛解允许的最小值，低于此值视为负解
NEGATIVE_FLOOR = -1e-8

# 多初值结果的残差必须不超过 RESIDUAL_FACTOR * tol
RESIDUAL_FACTOR = 10.0

# 给定 m 而没有范数大于 m 的解时，在最大初值之上追加的十倍初值个数
EXTRA_START_DECADES = 3


@dataclass(frozen=True)
class Verification:
    residual_norm: float
    bc_ok: bool
    positive: bool
    in_cone: bool
    residual_ok: bool


@dataclass(frozen=True)
class Solution:
    y: GridFunction
    residual_norm: float
    iterations: int
    method: str
    in_cone: bool
    bc_ok: bool = True
    positive: bool = True
    fixed_point_residual: float = 0.0
    in_bracket: Optional[bool] = None
    above_m: Optional[bool] = None

    @property
    def norm(self) -> float:
        return self.y.norm()

    def to_report(self, index: int) -> SolutionReport:
        return SolutionReport(
            index=index,
            norm=self.norm,
            residual_norm=self.residual_norm,
            fixed_point_residual=self.fixed_point_residual,
            iterations=self.iterations,
            method=self.method,
            bc_ok=self.bc_ok,
            positive=self.positive,
            in_cone=self.in_cone,
            in_bracket=self.in_bracket,
            above_m=self.above_m,
        )


@dataclass(frozen=True)
class SearchResult:
    """多初值搜索结果: 去重后按范数排序的解，以及每个初值的结局"""

    solutions: list[Solution]
    outcomes: list[StartOutcome] = field(default_factory=list)


def _constants(P: Problem, G: Optional[GreenMatrix], C: Optional[ConeConstants]):
    if G is None:
        G = build_green(P.nu, P.b)
    if C is None:
        C = cone_constants(P, G)
    return G, C


def verify_solution(
    P: Problem, y: GridFunction, tol: float, C: Optional[ConeConstants] = None
) -> Verification:
    """
    把 y 直接代入差分方程校验，不使用 Green 函数

    :param P: 问题
    :param y: 全网格 [ν-2, ν+b] 上的候选解
    :param tol: 求解容差，residual_ok 表示残差 ≤ 10·tol
    :param C: 锥常数，缺省时现场计算
    :return: 残差 max_t |Δ^ν y(t) + λ h f|，边界条件、非负性与锥条件
    """
    if C is None:
        _, C = _constants(P, None, None)
    targets = [float(t) for t in range(P.b + 1)]
    delta = difference_operator(y.grid, P.nu, targets) @ y.values
    residual = float(np.max(np.abs(delta + nonlinearity(P, y))))
    return Verification(
        residual_norm=residual,
        bc_ok=bool(y.value_at(P.nu - 2.0) == 0.0 and y.value_at(P.nu + P.b) == 0.0),
        positive=bool(np.all(y.values >= 0.0)),
        in_cone=in_cone(y, C),
        residual_ok=residual <= RESIDUAL_FACTOR * tol,
    )


def _finish(
    P: Problem,
    G: GreenMatrix,
    C: ConeConstants,
    y: GridFunction,
    iterations: int,
    method: SolverMethodEnum,
    tol: float,
) -> Solution:
    check = verify_solution(P, y, tol, C)
    fixed_point = float(np.max(np.abs(apply_F(P, G, y).values - y.values)))
    logger.info(
        f"✅ [SOLVER] {get_method_name(method.value[0])} 收敛: 迭代 {iterations} 次, "
        f"‖y‖={y.norm():.6g}, 残差 {check.residual_norm:.3e}"
    )
    return Solution(
        y=y,
        residual_norm=check.residual_norm,
        iterations=iterations,
        method=method.value[0],
        in_cone=check.in_cone,
        bc_ok=check.bc_ok,
        positive=check.positive,
        fixed_point_residual=fixed_point,
    )


def solve_picard(
    P: Problem,
    y0: GridFunction,
    tol: float,
    max_iter: int,
    damping: float = 1.0,
    G: Optional[GreenMatrix] = None,
    C: Optional[ConeConstants] = None,
) -> Solution:
    """
    阻尼 Picard 迭代 y ← (1-θ) y + θ clamp₊(Fy)

    在 ‖T(y) - y‖ ≤ tol (1 + ‖y‖) 时停止并返回最新的迭代值 T(y)；iterations 为停止前的更新次数
    (F 与 y 无关时只需一次更新)
    """
    G, C = _constants(P, G, C)
    if not 0 < damping <= 1:
        raise DomainError(f"阻尼系数必须在 (0,1] 内, 实际为 {damping}")
    y = np.maximum(y0.values, 0.0)
    history: list[float] = []
    for k in range(max_iter + 1):
        image = apply_F(P, G, GridFunction(y0.grid, y)).values
        update = (1.0 - damping) * y + damping * np.maximum(image, 0.0)
        if np.max(np.abs(update - y)) <= tol * (1.0 + np.max(np.abs(y))):
            return _finish(P, G, C, GridFunction(y0.grid, update), k, SolverMethodEnum.PICARD, tol)
        if k == max_iter:
            break
        y = update
        norm = float(np.max(np.abs(y)))
        history.append(norm)
        if not norm <= DIVERGENCE_NORM:
            logger.warning(f"⚠️ [SOLVER] Picard 发散, ‖y‖={norm:.3e}")
            raise Diverged(history[-10:])
    logger.warning(f"⚠️ [SOLVER] Picard 迭代 {max_iter} 次未收敛")
    raise MaxIterations(max_iter)


def solve_newton(
    P: Problem,
    y0: GridFunction,
    tol: float,
    max_iter: int,
    G: Optional[GreenMatrix] = None,
    C: Optional[ConeConstants] = None,
) -> Solution:
    """
    对内部未知量 u 求解 R(u) = u - F(clamp₊ u) = 0
    Jacobian 由前向差分得到，步长 1e-6·(1+|u_i|)；线搜索最多减半 30 次；‖R‖_∞ ≤ tol 时接受
    """
    G, C = _constants(P, G, C)
    b = P.b
    rows = G.values[1: b + 2]

    def residual(u: np.ndarray) -> np.ndarray:
        full = np.zeros(b + 3)
        full[1: b + 2] = np.maximum(u, 0.0)
        return u - rows @ nonlinearity(P, GridFunction(y0.grid, full))

    u = np.array(y0.values[1: b + 2], dtype=float)
    r = residual(u)
    r_norm = float(np.max(np.abs(r)))
    for k in range(max_iter + 1):
        if r_norm <= tol:
            break
        if k == max_iter:
            logger.warning(f"⚠️ [SOLVER] Newton 迭代 {max_iter} 次未收敛, ‖R‖={r_norm:.3e}")
            raise MaxIterations(max_iter)

        jac = np.empty((b + 1, b + 1))
        for j in range(b + 1):
            shifted = u.copy()
            shifted[j] += FD_STEP * (1.0 + abs(u[j]))
            step = shifted[j] - u[j]
            jac[:, j] = (residual(shifted) - r) / step
        try:
            direction = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as e:
            raise SingularJacobian(f"第 {k + 1} 次 Newton 迭代 Jacobian 奇异: {e}")
        if not np.all(np.isfinite(direction)):
            raise SingularJacobian(f"第 {k + 1} 次 Newton 迭代得到非有限的步长")

        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = u + scale * direction
            try:
                r_candidate = residual(candidate)
            except MyException:
                r_candidate = None
            if r_candidate is not None and np.max(np.abs(r_candidate)) < r_norm:
                break
            scale /= 2.0
        else:
            raise MaxIterations(k, f"线搜索减半 {MAX_HALVINGS} 次后 ‖R‖={r_norm:.3e} 仍未下降")
        u, r = candidate, r_candidate
        r_norm = float(np.max(np.abs(r)))

    lowest = float(u.min())
    if lowest < NEGATIVE_FLOOR:
        logger.warning(f"⚠️ [SOLVER] Newton 收敛到负解, min y = {lowest:.3e}")
        raise NegativeSolution(lowest)
    y = np.zeros(b + 3)
    y[1: b + 2] = np.maximum(u, 0.0)
    return _finish(P, G, C, GridFunction(y0.grid, y), k, SolverMethodEnum.NEWTON, tol)


def bump_start(G: GreenMatrix, c: float) -> GridFunction:
    """初值 y0(t) = c·G(t, ⌊b/2⌋) / max G(·, ⌊b/2⌋)"""
    column = G.values[:, G.b // 2]
    return GridFunction(G.grid, c * column / column.max())


def _is_duplicate(y: GridFunction, kept: Sequence[Solution]) -> bool:
    tolerance = max(1e-6, 1e-4 * y.norm())
    return any(np.max(np.abs(y.values - s.y.values)) <= tolerance for s in kept)


def _solve_from(
    P: Problem,
    G: GreenMatrix,
    C: ConeConstants,
    y0: GridFunction,
    tol: float,
    max_iter: int,
    damping: float,
    method: str,
) -> Solution:
    try:
        solution = solve_picard(P, y0, tol, max_iter, damping, G, C)
    except MyException as e:
        if method != SolverMethodEnum.NEWTON.value[0]:
            raise
        logger.info(f"[SEARCH] Picard 失败 ({e.message}), 改用 Newton")
        return solve_newton(P, y0, tol, max_iter, G, C)
    if method != SolverMethodEnum.NEWTON.value[0]:
        return solution
    try:
        return solve_newton(P, solution.y, tol, max_iter, G, C)
    except MyException as e:
        logger.info(f"[SEARCH] Newton 精化失败 ({e.message}), 保留 Picard 结果")
        return solution


def find_positive_solutions(
    P: Problem,
    starts: Sequence[float],
    tol: float,
    max_iter: int = 500,
    damping: float = 1.0,
    method: str = "newton",
    G: Optional[GreenMatrix] = None,
    C: Optional[ConeConstants] = None,
    bracket: Optional[tuple[float, float]] = None,
    m: Optional[float] = None,
) -> SearchResult:
    """
    多初值搜索正解

    零初值自动加入；每个初值 c 取 y0 = c·(归一化的 G(·,⌊b/2⌋))，先 Picard 再 Newton 精化
    (method="picard" 时只做 Picard)。单个初值失败只记录不抛出。
    sup 距离不超过 max(1e-6, 1e-4‖y‖) 的解视为同一个；结果按范数升序。

    :param bracket: (r1, r2)，给出时为每个解标注 r1 ≤ ‖y‖ ≤ r2 是否成立
    :param m: 两解定理的分隔半径，给出时为每个解标注 ‖y‖ > m；
              若所有初值都没有得到范数大于 m 的解，依次追加 10·c_max, 100·c_max, ... 的初值
    """
    G, C = _constants(P, G, C)
    values = sorted({0.0, *(float(c) for c in starts)})
    kept: list[Solution] = []
    outcomes: list[StartOutcome] = []

    def attempt(c: float) -> None:
        y0 = bump_start(G, c)
        try:
            solution = _solve_from(P, G, C, y0, tol, max_iter, damping, method)
        except MyException as e:
            logger.warning(f"⚠️ [SEARCH] 初值 c={c} 失败: {e.message}")
            outcomes.append(StartOutcome(start=c, status=StartStatusEnum.FAILED.value[0], message=e.message))
            return

        reasons = []
        if not solution.positive:
            reasons.append("存在负值")
        if not solution.in_cone:
            reasons.append("不在锥内")
        if not solution.bc_ok:
            reasons.append("边界值非零")
        if solution.residual_norm > RESIDUAL_FACTOR * tol:
            reasons.append(f"残差 {solution.residual_norm:.3e} 超过 {RESIDUAL_FACTOR:g}·tol")
        if reasons:
            outcomes.append(
                StartOutcome(
                    start=c,
                    status=StartStatusEnum.REJECTED.value[0],
                    message=", ".join(reasons),
                    norm=solution.norm,
                )
            )
            return
        if _is_duplicate(solution.y, kept):
            outcomes.append(StartOutcome(start=c, status=StartStatusEnum.DUPLICATE.value[0], norm=solution.norm))
            return
        kept.append(solution)
        outcomes.append(StartOutcome(start=c, status=StartStatusEnum.CONVERGED.value[0], norm=solution.norm))

    for c in values:
        attempt(c)

    if m is not None:
        top = max(values[-1], m)
        for j in range(1, EXTRA_START_DECADES + 1):
            if any(s.norm > m for s in kept):
                break
            c = top * 10.0**j
            logger.info(f"[SEARCH] 没有范数大于 m={m:g} 的解, 追加初值 c={c:g}")
            attempt(c)
            values.append(c)

    kept.sort(key=lambda s: s.norm)
    if bracket is not None:
        r1, r2 = bracket
        kept = [
            replace(s, in_bracket=r1 - tol <= s.norm <= r2 + tol) for s in kept
        ]
    if m is not None:
        kept = [replace(s, above_m=s.norm > m) for s in kept]
    logger.info(f"[SEARCH] {len(values)} 个初值, 得到 {len(kept)} 个不同的正解")
    return SearchResult(kept, outcomes)

"""
λ 扫描服务
在几何分布的 λ 网格上并行运行多初值搜索，结果按 λ 的顺序收集
"""

import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from common.exception import ConfigError
from model.schemas import ConeConstants, SolverConfig
from services.green_service import GreenMatrix, Problem
from services.solver_service import find_positive_solutions

logger = logging.getLogger(__name__)

# 全局线程池，用于并行计算各 λ 点
_executor: Optional[ThreadPoolExecutor] = None
_executor_lock = threading.Lock()


def get_executor() -> ThreadPoolExecutor:
    """获取或创建线程池，线程数取 FRACBVP_SWEEP_WORKERS (默认 4)"""
    global _executor
    if _executor is None:
        with _executor_lock:
            if _executor is None:
                try:
                    workers = max(1, int(os.getenv("FRACBVP_SWEEP_WORKERS", "4")))
                except ValueError:
                    workers = 4
                _executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="fracbvp_sweep")
                logger.info(f"✅ 创建 λ 扫描线程池, 线程数 {workers}")
    return _executor


@dataclass(frozen=True)
class SweepRow:
    lambda_: float
    norms: list[float]

    @property
    def num_solutions(self) -> int:
        return len(self.norms)


def lambda_grid(lo: float, hi: float, steps: int) -> list[float]:
    """λ_k = lo·(hi/lo)^(k/(steps-1)), k = 0..steps-1"""
    if not 0 < lo < hi:
        raise ConfigError(f"lambda 范围必须满足 0 < from < to, 实际为 ({lo}, {hi})")
    if steps < 2:
        raise ConfigError(f"steps 必须 ≥ 2, 实际为 {steps}")
    grid = [lo * (hi / lo) ** (k / (steps - 1)) for k in range(steps)]
    grid[-1] = hi
    return grid


def sweep_lambda(
    P: Problem,
    lambdas: Sequence[float],
    solver: SolverConfig,
    G: GreenMatrix,
    C: ConeConstants,
    parallel: bool = True,
) -> list[SweepRow]:
    """
    对每个 λ 运行 find_positive_solutions
    G 与锥常数不依赖 λ，所有 λ 点共用；结果按输入顺序返回
    """

    def run(lam: float) -> SweepRow:
        problem = replace(P, lambda_=lam)
        result = find_positive_solutions(
            problem,
            solver.starts,
            solver.tol,
            solver.max_iter,
            solver.damping,
            solver.method,
            G,
            C,
        )
        return SweepRow(lam, [s.norm for s in result.solutions])

    logger.info(f"🔄 开始 λ 扫描: {len(lambdas)} 个点, λ ∈ [{lambdas[0]:.6g}, {lambdas[-1]:.6g}]")
    if parallel:
        futures = [get_executor().submit(run, lam) for lam in lambdas]
        rows = [future.result() for future in futures]
    else:
        rows = [run(lam) for lam in lambdas]
    logger.info(f"✅ λ 扫描完成, 最多 {max(r.num_solutions for r in rows)} 个解")
    return rows


def sweep_table(rows: Sequence[SweepRow]) -> tuple[list[str], list[list]]:
    """CSV 表头 lambda,num_solutions,norm_1,...，不足的列留空"""
    width = max((r.num_solutions for r in rows), default=0)
    header = ["lambda", "num_solutions"] + [f"norm_{k}" for k in range(1, width + 1)]
    table = []
    for r in rows:
        table.append([r.lambda_, r.num_solutions] + list(np.asarray(r.norms, dtype=float)) + [""] * (width - r.num_solutions))
    return header, table

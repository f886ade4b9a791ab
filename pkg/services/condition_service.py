"""
增长条件检查服务
对 f 在有限样本上检查 H1–H4，并据此判断各存在性定理的前提是否 (启发式地) 满足
"""

import logging
from typing import Optional, Sequence

import numpy as np

from common.exception import DomainError
from model.schemas import (
    ConditionReport,
    ConeConstants,
    GrowthCheck,
    H1Check,
    H2Check,
    RadiusEvidence,
)
from services.green_service import GreenMatrix, Problem, build_green, cone_constants, eval_grid

logger = logging.getLogger(__name__)

DEFAULT_H3_RANGE = (1e-8, 1e-2)
DEFAULT_H4_RANGE = (1e2, 1e8)
DEFAULT_GROWTH_FACTOR = 10.0
GROWTH_SAMPLES = 16

# H1/H2 每个区间上 y 的最少均匀样本数 (含两端点)
MIN_Y_SAMPLES = 64

# 阈值比较的相对松弛，用于识别等号情形
THRESHOLD_SLACK = 1e-12


def _f_table(P: Problem, ys: np.ndarray) -> np.ndarray:
    """f(t, y)，行为求值点 t = s+ν-1，列为 y 样本"""
    points = eval_grid(P.nu, P.b).points
    return np.array([[P.f_at(float(t), float(y)) for y in ys] for t in points])


def _slack(threshold: float) -> float:
    return THRESHOLD_SLACK * max(1.0, abs(threshold))


def _radius_evidence(P: Problem, C: ConeConstants, r: float, samples: int) -> RadiusEvidence:
    points = eval_grid(P.nu, P.b).points

    ys = np.linspace(0.0, r, samples)
    table = _f_table(P, ys)
    i, j = np.unravel_index(np.argmax(table), table.shape)
    max_f = float(table[i, j])
    h1_threshold = C.eta * r / P.lambda_

    ys2 = np.linspace(C.gamma * r, r, samples)
    table2 = _f_table(P, ys2)
    k, l = np.unravel_index(np.argmin(table2), table2.shape)
    min_f = float(table2[k, l])
    h2_threshold = C.sigma * r / P.lambda_

    return RadiusEvidence(
        radius=r,
        h1_holds=max_f <= h1_threshold + _slack(h1_threshold),
        h1_tight=abs(max_f - h1_threshold) <= _slack(h1_threshold),
        h1_max_f=max_f,
        h1_threshold=h1_threshold,
        h1_witness=[float(points[i]), float(ys[j])],
        h2_holds=min_f >= h2_threshold - _slack(h2_threshold),
        h2_min_f=min_f,
        h2_threshold=h2_threshold,
        h2_witness=[float(points[k]), float(ys2[l])],
    )


def _growth(P: Problem, y_range: tuple[float, float], threshold: float, toward_zero: bool) -> GrowthCheck:
    """
    在对数间隔的 y 上计算 min_t f(t,y)/y
    朝极限方向单调不减、且极端样本处比值超过阈值并大于另一端时，判定为启发式成立
    """
    lo, hi = y_range
    if not 0 < lo < hi:
        raise DomainError(f"抽样区间必须满足 0 < lo < hi, 实际为 ({lo}, {hi})")
    ys = np.logspace(np.log10(lo), np.log10(hi), GROWTH_SAMPLES)
    ratios = _f_table(P, ys).min(axis=0) / ys

    ordered = ratios[::-1] if toward_zero else ratios
    monotone = bool(np.all(np.diff(ordered) >= -THRESHOLD_SLACK * np.abs(ordered[:-1])))
    extreme, other = ordered[-1], ordered[0]
    return GrowthCheck(
        heuristic=monotone and extreme > threshold and extreme > other,
        threshold=threshold,
        y_samples=ys.tolist(),
        ratios=ratios.tolist(),
    )


def check_conditions(
    P: Problem,
    r_grid: Sequence[float],
    y_samples_per_r: int = 64,
    G: Optional[GreenMatrix] = None,
    C: Optional[ConeConstants] = None,
    h3_range: tuple[float, float] = DEFAULT_H3_RANGE,
    h4_range: tuple[float, float] = DEFAULT_H4_RANGE,
    factor: float = DEFAULT_GROWTH_FACTOR,
) -> ConditionReport:
    """
    抽样检查 H1–H4

    H1 (半径 r): y ∈ [0, r] 上 max f ≤ ηr/λ
    H2 (半径 r): y ∈ [γr, r] 上 min f ≥ σr/λ
    H3 / H4: min_t f(t,y)/y 在 y → 0+ / y → ∞ 方向上的启发式判断，阈值 factor·σ/λ
    f 只在算子 F 使用的点 t = s+ν-1 (s = 0..b) 上取值

    :param r_grid: 待检查的半径，正数且升序
    :param y_samples_per_r: 每个区间上 y 的均匀样本数 (含两端点)，不少于 MIN_Y_SAMPLES
    """
    radii = [float(r) for r in r_grid]
    if not radii or any(not r > 0 for r in radii):
        raise DomainError(f"半径列表必须非空且全部为正, 实际为 {radii}")
    if sorted(radii) != radii:
        raise DomainError(f"半径列表必须升序, 实际为 {radii}")
    if y_samples_per_r < MIN_Y_SAMPLES:
        raise DomainError(f"每个半径至少需要 {MIN_Y_SAMPLES} 个样本, 实际为 {y_samples_per_r}")
    if G is None:
        G = build_green(P.nu, P.b)
    if C is None:
        C = cone_constants(P, G)

    evidence = [_radius_evidence(P, C, r, y_samples_per_r) for r in radii]

    h1_radii = [e for e in evidence if e.h1_holds]
    h1 = H1Check(holds=bool(h1_radii))
    if h1_radii:
        first = h1_radii[0]
        h1 = H1Check(
            holds=True,
            radius=first.radius,
            max_f_over_threshold=first.h1_max_f / first.h1_threshold,
            tight=first.h1_tight,
        )

    h2_radii = [e for e in evidence if e.h2_holds]
    h2 = H2Check(holds=bool(h2_radii))
    if h2_radii:
        last = h2_radii[-1]
        h2 = H2Check(holds=True, radius=last.radius, min_f_over_threshold=last.h2_min_f / last.h2_threshold)

    threshold = factor * C.sigma / P.lambda_
    h3 = _growth(P, h3_range, threshold, toward_zero=True)
    h4 = _growth(P, h4_range, threshold, toward_zero=False)

    positive_ys = np.concatenate(
        [np.linspace(0.0, r, y_samples_per_r)[1:] for r in radii] + [np.asarray(h3.y_samples), np.asarray(h4.y_samples)]
    )
    f_positive = bool(np.all(_f_table(P, positive_ys) > 0))

    r1 = h1.radius
    r2 = h2.radius
    theorem_3_2 = r1 is not None and r2 is not None and r1 < r2
    theorem_3_3 = h1.holds and h3.heuristic
    theorem_3_4 = h2.holds and h4.heuristic and f_positive
    m = h1.radius if theorem_3_3 else (h2.radius if theorem_3_4 else None)

    report = ConditionReport(
        h1=h1,
        h2=h2,
        h3=h3,
        h4=h4,
        f_positive=f_positive,
        theorem_3_2_applicable=theorem_3_2,
        r1=r1 if theorem_3_2 else None,
        r2=r2 if theorem_3_2 else None,
        theorem_3_3_applicable=theorem_3_3,
        theorem_3_4_applicable=theorem_3_4,
        m=m,
        samples=y_samples_per_r,
        evidence=evidence,
    )
    logger.info(
        f"[CHECK] {P.describe()}: H1={h1.holds}, H2={h2.holds}, H3≈{h3.heuristic}, H4≈{h4.heuristic}"
    )
    return report

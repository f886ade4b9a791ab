"""
配置与报告 Schema 定义
问题配置由 JSON 文件给出，经 pydantic 校验；各命令的报告同样以 pydantic 模型表示，便于输出 JSON
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from common.exception import MyException
from common.expr_parser import parse_expr, variables


def _check_expression(text: str, allowed: set[str]) -> str:
    try:
        tree = parse_expr(text)
    except MyException as e:
        raise ValueError(e.message)
    extra = variables(tree) - allowed
    if extra:
        raise ValueError(f"表达式只能使用变量 {sorted(allowed)}, 出现了 {sorted(extra)}")
    return text


# ==================== 问题配置 ====================
class SolverConfig(BaseModel):
    """求解器参数"""

    model_config = ConfigDict(extra="forbid")

    method: Literal["picard", "newton"] = Field("newton", description="求解方法: picard 或 newton")
    tol: float = Field(1e-10, gt=0, description="收敛容差")
    max_iter: int = Field(500, ge=1, description="最大迭代次数")
    damping: float = Field(1.0, gt=0, le=1, description="Picard 阻尼系数 θ ∈ (0,1]")
    starts: List[float] = Field(
        default_factory=lambda: [0.01, 0.1, 1.0, 10.0],
        min_length=1,
        description="多初值搜索的初值范数 (零初值自动加入)",
    )

    @field_validator("starts")
    @classmethod
    def _positive_starts(cls, value: List[float]) -> List[float]:
        if any(not c > 0 for c in value):
            raise ValueError("所有初值必须为正数")
        return value


class ProblemConfig(BaseModel):
    """
    边值问题 -Δ^ν y(t) = λ h(t+ν-1) f(t+ν-1, y(t+ν-1)), y(ν-2) = y(ν+b) = 0 的配置
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    nu: float = Field(gt=1, le=2, description="分数阶 ν, 1 < ν ≤ 2")
    b: int = Field(ge=1, description="区间右端 b, 正整数")
    lambda_: float = Field(alias="lambda", gt=0, description="正参数 λ")
    h: str = Field(description="h(t) 的表达式, 只能引用 t")
    f: str = Field(description="f(t, y) 的表达式, 可引用 t 和 y")
    solver: SolverConfig = Field(default_factory=SolverConfig, description="求解器参数")
    sigma_unweighted: bool = Field(False, description="σ 是否使用不含 h 的字面形式")

    @field_validator("h")
    @classmethod
    def _check_h(cls, value: str) -> str:
        return _check_expression(value, {"t"})

    @field_validator("f")
    @classmethod
    def _check_f(cls, value: str) -> str:
        return _check_expression(value, {"t", "y"})


# ==================== 常数报告 ====================
class ConeConstants(BaseModel):
    """锥常数 γ、η、σ 以及四分区间信息"""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(description="γ ∈ (0,1)")
    eta: float = Field(description="η = 1 / Σ G(s+ν-1,s) h(s+ν-1)")
    sigma: float = Field(description="σ = 1 / (γ Σ G(t*,s) h(s+ν-1))")
    quarter_lo: int = Field(description="四分区间 [(ν+b)/4, 3(ν+b)/4] 的第一个网格下标")
    quarter_hi: int = Field(description="四分区间的最后一个网格下标")
    quarter_points: List[float] = Field(description="四分区间内的网格点")
    midpoint_index: int = Field(description="t* 的网格下标")
    midpoint: float = Field(description="t* = ⌊(b-ν)/2⌋ + ν")
    midpoint_in_quarter: bool = Field(description="t* 是否落在四分区间内")
    s_lo: int = Field(description="σ 求和下限 ⌊(b+ν)/4 - ν + 1⌋")
    s_hi: int = Field(description="σ 求和上限 ⌊3(b+ν)/4 - ν + 1⌋")
    sigma_unweighted: bool = Field(False, description="σ 是否按不含 h 的字面形式计算")


# ==================== 条件检查报告 ====================
class RadiusEvidence(BaseModel):
    """单个半径 r 处 H1/H2 的抽样证据"""

    radius: float
    h1_holds: bool
    h1_tight: bool = Field(description="max f 与阈值 ηr/λ 相差在舍入误差之内")
    h1_max_f: float
    h1_threshold: float
    h1_witness: List[float] = Field(description="取到 max f 的 (t, y)")
    h2_holds: bool
    h2_min_f: float
    h2_threshold: float
    h2_witness: List[float] = Field(description="取到 min f 的 (t, y)")


class H1Check(BaseModel):
    holds: bool
    radius: Optional[float] = Field(None, description="成立的最小半径")
    max_f_over_threshold: Optional[float] = None
    tight: bool = False


class H2Check(BaseModel):
    holds: bool
    radius: Optional[float] = Field(None, description="成立的最大半径")
    min_f_over_threshold: Optional[float] = None


class GrowthCheck(BaseModel):
    """H3 (y→0+) / H4 (y→∞) 的启发式检查，只基于有限抽样，不构成证明"""

    heuristic: bool
    threshold: float = Field(description="比较阈值 factor·σ/λ")
    y_samples: List[float]
    ratios: List[float] = Field(description="min_t f(t,y)/y")
    note: str = "heuristic"


class ConditionReport(BaseModel):
    h1: H1Check
    h2: H2Check
    h3: GrowthCheck
    h4: GrowthCheck
    f_positive: bool = Field(description="在抽样的 y > 0 上 f > 0")
    theorem_3_2_applicable: bool
    r1: Optional[float] = None
    r2: Optional[float] = None
    theorem_3_3_applicable: bool
    theorem_3_4_applicable: bool
    m: Optional[float] = Field(None, description="两解定理中分隔两个解范数的半径")
    samples: int = Field(description="每个半径的 y 抽样数")
    evidence: List[RadiusEvidence]


# ==================== 求解报告 ====================
class StartOutcome(BaseModel):
    """多初值搜索中单个初值的结果"""

    start: float
    status: Literal["converged", "duplicate", "failed", "rejected"]
    message: str = ""
    norm: Optional[float] = None


class SolutionReport(BaseModel):
    index: int
    norm: float
    residual_norm: float
    fixed_point_residual: float
    iterations: int
    method: str
    bc_ok: bool
    positive: bool
    in_cone: bool
    in_bracket: Optional[bool] = None
    above_m: Optional[bool] = Field(None, description="‖y‖ > m，未给出 m 时为空")


class ShellProbe(BaseModel):
    """半径 r 的球壳上 ‖Fy‖/‖y‖ 的抽样"""

    radius: float
    samples: int
    min_ratio: float
    max_ratio: float
    compressive: bool = Field(description="所有样本满足 ‖Fy‖ ≤ ‖y‖")
    expansive: bool = Field(description="所有样本满足 ‖Fy‖ ≥ ‖y‖")

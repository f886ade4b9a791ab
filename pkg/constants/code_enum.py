from enum import Enum


class SysCodeEnum(Enum):
    """
    系统状态码定义
    (code, 简短信息, 详细描述)，code 即命令行退出码
    """

    c_0 = (0, "ok", "ok")

    c_9999 = (1, "系统异常", "未预期的系统异常")

    CONFIG_ERROR = (2, "配置错误", "配置文件或命令行参数错误")
    GREEN_VALIDATION = (3, "Green函数校验失败", "Green函数与直接线性求解结果不一致")
    DEGENERATE_CONE = (4, "锥退化", "四分区间为空或 σ 分母为 0")
    NO_SOLUTION = (5, "无解", "所有初值均未收敛到正解")

    # 数值计算相关状态码（在命令行层面折算为上面的退出码）
    DOMAIN_ERROR = (2, "定义域错误", "网格点不在移位格点上或缺少所需的网格点")
    POLE_NUMERATOR = (2, "分子极点", "Γ(t+1) 为极点，下降阶乘无定义")
    EXPR_SYNTAX = (2, "表达式语法错误", "表达式无法解析")
    EXPR_UNKNOWN = (2, "未知标识符", "表达式中出现不支持的变量或函数")
    EXPR_EVAL = (2, "表达式求值错误", "表达式求值超出定义域")
    SINGULAR_SYSTEM = (3, "线性方程组奇异", "直接求解 Green 校验方程组失败")
    DIVERGED = (5, "迭代发散", "Picard 迭代范数超过上限")
    MAX_ITERATIONS = (5, "超过最大迭代次数", "迭代未在最大次数内收敛")
    SINGULAR_JACOBIAN = (5, "Jacobian 奇异", "Newton 迭代 Jacobian 矩阵奇异")
    NEGATIVE_SOLUTION = (5, "负解", "收敛解存在负值，不是正解")


class SolverMethodEnum(Enum):
    """
    求解方法 枚举
    """

    PICARD = ("picard", "Picard 不动点迭代")

    NEWTON = ("newton", "Newton 迭代")


class StartStatusEnum(Enum):
    """
    多初值搜索中单个初值的结果
    """

    CONVERGED = ("converged", "收敛")

    DUPLICATE = ("duplicate", "与已有解重复")

    FAILED = ("failed", "未收敛")

    REJECTED = ("rejected", "收敛但不是正解")


def get_method_name(member_name):
    """
    根据 SolverMethodEnum 成员的值获取对应的中文名称

    :param member_name: 方法名字符串，如 "picard"
    :return: 对应的中文名称字符串
    """
    for member in SolverMethodEnum:
        if member.value[0] == member_name:
            return member.value[1]
    raise ValueError(f"'{member_name}' 不是有效的SolverMethodEnum枚举成员")

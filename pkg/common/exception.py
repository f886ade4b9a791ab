from constants.code_enum import SysCodeEnum


class MyException(Exception):
    """
    自定义异常类，用于处理数值计算与配置中的异常情况。

    接收一个 SysCodeEnum 类型的参数，从中提取错误代码与错误消息；
    错误代码同时作为命令行的退出码。
    """

    def __init__(self, ex_code: SysCodeEnum, message: str = ""):
        """
        初始化自定义异常实例。

        Args:
            ex_code (SysCodeEnum): 错误代码枚举值，包含错误代码、错误消息和详细信息。
            message (str, optional): 额外的错误详细信息，默认为空字符串。
        """
        self.ex_code = ex_code
        self.code = ex_code.value[0]
        self.message = message if message else ex_code.value[1]
        super().__init__(f"{ex_code.name}({self.code}): {self.message}")

    def __str__(self) -> str:
        return f"{self.ex_code.name}: code: {self.code}, message: {self.message}"

    def to_dict(self) -> dict:
        """
        将异常信息转换为字典格式，方便在 JSON 报告中输出。

        Returns:
            dict: 包含错误名称、错误代码和错误消息的字典。
        """
        return {"error": self.ex_code.name, "code": self.code, "message": self.message}


class ConfigError(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.CONFIG_ERROR, message)


class DomainError(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.DOMAIN_ERROR, message)


class PoleNumerator(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.POLE_NUMERATOR, message)


class ExprSyntaxError(MyException):
    """
    表达式语法错误，position 为 0 起始的列号
    """

    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(SysCodeEnum.EXPR_SYNTAX, f"第 {position} 列: {message}")


class UnknownIdentifier(MyException):
    def __init__(self, name: str, position: int = 0):
        self.name = name
        self.position = position
        super().__init__(SysCodeEnum.EXPR_UNKNOWN, f"第 {position} 列: 未知标识符 '{name}'")


class EvalError(MyException):
    def __init__(self, reason: str = ""):
        self.reason = reason
        super().__init__(SysCodeEnum.EXPR_EVAL, reason)


class GreenValidationError(MyException):
    def __init__(self, message: str = "", discrepancy: float = float("nan")):
        self.discrepancy = discrepancy
        super().__init__(SysCodeEnum.GREEN_VALIDATION, message)


class SingularSystem(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.SINGULAR_SYSTEM, message)


class DegenerateCone(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.DEGENERATE_CONE, message)


class Diverged(MyException):
    """
    Picard 迭代发散，history 保存最后若干次迭代的范数
    """

    def __init__(self, history: list[float], message: str = ""):
        self.history = list(history)
        super().__init__(SysCodeEnum.DIVERGED, message or f"范数历史(末尾): {self.history}")


class MaxIterations(MyException):
    def __init__(self, iterations: int, message: str = ""):
        self.iterations = iterations
        super().__init__(SysCodeEnum.MAX_ITERATIONS, message or f"迭代 {iterations} 次仍未收敛")


class SingularJacobian(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.SINGULAR_JACOBIAN, message)


class NegativeSolution(MyException):
    def __init__(self, min_value: float, message: str = ""):
        self.min_value = min_value
        super().__init__(SysCodeEnum.NEGATIVE_SOLUTION, message or f"解的最小值为 {min_value:.3e}")


class NoSolution(MyException):
    def __init__(self, message: str = ""):
        super().__init__(SysCodeEnum.NO_SOLUTION, message)

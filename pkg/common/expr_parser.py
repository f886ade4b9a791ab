"""
算术表达式解析器
用户在配置文件中以文本形式给出 h(t) 与 f(t, y)，这里负责把文本解析成不可变语法树并求值

语法 (优先级从低到高):
    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          右结合
    primary := NUMBER | 't' | 'y' | FUNC '(' expr (',' expr)* ')' | '(' expr ')'
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

from common.exception import EvalError, ExprSyntaxError, UnknownIdentifier

logger = logging.getLogger(__name__)

VARIABLES = frozenset({"t", "y"})

# 函数名 -> (最少参数个数, 最多参数个数)，None 表示不限
FUNCTIONS: dict[str, tuple[int, Optional[int]]] = {
    "exp": (1, 1),
    "ln": (1, 1),
    "sqrt": (1, 1),
    "abs": (1, 1),
    "min": (2, None),
    "max": (2, None),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]


def tokenize(text: str) -> list[Token]:
    """
    词法分析，返回的列表以 kind="end" 的哨兵结尾
    :param text: 表达式文本
    :return: Token 列表
    """
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(pos, f"无法识别的字符 '{text[pos]}'")
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class ExprParser:
    """递归下降表达式解析器"""

    def __init__(self, text: str):
        """
        :param text: 表达式文本
        """
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, op: str) -> Optional[Token]:
        if self.current.kind == "op" and self.current.text == op:
            return self._advance()
        return None

    def _expect(self, op: str) -> Token:
        token = self._accept(op)
        if token is None:
            found = self.current.text or "表达式结尾"
            raise ExprSyntaxError(self.current.pos, f"期望 '{op}', 实际为 '{found}'")
        return token

    def parse(self) -> Expr:
        if self.current.kind == "end":
            raise ExprSyntaxError(0, "表达式为空")
        tree = self._expr()
        if self.current.kind != "end":
            raise ExprSyntaxError(self.current.pos, f"多余的符号 '{self.current.text}'")
        return tree

    def _expr(self) -> Expr:
        node = self._term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Expr:
        if self._accept("-"):
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._primary()
        if self._accept("^"):
            # 指数允许带负号，且 ^ 右结合: 2^3^2 = 2^(3^2)
            return BinOp("^", base, self._unary())
        return base

    def _primary(self) -> Expr:
        token = self.current
        if token.kind == "num":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(token.pos, f"数值 '{token.text}' 超出浮点范围")
            return Num(value)
        if token.kind == "name":
            self._advance()
            if token.text in VARIABLES:
                return Var(token.text)
            if token.text in FUNCTIONS:
                return self._call(token)
            raise UnknownIdentifier(token.text, token.pos)
        if self._accept("("):
            node = self._expr()
            self._expect(")")
            return node
        found = token.text or "表达式结尾"
        raise ExprSyntaxError(token.pos, f"意外的符号 '{found}'")

    def _call(self, name_token: Token) -> Call:
        self._expect("(")
        args = [self._expr()]
        while self._accept(","):
            args.append(self._expr())
        self._expect(")")
        lo, hi = FUNCTIONS[name_token.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            expected = f"{lo}" if lo == hi else f"至少 {lo}"
            raise ExprSyntaxError(
                name_token.pos, f"函数 {name_token.text} 需要 {expected} 个参数, 实际为 {len(args)}"
            )
        return Call(name_token.text, tuple(args))


def parse_expr(text: str) -> Expr:
    """
    解析表达式文本
    :param text: 例如 "(1/100)*t*(y^0.5 + y^2)"
    :return: 不可变语法树
    """
    return ExprParser(text).parse()


def _power(base: float, exponent: float) -> float:
    if base == 0.0:
        if exponent < 0:
            raise EvalError(f"0 的负数次幂 0^{exponent!r} 无定义")
        # y^0.5 在 y = 0 处取极限值 0
        return 1.0 if exponent == 0 else 0.0
    if base < 0 and not float(exponent).is_integer():
        raise EvalError(f"负数的非整数次幂 {base!r}^{exponent!r} 无定义")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise EvalError(f"{base!r}^{exponent!r} 溢出")


def _apply_function(name: str, args: list[float]) -> float:
    x = args[0]
    if name == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise EvalError(f"exp({x!r}) 溢出")
    if name == "ln":
        if x <= 0:
            raise EvalError(f"ln 的参数必须为正, 实际为 {x!r}")
        return math.log(x)
    if name == "sqrt":
        if x < 0:
            raise EvalError(f"sqrt 的参数不能为负, 实际为 {x!r}")
        return math.sqrt(x)
    if name == "abs":
        return abs(x)
    if name == "min":
        return min(args)
    if name == "max":
        return max(args)
    raise UnknownIdentifier(name)


def _eval(node: Expr, env: dict[str, Optional[float]]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        value = env.get(node.name)
        if value is None:
            raise EvalError(f"变量 {node.name} 未赋值")
        return float(value)
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        return _apply_function(node.name, [_eval(a, env) for a in node.args])

    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        result = left + right
    elif node.op == "-":
        result = left - right
    elif node.op == "*":
        result = left * right
    elif node.op == "/":
        if right == 0.0:
            raise EvalError(f"除数为 0: {left!r}/0")
        result = left / right
    else:
        result = _power(left, right)
    if not math.isfinite(result):
        raise EvalError(f"{left!r} {node.op} {right!r} 的结果不是有限数")
    return result


def eval_expr(e: Expr, t: Optional[float] = None, y: Optional[float] = None) -> float:
    """
    对语法树求值
    :param e: parse_expr 返回的语法树
    :param t: 变量 t 的取值
    :param y: 变量 y 的取值
    :return: 有限实数；定义域越界时抛出 EvalError
    """
    result = _eval(e, {"t": t, "y": y})
    if not math.isfinite(result):
        raise EvalError(f"表达式结果不是有限数: {result!r}")
    return result


def to_text(e: Expr) -> str:
    """
    打印为全括号形式，重新解析后得到结构相同的语法树
    """
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    return f"({to_text(e.left)} {e.op} {to_text(e.right)})"


def variables(e: Expr) -> set[str]:
    """语法树中出现的自由变量"""
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Call):
        return set().union(*(variables(a) for a in e.args))
    return variables(e.left) | variables(e.right)


def compile_expr(text: str) -> Callable[[float, float], float]:
    """
    解析并返回可调用对象 fn(t, y)
    """
    tree = parse_expr(text)
    logger.debug("[EXPR] 编译表达式 %s -> %s", text, to_text(tree))

    def fn(t: Optional[float] = None, y: Optional[float] = None) -> float:
        return eval_expr(tree, t, y)

    fn.tree = tree
    return fn

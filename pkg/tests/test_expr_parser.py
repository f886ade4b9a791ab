import dataclasses
import math

import pytest
from hypothesis import assume, given, seed, settings
from hypothesis import strategies as st

from common.exception import EvalError, ExprSyntaxError, UnknownIdentifier
from common.expr_parser import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    compile_expr,
    eval_expr,
    parse_expr,
    to_text,
    variables,
)


def evaluate(text: str, t=None, y=None) -> float:
    return eval_expr(parse_expr(text), t, y)


# ==================== 求值 ====================
@pytest.mark.parametrize(
    "text, t, y, expected",
    [
        ("2*(3+4)", None, None, 14.0),
        ("y^2 + sqrt(y)", None, 4.0, 18.0),
        ("exp(t)", 0.0, None, 1.0),
        ("-t^2", 3.0, None, -9.0),
        ("-2^2", None, None, -4.0),
        ("2^3^2", None, None, 512.0),
        ("2^-1", None, None, 0.5),
        ("(-2)^3", None, None, -8.0),
        ("1-2-3", None, None, -4.0),
        ("8/4/2", None, None, 1.0),
        ("min(3, 1, 2) + max(t, y)", 4.0, 5.0, 6.0),
        ("abs(-t) + ln(1)", 2.5, None, 2.5),
        ("y^0.5", None, 0.0, 0.0),
        ("y^0", None, 0.0, 1.0),
    ],
)
def test_eval_examples(text, t, y, expected):
    assert evaluate(text, t, y) == expected


def test_eval_example_nonlinearity_at_first_interior_point():
    assert evaluate("(1/100)*t*(y^0.5 + y^2)", 1.25, 1.0) == pytest.approx(0.025, rel=1e-15)


@pytest.mark.parametrize(
    "text, t, y",
    [
        ("sqrt(y)", None, -1.0),
        ("ln(t)", 0.0, None),
        ("0^-1", None, None),
        ("y^(-0.5)", None, 0.0),
        ("1/(t-1)", 1.0, None),
        ("(-8)^(1/3)", None, None),
        ("exp(1000)", None, None),
        ("1e308*10", None, None),
        ("t + y", 1.0, None),
    ],
)
def test_eval_domain_errors(text, t, y):
    with pytest.raises(EvalError):
        evaluate(text, t, y)


# ==================== 语法错误 ====================
@pytest.mark.parametrize(
    "text, position",
    [
        ("", 0),
        ("2t", 1),
        ("2*(3+4", 6),
        ("2*", 2),
        ("3 $ 4", 2),
        ("exp(1, 2)", 0),
        ("1 + min(1)", 4),
        ("1e999", 0),
        ("(1 + 2))", 7),
    ],
)
def test_syntax_error_positions(text, position):
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr(text)
    assert exc.value.position == position


@pytest.mark.parametrize("text, name, position", [("foo(1)", "foo", 0), ("1 + bar", "bar", 4), ("x*y", "x", 0)])
def test_unknown_identifier(text, name, position):
    with pytest.raises(UnknownIdentifier) as exc:
        parse_expr(text)
    assert exc.value.name == name
    assert exc.value.position == position


def test_whitespace_is_insignificant():
    assert parse_expr(" 2 *\t( 3+4 ) ") == parse_expr("2*(3+4)")


def test_tree_shape_and_immutability():
    tree = parse_expr("-t^2")
    assert tree == Neg(BinOp("^", Var("t"), Num(2.0)))
    with pytest.raises(dataclasses.FrozenInstanceError):
        tree.operand = Num(1.0)


def test_variables_and_compile():
    assert variables(parse_expr("t*y + exp(t)")) == {"t", "y"}
    assert variables(parse_expr("min(1, 2)")) == set()

    fn = compile_expr("t + 2*y")
    assert fn(1.0, 2.0) == 5.0
    assert fn.tree == parse_expr("t + 2*y")


# ==================== 性质测试 ====================
numbers = st.floats(min_value=0.0, max_value=100.0, allow_nan=False, allow_infinity=False).map(lambda v: Num(v + 0.0))
leaves = st.one_of(numbers, st.sampled_from([Var("t"), Var("y")]))


def _extend(ops: str):
    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from(ops), children, children).map(lambda a: BinOp(*a)),
            children.map(lambda c: Call("abs", (c,))),
            st.tuples(st.sampled_from(["min", "max"]), st.lists(children, min_size=2, max_size=3)).map(
                lambda a: Call(a[0], tuple(a[1]))
            ),
        )

    return extend


all_trees = st.recursive(leaves, _extend("+-*/^"), max_leaves=12)
safe_trees = st.recursive(leaves, _extend("+-*"), max_leaves=12)


@seed(7)
@settings(max_examples=300, deadline=None)
@given(tree=all_trees)
def test_print_then_parse_is_structurally_identical(tree):
    assert parse_expr(to_text(tree)) == tree
    assert to_text(parse_expr(to_text(tree))) == to_text(tree)


def reference(node, t: float, y: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t if node.name == "t" else y
    if isinstance(node, Neg):
        return -reference(node.operand, t, y)
    if isinstance(node, Call):
        args = [reference(a, t, y) for a in node.args]
        return {"abs": lambda a: abs(a[0]), "min": min, "max": max}[node.name](args)
    left, right = reference(node.left, t, y), reference(node.right, t, y)
    return {"+": left + right, "-": left - right, "*": left * right}[node.op]


@seed(11)
@settings(max_examples=1000, deadline=None)
@given(
    tree=safe_trees,
    t=st.floats(-10.0, 10.0, allow_nan=False),
    y=st.floats(-10.0, 10.0, allow_nan=False),
)
def test_eval_agrees_with_reference_evaluator(tree, t, y):
    expected = reference(tree, t, y)
    assume(math.isfinite(expected))
    assert eval_expr(parse_expr(to_text(tree)), t, y) == expected

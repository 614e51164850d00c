import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvlab.expr import (BinOp, Call, Const, ExpressionDomainError, ExpressionSyntaxError, Neg, Num,
                          UnknownIdentifierError, Var, parse_expression, pretty)
from curvlab.jets import eval_values


def test_product_node():
    node = parse_expression("u*v")
    assert node == BinOp("*", Var("u"), Var("v"))


def test_sin_cos_at_origin():
    assert float(eval_values(parse_expression("sin(u)*cos(v)"), 0.0, 0.0)) == 0.0


def test_counterexample_formula_parses():
    node = parse_expression("x*y*(log(x^2+y^2+0.01)/log(0.01))^0.3")
    x, y = 0.2, -0.1
    expected = x * y * (math.log(x * x + y * y + 0.01) / math.log(0.01)) ** 0.3
    assert float(eval_values(node, x, y)) == pytest.approx(expected, rel=1e-14)


def test_precedence_and_associativity():
    ev = lambda s: float(eval_values(parse_expression(s), 2.0, 3.0))
    assert ev("1+2*3") == 7
    assert ev("2^3^2") == 2 ** 9          # right associative
    assert ev("8/2/2") == 2               # left associative
    assert ev("u-v-1") == -2
    assert ev("-u^2") == 4                # unary minus binds to the atom
    assert ev("pi") == pytest.approx(math.pi)


def test_aliases():
    assert parse_expression("x+y") == parse_expression("u+v")


@pytest.mark.parametrize("src, offset", [("u+*v", 2), ("sin(u", 5), ("u $ v", 2), ("", 0)])
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(src)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expression("w+1")


def test_domain_error_names_subexpression():
    with pytest.raises(ExpressionDomainError) as info:
        eval_values(parse_expression("log(u-1)"), 0.5, 0.0)
    assert "log" in str(info.value)


# -- round trip ------------------------------------------------------------------

leaves = st.one_of(
    st.builds(Num, st.floats(0, 1e6, allow_nan=False).map(lambda x: float(f"{x:.6g}"))),
    st.sampled_from([Var("u"), Var("v"), Const("pi")]),
)


def _tree(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
        st.builds(Neg, children),
        st.builds(Call, st.sampled_from(["sin", "cos", "exp", "log", "sqrt", "abs"]), children),
    )


trees = st.recursive(leaves, _tree, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_pretty_parse_round_trip(tree):
    assert parse_expression(pretty(tree)) == tree


def test_whitespace_insensitive():
    assert parse_expression("  sin( u ) *\tcos(v) ^ 2 ") == parse_expression("sin(u)*cos(v)^2")

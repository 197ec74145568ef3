import pytest

from roufalsify.stl import ParseError, parse
from roufalsify.stl.formula import (
    And,
    BinOp,
    Const,
    Globally,
    Interval,
    Neg,
    Not,
    Or,
    Pred,
    Until,
    Var,
)


def test_globally_with_interval():
    f = parse("G[0,5](dist - 5 >= 0)")
    assert f == Globally(Pred(BinOp("-", Var("dist"), Const(5.0)), strict=False), Interval(0.0, 5.0))


def test_negated_nonstrict_leq():
    f = parse("!(dist <= 0)")
    assert f == Not(Pred(Neg(Var("dist")), strict=False))


def test_bare_expressions_as_predicates():
    f = parse("a U[1,2] b")
    assert f == Until(Interval(1.0, 2.0), Pred(Var("a")), Pred(Var("b")))


def test_unbounded_globally_flagged():
    f = parse("G(dist > 0)")
    assert isinstance(f, Globally)
    assert f.interval is None
    assert f.child == Pred(Var("dist"), strict=True)


def test_strictness_normalization():
    assert parse("x < 5") == Pred(BinOp("-", Const(5.0), Var("x")), strict=True)
    assert parse("x <= 5") == Pred(BinOp("-", Const(5.0), Var("x")), strict=False)
    assert parse("x > 5") == Pred(BinOp("-", Var("x"), Const(5.0)), strict=True)
    assert parse("x >= 5") == Pred(BinOp("-", Var("x"), Const(5.0)), strict=False)


def test_precedence_not_until_and_or():
    f = parse("!a & b | c")
    assert isinstance(f, Or)
    assert isinstance(f.left, And)
    assert f.left.left == Not(Pred(Var("a")))
    f = parse("a U[0,1] b & c")
    assert isinstance(f, And)
    assert isinstance(f.left, Until)


def test_parenthesized_formula_vs_expression():
    f = parse("(x + 1) > 0")
    assert f == Pred(BinOp("+", Var("x"), Const(1.0)), strict=True)
    f = parse("(x > 0) & (y > 0)")
    assert isinstance(f, And)


@pytest.mark.parametrize("text", [
    "G[0,5](dist - 5 >= 0)",
    "!(dist <= 0)",
    "a U[1,2] b",
    "G(dist > 0)",
    "((x > 0) | !(y <= 1)) & F[0.5,2](x - y >= 0.25)",
    "(x + 2 * y) / 4 >= -1",
    "x U[0,3] (y U[1,2] z)",
])
def test_pretty_print_reparses_to_equal_ast(text):
    f = parse(text)
    assert parse(f.to_text()) == f


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse("G[0,5](dist -")
    assert info.value.line == 1
    assert info.value.column > 0
    with pytest.raises(ParseError):
        parse("x >")
    with pytest.raises(ParseError):
        parse("(x > 0")


def test_reserved_words_rejected_as_signals():
    with pytest.raises(ParseError):
        parse("U > 0")


def test_bad_interval_rejected():
    with pytest.raises(ParseError):
        parse("G[2,1](x > 0)")
    with pytest.raises(ParseError):
        parse("G[-1,1](x > 0)")
    with pytest.raises(ParseError):
        parse("G[1,1](x > 0)")


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        parse("x > 0 )")

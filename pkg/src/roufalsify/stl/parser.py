"""Recursive-descent parser for the concrete STL syntax.

Grammar (precedence ``!`` > ``U`` > ``&`` > ``|``, parentheses anywhere)::

    formula  := pred | "!" formula | formula "&" formula | formula "|" formula
              | formula "U" interval formula | ("G"|"F") interval? "(" formula ")"
    interval := "[" num "," num "]"
    pred     := expr cmp expr | expr          (bare expr means expr >= 0)
    cmp      := "<" | "<=" | ">" | ">="
    expr     := arithmetic over signal names with + - * / and literals

``G``, ``F`` and ``U`` are reserved words and cannot be used as signal names.
``G``/``F`` without an interval are bound to the trace horizon at evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formula import (
    And,
    BinOp,
    Const,
    Eventually,
    Expr,
    Formula,
    Globally,
    Interval,
    Neg,
    Not,
    Or,
    Pred,
    Until,
    Var,
    sub,
)

_RESERVED = {"G", "F", "U"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, number, op, end
    text: str
    line: int
    column: int


_OPS = ("<=", ">=", "<", ">", "!", "&", "|", "(", ")", "[", "]", ",", "+", "-", "*", "/")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            word = text[i:j]
            try:
                float(word)
            except ValueError:
                raise ParseError(f"bad number {word!r}", line, col) from None
            tokens.append(_Token("number", word, line, col))
            col += j - i
            i = j
            continue
        for op in _OPS:
            if text.startswith(op, i):
                tokens.append(_Token("op", op, line, col))
                i += len(op)
                col += len(op)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.column)
        return self.next()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.column)

    # formula := or
    def formula(self) -> Formula:
        return self.or_()

    def or_(self) -> Formula:
        node = self.and_()
        while self.peek().text == "|":
            self.next()
            node = Or(node, self.and_())
        return node

    def and_(self) -> Formula:
        node = self.until()
        while self.peek().text == "&":
            self.next()
            node = And(node, self.until())
        return node

    def until(self) -> Formula:
        node = self.unary()
        while self.peek().kind == "ident" and self.peek().text == "U":
            self.next()
            iv = self.interval()
            node = Until(iv, node, self.unary())
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.next()
            return Not(self.unary())
        if tok.kind == "ident" and tok.text in ("G", "F"):
            self.next()
            iv = self.interval() if self.peek().text == "[" else None
            self.expect("(")
            child = self.formula()
            self.expect(")")
            return Globally(child, iv) if tok.text == "G" else Eventually(child, iv)
        return self.atom()

    def atom(self) -> Formula:
        # "(" may open a sub-formula or a parenthesized arithmetic expression;
        # try the formula reading first and fall back on the predicate one.
        if self.peek().text == "(":
            mark = self.pos
            try:
                self.next()
                inner = self.formula()
                self.expect(")")
                if self.peek().text not in ("<", "<=", ">", ">=", "+", "-", "*", "/"):
                    return inner
            except ParseError:
                pass
            self.pos = mark
        return self.pred()

    def pred(self) -> Formula:
        lhs = self.expr()
        tok = self.peek()
        if tok.text in ("<", "<=", ">", ">="):
            self.next()
            rhs = self.expr()
            if tok.text == "<=":
                return Pred(sub(rhs, lhs), strict=False)
            if tok.text == "<":
                return Pred(sub(rhs, lhs), strict=True)
            if tok.text == ">=":
                return Pred(sub(lhs, rhs), strict=False)
            return Pred(sub(lhs, rhs), strict=True)
        return Pred(lhs, strict=False)

    def interval(self) -> Interval:
        open_tok = self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number()
        self.expect("]")
        try:
            return Interval(lo, hi)
        except ValueError as exc:
            raise ParseError(str(exc), open_tok.line, open_tok.column) from None

    def number(self) -> float:
        sign = 1.0
        if self.peek().text == "-":
            self.next()
            sign = -1.0
        tok = self.peek()
        if tok.kind != "number":
            self.fail(f"expected a number, found {tok.text!r}")
        self.next()
        return sign * float(tok.text)

    # arithmetic expressions
    def expr(self) -> Expr:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.next()
            return Neg(self.factor())
        if tok.text == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "number":
            self.next()
            return Const(float(tok.text))
        if tok.kind == "ident":
            if tok.text in _RESERVED:
                self.fail(f"{tok.text!r} is a reserved word, not a signal name")
            self.next()
            return Var(tok.text)
        self.fail(f"expected an expression, found {tok.text or 'end of input'!r}")
        raise AssertionError  # unreachable


def parse(text: str) -> Formula:
    parser = _Parser(_tokenize(text))
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.column)
    return node

#!/usr/bin/env python
# -*- coding: utf-8 -*-

# SPDX-License-Identifier: Apache-2.0
# Copyright 2024 The AsymConv developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Small arithmetic expressions for test functions, such as "(x^2-1)^2" or
"sqrt(x^2+exp(-y^2))". Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

"^" binds tighter than unary minus and associates to the right.
Expressions compile to closures over numpy arrays.
"""

from __future__ import absolute_import

import re
from typing import (
    cast,
    NamedTuple,
    TYPE_CHECKING,
)

import numpy

if TYPE_CHECKING:
    from typing import (
        Callable,
        List,
        Mapping,
        Sequence,
        Tuple,
    )

    import numpy.typing as npt

    from typing_extensions import (
        Final,
        TypeAlias,
    )

    FloatArray: TypeAlias = npt.NDArray[numpy.float64]
    Env: TypeAlias = Mapping[str, FloatArray]
    Node: TypeAlias = Callable[[Env], FloatArray]

from ..common import AbstractAsymConvException


class ExpressionSyntaxException(AbstractAsymConvException):
    def __init__(self, message: "str", source: "str", position: "int"):
        super().__init__(f"{message} at position {position} of {source!r}")
        self.source = source
        self.position = position


TOKEN_RE: "Final[re.Pattern[str]]" = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)

UNARY_FUNCTIONS: "Final[Mapping[str, Callable[[FloatArray], FloatArray]]]" = {
    "sqrt": numpy.sqrt,
    "exp": numpy.exp,
    "abs": numpy.abs,
}

VARIADIC_FUNCTIONS: "Final[Mapping[str, Callable[..., FloatArray]]]" = {
    "min": lambda *args: numpy.minimum.reduce(numpy.broadcast_arrays(*args)),
    "max": lambda *args: numpy.maximum.reduce(numpy.broadcast_arrays(*args)),
}


class Token(NamedTuple):
    kind: "str"
    text: "str"
    position: "int"


def tokenize(source: "str") -> "List[Token]":
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        match = TOKEN_RE.match(source, pos)
        if match is None:
            rest = source[pos:].lstrip()
            raise ExpressionSyntaxException(
                f"Unexpected character {rest[0]!r}",
                source,
                len(source) - len(rest),
            )
        kind = cast("str", match.lastgroup)
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: "str", variables: "Sequence[str]"):
        self.source = source
        self.variables = tuple(variables)
        self.tokens = tokenize(source)
        self.index = 0

    def _peek(self) -> "Token":
        return self.tokens[self.index]

    def _advance(self) -> "Token":
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _error(self, message: "str") -> "ExpressionSyntaxException":
        return ExpressionSyntaxException(message, self.source, self._peek().position)

    def _expect(self, text: "str") -> "None":
        token = self._peek()
        if token.kind != "op" or token.text != text:
            raise self._error(f"Expected {text!r}")
        self._advance()

    def parse(self) -> "Node":
        node = self._expr()
        if self._peek().kind != "end":
            raise self._error(f"Unexpected {self._peek().text!r}")
        return node

    def _expr(self) -> "Node":
        node = self._term()
        while self._peek().kind == "op" and self._peek().text in "+-":
            op = self._advance().text
            node = _binary(op, node, self._term())
        return node

    def _term(self) -> "Node":
        node = self._unary()
        while self._peek().kind == "op" and self._peek().text in "*/":
            op = self._advance().text
            node = _binary(op, node, self._unary())
        return node

    def _unary(self) -> "Node":
        token = self._peek()
        if token.kind == "op" and token.text == "-":
            self._advance()
            inner = self._unary()
            return lambda env: -inner(env)
        if token.kind == "op" and token.text == "+":
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> "Node":
        base = self._atom()
        if self._peek().kind == "op" and self._peek().text == "^":
            self._advance()
            return _binary("^", base, self._unary())
        return base

    def _atom(self) -> "Node":
        token = self._advance()
        if token.kind == "number":
            value = float(token.text)
            return lambda env: numpy.asarray(value)
        if token.kind == "name":
            if self._peek().kind == "op" and self._peek().text == "(":
                return self._call(token)
            if token.text not in self.variables:
                self.index -= 1
                raise self._error(
                    f"Unknown variable {token.text!r}, expected one of {self.variables}"
                )
            name = token.text
            return lambda env: env[name]
        if token.kind == "op" and token.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        self.index -= 1
        if token.kind == "end":
            raise self._error("Unexpected end of expression")
        raise self._error(f"Unexpected {token.text!r}")

    def _call(self, token: "Token") -> "Node":
        self._expect("(")
        args = [self._expr()]
        while self._peek().kind == "op" and self._peek().text == ",":
            self._advance()
            args.append(self._expr())
        self._expect(")")
        name = token.text
        if name in UNARY_FUNCTIONS:
            if len(args) != 1:
                raise ExpressionSyntaxException(
                    f"{name} takes one argument", self.source, token.position
                )
            fn = UNARY_FUNCTIONS[name]
            arg = args[0]
            return lambda env: fn(arg(env))
        if name in VARIADIC_FUNCTIONS:
            if len(args) < 2:
                raise ExpressionSyntaxException(
                    f"{name} takes at least two arguments", self.source, token.position
                )
            vfn = VARIADIC_FUNCTIONS[name]
            return lambda env: vfn(*(a(env) for a in args))
        raise ExpressionSyntaxException(
            f"Unknown function {name!r}", self.source, token.position
        )


def _binary(op: "str", left: "Node", right: "Node") -> "Node":
    if op == "+":
        return lambda env: left(env) + right(env)
    if op == "-":
        return lambda env: left(env) - right(env)
    if op == "*":
        return lambda env: left(env) * right(env)
    if op == "/":
        return lambda env: left(env) / right(env)
    return lambda env: numpy.power(left(env), right(env))


class CompiledExpression(NamedTuple):
    source: "str"
    variables: "Tuple[str, ...]"
    node: "Node"

    def __call__(self, *args: "npt.ArrayLike") -> "FloatArray":
        if len(args) != len(self.variables):
            raise TypeError(
                f"{self.source!r} takes {len(self.variables)} arguments, got {len(args)}"
            )
        env = {
            name: numpy.asarray(arg, dtype=numpy.float64)
            for name, arg in zip(self.variables, args)
        }
        shape = numpy.broadcast_shapes(*(v.shape for v in env.values()))
        with numpy.errstate(all="ignore"):
            result = numpy.asarray(self.node(env), dtype=numpy.float64)
        return cast("FloatArray", numpy.broadcast_to(result, shape).copy())


def compile_expression(
    source: "str", variables: "Sequence[str]" = ("x",)
) -> "CompiledExpression":
    node = _Parser(source, variables).parse()
    return CompiledExpression(source, tuple(variables), node)

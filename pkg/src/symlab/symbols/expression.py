"""Tiny arithmetic grammar for coefficient entries.

Entries are strings such as ``"x*(1+a^2)"`` or ``"abs(x)^alpha"``. The
grammar accepts numbers (including Python complex literals like ``2j``),
parameter and constant names, ``+ - * /``, powers written ``^`` or ``**``,
unary minus and the function ``abs``. Evaluation is vectorised over numpy
arrays.
"""
from __future__ import annotations

import ast
import operator
from typing import Callable, Mapping

import numpy as np

from ..errors import ConfigError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"abs": np.abs}

Env = Mapping[str, np.ndarray]


def _compile(node: ast.AST, names: frozenset[str]) -> Callable[[Env], object]:
    if isinstance(node, ast.Expression):
        return _compile(node.body, names)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            raise ConfigError(f"unsupported literal {node.value!r}")
        value = node.value
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ConfigError(f"unknown name {node.id!r}")
        key = node.id
        return lambda env: env[key]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left, names), _compile(node.right, names)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op = _UNARY[type(node.op)]
        inner = _compile(node.operand, names)
        return lambda env: op(inner(env))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords or len(node.args) != 1:
            raise ConfigError("only abs(<expr>) calls are allowed")
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0], names)
        return lambda env: fn(arg(env))
    raise ConfigError(f"unsupported syntax: {ast.dump(node)}")


class Expression:
    """A compiled entry expression."""

    def __init__(self, text: str, names) -> None:
        if not isinstance(text, str):
            raise ConfigError(f"matrix entries must be strings, got {text!r}")
        self.text = text
        self.names = frozenset(names)
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse {text!r}: {exc.msg}") from None
        self._fn = _compile(tree, self.names)
        self.constant_value: complex | None = None
        used = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)} - set(_FUNCS)
        self.free_names = frozenset(used)
        if not used:
            self.constant_value = complex(self._fn({}))

    def __call__(self, env: Env):
        return self._fn(env)

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"

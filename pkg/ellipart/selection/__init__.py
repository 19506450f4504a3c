"""
A small expression language for selecting rows of a dataset, e.g.
``sex = Male and age >= 30``.
"""

from functools import reduce
from typing import Sequence

import numpy as np
import pandas as pd

from .. import exceptions
from . import ast
from .ast import _Node as Node
from .grammar import SelectionLexer, SelectionParser
from .mask import MaskBuilder, referenced_columns
from .render import SelectionRenderer


def parse_selection(text: str) -> Node:
    """
    Parses a selection expression.

    Raises:
        TokenizingException, ParsingException
    """
    lexer = SelectionLexer()
    parser = SelectionParser()
    return parser.parse(lexer.tokenize(text))


def select_rows(frame: pd.DataFrame, node: Node) -> np.ndarray:
    """
    Evaluates ``node`` on every row of ``frame``.

    Returns:
        A boolean mask with one entry per row.
    Raises:
        UnknownColumnException, SelectionTypeException
    """
    available = [str(c) for c in frame.columns]
    for name in referenced_columns(node):
        if name not in available:
            raise exceptions.UnknownColumnException(name, available)
    return MaskBuilder(frame).visit(node)


def render_selection(node: Node) -> str:
    """
    Returns the canonical text form of ``node``.
    """
    return SelectionRenderer().visit(node)


def conjoin(nodes: Sequence[Node]) -> Node:
    """
    Combines several expressions with ``and``.
    """
    return reduce(lambda left, right: ast.BoolOp(ast.And(), left, right), nodes)

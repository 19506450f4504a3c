import operator
from typing import Any, Callable, Dict, List, Type

import numpy as np
import pandas as pd

from .. import exceptions as ex
from . import ast, visitor


COMPARATORS: Dict[Type[ast._Comparator], Callable[[Any, Any], Any]] = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


class ColumnCollector(visitor.NodeVisitor):
    """
    :class:`NodeVisitor` that gathers the names of all columns an expression
    refers to, in order of appearance.
    """

    def __init__(self):
        self.columns: List[str] = []

    def visit_Column(self, node: ast.Column) -> None:
        """:meta private:"""
        if node.name not in self.columns:
            self.columns.append(node.name)


def referenced_columns(node: ast._Node) -> List[str]:
    collector = ColumnCollector()
    collector.visit(node)
    return collector.columns


class MaskBuilder(visitor.NodeVisitor):
    """
    :class:`NodeVisitor` that evaluates a selection expression on every row
    of a data frame.

    Columns whose every cell reads as a number are compared numerically;
    all other columns are compared as stripped text.

    Args:
        frame: The rows to select from.
    """

    def __init__(self, frame: pd.DataFrame):
        self.frame = frame
        self._columns: Dict[str, pd.Series] = {}

    def column(self, node: ast.Column) -> pd.Series:
        """
        Returns the values of ``node``, as floats when the column is numeric.

        Raises:
            UnknownColumnException
        """
        if node.name not in self._columns:
            if node.name not in self.frame.columns:
                raise ex.UnknownColumnException(
                    node.name, [str(c) for c in self.frame.columns]
                )
            raw = self.frame[node.name]
            numeric = pd.to_numeric(raw, errors="coerce")
            if numeric.notna().all():
                self._columns[node.name] = numeric.astype(float)
            else:
                self._columns[node.name] = raw.astype(str).str.strip()
        return self._columns[node.name]

    def operand(self, column: ast.Column, value: ast._Literal) -> Any:
        values = self.column(column)
        if pd.api.types.is_numeric_dtype(values):
            if not isinstance(value, ast.Number):
                raise ex.SelectionTypeException(column.name, value.val)
            return value.py_val
        return value.val

    def visit_Compare(self, node: ast.Compare) -> np.ndarray:
        """:meta private:"""
        compare = COMPARATORS[type(node.comparator)]
        rhs = self.operand(node.column, node.value)
        return np.asarray(compare(self.column(node.column), rhs), dtype=bool)

    def visit_Membership(self, node: ast.Membership) -> np.ndarray:
        """:meta private:"""
        options = [self.operand(node.column, v) for v in node.values]
        return np.asarray(self.column(node.column).isin(options), dtype=bool)

    def visit_BoolOp(self, node: ast.BoolOp) -> np.ndarray:
        """:meta private:"""
        left = self.visit(node.left)
        right = self.visit(node.right)
        if isinstance(node.op, ast.And):
            return left & right
        return left | right

    def visit_Not(self, node: ast.Not) -> np.ndarray:
        """:meta private:"""
        return ~self.visit(node.operand)

    def generic_visit(self, node: ast._Node):
        raise NotImplementedError(f"Cannot select rows with a bare {node!r}")

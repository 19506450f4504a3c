import re
from typing import Type

from . import ast, visitor
from .grammar import KEYWORDS, NAME_PATTERN

PRECEDENCE = {
    ast.Not: 5,
    ast.Compare: 6,
    ast.Membership: 6,
    ast.And: 4,
    ast.Or: 3,
}

_BARE = re.compile(NAME_PATTERN + r"\Z")


def _quote(text: str) -> str:
    if _BARE.match(text) and text.lower() not in KEYWORDS:
        return text
    return "'" + text.replace("'", "''") + "'"


class SelectionRenderer(visitor.NodeVisitor):
    """
    :class:`NodeVisitor` that turns a selection expression back into its
    canonical text form, which parses back into the same expression.
    """

    def visit_Column(self, node: ast.Column) -> str:
        """:meta private:"""
        return _quote(node.name)

    def visit_Number(self, node: ast.Number) -> str:
        """:meta private:"""
        return node.val

    def visit_Text(self, node: ast.Text) -> str:
        """:meta private:"""
        if re.fullmatch(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?", node.val):
            return "'" + node.val + "'"
        return _quote(node.val)

    def visit_Eq(self, node: ast.Eq) -> str:
        """:meta private:"""
        return "="

    def visit_NotEq(self, node: ast.NotEq) -> str:
        """:meta private:"""
        return "!="

    def visit_Lt(self, node: ast.Lt) -> str:
        """:meta private:"""
        return "<"

    def visit_LtE(self, node: ast.LtE) -> str:
        """:meta private:"""
        return "<="

    def visit_Gt(self, node: ast.Gt) -> str:
        """:meta private:"""
        return ">"

    def visit_GtE(self, node: ast.GtE) -> str:
        """:meta private:"""
        return ">="

    def visit_Compare(self, node: ast.Compare) -> str:
        """:meta private:"""
        column = self.visit(node.column)
        return f"{column} {self.visit(node.comparator)} {self.visit(node.value)}"

    def visit_Membership(self, node: ast.Membership) -> str:
        """:meta private:"""
        values = ", ".join(self.visit(v) for v in node.values)
        return self.visit(node.column) + " in (" + values + ")"

    def visit_And(self, node: ast.And) -> str:
        """:meta private:"""
        return "and"

    def visit_Or(self, node: ast.Or) -> str:
        """:meta private:"""
        return "or"

    def visit_BoolOp(self, node: ast.BoolOp) -> str:
        """:meta private:"""
        precedence = type(node.op)
        left = self._visit_and_paren_if_precedence_lower(node.left, precedence)
        # Operators are left associative, so an equal precedence right
        # operand needs parentheses too.
        right = self._visit_and_paren_if_precedence_lower(
            node.right, precedence, strict=False
        )
        return left + " " + self.visit(node.op) + " " + right

    def visit_Not(self, node: ast.Not) -> str:
        """:meta private:"""
        return "not " + self._visit_and_paren_if_precedence_lower(node.operand, ast.Not)

    def _visit_and_paren_if_precedence_lower(
        self, node: ast._Node, precedence: Type[ast._Node], strict: bool = True
    ) -> str:
        """
        Visits ``node``, then wraps the result in parentheses if its
        precedence is lower than that of ``precedence``.

        :meta private:
        """
        res = self.visit(node)

        node_op = type(node.op) if isinstance(node, ast.BoolOp) else type(node)
        node_prec = PRECEDENCE.get(node_op, 100)
        check_prec = PRECEDENCE.get(precedence, 100)

        if node_prec < check_prec or (not strict and node_prec == check_prec):
            res = "(" + res + ")"

        return res

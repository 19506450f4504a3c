"""
Grammar of row selection expressions such as
``sex = Male and (age >= 30 or workclass in (Private, 'Self-emp-inc'))``.
Implemented with `SLY <https://sly.readthedocs.io/en/latest/>`_.
"""

from typing import Any, Callable, Optional, TypeVar

from sly import Lexer, Parser
from sly.lex import Token

from .. import exceptions
from . import ast

RuleDecorator = TypeVar("RuleDecorator", bound=Callable[..., Any])

NAME_PATTERN = r"[A-Za-z_][\w.\-]*"

KEYWORDS = {"and": "AND", "or": "OR", "not": "NOT", "in": "IN"}


class SelectionLexer(Lexer):
    tokens = {
        "NAME",
        "STRING",
        "NUMBER",
        "EQ",
        "NE",
        "LT",
        "LE",
        "GT",
        "GE",
        "AND",
        "OR",
        "NOT",
        "IN",
    }
    literals = {"(", ")", ","}
    ignore = " \t"

    # Ensure MyPy doesn't lose its mind:
    _: Callable[..., Callable[[RuleDecorator], RuleDecorator]]

    def error(self, token: Token):
        """
        Error handler during tokenization

        Args:
            token: The token that failed to tokenize.
        Raises:
            TokenizingException
        """
        raise exceptions.TokenizingException(token)

    # NOTE: Ordering of tokens is important! Longer tokens first

    @_(r"'(?:[^']|'')*'", r'"(?:[^"]|"")*"')
    def STRING(self, t):
        ":meta private:"
        quote = t.value[0]
        t.value = t.value[1:-1].replace(quote * 2, quote)
        return t

    @_(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
    def NUMBER(self, t):
        ":meta private:"
        return t

    @_(r"!=|<>")
    def NE(self, t):
        ":meta private:"
        t.value = ast.NotEq()
        return t

    @_(r"<=")
    def LE(self, t):
        ":meta private:"
        t.value = ast.LtE()
        return t

    @_(r">=")
    def GE(self, t):
        ":meta private:"
        t.value = ast.GtE()
        return t

    @_(r"<")
    def LT(self, t):
        ":meta private:"
        t.value = ast.Lt()
        return t

    @_(r">")
    def GT(self, t):
        ":meta private:"
        t.value = ast.Gt()
        return t

    @_(r"==?")
    def EQ(self, t):
        ":meta private:"
        t.value = ast.Eq()
        return t

    # Same pattern as NAME_PATTERN; names in the class body resolve to token
    # names, not module globals.
    @_(r"[A-Za-z_][\w.\-]*")
    def NAME(self, t):
        ":meta private:"
        keyword = KEYWORDS.get(t.value.lower())
        if keyword == "AND":
            t.type, t.value = keyword, ast.And()
        elif keyword == "OR":
            t.type, t.value = keyword, ast.Or()
        elif keyword:
            t.type = keyword
        return t


class SelectionParser(Parser):
    debugfile = None
    tokens = SelectionLexer.tokens

    # Predecence from low to high.
    precedence = (
        ("left", "OR"),
        ("left", "AND"),
        ("right", "NOT"),
    )

    # Ensure MyPy doesn't lose its mind:
    _: Callable[..., Callable[[RuleDecorator], RuleDecorator]]

    def error(self, token: Optional[Token]):
        """
        Error handler during parsing.

        Args:
            token: The token at which point parsing failed.
        Raises:
            ParsingException
        """
        eof = token is None
        raise exceptions.ParsingException(token, eof)

    ####################################################################################
    # Boolean logic
    ####################################################################################
    @_("expr OR expr", "expr AND expr")
    def expr(self, p):
        ":meta private:"
        return ast.BoolOp(p[1], p.expr0, p.expr1)

    @_("NOT expr")  # type:ignore[no-redef]
    def expr(self, p):
        ":meta private:"
        return ast.Not(p.expr)

    @_('"(" expr ")"')  # type:ignore[no-redef]
    def expr(self, p):
        ":meta private:"
        return p.expr

    ####################################################################################
    # Comparisons
    ####################################################################################
    @_("column comparator value")  # type:ignore[no-redef]
    def expr(self, p):
        ":meta private:"
        return ast.Compare(p.comparator, p.column, p.value)

    @_('column IN "(" values ")"')  # type:ignore[no-redef]
    def expr(self, p):
        ":meta private:"
        return ast.Membership(p.column, tuple(p.values))

    @_("EQ", "NE", "LT", "LE", "GT", "GE")
    def comparator(self, p):
        ":meta private:"
        return p[0]

    ####################################################################################
    # Operands
    ####################################################################################
    @_("NAME", "STRING")
    def column(self, p):
        ":meta private:"
        return ast.Column(p[0])

    @_("NUMBER")
    def value(self, p):
        ":meta private:"
        return ast.Number(p[0])

    @_("NAME", "STRING")  # type:ignore[no-redef]
    def value(self, p):
        ":meta private:"
        return ast.Text(p[0])

    @_("value")
    def values(self, p):
        ":meta private:"
        return [p.value]

    @_('values "," value')  # type:ignore[no-redef]
    def values(self, p):
        ":meta private:"
        return p.values + [p.value]

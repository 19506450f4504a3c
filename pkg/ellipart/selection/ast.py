from dataclasses import dataclass
from typing import Tuple, Union


@dataclass(frozen=True)
class _Node:
    pass


@dataclass(frozen=True)
class Column(_Node):
    name: str


###############################################################################
# Literals
###############################################################################
@dataclass(frozen=True)
class _Literal(_Node):
    val: str

    @property
    def py_val(self) -> Union[float, str]:
        raise NotImplementedError()


@dataclass(frozen=True)
class Number(_Literal):
    @property
    def py_val(self) -> float:
        return float(self.val)


@dataclass(frozen=True)
class Text(_Literal):
    @property
    def py_val(self) -> str:
        return self.val


###############################################################################
# Comparisons
###############################################################################
@dataclass(frozen=True)
class _Comparator(_Node):
    pass


@dataclass(frozen=True)
class Eq(_Comparator):
    pass


@dataclass(frozen=True)
class NotEq(_Comparator):
    pass


@dataclass(frozen=True)
class Lt(_Comparator):
    pass


@dataclass(frozen=True)
class LtE(_Comparator):
    pass


@dataclass(frozen=True)
class Gt(_Comparator):
    pass


@dataclass(frozen=True)
class GtE(_Comparator):
    pass


@dataclass(frozen=True)
class Compare(_Node):
    comparator: _Comparator
    column: Column
    value: _Literal


@dataclass(frozen=True)
class Membership(_Node):
    column: Column
    values: Tuple[_Literal, ...]


###############################################################################
# Boolean logic
###############################################################################
@dataclass(frozen=True)
class _BoolOpToken(_Node):
    pass


@dataclass(frozen=True)
class And(_BoolOpToken):
    pass


@dataclass(frozen=True)
class Or(_BoolOpToken):
    pass


@dataclass(frozen=True)
class BoolOp(_Node):
    op: _BoolOpToken
    left: _Node
    right: _Node


@dataclass(frozen=True)
class Not(_Node):
    operand: _Node

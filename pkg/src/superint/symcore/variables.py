"""Variable identifiers with a fixed total order.

The order is ``q1 < q2 < ... < p1 < p2 < ... < hbar < parameters``, with
parameters compared by name.
"""

from __future__ import annotations

from typing import NamedTuple, Union

Q, P, HBAR, PARAM = 0, 1, 2, 3


class VarId(NamedTuple):
    kind: int
    index: Union[int, str]

    @property
    def name(self) -> str:
        if self.kind == Q:
            return f"q{self.index}"
        if self.kind == P:
            return f"p{self.index}"
        if self.kind == HBAR:
            return "hbar"
        return str(self.index)

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"VarId({self.name})"

    def is_position(self) -> bool:
        return self.kind == Q

    def is_momentum(self) -> bool:
        return self.kind == P


def q(i: int) -> VarId:
    return VarId(Q, i)


def p(i: int) -> VarId:
    return VarId(P, i)


HBAR_VAR = VarId(HBAR, 0)


def param(name: str) -> VarId:
    return VarId(PARAM, name)


def from_name(name: str) -> VarId:
    """Parse ``q1``, ``p2``, ``hbar`` or a parameter name into a VarId."""
    if name == "hbar":
        return HBAR_VAR
    if len(name) > 1 and name[0] in "qp" and name[1:].isdigit():
        idx = int(name[1:])
        if idx >= 1:
            return VarId(Q if name[0] == "q" else P, idx)
    return param(name)

"""Finite groups stored as validated multiplication tables.

Elements are bare integer indices ``0 .. order-1``. Sums over the group use
the counting measure, so the resolution of the identity on ``L^2(G)`` is
``sum_g |g><g|`` and ``<g|g'>`` is a Kronecker delta.
"""
from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidOrder,
    NoIdentity,
    NonInvertible,
    NotAssociative,
    NotClosed,
)

#: Transform matrices scale as ``order**m * d_phys``; larger groups work but get slow.
SOFT_ORDER_CAP = 24


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table.

    Use :func:`group_from_table` (or the generators below) rather than the
    constructor; they validate the table and fill in identity and inverses.
    """

    table: np.ndarray
    identity: int
    inverses: np.ndarray
    name: str | None = None
    factors: tuple[str, ...] = field(default=(), repr=False)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def __len__(self):
        return self.order

    @property
    def elements(self) -> range:
        return range(self.order)

    def _check(self, g):
        if not (0 <= g < self.order):
            raise IndexOutOfRange(f"element {g} is not in 0..{self.order - 1}")

    def mul(self, g: int, h: int) -> int:
        self._check(g)
        self._check(h)
        return int(self.table[g, h])

    def inv(self, g: int) -> int:
        self._check(g)
        return int(self.inverses[g])

    def element_order(self, g: int) -> int:
        self._check(g)
        k, x = 1, g
        while x != self.identity:
            x = int(self.table[g, x])
            k += 1
        return k

    def order_profile(self) -> dict[int, int]:
        """Histogram ``{element order: count}``; a cheap isomorphism diagnostic."""
        profile: dict[int, int] = {}
        for g in self.elements:
            k = self.element_order(g)
            profile[k] = profile.get(k, 0) + 1
        return dict(sorted(profile.items()))

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def left_action(self, g: int) -> np.ndarray:
        """Index map ``h -> g*h`` as an array."""
        self._check(g)
        return self.table[g].copy()

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return np.array_equal(self.table, other.table) and self.identity == other.identity

    def __hash__(self):
        return hash(self.table.tobytes())

    def __repr__(self):
        label = self.name or "G"
        return f"FiniteGroup({label}, order={self.order})"


class ElementOps(NamedTuple):
    product: int
    inverse: int


def element_ops(group: FiniteGroup, g: int, h: int) -> ElementOps:
    """Return ``g*h`` together with the inverse of ``g``."""
    return ElementOps(group.mul(g, h), group.inv(g))


def group_from_table(table, name: str | None = None) -> FiniteGroup:
    """Validate a Cayley table and build a :class:`FiniteGroup`.

    ``table[g][h]`` is the index of ``g*h``. Checks run in the order
    closure, Latin-square (invertibility), identity, associativity, and
    the first violation is reported with the offending entries.
    """
    try:
        t = np.asarray(table)
    except ValueError:
        raise NotClosed("table rows have different lengths") from None
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise NotClosed(f"table must be square, got shape {t.shape}")
    n = t.shape[0]
    if n == 0:
        raise InvalidOrder("group order must be positive")
    if not np.issubdtype(t.dtype, np.integer):
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise NotClosed("table entries must be integers")
        t = t.astype(np.int64)
    t = t.astype(np.int64)
    bad = np.argwhere((t < 0) | (t >= n))
    if len(bad):
        g, h = bad[0]
        raise NotClosed(f"product table[{g}][{h}] = {t[g, h]} is not an element of 0..{n - 1}")

    target = np.arange(n)
    for g in range(n):
        if not np.array_equal(np.sort(t[g]), target):
            raise NonInvertible(f"row {g} is not a permutation of the elements")
    for h in range(n):
        if not np.array_equal(np.sort(t[:, h]), target):
            raise NonInvertible(f"column {h} is not a permutation of the elements")

    identity = None
    for e in range(n):
        if np.array_equal(t[e], target) and np.array_equal(t[:, e], target):
            identity = e
            break
    if identity is None:
        raise NoIdentity("no element acts as a two-sided identity")

    # Latin square with identity: each row hits the identity exactly once.
    inverses = np.argmax(t == identity, axis=1)
    for g in range(n):
        if t[inverses[g], g] != identity:
            raise NonInvertible(f"element {g} has no two-sided inverse")

    idx = np.arange(n)
    left = t[t[:, :, None], idx[None, None, :]]  # (a*b)*c
    right = t[idx[:, None, None], t[None, :, :]]  # a*(b*c)
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = bad[0]
        raise NotAssociative(f"({a}*{b})*{c} = {left[a, b, c]} but {a}*({b}*{c}) = {right[a, b, c]}")

    if n > SOFT_ORDER_CAP:
        warnings.warn(f"group of order {n} exceeds the soft cap {SOFT_ORDER_CAP}; transforms will be large")

    t.setflags(write=False)
    inverses = inverses.astype(np.int64)
    inverses.setflags(write=False)
    return FiniteGroup(table=t, identity=int(identity), inverses=inverses, name=name)


def cyclic(n: int) -> FiniteGroup:
    """The cyclic group Z_n with ``g*h = (g + h) mod n``."""
    if n < 1:
        raise InvalidOrder(f"cyclic group order must be >= 1, got {n}")
    idx = np.arange(n)
    g = group_from_table((idx[:, None] + idx[None, :]) % n, name=f"Z{n}")
    return _with_factors(g, (f"Z{n}",))


def symmetric(n: int) -> FiniteGroup:
    """S_n on ``n`` letters; elements are permutations in lexicographic order.

    Product convention is composition ``(p*q)(i) = p(q(i))``.
    """
    if n < 1:
        raise InvalidOrder(f"symmetric group degree must be >= 1, got {n}")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    g = group_from_table(table, name=f"S{n}")
    return _with_factors(g, (f"S{n}",))


def permutations_of(n: int) -> list[tuple[int, ...]]:
    """Element labels used by :func:`symmetric`."""
    return list(itertools.permutations(range(n)))


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Componentwise product group; the pair ``(a, b)`` has index ``a*|H| + b``."""
    ng, nh = g.order, h.order
    a = np.arange(ng * nh)
    ga, ha = a // nh, a % nh
    table = g.table[ga[:, None], ga[None, :]] * nh + h.table[ha[:, None], ha[None, :]]
    name = f"{g.name}x{h.name}" if g.name and h.name else None
    out = group_from_table(table, name=name)
    return _with_factors(out, tuple(g.factors or (g.name or "?",)) + tuple(h.factors or (h.name or "?",)))


def _with_factors(g: FiniteGroup, factors):
    object.__setattr__(g, "factors", tuple(factors))
    return g


_FACTOR_RE = re.compile(r"^(Z|S)(\d+)$")


def named_group(name: str) -> FiniteGroup:
    """Build a group from a name like ``"Z2"``, ``"S3"`` or ``"Z2xZ2"``.

    Raises ``KeyError`` naming the unknown group when the name does not parse.
    """
    parts = name.split("x")
    groups = []
    for part in parts:
        m = _FACTOR_RE.match(part)
        if not m or int(m.group(2)) < 1:
            raise KeyError(f"unknown group {name!r}")
        kind, n = m.group(1), int(m.group(2))
        groups.append(cyclic(n) if kind == "Z" else symmetric(n))
    out = groups[0]
    for nxt in groups[1:]:
        out = direct_product(out, nxt)
    object.__setattr__(out, "name", name)
    return out


BUILTIN_GROUPS = ("Z2", "Z3", "Z2xZ2", "S3")

"""Unitary representations of finite groups, stored one matrix per element."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    GroupMismatch,
    IdentityNotMappedToIdentity,
    NotHomomorphism,
    NotUnitary,
    RepresentationError,
)
from .group import FiniteGroup, permutations_of

REP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Representation:
    group: FiniteGroup
    matrices: tuple[np.ndarray, ...]
    label: str = "custom"

    @property
    def dimension(self) -> int:
        return self.matrices[0].shape[0]

    def __call__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def dagger(self, g: int) -> np.ndarray:
        return self.matrices[g].conj().T

    def is_faithful(self) -> bool:
        eye = np.eye(self.dimension)
        return sum(np.allclose(m, eye, atol=REP_TOL) for m in self.matrices) == 1

    def __repr__(self):
        return f"Representation({self.label}, dim={self.dimension}, group={self.group!r})"


def representation_from_matrices(group: FiniteGroup, matrices: Sequence, tol: float = REP_TOL,
                                 label: str = "custom") -> Representation:
    """Validate unitarity, ``U(e) = 1`` and ``U(g)U(h) = U(gh)`` exhaustively."""
    mats = [np.array(m, dtype=complex) for m in matrices]
    if len(mats) != group.order:
        raise RepresentationError(f"need {group.order} matrices, got {len(mats)}")
    d = mats[0].shape[0] if mats[0].ndim == 2 else -1
    for g, m in enumerate(mats):
        if m.shape != (d, d):
            raise RepresentationError(f"matrix for element {g} has shape {m.shape}, expected ({d}, {d})")
    eye = np.eye(d)
    for g, m in enumerate(mats):
        res = np.max(np.abs(m.conj().T @ m - eye))
        if res > tol:
            raise NotUnitary(g, res)
    res = np.max(np.abs(mats[group.identity] - eye))
    if res > tol:
        raise IdentityNotMappedToIdentity(res)
    for g in group.elements:
        for h in group.elements:
            res = np.max(np.abs(mats[g] @ mats[h] - mats[group.table[g, h]]))
            if res > tol:
                raise NotHomomorphism(g, h, res)
    for m in mats:
        m.setflags(write=False)
    return Representation(group, tuple(mats), label)


def regular_representation(group: FiniteGroup) -> Representation:
    """Left-regular action ``U(a)|g> = |a g>`` as permutation matrices."""
    n = group.order
    mats = []
    for a in group.elements:
        m = np.zeros((n, n), dtype=complex)
        m[group.table[a], np.arange(n)] = 1
        m.setflags(write=False)
        mats.append(m)
    return Representation(group, tuple(mats), "regular")


def trivial_representation(group: FiniteGroup, dim: int = 1) -> Representation:
    eye = np.eye(dim, dtype=complex)
    eye.setflags(write=False)
    return Representation(group, tuple(eye for _ in group.elements), f"trivial({dim})")


def qubit_representation(group: FiniteGroup) -> Representation:
    """A two-dimensional representation for the builtin groups.

    Z_n maps the generator to ``H diag(1, w) H`` (``w = exp(2 pi i / n)``), so
    Z_2 acts as ``{1, sigma_x}``. Z_a x Z_b uses ``H diag(w_a^x, w_b^y) H``.
    S_3 uses its two-dimensional irrep.
    """
    factors = group.factors
    if len(factors) == 1 and factors[0].startswith("Z"):
        n = int(factors[0][1:])
        mats = [_hdh(1, _root(g, n)) for g in group.elements]
    elif len(factors) == 2 and all(f.startswith("Z") for f in factors):
        a, b = (int(f[1:]) for f in factors)
        mats = []
        for g in group.elements:
            x, y = divmod(g, b)
            mats.append(_hdh(_root(x, a), _root(y, b)))
    elif factors == ("S3",):
        mats = _s3_standard()
    else:
        raise RepresentationError(f"no builtin qubit representation for {group!r}")
    return representation_from_matrices(group, mats, label="qubit")


def _root(k: int, n: int) -> complex:
    """``exp(2 pi i k / n)``, exact when it lies on an axis."""
    if (4 * k) % n == 0:
        return (1, 1j, -1, -1j)[(4 * k // n) % 4]
    return np.exp(2j * np.pi * k / n)


def _hdh(p: complex, q: complex) -> np.ndarray:
    # H diag(p, q) H written out so that p, q in {1, -1} give exact 0/1 entries
    return 0.5 * np.array([[p + q, p - q], [p - q, p + q]], dtype=complex)


def _s3_standard():
    # permutation matrices restricted to the complement of (1,1,1)
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    mats = []
    for p in permutations_of(3):
        perm = np.zeros((3, 3))
        perm[list(p), range(3)] = 1
        mats.append(basis @ perm @ basis.T)
    return mats


_TRIVIAL_RE = re.compile(r"^trivial(?:\((\d+)\))?$")


def named_representation(group: FiniteGroup, spec: str) -> Representation:
    """Resolve ``"regular"``, ``"trivial"``, ``"trivial(d)"`` or ``"qubit"``."""
    if spec == "regular":
        return regular_representation(group)
    if spec == "qubit":
        return qubit_representation(group)
    m = _TRIVIAL_RE.match(spec)
    if m:
        return trivial_representation(group, int(m.group(1) or 1))
    raise KeyError(f"unknown representation {spec!r}")


def combined_action(reps: Sequence[Representation], g: int) -> np.ndarray:
    """Product action ``U_1(g) (x) ... (x) U_N(g)``; a 1x1 identity when empty."""
    if reps:
        group = reps[0].group
        for r in reps[1:]:
            if r.group != group:
                raise GroupMismatch("representations are over different groups")
        group._check(g)
    return reduce(np.kron, (r(g) for r in reps), np.eye(1, dtype=complex))


def combined_representation(reps: Sequence[Representation]) -> Representation:
    if not reps:
        raise RepresentationError("need at least one representation")
    group = reps[0].group
    mats = tuple(combined_action(reps, g) for g in group.elements)
    return Representation(group, mats, "(x)".join(r.label for r in reps))

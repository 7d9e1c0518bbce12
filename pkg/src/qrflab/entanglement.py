"""Separability diagnostics: Schmidt spectra, single-factor purities, PPT and concurrence.

Functions take a state and positions of factors within that state's spec.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidBipartition, NotTwoQubit
from .hilbert import DensityOp, PureState, reduced_matrix

ZERO_EIGEN = 1e-10
SEPARABILITY_TOL = 1e-9
# eigenvalues of rho below this are treated as exact zeros in the concurrence
RANK_CUTOFF = 1e-13

_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class Bipartition:
    side_a: frozenset[int]
    side_b: frozenset[int]

    @classmethod
    def of(cls, n: int, side_a: Iterable[int]) -> "Bipartition":
        a = frozenset(int(x) for x in side_a)
        if not a or any(not 0 <= x < n for x in a) or len(a) == n:
            raise InvalidBipartition(f"side {sorted(a)} is not a proper nonempty subset of 0..{n - 1}")
        return cls(a, frozenset(range(n)) - a)

    def validate(self, n: int):
        if not self.side_a or not self.side_b or self.side_a & self.side_b:
            raise InvalidBipartition("sides must be nonempty and disjoint")
        if self.side_a | self.side_b != frozenset(range(n)):
            raise InvalidBipartition(f"sides must cover all {n} factors")

    def __str__(self):
        return f"{sorted(self.side_a)}|{sorted(self.side_b)}"


def all_bipartitions(n: int) -> list[Bipartition]:
    """Every unordered cut of ``n`` factors; factor 0 always sits on side A."""
    cuts = []
    rest = range(1, n)
    for r in range(0, n - 1):
        for extra in itertools.combinations(rest, r):
            cuts.append(Bipartition.of(n, (0,) + extra))
    return cuts


def schmidt_coefficients(psi: PureState | np.ndarray, cut: Bipartition, dims: Sequence[int] | None = None):
    """Singular values of the amplitude matrix reshaped along ``cut``, descending."""
    vec, dims = _vec_dims(psi, dims)
    cut.validate(len(dims))
    a, b = sorted(cut.side_a), sorted(cut.side_b)
    t = vec.reshape(dims).transpose(a + b)
    da = int(np.prod([dims[i] for i in a]))
    return np.linalg.svd(t.reshape(da, -1), compute_uv=False)


def _vec_dims(psi, dims):
    if isinstance(psi, PureState):
        return psi.amplitudes, psi.spec.dims
    return np.asarray(psi, dtype=complex).reshape(-1), tuple(dims)


def single_factor_purities(psi: PureState | np.ndarray, dims: Sequence[int] | None = None,
                           factors: Iterable[int] | None = None) -> np.ndarray:
    vec, dims = _vec_dims(psi, dims)
    vec = vec / np.linalg.norm(vec)
    factors = range(len(dims)) if factors is None else sorted(factors)
    out = []
    for i in factors:
        r = reduced_matrix(vec, dims, [i])
        out.append(np.real(np.vdot(r, r)))
    return np.array(out)


def is_pure_fully_separable(psi: PureState | np.ndarray, factors: Iterable[int] | None = None,
                            tol: float = SEPARABILITY_TOL, dims: Sequence[int] | None = None) -> bool:
    """True when every listed factor is (within ``tol``) in a pure reduced state.

    For a pure input this means it is a product of single-factor states.
    """
    return bool(np.all(single_factor_purities(psi, dims, factors) >= 1 - tol))


def entanglement_gap(psi: PureState | np.ndarray, dims: Sequence[int] | None = None) -> float:
    """``1 - min single-factor purity``; zero exactly for product states."""
    p = single_factor_purities(psi, dims)
    return float(1 - p.min()) if len(p) else 0.0


def partial_transpose(rho: DensityOp | np.ndarray, side: Iterable[int], dims: Sequence[int] | None = None):
    m, dims = _mat_dims(rho, dims)
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    perm = list(range(2 * n))
    for i in side:
        perm[i], perm[n + i] = n + i, i
    return t.transpose(perm).reshape(m.shape)


def _mat_dims(rho, dims):
    if isinstance(rho, DensityOp):
        return rho.matrix, rho.spec.dims
    if isinstance(rho, PureState):
        return np.outer(rho.amplitudes, rho.amplitudes.conj()), rho.spec.dims
    return np.asarray(rho, dtype=complex), tuple(dims)


def negativity(rho: DensityOp | PureState | np.ndarray, cut: Bipartition,
               dims: Sequence[int] | None = None, zero: float = ZERO_EIGEN) -> float:
    """Sum of ``|lambda|`` over partial-transpose eigenvalues below ``-zero``."""
    m, dims = _mat_dims(rho, dims)
    cut.validate(len(dims))
    pt = partial_transpose(m, cut.side_b, dims)
    ev = np.linalg.eigvalsh((pt + pt.conj().T) / 2)
    return float(np.abs(ev[ev < -zero]).sum())


def max_negativity(rho, dims: Sequence[int] | None = None, zero: float = ZERO_EIGEN) -> tuple[float, Bipartition | None]:
    """Largest negativity over every bipartition, and the cut achieving it."""
    m, dims = _mat_dims(rho, dims)
    best, arg = 0.0, None
    for cut in all_bipartitions(len(dims)):
        v = negativity(m, cut, dims, zero)
        if arg is None or v > best:
            best, arg = v, cut
    return best, arg


def is_ppt(rho, cut: Bipartition, dims: Sequence[int] | None = None, tol: float = ZERO_EIGEN) -> bool:
    return negativity(rho, cut, dims, zero=tol) == 0.0


def concurrence(rho: DensityOp | PureState | np.ndarray, dims: Sequence[int] | None = None) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are computed as singular values of ``W^T (sy (x) sy) W`` with
    ``rho = W W^dag``. This keeps the error linear in the perturbation of
    ``rho`` instead of going through square roots of tiny eigenvalues.
    """
    if isinstance(rho, PureState):
        dims = rho.spec.dims
        w = rho.amplitudes.reshape(-1, 1)
    else:
        m, dims = _mat_dims(rho, dims)
        if tuple(dims) == (2, 2):
            ev, vecs = np.linalg.eigh((m + m.conj().T) / 2)
            keep = ev > RANK_CUTOFF
            w = vecs[:, keep] * np.sqrt(ev[keep])
    if tuple(dims) != (2, 2):
        raise NotTwoQubit(f"concurrence needs two qubits, got dims {tuple(dims)}")
    if w.shape[1] == 0:
        return 0.0
    lam = np.linalg.svd(w.T @ _SYSY @ w, compute_uv=False)
    lam = np.concatenate([lam, np.zeros(4)])[:4]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def separability_verdict(rho, dims: Sequence[int] | None = None, tol: float = ZERO_EIGEN) -> str:
    """``"entangled"`` if some cut is NPT, ``"separable"`` if PPT is decisive
    (2x2 or 2x3), else ``"ppt (necessary only)"``."""
    m, dims = _mat_dims(rho, dims)
    neg, _ = max_negativity(m, dims, zero=tol)
    if neg > 0:
        return "entangled"
    if len(dims) == 1 or sorted(dims) in ([2, 2], [2, 3]):
        return "separable"
    return "ppt (necessary only)"

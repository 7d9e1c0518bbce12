"""The two four-qubit Z_2 scenarios: frames 1, 2 and physical qubits A, B.

Factor order is (R1, R2, A, B). Both physical qubits carry ``{1, sigma_x}``.
"""
from __future__ import annotations

import numpy as np

from .group import cyclic
from .hilbert import PureState
from .qrf import FrameConfig
from .representation import named_representation

S = 1 / np.sqrt(2)


def z2_config() -> FrameConfig:
    g = cyclic(2)
    rep = named_representation(g, "qubit")
    return FrameConfig(g, 2, (rep, rep), ("A", "B"))


def phi(alpha: complex) -> np.ndarray:
    """``(|00> + alpha |11>) / sqrt(2)``."""
    return np.array([S, 0, 0, alpha * S], dtype=complex)


def _ket(*bits) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(map(str, bits)), 2)] = 1
    return v


def example1_initial() -> PureState:
    """``|0>_1 |+>_2 |00>_AB`` relative to frame 1."""
    plus = np.array([S, S])
    vec = np.kron(np.kron(_ket(0), plus), _ket(0, 0))
    return PureState.normalized(vec, z2_config().spec, 1)


def example1_final() -> PureState:
    """``|0>_2 (x) GHZ on (1, A, B)`` relative to frame 2."""
    vec = S * (_ket(0, 0, 0, 0) + _ket(1, 0, 1, 1))
    return PureState.normalized(vec, z2_config().spec, 2)


def example2_initial() -> PureState:
    """``(|0>_1 (|0>_2 Phi_{+i} + i |1>_2 Phi_{-i})) / sqrt(2)`` relative to frame 1."""
    vec = S * (np.kron(_ket(0, 0), phi(1j)) + 1j * np.kron(_ket(0, 1), phi(-1j)))
    return PureState.normalized(vec, z2_config().spec, 1)


def example2_final() -> PureState:
    """``|0>_2 |+>_1 Phi_{+i}`` relative to frame 2."""
    plus = np.array([S, S])
    vec = np.kron(np.kron(plus, _ket(0)), phi(1j))
    return PureState.normalized(vec, z2_config().spec, 2)


NAMED_STATES = {
    "example1": example1_initial,
    "example1_final": example1_final,
    "example2": example2_initial,
    "example2_final": example2_final,
}

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrflab.entanglement import (
    Bipartition,
    all_bipartitions,
    concurrence,
    is_pure_fully_separable,
    max_negativity,
    negativity,
    partial_transpose,
    schmidt_coefficients,
    separability_verdict,
    single_factor_purities,
)
from qrflab.errors import InvalidBipartition, NotTwoQubit
from qrflab.hilbert import (
    DensityOp,
    FactorSpec,
    PureState,
    conditional_state,
    partial_trace,
    random_density,
    random_product_state,
    random_vector,
)
from qrflab.worked import example1_final, example2_initial, phi

S = 1 / np.sqrt(2)
SY = np.array([[0, -1j], [1j, 0]])
TWO = FactorSpec.plain([2, 2])


def _haar_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _wootters_oracle(rho):
    # textbook route: square roots of the eigenvalues of rho * rho_tilde
    yy = np.kron(SY, SY)
    tilde = yy @ rho.conj() @ yy
    ev = np.sort(np.sqrt(np.abs(np.linalg.eigvals(rho @ tilde).real)))[::-1]
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


def _pt_oracle(rho):
    # transpose the second qubit by explicit index juggling
    out = np.zeros_like(rho)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    out[2 * a + b, 2 * c + d] = rho[2 * a + d, 2 * c + b]
    return out


def test_bipartitions():
    assert len(all_bipartitions(3)) == 3
    assert len(all_bipartitions(4)) == 7
    with pytest.raises(InvalidBipartition):
        Bipartition.of(2, [0, 1])
    with pytest.raises(InvalidBipartition):
        Bipartition.of(2, [])
    with pytest.raises(InvalidBipartition):
        Bipartition(frozenset({0}), frozenset({0, 1})).validate(2)


def test_schmidt_product():
    plus_zero = np.kron([S, S], [1, 0])
    c = schmidt_coefficients(plus_zero, Bipartition.of(2, [0]), (2, 2))
    assert np.allclose(c, [1, 0], atol=1e-15)


def test_schmidt_ghz_frame_cut():
    # GHZ on (R1, A, B) inside the final state of the first example
    psi = example1_final()
    c = schmidt_coefficients(psi, Bipartition.of(4, [0]))
    ghz = np.zeros(8)
    ghz[0] = ghz[7] = S
    oracle = np.linalg.svd(ghz.reshape(2, 4), compute_uv=False)
    assert np.allclose(c[:2], oracle[:2], atol=1e-15)
    assert np.allclose(c[:2], [S, S], atol=1e-15)


def test_schmidt_frames_vs_physical():
    psi = example2_initial()
    c = schmidt_coefficients(psi, Bipartition.of(4, [0, 1]))
    assert np.sum(c > 1e-12) == 2
    assert abs(np.sum(c ** 2) - 1) < 1e-12


def test_pure_separability():
    assert is_pure_fully_separable(np.array([1, 0, 0, 0]), dims=(2, 2))
    assert not is_pure_fully_separable(phi(1j), dims=(2, 2))
    rng = np.random.default_rng(0)
    spec = FactorSpec.plain([2, 3, 2])
    psi = random_product_state(spec, rng)
    assert is_pure_fully_separable(psi)
    # CNOT from factor 0 onto factor 2 applied to |+> (x) x (x) |0>
    x = random_vector(3, rng)
    v = np.kron(np.kron([S, S], x), [1, 0]).reshape(2, 3, 2)
    v[1] = v[1][:, ::-1]
    entangled = PureState.normalized(v.reshape(-1), spec)
    assert not is_pure_fully_separable(entangled)
    assert is_pure_fully_separable(entangled, factors=[1])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(2, 3), min_size=2, max_size=4), st.integers(0, 2**32 - 1))
def test_full_separability_matches_single_factor_schmidt(dims, seed):
    rng = np.random.default_rng(seed)
    spec = FactorSpec.plain(dims)
    psi = random_product_state(spec, rng) if seed % 2 else PureState(random_vector(spec.total_dim, rng), spec)
    via_schmidt = all(
        schmidt_coefficients(psi, Bipartition.of(len(dims), [i]))[1:].max() < 1e-6
        for i in range(len(dims))
    )
    assert is_pure_fully_separable(psi) == via_schmidt


def test_negativity_examples():
    bell = np.outer(phi(1j), phi(1j).conj())
    assert abs(negativity(bell, Bipartition.of(2, [0]), (2, 2)) - 0.5) < 1e-12
    oracle = np.linalg.eigvalsh(_pt_oracle(bell))
    assert abs(-oracle[oracle < 0].sum() - 0.5) < 1e-12
    mixed = np.diag([0.5, 0, 0, 0.5])
    assert negativity(mixed, Bipartition.of(2, [0]), (2, 2)) == 0
    prod = random_product_state(FactorSpec.plain([2, 3]), np.random.default_rng(1))
    assert negativity(prod, Bipartition.of(2, [0])) == 0


def test_partial_transpose_matches_oracle():
    rho = random_density(TWO, np.random.default_rng(2)).matrix
    assert np.max(np.abs(partial_transpose(rho, [1], (2, 2)) - _pt_oracle(rho))) < 1e-15


def test_concurrence_examples():
    assert abs(concurrence(PureState(phi(1j), TWO)) - 1) < 1e-12
    assert abs(concurrence(np.outer(phi(1j), phi(1j).conj()), (2, 2)) - 1) < 1e-12
    assert concurrence(np.diag([0.5, 0, 0, 0.5]), (2, 2)) < 1e-12
    prod = random_product_state(TWO, np.random.default_rng(3))
    assert concurrence(prod) < 1e-9
    with pytest.raises(NotTwoQubit):
        concurrence(np.eye(6) / 6, (2, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_concurrence_matches_textbook_route(seed, rank):
    rho = random_density(TWO, np.random.default_rng(seed), rank=rank).matrix
    assert abs(concurrence(rho, (2, 2)) - _wootters_oracle(rho)) < 1e-7


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negativity_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(FactorSpec.plain([2, 3]), rng, rank=2).matrix
    u = np.kron(_haar_unitary(2, rng), _haar_unitary(3, rng))
    cut = Bipartition.of(2, [0])
    before = negativity(rho, cut, (2, 3))
    after = negativity(u @ rho @ u.conj().T, cut, (2, 3))
    assert abs(before - after) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negativity_convexity(seed):
    rng = np.random.default_rng(seed)
    rhos = [random_density(TWO, rng, rank=1).matrix for _ in range(3)]
    p = rng.dirichlet(np.ones(3))
    cut = Bipartition.of(2, [0])
    mix = sum(pi * r for pi, r in zip(p, rhos))
    assert negativity(mix, cut, (2, 2)) <= sum(pi * negativity(r, cut, (2, 2)) for pi, r in zip(p, rhos)) + 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_ppt_agrees_with_concurrence(seed, rank):
    rho = random_density(TWO, np.random.default_rng(seed), rank=rank).matrix
    n = negativity(rho, Bipartition.of(2, [0]), (2, 2))
    c = concurrence(rho, (2, 2))
    if n == 0:
        assert c < 1e-6
    else:
        assert c > 0


def test_verdicts():
    assert separability_verdict(np.diag([0.5, 0, 0, 0.5]), (2, 2)) == "separable"
    assert separability_verdict(np.outer(phi(1), phi(1)), (2, 2)) == "entangled"
    assert separability_verdict(np.eye(9) / 9, (3, 3)) == "ppt (necessary only)"


def test_max_negativity_finds_entangled_cut():
    psi = example1_final()
    value, _ = max_negativity(psi)
    assert abs(value - 0.5) < 1e-12
    # frame 2 factors out; every other cut splits the GHZ on (R1, A, B)
    for c in all_bipartitions(4):
        expected = 0.0 if c.side_b == {1} else 0.5
        assert abs(negativity(psi, c) - expected) < 1e-12
    rho_ab = partial_trace(psi, [2, 3])
    assert max_negativity(rho_ab)[0] == 0


def test_conditional_states_of_second_example_are_entangled():
    psi = example2_initial()
    for g in [(0, 0), (0, 1)]:
        _, state = conditional_state(psi, g)
        assert not is_pure_fully_separable(state)
        assert single_factor_purities(state).max() < 0.5 + 1e-12


def test_density_inputs_accepted():
    rho = DensityOp(np.diag([0.5, 0, 0, 0.5]).astype(complex), TWO)
    assert concurrence(rho) < 1e-12
    assert negativity(rho, Bipartition.of(2, [1])) == 0

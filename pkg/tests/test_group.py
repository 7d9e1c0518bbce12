import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrflab.errors import (
    IndexOutOfRange,
    InvalidOrder,
    NoIdentity,
    NonInvertible,
    NotAssociative,
    NotClosed,
)
from qrflab.group import (
    BUILTIN_GROUPS,
    cyclic,
    direct_product,
    element_ops,
    group_from_table,
    named_group,
    permutations_of,
    symmetric,
)


def _compose(p, q):
    # (p*q)(i) = p(q(i))
    return tuple(p[q[i]] for i in range(len(q)))


def _perm_table(n):
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    return perms, [[index[_compose(p, q)] for q in perms] for p in perms]


def test_z2_from_table():
    g = group_from_table([[0, 1], [1, 0]])
    assert g.order == 2
    assert g.identity == 0
    assert list(g.inverses) == [0, 1]


def test_repeated_column_is_non_invertible():
    with pytest.raises(NonInvertible):
        group_from_table([[0, 1], [0, 1]])


@pytest.mark.parametrize("table, exc", [
    ([[0, 1, 2], [1, 0]], NotClosed),
    ([[0, 2], [2, 0]], NotClosed),
    ([[1, 0], [0, 1]], None),  # identity is element 1 here
    ([[1, 2, 0], [2, 0, 1], [0, 1, 2]], None),
])
def test_table_shapes(table, exc):
    if exc is None:
        g = group_from_table(table)
        assert all(g.mul(g.identity, x) == x for x in g.elements)
    else:
        with pytest.raises(exc):
            group_from_table(table)


def test_latin_square_without_identity():
    # rows and columns are permutations but no element acts trivially
    # x*y = -x-y mod 3
    with pytest.raises(NoIdentity):
        group_from_table([[0, 2, 1], [2, 1, 0], [1, 0, 2]])


def test_non_associative_loop():
    # a Latin square with identity 0 that is not a group (order-5 loop)
    t = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(NotAssociative):
        group_from_table(t)


def test_errors_name_entries():
    with pytest.raises(NonInvertible, match="column|row"):
        group_from_table([[0, 1], [0, 1]])


def test_s3_from_permutation_composition():
    perms, table = _perm_table(3)
    g = group_from_table(table)
    assert g.order == 6
    assert not g.is_abelian()
    assert g == symmetric(3)
    assert permutations_of(3) == perms


def test_transposition_product_is_three_cycle():
    g = symmetric(3)
    perms = permutations_of(3)
    transpositions = [i for i, p in enumerate(perms) if sum(p[k] != k for k in range(3)) == 2]
    a, b = transpositions[0], transpositions[1]
    prod = element_ops(g, a, b).product
    assert perms[prod] == _compose(perms[a], perms[b])
    assert g.element_order(prod) == 3


def test_cyclic_tables():
    trivial = cyclic(1)
    assert trivial.table.tolist() == [[0]]
    assert cyclic(2).table.tolist() == [[0, 1], [1, 0]]
    g = cyclic(5)
    for i, j in itertools.product(range(5), repeat=2):
        assert g.mul(i, j) == (i + j) % 5


def test_cyclic_rejects_zero():
    with pytest.raises(InvalidOrder):
        cyclic(0)


def test_order_profiles():
    assert 4 in cyclic(4).order_profile()
    klein = direct_product(cyclic(2), cyclic(2))
    assert klein.order_profile() == {1: 1, 2: 3}
    z6 = direct_product(cyclic(2), cyclic(3))
    assert z6.is_abelian()
    assert set(z6.order_profile()) == {1, 2, 3, 6}
    assert symmetric(3).order_profile() == {1: 1, 2: 3, 3: 2}


def test_direct_product_pairing():
    g, h = cyclic(2), cyclic(3)
    p = direct_product(g, h)
    for a1, b1, a2, b2 in itertools.product(range(2), range(3), range(2), range(3)):
        assert p.mul(a1 * 3 + b1, a2 * 3 + b2) == g.mul(a1, a2) * 3 + h.mul(b1, b2)


def test_trivial_times_group_is_copy():
    s3 = symmetric(3)
    assert np.array_equal(direct_product(cyclic(1), s3).table, s3.table)


def test_element_ops():
    z2 = cyclic(2)
    assert element_ops(z2, 1, 1) == (0, 1)
    with pytest.raises(IndexOutOfRange):
        element_ops(z2, 2, 0)
    with pytest.raises(IndexOutOfRange):
        z2.inv(-1)


def test_named_groups():
    for name in BUILTIN_GROUPS:
        assert named_group(name).name == name
    assert named_group("Z2xZ2").order == 4
    with pytest.raises(KeyError, match="Z5x"):
        named_group("Z5x")


def test_tables_are_read_only():
    g = cyclic(3)
    with pytest.raises(ValueError):
        g.table[0, 0] = 1


@pytest.mark.parametrize("name", BUILTIN_GROUPS + ("Z4", "Z2xZ3"))
def test_group_axioms_exhaustive(name):
    g = named_group(name)
    t = g.table
    n = g.order
    for a, b, c in itertools.product(range(n), repeat=3):
        assert t[t[a, b], c] == t[a, t[b, c]]
    for a in range(n):
        assert g.inv(g.inv(a)) == a
        assert t[a, g.inv(a)] == g.identity == t[g.inv(a), a]
        # left multiplication permutes the elements (finite invariant measure)
        assert sorted(g.left_action(a)) == list(range(n))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(BUILTIN_GROUPS + ("Z5", "Z3xZ2")), st.data())
def test_inverse_of_product(name, data):
    g = named_group(name)
    a = data.draw(st.integers(0, g.order - 1))
    b = data.draw(st.integers(0, g.order - 1))
    assert g.inv(g.mul(a, b)) == g.mul(g.inv(b), g.inv(a))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12))
def test_cyclic_relabeled_table_validates(n):
    # conjugating the table by a random relabeling keeps it a group
    rng = np.random.default_rng(n)
    perm = rng.permutation(n)
    inv = np.argsort(perm)
    t = cyclic(n).table
    relabeled = perm[t[inv[:, None], inv[None, :]]]
    g = group_from_table(relabeled)
    assert g.identity == perm[0]
    assert g.order_profile() == cyclic(n).order_profile()

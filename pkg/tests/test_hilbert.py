import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhblockade.exceptions import LayoutMismatchError
from nhblockade.hilbert import (
    FockLayout,
    Operator,
    add,
    adjoint,
    commutator,
    compose,
    create,
    destroy,
    identity,
    number,
    scale,
)

layouts = st.lists(st.integers(2, 4), min_size=1, max_size=3).map(FockLayout)


def test_layout_validation():
    with pytest.raises(ValueError):
        FockLayout([])
    with pytest.raises(ValueError):
        FockLayout([3, 1])
    layout = FockLayout([3, 4])
    assert layout.total_dim == 12 and layout.n_modes == 2
    with pytest.raises(ValueError):
        layout.index((3, 0))
    with pytest.raises(IndexError):
        destroy(layout, 2)


@given(layouts, st.data())
def test_index_roundtrip(layout, data):
    i = data.draw(st.integers(0, layout.total_dim - 1))
    assert layout.index(layout.occupations(i)) == i


def test_excitation_indices_order():
    layout = FockLayout([3, 3])
    got = [layout.occupations(i) for i in layout.excitation_indices(2)]
    assert got == [(2, 0), (1, 1), (0, 2)]


def test_number_from_ladder():
    layout = FockLayout([4])
    n = compose(create(layout, 0), destroy(layout, 0))
    assert np.allclose(n.entries, np.diag([0, 1, 2, 3]))
    assert np.allclose(number(layout, 0).entries, n.entries)


def test_adjoint_of_destroy_has_subdiagonal_roots():
    layout = FockLayout([5])
    ad = adjoint(destroy(layout, 0))
    assert np.allclose(np.diag(ad.entries, -1), np.sqrt([1, 2, 3, 4]))
    assert np.allclose(ad.entries, create(layout, 0).entries)


@given(layouts, st.data())
@settings(max_examples=40)
def test_canonical_commutator_below_cutoff(layout, data):
    mode = data.draw(st.integers(0, layout.n_modes - 1))
    a = destroy(layout, mode)
    c = commutator(a, a.dag).entries
    keep = [i for i in range(layout.total_dim)
            if layout.occupations(i)[mode] < layout.dims[mode] - 1]
    block = c[np.ix_(keep, keep)]
    assert np.max(np.abs(block - np.eye(len(keep)))) < 1e-12


def test_single_mode_commutator_top_left_block():
    layout = FockLayout([8])
    a, ad = destroy(layout, 0), create(layout, 0)
    c = (compose(a, ad) - compose(ad, a)).entries
    assert np.max(np.abs(c[:7, :7] - np.eye(7))) < 1e-12


@given(layouts)
@settings(max_examples=30)
def test_distinct_modes_commute(layout):
    for i in range(layout.n_modes):
        for j in range(layout.n_modes):
            if i != j:
                c = commutator(destroy(layout, i), create(layout, j))
                assert np.max(np.abs(c.entries)) < 1e-12


def test_kron_placement_is_associative():
    three = FockLayout([2, 3, 4])
    direct = destroy(three, 1).entries
    inner = destroy(FockLayout([3, 4]), 0).entries
    nested = np.kron(np.eye(2), inner)
    assert np.array_equal(direct, nested)
    outer = destroy(FockLayout([2, 3]), 1).entries
    assert np.array_equal(direct, np.kron(outer, np.eye(4)))


def test_algebra_identities():
    layout = FockLayout([3, 2])
    rng = np.random.default_rng(0)
    x = Operator(layout, rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    assert np.array_equal(compose(x, identity(layout)).entries, x.entries)
    assert np.array_equal(adjoint(adjoint(x)).entries, x.entries)
    assert not np.any(scale(x, 0).entries)
    assert np.allclose(add(x, x).entries, 2 * x.entries)
    assert np.allclose((x / 2).entries, 0.5 * x.entries)


def test_layout_mismatch_raises():
    a = destroy(FockLayout([3]), 0)
    b = destroy(FockLayout([4]), 0)
    for op in (compose, add, commutator):
        with pytest.raises(LayoutMismatchError):
            op(a, b)
    with pytest.raises(TypeError):
        a * a


def test_operators_are_immutable():
    a = destroy(FockLayout([3]), 0)
    with pytest.raises(ValueError):
        a.entries[0, 1] = 5.0


def test_matrix_element_and_project():
    layout = FockLayout([3, 3])
    a1 = destroy(layout, 0)
    assert a1.matrix_element((1, 0), (2, 0)) == pytest.approx(np.sqrt(2))
    block = a1.project([layout.index((0, 0)), layout.index((1, 0))])
    assert np.allclose(block, [[0, 1], [0, 0]])

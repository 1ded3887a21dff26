from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from tests.oracles import catalan, polygon_dissections
from wrapped_ainfty.popsicle_moduli import f_vector, enumerate_strata
from wrapped_ainfty.trees import (FDecomposition, Flavour, RibbonTree, check_compatible,
                                  enumerate_stable_decompositions, induce_flavours, is_stable,
                                  one_vertex, propagate_weights)

HEX = Flavour((1, 1))
PENT = Flavour((1, 2))
# two-vertex hexagon stratum: 2-valent root with sprinkle 2 above a vertex with leaves 1, 2 and sprinkle 1
STACKED = FDecomposition((frozenset({2}), ((frozenset({1}), (1, 2)),)))


def _codim_counts(d, flavour):
    decs = enumerate_stable_decompositions(d, flavour)
    counts: dict = {}
    for dec in decs:
        counts[dec.codim] = counts.get(dec.codim, 0) + 1
    return tuple(counts.get(k, 0) for k in range(max(counts) + 1))


def test_hexagon_and_pentagon_counts():
    assert _codim_counts(2, HEX) == (1, 6, 6)
    assert _codim_counts(2, PENT) == (1, 5, 5)
    assert _codim_counts(3, Flavour(())) == (1, 2)


def test_unstable_input_rejected():
    with pytest.raises(ValueError):
        enumerate_stable_decompositions(1, Flavour(()))
    with pytest.raises(ValueError):
        enumerate_stable_decompositions(2, Flavour((3,)))


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_associahedron_matches_dissection_oracle(d):
    counts = _codim_counts(d, Flavour(()))
    assert counts == polygon_dissections(d + 1)
    assert counts[-1] == catalan(d - 1)


def _flavours(max_d=4, max_F=2):
    for d in range(1, max_d + 1):
        for n in range(max_F + 1):
            if d + n < 2:
                continue
            for p in product(range(1, d + 1), repeat=n):
                if list(p) == sorted(p):
                    yield d, Flavour(p)


def test_enumeration_is_stable_compatible_and_duplicate_free():
    for d, fl in _flavours():
        decs = enumerate_stable_decompositions(d, fl)
        assert len(set(decs)) == len(decs)
        assert one_vertex(d, fl.F) in decs
        for dec in decs:
            assert is_stable(dec)
            check_compatible(dec, fl)
            dec.tree.validate()
            assert dec.codim <= d - 2 + len(fl)


def test_euler_relation_on_codim_counts():
    # a closed ball of dimension n: Σ (-1)^dim = 1, i.e. Σ_k (-1)^k c_k = (-1)^n
    for d, fl in _flavours():
        counts = _codim_counts(d, fl)
        n = d - 2 + len(fl)
        assert sum((-1) ** k * c for k, c in enumerate(counts)) == (-1) ** n, (d, fl.p)


def test_stability_predicate():
    assert not is_stable(FDecomposition((frozenset(), ((frozenset({1}), (1, 2)),))))
    assert is_stable(STACKED)
    assert is_stable(one_vertex(3, ()))


def test_induce_flavours():
    assert induce_flavours(one_vertex(2, {1, 2}), Flavour((1, 2), (1, 2)))[()] == Flavour((1, 2), (1, 2))
    induced = induce_flavours(STACKED, HEX)
    assert induced[()] == Flavour((1,), (2,))
    assert induced[(0,)] == Flavour((1,), (1,))
    two = FDecomposition((frozenset(), (1, (frozenset(), (2, 3)))))
    assert all(len(v) == 0 for v in induce_flavours(two, Flavour(())).values())


def test_induce_flavours_reports_incompatible_sprinkle():
    bad = FDecomposition((frozenset(), (1, (frozenset({1}), (2, 3)))))
    with pytest.raises(ValueError, match=r"vertex \(1,\) for sprinkle 1"):
        induce_flavours(bad, Flavour((1,)))


def test_propagate_weights_examples():
    assert propagate_weights(one_vertex(2, ()), Flavour(()), (3, 1, 2)) == {(): (3, 1, 2)}
    out = propagate_weights(STACKED, HEX, (5, 1, 2))
    assert out == {(0,): (4, 1, 2), (): (5, 4)}
    with pytest.raises(ValueError):
        propagate_weights(STACKED, HEX, (4, 1, 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.lists(st.integers(1, 4), min_size=0, max_size=2), st.data())
def test_weight_law_holds_at_every_vertex(d, p, data):
    p = [min(x, d) for x in p]
    fl = Flavour(tuple(p))
    ins = data.draw(st.lists(st.integers(1, 5), min_size=d, max_size=d))
    w = (sum(ins) + len(p), *ins)
    for dec in enumerate_stable_decompositions(d, fl):
        ws = propagate_weights(dec, fl, w)
        tree = dec.tree
        for v, wv in ws.items():
            assert wv[0] == sum(wv[1:]) + len(dec.parts[v])
            for n, c in enumerate(tree.node(v)):
                assert wv[n + 1] == (w[c] if isinstance(c, int) else ws[v + (n,)][0])


def test_contraction_stays_in_the_enumeration():
    for d, fl in _flavours(3):
        decs = set(enumerate_stable_decompositions(d, fl))
        for dec in decs:
            for e in dec.tree.finite_edges:
                assert dec.contract(e) in decs


def test_ribbon_tree_validation_and_flags():
    t = RibbonTree((1, (2, 3)))
    t.validate()
    assert t.flag_towards((), 3) == 2
    assert t.path_to_leaf(3) == [(), (1,)]
    with pytest.raises(ValueError):
        RibbonTree((2, 1)).validate()


def test_popsicle_and_tree_counts_agree():
    assert f_vector(enumerate_strata(2, HEX)) == _codim_counts(2, HEX)

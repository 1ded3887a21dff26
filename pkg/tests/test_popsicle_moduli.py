from __future__ import annotations

import time
from itertools import combinations_with_replacement, product

import pytest
from hypothesis import given, strategies as st

from tests.oracles import kirkman_cayley
from wrapped_ainfty.popsicle_moduli import (PopsicleStratum, SymPartition, dimension, enumerate_strata,
                                            euler_characteristic, f_vector, face_covers, is_face,
                                            isotropy_codim, orbits, poset_dot, poset_records, sym_act,
                                            sym_group, vdim)
from wrapped_ainfty.trees import FDecomposition, Flavour, induce_flavours

HEX = Flavour((1, 1))
PENT = Flavour((1, 2))


def test_dimension_examples():
    assert dimension(2, 2) == 2
    assert dimension(1, 0) == -1
    assert dimension(1, Flavour((1,))) == 0
    with pytest.raises(ValueError):
        dimension(0, 0)


def test_vdim_examples():
    assert vdim(1, 0, 4, (3,)) == 0
    assert vdim(1, Flavour((1,)), 2, (2,)) == 0
    assert vdim(2, 0, 0, (0, 0)) == 0
    with pytest.raises(ValueError):
        vdim(2, 0, 0, (0,))


def test_hexagon_and_pentagon_f_vectors_fast():
    t = time.perf_counter()
    assert f_vector(enumerate_strata(2, HEX)) == (1, 6, 6)
    assert f_vector(enumerate_strata(2, PENT)) == (1, 5, 5)
    assert f_vector(enumerate_strata(4, Flavour(()))) == (1, 5, 5)
    assert time.perf_counter() - t < 1


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_associahedron_kirkman_cayley(d):
    fv = f_vector(enumerate_strata(d, Flavour(())))
    assert fv == tuple(kirkman_cayley(d + 1, k) for k in range(d - 1))


def _flavours(max_d=5, max_F=2):
    for d in range(1, max_d + 1):
        for n in range(max_F + 1):
            if d + n < 2:
                continue
            for p in combinations_with_replacement(range(1, d + 1), n):
                yield d, Flavour(p)


def test_euler_characteristic_of_balls():
    for d, fl in _flavours():
        strata = enumerate_strata(d, fl)
        assert euler_characteristic(strata) == 1, (d, fl.p)
        assert all(s.dim >= 0 for s in strata)


def test_sym_group():
    assert len(sym_group(HEX)) == 2
    assert sym_group(PENT) == [{1: 1, 2: 2}]
    with pytest.raises(ValueError):
        sym_act(enumerate_strata(2, PENT)[0], {1: 2, 2: 1})


def test_swap_moves_root_sprinkle():
    swap = {1: 2, 2: 1}
    s = PopsicleStratum(FDecomposition((frozenset({1}), ((frozenset({2}), (1,)), 2))), HEX)
    t = sym_act(s, swap)
    assert t.dec.parts[()] == frozenset({2})
    assert sym_act(s, {1: 1, 2: 2}) == s
    assert sym_act(t, swap) == s


def test_hexagon_orbit_structure():
    strata = enumerate_strata(2, HEX)
    by_codim: dict = {}
    for orb in orbits(strata):
        by_codim.setdefault(orb[0].codim, []).append(len(orb))
        assert len({s.dec.tree for s in orb}) == 1
        assert len({s.codim for s in orb}) == 1
    assert sorted(by_codim[1]) == [1, 1, 2, 2]
    assert sorted(by_codim[2]) == [2, 2, 2]
    # a stratum is fixed by the swap exactly when both sprinkles sit at one vertex
    swap = {1: 2, 2: 1}
    for s in strata:
        shared = any(len(F) == 2 for F in s.dec.parts.values())
        assert (sym_act(s, swap) == s) == shared


@pytest.mark.xfail(strict=True, reason="the reflection fixes two hexagon edges; see ledger")
def test_hexagon_has_three_two_element_edge_orbits():
    edge_orbits = [o for o in orbits(enumerate_strata(2, HEX)) if o[0].codim == 1]
    assert sorted(len(o) for o in edge_orbits) == [2, 2, 2]


def test_orbits_partition_each_level():
    for d, fl in _flavours(4):
        strata = enumerate_strata(d, fl)
        flat = [s.dec for o in orbits(strata) for s in o]
        assert sorted(flat, key=FDecomposition.sort_key) == sorted((s.dec for s in strata),
                                                                   key=FDecomposition.sort_key)


def test_group_action_composition_law():
    fl = Flavour((1, 1, 1))
    group = sym_group(fl)
    assert len(group) == 6
    strata = enumerate_strata(2, fl)
    for g, h in product(group, repeat=2):
        gh = {f: g[h[f]] for f in h}
        for s in strata[:20]:
            assert sym_act(sym_act(s, h), g) == sym_act(s, gh)


def test_isotropy_codim():
    assert isotropy_codim([{1}, {2}, {3}]) == 0
    assert isotropy_codim([{1, 2}, {3}]) == 1
    assert isotropy_codim([{1, 2}, {3, 4}]) == 2
    P = SymPartition((frozenset({1, 2}), frozenset({3})))
    P.check(Flavour((1, 1, 2)))
    with pytest.raises(ValueError):
        P.check(Flavour((1, 2, 2)))


@given(st.lists(st.integers(1, 4), min_size=1, max_size=6))
def test_isotropy_codim_is_size_minus_parts(sizes):
    parts, n = [], 0
    for k in sizes:
        parts.append(set(range(n, n + k)))
        n += k
    assert isotropy_codim(parts) == n - len(parts)


@given(st.data())
def test_vdim_additive_over_components(data):
    d = data.draw(st.integers(2, 4))
    fl = Flavour(tuple(sorted(data.draw(st.lists(st.integers(1, d), max_size=2)))))
    strata = enumerate_strata(d, fl)
    s = strata[data.draw(st.integers(0, len(strata) - 1))]
    tree = s.dec.tree
    degs = data.draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d))
    deg0 = data.draw(st.integers(-3, 3))
    edge_deg = {e: data.draw(st.integers(-3, 3)) for e in tree.finite_edges}
    edge_deg[()] = deg0
    induced = induce_flavours(s.dec, fl)
    total = 0
    for v in tree.vertices:
        ins = [degs[c - 1] if isinstance(c, int) else edge_deg[v + (n,)] for n, c in enumerate(tree.node(v))]
        total += vdim(len(ins), induced[v], edge_deg[v], ins)
    assert vdim(d, fl, deg0, degs) == total + s.codim


def test_face_relation_and_emitters():
    strata = enumerate_strata(2, PENT)
    covers = face_covers(strata)
    # five edges on the open cell, two vertices on each edge
    assert len(covers) == 15
    for small, big in covers:
        assert small.codim == big.codim + 1
        assert is_face(small.dec, big.dec)
    top = strata[0]
    assert all(is_face(s.dec, top.dec) for s in strata)
    records = poset_records(strata)
    assert records[0] == "stratum s0 codim=0 dec={1,2}(1,2)"
    assert sum(1 for r in records if r.startswith("face ")) == 15
    dot = poset_dot(strata)
    assert dot.startswith("digraph strata {") and dot.count("->") == 15
    assert poset_records(strata) == records

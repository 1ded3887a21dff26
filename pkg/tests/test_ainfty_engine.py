from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from tests.oracles import algebra_table, dense_table, random_constants
from wrapped_ainfty.ainfty_engine import (Chord, ConstantsTable, OperationFamily, ainfty_expression,
                                          all_boundary_residuals, assemble_mu, basis_degree, chord_map,
                                          check_ainfty, check_boundary_relation, check_homomorphism,
                                          relation_terms, validate)
from wrapped_ainfty.field_algebra import Field
from wrapped_ainfty.wrapped_telescope import winding_subcomplex, winding_violations

Q = Field.rationals()
F2 = Field.prime(2)


def _table(*chords, field_=Q):
    return ConstantsTable(field_, chord_map(chords))


def test_validate_examples():
    t = _table(Chord("a", 1, 0), Chord("b", 1, 0), Chord("c", 3, 0))
    assert validate(t) == []
    t.add(2, (), ("a", "b"), "c", 1)
    [v] = validate(t)
    assert "weight law" in v.message and "w=(3, 1, 1)" in v.message
    u = _table(Chord("a", 1, 0), Chord("b", 1, 0), Chord("c", 4, -2))
    u.add(2, (1, 1), ("a", "b"), "c", 1)
    assert any("non-injective" in v.message for v in validate(u))


def test_validate_rigidity_objects_and_winding():
    t = _table(Chord("a", 1, 0, obj_from="K", obj_to="L", winding=1),
               Chord("b", 1, 1, obj_from="L", obj_to="K", winding=0),
               Chord("c", 2, 1, obj_from="K", obj_to="K", winding=2))
    t.add(2, (), ("a", "b"), "c", 1)
    msgs = [v.message for v in validate(t)]
    assert msgs == ["winding number not conserved"]
    t.add(2, (), ("b", "a"), "c", 1)
    msgs = [v.message for v in validate(t)]
    assert any("head to tail" in m for m in msgs)
    r = _table(Chord("a", 1, 0), Chord("c", 1, 0))
    r.add(1, (), ("a",), "c", 1)
    assert "rigidity" in validate(r)[0].message
    with pytest.raises(ValueError):
        r.add(1, (), ("zz",), "c", 1)


def test_mu1_from_delta_only():
    for deg in range(-2, 3):
        t = _table(Chord("a", 2, deg), Chord("b", 2, deg + 1))
        t.add(1, (), ("a",), "b", 3)
        mu = assemble_mu(t)
        assert mu((("a", 0),)) == {("b", 0): (-1) ** deg * 3}
        # the added term qb ↦ (-1)^{deg b + 1} b
        assert mu((("b", 1),)) == {("b", 0): (-1) ** (deg + 2)}


def test_empty_table():
    t = _table(Chord("a", 1, 0), Chord("b", 1, 1))
    mu = assemble_mu(t)
    assert mu((("a", 1),)) == {("a", 0): -1}
    assert mu((("b", 1),)) == {("b", 0): 1}
    assert mu.arities() == {1}
    assert check_ainfty(mu) == []


@pytest.mark.parametrize("a,b", list(product(range(-1, 3), repeat=2)))
def test_mu2_on_q_extended_inputs(a, b):
    t = _table(Chord("x1", 1, a), Chord("x2", 1, b), Chord("y", 2, a + b), Chord("y1", 3, a + b - 1),
               Chord("y2", 3, a + b - 1), Chord("y12", 4, a + b - 2))
    m2, m1, m2_, m12 = 2, 3, 5, 7
    t.add(2, (), ("x1", "x2"), "y", m2)
    t.add(2, (1,), ("x1", "x2"), "y1", m1)
    t.add(2, (2,), ("x1", "x2"), "y2", m2_)
    t.add(2, (1, 2), ("x1", "x2"), "y12", m12)
    mu = assemble_mu(t)
    s1 = (-1) ** a
    s2 = (-1) ** (a + b - 1)
    assert mu((("x1", 0), ("x2", 0))) == {("y", 0): s1 * m2}
    assert mu((("x1", 0), ("x2", 1))) == {("y", 1): s1 * m2, ("y2", 0): s1 * m2_}
    assert mu((("x1", 1), ("x2", 0))) == {("y", 1): s2 * m2, ("y1", 0): s2 * m1}
    assert mu((("x1", 1), ("x2", 1))) == {("y2", 1): -s2 * m2_, ("y1", 1): s2 * m1, ("y12", 0): s2 * m12}


def test_associative_algebra_passes_and_perturbation_fails():
    for degrees in (True, False):
        mu = assemble_mu(algebra_table(degrees))
        assert check_ainfty(mu, max_d=4) == []
        bad = check_ainfty(assemble_mu(algebra_table(degrees, perturb=True)), max_d=4)
        assert bad and {r.arity for r in bad} == {3}
        assert "t3" in bad[0].describe(Q)


def test_square_nonzero_delta_gives_witness():
    t = _table(Chord("x", 1, 0), Chord("y", 1, 1), Chord("z", 1, 2), field_=F2)
    t.add(1, (), ("x",), "y", 1)
    t.add(1, (), ("y",), "z", 1)
    bad = check_ainfty(assemble_mu(t), max_d=1)
    assert any(r.inputs == (("x", 0),) and r.output == ("z", 0) for r in bad)


def test_generator_cap():
    t = dense_table(Q, max_weight=4, degrees=range(-2, 3), max_d=1)
    with pytest.raises(ValueError, match="cap"):
        check_ainfty(assemble_mu(t), max_generators=8)


def test_boundary_relation_examples():
    t = dense_table(Q)
    terms = relation_terms(t, 1, {1}, ("c2_2", "c1_1"))
    assert len(terms) == 2
    by_cut = {r.cut_label: r for r in terms}
    kappa_after = by_cut["d-=1 d+=1 i=1 F-={-} F+={1}"]
    kappa_before = by_cut["d-=1 d+=1 i=1 F-={1} F+={-}"]
    assert kappa_after.sign == 1 and kappa_after.outer[1] == (1,)
    assert kappa_before.sign == -1 and kappa_before.inner[1] == (1,)
    seven = relation_terms(t, 2, {1, 2}, ("c4_0", "c1_0", "c1_1"))
    assert len(seven) == 7 and len({r.cut_label for r in seven}) == 7
    zero = ConstantsTable(Q, t.chords)
    assert check_boundary_relation(zero, 2, {1, 2}, (4, 1, 1), ("c4_0", "c1_0", "c1_1")) == 0
    with pytest.raises(ValueError):
        check_boundary_relation(t, 2, {1, 2}, (4, 1, 1), ("c4_1", "c1_0", "c1_1"))


def test_algebra_table_satisfies_boundary_relations():
    assert all_boundary_residuals(algebra_table(), 3) == []
    assert all_boundary_residuals(algebra_table(perturb=True), 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_boundary_relation_matches_ainfty_residual(seed):
    rng = random.Random(seed)
    t = random_constants(rng, Q, max_d=3, density=0.3)
    mu = assemble_mu(t)
    ch = t.chords
    low = sorted(c for c in ch if ch[c].weight <= 2)
    for _ in range(4):
        d = rng.randint(1, 3)
        ins = [rng.choice(low) for _ in range(d)]
        F = [k for k in range(1, d + 1) if rng.random() < 0.5]
        args = tuple((x, int(k + 1 in F)) for k, x in enumerate(ins))
        res = ainfty_expression(args, mu, mu.deg)
        w0 = sum(ch[x].weight for x in ins) + len(F)
        g0 = sum(ch[x].degree for x in ins) + 3 - d - len(F)
        for x0 in (c for c in ch if (ch[c].weight, ch[c].degree) == (w0, g0)):
            rel = check_boundary_relation(t, d, F, None, (x0, *ins))
            assert res.get((x0, 0), 0) in (rel, -rel)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_mu_commutes_with_dq_and_has_degree_two_minus_d(seed):
    rng = random.Random(seed)
    t = random_constants(rng, Q, max_d=3, density=0.3)
    mu = assemble_mu(t)
    for args, outs in mu.values.items():
        d = len(args)
        if d == 1 and args[0][1]:
            continue            # the hand-added term is not part of the equivariant family
        total = sum(basis_degree(b, mu.deg) for b in args)
        for b in outs:
            assert basis_degree(b, mu.deg) == total + 2 - d
        lhs = {(c, 0): v for (c, q), v in outs.items() if q}
        rhs: dict = {}
        bdeg = [basis_degree(b, mu.deg) for b in args]
        for k in range(d):
            if not args[k][1]:
                continue
            sign = (-1) ** sum(g - 1 for g in bdeg[k + 1:])
            lowered = (*args[:k], (args[k][0], 0), *args[k + 1:])
            for z, v in mu(lowered).items():
                rhs[z] = rhs.get(z, 0) + sign * v
        assert lhs == {z: v for z, v in rhs.items() if v}


def _identity(mu: OperationFamily, scale=None) -> OperationFamily:
    values = {(b,): {b: mu.field.one} for b in mu.basis()}
    if scale is not None:
        values[(scale,)] = {scale: mu.field(2)}
    return OperationFamily(mu.field, mu.chords, values, mu.top_weight)


def test_identity_homomorphism_and_corruption():
    mu = assemble_mu(algebra_table())
    assert check_homomorphism(mu, mu, _identity(mu), max_d=3) == []
    bad = check_homomorphism(mu, mu, _identity(mu, scale=("t1", 0)), max_d=3)
    assert bad
    assert any(r.inputs == (("t1", 0), ("t1", 0)) for r in bad)


def test_winding_filter_on_operations():
    # a_k → b_k differentials at weight k + 1 and winding k
    chords = [Chord(f"{n}{k}", k + 1, int(n == "b"), winding=k) for n in "ab" for k in (0, 1)]
    t = ConstantsTable(Q, chord_map(chords))
    t.add(1, (), ("a0",), "b0", 1)
    t.add(1, (), ("a1",), "b1", 1)
    assert winding_violations(t) == []
    rep = winding_subcomplex(assemble_mu(t), 0)
    assert rep.closed
    assert set(rep.structure.chords) == {"a0", "b0"}
    t2 = t.copy()
    t2.add(1, (1,), ("a0",), "a1", 1)
    assert winding_violations(t2)
    assert any("winding" in v.message for v in validate(t2))

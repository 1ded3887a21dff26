from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from tests.oracles import random_telescope_model
from wrapped_ainfty.ainfty_engine import Chord
from wrapped_ainfty.field_algebra import DSquaredError, Field, GradedModule, SparseMap, compose, homology
from wrapped_ainfty.wrapped_telescope import (ChainMapError, build_telescope, check_homotopy_limit,
                                              check_partial_forget, direct_limit_ranks, homotopy_defect,
                                              sparse_from_arrows, weight_module, winding_subcomplex)

Q = Field.rationals()
F2 = Field.prime(2)


def identity_model(W, field_=Q):
    """One degree-0 generator per weight, δ = 0 and κ the identity."""
    chords = [Chord(f"x{w}", w, 0) for w in range(1, W + 1)]
    mods = {w: weight_module(chords, w, field_) for w in range(1, W + 1)}
    kappa = {w: SparseMap(mods[w], mods[w + 1], {(f"x{w + 1}", f"x{w}"): 1}, 0) for w in range(1, W)}
    return chords, {}, kappa


@pytest.mark.parametrize("W", [3, 5])
def test_identity_model_homology(W):
    chords, delta, kappa = identity_model(W)
    tc = build_telescope(chords, delta, kappa, W, "C_W")
    assert tc.homology() == {0: 1}
    assert direct_limit_ranks(tc) == {0: 1}
    full = build_telescope(chords, delta, kappa, W, "full")
    assert full.homology() == {}


@pytest.mark.parametrize("mode", ["C_W", "full"])
def test_partial_forget_on_identity_model(mode):
    chords, delta, kappa = identity_model(5)
    tc = build_telescope(chords, delta, kappa, 5, mode)
    for nu in range(1, 6):
        assert check_partial_forget(tc, nu)
    with pytest.raises(ValueError):
        check_partial_forget(tc, 6)


def test_homotopy_identity_on_every_generator():
    chords, delta, kappa = identity_model(5)
    tc = build_telescope(chords, delta, kappa, 5, "C_W")
    for w in range(1, 5):
        assert homotopy_defect(tc, w).entries == {}
    rep = check_homotopy_limit(tc)
    assert rep and rep.failures == ()
    with pytest.raises(ValueError):
        check_homotopy_limit(build_telescope(chords, delta, kappa, 5, "full"))


def test_single_weight_is_sign_flipped_cf1():
    chords = [Chord("a", 1, 0), Chord("b", 1, 1), Chord("c", 1, 1)]
    M = weight_module(chords, 1, Q)
    delta = {1: SparseMap(M, M, {("b", "a"): 3}, 1)}
    tc = build_telescope(chords, delta, {}, 1, "C_W")
    assert tc.differential.entries == {(("b", 0), ("a", 0)): 3}
    assert tc.homology() == homology(delta[1]) == {1: 1}
    assert check_homotopy_limit(tc)


def test_non_square_zero_delta_rejected():
    chords = [Chord("a", 1, 0), Chord("b", 1, 1), Chord("c", 1, 2)]
    M = weight_module(chords, 1, F2)
    with pytest.raises(DSquaredError):
        build_telescope(chords, {1: SparseMap(M, M, {("b", "a"): 1, ("c", "b"): 1}, 1)}, {}, 1)


def test_non_chain_kappa_rejected_with_witness():
    chords = [Chord("a1", 1, 0), Chord("b1", 1, 1), Chord("a2", 2, 0), Chord("b2", 2, 1)]
    M1, M2 = weight_module(chords, 1, Q), weight_module(chords, 2, Q)
    delta = {2: SparseMap(M2, M2, {("b2", "a2"): 1}, 1)}
    kappa = {1: SparseMap(M1, M2, {("a2", "a1"): 1, ("b2", "b1"): 1}, 0)}
    with pytest.raises(ChainMapError) as exc:
        build_telescope(chords, delta, kappa, 2)
    assert exc.value.weight == 1 and exc.value.generator == "a1"


def test_homotopy_defect_detects_tampered_kappa():
    chords, delta, kappa = identity_model(3)
    tc = build_telescope(chords, delta, kappa, 3, "C_W")
    doubled = {w: SparseMap(k.source, k.target, {e: 2 for e in k.entries}, 0) for w, k in tc.kappa.items()}
    rep = check_homotopy_limit(replace(tc, kappa=doubled))
    assert rep.top_iso and not rep.homotopy_ok
    assert rep.failures[0].startswith("homotopy defect at weight 1")


def test_supplied_top_homology_is_compared():
    chords, delta, kappa = identity_model(3)
    tc = build_telescope(chords, delta, kappa, 3, "C_W")
    assert check_homotopy_limit(tc, {3: {0: 1}})
    assert not check_homotopy_limit(tc, {3: {0: 2}})


@pytest.mark.parametrize("seed", range(20))
def test_random_models_over_f2(seed):
    rng = random.Random(seed)
    chords, delta, kappa = random_telescope_model(rng, 5, 8, F2)
    for mode in ("C_W", "full"):
        tc = build_telescope(chords, delta, kappa, 5, mode, F2)
        for nu in range(1, 6):
            assert check_partial_forget(tc, nu), (seed, mode, nu)
    assert check_homotopy_limit(build_telescope(chords, delta, kappa, 5, "C_W", F2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sets(st.integers(0, 40)))
def test_homology_invariant_under_basis_sign_changes(seed, flips):
    rng = random.Random(seed)
    field_ = Field.prime(3)
    chords, delta, kappa = random_telescope_model(rng, 3, 5, field_)
    tc = build_telescope(chords, delta, kappa, 3, "C_W", field_)
    ids = tc.module.ids
    sign = {g: (-1 if n in flips else 1) for n, g in enumerate(ids)}
    flipped = {(t, s): c * sign[t] * sign[s] for (t, s), c in tc.differential.entries.items()}
    assert homology(SparseMap(tc.module, tc.module, flipped, 1)) == tc.homology()


def test_square_zero_of_built_differential():
    rng = random.Random(7)
    chords, delta, kappa = random_telescope_model(rng, 4, 6, Q)
    tc = build_telescope(chords, delta, kappa, 4, "full", Q)
    assert compose(tc.differential, tc.differential).entries == {}


def test_winding_subcomplex_of_telescope():
    chords = [Chord("a", 1, 0, winding=0), Chord("b", 1, 1, winding=0), Chord("c", 1, 1, winding=1)]
    M = weight_module(chords, 1, Q)
    ok = build_telescope(chords, {1: sparse_from_arrows(M, M, [("a", "b", 1)], 1)}, {}, 1)
    rep = winding_subcomplex(ok, 0)
    assert rep.closed and set(rep.structure.source.ids) == {("a", 0), ("b", 0)}
    bad = build_telescope(chords, {1: sparse_from_arrows(M, M, [("a", "c", 1)], 1)}, {}, 1)
    rep = winding_subcomplex(bad, 0)
    assert not rep.closed and "outside winding 0" in rep.violations[0]
    plain = [Chord("a", 1, 0, winding=0)]
    same = build_telescope(plain, {}, {}, 1)
    assert winding_subcomplex(same, 0).structure.source.ids == same.module.ids


def test_input_validation():
    chords, delta, kappa = identity_model(2)
    with pytest.raises(ValueError):
        build_telescope(chords, delta, kappa, 2, "bogus")
    with pytest.raises(ValueError):
        build_telescope(chords, delta, kappa, 0)
    G = GradedModule((("x1", 0),), Q)
    with pytest.raises(ValueError):
        build_telescope(chords, {1: SparseMap(G, G, {}, 0)}, kappa, 2)

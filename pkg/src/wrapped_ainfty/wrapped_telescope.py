"""Finite model of the telescope complex ⊕_w CF(w)[q] and its quasi-isomorphism checks.

Generators of the telescope are pairs ``(chord_id, q)``; ``(x, 1)`` stands for
q·x and has degree ``deg x - 1``.  Weights live in a window 1..W.  In "full"
mode every weight carries a q-part (κ out of the top weight is dropped); in
"C_W" mode the top weight has no q-part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .ainfty_engine import Chord, OperationFamily
from .field_algebra import (Field, GradedModule, SparseMap, check_square_zero, compose, homology,
                            induced_map_ranks)

MODES = ("full", "C_W")


class ChainMapError(ValueError):
    def __init__(self, weight: int, generator, image: dict):
        self.weight, self.generator, self.image = weight, generator, image
        super().__init__(f"κ at weight {weight} is not a chain map: generator {generator!r} gives {image}")


def weight_module(chords: Iterable[Chord], w: int, field_: Field) -> GradedModule:
    return GradedModule(tuple((c.id, c.degree) for c in sorted(chords, key=lambda c: c.id) if c.weight == w), field_)


@dataclass
class TelescopeComplex:
    field: Field
    chords: dict[str, Chord]
    W: int
    mode: str
    module: GradedModule
    differential: SparseMap
    delta: dict[int, SparseMap]
    kappa: dict[int, SparseMap]

    def weight(self, g) -> int:
        return self.chords[g[0]].weight

    def span(self, keep) -> GradedModule:
        return self.module.restrict(keep)

    def subcomplex(self, keep) -> tuple[SparseMap, SparseMap]:
        """(differential of the span of ``keep``, inclusion), after checking closure."""
        sub = self.span(keep)
        return restrict_differential(self.differential, sub), inclusion(sub, self.module)

    def homology(self) -> dict[int, int]:
        return homology(self.differential)


def restrict_differential(d: SparseMap, sub: GradedModule) -> SparseMap:
    entries = {}
    for (t, s), c in d.entries.items():
        if s in sub:
            if t not in sub:
                raise ValueError(f"span is not a subcomplex: {s!r} hits {t!r}")
            entries[(t, s)] = c
    return SparseMap(sub, sub, entries, d.shift)


def quotient_differential(d: SparseMap, sub: GradedModule) -> SparseMap:
    rest = d.source.restrict(lambda g: g not in sub)
    entries = {(t, s): c for (t, s), c in d.entries.items() if s in rest and t in rest}
    return SparseMap(rest, rest, entries, d.shift)


def inclusion(sub: GradedModule, ambient: GradedModule) -> SparseMap:
    return SparseMap(sub, ambient, {(g, g): ambient.field.one for g in sub.ids}, 0)


def build_telescope(chords: Iterable[Chord], delta: Mapping[int, SparseMap],
                    kappa: Mapping[int, SparseMap], W: int, mode: str = "C_W",
                    field_: Field | None = None) -> TelescopeComplex:
    """μ¹(a + qb) = (-1)^{deg a} δa + (-1)^{deg b} (qδb + κb - b) on weights 1..W."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if W < 1:
        raise ValueError("W must be at least 1")
    chords = {c.id: c for c in chords}
    if field_ is None:
        some = next(iter(delta.values()), None) or next(iter(kappa.values()), None)
        field_ = some.source.field if some is not None else Field.rationals()
    mods = {w: weight_module(chords.values(), w, field_) for w in range(1, W + 2)}
    delta = {w: delta.get(w) or SparseMap.zero(mods[w], mods[w], 1) for w in range(1, W + 1)}
    kappa = {w: kappa.get(w) or SparseMap.zero(mods[w], mods[w + 1], 0) for w in range(1, W)}
    for w, dw in delta.items():
        if dw.shift != 1 or dw.source.ids != mods[w].ids:
            raise ValueError(f"δ at weight {w} must be a degree-1 endomorphism of CF({w})")
        check_square_zero(dw)
    for w, kw in kappa.items():
        if kw.shift != 0 or kw.source.ids != mods[w].ids or kw.target.ids != mods[w + 1].ids:
            raise ValueError(f"κ at weight {w} must be a degree-0 map CF({w}) → CF({w + 1})")
        defect = (compose(delta[w + 1], kw) - compose(kw, delta[w])).columns()
        if defect:
            g = min(defect, key=mods[w].ids.index)
            raise ChainMapError(w, g, dict(defect[g]))

    has_q = lambda w: mode == "full" or w < W
    basis = []
    for w in range(1, W + 1):
        for cid, deg in mods[w].basis:
            basis.append(((cid, 0), deg))
        if has_q(w):
            for cid, deg in mods[w].basis:
                basis.append(((cid, 1), deg - 1))
    module = GradedModule(tuple(basis), field_)
    one = field_.one
    entries: dict = {}

    def put(t, s, c):
        entries[(t, s)] = entries.get((t, s), field_.zero) + c

    for w in range(1, W + 1):
        for (t, s), c in delta[w].entries.items():
            sa = mods[w].degree(s)
            put((t, 0), (s, 0), c if sa % 2 == 0 else -c)
            if has_q(w):
                put((t, 1), (s, 1), c if sa % 2 == 0 else -c)
        if not has_q(w):
            continue
        for s in mods[w].ids:
            sb = mods[w].degree(s)
            put((s, 0), (s, 1), -one if sb % 2 == 0 else one)
        if w < W:
            for (t, s), c in kappa[w].entries.items():
                put((t, 0), (s, 1), c if mods[w].degree(s) % 2 == 0 else -c)
    diff = SparseMap(module, module, entries, 1)
    check_square_zero(diff)
    return TelescopeComplex(field_, chords, W, mode, module, diff, dict(delta), dict(kappa))


def weight_filtration(tc: TelescopeComplex, nu: int) -> GradedModule:
    return tc.span(lambda g: tc.weight(g) >= nu)


def check_partial_forget(tc: TelescopeComplex, nu: int) -> bool:
    """Inclusion of weights ≥ ν is a quasi-isomorphism; the layers below ν are acyclic."""
    if not 1 <= nu <= tc.W:
        raise ValueError(f"need 1 ≤ ν ≤ W={tc.W}")
    d_sub, inc = tc.subcomplex(lambda g: tc.weight(g) >= nu)
    h_sub, h_all = homology(d_sub), tc.homology()
    if h_sub != h_all:
        return False
    if induced_map_ranks(inc, d_sub, tc.differential) != h_all:
        return False
    # each layer C^v / C^{v+1} below ν is the cone of an identity
    for v in range(1, nu):
        lower, _ = tc.subcomplex(lambda g, v=v: tc.weight(g) >= v)
        layer = quotient_differential(lower, weight_filtration(tc, v + 1))
        if homology(layer):
            return False
    return True


@dataclass(frozen=True)
class HomotopyLimitReport:
    top_iso: bool
    homotopy_ok: bool
    failures: tuple[str, ...]

    def __bool__(self):
        return self.top_iso and self.homotopy_ok


def homotopy_defect(tc: TelescopeComplex, w: int) -> SparseMap:
    """μ¹h + hδ' - (κ - incl) on CF(w), with h(a) = (-1)^{deg a} qa."""
    F = tc.field
    src = tc.delta[w].source
    d_src = SparseMap(src, src, {(t, s): (c if src.degree(s) % 2 == 0 else -c)
                                 for (t, s), c in tc.delta[w].entries.items()}, 1)
    h = SparseMap(src, tc.module, {((g, 1), g): F.one if src.degree(g) % 2 == 0 else -F.one
                                   for g in src.ids}, -1)
    incl = SparseMap(src, tc.module, {((g, 0), g): F.one for g in src.ids}, 0)
    kap = SparseMap(src, tc.module, {((t, 0), s): c for (t, s), c in tc.kappa[w].entries.items()}, 0)
    lhs = compose(tc.differential, h)
    rhs = compose(h, d_src)
    total = {}
    for m in (lhs, rhs):
        for k, c in m.entries.items():
            total[k] = total.get(k, F.zero) + c
    for m, s in ((kap, -1), (incl, 1)):
        for k, c in m.entries.items():
            total[k] = total.get(k, F.zero) + (c if s > 0 else -c)
    return SparseMap(src, tc.module, total, 0)


def check_homotopy_limit(tc: TelescopeComplex, per_weight: Mapping[int, Mapping[int, int]] | None = None) -> HomotopyLimitReport:
    """Top-weight inclusion is a quasi-isomorphism and κ ≃ incl via the explicit homotopy."""
    if tc.mode != "C_W":
        raise ValueError("the homotopy-limit check needs C_W mode")
    failures = []
    d_top, inc = tc.subcomplex(lambda g: tc.weight(g) == tc.W)
    h_top, h_all = homology(d_top), tc.homology()
    top_iso = h_top == h_all and induced_map_ranks(inc, d_top, tc.differential) == h_all
    if not top_iso:
        failures.append(f"H(CF({tc.W})) = {h_top} but H(C_W) = {h_all}")
    if per_weight is not None and tc.W in per_weight and dict(per_weight[tc.W]) != h_all:
        top_iso = False
        failures.append(f"supplied H(CF({tc.W})) = {dict(per_weight[tc.W])} but H(C_W) = {h_all}")
    homotopy_ok = True
    for w in range(1, tc.W):
        defect = homotopy_defect(tc, w)
        if defect.entries:
            homotopy_ok = False
            (t, s), c = min(defect.entries.items(), key=lambda kv: repr(kv[0]))
            failures.append(f"homotopy defect at weight {w}: {s!r} → {t!r} ({tc.field.format(c)})")
    return HomotopyLimitReport(top_iso, homotopy_ok, tuple(failures))


def direct_limit_ranks(tc: TelescopeComplex) -> dict[int, int]:
    """Ranks of the direct limit of H(CF(w)) under κ in the window: the image of H(CF(W))."""
    return homology(tc.delta[tc.W])


# ---------------------------------------------------------------------------
# winding filter

@dataclass(frozen=True)
class WindingReport:
    structure: Any
    violations: tuple[str, ...]

    @property
    def closed(self) -> bool:
        return not self.violations


def _label(chords: Mapping[str, Chord], cid: str) -> int:
    w = chords[cid].winding
    if w is None:
        raise ValueError(f"chord {cid} has no winding label")
    return w


def winding_subcomplex(obj: TelescopeComplex | OperationFamily, label: int = 0) -> WindingReport:
    """Restrict to generators with the given winding; report operations leaving the span."""
    chords = obj.chords
    keep = lambda g: _label(chords, g[0]) == label
    violations = []
    if isinstance(obj, TelescopeComplex):
        for (t, s), c in sorted(obj.differential.entries.items(), key=lambda kv: repr(kv[0])):
            if keep(s) and not keep(t):
                violations.append(f"μ¹ sends {s!r} to {t!r} outside winding {label}")
        sub = obj.span(keep)
        entries = {(t, s): c for (t, s), c in obj.differential.entries.items() if s in sub and t in sub}
        return WindingReport(SparseMap(sub, sub, entries, 1), tuple(violations))
    values = {}
    for args, outs in sorted(obj.values.items(), key=lambda kv: repr(kv[0])):
        if not all(keep(b) for b in args):
            continue
        for b in sorted(outs, key=repr):
            if not keep(b):
                violations.append(f"μ^{len(args)}{args!r} has output {b!r} outside winding {label}")
        kept = {b: v for b, v in outs.items() if keep(b)}
        if kept:
            values[args] = kept
    sub_chords = {c: ch for c, ch in chords.items() if _label(chords, c) == label}
    return WindingReport(OperationFamily(obj.field, sub_chords, values, obj.top_weight), tuple(violations))


def winding_violations(table) -> list[str]:
    """Constants whose output winding is not the sum of the input windings."""
    out = []
    for (d, F, w, ins, x0) in sorted(table.entries, key=repr):
        win = [table.chords[c].winding for c in (x0, *ins)]
        if None in win:
            raise ValueError("all chords need winding labels")
        if win[0] != sum(win[1:]):
            out.append(f"constant d={d} F={F} in={ins} out={x0} breaks winding: {win[0]} ≠ {sum(win[1:])}")
    return out


def sparse_from_arrows(source: GradedModule, target: GradedModule, arrows: Sequence[tuple[str, str, Any]],
                       shift: int) -> SparseMap:
    entries: dict = {}
    for s, t, c in arrows:
        entries[(t, s)] = entries.get((t, s), source.field.zero) + source.field(c)
    return SparseMap(source, target, entries, shift)

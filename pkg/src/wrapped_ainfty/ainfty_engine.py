"""Structure-constant tables, assembly of μ^d on ⊕_w CF(w)[q], and checkers.

Conventions
-----------
* Input tuples are ordered ``(c^1, ..., c^d)``; the operation written
  μ^d(c^d, ..., c^1) in the usual notation receives ``args[k-1] = c^k``.
* A basis element of the q-extended group is ``(chord_id, q)`` with q ∈ {0, 1};
  its degree is ``deg(chord) - q``.
* A table key is ``(d, F, weights, inputs, output)`` where F ⊆ {1..d} lists
  the inputs that carry a q, ``weights = (w^0, ..., w^d)`` and
  ``inputs = (x^1, ..., x^d)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .field_algebra import Field
from .signs import enumerate_cuts, koszul_prefix, relation_sign, sign_ad_hoc

Basis = tuple[Hashable, int]
Key = tuple[int, tuple[int, ...], tuple[int, ...], tuple[Hashable, ...], Hashable]


@dataclass(frozen=True)
class Chord:
    id: str
    weight: int
    degree: int
    action: Fraction | None = None
    obj_from: str | None = None
    obj_to: str | None = None
    winding: int | None = None
    location: str | None = None

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError(f"chord {self.id}: weight must be positive")
        if self.location not in (None, "inside", "outside"):
            raise ValueError(f"chord {self.id}: location must be inside or outside")


def chord_map(chords: Iterable[Chord]) -> dict[str, Chord]:
    out: dict[str, Chord] = {}
    for c in chords:
        if c.id in out:
            raise ValueError(f"duplicate chord id {c.id}")
        out[c.id] = c
    return out


@dataclass
class ConstantsTable:
    """Sparse structure constants; ``kind`` is "m" (operations) or "q" (restriction)."""

    field: Field
    chords: dict[str, Chord]
    entries: dict[Key, Any] = field(default_factory=dict)
    kind: str = "m"

    def key(self, d: int, F: Iterable[int], inputs: Sequence[str], output: str,
            weights: Sequence[int] | None = None) -> Key:
        F = tuple(sorted(F))
        inputs = tuple(inputs)
        if weights is None:
            try:
                weights = (self.chords[output].weight, *(self.chords[x].weight for x in inputs))
            except KeyError as exc:
                raise ValueError(f"unresolved chord id {exc.args[0]}") from None
        return (d, F, tuple(weights), inputs, output)

    def add(self, d: int, F: Iterable[int], inputs: Sequence[str], output: str, value: Any,
            weights: Sequence[int] | None = None) -> None:
        k = self.key(d, F, inputs, output, weights)
        v = self.entries.get(k, self.field.zero) + self.field(value)
        if v:
            self.entries[k] = v
        else:
            self.entries.pop(k, None)

    def get(self, d, F, inputs, output, default=None):
        return self.entries.get(self.key(d, F, inputs, output), default)

    def lookup(self) -> dict[tuple[int, tuple[int, ...], tuple[str, ...]], list[tuple[str, Any]]]:
        """Index (d, F, inputs) → [(output, value)] in deterministic order."""
        idx: dict = defaultdict(list)
        for (d, F, _w, ins, out), v in sorted(self.entries.items(), key=lambda kv: _key_sort(kv[0])):
            idx[(d, F, ins)].append((out, v))
        return dict(idx)

    def copy(self) -> "ConstantsTable":
        return ConstantsTable(self.field, dict(self.chords), dict(self.entries), self.kind)


def _key_sort(k: Key) -> tuple:
    d, F, w, ins, out = k
    return (d, F, w, tuple(map(str, ins)), str(out))


def format_key(k: Key) -> str:
    d, F, w, ins, out = k
    Fs = ",".join(map(str, F)) or "-"
    return f"d={d} F={{{Fs}}} w={','.join(map(str, w))} in={','.join(map(str, ins))} out={out}"


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    key: Key
    message: str

    def __str__(self):
        return f"violation {format_key(self.key)}: {self.message}"


def validate(table: ConstantsTable, chords: Mapping[str, Chord] | None = None) -> list[Violation]:
    chords = table.chords if chords is None else chords
    out = []
    offset = 2 if table.kind == "m" else 1
    for k in sorted(table.entries, key=_key_sort):
        d, F, w, ins, x0 = k
        for cid in (*ins, x0):
            if cid not in chords:
                raise ValueError(f"unresolved chord id {cid}")
        bad = lambda msg: out.append(Violation(k, msg))
        if len(ins) != d:
            bad(f"{len(ins)} inputs for d={d}")
            continue
        if len(set(F)) != len(F):
            bad("non-injective flavour: nontrivial symmetry group, constant must vanish")
        if any(not 1 <= f <= d for f in F):
            bad(f"F={F} not inside 1..{d}")
        if len(w) != d + 1 or w[0] != sum(w[1:]) + len(F):
            bad(f"weight law violated: w={w}, |F|={len(F)}")
        elif any(chords[c].weight != wk for c, wk in zip((x0, *ins), w)):
            bad("weights do not match chord weights")
        expect = sum(chords[c].degree for c in ins) + offset - d - len(F)
        if chords[x0].degree != expect:
            bad(f"rigidity: deg({x0})={chords[x0].degree}, expected {expect}")
        objs = [(chords[c].obj_from, chords[c].obj_to) for c in ins]
        o0 = (chords[x0].obj_from, chords[x0].obj_to)
        if any(a is not None or b is not None for a, b in objs + [o0]):
            path_ok = all(objs[j][1] == objs[j + 1][0] for j in range(d - 1))
            if not path_ok or o0 != (objs[0][0], objs[-1][1]):
                bad("object labels do not compose head to tail")
        winds = [chords[c].winding for c in (x0, *ins)]
        if all(x is not None for x in winds) and winds[0] != sum(winds[1:]):
            bad("winding number not conserved")
        if table.kind == "q":
            if chords[x0].location != "inside":
                bad("output of a restriction constant must be an inside chord")
            if d == 1 and len(F) > 1:
                bad("|F| > 1 is forbidden at d = 1")
    return out


# ---------------------------------------------------------------------------
# assembly of μ^d (shared with the symbolic reducer)

StarFn = Callable[[int, frozenset, Sequence[int]], int]


def mu_components(d: int, Q: frozenset, degs: Sequence[int], star: StarFn) -> list[tuple[frozenset, int, int]]:
    """Contributions to an operation on inputs whose q-pattern is Q.

    Returns (F, output q-bit, sign bit) triples: the first summand uses the
    constants with F = Q; the q-component of the output is the ∂_q-equivariant
    extension, built from the constants with F = Q minus one element k, with
    the Koszul sign of moving ∂_q past c^{k+1}..c^d in reduced degrees.
    """
    out = [(Q, 0, star(d, Q, degs))]
    for k in sorted(Q):
        Fk = Q - {k}
        passed = sum(degs[j - 1] - (j in Q) - 1 for j in range(k + 1, d + 1))
        out.append((Fk, 1, (star(d, Fk, degs) + passed) % 2))
    return out


def default_star(d: int, F: frozenset, degs: Sequence[int]) -> int:
    return sign_ad_hoc(d, F, degs)


def evaluate(args: Sequence[Basis], provider: Callable, deg: Callable[[Hashable], int],
             one: Any, star: StarFn = default_star, identity_term: bool = True) -> dict:
    """Evaluate the assembled operation on basis inputs ``(c^1..c^d)``.

    ``provider(d, F, chords)`` yields ``(output chord, coefficient)``.
    """
    d = len(args)
    chords = tuple(c for c, _ in args)
    Q = frozenset(k + 1 for k, (_, q) in enumerate(args) if q)
    degs = [deg(c) for c in chords]
    out: dict = {}
    for F, qout, bit in mu_components(d, Q, degs, star):
        for o, val in provider(d, tuple(sorted(F)), chords):
            _acc(out, (o, qout), -val if bit else val)
    if identity_term and d == 1 and Q:
        _acc(out, (chords[0], 0), one if (degs[0] + 1) % 2 == 0 else -one)
    return {k: v for k, v in out.items() if v}


def _acc(target: dict, key, val) -> None:
    cur = target.get(key)
    target[key] = val if cur is None else cur + val


def basis_degree(b: Basis, deg: Callable) -> int:
    return deg(b[0]) - b[1]


def ainfty_expression(args: Sequence[Basis], mu: Callable[[tuple], dict], deg: Callable) -> dict:
    """Σ (-1)^{Σ_{k<i}(deg c^k - 1)} μ(c^1..c^{i-1}, μ(c^i..), ..., c^d)."""
    d = len(args)
    bdeg = [basis_degree(b, deg) for b in args]
    out: dict = {}
    for d_minus in range(1, d + 1):
        for i in range(1, d - d_minus + 2):
            inner = mu(tuple(args[i - 1: i - 1 + d_minus]))
            if not inner:
                continue
            bit = koszul_prefix(bdeg, i)
            for y, a in inner.items():
                outer_args = (*args[: i - 1], y, *args[i - 1 + d_minus:])
                for z, b in mu(outer_args).items():
                    term = b * a
                    _acc(out, z, -term if bit else term)
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# numeric families

@dataclass
class OperationFamily:
    """A family of multilinear maps stored by their values on basis tuples."""

    field: Field
    chords: dict[str, Chord]
    values: dict[tuple[Basis, ...], dict[Basis, Any]]
    top_weight: int | None = None

    def __call__(self, args: tuple) -> dict:
        return self.values.get(tuple(args), {})

    def deg(self, cid: str) -> int:
        return self.chords[cid].degree

    def basis(self) -> list[Basis]:
        out = []
        for cid in sorted(self.chords):
            out.append((cid, 0))
            if self.top_weight is None or self.chords[cid].weight < self.top_weight:
                out.append((cid, 1))
        return out

    def in_basis(self, b: Basis) -> bool:
        cid, q = b
        if cid not in self.chords:
            return False
        return not (q and self.top_weight is not None and self.chords[cid].weight >= self.top_weight)

    def by_slot(self) -> dict[tuple[Basis, int], list[tuple]]:
        idx: dict = defaultdict(list)
        for t in self.values:
            for n, b in enumerate(t):
                idx[(b, n)].append(t)
        return idx

    def arities(self) -> set[int]:
        return {len(t) for t in self.values}


def _assemble(provider_index: Mapping, chords: Mapping[str, Chord], field_: Field,
              star: StarFn, identity_term: bool, top_weight: int | None,
              extra_d1: Iterable[str] = (), keep_output: Callable | None = None) -> OperationFamily:
    deg = lambda c: chords[c].degree
    candidates: set[tuple] = set()
    for (d, F, ins) in provider_index:
        Fs = set(F)
        patterns = [Fs] + [Fs | {k} for k in range(1, d + 1) if k not in Fs]
        for Q in patterns:
            candidates.add(tuple((x, int(n + 1 in Q)) for n, x in enumerate(ins)))
    if identity_term:
        for cid in chords:
            candidates.add(((cid, 1),))
    for cid in extra_d1:
        candidates.add(((cid, 0),))
        candidates.add(((cid, 1),))

    def provider(d, F, ins):
        return provider_index.get((d, F, ins), ())

    fam = OperationFamily(field_, dict(chords), {}, top_weight)
    for t in sorted(candidates, key=lambda t: (len(t), [(str(c), q) for c, q in t])):
        if not all(fam.in_basis(b) for b in t):
            continue
        val = evaluate(t, provider, deg, field_.one, star, identity_term)
        keep = fam.in_basis if keep_output is None else keep_output
        val = {b: v for b, v in val.items() if keep(b)}
        if val:
            fam.values[t] = val
    return fam


def assemble_mu(table: ConstantsTable, chords: Mapping[str, Chord] | None = None,
                top_weight: int | None = None) -> OperationFamily:
    """μ^d on ⊕_w CF(w)[q]; ``top_weight`` drops the q-part at that weight."""
    chords = table.chords if chords is None else dict(chords)
    problems = validate(table, chords)
    if problems:
        raise ValueError("invalid table: " + "; ".join(map(str, problems)))
    return _assemble(table.lookup(), chords, table.field, default_star, True, top_weight)


@dataclass(frozen=True)
class Residual:
    arity: int
    inputs: tuple[Basis, ...]
    output: Basis
    value: Any

    def describe(self, field_: Field) -> str:
        ins = ",".join(f"{'q' if q else ''}{c}" for c, q in self.inputs)
        c, q = self.output
        return f"residual d={self.arity} in=({ins}) out={'q' if q else ''}{c} value={field_.format(self.value)}"


def _candidate_tuples(outer: OperationFamily, inner: OperationFamily, max_d: int) -> set[tuple]:
    slots = outer.by_slot()
    cands: set[tuple] = set()
    for t, outs in inner.values.items():
        for y in outs:
            for n in range(max_d):
                for s in slots.get((y, n), ()):
                    u = s[:n] + t + s[n + 1:]
                    if len(u) <= max_d:
                        cands.add(u)
    return cands


def check_ainfty(mu: OperationFamily, max_d: int = 4, inputs: Iterable[tuple] | None = None,
                 max_generators: int | None = 64) -> list[Residual]:
    """All nonzero residuals of the A∞ equations up to arity ``max_d``.

    Without explicit ``inputs`` the candidate tuples are those on which some
    composite μ(…μ(…)…) can be nonzero, which covers every basis tuple.
    """
    if max_generators is not None and len(mu.basis()) > max_generators:
        raise ValueError(f"{len(mu.basis())} generators exceed the configured cap {max_generators}")
    deg = mu.deg
    cands = _candidate_tuples(mu, mu, max_d) if inputs is None else set(map(tuple, inputs))
    out = []
    for u in sorted(cands, key=lambda t: (len(t), [(str(c), q) for c, q in t])):
        res = ainfty_expression(u, mu, deg)
        for z in sorted(res, key=lambda b: (str(b[0]), b[1])):
            out.append(Residual(len(u), u, z, res[z]))
    return out


def homomorphism_expression(args: Sequence[Basis], mu_src: Callable, mu_tgt: Callable,
                            Fmap: Callable, deg_src: Callable) -> dict:
    """LHS - RHS of the A∞-homomorphism equation on one input tuple."""
    d = len(args)
    out: dict = {}
    # left: μ_tgt(F(c^1..), ..., F(..c^d)) over all splittings into blocks
    for r in range(d):
        for cuts in combinations(range(1, d), r):
            pts = (0, *cuts, d)
            pieces = [Fmap(tuple(args[pts[j]: pts[j + 1]])) for j in range(len(pts) - 1)]
            if any(not p for p in pieces):
                continue
            for ys, coeff in _expand_product(pieces):
                for z, b in mu_tgt(ys).items():
                    _acc(out, z, b * coeff)
    # right: F(..., μ_src(...), ...)
    for z, v in ainfty_expression_mixed(args, mu_src, Fmap, deg_src).items():
        _acc(out, z, -v)
    return {k: v for k, v in out.items() if v}


def ainfty_expression_mixed(args, inner_fn, outer_fn, deg) -> dict:
    d = len(args)
    bdeg = [basis_degree(b, deg) for b in args]
    out: dict = {}
    for d_minus in range(1, d + 1):
        for i in range(1, d - d_minus + 2):
            inner = inner_fn(tuple(args[i - 1: i - 1 + d_minus]))
            bit = koszul_prefix(bdeg, i)
            for y, a in inner.items():
                for z, b in outer_fn((*args[: i - 1], y, *args[i - 1 + d_minus:])).items():
                    term = b * a
                    _acc(out, z, -term if bit else term)
    return out


def _expand_product(pieces: list[dict]):
    acc = [((), None)]
    for p in pieces:
        nxt = []
        for ys, c in acc:
            for y, v in p.items():
                nxt.append(((*ys, y), v if c is None else c * v))
        acc = nxt
    return acc


def check_homomorphism(mu_src: OperationFamily, mu_tgt: OperationFamily, Fmap: OperationFamily,
                       max_d: int = 3) -> list[Residual]:
    """Nonzero residuals of the A∞-homomorphism equations up to arity ``max_d``."""
    cands = _candidate_tuples(Fmap, mu_src, max_d)
    # tuples reached through the left-hand side
    for t in Fmap.values:
        if len(t) <= max_d:
            cands.add(t)
    preimages: dict = defaultdict(list)
    for t, outs in Fmap.values.items():
        for y in outs:
            preimages[y].append(t)
    for ys in mu_tgt.values:
        stacks = [[()]]
        for y in ys:
            stacks = [[s + t for s in stacks[0] for t in preimages.get(y, ()) if len(s + t) <= max_d]]
        cands.update(u for u in stacks[0] if u)
    out = []
    for u in sorted(cands, key=lambda t: (len(t), [(str(c), q) for c, q in t])):
        if len(u) > max_d or not all(mu_src.in_basis(b) for b in u):
            continue
        res = homomorphism_expression(u, mu_src, mu_tgt, Fmap, mu_src.deg)
        for z in sorted(res, key=lambda b: (str(b[0]), b[1])):
            out.append(Residual(len(u), u, z, res[z]))
    return out


# ---------------------------------------------------------------------------
# boundary relations

@dataclass(frozen=True)
class RelationTerm:
    sign: int
    cut_label: str
    x_new: str
    outer: Key
    inner: Key
    value: Any


def relation_terms(table: ConstantsTable, d: int, F: Iterable[int], x: Sequence[str],
                   drop: str | None = None) -> list[RelationTerm]:
    """Nonzero terms of the boundary relation at (d, F, x = (x^0, x^1..x^d))."""
    F = frozenset(F)
    chords = table.chords
    if len(x) != d + 1:
        raise ValueError(f"need x^0..x^{d}")
    degs = [chords[c].degree for c in x[1:]]
    if chords[x[0]].degree != sum(degs) + 3 - d - len(F):
        raise ValueError("not a one-dimensional configuration: deg(x^0) ≠ Σ deg + 3 - d - |F|")
    idx = table.lookup()
    terms = []
    for cut in enumerate_cuts(d, F):
        lo, hi = cut.i, cut.i + cut.d_minus - 1
        inner_in = tuple(x[lo: hi + 1])
        bit = relation_sign(cut, degs, drop)
        for xn, vm in idx.get((cut.d_minus, tuple(sorted(cut.F_minus)), inner_in), ()):
            outer_in = (*x[1:lo], xn, *x[hi + 1:])
            for out, vp in idx.get((cut.d_plus, tuple(sorted(cut.F_plus)), outer_in), ()):
                if out != x[0]:
                    continue
                val = vp * vm
                terms.append(RelationTerm(-1 if bit else 1, cut.label(), xn,
                                          table.key(cut.d_plus, cut.F_plus, outer_in, out),
                                          table.key(cut.d_minus, cut.F_minus, inner_in, xn),
                                          -val if bit else val))
    return terms


def check_boundary_relation(table: ConstantsTable, d: int, F: Iterable[int],
                            weights: Sequence[int] | None, x: Sequence[str]) -> Any:
    """Signed sum over admissible cuts and intermediate chords; 0 if it holds."""
    F = frozenset(F)
    if weights is not None:
        actual = tuple(table.chords[c].weight for c in x)
        if tuple(weights) != actual:
            raise ValueError(f"weights {tuple(weights)} do not match chords {actual}")
        if weights[0] != sum(weights[1:]) + len(F):
            raise ValueError("weight law violated")
    total = table.field.zero
    for t in relation_terms(table, d, F, x):
        total = total + t.value
    return total


def all_boundary_residuals(table: ConstantsTable, max_d: int) -> list[tuple[int, tuple, tuple, Any]]:
    """Every nonzero boundary-relation residual with d ≤ max_d."""
    chords = table.chords
    by_weight: dict = defaultdict(list)
    for c in sorted(chords):
        by_weight[chords[c].weight].append(c)
    out = []
    ids = sorted(chords)
    from itertools import product as iproduct

    for d in range(1, max_d + 1):
        for ins in iproduct(ids, repeat=d):
            ws = [chords[c].weight for c in ins]
            degs = [chords[c].degree for c in ins]
            for r in range(d + 1):
                for F in combinations(range(1, d + 1), r):
                    w0 = sum(ws) + r
                    for x0 in by_weight.get(w0, ()):
                        if chords[x0].degree != sum(degs) + 3 - d - r:
                            continue
                        val = check_boundary_relation(table, d, F, None, (x0, *ins))
                        if val:
                            out.append((d, F, (x0, *ins), val))
    return out

"""Combinatorics of cascade spaces and of one-dimensional cascade-map spaces."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence

from .signs import enumerate_cuts
from .trees import (FDecomposition, Flavour, Path, check_weights,
                    enumerate_stable_decompositions)


def enumerate_components(d: int, flavour: Flavour) -> list[FDecomposition]:
    """Stable (tree, decomposition) pairs; each is one component of dim d-1+|F|."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if d + len(flavour) < 2:
        return []
    return enumerate_stable_decompositions(d, flavour)


def component_dimension(d: int, flavour: Flavour) -> int:
    return d - 1 + len(flavour)


@dataclass(frozen=True)
class CascadeStratum:
    dec: FDecomposition
    E: frozenset
    Ebar: frozenset

    def __post_init__(self):
        edges = set(self.dec.tree.finite_edges)
        if not self.Ebar <= self.E <= edges:
            raise ValueError("need Ebar ⊆ E ⊆ finite edges")

    @property
    def codim(self) -> int:
        return len(self.E)

    def __str__(self):
        fmt = lambda s: "{" + ",".join("/".join(map(str, e)) for e in sorted(s)) + "}"
        return f"{self.dec.encode()} E={fmt(self.E)} Ebar={fmt(self.Ebar)}"


def _subsets(items: Sequence, max_size: int | None = None) -> Iterator[frozenset]:
    top = len(items) if max_size is None else min(max_size, len(items))
    for r in range(top + 1):
        for c in combinations(items, r):
            yield frozenset(c)


def enumerate_cascade_strata(d: int, flavour: Flavour, max_codim: int) -> list[CascadeStratum]:
    out = []
    for dec in enumerate_components(d, flavour):
        for E in _subsets(dec.tree.finite_edges, max_codim):
            for Ebar in _subsets(sorted(E)):
                out.append(CascadeStratum(dec, E, Ebar))
    return out


def collapse(stratum: CascadeStratum) -> FDecomposition:
    """Contract the edges of Ebar; sprinkle sets over each fibre are merged."""
    dec = stratum.dec
    # deepest first, and right to left among siblings, so remaining paths stay valid
    for e in sorted(stratum.Ebar, key=lambda e: (len(e), e), reverse=True):
        dec = dec.contract(e)
    return dec


def partner(stratum: CascadeStratum) -> CascadeStratum:
    if len(stratum.E) != 1:
        raise ValueError(f"partner needs |E| = 1, got {len(stratum.E)}")
    Ebar = frozenset() if stratum.Ebar else stratum.E
    return CascadeStratum(stratum.dec, stratum.E, Ebar)


@dataclass(frozen=True)
class CausalChain:
    """Order type of the vertex parameters: relations between ρ symbols."""

    relations: tuple[tuple[Path, str, Path], ...]

    def holds(self, rho: dict) -> bool:
        ops = {"<": lambda a, b: a < b, "=": lambda a, b: a == b}
        return all(ops[op](rho[a], rho[b]) for a, op, b in self.relations)


def causal_chain(stratum: CascadeStratum) -> CausalChain:
    """Strict order along edges outside E, equality on E (root side first)."""
    rel = []
    for e in stratum.dec.tree.finite_edges:
        rel.append((e[:-1], "=" if e in stratum.E else "<", e))
    return CausalChain(tuple(rel))


@dataclass(frozen=True)
class PolytopeFace:
    equal: frozenset      # edges on which ρ is constant
    pinned: frozenset     # vertices with ρ = 1 (closed under going leafward)
    codim: int


def order_polytope_faces(dec: FDecomposition) -> list[PolytopeFace]:
    """Faces of {ρ ∈ (0,1]^V : ρ weakly increasing from root to leaves}."""
    tree = dec.tree
    verts = tree.vertices
    faces = []
    for pinned in _subsets(verts):
        # pinned must contain every descendant of a pinned vertex
        if any(u in pinned and v[: len(u)] == u and v not in pinned for u in verts for v in verts):
            continue
        free_edges = [e for e in tree.finite_edges if e not in pinned]
        for equal in _subsets(free_edges):
            faces.append(PolytopeFace(equal, pinned, len(equal) + len(pinned)))
    return sorted(faces, key=lambda f: (f.codim, sorted(f.pinned), sorted(f.equal)))


def face_counts(dec: FDecomposition) -> tuple[int, ...]:
    faces = order_polytope_faces(dec)
    top = max(f.codim for f in faces)
    return tuple(sum(1 for f in faces if f.codim == k) for k in range(top + 1))


# ---------------------------------------------------------------------------
# ends and rho = 1 boundary points of one-dimensional cascade-map spaces

@dataclass(frozen=True)
class EndPattern:
    """Root component at small parameter, cascades hanging off its inputs."""

    blocks: tuple[int, ...]                    # d_{-,1..l}
    F_plus: tuple[tuple[int, int], ...]        # (f, p_{+,f})
    F_minus: tuple[tuple[tuple[int, int], ...], ...]   # per block: (f, p_{-,j,f})
    w_plus: tuple[int, ...]
    w_minus: tuple[tuple[int, ...], ...]

    @property
    def l(self) -> int:
        return len(self.blocks)

    def __str__(self):
        fp = ",".join(f"{f}->{k}" for f, k in self.F_plus) or "-"
        fm = " ".join("[" + (",".join(f"{f}->{k}" for f, k in part) or "-") + "]" for part in self.F_minus)
        return f"end blocks={self.blocks} F+={{{fp}}} F-={fm} w+={self.w_plus} w-={self.w_minus}"


@dataclass(frozen=True)
class BoundaryPattern:
    """Leafward component reaching parameter 1: cascade map × popsicle."""

    d_plus: int
    i: int
    d_minus: int
    F_plus: tuple[tuple[int, int], ...]
    F_minus: tuple[tuple[int, int], ...]
    w_plus: tuple[int, ...]
    w_minus: tuple[int, ...]

    def __str__(self):
        fp = ",".join(f"{f}->{k}" for f, k in self.F_plus) or "-"
        fm = ",".join(f"{f}->{k}" for f, k in self.F_minus) or "-"
        return (f"boundary d+={self.d_plus} i={self.i} d-={self.d_minus} "
                f"F+={{{fp}}} F-={{{fm}}} w+={self.w_plus} w-={self.w_minus}")


def _compositions(d: int) -> Iterator[tuple[int, ...]]:
    for r in range(d):
        for cuts in combinations(range(1, d), r):
            pts = (0, *cuts, d)
            yield tuple(pts[k + 1] - pts[k] for k in range(len(pts) - 1))


def _injective(pairs: Sequence[tuple[int, int]]) -> bool:
    vals = [k for _, k in pairs]
    return len(set(vals)) == len(vals)


def enumerate_ends(d: int, flavour: Flavour, w: Sequence[int]) -> list[EndPattern]:
    flavour.check(d)
    check_weights(d, len(flavour), w)
    pm = flavour.as_map()
    labels = sorted(pm)
    out = []
    for blocks in _compositions(d):
        starts = [sum(blocks[:j]) for j in range(len(blocks))]
        block_of = {f: next(j for j in range(len(blocks))
                            if starts[j] < pm[f] <= starts[j] + blocks[j]) for f in labels}
        for choice in product((True, False), repeat=len(labels)):
            F_plus = tuple((f, block_of[f] + 1) for f, up in zip(labels, choice) if up)
            F_minus = tuple(tuple((f, pm[f] - starts[j]) for f, up in zip(labels, choice)
                                  if not up and block_of[f] == j) for j in range(len(blocks)))
            w_minus = tuple((sum(w[starts[j] + 1: starts[j] + blocks[j] + 1]) + len(F_minus[j]),
                             *w[starts[j] + 1: starts[j] + blocks[j] + 1]) for j in range(len(blocks)))
            w_plus = (w[0], *(wm[0] for wm in w_minus))
            out.append(EndPattern(blocks, F_plus, F_minus, w_plus, w_minus))
    return out


def enumerate_one_boundaries(d: int, flavour: Flavour, w: Sequence[int]) -> list[BoundaryPattern]:
    flavour.check(d)
    check_weights(d, len(flavour), w)
    pm = flavour.as_map()
    labels = sorted(pm)
    out = []
    for d_minus in range(1, d + 1):
        d_plus = d + 1 - d_minus
        for i in range(1, d_plus + 1):
            lo, hi = i, i + d_minus - 1
            inside = [f for f in labels if lo <= pm[f] <= hi]
            fixed = [(f, pm[f] if pm[f] < lo else pm[f] - d_minus + 1) for f in labels if f not in inside]
            for choice in product((True, False), repeat=len(inside)):
                F_plus = tuple(sorted(fixed + [(f, i) for f, up in zip(inside, choice) if up]))
                F_minus = tuple((f, pm[f] - i + 1) for f, up in zip(inside, choice) if not up)
                w_minus = (sum(w[lo: hi + 1]) + len(F_minus), *w[lo: hi + 1])
                w_plus = (w[0], *w[1:lo], w_minus[0], *w[hi + 1:])
                out.append(BoundaryPattern(d_plus, i, d_minus, F_plus, F_minus, w_plus, w_minus))
    return out


def classify_ends(d: int, flavour: Flavour, w: Sequence[int],
                  injective_only: bool = True) -> tuple[list[EndPattern], list[BoundaryPattern]]:
    """Ends and ρ = 1 boundary patterns of a one-dimensional cascade-map space.

    With ``injective_only`` the patterns whose factors carry a non-injective
    flavour are dropped, since their counts vanish.
    """
    ends = enumerate_ends(d, flavour, w)
    bnds = enumerate_one_boundaries(d, flavour, w)
    if injective_only:
        ends = [e for e in ends if _injective(e.F_plus) and all(_injective(p) for p in e.F_minus)]
        bnds = [b for b in bnds if _injective(b.F_plus) and _injective(b.F_minus)]
    return ends, bnds


def boundary_cut_count(d: int, F: Sequence[int]) -> int:
    """Number of ρ = 1 patterns for an injective flavour, via admissible cuts."""
    return len(enumerate_cuts(d, F))

"""Planar rooted trees with numbered leaves, sprinkle decompositions,
induced flavours and weights.

A tree is stored as a nested tuple: every vertex is the tuple of its
non-root flags in ribbon order, each flag being either a leaf number or a
child vertex.  Vertices are addressed by their path from the root (a tuple
of 0-based child positions), so two trees are equal iff their encodings
are equal.  A decomposition annotates every vertex with its sprinkle set:
an annotated vertex is ``(frozenset, children)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

Path = tuple[int, ...]


@dataclass(frozen=True)
class Flavour:
    """Sprinkle labels together with their leaf assignments p."""

    p: tuple[int, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(self.p))
        labels = tuple(range(1, len(self.p) + 1)) if self.labels is None else tuple(self.labels)
        if len(labels) != len(self.p) or len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct and match p")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_subset(cls, F: Iterable[int]) -> "Flavour":
        """Injective flavour whose sprinkle labels are their own leaves."""
        F = tuple(sorted(set(F)))
        return cls(F, F)

    @property
    def F(self) -> frozenset:
        return frozenset(self.labels)

    def __len__(self):
        return len(self.p)

    def of(self, f: int) -> int:
        return self.p[self.labels.index(f)]

    def as_map(self) -> dict[int, int]:
        return dict(zip(self.labels, self.p))

    @property
    def injective(self) -> bool:
        return len(set(self.p)) == len(self.p)

    def check(self, d: int) -> None:
        if any(not 1 <= v <= d for v in self.p):
            raise ValueError(f"flavour values {self.p} must lie in 1..{d}")


def encode(node) -> str:
    """Compact text form: leaves as numbers, vertices as parentheses."""
    if isinstance(node, int):
        return str(node)
    return "(" + ",".join(encode(c) for c in node) + ")"


@dataclass(frozen=True)
class RibbonTree:
    shape: tuple

    @cached_property
    def d(self) -> int:
        return len(self.leaves_below(()))

    @cached_property
    def vertices(self) -> tuple[Path, ...]:
        out = []

        def walk(node, path):
            out.append(path)
            for n, c in enumerate(node):
                if not isinstance(c, int):
                    walk(c, path + (n,))

        walk(self.shape, ())
        return tuple(out)

    def node(self, v: Path):
        node = self.shape
        for n in v:
            node = node[n]
        return node

    def valence(self, v: Path) -> int:
        return 1 + len(self.node(v))

    def leaves_below(self, v: Path) -> tuple[int, ...]:
        out = []

        def walk(node):
            for c in node:
                if isinstance(c, int):
                    out.append(c)
                else:
                    walk(c)

        walk(self.node(v))
        return tuple(out)

    @property
    def finite_edges(self) -> tuple[Path, ...]:
        """Finite edges, each named by the path of its far (leafward) end."""
        return tuple(v for v in self.vertices if v)

    def path_to_leaf(self, j: int) -> list[Path]:
        out = []
        v: Path = ()
        while True:
            out.append(v)
            node = self.node(v)
            for n, c in enumerate(node):
                if c == j:
                    return out
                if not isinstance(c, int) and j in RibbonTree(c).leaves_below(()):
                    v = v + (n,)
                    break
            else:
                raise ValueError(f"leaf {j} not in tree")

    def flag_towards(self, v: Path, j: int) -> int:
        """1-based flag index at v through which the path to leaf j leaves."""
        for n, c in enumerate(self.node(v)):
            if c == j or (not isinstance(c, int) and j in RibbonTree(c).leaves_below(())):
                return n + 1
        raise ValueError(f"leaf {j} is not below vertex {v}")

    def validate(self) -> None:
        leaves = self.leaves_below(())
        if leaves != tuple(range(1, len(leaves) + 1)):
            raise ValueError(f"leaves {leaves} are not numbered 1..d in planar order")

    def __str__(self):
        return encode(self.shape)


# ---------------------------------------------------------------------------
# decompositions

def _strip(anode):
    F, children = anode
    return tuple(c if isinstance(c, int) else _strip(c) for c in children)


@dataclass(frozen=True)
class FDecomposition:
    """A tree with a sprinkle subset at every vertex (annotated nested tuple)."""

    root: tuple

    @cached_property
    def tree(self) -> RibbonTree:
        return RibbonTree(_strip(self.root))

    @property
    def d(self) -> int:
        return self.tree.d

    @cached_property
    def parts(self) -> dict[Path, frozenset]:
        out = {}

        def walk(anode, path):
            out[path] = anode[0]
            for n, c in enumerate(anode[1]):
                if not isinstance(c, int):
                    walk(c, path + (n,))

        walk(self.root, ())
        return out

    @property
    def codim(self) -> int:
        return len(self.tree.vertices) - 1

    @property
    def F(self) -> frozenset:
        return frozenset().union(*self.parts.values())

    def encode(self) -> str:
        def enc(anode):
            F, children = anode
            tag = "{" + ",".join(map(str, sorted(F))) + "}" if F else ""
            return tag + "(" + ",".join(str(c) if isinstance(c, int) else enc(c) for c in children) + ")"

        return enc(self.root)

    def sort_key(self) -> tuple:
        return (self.codim, self.encode())

    def relabel(self, perm: Mapping[int, int]) -> "FDecomposition":
        def walk(anode):
            F, children = anode
            return (frozenset(perm.get(f, f) for f in F),
                    tuple(c if isinstance(c, int) else walk(c) for c in children))

        return FDecomposition(walk(self.root))

    def contract(self, edge: Path) -> "FDecomposition":
        """Contract the finite edge ending at ``edge``; sprinkle sets merge."""
        if not edge:
            raise ValueError("the root is not the far end of a finite edge")

        def walk(anode, path):
            F, children = anode
            if path == edge[:-1]:
                n = edge[-1]
                child = children[n]
                return (F | child[0], children[:n] + child[1] + children[n + 1:])
            return (F, tuple(c if isinstance(c, int) or not _is_prefix(path + (k,), edge)
                             else walk(c, path + (k,)) for k, c in enumerate(children)))

        return FDecomposition(walk(self.root, ()))

    def __str__(self):
        return self.encode()


def _is_prefix(a: Path, b: Path) -> bool:
    return b[: len(a)] == a


def one_vertex(d: int, F: Iterable[int]) -> FDecomposition:
    return FDecomposition((frozenset(F), tuple(range(1, d + 1))))


def check_compatible(dec: FDecomposition, flavour: Flavour) -> None:
    """Raise on the first (v, f) with v off the path root → leaf p_f."""
    pm = flavour.as_map()
    seen = set()
    for v, F in dec.parts.items():
        for f in sorted(F):
            if f not in pm:
                raise ValueError(f"sprinkle {f} at vertex {v} is not a label of the flavour")
            if f in seen:
                raise ValueError(f"sprinkle {f} appears twice")
            seen.add(f)
            if pm[f] not in dec.tree.leaves_below(v):
                raise ValueError(f"compatibility violated at vertex {v} for sprinkle {f}")
    if seen != flavour.F:
        raise ValueError(f"sprinkles {sorted(flavour.F - seen)} are not placed")


def is_stable(dec: FDecomposition) -> bool:
    return all(dec.tree.valence(v) >= 3 or dec.parts[v] for v in dec.tree.vertices)


def _compositions(a: int, b: int) -> Iterator[list[tuple[int, int]]]:
    """Split the interval a..b into consecutive nonempty blocks."""
    inner = list(range(a + 1, b + 1))
    for r in range(len(inner) + 1):
        for cuts in combinations(inner, r):
            starts = [a, *cuts]
            ends = [c - 1 for c in cuts] + [b]
            yield list(zip(starts, ends))


def _subsets(items: Sequence) -> Iterator[frozenset]:
    for r in range(len(items) + 1):
        for c in combinations(items, r):
            yield frozenset(c)


def _generate(a: int, b: int, S: frozenset, pm: Mapping[int, int]) -> list[tuple]:
    """Annotated stable subtrees with leaves a..b carrying exactly the sprinkles S."""
    out = []
    for Fv in _subsets(sorted(S)):
        rest = S - Fv
        for blocks in _compositions(a, b):
            if len(blocks) == 1 and not Fv:
                continue
            options = []
            ok = True
            for lo, hi in blocks:
                Sb = frozenset(f for f in rest if lo <= pm[f] <= hi)
                opts: list = []
                if lo == hi and not Sb:
                    opts.append(lo)
                opts.extend(_generate(lo, hi, Sb, pm))
                if not opts:
                    ok = False
                    break
                options.append(opts)
            if not ok:
                continue
            for choice in _product(options):
                out.append((Fv, tuple(choice)))
    return out


def _product(options: list[list]) -> Iterator[tuple]:
    from itertools import product

    return product(*options)


def enumerate_stable_decompositions(d: int, flavour: Flavour) -> list[FDecomposition]:
    """Every stable (tree, sprinkle decomposition) pair, sorted by codim."""
    if d < 1:
        raise ValueError("d must be at least 1")
    flavour.check(d)
    if d + len(flavour) < 2:
        raise ValueError(f"unstable: d + |F| = {d + len(flavour)} < 2")
    decs = [FDecomposition(r) for r in _generate(1, d, flavour.F, flavour.as_map())]
    return sorted(decs, key=FDecomposition.sort_key)


def induce_flavours(dec: FDecomposition, flavour: Flavour) -> dict[Path, Flavour]:
    check_compatible(dec, flavour)
    pm = flavour.as_map()
    out = {}
    for v in dec.tree.vertices:
        labels = tuple(sorted(dec.parts[v]))
        out[v] = Flavour(tuple(dec.tree.flag_towards(v, pm[f]) for f in labels), labels)
    return out


def check_weights(d: int, nF: int, w: Sequence[int]) -> None:
    if len(w) != d + 1:
        raise ValueError(f"need {d + 1} weights, got {len(w)}")
    if any(x < 1 for x in w):
        raise ValueError(f"weights must be positive: {tuple(w)}")
    if w[0] != sum(w[1:]) + nF:
        raise ValueError(f"weight law violated: {w[0]} ≠ {sum(w[1:])} + {nF}")


def propagate_weights(dec: FDecomposition, flavour: Flavour, w: Sequence[int]) -> dict[Path, tuple[int, ...]]:
    """Per-vertex weights (w_v^0, ..., w_v^{|v|-1}) by a leaf-to-root sweep."""
    check_weights(dec.d, len(flavour), w)
    out: dict[Path, tuple[int, ...]] = {}
    tree = dec.tree
    for v in sorted(tree.vertices, key=len, reverse=True):
        ins = []
        for n, c in enumerate(tree.node(v)):
            ins.append(w[c] if isinstance(c, int) else out[v + (n,)][0])
        out[v] = (sum(ins) + len(dec.parts[v]), *ins)
    if out[()][0] != w[0]:
        raise RuntimeError("internal error: weight sweep disagrees with w^0")
    return out

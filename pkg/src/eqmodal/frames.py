"""Finite reflexive-transitive Kripke frames: generators for the frame
families behind each modal theory, a model checker, a validity /
countermodel search, and the axiom and theory registry."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Callable, Optional

from . import formula as fm
from . import partition as pt
from .formula import Formula
from .sat import SearchBudgetExceeded, solve

__all__ = [
    "FiniteFrame",
    "FrameCheck",
    "SearchBudgetExceeded",
    "TheoryId",
    "TheoryInfo",
    "axiom",
    "are_isomorphic",
    "frame_valid",
    "is_lollipop",
    "mk_frame",
    "model_check",
    "naive_frame_valid",
    "theory_info",
]


@dataclass(frozen=True)
class FiniteFrame:
    """A reflexive-transitive frame on nodes 0..node_count-1."""

    node_count: int
    edges: frozenset
    labels: Optional[tuple] = None

    def __post_init__(self):
        for i in range(self.node_count):
            if (i, i) not in self.edges:
                raise ValueError(f"relation not reflexive at node {i}")
        for (a, b) in self.edges:
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise ValueError(f"edge {(a, b)} out of range")
        for (a, b) in self.edges:
            for (c, d) in self.edges:
                if b == c and (a, d) not in self.edges:
                    raise ValueError(f"relation not transitive: {(a, b)} and {(c, d)}")
        if self.labels is not None and len(self.labels) != self.node_count:
            raise ValueError("one label per node required")

    @property
    def succ(self) -> tuple:
        cached = self.__dict__.get("_succ")
        if cached is None:
            cached = tuple(
                tuple(sorted(b for (a, b) in self.edges if a == i)) for i in range(self.node_count)
            )
            self.__dict__["_succ"] = cached
        return cached

    def sees(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    def to_json_dict(self) -> dict:
        return {
            "nodes": [
                {"id": i, "label": self.labels[i] if self.labels else str(i)}
                for i in range(self.node_count)
            ],
            "edges": sorted([a, b] for (a, b) in self.edges),
        }


def _frame(n: int, pairs, labels=None) -> FiniteFrame:
    edges = set(pairs)
    edges.update((i, i) for i in range(n))
    # transitive closure
    changed = True
    while changed:
        changed = False
        for (a, b) in list(edges):
            for (c, d) in list(edges):
                if b == c and (a, d) not in edges:
                    edges.add((a, d))
                    changed = True
    return FiniteFrame(n, frozenset(edges), tuple(labels) if labels else None)


MAX_LATTICE = 5
MAX_CLUSTER = 4
MAX_POSET = 5


def chain(n: int) -> FiniteFrame:
    """Linear order of length n; node 0 is the root."""
    return _frame(n, ((i, j) for i in range(n) for j in range(i, n)))


def cluster(k: int) -> FiniteFrame:
    """A single cluster of k mutually accessible nodes."""
    return _frame(k, ((i, j) for i in range(k) for j in range(k)))


def lollipop(k: int) -> FiniteFrame:
    """One initial node strictly below a k-cluster; the root is node 0."""
    if k < 1:
        raise ValueError("lollipop cluster must be nonempty")
    pairs = [(0, i) for i in range(k + 1)]
    pairs += [(i, j) for i in range(1, k + 1) for j in range(1, k + 1)]
    return _frame(k + 1, pairs)


def partition_lattice(n: int) -> FiniteFrame:
    """Partitions of an n-set under refinement; finer partitions first."""
    if n > MAX_LATTICE:
        raise ValueError(f"lattice ground set {n} exceeds bound {MAX_LATTICE}")
    parts = pt.enumerate_partitions(n)
    pairs = [
        (i, j)
        for i, p in enumerate(parts)
        for j, q in enumerate(parts)
        if pt.refines(p, q)
    ]
    return _frame(len(parts), pairs, labels=[str(p) for p in parts])


def prepartition_prelattice(n: int, k: int) -> FiniteFrame:
    """The partition lattice of n with each node replaced by a k-cluster."""
    if n > MAX_LATTICE:
        raise ValueError(f"prelattice ground set {n} exceeds bound {MAX_LATTICE}")
    if not 1 <= k <= MAX_CLUSTER:
        raise ValueError(f"cluster size {k} outside 1..{MAX_CLUSTER}")
    parts = pt.enumerate_partitions(n)
    pairs = []
    labels = []
    for i, p in enumerate(parts):
        labels.extend(f"{p}#{c}" for c in range(k))
        for j, q in enumerate(parts):
            if pt.refines(p, q):
                pairs.extend(
                    (i * k + a, j * k + b) for a in range(k) for b in range(k)
                )
    return _frame(len(parts) * k, pairs, labels=labels)


def pretree(parents: tuple, cluster_sizes: tuple) -> FiniteFrame:
    """A pretree: each tree node (parents[i] < i, root has parent -1)
    becomes a cluster of the given size."""
    if len(parents) != len(cluster_sizes):
        raise ValueError("one cluster size per tree node")
    if sum(cluster_sizes) > 12:
        raise ValueError("pretree too large")
    offs = []
    total = 0
    for c in cluster_sizes:
        if c < 1:
            raise ValueError("cluster sizes must be positive")
        offs.append(total)
        total += c
    pairs = []
    for i, par in enumerate(parents):
        members = range(offs[i], offs[i] + cluster_sizes[i])
        pairs.extend((a, b) for a in members for b in members)
        if par >= 0:
            if par >= i:
                raise ValueError("parents must precede children")
            up = range(offs[par], offs[par] + cluster_sizes[par])
            pairs.extend((a, b) for a in up for b in members)
    return _frame(total, pairs)


@lru_cache(maxsize=None)
def _posets(size: int) -> tuple:
    """All partial orders on 0..size-1 up to isomorphism, as frozensets of
    (strictly-below) pairs, built by adding maximal elements over closed
    down-sets and deduplicating by canonical form."""
    if size == 0:
        return (frozenset(),)
    out = {}
    for smaller in _posets(size - 1):
        new = size - 1
        below = {i: {a for (a, b) in smaller if b == i} for i in range(new)}
        for mask in range(1 << new):
            down = {i for i in range(new) if mask >> i & 1}
            if any(not below[i] <= down for i in down):
                continue
            rel = set(smaller) | {(i, new) for i in down}
            out[_poset_canon(size, rel)] = frozenset(rel)
    return tuple(out.values())


def _poset_canon(size: int, rel: set) -> tuple:
    best = None
    for perm in permutations(range(size)):
        key = tuple(sorted((perm[a], perm[b]) for (a, b) in rel))
        if best is None or key < best:
            best = key
    return best


def _poset_frame(size: int, rel: frozenset, clusters: tuple | None = None) -> FiniteFrame:
    if clusters is None:
        return _frame(size, rel)
    offs = []
    total = 0
    for c in clusters:
        offs.append(total)
        total += c
    pairs = []
    for i in range(size):
        members = range(offs[i], offs[i] + clusters[i])
        pairs.extend((a, b) for a in members for b in members)
    for (a, b) in rel:
        pairs.extend(
            (x, y)
            for x in range(offs[a], offs[a] + clusters[a])
            for y in range(offs[b], offs[b] + clusters[b])
        )
    return _frame(total, pairs)


def _is_directed(size: int, rel: frozenset) -> bool:
    ge = {(a, b) for (a, b) in rel} | {(i, i) for i in range(size)}
    return all(
        any((x, z) in ge and (y, z) in ge for z in range(size))
        for x in range(size)
        for y in range(size)
    )


def all_posets(max_nodes: int) -> list[FiniteFrame]:
    if max_nodes > MAX_POSET:
        raise ValueError(f"poset node bound {max_nodes} exceeds {MAX_POSET}")
    return [
        _poset_frame(n, rel)
        for n in range(1, max_nodes + 1)
        for rel in _posets(n)
    ]


def all_directed_posets(max_nodes: int) -> list[FiniteFrame]:
    if max_nodes > MAX_POSET:
        raise ValueError(f"poset node bound {max_nodes} exceeds {MAX_POSET}")
    return [
        _poset_frame(n, rel)
        for n in range(1, max_nodes + 1)
        for rel in _posets(n)
        if _is_directed(n, rel)
    ]


def _preorders(max_nodes: int, directed: bool | None = None) -> list[FiniteFrame]:
    """Preorders as posets of clusters, total node count <= max_nodes."""
    out = []
    for skel in range(1, max_nodes + 1):
        for rel in _posets(skel):
            if directed is not None and _is_directed(skel, rel) != directed:
                continue
            for clusters in _compositions(skel, max_nodes):
                out.append(_poset_frame(skel, rel, clusters))
    return out


def all_preorders(max_nodes: int) -> list[FiniteFrame]:
    return _preorders(max_nodes)


def all_directed_preorders(max_nodes: int) -> list[FiniteFrame]:
    return _preorders(max_nodes, directed=True)


def _compositions(k: int, total: int):
    """All tuples of k positive integers with sum <= total."""
    if k == 0:
        yield ()
        return
    for first in range(1, total - k + 2):
        for rest in _compositions(k - 1, total - first):
            yield (first,) + rest


def linear_preorders(max_nodes: int, max_clusters: int | None = None) -> list[FiniteFrame]:
    """Chains of clusters (finite linear preorders)."""
    out = []
    top = max_clusters if max_clusters is not None else max_nodes
    for k in range(1, top + 1):
        rel = frozenset((i, j) for i in range(k) for j in range(i + 1, k))
        for clusters in _compositions(k, max_nodes):
            out.append(_poset_frame(k, rel, clusters))
    return out


_FAMILIES = {
    "chain": lambda n: chain(n),
    "cluster": lambda k: cluster(k),
    "lollipop": lambda k: lollipop(k),
    "partition_lattice": lambda n: partition_lattice(n),
    "prepartition_prelattice": lambda n, k: prepartition_prelattice(n, k),
    "pretree": lambda parents, clusters: pretree(tuple(parents), tuple(clusters)),
    "all_directed_posets": lambda k: all_directed_posets(k),
}


def mk_frame(family: str, *args):
    """Build a frame (or list of frames) from a named family."""
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown frame family {family!r}") from None
    return builder(*args)


# ---------------------------------------------------------------------------
# model checking and validity search


def model_check(frame: FiniteFrame, valuation: dict, node: int, f: Formula) -> bool:
    """Standard Kripke truth at a node; valuation maps prop index -> node set."""
    if not 0 <= node < frame.node_count:
        raise ValueError(f"node {node} out of range")
    memo: dict = {}

    def ev(g: Formula, w: int) -> bool:
        key = (g, w)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(g, fm.Var):
            if g.p not in valuation:
                raise ValueError(f"valuation missing p{g.p}")
            out = w in valuation[g.p]
        elif isinstance(g, fm.Not):
            out = not ev(g.body, w)
        elif isinstance(g, fm.And):
            out = ev(g.left, w) and ev(g.right, w)
        elif isinstance(g, fm.Or):
            out = ev(g.left, w) or ev(g.right, w)
        elif isinstance(g, fm.Implies):
            out = (not ev(g.left, w)) or ev(g.right, w)
        elif isinstance(g, fm.Iff):
            out = ev(g.left, w) == ev(g.right, w)
        elif isinstance(g, fm.Diamond):
            out = any(ev(g.body, u) for u in frame.succ[w])
        elif isinstance(g, fm.Box):
            out = all(ev(g.body, u) for u in frame.succ[w])
        else:
            raise TypeError(f"not a propositional modal formula: {g!r}")
        memo[key] = out
        return out

    return ev(f, node)


@dataclass(frozen=True)
class FrameCheck:
    valid: bool
    valuation: Optional[dict] = None
    node: Optional[int] = None

    def witness_json(self) -> dict | None:
        if self.valid:
            return None
        return {
            "valuation": {f"p{p}": sorted(ns) for p, ns in self.valuation.items()},
            "failing_node": self.node,
        }


def frame_valid(
    frame: FiniteFrame,
    f: Formula,
    at_nodes=None,
    max_conflicts: int = 200_000,
) -> FrameCheck:
    """Search for a valuation falsifying f at one of the given nodes (all
    nodes by default).  Valid means no such valuation exists.

    The search is a clause-learning backtracking search over the Tseitin
    encoding of Kripke truth on the fixed frame; it is deterministic, and
    raises SearchBudgetExceeded rather than silently truncating.
    """
    nodes = list(range(frame.node_count)) if at_nodes is None else sorted(at_nodes)
    subs = fm.subformulas(f)
    props = sorted(fm.prop_vars(f))
    var_of: dict = {}
    n_vars = 0
    for p in props:
        for w in range(frame.node_count):
            n_vars += 1
            var_of[("atom", p, w)] = n_vars
    for g in subs:
        if isinstance(g, fm.Var):
            continue
        for w in range(frame.node_count):
            n_vars += 1
            var_of[(g, w)] = n_vars

    def lit(g: Formula, w: int) -> int:
        if isinstance(g, fm.Var):
            return var_of[("atom", g.p, w)]
        return var_of[(g, w)]

    clauses = []
    for g in subs:
        if isinstance(g, fm.Var):
            continue
        for w in range(frame.node_count):
            b = lit(g, w)
            if isinstance(g, fm.Not):
                c = lit(g.body, w)
                clauses += [[-b, -c], [b, c]]
            elif isinstance(g, fm.And):
                l, r = lit(g.left, w), lit(g.right, w)
                clauses += [[-b, l], [-b, r], [b, -l, -r]]
            elif isinstance(g, fm.Or):
                l, r = lit(g.left, w), lit(g.right, w)
                clauses += [[-b, l, r], [b, -l], [b, -r]]
            elif isinstance(g, fm.Implies):
                l, r = lit(g.left, w), lit(g.right, w)
                clauses += [[-b, -l, r], [b, l], [b, -r]]
            elif isinstance(g, fm.Iff):
                l, r = lit(g.left, w), lit(g.right, w)
                clauses += [[-b, -l, r], [-b, l, -r], [b, l, r], [b, -l, -r]]
            elif isinstance(g, fm.Diamond):
                ks = [lit(g.body, u) for u in frame.succ[w]]
                clauses.append([-b] + ks)
                clauses += [[b, -k] for k in ks]
            elif isinstance(g, fm.Box):
                ks = [lit(g.body, u) for u in frame.succ[w]]
                clauses += [[-b, k] for k in ks]
                clauses.append([b] + [-k for k in ks])
            else:
                raise TypeError(f"not a propositional modal formula: {g!r}")
    clauses.append([-lit(f, w) for w in nodes])

    model = solve(n_vars, clauses, max_conflicts=max_conflicts)
    if model is None:
        return FrameCheck(valid=True)
    valuation = {
        p: frozenset(
            w for w in range(frame.node_count) if model[var_of[("atom", p, w)]]
        )
        for p in props
    }
    failing = next(w for w in nodes if not model_check(frame, valuation, w, f))
    return FrameCheck(valid=False, valuation=valuation, node=failing)


def naive_frame_valid(frame: FiniteFrame, f: Formula, at_nodes=None) -> FrameCheck:
    """Full enumeration over all valuations; oracle for frame_valid."""
    nodes = list(range(frame.node_count)) if at_nodes is None else sorted(at_nodes)
    props = sorted(fm.prop_vars(f))
    node_sets = list(range(1 << frame.node_count))
    for choice in product(node_sets, repeat=len(props)):
        valuation = {
            p: frozenset(w for w in range(frame.node_count) if choice[k] >> w & 1)
            for k, p in enumerate(props)
        }
        for w in nodes:
            if not model_check(frame, valuation, w, f):
                return FrameCheck(valid=False, valuation=valuation, node=w)
    return FrameCheck(valid=True)


# ---------------------------------------------------------------------------
# frame shape tests


def are_isomorphic(a: FiniteFrame, b: FiniteFrame) -> bool:
    """Exact isomorphism check by canonical labeling with backtracking."""
    if a.node_count != b.node_count:
        return False

    def profile(f: FiniteFrame):
        return sorted(
            (len(f.succ[i]), sum(1 for j in range(f.node_count) if f.sees(j, i)))
            for i in range(f.node_count)
        )

    if profile(a) != profile(b):
        return False
    n = a.node_count

    def extend(mapping: dict) -> bool:
        if len(mapping) == n:
            return True
        i = len(mapping)
        for j in range(n):
            if j in mapping.values():
                continue
            ok = True
            for i2, j2 in mapping.items():
                if a.sees(i, i2) != b.sees(j, j2) or a.sees(i2, i) != b.sees(j2, j):
                    ok = False
                    break
            if ok and a.sees(i, i) == b.sees(j, j):
                mapping[i] = j
                if extend(mapping):
                    return True
                del mapping[i]
        return False

    return extend({})


def is_lollipop(frame: FiniteFrame) -> bool:
    """One initial node, inaccessible from every other node, strictly below a
    single cluster of mutually accessible nodes."""
    n = frame.node_count
    if n < 2:
        return False
    roots = [
        i
        for i in range(n)
        if all(not frame.sees(j, i) for j in range(n) if j != i)
    ]
    if len(roots) != 1:
        return False
    r = roots[0]
    rest = [i for i in range(n) if i != r]
    if not all(frame.sees(r, i) for i in rest):
        return False
    return all(frame.sees(i, j) for i in rest for j in rest)


# ---------------------------------------------------------------------------
# axioms and the theory registry


def axiom(name: str, n: int | None = None) -> Formula:
    """A schema instance on fresh variables p0, p1, ...; J_n is built by the
    recursion from J_1 = <>[]p0 -> p0."""
    p, q = fm.Var(0), fm.Var(1)
    if name == "K":
        return fm.Implies(fm.Box(fm.Implies(p, q)), fm.Implies(fm.Box(p), fm.Box(q)))
    if name == "Dual":
        return fm.Iff(fm.Not(fm.Diamond(p)), fm.Box(fm.Not(p)))
    if name == "T":
        return fm.Implies(fm.Box(p), p)
    if name == "4":
        return fm.Implies(fm.Box(p), fm.Box(fm.Box(p)))
    if name == "5":
        return fm.Implies(fm.Diamond(fm.Box(p)), p)
    if name == "Grz":
        return fm.Implies(
            fm.Box(fm.Implies(fm.Box(fm.Implies(p, fm.Box(p))), p)), p
        )
    if name == ".2":
        return fm.Implies(fm.Diamond(fm.Box(p)), fm.Box(fm.Diamond(p)))
    if name == ".3":
        return fm.Or(
            fm.Box(fm.Implies(fm.Box(p), q)), fm.Box(fm.Implies(fm.Box(q), p))
        )
    if name == "Triv":
        return fm.Iff(fm.Box(p), p)
    if name == "J":
        if n is None or n < 1:
            raise ValueError("J requires n >= 1")
        out = fm.Implies(fm.Diamond(fm.Box(fm.Var(0))), fm.Var(0))
        for k in range(1, n):
            head = fm.Var(k)
            out = fm.Implies(fm.Diamond(fm.And(fm.Box(head), fm.Not(out))), head)
        return out
    raise ValueError(f"unknown axiom {name!r}")


@dataclass(frozen=True)
class TheoryId:
    name: str
    n: Optional[int] = None

    def __str__(self):
        return f"{self.name}({self.n})" if self.n is not None else self.name


@dataclass(frozen=True)
class TheoryInfo:
    theory: TheoryId
    axioms: Optional[tuple]
    exact_family: bool
    family: Callable[[int], list[FiniteFrame]]


def theory_info(t: TheoryId) -> TheoryInfo:
    """Registry entry: axiom set (None for the frame-defined theories),
    characteristic frame family, and whether the family is finite (exact)."""
    name, n = t.name, t.n
    ax = {
        "S4": (axiom("T"), axiom("4")),
        "S4.2": (axiom("T"), axiom("4"), axiom(".2")),
        "S4.3": (axiom("T"), axiom("4"), axiom(".3")),
        "S5": (axiom("T"), axiom("4"), axiom("5")),
        "Grz": (axiom("Grz"),),
        "Grz.2": (axiom("Grz"), axiom(".2")),
        "Grz.3": (axiom("Grz"), axiom(".3")),
        "Triv": (axiom("Triv"), axiom("4")),
    }
    if name == "S4.3J":
        return TheoryInfo(
            t,
            (axiom("T"), axiom("4"), axiom(".3"), axiom("J", n)),
            False,
            lambda b: linear_preorders(b, max_clusters=n),
        )
    if name == "Grz.3J":
        return TheoryInfo(
            t,
            (axiom("Grz"), axiom(".3"), axiom("J", n)),
            True,
            lambda b: [chain(k) for k in range(1, n + 1)],
        )
    if name == "Partition":
        return TheoryInfo(
            t, None, True, lambda b: [partition_lattice(k) for k in range(1, n + 1)]
        )
    if name == "Prepartition":
        return TheoryInfo(
            t,
            None,
            False,
            lambda b: [
                prepartition_prelattice(k, c)
                for k in range(1, n + 1)
                for c in range(1, min(b, MAX_CLUSTER) + 1)
            ],
        )
    if name == "Lollipop":
        return TheoryInfo(
            t, None, False, lambda b: [lollipop(k) for k in range(1, min(b, MAX_CLUSTER) + 1)]
        )
    if name == "S4":
        return TheoryInfo(t, ax["S4"], False, lambda b: all_preorders(min(b, 4)))
    if name == "S4.2":
        return TheoryInfo(t, ax["S4.2"], False, lambda b: all_directed_preorders(min(b, MAX_POSET)))
    if name == "S4.3":
        return TheoryInfo(t, ax["S4.3"], False, lambda b: linear_preorders(b))
    if name == "S5":
        return TheoryInfo(
            t, ax["S5"], False, lambda b: [cluster(k) for k in range(1, min(b, MAX_CLUSTER) + 1)]
        )
    if name == "Grz":
        return TheoryInfo(t, ax["Grz"], False, lambda b: all_posets(min(b, MAX_POSET)))
    if name == "Grz.2":
        return TheoryInfo(t, ax["Grz.2"], False, lambda b: all_directed_posets(min(b, MAX_POSET)))
    if name == "Grz.3":
        return TheoryInfo(t, ax["Grz.3"], False, lambda b: [chain(k) for k in range(1, b + 1)])
    if name == "Triv":
        return TheoryInfo(t, ax["Triv"], True, lambda b: [chain(1)])
    raise ValueError(f"unknown theory {t}")

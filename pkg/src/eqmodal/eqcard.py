"""Abstract-state semantics and the simultaneous modality-and-quantifier
eliminator.

Every formula of the modal equality language reduces, per category, to a
truth table over abstract states (partition of the named tuple, world size),
where size is a natural number or the single abstract infinite size omega.
Tables are finite: sizes are tracked exactly up to a threshold N and by a
stable tail value beyond it.  The internal row algebra grows N dynamically
(possibility under surjections shifts size thresholds by at most the number
of named variables), so the computed tables are exact, not truncations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from . import formula as fm
from . import partition as pt
from .formula import Formula
from .partition import SetPartition


class _Omega:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "omega"

    def __str__(self):
        return "omega"


OMEGA = _Omega()
Size = Union[int, _Omega]


def is_omega(s: Size) -> bool:
    return s is OMEGA


class Morphisms(str, Enum):
    FUNCTIONS = "functions"
    SURJECTIONS = "surjections"
    INJECTIONS = "injections"
    INCLUSIONS = "inclusions"
    BIJECTIONS = "bijections"
    IDENTITIES = "identities"


class Regime(str, Enum):
    ALL = "all"
    FIN = "fin"
    INF = "inf"


# Inclusions step exactly like injections, identities exactly like bijections.
_GROUP = {
    Morphisms.FUNCTIONS: Morphisms.FUNCTIONS,
    Morphisms.SURJECTIONS: Morphisms.SURJECTIONS,
    Morphisms.INJECTIONS: Morphisms.INJECTIONS,
    Morphisms.INCLUSIONS: Morphisms.INJECTIONS,
    Morphisms.BIJECTIONS: Morphisms.BIJECTIONS,
    Morphisms.IDENTITIES: Morphisms.BIJECTIONS,
}


@dataclass(frozen=True)
class CategoryKind:
    morphisms: Morphisms
    regime: Regime = Regime.ALL

    def __str__(self):
        return f"{self.morphisms.value}/{self.regime.value}"


def category(morphisms: str, regime: str = "all") -> CategoryKind:
    return CategoryKind(Morphisms(morphisms), Regime(regime))


ALL_CATEGORIES = tuple(
    CategoryKind(m, r) for m in Morphisms for r in Regime
)


class RegimeError(ValueError):
    """A state or step is incompatible with the category's regime."""


@dataclass(frozen=True)
class AbstractState:
    """A pattern of equalities among the named tuple plus the world size."""

    pattern: SetPartition
    size: Size

    def __post_init__(self):
        if not is_omega(self.size):
            if self.size < 0:
                raise ValueError("negative world size")
            if self.size < self.pattern.block_count:
                raise ValueError(
                    f"size {self.size} cannot realize {self.pattern.block_count} distinct values"
                )

    def __str__(self):
        return f"({self.pattern}, {self.size})"


def _check_regime(cat: CategoryKind, state: AbstractState):
    if cat.regime is Regime.INF and not is_omega(state.size):
        raise RegimeError(f"finite state {state} in infinite-only regime")
    if cat.regime is Regime.FIN and is_omega(state.size):
        raise RegimeError(f"omega state {state} in finite-only regime")


def _size_le(a: Size, b: Size) -> bool:
    if is_omega(b):
        return True
    if is_omega(a):
        return False
    return a <= b


def _slack_ge(s: Size, k: int, t: Size, j: int) -> bool:
    """s - k >= t - j with omega arithmetic (omega - finite = omega)."""
    if is_omega(s):
        return True
    if is_omega(t):
        return False
    return s - k >= t - j


def _can_step_raw(group: Morphisms, p: SetPartition, s: Size, q: SetPartition, t: Size) -> bool:
    if group is Morphisms.FUNCTIONS:
        if not pt.refines(p, q):
            return False
        if s == 0:
            return True
        return is_omega(t) or t >= max(1, q.block_count)
    if group is Morphisms.SURJECTIONS:
        if not pt.refines(p, q):
            return False
        if not is_omega(t) and t < q.block_count:
            return False
        if not _size_le(t, s):
            return False
        if not _slack_ge(s, p.block_count, t, q.block_count):
            return False
        return (t == 0) == (s == 0)
    if group is Morphisms.INJECTIONS:
        return q == p and _size_le(s, t)
    if group is Morphisms.BIJECTIONS:
        return q == p and s == t
    raise AssertionError(group)


def can_step(cat: CategoryKind, src: AbstractState, dst: AbstractState) -> bool:
    """Does some morphism of the category carry a world in state src to one
    in state dst, mapping the named tuple accordingly?"""
    if src.pattern.m != dst.pattern.m:
        raise ValueError(f"mismatched tuple arity: {src.pattern.m} vs {dst.pattern.m}")
    _check_regime(cat, src)
    _check_regime(cat, dst)
    return _can_step_raw(_GROUP[cat.morphisms], src.pattern, src.size, dst.pattern, dst.size)


def successors(cat: CategoryKind, src: AbstractState, n: int) -> list[AbstractState]:
    """All states (Q, t) with t in {0..n} or omega reachable from src.

    The omega entry stands for every size beyond n, as licensed by table
    stability.
    """
    if n < src.pattern.m:
        raise ValueError(f"threshold {n} too small for {src.pattern.m} variables")
    _check_regime(cat, src)
    group = _GROUP[cat.morphisms]
    if group in (Morphisms.FUNCTIONS, Morphisms.SURJECTIONS):
        targets: Iterable[SetPartition] = pt.coarsenings(src.pattern)
    else:
        targets = (src.pattern,)
    sizes: list[Size] = []
    if cat.regime is not Regime.INF:
        sizes.extend(range(n + 1))
    if cat.regime is not Regime.FIN:
        sizes.append(OMEGA)
    out = []
    for q in targets:
        for t in sizes:
            if not is_omega(t) and t < q.block_count:
                continue
            if _can_step_raw(group, src.pattern, src.size, q, t):
                out.append(AbstractState(q, t))
    return out


def threshold(f: Formula) -> int:
    """Sufficient size-truncation bound: distinct variable indices (free and
    bound) plus the largest exact-cardinality index, plus one slack."""
    return len(fm.all_var_indices(f)) + fm.max_card_index(f) + 1


# ---------------------------------------------------------------------------
# internal row algebra
#
# A rep is (ctx, n, rows): ctx is the sorted tuple of free variable indices,
# rows has one entry per partition of len(ctx) in canonical enumeration
# order.  A row is (bits, tail, omega): bit t of bits is the truth value at
# size |P| + t for t = 0 .. n - |P|; tail is the common value at every finite
# size > n; omega is the value at the abstract infinite size (None in the
# finite-only regime).  In the all-sets regime tail == omega always (the
# stability invariant); this is asserted after every operation.
#
# In the infinite-only regime rows carry only the omega component.

_Row = tuple  # (bits: int, tail: bool, omega: bool | None)
_Rep = tuple  # (ctx: tuple[int, ...], n: int, rows: tuple[_Row, ...])

_REP_INTERN: dict[_Rep, _Rep] = {}


def _intern(rep: _Rep) -> _Rep:
    return _REP_INTERN.setdefault(rep, rep)


def _width(n: int, nblocks: int) -> int:
    return n - nblocks + 1


def _mask(width: int) -> int:
    return (1 << width) - 1


def _make_rep(regime: Regime, ctx: tuple, n: int, rows) -> _Rep:
    rows = tuple(rows)
    if regime is Regime.ALL:
        for bits, tail, omega in rows:
            assert tail == omega, "stability invariant violated (tail != omega)"
    return _intern((ctx, n, rows))


def _parts(m: int) -> tuple[SetPartition, ...]:
    return pt.enumerate_partitions(m)


def _const_rep(regime: Regime, value: bool) -> _Rep:
    n = 1
    if regime is Regime.INF:
        row = (0, False, value)
    else:
        bits = _mask(2) if value else 0
        row = (bits, value, value if regime is Regime.ALL else None)
    return _make_rep(regime, (), n, (row,))


def _atom_rep(regime: Regime, i: int, j: int) -> _Rep:
    if i == j:
        ctx = (i,)
        n = 2
        if regime is Regime.INF:
            rows = [(0, False, True)]
        else:
            om = True if regime is Regime.ALL else None
            rows = [(_mask(_width(n, 1)), True, om)]
        return _make_rep(regime, ctx, n, rows)
    ctx = tuple(sorted((i, j)))
    n = 3
    rows = []
    for p in _parts(2):
        value = p.block_count == 1
        if regime is Regime.INF:
            rows.append((0, False, value))
        else:
            bits = _mask(_width(n, p.block_count)) if value else 0
            om = value if regime is Regime.ALL else None
            rows.append((bits, value, om))
    return _make_rep(regime, ctx, n, rows)


def _card_rep(regime: Regime, k: int) -> _Rep:
    n = max(k + 1, 1)
    if regime is Regime.INF:
        row = (0, False, False)
    else:
        row = (1 << k, False, False if regime is Regime.ALL else None)
    return _make_rep(regime, (), n, (row,))


def _rep_not(regime: Regime, rep: _Rep) -> _Rep:
    ctx, n, rows = rep
    out = []
    for p, (bits, tail, omega) in zip(_parts(len(ctx)), rows):
        if regime is Regime.INF:
            out.append((0, False, not omega))
        else:
            w = _width(n, p.block_count)
            out.append((bits ^ _mask(w), not tail, None if omega is None else not omega))
    return _make_rep(regime, ctx, n, out)


def _pad(regime: Regime, rep: _Rep, n2: int) -> _Rep:
    ctx, n, rows = rep
    if regime is Regime.INF or n2 <= n:
        return rep
    out = []
    for p, (bits, tail, omega) in zip(_parts(len(ctx)), rows):
        w = _width(n, p.block_count)
        if tail:
            extra = (_mask(n2 - n) << w)
            bits = bits | extra
        out.append((bits, tail, omega))
    return _make_rep(regime, ctx, n2, out)


def _lift(regime: Regime, rep: _Rep, ctx2: tuple) -> _Rep:
    ctx, n, rows = rep
    if ctx == ctx2:
        return rep
    keep = tuple(ctx2.index(v) for v in ctx)
    n = max(n, len(ctx2) + 1)
    rep = _pad(regime, rep, n)
    _, _, rows = rep
    idx = {p: k for k, p in enumerate(_parts(len(ctx)))}
    out = []
    for p2 in _parts(len(ctx2)):
        sub = pt.restrict(p2, keep)
        bits, tail, omega = rows[idx[sub]]
        if regime is Regime.INF:
            out.append((0, False, omega))
            continue
        shift = p2.block_count - sub.block_count
        w2 = _width(n, p2.block_count)
        out.append(((bits >> shift) & _mask(w2), tail, omega))
    return _make_rep(regime, ctx2, n, out)


def _align(regime: Regime, a: _Rep, b: _Rep) -> tuple[_Rep, _Rep]:
    ctx = tuple(sorted(set(a[0]) | set(b[0])))
    a = _lift(regime, a, ctx)
    b = _lift(regime, b, ctx)
    n = max(a[1], b[1])
    return _pad(regime, a, n), _pad(regime, b, n)


def _rep_binary(regime: Regime, op: str, a: _Rep, b: _Rep) -> _Rep:
    a, b = _align(regime, a, b)
    ctx, n, rows_a = a
    rows_b = b[2]

    def bop(x: bool, y: bool) -> bool:
        if op == "and":
            return x and y
        if op == "or":
            return x or y
        if op == "implies":
            return (not x) or y
        return x == y

    out = []
    for p, ra, rb in zip(_parts(len(ctx)), rows_a, rows_b):
        if regime is Regime.INF:
            out.append((0, False, bop(ra[2], rb[2])))
            continue
        w = _width(n, p.block_count)
        m = _mask(w)
        if op == "and":
            bits = ra[0] & rb[0]
        elif op == "or":
            bits = ra[0] | rb[0]
        elif op == "implies":
            bits = ((ra[0] ^ m) | rb[0]) & m
        else:
            bits = (~(ra[0] ^ rb[0])) & m
        omega = None if ra[2] is None else bop(ra[2], rb[2])
        out.append((bits, bop(ra[1], rb[1]), omega))
    return _make_rep(regime, ctx, n, out)


def _extensions(p: SetPartition, pos: int):
    """Child partitions when a new variable is inserted at position pos:
    one per existing block, plus the fresh singleton."""
    joins = [pt.insert_into_block(p, pos, b) for b in range(p.block_count)]
    new = pt.insert_into_block(p, pos, None)
    return joins, new


def _rep_quant(regime: Regime, universal: bool, rep: _Rep, v: int) -> _Rep:
    ctx, n, rows = rep
    if v not in ctx:
        rep = _lift(regime, rep, tuple(sorted(set(ctx) | {v})))
        ctx, n, rows = rep
    pos = ctx.index(v)
    ctx2 = ctx[:pos] + ctx[pos + 1 :]
    big_idx = {p: k for k, p in enumerate(_parts(len(ctx)))}
    out = []
    for p in _parts(len(ctx2)):
        joins, new = _extensions(p, pos)
        join_rows = [rows[big_idx[q]] for q in joins]
        new_row = rows[big_idx[new]]
        if regime is Regime.INF:
            omegas = [r[2] for r in join_rows] + [new_row[2]]
            value = all(omegas) if universal else any(omegas)
            out.append((0, False, value))
            continue
        w = _width(n, p.block_count)
        m = _mask(w)
        # join extensions keep the block count, so size indexing lines up;
        # the fresh singleton needs one extra element (shift by one).
        if universal:
            bits = m
            for rb, _, _ in join_rows:
                bits &= rb
            bits &= ((new_row[0] << 1) | 1) & m
            tail = all(r[1] for r in join_rows) and new_row[1]
            omega = None
            if regime is Regime.ALL:
                omega = all(r[2] for r in join_rows) and new_row[2]
        else:
            bits = 0
            for rb, _, _ in join_rows:
                bits |= rb
            bits = (bits | (new_row[0] << 1)) & m
            tail = any(r[1] for r in join_rows) or new_row[1]
            omega = None
            if regime is Regime.ALL:
                omega = any(r[2] for r in join_rows) or new_row[2]
        out.append((bits, tail, omega))
    return _make_rep(regime, ctx2, n, out)


def _row_bools(bits: int, width: int) -> list[bool]:
    return [bool(bits >> t & 1) for t in range(width)]


def _rep_diamond(regime: Regime, group: Morphisms, rep: _Rep) -> _Rep:
    ctx, n, rows = rep
    m = len(ctx)
    parts = _parts(m)
    idx = {p: k for k, p in enumerate(parts)}

    if group is Morphisms.BIJECTIONS:
        return rep

    if regime is Regime.INF:
        out = []
        for p in parts:
            if group is Morphisms.INJECTIONS:
                value = rows[idx[p]][2]
            else:
                value = any(rows[idx[q]][2] for q in pt.coarsenings(p))
            out.append((0, False, value))
        return _make_rep(regime, ctx, n, out)

    allsets = regime is Regime.ALL

    if group is Morphisms.INJECTIONS:
        out = []
        for p in parts:
            bits, tail, omega = rows[idx[p]]
            w = _width(n, p.block_count)
            beyond = tail or (allsets and omega)
            new_bits = 0
            acc = beyond
            for t in range(w - 1, -1, -1):
                acc = acc or bool(bits >> t & 1)
                if acc:
                    new_bits |= 1 << t
            out.append((new_bits, beyond, omega if allsets else None))
        return _make_rep(regime, ctx, n, out)

    if group is Morphisms.FUNCTIONS:
        reach = {}
        for q in parts:
            bits, tail, omega = rows[idx[q]]
            if q.block_count == 0:
                nonzero = bits & ~1  # targets of size >= 1
            else:
                nonzero = bits
            reach[q] = bool(nonzero) or tail or (allsets and bool(omega))
        out = []
        for p in parts:
            base = any(reach[q] for q in pt.coarsenings(p))
            w = _width(n, p.block_count)
            bits = _mask(w) if base else 0
            if m == 0:
                # the empty world maps into every world, including the empty one
                zero = bool(rows[idx[p]][0] & 1) or base
                bits = (bits & ~1) | (1 if zero else 0)
            out.append((bits, base, base if allsets else None))
        return _make_rep(regime, ctx, n, out)

    # surjections: possibility shifts size thresholds by at most m
    n2 = n + max(1, m)
    out = []
    cum = {}
    for q in parts:
        bits, tail, omega = rows[idx[q]]
        w = _width(n, q.block_count)
        vals = _row_bools(bits, w)
        lo = max(1, q.block_count) - q.block_count  # first admissible index
        acc = []
        running = False
        for t in range(w):
            if t >= lo:
                running = running or vals[t]
            acc.append(running)
        cum[q] = (acc, tail, omega)
    for p in parts:
        coars = pt.coarsenings(p)
        w2 = _width(n2, p.block_count)
        bits2 = 0
        for t in range(w2):
            s = p.block_count + t
            if s == 0:
                value = bool(rows[idx[p]][0] & 1)  # only the empty target
            else:
                value = False
                for q in coars:
                    acc, tail_q, _ = cum[q]
                    hi = s - p.block_count + q.block_count  # largest target size
                    hi_idx = hi - q.block_count
                    if hi_idx >= len(acc):
                        value = acc[-1] if acc else False
                        value = value or tail_q
                    elif hi_idx >= 0:
                        value = acc[hi_idx]
                    if value:
                        break
            if value:
                bits2 |= 1 << t
        tail2 = any((cum[q][0][-1] if cum[q][0] else False) or cum[q][1] for q in coars)
        omega2 = None
        if allsets:
            omega2 = any(
                (cum[q][0][-1] if cum[q][0] else False) or cum[q][1] or bool(cum[q][2])
                for q in coars
            )
        out.append((bits2, tail2, omega2))
    return _make_rep(regime, ctx, n2, out)


_ELIM_CACHE: dict = {}


def _rep_of(f: Formula, group: Morphisms, regime: Regime) -> _Rep:
    key = (f, group, regime)
    hit = _ELIM_CACHE.get(key)
    if hit is not None:
        return hit
    if isinstance(f, fm.Atom):
        rep = _atom_rep(regime, f.i, f.j)
    elif isinstance(f, fm.CardExact):
        rep = _card_rep(regime, f.k)
    elif isinstance(f, fm.Not):
        rep = _rep_not(regime, _rep_of(f.body, group, regime))
    elif isinstance(f, fm.And):
        rep = _rep_binary(regime, "and", _rep_of(f.left, group, regime), _rep_of(f.right, group, regime))
    elif isinstance(f, fm.Or):
        rep = _rep_binary(regime, "or", _rep_of(f.left, group, regime), _rep_of(f.right, group, regime))
    elif isinstance(f, fm.Implies):
        rep = _rep_binary(regime, "implies", _rep_of(f.left, group, regime), _rep_of(f.right, group, regime))
    elif isinstance(f, fm.Iff):
        rep = _rep_binary(regime, "iff", _rep_of(f.left, group, regime), _rep_of(f.right, group, regime))
    elif isinstance(f, fm.Exists):
        rep = _rep_quant(regime, False, _rep_of(f.body, group, regime), f.v)
    elif isinstance(f, fm.Forall):
        rep = _rep_quant(regime, True, _rep_of(f.body, group, regime), f.v)
    elif isinstance(f, fm.Diamond):
        rep = _rep_diamond(regime, group, _rep_of(f.body, group, regime))
    elif isinstance(f, fm.Box):
        inner = _rep_not(regime, _rep_of(f.body, group, regime))
        rep = _rep_not(regime, _rep_diamond(regime, group, inner))
    else:
        raise TypeError(f"not an equality-language formula: {f!r}")
    _ELIM_CACHE[key] = rep
    return rep


def _prepare(f: Formula) -> Formula:
    if not fm.is_eq_formula(f):
        raise TypeError("propositional variables have no equality semantics")
    return fm.normalize_binders(f)


# ---------------------------------------------------------------------------
# public tables


@dataclass(frozen=True)
class EqCardTable:
    """Canonical truth table over (partition, size) states with a stable tail.

    entries covers finite sizes |P| <= s <= N (absent in the infinite-only
    regime); tail gives the value at every size beyond N, including omega
    where the regime admits it.
    """

    m: int
    n: int
    cat: CategoryKind
    entries: dict
    tail: dict

    def value(self, pattern: SetPartition, size: Size) -> bool:
        if is_omega(size) or size > self.n or not self.entries:
            return self.tail[pattern]
        return self.entries[(pattern, size)]

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "N": self.n,
            "category": {"morphisms": self.cat.morphisms.value, "regime": self.cat.regime.value},
            "entries": [
                {"partition": str(p), "size": s, "value": v}
                for (p, s), v in sorted(
                    self.entries.items(), key=lambda kv: (pt.partition_index(kv[0][0]), kv[0][1])
                )
            ],
            "tail": [
                {"partition": str(p), "value": v}
                for p, v in sorted(self.tail.items(), key=lambda kv: pt.partition_index(kv[0]))
            ],
        }


def eliminate(f: Formula, cat: CategoryKind, min_threshold: int = 0) -> EqCardTable:
    """Reduce f to its abstract-state truth table in the given category.

    min_threshold forces a larger N; recomputing with N+2 and comparing is
    the stability test.
    """
    f = _prepare(f)
    regime = cat.regime
    rep = _rep_of(f, _GROUP[cat.morphisms], regime)
    n_pub = max(threshold(f), rep[1], min_threshold, len(rep[0]) + 1)
    rep = _pad(regime, rep, n_pub)
    ctx, n, rows = rep
    entries = {}
    tail = {}
    for p, (bits, t, omega) in zip(_parts(len(ctx)), rows):
        if regime is Regime.INF:
            tail[p] = bool(omega)
            continue
        w = _width(n, p.block_count)
        for k in range(w):
            entries[(p, p.block_count + k)] = bool(bits >> k & 1)
        tail[p] = bool(t)
    return EqCardTable(m=len(ctx), n=n, cat=cat, entries=entries, tail=tail)


def evaluate(f: Formula, cat: CategoryKind, world_size: Size, pattern: SetPartition) -> bool:
    """Truth of f at a world of the given size whose named tuple realizes
    pattern (positions follow the sorted free-variable list of f)."""
    f = _prepare(f)
    free = sorted(fm.free_vars(f))
    if pattern.m != len(free):
        raise ValueError(f"pattern has {pattern.m} positions, formula has {len(free)} free variables")
    if cat.regime is Regime.INF and not is_omega(world_size):
        raise RegimeError("infinite-only regime requires world size omega")
    if cat.regime is Regime.FIN and is_omega(world_size):
        raise RegimeError("finite-only regime forbids world size omega")
    if not is_omega(world_size) and world_size < pattern.block_count:
        raise ValueError(
            f"world of size {world_size} cannot realize {pattern.block_count} distinct parameters"
        )
    rep = _rep_of(f, _GROUP[cat.morphisms], cat.regime)
    return _rep_value(cat.regime, rep, pattern, world_size)


def _rep_value(regime: Regime, rep: _Rep, pattern: SetPartition, size: Size) -> bool:
    ctx, n, rows = rep
    k = pt.partition_index(pattern)
    bits, tail, omega = rows[k]
    if is_omega(size):
        return bool(omega)
    if size > n:
        return bool(tail)
    return bool(bits >> (size - pattern.block_count) & 1)


def pattern_formula(p: SetPartition, variables: tuple[int, ...] | None = None) -> Formula | None:
    """The equality/inequality pattern asserting the tuple realizes exactly p.

    Returns None when there is no constraint (fewer than two variables).
    """
    xs = variables if variables is not None else tuple(range(p.m))
    parts = []
    ix = p.block_index()
    for i in range(p.m):
        for j in range(i + 1, p.m):
            atom = fm.Atom(xs[i], xs[j])
            parts.append(atom if ix[i] == ix[j] else fm.Not(atom))
    if not parts:
        return None
    out = parts[-1]
    for q in reversed(parts[:-1]):
        out = fm.And(q, out)
    return out


def sigma_beyond(n: int) -> Formula:
    """Sentence 'there are more than n elements' as a primitive combination."""
    out: Formula = fm.Not(fm.CardExact(n))
    for k in reversed(range(n)):
        out = fm.And(fm.Not(fm.CardExact(k)), out)
    return out


def to_normal_formula(table: EqCardTable) -> Formula:
    """Modality-free, quantifier-free disjunction equivalent to the table:
    P(x) & sigma_s over true entries, P(x) & sigma_>N over true tails."""
    disjuncts = []
    for p in _parts(table.m):
        pat = pattern_formula(p)
        if table.entries:
            for s in range(p.block_count, table.n + 1):
                if table.entries.get((p, s)):
                    disjuncts.append(_conj(pat, fm.CardExact(s)))
        if table.tail.get(p):
            disjuncts.append(_conj(pat, sigma_beyond(table.n)))
    if not disjuncts:
        return fm.FALSUM
    out = disjuncts[-1]
    for d in reversed(disjuncts[:-1]):
        out = fm.Or(d, out)
    return out


def _conj(pat: Formula | None, size_part: Formula) -> Formula:
    return size_part if pat is None else fm.And(pat, size_part)

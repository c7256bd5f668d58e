"""Brute-force concrete-world semantics, independent of the eliminator.

Worlds are the concrete sets {0..s-1} for s <= cap, plus one lazily
represented countably infinite world (its elements are natural numbers;
fresh elements are interchangeable over any finite tuple because the
language has only equality).  Morphisms between finite worlds are
enumerated exhaustively as maps and filtered per class; morphisms to and
from the infinite world are reduced to their action on the named tuple,
with existence conditions coded directly from set theory.

Truth values are computed bottom-up as bitmasks over the state space
(world, tuple assignment), one mask per (formula, class, regime).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from eqmodal import formula as fm
from eqmodal.eqcard import OMEGA, Morphisms, Regime, is_omega

INF = OMEGA
CAP = 5


def canon(tup):
    """Relabel a tuple by first occurrence: (7,3,7) -> (0,1,0)."""
    seen = {}
    out = []
    for v in tup:
        if v not in seen:
            seen[v] = len(seen)
        out.append(seen[v])
    return tuple(out)


@lru_cache(maxsize=None)
def canonical_patterns(m: int):
    """All canonical tuples of length m (set partitions as label tuples)."""
    if m == 0:
        return ((),)
    out = []
    for shorter in canonical_patterns(m - 1):
        top = max(shorter, default=-1)
        for v in range(top + 2):
            out.append(shorter + (v,))
    return tuple(out)


@lru_cache(maxsize=None)
def maps_between(s: int, t: int, cls: Morphisms):
    """All morphisms {0..s-1} -> {0..t-1} of the class, as image tuples."""
    if cls is Morphisms.IDENTITIES:
        return (tuple(range(s)),) if s == t else ()
    if cls is Morphisms.INCLUSIONS:
        return (tuple(range(s)),) if s <= t else ()
    out = []
    for g in product(range(t), repeat=s):
        if cls is Morphisms.SURJECTIONS and set(g) != set(range(t)):
            continue
        if cls is Morphisms.INJECTIONS and len(set(g)) != s:
            continue
        if cls is Morphisms.BIJECTIONS and (s != t or len(set(g)) != s):
            continue
        out.append(g)
    return tuple(out)


def _inf_actions(values: tuple, cls: Morphisms, target_finite: int | None):
    """Attainable images of a tuple of distinct-labelled values from the
    infinite world; None target means the infinite world itself."""
    d = len(set(values))
    if target_finite is None:
        if cls in (Morphisms.FUNCTIONS, Morphisms.SURJECTIONS):
            # merging finitely many points keeps the set infinite; any
            # coarsening of the current pattern is attainable
            return {canon(tuple(g[v] for v in values)) for g in product(range(max(d, 1)), repeat=max(d, 1))} if d else {()}
        # injections, inclusions, bijections, identities preserve the pattern
        return {canon(values)}
    t = target_finite
    if cls in (Morphisms.INJECTIONS, Morphisms.INCLUSIONS, Morphisms.BIJECTIONS, Morphisms.IDENTITIES):
        return set()  # no injective map from an infinite set into a finite one
    if t == 0:
        return set()  # nonempty source needs a nonempty target
    # any action on the tuple extends to a function, and the remaining
    # infinitely many elements can cover all of the target
    distinct = sorted(set(values))
    images = set()
    for g in product(range(t), repeat=len(distinct)):
        lut = dict(zip(distinct, g))
        images.add(tuple(lut[v] for v in values))
    return images


def _fin_to_inf_actions(values: tuple, cls: Morphisms):
    """Attainable canonical patterns in the infinite world from a finite one."""
    if cls is Morphisms.FUNCTIONS:
        d = len(set(values))
        if d == 0:
            return {()}
        out = set()
        for g in product(range(d), repeat=d):
            lut = dict(zip(sorted(set(values)), g))
            out.add(canon(tuple(lut[v] for v in values)))
        return out
    if cls in (Morphisms.INJECTIONS, Morphisms.INCLUSIONS):
        return {canon(values)}
    return set()  # no surjection or bijection from finite onto infinite


class ConcreteSemantics:
    """Exhaustive Kripke semantics for one morphism class and regime."""

    def __init__(self, cls: Morphisms, regime: Regime, cap: int = CAP):
        self.cls = cls
        self.regime = regime
        self.cap = cap
        self._states: dict[int, list] = {}
        self._index: dict[int, dict] = {}
        self._succ: dict[int, list[int]] = {}
        self._ext: dict[tuple[int, int], list[tuple[int, ...]]] = {}
        self._dia_cache: dict = {}
        self._quant_cache: dict = {}
        self._mask_cache: dict = {}

    # -- state spaces ------------------------------------------------------

    def states(self, m: int) -> list:
        if m not in self._states:
            out = []
            if self.regime is not Regime.INF:
                for s in range(self.cap + 1):
                    for nu in product(range(s), repeat=m):
                        out.append((s, nu))
            if self.regime is not Regime.FIN:
                for nu in canonical_patterns(m):
                    out.append((INF, nu))
            self._states[m] = out
            self._index[m] = {st: k for k, st in enumerate(out)}
        return self._states[m]

    def full_mask(self, m: int) -> int:
        return (1 << len(self.states(m))) - 1

    # -- morphism structure -------------------------------------------------

    def succ_masks(self, m: int) -> list[int]:
        """Per state, the bitmask of states reachable by one morphism."""
        if m in self._succ:
            return self._succ[m]
        states = self.states(m)
        index = self._index[m]
        masks = []
        for s, nu in states:
            mask = 0
            if is_omega(s):
                if self.regime is not Regime.FIN:
                    for img in _inf_actions(nu, self.cls, None):
                        mask |= 1 << index[(INF, img)]
                if self.regime is not Regime.INF:
                    for t in range(self.cap + 1):
                        for img in _inf_actions(nu, self.cls, t):
                            mask |= 1 << index[(t, img)]
            else:
                if self.regime is not Regime.INF:
                    for t in range(self.cap + 1):
                        for g in maps_between(s, t, self.cls):
                            img = tuple(g[v] for v in nu)
                            mask |= 1 << index[(t, img)]
                if self.regime is not Regime.FIN:
                    for img in _fin_to_inf_actions(nu, self.cls):
                        mask |= 1 << index[(INF, img)]
            masks.append(mask)
        self._succ[m] = masks
        return masks

    def extensions(self, m: int, pos: int) -> list[tuple[int, ...]]:
        """Per state of arity m, the child-state indices (arity m+1) obtained
        by letting a fresh variable at position pos range over the world."""
        key = (m, pos)
        if key in self._ext:
            return self._ext[key]
        child_index = self._index_for(m + 1)
        out = []
        for s, nu in self.states(m):
            kids = []
            if is_omega(s):
                options = sorted(set(nu)) + [max(nu, default=-1) + 1]
                for e in options:
                    kids.append(child_index[(INF, canon(nu[:pos] + (e,) + nu[pos:]))])
            else:
                for e in range(s):
                    kids.append(child_index[(s, nu[:pos] + (e,) + nu[pos:])])
            out.append(tuple(sorted(set(kids))))
        self._ext[key] = out
        return out

    def _index_for(self, m: int):
        self.states(m)
        return self._index[m]

    # -- formula evaluation --------------------------------------------------

    def mask(self, f: fm.Formula) -> tuple[tuple[int, ...], int]:
        """(sorted free variables, truth bitmask over states of that arity)."""
        hit = self._mask_cache.get(f)
        if hit is not None:
            return hit
        out = self._compute(f)
        self._mask_cache[f] = out
        return out

    def _compute(self, f):
        if isinstance(f, fm.Atom):
            ctx = tuple(sorted({f.i, f.j}))
            i, j = ctx.index(f.i), ctx.index(f.j)
            bits = 0
            for k, (s, nu) in enumerate(self.states(len(ctx))):
                if nu[i] == nu[j]:
                    bits |= 1 << k
            return ctx, bits
        if isinstance(f, fm.CardExact):
            bits = 0
            for k, (s, nu) in enumerate(self.states(0)):
                if not is_omega(s) and s == f.k:
                    bits |= 1 << k
            return (), bits
        if isinstance(f, fm.Not):
            ctx, b = self.mask(f.body)
            return ctx, b ^ self.full_mask(len(ctx))
        if isinstance(f, (fm.And, fm.Or, fm.Implies, fm.Iff)):
            ca, ba = self.mask(f.left)
            cb, bb = self.mask(f.right)
            ctx = tuple(sorted(set(ca) | set(cb)))
            ba = self._lift(ca, ctx, ba)
            bb = self._lift(cb, ctx, bb)
            full = self.full_mask(len(ctx))
            if isinstance(f, fm.And):
                return ctx, ba & bb
            if isinstance(f, fm.Or):
                return ctx, ba | bb
            if isinstance(f, fm.Implies):
                return ctx, (ba ^ full) | bb
            return ctx, ~(ba ^ bb) & full
        if isinstance(f, (fm.Exists, fm.Forall)):
            cb, bb = self.mask(f.body)
            if f.v not in cb:
                child_ctx = tuple(sorted(set(cb) | {f.v}))
                bb = self._lift(cb, child_ctx, bb)
                cb = child_ctx
            pos = cb.index(f.v)
            ctx = cb[:pos] + cb[pos + 1 :]
            key = (len(ctx), pos, isinstance(f, fm.Exists), bb)
            hit = self._quant_cache.get(key)
            if hit is None:
                ext = self.extensions(len(ctx), pos)
                bits = 0
                for k in range(len(self.states(len(ctx)))):
                    kids = ext[k]
                    if isinstance(f, fm.Exists):
                        val = any(bb >> c & 1 for c in kids)
                    else:
                        val = all(bb >> c & 1 for c in kids)
                    if val:
                        bits |= 1 << k
                self._quant_cache[key] = bits
                hit = bits
            return ctx, hit
        if isinstance(f, (fm.Diamond, fm.Box)):
            ctx, bb = self.mask(f.body)
            box = isinstance(f, fm.Box)
            key = (len(ctx), box, bb)
            hit = self._dia_cache.get(key)
            if hit is None:
                succ = self.succ_masks(len(ctx))
                bits = 0
                for k in range(len(self.states(len(ctx)))):
                    if box:
                        if succ[k] & ~bb == 0:
                            bits |= 1 << k
                    elif succ[k] & bb:
                        bits |= 1 << k
                self._dia_cache[key] = bits
                hit = bits
            return ctx, hit
        raise TypeError(f"not an equality formula: {f!r}")

    def _lift(self, small: tuple, big: tuple, bits: int) -> int:
        key = ("lift", small, big, bits)
        hit = self._quant_cache.get(key)
        if hit is not None:
            return hit
        keep = [big.index(v) for v in small]
        small_index = self._index_for(len(small))
        out = 0
        for k, (s, nu) in enumerate(self.states(len(big))):
            proj = tuple(nu[i] for i in keep)
            if is_omega(s):
                proj = canon(proj)
            if bits >> small_index[(s, proj)] & 1:
                out |= 1 << k
        self._quant_cache[key] = out
        return out

    # -- direct queries -------------------------------------------------------

    def holds(self, f: fm.Formula, size, assignment: tuple) -> bool:
        """Truth at the world of the given size under a concrete assignment
        to the sorted free variables of f."""
        f = fm.normalize_binders(f)
        ctx, bits = self.mask(f)
        if is_omega(size):
            assignment = canon(assignment)
        return bool(bits >> self._index_for(len(ctx))[(size, assignment)] & 1)


_SEMANTICS: dict = {}


def semantics(cls: Morphisms, regime: Regime, cap: int = CAP) -> ConcreteSemantics:
    key = (cls, regime, cap)
    if key not in _SEMANTICS:
        _SEMANTICS[key] = ConcreteSemantics(cls, regime, cap)
    return _SEMANTICS[key]

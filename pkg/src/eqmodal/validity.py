"""Deciding membership in Val(W, L) two independent ways: the expected
theory's characteristic frames on one side, and a semantic oracle built from
the abstract-state cone on the other.  Their agreement across the corpus
reproduces the classification table at desk scale."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import eqcard as ec
from . import formula as fm
from . import frames as fr
from . import partition as pt
from .eqcard import OMEGA, AbstractState, CategoryKind, Morphisms, Regime, Size, is_omega
from .formula import Formula
from .frames import FiniteFrame, SearchBudgetExceeded, TheoryId
from .partition import SetPartition


class Lang(str, Enum):
    SENTENTIAL = "sentential"
    FORMULAIC = "formulaic"


@dataclass(frozen=True)
class WorldSpec:
    """A world of evaluation: category, size, substitution language, and the
    number of named parameters."""

    cat: CategoryKind
    size: Size
    lang: Lang
    named: int = 0

    def __post_init__(self):
        if self.cat.regime is Regime.INF and not is_omega(self.size):
            raise ec.RegimeError("infinite-only regime requires size omega")
        if self.cat.regime is Regime.FIN and is_omega(self.size):
            raise ec.RegimeError("finite-only regime forbids size omega")
        if self.lang is Lang.SENTENTIAL and self.named:
            raise ValueError("sentential substitutions carry no parameters")
        if not is_omega(self.size) and self.named > self.size:
            raise ValueError("cannot name more elements than the world has")

    def __str__(self):
        return f"{self.cat}/{self.size}/{self.lang.value}/named={self.named}"


def make_world(cat: CategoryKind, size: Size, lang: Lang, named: int | None = None) -> WorldSpec:
    """Default parameter counts: none sententially, the fully named world at
    finite sizes, three names at infinite worlds."""
    if named is None:
        if lang is Lang.SENTENTIAL:
            named = 0
        elif is_omega(size):
            named = 3
        else:
            named = size
    return WorldSpec(cat, size, lang, named)


def expected_theory(w: WorldSpec) -> TheoryId:
    """The classification table cell for this world."""
    m = ec._GROUP[w.cat.morphisms]
    if m is Morphisms.BIJECTIONS:
        return TheoryId("Triv")
    if w.cat.regime is Regime.INF:
        if w.lang is Lang.SENTENTIAL or m is Morphisms.INJECTIONS:
            return TheoryId("Triv")
        return TheoryId("Grz.2")
    if m is Morphisms.INJECTIONS:
        return TheoryId("Triv") if is_omega(w.size) else TheoryId("Grz.3")
    if m is Morphisms.FUNCTIONS:
        if w.size == 0:
            return TheoryId("Lollipop")
        if w.lang is Lang.SENTENTIAL:
            return TheoryId("S5")
        if is_omega(w.size):
            return TheoryId("S4.2")
        return TheoryId("Prepartition", w.size)
    # surjections
    if not is_omega(w.size) and w.size <= 1:
        return TheoryId("Triv")
    if w.lang is Lang.SENTENTIAL:
        return TheoryId("Grz.3") if is_omega(w.size) else TheoryId("Grz.3J", w.size)
    return TheoryId("Grz.2") if is_omega(w.size) else TheoryId("Partition", w.size)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class CountermodelWitness:
    frame: FiniteFrame
    valuation: dict
    node: int

    def to_json_dict(self) -> dict:
        return {
            "kind": "countermodel",
            "frame": self.frame.to_json_dict(),
            "valuation": {f"p{p}": sorted(ns) for p, ns in sorted(self.valuation.items())},
            "failing_node": self.node,
        }


@dataclass(frozen=True)
class SubstitutionWitness:
    assignment: dict  # prop index -> EqFormula

    def to_json_dict(self) -> dict:
        return {
            "kind": "substitution",
            "assignment": {f"p{p}": str(f) for p, f in sorted(self.assignment.items())},
        }


@dataclass(frozen=True)
class Verdict:
    in_validities: bool
    exact: bool
    bound: Optional[int] = None
    witness: object = None

    def __post_init__(self):
        if not self.in_validities and self.witness is None:
            raise ValueError("a negative verdict needs a witness")

    def describe(self) -> str:
        status = "in-validities" if self.in_validities else "not-in-validities"
        how = "exact" if self.exact else f"bounded N={self.bound}"
        return f"{status} ({how})"

    def to_json_dict(self) -> dict:
        return {
            "outcome": "in-validities" if self.in_validities else "not-in-validities",
            "exactness": "exact" if self.exact else {"bounded_by": self.bound},
            "witness": self.witness.to_json_dict() if self.witness is not None else None,
        }


_THEORY_CACHE: dict = {}


def decide_in_theory(t: TheoryId, f: Formula, bound: int = 5, max_conflicts: int = 200_000) -> Verdict:
    """Test f for validity on the theory's characteristic frame family,
    instantiated up to the bound."""
    key = (t, f, bound)
    hit = _THEORY_CACHE.get(key)
    if hit is not None:
        return hit
    info = fr.theory_info(t)
    verdict = None
    for frame in info.family(bound):
        check = fr.frame_valid(frame, f, max_conflicts=max_conflicts)
        if not check.valid:
            verdict = Verdict(
                False,
                exact=info.exact_family,
                bound=None if info.exact_family else bound,
                witness=CountermodelWitness(frame, check.valuation, check.node),
            )
            break
    if verdict is None:
        verdict = Verdict(
            True, exact=info.exact_family, bound=None if info.exact_family else bound
        )
    _THEORY_CACHE[key] = verdict
    return verdict


# ---------------------------------------------------------------------------
# the semantic oracle


TAIL = "tail"


def _state_sort_key(state):
    p, s = state
    return (pt.partition_index(p), 1 if s == TAIL else 0, 0 if s == TAIL else s)


_FRAME_CACHE: dict = {}


def oracle_state_frame(w: WorldSpec, n: int, with_states: bool = False):
    """The finite frame of abstract states reachable from the initial state
    (discrete pattern of the named tuple, world size), sizes truncated at n
    with one tail node per partition standing for every size beyond n."""
    key = (w, n)
    hit = _FRAME_CACHE.get(key)
    if hit is None:
        hit = _build_state_frame(w, n)
        _FRAME_CACHE[key] = hit
    frame, states = hit
    return (frame, states) if with_states else frame


def _build_state_frame(w: WorldSpec, n: int):
    if n < w.named:
        raise ValueError(f"threshold {n} below the named tuple size {w.named}")
    if not is_omega(w.size) and w.size > n:
        raise ValueError(f"threshold {n} below the world size {w.size}")
    group = ec._GROUP[w.cat.morphisms]
    regime = w.cat.regime
    init = (pt.discrete(w.named), TAIL if is_omega(w.size) else w.size)

    def unpack(state):
        p, s = state
        return p, (OMEGA if s == TAIL else s)

    def steps(state):
        p, s = unpack(state)
        if group in (Morphisms.FUNCTIONS, Morphisms.SURJECTIONS):
            targets = pt.coarsenings(p)
        else:
            targets = (p,)
        out = []
        for q in targets:
            sizes: list = []
            if regime is not Regime.INF:
                sizes.extend(range(q.block_count, n + 1))
            sizes.append(TAIL)
            for t in sizes:
                # a tail node steps like the abstract infinite size; in the
                # finite-only regime this coincides with "some finite size
                # beyond n" for every morphism class
                traw = OMEGA if t == TAIL else t
                if ec._can_step_raw(group, p, s, q, traw):
                    out.append((q, t))
        return out

    # the initial state must exist even when unreachable conditions would
    # exclude it; BFS collects the reachable cone
    seen = {init}
    frontier = [init]
    edges = []
    while frontier:
        nxt = []
        for st in frontier:
            for to in steps(st):
                edges.append((st, to))
                if to not in seen:
                    seen.add(to)
                    nxt.append(to)
        frontier = nxt
    states = sorted(seen, key=_state_sort_key)
    index = {st: k for k, st in enumerate(states)}
    pairs = {(index[a], index[b]) for (a, b) in edges}
    labels = [
        f"{p}|size>{n}" if s == TAIL else f"{p}|size={s}" for (p, s) in states
    ]
    if w.named == 0:
        labels = [lab.lstrip("|") for lab in labels]
    frame = FiniteFrame(len(states), frozenset(pairs), tuple(labels))
    return frame, states


def state_formula(state, named: int, n: int) -> Formula:
    """The assertion picking out exactly this abstract state: the equality
    pattern of the named tuple plus the size sentence (sigma_s, or beyond-n
    for the tail)."""
    p, s = state
    pat = ec.pattern_formula(p, tuple(range(named))) if named else None
    size_part = ec.sigma_beyond(n) if s == TAIL else fm.CardExact(s)
    return size_part if pat is None else fm.And(pat, size_part)


def oracle_decide(w: WorldSpec, f: Formula, n: int, max_conflicts: int = 200_000) -> Verdict:
    """Membership of f in Val(W, L), checked on the truncated state frame:
    f is in the validities iff every valuation makes it true at the initial
    state.  Valuations over the truncated states correspond to substitution
    instances with size threshold at most n, so the verdict is bounded."""
    frame, states = oracle_state_frame(w, n, with_states=True)
    init = (pt.discrete(w.named), TAIL if is_omega(w.size) else w.size)
    init_node = states.index(init)
    check = fr.frame_valid(frame, f, at_nodes=[init_node], max_conflicts=max_conflicts)
    if check.valid:
        return Verdict(True, exact=False, bound=n)
    assignment = {}
    for p, nodes in sorted(check.valuation.items()):
        disjuncts = [state_formula(states[k], w.named, n) for k in sorted(nodes)]
        if not disjuncts:
            assignment[p] = fm.FALSUM
        else:
            out = disjuncts[-1]
            for d in reversed(disjuncts[:-1]):
                out = fm.Or(d, out)
            assignment[p] = out
    return Verdict(False, exact=False, bound=n, witness=SubstitutionWitness(assignment))


def verify_substitution_witness(w: WorldSpec, f: Formula, witness: SubstitutionWitness) -> bool:
    """Check through the eliminator that the witness instance really fails
    at the world (the dual route to the state-frame search)."""
    inst = fm.substitute_props(f, witness.assignment)
    return not ec.evaluate(inst, w.cat, w.size, pt.discrete(w.named))


# ---------------------------------------------------------------------------
# table reproduction


def default_corpus() -> list[tuple[str, Formula]]:
    out = [
        ("T", fr.axiom("T")),
        ("4", fr.axiom("4")),
        ("5", fr.axiom("5")),
        ("Grz", fr.axiom("Grz")),
        (".2", fr.axiom(".2")),
        (".3", fr.axiom(".3")),
    ]
    out += [(f"J_{k}", fr.axiom("J", k)) for k in range(1, 5)]
    out.append(("Triv", fr.axiom("Triv")))
    return out


def _j_index(name: str) -> int | None:
    if name.startswith("J_"):
        return int(name[2:])
    if name == "5":
        return 1
    return None


def _named_for(cat: CategoryKind, size: Size, lang: Lang, formula_name: str, default: int = 3) -> int:
    if lang is Lang.SENTENTIAL:
        return 0
    if not is_omega(size):
        return size
    # At infinite worlds the only depth available to falsify J_k comes from
    # coarsening the named tuple, which needs k+1 partition levels. Sizes
    # supply that depth under all-sets surjections, but not under functions
    # (sizes there form clusters) nor in the infinite-only regime.
    j = _j_index(formula_name)
    group = ec._GROUP[cat.morphisms]
    depth_from_names_only = group is Morphisms.FUNCTIONS or (
        cat.regime is Regime.INF and group is Morphisms.SURJECTIONS
    )
    if j is not None and depth_from_names_only:
        return max(default, min(j + 1, pt.MAX_GROUND))
    return default


def oracle_threshold(w: WorldSpec, slack: int = 4) -> int:
    """Default size-truncation bound for the oracle frame."""
    base = 0 if is_omega(w.size) else w.size
    return base + w.named + slack


@dataclass(frozen=True)
class FormulaResult:
    name: str
    theory_verdict: Optional[Verdict]
    oracle_verdict: Optional[Verdict]
    named: int
    n: int
    skipped: Optional[str] = None

    @property
    def agree(self) -> Optional[bool]:
        if self.skipped:
            return None
        return self.theory_verdict.in_validities == self.oracle_verdict.in_validities

    def to_json_dict(self) -> dict:
        if self.skipped:
            return {"formula": self.name, "skipped": self.skipped}
        return {
            "formula": self.name,
            "theory_verdict": self.theory_verdict.to_json_dict()["outcome"],
            "oracle_verdict": self.oracle_verdict.to_json_dict()["outcome"],
            "agree": self.agree,
            "exactness": "exact"
            if self.theory_verdict.exact
            else {"bounded_by": self.n},
        }


@dataclass(frozen=True)
class CellResult:
    world_kind: tuple
    expected: TheoryId
    results: tuple

    def to_json_dict(self) -> dict:
        cat, regime, size, lang = self.world_kind
        return {
            "category": cat,
            "regime": regime,
            "size": "omega" if is_omega(size) else size,
            "lang": lang,
            "expected_theory": str(self.expected),
            "results": [r.to_json_dict() for r in self.results],
        }


@dataclass(frozen=True)
class TableReport:
    cells: tuple

    @property
    def total_pairs(self) -> int:
        return sum(len(c.results) for c in self.cells)

    @property
    def disagreements(self) -> list:
        return [
            (c, r) for c in self.cells for r in c.results if r.agree is False
        ]

    @property
    def skipped(self) -> list:
        return [(c, r) for c in self.cells for r in c.results if r.skipped]

    def to_json_dict(self) -> dict:
        return {
            "cells": [c.to_json_dict() for c in self.cells],
            "summary": {
                "pairs": self.total_pairs,
                "disagreements": len(self.disagreements),
                "skipped": len(self.skipped),
            },
        }

    def to_text(self) -> str:
        lines = []
        for c in self.cells:
            cat, regime, size, lang = c.world_kind
            size_s = "omega" if is_omega(size) else str(size)
            head = f"{cat:12s} {regime:4s} size={size_s:6s} {lang:10s} -> {c.expected}"
            marks = []
            for r in c.results:
                if r.skipped:
                    marks.append(f"{r.name}:skip")
                else:
                    inout = "+" if r.theory_verdict.in_validities else "-"
                    marks.append(f"{r.name}:{inout}{'' if r.agree else '!DISAGREE'}")
            lines.append(head + " | " + " ".join(marks))
        d = len(self.disagreements)
        lines.append(
            f"pairs={self.total_pairs} disagreements={d} skipped={len(self.skipped)}"
        )
        return "\n".join(lines)


def table_cells(sizes=(0, 1, 2, 3, 4), include_omega: bool = True):
    """Every classification-table cell at the given finite sizes plus omega."""
    cells = []
    for mor in Morphisms:
        for regime in Regime:
            if regime is Regime.INF:
                all_sizes = [OMEGA] if include_omega else []
            elif regime is Regime.FIN:
                all_sizes = list(sizes)
            else:
                all_sizes = list(sizes) + ([OMEGA] if include_omega else [])
            for size in all_sizes:
                for lang in (Lang.SENTENTIAL, Lang.FORMULAIC):
                    cells.append((CategoryKind(mor, regime), size, lang))
    return cells


def evaluate_cell(
    cell, corpus, bound: int = 5, slack: int = 4, max_conflicts: int = 200_000
) -> CellResult:
    cat, size, lang = cell
    theory = expected_theory(make_world(cat, size, lang, named=0 if lang is Lang.SENTENTIAL else None))
    results = []
    for name, f in corpus:
        named = _named_for(cat, size, lang, name)
        w = WorldSpec(cat, size, lang, named)
        n = oracle_threshold(w, slack)
        try:
            tv = decide_in_theory(theory, f, bound=bound, max_conflicts=max_conflicts)
            ov = oracle_decide(w, f, n, max_conflicts=max_conflicts)
            results.append(FormulaResult(name, tv, ov, named, n))
        except SearchBudgetExceeded as e:
            results.append(FormulaResult(name, None, None, named, n, skipped=str(e)))
    world_kind = (cat.morphisms.value, cat.regime.value, size, lang.value)
    return CellResult(world_kind, theory, tuple(results))


def reproduce_table(
    corpus=None,
    sizes=(0, 1, 2, 3, 4),
    include_omega: bool = True,
    bound: int = 5,
    slack: int = 4,
    max_conflicts: int = 200_000,
    workers: int = 0,
) -> TableReport:
    """Compare decide_in_theory(expected_theory(cell)) with oracle_decide on
    every cell and corpus formula; disagreements are build-failing, budget
    blowups are reported as skipped, never guessed."""
    corpus = list(corpus) if corpus is not None else default_corpus()
    cells = table_cells(sizes, include_omega)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [
                ex.submit(evaluate_cell, cell, corpus, bound, slack, max_conflicts)
                for cell in cells
            ]
            out = tuple(f.result() for f in futs)
    else:
        out = tuple(
            evaluate_cell(cell, corpus, bound, slack, max_conflicts) for cell in cells
        )
    return TableReport(out)

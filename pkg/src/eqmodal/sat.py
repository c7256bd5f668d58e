"""A small deterministic CDCL SAT solver.

Used by the frame engine to search for falsifying valuations: frame
validity questions become satisfiability of the Tseitin encoding of "the
formula is false somewhere".  Instances are tiny (thousands of variables);
the solver does watched-literal propagation, first-UIP clause learning and
backjumping, no restarts, and breaks all ties by variable index so results
are reproducible.
"""

from __future__ import annotations


class SearchBudgetExceeded(RuntimeError):
    """The conflict budget ran out before the search finished."""


def solve(num_vars: int, clauses, max_conflicts: int = 200_000):
    """Return a model as a list of bools (index 0 unused) or None if UNSAT.

    Literals are nonzero ints: +v / -v for variable v in 1..num_vars.
    """
    cls: list[list[int]] = []
    for c in clauses:
        c = sorted(set(c), key=abs)
        if any(-lit in c for lit in c):
            continue
        if not c:
            return None
        cls.append(list(c))

    assign = [0] * (num_vars + 1)  # 0 unknown, 1 true, -1 false
    level = [0] * (num_vars + 1)
    reason: list = [None] * (num_vars + 1)
    trail: list[int] = []
    trail_lim: list[int] = []
    watches: dict[int, list[int]] = {}
    activity = [0.0] * (num_vars + 1)
    var_inc = 1.0

    def watch(lit: int, ci: int):
        watches.setdefault(lit, []).append(ci)

    units = []
    for ci, c in enumerate(cls):
        if len(c) == 1:
            units.append(c[0])
        else:
            watch(c[0], ci)
            watch(c[1], ci)

    def value(lit: int) -> int:
        v = assign[abs(lit)]
        return v if lit > 0 else -v

    def enqueue(lit: int, why) -> bool:
        v = abs(lit)
        if assign[v] != 0:
            return value(lit) > 0
        assign[v] = 1 if lit > 0 else -1
        level[v] = len(trail_lim)
        reason[v] = why
        trail.append(lit)
        return True

    def propagate():
        """Return a conflicting clause index or None."""
        nonlocal head
        while head < len(trail):
            lit = trail[head]
            head += 1
            false_lit = -lit
            wl = watches.get(false_lit, [])
            j = 0
            while j < len(wl):
                ci = wl[j]
                c = cls[ci]
                # ensure c[0]/c[1] are the watched literals, false_lit at c[1]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if value(c[0]) > 0:
                    j += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    if value(c[k]) >= 0:
                        c[1], c[k] = c[k], c[1]
                        watch(c[1], ci)
                        wl[j] = wl[-1]
                        wl.pop()
                        moved = True
                        break
                if moved:
                    continue
                if value(c[0]) < 0:
                    return ci
                enqueue(c[0], ci)
                j += 1
        return None

    head = 0

    for lit in units:
        if not enqueue(lit, None):
            return None
    if propagate() is not None:
        return None

    def bump(v: int):
        nonlocal var_inc
        activity[v] += var_inc

    def decay():
        nonlocal var_inc
        var_inc *= 1.052
        if var_inc > 1e100:
            for v in range(1, num_vars + 1):
                activity[v] *= 1e-100
            var_inc = 1.0

    def analyze(conflict_ci: int):
        """First-UIP learning; returns (learned clause, backjump level)."""
        learned: list[int] = []
        seen = [False] * (num_vars + 1)
        counter = 0
        lit = None
        c = cls[conflict_ci]
        idx = len(trail) - 1
        while True:
            for q in c:
                v = abs(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    bump(v)
                    if level[v] == len(trail_lim):
                        counter += 1
                    else:
                        learned.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            lit = trail[idx]
            v = abs(lit)
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            c = cls[reason[v]]
            c = [q for q in c if abs(q) != v]
            idx -= 1
        learned.append(-lit)
        if len(learned) == 1:
            return learned, 0
        bj = max(level[abs(q)] for q in learned[:-1])
        return learned, bj

    def backjump(target: int):
        nonlocal head
        while len(trail_lim) > target:
            mark = trail_lim.pop()
            while len(trail) > mark:
                lit = trail.pop()
                v = abs(lit)
                assign[v] = 0
                reason[v] = None
        head = min(head, len(trail))

    conflicts = 0
    order = sorted(range(1, num_vars + 1))
    while True:
        ci = propagate()
        if ci is not None:
            conflicts += 1
            if conflicts > max_conflicts:
                raise SearchBudgetExceeded(f"exceeded {max_conflicts} conflicts")
            if not trail_lim:
                return None
            learned, bj = analyze(ci)
            backjump(bj)
            learned.sort(key=lambda q: -level[abs(q)])
            cls.append(learned)
            nci = len(cls) - 1
            if len(learned) > 1:
                watch(learned[0], nci)
                watch(learned[1], nci)
            enqueue(learned[0], nci if len(learned) > 1 else None)
            decay()
            continue
        # choose a decision variable: highest activity, then lowest index
        best = 0
        best_act = -1.0
        for v in order:
            if assign[v] == 0 and activity[v] > best_act:
                best = v
                best_act = activity[v]
        if best == 0:
            return [False] + [assign[v] > 0 for v in range(1, num_vars + 1)]
        trail_lim.append(len(trail))
        enqueue(-best, None)  # try False first

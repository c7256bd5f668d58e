"""ASTs, parser, and printer for the modal equality language and the
propositional modal language.

Equality formulas use indexed variables (x0, x1, ...) so that partition
bookkeeping is positional.  Exact-cardinality sentences ("card = k") are a
primitive constructor; the sugared forms card >= k / card <= k and the pure
quantifier forms exist only for cross-validation.  Binder normalization
happens at parse time: after it, no binder shadows an enclosing binder or a
free variable of the whole formula.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache


class Formula:
    """Base class for both languages; concrete nodes are frozen dataclasses."""

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    i: int
    j: int


@dataclass(frozen=True)
class CardExact(Formula):
    k: int


@dataclass(frozen=True)
class Var(Formula):
    p: int


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    v: int
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    v: int
    body: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


_BINARY = (And, Or, Implies, Iff)
_QUANT = (Exists, Forall)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, (Not, Diamond, Box) + _QUANT):
        return (f.body,)
    return ()


def subformulas(f: Formula):
    """All subformulas, each distinct node once, parents after children."""
    seen = set()
    out = []

    def walk(g: Formula):
        if g in seen:
            return
        for c in children(g):
            walk(c)
        seen.add(g)
        out.append(g)

    walk(f)
    return out


@lru_cache(maxsize=None)
def free_vars(f: Formula) -> frozenset[int]:
    if isinstance(f, Atom):
        return frozenset((f.i, f.j))
    if isinstance(f, (CardExact, Var)):
        return frozenset()
    if isinstance(f, _QUANT):
        return free_vars(f.body) - {f.v}
    return frozenset().union(*(free_vars(c) for c in children(f)))


def all_var_indices(f: Formula) -> frozenset[int]:
    """Every variable index occurring in f, free or bound."""
    if isinstance(f, Atom):
        return frozenset((f.i, f.j))
    if isinstance(f, _QUANT):
        return all_var_indices(f.body) | {f.v}
    return frozenset().union(frozenset(), *(all_var_indices(c) for c in children(f)))


def max_card_index(f: Formula) -> int:
    """Largest k in any CardExact; 0 when there is none."""
    if isinstance(f, CardExact):
        return f.k
    return max((max_card_index(c) for c in children(f)), default=0)


def prop_vars(f: Formula) -> frozenset[int]:
    if isinstance(f, Var):
        return frozenset((f.p,))
    return frozenset().union(frozenset(), *(prop_vars(c) for c in children(f)))


def modal_depth(f: Formula) -> int:
    inner = max((modal_depth(c) for c in children(f)), default=0)
    return inner + 1 if isinstance(f, (Diamond, Box)) else inner


def is_prop_formula(f: Formula) -> bool:
    if isinstance(f, (Atom, CardExact) + _QUANT):
        return False
    if isinstance(f, Var):
        return True
    return all(is_prop_formula(c) for c in children(f))


def is_eq_formula(f: Formula) -> bool:
    if isinstance(f, Var):
        return False
    return all(is_eq_formula(c) for c in children(f))


# ---------------------------------------------------------------------------
# binder normalization


def normalize_binders(f: Formula) -> Formula:
    """Rename bound variables so no binder clashes with an enclosing binder or
    any free variable of the whole formula.  Idempotent; occurrences bind to
    the nearest enclosing binder with their index.
    """
    global_free = free_vars(f)

    def fresh(reserved: frozenset[int], want: int) -> int:
        if want >= 0 and want not in reserved:
            return want
        k = 0
        while k in reserved:
            k += 1
        return k

    def walk(g: Formula, env: dict[int, int], reserved: frozenset[int]) -> Formula:
        if isinstance(g, Atom):
            return Atom(env.get(g.i, g.i), env.get(g.j, g.j))
        if isinstance(g, (CardExact, Var)):
            return g
        if isinstance(g, _QUANT):
            assigned = fresh(reserved, g.v)
            env2 = dict(env)
            env2[g.v] = assigned
            body = walk(g.body, env2, reserved | {assigned})
            return type(g)(assigned, body)
        parts = tuple(walk(c, env, reserved) for c in children(g))
        return type(g)(*parts)

    return walk(f, {}, frozenset(global_free))


# ---------------------------------------------------------------------------
# printer


def print_formula(f: Formula) -> str:
    """Canonical text; binary connectives fully parenthesized."""
    if isinstance(f, Atom):
        return f"x{f.i} = x{f.j}"
    if isinstance(f, CardExact):
        return f"card = {f.k}"
    if isinstance(f, Var):
        return f"p{f.p}"
    if isinstance(f, Not):
        return f"~{print_formula(f.body)}"
    if isinstance(f, Diamond):
        return f"<> {print_formula(f.body)}"
    if isinstance(f, Box):
        return f"[] {print_formula(f.body)}"
    if isinstance(f, Exists):
        return f"E x{f.v} . {print_formula(f.body)}"
    if isinstance(f, Forall):
        return f"A x{f.v} . {print_formula(f.body)}"
    op = {And: "&", Or: "|", Implies: "->", Iff: "<->"}[type(f)]
    return f"({print_formula(f.left)} {op} {print_formula(f.right)})"


# ---------------------------------------------------------------------------
# parser


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<sym><->|->|!=|>=|<=|<>|\[\]|[~&|().=])|(?P<nat>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            skipped = len(text) - len(stripped) - pos
            _advance = text[pos : pos + skipped]
            line += _advance.count("\n")
            col = skipped - _advance.rfind("\n") if "\n" in _advance else col + skipped
            raise ParseError(f"unexpected character {stripped[0]!r}", line, col)
        ws = text[pos : m.start(1) if m.group("sym") else m.start(m.lastgroup)]
        line += ws.count("\n")
        col = len(ws) - ws.rfind("\n") if "\n" in ws else col + len(ws)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, line, col))
        col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


# Parsing builds a raw tree in which every binder carries a unique negative
# placeholder index plus the index it asked for; normalization then assigns
# final indices (keeping x<k> binder names when they do not clash).


@dataclass(frozen=True)
class _RawBinder(Formula):
    universal: bool
    placeholder: int
    requested: int
    body: Formula


class _Parser:
    def __init__(self, text: str, which: str):
        if which not in ("eq", "prop"):
            raise ValueError(f"unknown language {which!r}")
        self.tokens = _tokenize(text)
        self.pos = 0
        self.which = which
        self.scopes: list[dict[str, int]] = []
        self.next_placeholder = -1

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, _, line, col = self.peek()
        raise ParseError(message, line, col)

    def expect(self, value: str):
        kind, text, _, _ = self.peek()
        if text != value:
            self.error(f"expected {value!r}, found {text or 'end of input'!r}")
        return self.next()

    def parse(self) -> Formula:
        f = self.formula()
        if self.peek()[0] != "eof":
            self.error(f"trailing input {self.peek()[1]!r}")
        return f

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        parts = [self.imp()]
        while self.peek()[1] == "<->":
            self.next()
            parts.append(self.imp())
        return _fold_right(Iff, parts)

    def imp(self) -> Formula:
        parts = [self.or_()]
        while self.peek()[1] == "->":
            self.next()
            parts.append(self.or_())
        return _fold_right(Implies, parts)

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.peek()[1] == "|":
            self.next()
            parts.append(self.and_())
        return _fold_right(Or, parts)

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.peek()[1] == "&":
            self.next()
            parts.append(self.unary())
        return _fold_right(And, parts)

    def unary(self) -> Formula:
        kind, text, _, _ = self.peek()
        if text == "~":
            self.next()
            return Not(self.unary())
        if text == "<>":
            self.next()
            return Diamond(self.unary())
        if text == "[]":
            self.next()
            return Box(self.unary())
        if text in ("E", "A"):
            if self.which == "prop":
                self.error("quantifiers are not part of the propositional language")
            self.next()
            names = []
            while self.peek()[0] == "ident":
                names.append(self.next()[1])
            if not names:
                self.error("expected variable name after quantifier")
            self.expect(".")
            scope: dict[str, int] = {}
            binders = []
            for name in names:
                placeholder = self.next_placeholder
                self.next_placeholder -= 1
                requested = _canonical_index(name)
                scope = dict(scope)
                scope[name] = placeholder
                self.scopes.append(scope)
                binders.append((placeholder, requested))
            body = self.unary()
            for _ in names:
                self.scopes.pop()
            for placeholder, requested in reversed(binders):
                body = _RawBinder(text == "A", placeholder, requested, body)
            return body
        return self.atom()

    def atom(self) -> Formula:
        kind, text, _, _ = self.peek()
        if text == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if self.which == "prop":
            if kind == "ident" and re.fullmatch(r"p\d+", text):
                self.next()
                return Var(int(text[1:]))
            self.error(f"expected proposition p<n>, found {text or 'end of input'!r}")
        if text == "card":
            self.next()
            op = self.next()
            if op[1] not in ("=", ">=", "<="):
                self.error("expected =, >= or <= after card")
            k = self.nat()
            if op[1] == "=":
                return CardExact(k)
            kind_name = "at_least" if op[1] == ">=" else "at_most"
            return expand_sigma(kind_name, k)
        if kind != "ident":
            self.error(f"expected atom, found {text or 'end of input'!r}")
        left = self.var_index(self.next())
        op = self.next()
        if op[1] not in ("=", "!="):
            raise ParseError("expected = or != between variables", op[2], op[3])
        tok = self.peek()
        if tok[0] != "ident":
            self.error("expected variable name")
        right = self.var_index(self.next())
        atom = Atom(left, right)
        return Not(atom) if op[1] == "!=" else atom

    def nat(self) -> int:
        kind, text, _, _ = self.peek()
        if kind != "nat":
            self.error(f"expected number, found {text or 'end of input'!r}")
        self.next()
        return int(text)

    def var_index(self, token) -> int:
        _, name, line, col = token
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        idx = _canonical_index(name)
        if idx < 0:
            raise ParseError(f"unbound variable name {name!r}", line, col)
        return idx


def _canonical_index(name: str) -> int:
    m = re.fullmatch(r"x(\d+)", name)
    return int(m.group(1)) if m else -1


def _fold_right(cls, parts):
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = cls(p, out)
    return out


def _resolve_binders(f: Formula) -> Formula:
    """Replace _RawBinder placeholders with concrete indices, preferring the
    requested index, then run the standard normalization."""
    global_free = free_vars_raw(f)

    def walk(g: Formula, env: dict[int, int], reserved: frozenset[int]) -> Formula:
        if isinstance(g, _RawBinder):
            want = g.requested
            assigned = want if want >= 0 and want not in reserved else _smallest_free(reserved)
            env2 = dict(env)
            env2[g.placeholder] = assigned
            body = walk(g.body, env2, reserved | {assigned})
            return (Forall if g.universal else Exists)(assigned, body)
        if isinstance(g, Atom):
            return Atom(env.get(g.i, g.i), env.get(g.j, g.j))
        if isinstance(g, (CardExact, Var)):
            return g
        parts = tuple(walk(c, env, reserved) for c in children(g))
        return type(g)(*parts)

    return walk(f, {}, frozenset(global_free))


def _smallest_free(reserved: frozenset[int]) -> int:
    k = 0
    while k in reserved:
        k += 1
    return k


def free_vars_raw(f: Formula) -> frozenset[int]:
    """Free nonnegative indices of a raw tree (placeholders are negative)."""
    if isinstance(f, Atom):
        return frozenset(i for i in (f.i, f.j) if i >= 0)
    if isinstance(f, (CardExact, Var)):
        return frozenset()
    if isinstance(f, _RawBinder):
        return free_vars_raw(f.body)
    return frozenset().union(frozenset(), *(free_vars_raw(c) for c in children(f)))


def parse(text: str, which: str = "eq") -> Formula:
    """Parse a formula; all sugar is expanded and binders normalized.

    Free variables must use canonical names x0, x1, ...; bound variables may
    use any name.
    """
    f = _Parser(text, which).parse()
    if which == "eq":
        f = normalize_binders(_resolve_binders(f))
    return f


# ---------------------------------------------------------------------------
# structural operations


def erase_modalities(f: Formula) -> Formula:
    """Delete every Diamond/Box, pushing through connectives and quantifiers."""
    if isinstance(f, (Diamond, Box)):
        return erase_modalities(f.body)
    if isinstance(f, (Atom, CardExact, Var)):
        return f
    if isinstance(f, _QUANT):
        return type(f)(f.v, erase_modalities(f.body))
    return type(f)(*(erase_modalities(c) for c in children(f)))


def expand_sigma(kind: str, k: int, as_quantifiers: bool = False) -> Formula:
    """Size-comparison sentences: exact / at_least / at_most k elements.

    The primitive form is a Boolean combination of CardExact; the quantifier
    form uses pairwise-distinct witnesses (plus a covering clause for
    exactness).  Both evaluate identically at every world.
    """
    if k < 0:
        raise ValueError("negative cardinality")
    if kind not in ("exact", "at_least", "at_most"):
        raise ValueError(f"unknown sigma kind {kind!r}")
    if not as_quantifiers:
        if kind == "exact":
            return CardExact(k)
        if kind == "at_least":
            if k == 0:
                return Or(CardExact(0), Not(CardExact(0)))
            return _fold_right(And, [Not(CardExact(n)) for n in range(k)])
        return _fold_right(Or, [CardExact(n) for n in range(k + 1)])

    if kind == "at_least":
        if k == 0:
            return Forall(0, Atom(0, 0))
        return _exists_distinct(k, None)
    if kind == "exact":
        if k == 0:
            return Forall(0, Not(Atom(0, 0)))
        cover = Forall(k, _fold_right(Or, [Atom(k, i) for i in range(k)]))
        return _exists_distinct(k, cover)
    # at_most: any k+1 elements contain a repeat
    if k == 0:
        return Forall(0, Not(Atom(0, 0)))
    pairs = [Atom(i, j) for i in range(k) for j in range(i + 1, k + 1)]
    return _forall_prefix(k + 1, _fold_right(Or, pairs))


def _exists_distinct(k: int, extra: Formula | None) -> Formula:
    distinct = [Not(Atom(i, j)) for i in range(k) for j in range(i + 1, k)]
    body_parts = distinct + ([extra] if extra is not None else [])
    body = _fold_right(And, body_parts) if body_parts else Atom(0, 0)
    out = body
    for v in reversed(range(k)):
        out = Exists(v, out)
    return out


def _forall_prefix(k: int, body: Formula) -> Formula:
    out = body
    for v in reversed(range(k)):
        out = Forall(v, out)
    return out


def substitute_props(f: Formula, mapping: dict[int, Formula]) -> Formula:
    """Instantiate a propositional formula: Var(p) -> mapping[p]."""
    if isinstance(f, Var):
        try:
            return mapping[f.p]
        except KeyError:
            raise ValueError(f"no substitution for p{f.p}") from None
    if isinstance(f, (Atom, CardExact)):
        return f
    if isinstance(f, _QUANT):
        return type(f)(f.v, substitute_props(f.body, mapping))
    return type(f)(*(substitute_props(c, mapping) for c in children(f)))


FALSUM = And(CardExact(0), Not(CardExact(0)))

"""Expression core: sorts, terms, substitution, and metavariable plumbing.

Terms live in a many-sorted first-order language with exact rational
literals (Nat/Int/Rat), opaque symbolic reals, sets with set-builder
notation, and binders.  Bound variables use de Bruijn indices internally
(locally nameless), so alpha-equivalence is structural equality modulo
the display names kept on binders for printing.

All values are immutable; construction goes through the `mk_*` smart
constructors, which enforce well-sortedness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union


class ExprError(Exception):
    """Base class for expression-level failures."""


class SortError(ExprError):
    """An operator was applied to arguments of the wrong sort."""


class SubstitutionSortError(SortError):
    """Replacement term does not match the substituted variable's sort."""


class OccursCheckError(ExprError):
    """A metavariable assignment would be cyclic."""


# ---------------------------------------------------------------------------
# Sorts


@dataclass(frozen=True)
class Sort:
    kind: str
    args: tuple["Sort", ...] = ()

    def __str__(self) -> str:
        if self.kind == "Set":
            return f"Set {_sort_atom_str(self.args[0])}"
        if self.kind == "Fn":
            return f"{_sort_atom_str(self.args[0])} -> {self.args[1]}"
        return self.kind


def _sort_atom_str(s: Sort) -> str:
    return f"({s})" if s.args else str(s)


NAT = Sort("Nat")
INT = Sort("Int")
RAT = Sort("Rat")
REAL = Sort("Real")
BOOL = Sort("Bool")
PROP = Sort("Prop")

ATOMIC_SORTS = {"Nat": NAT, "Int": INT, "Rat": RAT, "Real": REAL,
                "Bool": BOOL, "Prop": PROP}

NUMERIC = (NAT, INT, RAT, REAL)
EXACT_NUMERIC = (NAT, INT, RAT)   # literal arithmetic folds here, never on Real


def set_of(elem: Sort) -> Sort:
    return Sort("Set", (elem,))


def fn(dom: Sort, cod: Sort) -> Sort:
    return Sort("Fn", (dom, cod))


# ---------------------------------------------------------------------------
# Terms

TermLike = Union["Term"]


@dataclass(frozen=True)
class Term:
    sort: Sort


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class BVar(Term):
    idx: int


@dataclass(frozen=True)
class Meta(Term):
    mid: str


@dataclass(frozen=True)
class Lit(Term):
    val: Fraction


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Binder(Term):
    kind: str          # forall | exists | lam | setb
    var: str           # display name only
    vsort: Sort
    body: Term


@dataclass(frozen=True)
class Conn(Term):
    op: str            # and | or | not | imp | iff | true | false
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Atom(Term):
    rel: str           # eq | ne | lt | le | mem | dvd | even | odd | prime
    args: tuple[Term, ...]


# ---------------------------------------------------------------------------
# Operator signatures.  `None` entries are filled per-instance by the smart
# constructors (polymorphic operators).

ARITH_OPS = {"add", "sub", "mul", "div", "mod", "neg", "abs", "pow"}
REAL_FNS = {"sqrt", "log"}
SET_OPS = {"union", "inter", "setlit", "Iio", "Ioi", "Icc", "Ico", "Ioc",
           "range", "divisors", "card", "sum"}

CONN_ARITY = {"and": 2, "or": 2, "imp": 2, "iff": 2, "not": 1,
              "true": 0, "false": 0}


def mk_var(name: str, sort: Sort) -> Var:
    return Var(sort, name)


def mk_meta(mid: str, sort: Sort) -> Meta:
    return Meta(sort, mid)


def mk_lit(val, sort: Sort = INT) -> Lit:
    v = Fraction(val)
    if sort == NAT and (v < 0 or v.denominator != 1):
        raise SortError(f"literal {v} is not a Nat")
    if sort == INT and v.denominator != 1:
        raise SortError(f"literal {v} is not an Int")
    if sort not in NUMERIC:
        raise SortError(f"literal of non-numeric sort {sort}")
    return Lit(sort, v)


def mk_app(op: str, args: tuple[Term, ...]) -> App:
    args = tuple(args)
    if op in ("add", "sub", "mul"):
        s = _same_numeric(op, args, 2)
        return App(s, op, args)
    if op == "neg":
        s = _same_numeric(op, args, 1)
        if s == NAT:
            raise SortError("neg is not defined on Nat")
        if isinstance(args[0], Lit):
            # negated numerals are literals, keeping printing injective
            return Lit(s, -args[0].val)
        return App(s, op, args)
    if op == "abs":
        s = _same_numeric(op, args, 1)
        return App(s, op, args)
    if op == "div":
        s = _same_numeric(op, args, 2)
        return App(s, op, args)
    if op == "mod":
        s = _same_numeric(op, args, 2)
        if s not in (NAT, INT):
            raise SortError("mod requires Nat or Int arguments")
        return App(s, op, args)
    if op == "pow":
        base, exp = _arity(op, args, 2)
        if base.sort == REAL:
            if exp.sort != REAL:
                raise SortError("Real pow requires a Real exponent")
            return App(REAL, op, args)
        if base.sort in (NAT, INT, RAT) and exp.sort == NAT:
            return App(base.sort, op, args)
        raise SortError(f"pow of {base.sort} by {exp.sort}")
    if op in REAL_FNS:
        (a,) = _arity(op, args, 1)
        if a.sort != REAL:
            raise SortError(f"{op} requires a Real argument")
        return App(REAL, op, args)
    if op == "pi":
        _arity(op, args, 0)
        return App(REAL, op, args)
    if op == "rat":
        (a,) = _arity(op, args, 1)
        if a.sort not in (NAT, INT):
            raise SortError("rat coerces Nat/Int only")
        return App(RAT, op, args)
    if op in ("union", "inter"):
        a, b = _arity(op, args, 2)
        if a.sort != b.sort or a.sort.kind != "Set":
            raise SortError(f"{op} requires two sets of the same sort")
        return App(a.sort, op, args)
    if op == "setlit":
        if not args:
            raise SortError("empty set literal is not supported")
        elem = args[0].sort
        if any(a.sort != elem for a in args):
            raise SortError("set literal elements must share one sort")
        return App(set_of(elem), op, args)
    if op in ("Iio", "Ioi"):
        (a,) = _arity(op, args, 1)
        if a.sort not in NUMERIC:
            raise SortError(f"{op} requires a numeric endpoint")
        return App(set_of(a.sort), op, args)
    if op in ("Icc", "Ico", "Ioc"):
        a, b = _arity(op, args, 2)
        if a.sort != b.sort or a.sort not in NUMERIC:
            raise SortError(f"{op} requires numeric endpoints of one sort")
        return App(set_of(a.sort), op, args)
    if op == "range":
        a, b = _arity(op, args, 2)
        if a.sort != b.sort or a.sort not in (NAT, INT):
            raise SortError("range requires Nat or Int endpoints")
        return App(set_of(a.sort), op, args)
    if op == "divisors":
        (a,) = _arity(op, args, 1)
        if a.sort != NAT:
            raise SortError("divisors requires a Nat argument")
        return App(set_of(NAT), op, args)
    if op == "card":
        (a,) = _arity(op, args, 1)
        if a.sort.kind != "Set":
            raise SortError("card requires a set argument")
        return App(NAT, op, args)
    if op == "sum":
        s, f = _arity(op, args, 2)
        if s.sort.kind != "Set" or f.sort.kind != "Fn" \
                or f.sort.args[0] != s.sort.args[0]:
            raise SortError("sum requires a set and a function on its elements")
        if f.sort.args[1] not in NUMERIC:
            raise SortError("sum body must be numeric")
        return App(f.sort.args[1], op, args)
    if op == "@":
        f, a = _arity(op, args, 2)
        if f.sort.kind != "Fn" or f.sort.args[0] != a.sort:
            raise SortError(f"cannot apply {f.sort} to {a.sort}")
        return App(f.sort.args[1], op, args)
    raise SortError(f"unknown operator {op!r}")


def _arity(op: str, args: tuple[Term, ...], n: int) -> tuple[Term, ...]:
    if len(args) != n:
        raise SortError(f"{op} expects {n} argument(s), got {len(args)}")
    return args


def _same_numeric(op: str, args: tuple[Term, ...], n: int) -> Sort:
    _arity(op, args, n)
    s = args[0].sort
    if s not in NUMERIC or any(a.sort != s for a in args):
        raise SortError(
            f"{op} requires numeric arguments of one sort, got "
            f"{[str(a.sort) for a in args]}")
    return s


def mk_conn(op: str, args: tuple[Term, ...]) -> Conn:
    args = tuple(args)
    if op not in CONN_ARITY:
        raise SortError(f"unknown connective {op!r}")
    _arity(op, args, CONN_ARITY[op])
    for a in args:
        if a.sort != PROP:
            raise SortError(f"{op} requires Prop arguments, got {a.sort}")
    return Conn(PROP, op, args)


TRUE = mk_conn("true", ())
FALSE = mk_conn("false", ())


def mk_atom(rel: str, args: tuple[Term, ...]) -> Atom:
    args = tuple(args)
    if rel in ("eq", "ne"):
        a, b = _arity(rel, args, 2)
        if a.sort != b.sort:
            raise SortError(f"{rel} on {a.sort} vs {b.sort}")
        if a.sort == PROP:
            raise SortError("use iff to compare propositions")
        return Atom(PROP, rel, args)
    if rel in ("lt", "le"):
        _same_numeric(rel, args, 2)
        return Atom(PROP, rel, args)
    if rel == "mem":
        x, s = _arity(rel, args, 2)
        if s.sort.kind != "Set" or s.sort.args[0] != x.sort:
            raise SortError(f"mem of {x.sort} in {s.sort}")
        return Atom(PROP, rel, args)
    if rel == "dvd":
        a, b = _arity(rel, args, 2)
        if a.sort != b.sort or a.sort not in (NAT, INT):
            raise SortError("dvd requires Nat or Int arguments")
        return Atom(PROP, rel, args)
    if rel in ("even", "odd", "prime"):
        (a,) = _arity(rel, args, 1)
        if a.sort not in (NAT, INT):
            raise SortError(f"{rel} requires a Nat or Int argument")
        return Atom(PROP, rel, args)
    raise SortError(f"unknown relation {rel!r}")


def mk_binder(kind: str, var: str, vsort: Sort, body: Term) -> Binder:
    if kind in ("forall", "exists", "setb"):
        if body.sort != PROP:
            raise SortError(f"{kind} body must be Prop, got {body.sort}")
        sort = PROP if kind in ("forall", "exists") else set_of(vsort)
    elif kind == "lam":
        sort = fn(vsort, body.sort)
    else:
        raise SortError(f"unknown binder {kind!r}")
    return Binder(sort, kind, var, vsort, body)


# ---------------------------------------------------------------------------
# Traversal and de Bruijn machinery


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (App, Conn, Atom)):
        return t.args
    if isinstance(t, Binder):
        return (t.body,)
    return ()


def _rebuild(t: Term, args: tuple[Term, ...]) -> Term:
    if isinstance(t, App):
        return mk_app(t.op, args)
    if isinstance(t, Conn):
        return mk_conn(t.op, args)
    if isinstance(t, Atom):
        return mk_atom(t.rel, args)
    if isinstance(t, Binder):
        return mk_binder(t.kind, t.var, t.vsort, args[0])
    return t


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    """Shift loose bound indices >= cutoff by `by`."""
    if isinstance(t, BVar):
        return BVar(t.sort, t.idx + by) if t.idx >= cutoff else t
    if isinstance(t, Binder):
        return _rebuild(t, (shift(t.body, by, cutoff + 1),))
    kids = children(t)
    if not kids:
        return t
    return _rebuild(t, tuple(shift(k, by, cutoff) for k in kids))


def instantiate_bvar(body: Term, repl: Term, depth: int = 0) -> Term:
    """Replace BVar(depth) in `body` by `repl` (shifted under binders)."""
    if isinstance(body, BVar):
        if body.idx == depth:
            return shift(repl, depth)
        if body.idx > depth:
            return BVar(body.sort, body.idx - 1)
        return body
    if isinstance(body, Binder):
        return _rebuild(body, (instantiate_bvar(body.body, repl, depth + 1),))
    kids = children(body)
    if not kids:
        return body
    return _rebuild(body, tuple(instantiate_bvar(k, repl, depth) for k in kids))


def abstract_var(t: Term, name: str, depth: int = 0) -> Term:
    """Turn free occurrences of Var(name) into BVar(depth)."""
    if isinstance(t, Var) and t.name == name:
        return BVar(t.sort, depth)
    if isinstance(t, Binder):
        return _rebuild(t, (abstract_var(t.body, name, depth + 1),))
    kids = children(t)
    if not kids:
        return t
    return _rebuild(t, tuple(abstract_var(k, name, depth) for k in kids))


def open_binder(b: Binder, repl: Term) -> Term:
    if repl.sort != b.vsort:
        raise SortError(f"binder over {b.vsort} opened with {repl.sort}")
    return instantiate_bvar(b.body, repl)


def bind(kind: str, name: str, vsort: Sort, body_open: Term) -> Binder:
    """Build a binder from a body written with a free Var(name)."""
    return mk_binder(kind, name, vsort, abstract_var(body_open, name))


def has_loose_bvars(t: Term, depth: int = 0) -> bool:
    if isinstance(t, BVar):
        return t.idx >= depth
    if isinstance(t, Binder):
        return has_loose_bvars(t.body, depth + 1)
    return any(has_loose_bvars(k, depth) for k in children(t))


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for k in children(t):
        yield from subterms(k)


# ---------------------------------------------------------------------------
# Term-level operations


def substitute(t: Term, name: str, repl: Term) -> Term:
    """Capture-avoiding substitution of `repl` for the free variable `name`."""
    if isinstance(t, Var) and t.name == name:
        if repl.sort != t.sort:
            raise SubstitutionSortError(
                f"substituting {repl.sort} for {name} : {t.sort}")
        return repl
    if isinstance(t, Binder):
        # Bound occurrences are BVars, so shadowing cannot capture; the
        # replacement's own free vars stay free because they are Vars too.
        return _rebuild(t, (substitute(t.body, name, repl),))
    kids = children(t)
    if not kids:
        return t
    return _rebuild(t, tuple(substitute(k, name, repl) for k in kids))


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()
    for s in subterms(t):
        if isinstance(s, Var):
            out.add(s.name)
    return out


def metavars_of(t: Term) -> set[str]:
    out: set[str] = set()
    for s in subterms(t):
        if isinstance(s, Meta):
            out.add(s.mid)
    return out


def syntactic_eq(t1: Term, t2: Term) -> bool:
    """Structural identity of parsed trees, sensitive to bound names."""
    return t1 == t2


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Structural identity ignoring binder display names."""
    if type(t1) is not type(t2) or t1.sort != t2.sort:
        return False
    if isinstance(t1, Binder):
        return (t1.kind == t2.kind and t1.vsort == t2.vsort
                and alpha_eq(t1.body, t2.body))
    if isinstance(t1, App):
        return t1.op == t2.op and _alpha_all(t1.args, t2.args)
    if isinstance(t1, Conn):
        return t1.op == t2.op and _alpha_all(t1.args, t2.args)
    if isinstance(t1, Atom):
        return t1.rel == t2.rel and _alpha_all(t1.args, t2.args)
    return t1 == t2


def _alpha_all(xs: tuple[Term, ...], ys: tuple[Term, ...]) -> bool:
    return len(xs) == len(ys) and all(alpha_eq(a, b) for a, b in zip(xs, ys))


def instantiate_metas(t: Term, asg: dict[str, Term]) -> Term:
    """Replace assigned metavariables, transitively; unassigned stay."""
    _check_acyclic(asg)
    return _inst(t, asg)


def _inst(t: Term, asg: dict[str, Term]) -> Term:
    if isinstance(t, Meta):
        if t.mid in asg:
            val = asg[t.mid]
            if val.sort != t.sort:
                raise SortError(
                    f"assignment for ?{t.mid} has sort {val.sort}, "
                    f"expected {t.sort}")
            return _inst(val, asg)
        return t
    kids = children(t)
    if not kids:
        return t
    if isinstance(t, Binder):
        return _rebuild(t, (_inst(t.body, asg),))
    return _rebuild(t, tuple(_inst(k, asg) for k in kids))


def _check_acyclic(asg: dict[str, Term]) -> None:
    # DFS over the dependency graph mid -> metavars_of(asg[mid])
    state: dict[str, int] = {}

    def visit(mid: str) -> None:
        mark = state.get(mid, 0)
        if mark == 1:
            raise OccursCheckError(f"cyclic metavariable assignment at ?{mid}")
        if mark == 2 or mid not in asg:
            return
        state[mid] = 1
        for dep in sorted(metavars_of(asg[mid])):
            visit(dep)
        state[mid] = 2

    for m in sorted(asg):
        visit(m)


# ---------------------------------------------------------------------------
# Telescopes


@dataclass(frozen=True)
class LocalDecl:
    name: str
    sort: Sort
    prop: Optional[Term] = None    # set for hypotheses; sort is then Prop
    value: Optional[Term] = None   # local definition

    def __post_init__(self):
        if self.prop is not None and self.sort != PROP:
            raise SortError(f"hypothesis {self.name} must have sort Prop")
        if self.value is not None and self.value.sort != self.sort:
            raise SortError(f"definition {self.name} has mismatched sort")


@dataclass(frozen=True)
class Telescope:
    decls: tuple[LocalDecl, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        avail: set[str] = set()
        for d in self.decls:
            if d.name in seen:
                raise ExprError(f"duplicate declaration {d.name!r}")
            for t in (d.prop, d.value):
                if t is not None and not free_vars(t) <= avail:
                    raise ExprError(
                        f"declaration {d.name!r} references later names")
            seen.add(d.name)
            avail.add(d.name)

    def lookup(self, name: str) -> Optional[LocalDecl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls)

    def extended(self, decl: LocalDecl) -> "Telescope":
        return Telescope(self.decls + (decl,))

    def var_decls(self) -> tuple[LocalDecl, ...]:
        return tuple(d for d in self.decls if d.prop is None)

    def hyp_decls(self) -> tuple[LocalDecl, ...]:
        return tuple(d for d in self.decls if d.prop is not None)

    def fresh(self, base: str) -> str:
        if self.lookup(base) is None:
            return base
        i = 1
        while self.lookup(f"{base}{i}") is not None:
            i += 1
        return f"{base}{i}"

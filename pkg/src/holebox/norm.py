"""Normalization and the definitional equality level.

`normalize` performs beta-reduction, eta-contraction, unfolding of the
bundled definitions (intervals, ranges, finite-set literals, set-builder
membership), and exact evaluation of closed Nat/Int/Rat literal
arithmetic.  Symbolic Real arithmetic is never evaluated: `2 + 1 : Real`
stays an addition node, which is what keeps the definitional level
strictly weaker than the proof-automation levels on reals.

`fold_literals` is the lighter pass used after rewriting: beta plus
closed literal arithmetic, no definition unfolding.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    App, Atom, BVar, Binder, Lit, Term,
    EXACT_NUMERIC, INT, NAT, RAT, SortError,
    alpha_eq, children, instantiate_bvar, mk_atom, mk_binder,
    mk_conn, mk_lit, _rebuild,
)

# Exponent folding guards: keep closed powers exact but bounded so that
# normalization stays cheap on adversarial input.
MAX_EXP = 4096
MAX_BITS = 200_000


def nat_trunc(v: Fraction) -> Fraction:
    return v if v >= 0 else Fraction(0)


def fold_arith(op: str, args: tuple[Term, ...], sort) -> Term | None:
    """Evaluate one closed arithmetic node over Nat/Int/Rat, else None."""
    if sort not in EXACT_NUMERIC:
        return None
    if not all(isinstance(a, Lit) for a in args):
        return None
    vals = [a.val for a in args]  # type: ignore[union-attr]
    if op == "add":
        r = vals[0] + vals[1]
    elif op == "sub":
        r = vals[0] - vals[1]
        if sort == NAT:
            r = nat_trunc(r)
    elif op == "mul":
        r = vals[0] * vals[1]
    elif op == "neg":
        r = -vals[0]
    elif op == "abs":
        r = abs(vals[0])
    elif op == "div":
        if sort == RAT:
            r = vals[0] / vals[1] if vals[1] != 0 else Fraction(0)
        else:
            # Euclidean/floor division, total with a/0 = 0.
            r = Fraction(vals[0].numerator // vals[1].numerator) \
                if vals[1] != 0 else Fraction(0)
    elif op == "mod":
        # Floor modulus, total with a % 0 = a; nonnegative for positive m.
        r = Fraction(vals[0].numerator % vals[1].numerator) \
            if vals[1] != 0 else vals[0]
    elif op == "pow":
        base, exp = vals
        if exp.denominator != 1 or exp < 0 or exp > MAX_EXP:
            return None
        e = int(exp)
        if base.numerator.bit_length() * max(e, 1) > MAX_BITS:
            return None
        r = base ** e
    else:
        return None
    return mk_lit(r, sort)


def _eta(t: Binder) -> Term | None:
    # fun x => f x  ~~>  f   when x does not occur in f
    body = t.body
    if (isinstance(body, App) and body.op == "@"
            and isinstance(body.args[1], BVar) and body.args[1].idx == 0):
        f = body.args[0]
        if not _mentions_bvar(f, 0):
            return instantiate_bvar(f, _DUMMY)  # drop the dead index
    return None


def _mentions_bvar(t: Term, depth: int) -> bool:
    if isinstance(t, BVar):
        return t.idx == depth
    if isinstance(t, Binder):
        return _mentions_bvar(t.body, depth + 1)
    return any(_mentions_bvar(k, depth) for k in children(t))


# Placeholder used to strip one dead binder level during eta-contraction.
_DUMMY = Lit(INT, Fraction(0))


def _unfold_def(t: Term) -> Term | None:
    """One unfolding step for the bundled definitions."""
    if isinstance(t, App):
        elem = t.sort.args[0] if t.sort.kind == "Set" else None
        x = BVar(elem, 0) if elem is not None else None
        if t.op == "Iio":
            return mk_binder("setb", "x", elem, mk_atom("lt", (x, _sh(t.args[0]))))
        if t.op == "Ioi":
            return mk_binder("setb", "x", elem, mk_atom("lt", (_sh(t.args[0]), x)))
        if t.op == "Icc":
            return mk_binder("setb", "x", elem, mk_conn("and", (
                mk_atom("le", (_sh(t.args[0]), x)), mk_atom("le", (x, _sh(t.args[1]))))))
        if t.op == "Ico":
            return mk_binder("setb", "x", elem, mk_conn("and", (
                mk_atom("le", (_sh(t.args[0]), x)), mk_atom("lt", (x, _sh(t.args[1]))))))
        if t.op == "Ioc":
            return mk_binder("setb", "x", elem, mk_conn("and", (
                mk_atom("lt", (_sh(t.args[0]), x)), mk_atom("le", (x, _sh(t.args[1]))))))
        if t.op == "range":
            return mk_binder("setb", "x", elem, mk_conn("and", (
                mk_atom("le", (_sh(t.args[0]), x)), mk_atom("le", (x, _sh(t.args[1]))))))
        if t.op == "setlit":
            body: Term | None = None
            for a in reversed(t.args):
                eq = mk_atom("eq", (x, _sh(a)))
                body = eq if body is None else mk_conn("or", (eq, body))
            return mk_binder("setb", "x", elem, body)
    if isinstance(t, Atom) and t.rel == "mem":
        s = t.args[1]
        if isinstance(s, Binder) and s.kind == "setb":
            return instantiate_bvar(s.body, t.args[0])
    return None


def _sh(t: Term) -> Term:
    # endpoint terms move under one new binder
    from .expr import shift
    return shift(t, 1)


def _norm(t: Term, unfold: bool) -> Term:
    # normalize children first, then reduce at the head until fixed
    kids = children(t)
    if kids:
        t = _rebuild(t, tuple(_norm(k, unfold) for k in kids))
    while True:
        nxt = _step(t, unfold)
        if nxt is None:
            return t
        t = _norm(nxt, unfold) if children(nxt) else nxt


def _step(t: Term, unfold: bool) -> Term | None:
    if isinstance(t, App):
        if t.op == "@" and isinstance(t.args[0], Binder) \
                and t.args[0].kind == "lam":
            return instantiate_bvar(t.args[0].body, t.args[1])
        folded = fold_arith(t.op, t.args, t.sort)
        if folded is not None and not (isinstance(folded, Lit)
                                       and folded == t):
            return folded
        if unfold:
            return _unfold_def(t)
        return None
    if isinstance(t, Binder) and t.kind == "lam":
        return _eta(t)
    if isinstance(t, Atom) and unfold:
        return _unfold_def(t)
    return None


def normalize(t: Term) -> Term:
    """Full normal form: beta, eta, bundled unfoldings, literal folding."""
    return _norm(t, unfold=True)


def fold_literals(t: Term) -> Term:
    """Light normal form used after rewrites: beta plus literal folding."""
    return _norm(t, unfold=False)


def definitional_eq(t1: Term, t2: Term) -> bool:
    """Terms convertible by normalization, alpha-insensitively."""
    if t1.sort != t2.sort:
        raise SortError(
            f"definitional_eq across sorts {t1.sort} vs {t2.sort}")
    return alpha_eq(normalize(t1), normalize(t2))

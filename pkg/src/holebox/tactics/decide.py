"""eval_decide: exact evaluation of closed Nat/Int/Rat/Bool propositions.

Covers arithmetic, comparisons, mod, divisibility, primality by trial
division, finite-set cardinality and sums over integer ranges or divisor
sets, and quantifiers bounded by literal constraints.  Everything runs
on arbitrary-precision rationals under an enumeration budget.

A special assignment mode handles goals of the shape `?w = t` (or
`t = ?w`, or `?w <-> p`) with a closed right-hand side: the value is
computed and the answer hole is filled, which is how purely
computational problems are solved without guessing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from ..expr import (
    App, Atom, BVar, Binder, Conn, INT, Lit, Meta, NAT, RAT, REAL,
    Sort, Term, Var, instantiate_bvar, mk_conn, mk_lit, subterms,
)
from ..norm import normalize
from ..kernel import (
    Certificate, Goal, SolutionState, TacticFailed, TacticResult, goal_blob,
    register_tactic,
)

DEFAULT_BUDGET = 10 ** 6
MAX_POW_EXP = 10 ** 6


class EvalNotClosed(TacticFailed):
    """The proposition is not in the closed evaluable fragment."""


class EvalBudgetExceeded(TacticFailed):
    """The enumeration budget ran out."""


class EvaluatesFalse(TacticFailed):
    """The proposition is closed and evaluates to False."""


@dataclass
class Budget:
    remaining: int

    def charge(self, n: int = 1) -> None:
        self.remaining -= n
        if self.remaining < 0:
            raise EvalBudgetExceeded("enumeration budget exceeded")


FinSet = frozenset  # of Fraction

Value = Union[Fraction, bool, FinSet]


def _fail_open(t: Term) -> EvalNotClosed:
    return EvalNotClosed(f"not a closed evaluable term: {type(t).__name__}")


def eval_term(t: Term, budget: Budget) -> Value:
    if isinstance(t, Lit):
        if t.sort == REAL:
            raise EvalNotClosed("symbolic Real literal")
        return t.val
    if isinstance(t, (Var, Meta, BVar)):
        raise _fail_open(t)
    if isinstance(t, Conn):
        return _eval_conn(t, budget)
    if isinstance(t, Atom):
        return _eval_atom(t, budget)
    if isinstance(t, Binder):
        if t.kind in ("forall", "exists"):
            return _eval_quant(t, budget)
        if t.kind == "setb":
            return _eval_setb(t, budget)
        raise _fail_open(t)
    if isinstance(t, App):
        return _eval_app(t, budget)
    raise _fail_open(t)


def _as_num(v: Value) -> Fraction:
    if not isinstance(v, Fraction):
        raise EvalNotClosed("expected a numeric value")
    return v


def _eval_app(t: App, budget: Budget) -> Value:
    if t.sort == REAL or any(a.sort == REAL for a in t.args):
        raise EvalNotClosed("symbolic Real expression")
    op = t.op
    if op in ("add", "sub", "mul", "div", "mod", "neg", "abs", "pow"):
        vals = [_as_num(eval_term(a, budget)) for a in t.args]
        return _arith(op, vals, t.sort)
    if op == "rat":
        return _as_num(eval_term(t.args[0], budget))
    if op == "setlit":
        return frozenset(_as_num(eval_term(a, budget)) for a in t.args)
    if op == "divisors":
        n = _as_num(eval_term(t.args[0], budget))
        return _divisors(int(n), budget)
    if op == "range":
        lo = int(_as_num(eval_term(t.args[0], budget)))
        hi = int(_as_num(eval_term(t.args[1], budget)))
        if hi >= lo:
            budget.charge(hi - lo + 1)
        return frozenset(Fraction(k) for k in range(lo, hi + 1))
    if op in ("union", "inter"):
        a = eval_term(t.args[0], budget)
        b = eval_term(t.args[1], budget)
        if not isinstance(a, frozenset) or not isinstance(b, frozenset):
            raise EvalNotClosed("set operation on non-finite sets")
        return a | b if op == "union" else a & b
    if op == "card":
        s = eval_term(t.args[0], budget)
        if not isinstance(s, frozenset):
            raise EvalNotClosed("cardinality of a non-enumerable set")
        return Fraction(len(s))
    if op == "sum":
        s = eval_term(t.args[0], budget)
        if not isinstance(s, frozenset):
            raise EvalNotClosed("sum over a non-enumerable set")
        lam = t.args[1]
        if not isinstance(lam, Binder) or lam.kind != "lam":
            raise EvalNotClosed("sum body is not a function literal")
        total = Fraction(0)
        for v in sorted(s):
            budget.charge()
            body = normalize(instantiate_bvar(lam.body, mk_lit(v, lam.vsort)))
            total += _as_num(eval_term(body, budget))
        return total
    raise EvalNotClosed(f"operator {op!r} is not evaluable")


def _arith(op: str, vals: list[Fraction], sort: Sort) -> Fraction:
    if op == "add":
        return vals[0] + vals[1]
    if op == "sub":
        r = vals[0] - vals[1]
        return max(r, Fraction(0)) if sort == NAT else r
    if op == "mul":
        return vals[0] * vals[1]
    if op == "neg":
        return -vals[0]
    if op == "abs":
        return abs(vals[0])
    if op == "div":
        if sort == RAT:
            return vals[0] / vals[1] if vals[1] else Fraction(0)
        return Fraction(vals[0].numerator // vals[1].numerator) \
            if vals[1] else Fraction(0)
    if op == "mod":
        return Fraction(vals[0].numerator % vals[1].numerator) \
            if vals[1] else vals[0]
    if op == "pow":
        base, exp = vals
        if exp.denominator != 1 or exp < 0:
            raise EvalNotClosed("non-natural exponent")
        if exp > MAX_POW_EXP:
            raise EvalBudgetExceeded("exponent beyond evaluation guard")
        return base ** int(exp)
    raise AssertionError(op)


def _divisors(n: int, budget: Budget) -> FinSet:
    if n <= 0:
        return frozenset()
    out: set[Fraction] = set()
    d = 1
    while d * d <= n:
        budget.charge()
        if n % d == 0:
            out.add(Fraction(d))
            out.add(Fraction(n // d))
        d += 1
    return frozenset(out)


def is_prime(n: int, budget: Budget) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        budget.charge()
        if n % d == 0:
            return False
        d += 1
    return True


def _eval_atom(t: Atom, budget: Budget) -> bool:
    if any(a.sort == REAL for a in t.args):
        raise EvalNotClosed("symbolic Real comparison")
    rel = t.rel
    if rel == "mem":
        x = _as_num(eval_term(t.args[0], budget))
        s = eval_term(t.args[1], budget)
        if not isinstance(s, frozenset):
            raise EvalNotClosed("membership in a non-enumerable set")
        return x in s
    if rel in ("eq", "ne"):
        a = eval_term(t.args[0], budget)
        b = eval_term(t.args[1], budget)
        if isinstance(a, frozenset) != isinstance(b, frozenset):
            raise EvalNotClosed("heterogeneous equality")
        return (a == b) if rel == "eq" else (a != b)
    a = _as_num(eval_term(t.args[0], budget))
    if rel == "lt":
        return a < _as_num(eval_term(t.args[1], budget))
    if rel == "le":
        return a <= _as_num(eval_term(t.args[1], budget))
    if rel == "dvd":
        b = _as_num(eval_term(t.args[1], budget))
        ai, bi = int(a), int(b)
        return bi == 0 if ai == 0 else bi % ai == 0
    if rel == "even":
        return int(a) % 2 == 0
    if rel == "odd":
        return int(a) % 2 == 1
    if rel == "prime":
        return is_prime(int(a), budget)
    raise EvalNotClosed(f"relation {rel!r} is not evaluable")


def _eval_conn(t: Conn, budget: Budget) -> bool:
    op = t.op
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "not":
        return not _as_bool(eval_term(t.args[0], budget))
    a = _as_bool(eval_term(t.args[0], budget))
    b = _as_bool(eval_term(t.args[1], budget))
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    if op == "imp":
        return (not a) or b
    if op == "iff":
        return a == b
    raise AssertionError(op)


def _as_bool(v: Value) -> bool:
    if not isinstance(v, bool):
        raise EvalNotClosed("expected a truth value")
    return v


# -- bounded enumeration ------------------------------------------------------

_PROBE = "$probe"


def _conjuncts(t: Term) -> list[Term]:
    if isinstance(t, Conn) and t.op == "and":
        return _conjuncts(t.args[0]) + _conjuncts(t.args[1])
    return [t]


def _literal(t: Term, budget: Budget) -> Optional[Fraction]:
    try:
        v = eval_term(t, budget)
    except TacticFailed:
        return None
    return v if isinstance(v, Fraction) else None


def _probe_bounds(parts: list[Term], budget: Budget
                  ) -> tuple[Optional[Fraction], Optional[Fraction]]:
    """Literal lower/upper bounds for the probe variable, if derivable."""
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None

    def is_probe(t: Term) -> bool:
        return isinstance(t, Var) and t.name == _PROBE

    def tighten_lo(v: Fraction) -> None:
        nonlocal lo
        lo = v if lo is None else max(lo, v)

    def tighten_hi(v: Fraction) -> None:
        nonlocal hi
        hi = v if hi is None else min(hi, v)

    for part in parts:
        if not isinstance(part, Atom):
            continue
        rel, args = part.rel, part.args
        if rel in ("le", "lt") and is_probe(args[0]):
            v = _literal(args[1], budget)
            if v is not None:
                tighten_hi(v if rel == "le" else v - 1)
        elif rel in ("le", "lt") and is_probe(args[1]):
            v = _literal(args[0], budget)
            if v is not None:
                tighten_lo(v if rel == "le" else v + 1)
        elif rel in ("le", "lt") and isinstance(args[0], App) \
                and args[0].op == "abs":
            inner = args[0].args[0]
            k = _literal(args[1], budget)
            if k is None:
                continue
            if rel == "lt":
                k -= 1
            center: Optional[Fraction] = None
            if is_probe(inner):
                center = Fraction(0)
            elif isinstance(inner, App) and inner.op == "sub" \
                    and is_probe(inner.args[0]):
                center = _literal(inner.args[1], budget)
            if center is not None:
                tighten_lo(center - k)
                tighten_hi(center + k)
        elif rel == "eq":
            if is_probe(args[0]):
                v = _literal(args[1], budget)
            elif is_probe(args[1]):
                v = _literal(args[0], budget)
            else:
                v = None
            if v is not None:
                tighten_lo(v)
                tighten_hi(v)
        elif rel == "mem" and is_probe(args[0]):
            try:
                s = eval_term(args[1], budget)
            except TacticFailed:
                continue
            if isinstance(s, frozenset) and s:
                tighten_lo(min(s))
                tighten_hi(max(s))
            elif isinstance(s, frozenset):
                tighten_lo(Fraction(1))
                tighten_hi(Fraction(0))
    return lo, hi


def _enum_range(body: Term, vsort: Sort, budget: Budget,
                for_all: bool) -> Optional[range]:
    from ..expr import mk_var
    probe = mk_var(_PROBE, vsort)
    opened = instantiate_bvar(body, probe)
    if for_all and isinstance(opened, Conn) and opened.op == "imp":
        parts = _conjuncts(opened.args[0])
    else:
        parts = _conjuncts(opened)
    lo, hi = _probe_bounds(parts, budget)
    if vsort == NAT:
        lo = Fraction(0) if lo is None else max(lo, Fraction(0))
    if lo is None or hi is None:
        return None
    import math
    lo_i = math.ceil(lo)
    hi_i = math.floor(hi)
    return range(lo_i, hi_i + 1)


def _eval_quant(t: Binder, budget: Budget) -> bool:
    if t.vsort not in (NAT, INT):
        raise EvalNotClosed(f"quantifier over {t.vsort}")
    rng = _enum_range(t.body, t.vsort, budget, t.kind == "forall")
    if rng is None:
        raise EvalNotClosed("quantifier without derivable literal bounds")
    for k in rng:
        budget.charge()
        inst = normalize(instantiate_bvar(t.body, mk_lit(k, t.vsort)))
        v = _as_bool(eval_term(inst, budget))
        if t.kind == "exists" and v:
            return True
        if t.kind == "forall" and not v:
            return False
    return t.kind == "forall"


def _eval_setb(t: Binder, budget: Budget) -> FinSet:
    if t.vsort not in (NAT, INT):
        raise EvalNotClosed(f"set-builder over {t.vsort}")
    rng = _enum_range(t.body, t.vsort, budget, for_all=False)
    if rng is None:
        raise EvalNotClosed("set-builder without derivable literal bounds")
    out: set[Fraction] = set()
    for k in rng:
        budget.charge()
        inst = normalize(instantiate_bvar(t.body, mk_lit(k, t.vsort)))
        if _as_bool(eval_term(inst, budget)):
            out.add(Fraction(k))
    return frozenset(out)


# -- the tactic ---------------------------------------------------------------


def decide_prop(prop: Term, budget_n: int = DEFAULT_BUDGET) -> tuple[bool, int]:
    """Evaluate one closed proposition; returns (verdict, budget used)."""
    budget = Budget(budget_n)
    v = _as_bool(eval_term(normalize(prop), budget))
    return v, budget_n - budget.remaining


def _value_term(v: Value, sort: Sort) -> Term:
    if isinstance(v, bool):
        return mk_conn("true" if v else "false", ())
    if isinstance(v, Fraction):
        return mk_lit(v, sort)
    raise EvalNotClosed("cannot reify a set value into an answer term")


def _assign_split(concl: Term, state: SolutionState
                  ) -> Optional[tuple[str, Term]]:
    """Detect `?w = t` / `t = ?w` / `?w <-> p` with ?w an unassigned hole."""
    pending = {h.mid for h in state.unassigned_holes()}
    pair: Optional[tuple[Term, Term]] = None
    if isinstance(concl, Atom) and concl.rel == "eq":
        pair = (concl.args[0], concl.args[1])
    elif isinstance(concl, Conn) and concl.op == "iff":
        pair = (concl.args[0], concl.args[1])
    if pair is None:
        return None
    for me, other in (pair, pair[::-1]):
        if isinstance(me, Meta) and me.mid in pending \
                and not metavars_term(other):
            return me.mid, other
    return None


def metavars_term(t: Term) -> bool:
    return any(isinstance(s, Meta) for s in subterms(t))


@register_tactic("eval_decide")
def eval_decide(state: SolutionState, goal: Goal, argtext: str
                ) -> TacticResult:
    if goal.is_hole_goal():
        raise TacticFailed("eval_decide does not apply to a hole goal")
    budget_n = int(argtext) if argtext.strip() else DEFAULT_BUDGET
    concl = normalize(goal.concl)
    split = _assign_split(concl, state)
    if split is not None:
        mid, rhs = split
        budget = Budget(budget_n)
        val = eval_term(rhs, budget)
        hole = state.hole(mid)
        answer = _value_term(val, hole.target)
        cert = Certificate("eval_decide", {
            "goal": goal_blob(goal, state.meta_sorts()),
            "assigned": {mid: _print(answer)},
            "budget_used": budget_n - budget.remaining,
        })
        return TacticResult(assignments=((mid, answer),), cert=cert)
    if metavars_term(concl):
        raise EvalNotClosed("conclusion still contains metavariables")
    verdict, used = decide_prop(concl, budget_n)
    if not verdict:
        raise EvaluatesFalse(f"evaluates to False: {_print(concl)}")
    cert = Certificate("eval_decide", {
        "goal": goal_blob(goal, state.meta_sorts()),
        "trace_hash": _trace_hash(concl, verdict),
        "budget_used": used,
    })
    return TacticResult(cert=cert)


def _print(t: Term) -> str:
    from ..syntax import print_term
    return print_term(t)


def _trace_hash(concl: Term, verdict: bool) -> str:
    blob = f"{_print(concl)} => {verdict}"
    return hashlib.sha256(blob.encode()).hexdigest()


def revalidate_eval_decide(cert: Certificate) -> None:
    from ..kernel import CertificateError, goal_from_blob
    goal = goal_from_blob(cert.detail["goal"])
    concl = normalize(goal.concl)
    if "assigned" in cert.detail:
        split_rhs = None
        if isinstance(concl, Atom) and concl.rel == "eq":
            sides = concl.args
        elif isinstance(concl, Conn) and concl.op == "iff":
            sides = concl.args
        else:
            raise CertificateError("eval_decide assignment on a non-equation")
        for me, other in (sides, sides[::-1]):
            if isinstance(me, Meta):
                split_rhs = (me, other)
                break
        if split_rhs is None:
            raise CertificateError("eval_decide assignment without a hole side")
        me, other = split_rhs
        val = eval_term(other, Budget(DEFAULT_BUDGET))
        expect = cert.detail["assigned"].get(me.mid)
        if expect is None or _print(_value_term(val, me.sort)) != expect:
            raise CertificateError("eval_decide assignment mismatch")
        return
    verdict, _ = decide_prop(concl)
    if not verdict:
        raise CertificateError("eval_decide certificate no longer validates")
    if cert.detail.get("trace_hash") != _trace_hash(concl, verdict):
        raise CertificateError("eval_decide trace hash mismatch")

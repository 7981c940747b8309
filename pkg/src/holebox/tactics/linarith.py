"""linear_arith: decision procedure for linear arithmetic goals.

The goal is proved when the hypotheses together with the negated
conclusion form an infeasible system.  Rational systems go through
Fourier-Motzkin elimination with exact arithmetic, and the derived
contradiction is recorded as a Farkas combination that revalidation
re-checks by direct arithmetic.  Integer (and Nat-as-nonnegative-Int)
systems go through omega-style elimination: equality elimination with
the symmetric-mod trick, then shadow projection with splinters, so the
procedure is complete on its fragment.  Literal-modulus constraints
(t % m = r, m | t, even/odd) are compiled to quotient variables.

Nonlinear subterms are abstracted as opaque atoms, which only weakens
the system, so every proof produced here is sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..expr import (
    App, Atom, Conn, INT, Lit, Meta, NAT, RAT, REAL, Sort, Term, Var,
    instantiate_metas, mk_lit,
)
from ..norm import fold_literals, normalize
from ..kernel import (
    Certificate, CertificateError, Goal, SolutionState, TacticFailed,
    TacticResult, goal_blob, goal_from_blob, register_tactic,
)
from ..syntax import print_term

MAX_NE_SPLITS = 64
MAX_OMEGA_NODES = 20000
MAX_SYNTH_SCAN = 64


class NotLinear(TacticFailed):
    pass


# A linear expression is a mapping from atom keys to coefficients; the
# empty key holds the constant.
Lin = dict[str, Fraction]

CONST = ""


def _lin_add(a: Lin, b: Lin, bs: Fraction = Fraction(1)) -> Lin:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + bs * v
        if out[k] == 0 and k != CONST:
            del out[k]
    return out


def _lin_scale(a: Lin, s: Fraction) -> Lin:
    return {k: v * s for k, v in a.items() if v * s != 0 or k == CONST}


@dataclass
class Atomizer:
    """Maps opaque non-linear subterms to stable atom names."""
    sort: Sort
    table: dict[str, Term] = field(default_factory=dict)
    nat_keys: set[str] = field(default_factory=set)
    mod_constraints: list["Constraint"] = field(default_factory=list)
    counter: int = 0

    def key_for(self, t: Term) -> str:
        key = f"`{print_term(t)}`"
        if key not in self.table:
            self.table[key] = t
            if t.sort == NAT:
                self.nat_keys.add(key)
        return key

    def fresh(self, prefix: str, nat: bool = False) -> str:
        self.counter += 1
        key = f"${prefix}{self.counter}"
        if nat:
            self.nat_keys.add(key)
        return key


@dataclass(frozen=True)
class Constraint:
    """expr (<= | < | = | !=) 0 over the shared atom space."""
    expr: tuple[tuple[str, Fraction], ...]
    rel: str                      # le | lt | eq | ne
    origin: int = -1              # index into the certificate's atom list

    def lin(self) -> Lin:
        return dict(self.expr)


def _mk_con(lin: Lin, rel: str, origin: int = -1) -> Constraint:
    items = tuple(sorted((k, v) for k, v in lin.items()
                         if v != 0 or k == CONST))
    return Constraint(items, rel, origin)


def linearize(t: Term, az: Atomizer) -> Lin:
    t = fold_literals(t)
    if isinstance(t, Lit):
        return {CONST: t.val}
    if isinstance(t, App):
        if t.op == "add":
            return _lin_add(linearize(t.args[0], az), linearize(t.args[1], az))
        if t.op == "sub" and t.sort != NAT:
            return _lin_add(linearize(t.args[0], az),
                            linearize(t.args[1], az), Fraction(-1))
        if t.op == "neg":
            return _lin_scale(linearize(t.args[0], az), Fraction(-1))
        if t.op == "mul":
            lhs, rhs = t.args
            lv = _const_value(lhs)
            if lv is not None:
                return _lin_scale(linearize(rhs, az), lv)
            rv = _const_value(rhs)
            if rv is not None:
                return _lin_scale(linearize(lhs, az), rv)
        if t.op == "div" and t.sort in (RAT, REAL):
            rv = _const_value(t.args[1])
            if rv:
                return _lin_scale(linearize(t.args[0], az), 1 / rv)
        if t.op == "mod" and t.sort in (NAT, INT):
            m = _const_value(t.args[1])
            if m is not None and m > 0:
                return {_mod_key(t.args[0], int(m), az): Fraction(1)}
    if isinstance(t, Var):
        key = az.key_for(t)
        return {key: Fraction(1)}
    # anything else is an opaque atom
    return {az.key_for(t): Fraction(1)}


def _const_value(t: Term) -> Optional[Fraction]:
    t = fold_literals(t)
    return t.val if isinstance(t, Lit) else None


def _mod_key(t: Term, m: int, az: Atomizer) -> str:
    """Abstract t % m with vars q, r and side constraints t = m q + r,
    0 <= r < m."""
    key = f"`{print_term(t)} % {m}`"
    if key in az.table:
        return key
    az.table[key] = t            # placeholder registration
    base = linearize(t, az)
    q = az.fresh("q")
    r = key
    # t - m q - r = 0
    eq = _lin_add(base, {q: Fraction(m), r: Fraction(1)}, Fraction(-1))
    az.mod_constraints.append(_mk_con(eq, "eq"))
    az.mod_constraints.append(_mk_con({r: Fraction(-1)}, "le"))
    az.mod_constraints.append(
        _mk_con({r: Fraction(1), CONST: Fraction(1 - m)}, "le"))
    return key


def atom_to_constraints(a: Atom, az: Atomizer, positive: bool
                        ) -> list[Constraint]:
    """Translate one relational atom (or its negation) to constraints."""
    rel = a.rel
    int_path = az.sort in (INT, NAT)
    one = Fraction(1)
    if rel in ("eq", "ne", "lt", "le"):
        if a.args[0].sort != az.sort:
            raise NotLinear(f"atom over {a.args[0].sort}, system over {az.sort}")
        lhs = linearize(a.args[0], az)
        rhs = linearize(a.args[1], az)
        diff = _lin_add(lhs, rhs, Fraction(-1))
        neg = _lin_scale(diff, Fraction(-1))
        if not positive:
            rel = {"eq": "ne", "ne": "eq", "lt": "le", "le": "lt"}[rel]
            if rel in ("le", "lt"):
                diff, neg = neg, diff
        if rel == "eq":
            return [_mk_con(diff, "eq")]
        if rel == "ne":
            return [_mk_con(diff, "ne")]
        if rel == "le":
            return [_mk_con(diff, "le")]
        # strict: integers tighten to <=
        if int_path:
            return [_mk_con(_lin_add(diff, {CONST: one}), "le")]
        return [_mk_con(diff, "lt")]
    if not int_path:
        raise NotLinear(f"relation {rel} outside the Int path")
    if rel == "dvd":
        m = _const_value(a.args[0])
        if m is None or m <= 0:
            raise NotLinear("divisibility with a non-literal modulus")
        r = _mod_key(a.args[1], int(m), az)
        return [_mk_con({r: one}, "eq" if positive else "ne")]
    if rel in ("even", "odd"):
        r = _mod_key(a.args[0], 2, az)
        want_zero = (rel == "even") == positive
        return [_mk_con({r: one}, "eq" if want_zero else "ne")]
    raise NotLinear(f"relation {rel} is not linear")


def _flatten_pos(t: Term, az: Atomizer) -> Optional[list[Constraint]]:
    """A proposition as a conjunction of linear constraints, or None."""
    if isinstance(t, Conn) and t.op == "and":
        lhs = _flatten_pos(t.args[0], az)
        rhs = _flatten_pos(t.args[1], az)
        if lhs is None or rhs is None:
            return None
        return lhs + rhs
    if isinstance(t, Conn) and t.op == "not" and isinstance(t.args[0], Atom):
        try:
            return atom_to_constraints(t.args[0], az, positive=False)
        except NotLinear:
            return None
    if isinstance(t, Conn) and t.op == "true":
        return []
    if isinstance(t, Atom):
        try:
            return atom_to_constraints(t, az, positive=True)
        except NotLinear:
            return None
    return None


def _negation_dnf(t: Term, az: Atomizer) -> list[list[Constraint]]:
    """Disjuncts of not(t), each a conjunction of constraints."""
    if isinstance(t, Conn):
        if t.op == "and":
            return _negation_dnf(t.args[0], az) + _negation_dnf(t.args[1], az)
        if t.op == "or":
            out = []
            for l in _negation_dnf(t.args[0], az):
                for r in _negation_dnf(t.args[1], az):
                    out.append(l + r)
            return out
        if t.op == "imp":
            pos = _flatten_pos(t.args[0], az)
            if pos is None:
                raise NotLinear("non-linear antecedent in the conclusion")
            return [pos + d for d in _negation_dnf(t.args[1], az)]
        if t.op == "not":
            pos = _flatten_pos(t.args[0], az)
            if pos is None:
                raise NotLinear("non-linear negated conclusion")
            return [pos]
        if t.op == "false":
            return [[]]
        if t.op == "true":
            return []
    if isinstance(t, Atom):
        return [atom_to_constraints(t, az, positive=False)]
    raise NotLinear("conclusion is not in the linear fragment")


# ---------------------------------------------------------------------------
# Rational path: Fourier-Motzkin with Farkas tracking


@dataclass(frozen=True)
class _FmRow:
    lin: tuple[tuple[str, Fraction], ...]
    strict: bool
    lineage: tuple[tuple[int, Fraction], ...]   # origin index -> multiplier

    def coeffs(self) -> Lin:
        return dict(self.lin)


def _fm_row(lin: Lin, strict: bool, lineage: dict[int, Fraction]) -> _FmRow:
    return _FmRow(tuple(sorted((k, v) for k, v in lin.items() if v != 0)),
                  strict, tuple(sorted(lineage.items())))


def fm_refute(cons: list[Constraint]) -> Optional[dict[int, Fraction]]:
    """Return Farkas multipliers showing infeasibility, or None if feasible.

    Equalities are split into two tracked inequalities; `ne` rows must be
    split by the caller.
    """
    rows: list[_FmRow] = []
    for i, c in enumerate(cons):
        lin = c.lin()
        if c.rel == "eq":
            rows.append(_fm_row(lin, False, {2 * i: Fraction(1)}))
            rows.append(_fm_row(_lin_scale(lin, Fraction(-1)), False,
                                {2 * i + 1: Fraction(1)}))
        elif c.rel == "le":
            rows.append(_fm_row(lin, False, {2 * i: Fraction(1)}))
        elif c.rel == "lt":
            rows.append(_fm_row(lin, True, {2 * i: Fraction(1)}))
        else:
            raise NotLinear("ne must be split before Fourier-Motzkin")
    while True:
        for r in rows:
            co = r.coeffs()
            keys = [k for k in co if k != CONST]
            if not keys:
                c0 = co.get(CONST, Fraction(0))
                if c0 > 0 or (r.strict and c0 >= 0):
                    return dict(r.lineage)
        vars_ = sorted({k for r in rows for k in r.coeffs() if k != CONST})
        if not vars_:
            return None
        # eliminate the variable with the fewest lower*upper products
        best, best_cost = None, None
        for v in vars_:
            lo = sum(1 for r in rows if r.coeffs().get(v, 0) < 0)
            hi = sum(1 for r in rows if r.coeffs().get(v, 0) > 0)
            cost = lo * hi + lo + hi
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        v = best
        lows = [r for r in rows if r.coeffs().get(v, 0) < 0]
        highs = [r for r in rows if r.coeffs().get(v, 0) > 0]
        rest = [r for r in rows if r.coeffs().get(v, 0) == 0]
        new_rows = list(rest)
        for lo in lows:
            for hi in highs:
                a = -lo.coeffs()[v]
                b = hi.coeffs()[v]
                lin = _lin_add(_lin_scale(lo.coeffs(), b),
                               _lin_scale(hi.coeffs(), a))
                lin.pop(v, None)
                lineage: dict[int, Fraction] = {}
                for idx, m in lo.lineage:
                    lineage[idx] = lineage.get(idx, Fraction(0)) + b * m
                for idx, m in hi.lineage:
                    lineage[idx] = lineage.get(idx, Fraction(0)) + a * m
                new_rows.append(_fm_row(lin, lo.strict or hi.strict, lineage))
        if len(new_rows) > 4000:
            raise NotLinear("Fourier-Motzkin blow-up guard")
        rows = new_rows


def verify_farkas(cons: list[Constraint], multipliers: dict[str, Fraction]
                  ) -> bool:
    """Check a Farkas combination: nonneg multipliers, zero coefficients,
    contradictory constant."""
    total: Lin = {}
    strict = False
    for key, mult in multipliers.items():
        idx = int(key)
        if mult < 0:
            return False
        base = cons[idx // 2]
        lin = base.lin()
        if base.rel == "eq" and idx % 2 == 1:
            lin = _lin_scale(lin, Fraction(-1))
        elif base.rel == "lt":
            strict = strict or mult > 0
        elif base.rel not in ("le", "eq"):
            return False
        total = _lin_add(total, lin, mult)
    if any(k != CONST and v != 0 for k, v in total.items()):
        return False
    c0 = total.get(CONST, Fraction(0))
    return c0 > 0 or (strict and c0 >= 0)


# ---------------------------------------------------------------------------
# Integer path: omega-style elimination


def _int_rows(cons: list[Constraint]) -> tuple[list[Lin], list[Lin]]:
    """Scale to integer coefficients; returns (equalities, inequalities<=0)."""
    eqs: list[Lin] = []
    ineqs: list[Lin] = []
    for c in cons:
        lin = c.lin()
        den = math.lcm(*(v.denominator for v in lin.values())) if lin else 1
        lin = {k: v * den for k, v in lin.items()}
        if c.rel == "eq":
            eqs.append(lin)
        elif c.rel == "le":
            ineqs.append(lin)
        elif c.rel == "lt":
            ineqs.append(_lin_add(lin, {CONST: Fraction(1)}))
        else:
            raise NotLinear("ne must be split before omega")
    return eqs, ineqs


def _mods(a: int, m: int) -> int:
    """Symmetric residue in (-m/2, m/2]."""
    r = a % m
    if r > m // 2 or (m % 2 == 0 and r == m // 2 and False):
        pass
    if r * 2 > m:
        r -= m
    return r


class _OmegaBudget:
    def __init__(self, n: int):
        self.n = n

    def tick(self) -> None:
        self.n -= 1
        if self.n < 0:
            raise NotLinear("omega node budget exceeded")


def omega_sat(eqs: list[Lin], ineqs: list[Lin],
              budget: Optional[_OmegaBudget] = None,
              fresh: Optional[list[int]] = None) -> bool:
    """Integer satisfiability of {eq = 0} and {ineq <= 0}."""
    if budget is None:
        budget = _OmegaBudget(MAX_OMEGA_NODES)
    if fresh is None:
        fresh = [0]
    budget.tick()
    eqs = [dict(e) for e in eqs]
    ineqs = [dict(i) for i in ineqs]

    # -- equality elimination
    while eqs:
        eq = eqs.pop()
        vars_ = {k: int(v) for k, v in eq.items() if k != CONST and v != 0}
        c0 = eq.get(CONST, Fraction(0))
        if not vars_:
            if c0 != 0:
                return False
            continue
        g = math.gcd(*(abs(a) for a in vars_.values()))
        if int(c0) % g != 0:
            return False
        vars_ = {k: a // g for k, a in vars_.items()}
        c0 = Fraction(int(c0) // g)
        k, ak = min(vars_.items(), key=lambda kv: (abs(kv[1]), kv[0]))
        if abs(ak) == 1:
            # k = -sign * (rest + c)
            repl = {kk: Fraction(-a * ak) for kk, a in vars_.items() if kk != k}
            repl[CONST] = -c0 * ak
            eqs = [_subst_lin(e, k, repl) for e in eqs]
            ineqs = [_subst_lin(i, k, repl) for i in ineqs]
            continue
        m = abs(ak) + 1
        sigma = f"$s{fresh[0]}"
        fresh[0] += 1
        new_eq: Lin = {sigma: Fraction(-m)}
        for kk, a in vars_.items():
            new_eq[kk] = Fraction(_mods(a, m))
        new_eq[CONST] = Fraction(_mods(int(c0), m))
        # coefficient of k in new_eq is -sign(ak), a unit
        eqs.append({k: Fraction(v) for k, v in vars_.items()} | {CONST: c0})
        eqs.append(new_eq)

    # -- normalize inequalities
    norm: list[Lin] = []
    for i in ineqs:
        vars_ = {k: v for k, v in i.items() if k != CONST and v != 0}
        c0 = i.get(CONST, Fraction(0))
        if not vars_:
            if c0 > 0:
                return False
            continue
        g = math.gcd(*(abs(int(v)) for v in vars_.values()))
        if g > 1:
            # sum(a x) + c <= 0 tightens to sum(a/g x) + ceil(c/g) <= 0
            vars_ = {k: Fraction(int(v) // g) for k, v in vars_.items()}
            c0 = Fraction(math.ceil(c0 / g))
        norm.append(vars_ | {CONST: c0})
    ineqs = norm
    if not ineqs:
        return True

    vars_all = sorted({k for i in ineqs for k in i if k != CONST})
    if not vars_all:
        return True

    # -- choose a variable to eliminate
    best, best_cost = None, None
    for v in vars_all:
        lo = sum(1 for i in ineqs if i.get(v, 0) < 0)
        hi = sum(1 for i in ineqs if i.get(v, 0) > 0)
        if lo == 0 or hi == 0:
            best, best_cost = v, -1
            break
        exact = all(
            abs(i.get(v, 0)) == 1 or abs(j.get(v, 0)) == 1
            for i in ineqs if i.get(v, 0) < 0
            for j in ineqs if j.get(v, 0) > 0)
        cost = lo * hi - (1000 if exact else 0)
        if best_cost is None or cost < best_cost:
            best, best_cost = v, cost
    v = best
    lows = [i for i in ineqs if i.get(v, 0) < 0]
    highs = [i for i in ineqs if i.get(v, 0) > 0]
    rest = [i for i in ineqs if i.get(v, 0) == 0]
    if not lows or not highs:
        return omega_sat([], rest, budget, fresh)

    def shadow(dark: bool) -> list[Lin]:
        out = list(rest)
        for lo in lows:
            for hi in highs:
                b = -lo[v]
                a = hi[v]
                lin = _lin_add(_lin_scale(lo, a), _lin_scale(hi, b))
                lin.pop(v, None)
                if dark:
                    lin[CONST] = lin.get(CONST, Fraction(0)) \
                        + (a - 1) * (b - 1)
                out.append(lin)
        return out

    exact = all(abs(lo[v]) == 1 or abs(hi[v]) == 1
                for lo in lows for hi in highs)
    if exact:
        return omega_sat([], shadow(False), budget, fresh)
    if not omega_sat([], shadow(False), budget, fresh):
        return False
    if omega_sat([], shadow(True), budget, fresh):
        return True
    # splinters
    amax = max(int(hi[v]) for hi in highs)
    for lo in lows:
        b = int(-lo[v])
        top = (amax * b - amax - b) // amax
        beta = _lin_scale(lo, Fraction(-1))   # b*v >= beta form: beta - b v <= 0
        for i in range(top + 1):
            eq = dict(lo)
            eq[CONST] = eq.get(CONST, Fraction(0)) + i
            if omega_sat([eq], ineqs, budget, fresh):
                return True
    return False


def _subst_lin(lin: Lin, var: str, repl: Lin) -> Lin:
    if var not in lin:
        return lin
    c = lin[var]
    out = {k: v for k, v in lin.items() if k != var}
    return _lin_add(out, repl, c)


# ---------------------------------------------------------------------------
# System assembly and the tactic


def _collect_system(goal: Goal, state: Optional[SolutionState]
                    ) -> tuple[Atomizer, list[Constraint],
                               list[list[Constraint]]]:
    concl = goal.concl
    if not isinstance(concl, Term):
        raise NotLinear("hole goals are not linear goals")
    asg = state.asg_map() if state is not None else {}
    concl = normalize(instantiate_metas(concl, asg))
    sort = _goal_sort(concl)
    az = Atomizer(sort)
    hyp_cons: list[Constraint] = []
    for d in goal.ctx.decls:
        if d.prop is None:
            continue
        prop = normalize(instantiate_metas(d.prop, asg))
        if any(isinstance(s, Meta) for s in _walk(prop)):
            continue
        flat = _flatten_pos(prop, az)
        if flat is not None:
            hyp_cons.extend(flat)
    branches = _negation_dnf(concl, az)
    # Nat atoms are nonnegative integers
    for key in sorted(az.nat_keys):
        hyp_cons.append(_mk_con({key: Fraction(-1)}, "le"))
    hyp_cons.extend(az.mod_constraints)
    return az, hyp_cons, branches


def _walk(t: Term):
    from ..expr import subterms
    return subterms(t)


def _goal_sort(concl: Term) -> Sort:
    for s in _walk(concl):
        if isinstance(s, Atom) and s.rel in ("eq", "ne", "lt", "le") \
                and s.args[0].sort in (NAT, INT, RAT, REAL):
            sort = s.args[0].sort
            return INT if sort == NAT else sort
        if isinstance(s, Atom) and s.rel in ("dvd", "even", "odd"):
            return INT
    raise NotLinear("no linear relation in the conclusion")


def _split_nes(cons: list[Constraint]) -> list[list[Constraint]]:
    """Expand ne constraints into strict branches (lt each side)."""
    systems: list[list[Constraint]] = [[]]
    n_nes = sum(1 for c in cons if c.rel == "ne")
    if 2 ** n_nes > MAX_NE_SPLITS:
        raise NotLinear("too many disequalities to split")
    for c in cons:
        if c.rel != "ne":
            for s in systems:
                s.append(c)
            continue
        new_systems = []
        for s in systems:
            lt = _mk_con(_lin_add(c.lin(), {}), "lt")
            gt = _mk_con(_lin_scale(c.lin(), Fraction(-1)), "lt")
            new_systems.append(s + [lt])
            new_systems.append(s + [gt])
        systems = new_systems
    return systems


def refute_branch(sort: Sort, cons: list[Constraint]) -> dict:
    """Show one conjunction of constraints infeasible; raises NotLinear or
    TacticFailed (feasible)."""
    int_path = sort in (INT, NAT)
    for sub in _split_nes(cons):
        if int_path:
            sub2 = []
            for c in sub:
                if c.rel == "lt":
                    sub2.append(_mk_con(_lin_add(c.lin(), {CONST: Fraction(1)}),
                                        "le"))
                else:
                    sub2.append(c)
            eqs, ineqs = _int_rows(sub2)
            if omega_sat(eqs, ineqs):
                raise TacticFailed("linear_arith: system is feasible")
        else:
            farkas = fm_refute(sub)
            if farkas is None:
                raise TacticFailed("linear_arith: system is feasible")
    # build the stored evidence from the unsplit system
    if int_path:
        return {"method": "omega"}
    if not any(c.rel == "ne" for c in cons):
        farkas = fm_refute(cons)
        assert farkas is not None
        return {"method": "farkas",
                "multipliers": {str(k): [v.numerator, v.denominator]
                                for k, v in farkas.items()}}
    return {"method": "fm-split"}


def prove_linear(goal: Goal, state: Optional[SolutionState]) -> dict:
    """Prove a goal by refuting hypotheses + negated conclusion."""
    az, hyps, branches = _collect_system(goal, state)
    if not branches:
        raise NotLinear("conclusion is trivially true; use rfl or eval_decide")
    evidence = []
    for branch in branches:
        evidence.append(refute_branch(az.sort, hyps + branch))
    return {"sort": str(az.sort), "branches": evidence}


@register_tactic("linear_arith")
def linear_arith(state: SolutionState, goal: Goal, argtext: str
                 ) -> TacticResult:
    if goal.is_hole_goal():
        raise TacticFailed("linear_arith does not apply to a hole goal")
    concl = instantiate_metas(goal.concl, state.asg_map())
    synth = _synth_split(concl, state)
    if synth is not None:
        mid, expr, flip = synth
        value = _synthesize(goal, state, expr)
        hole = state.hole(mid)
        answer = mk_lit(value, hole.target)
        check = Goal(goal.case, goal.ctx, _rebuild_eq(expr, answer, flip))
        detail = prove_linear(check, state)
        cert = Certificate("linear_arith", {
            "goal": goal_blob(check, state.meta_sorts()),
            "assigned": {mid: print_term(answer)},
            **detail,
        })
        return TacticResult(assignments=((mid, answer),), cert=cert)
    detail = prove_linear(goal, state)
    cert = Certificate("linear_arith", {
        "goal": goal_blob(goal, state.meta_sorts()),
        **detail,
    })
    return TacticResult(cert=cert)


def _rebuild_eq(lhs: Term, rhs: Term, flip: bool) -> Term:
    from ..expr import mk_atom
    return mk_atom("eq", (rhs, lhs) if flip else (lhs, rhs))


def _synth_split(concl: Term, state: SolutionState
                 ) -> Optional[tuple[str, Term, bool]]:
    """Detect `t = ?w` or `?w = t` with an unassigned hole and linear t."""
    if not (isinstance(concl, Atom) and concl.rel == "eq"):
        return None
    pending = {h.mid for h in state.unassigned_holes()}
    a, b = concl.args
    if isinstance(b, Meta) and b.mid in pending and not _has_meta(a):
        return b.mid, a, False
    if isinstance(a, Meta) and a.mid in pending and not _has_meta(b):
        return a.mid, b, True
    return None


def _has_meta(t: Term) -> bool:
    return any(isinstance(s, Meta) for s in _walk(t))


def _synthesize(goal: Goal, state: SolutionState, expr: Term) -> Fraction:
    """Find the unique value the hypotheses force for `expr`."""
    az = Atomizer(_expr_sort(expr))
    hyp_cons: list[Constraint] = []
    asg = state.asg_map()
    for d in goal.ctx.decls:
        if d.prop is None:
            continue
        prop = normalize(instantiate_metas(d.prop, asg))
        if _has_meta(prop):
            continue
        flat = _flatten_pos(prop, az)
        if flat is not None:
            hyp_cons.extend(flat)
    target = linearize(normalize(expr), az)
    for key in sorted(az.nat_keys):
        hyp_cons.append(_mk_con({key: Fraction(-1)}, "le"))
    hyp_cons.extend(az.mod_constraints)
    # 1) Gaussian elimination over the equality subset
    value = _gauss_value(hyp_cons, target)
    if value is None:
        value = _scan_value(az, hyp_cons, target)
    if value is None:
        raise NotLinear("hypotheses do not pin the target value")
    if az.sort in (INT, NAT) and value.denominator != 1:
        raise NotLinear("non-integral synthesized value")
    return value


def _expr_sort(expr: Term) -> Sort:
    s = expr.sort
    return INT if s == NAT else s


def _gauss_value(cons: list[Constraint], target: Lin) -> Optional[Fraction]:
    rows = [c.lin() for c in cons if c.rel == "eq"]
    target = dict(target)
    changed = True
    while changed:
        changed = False
        for row in rows:
            keys = [k for k in row if k != CONST and row[k] != 0]
            if len(keys) == 0:
                continue
            pivot = None
            for k in sorted(keys):
                if k in target and target[k] != 0:
                    pivot = k
                    break
            if pivot is None:
                continue
            scale = target[pivot] / row[pivot]
            target = _lin_add(target, row, -scale)
            target.pop(pivot, None)
            changed = True
            rows = [_eliminate(r, row, pivot) for r in rows if r is not row]
            break
    keys = [k for k in target if k != CONST and target[k] != 0]
    if keys:
        return None
    return target.get(CONST, Fraction(0))


def _eliminate(row: Lin, by: Lin, pivot: str) -> Lin:
    if row.get(pivot, 0) == 0:
        return row
    scale = row[pivot] / by[pivot]
    out = _lin_add(row, by, -scale)
    out.pop(pivot, None)
    return out


def _scan_value(az: Atomizer, cons: list[Constraint], target: Lin
                ) -> Optional[Fraction]:
    """Bounded scan: try candidate values v, keep the one that is forced."""
    if az.sort not in (INT, NAT):
        return None
    lo, hi = _target_bounds(cons, target)
    if lo is None or hi is None or hi - lo > MAX_SYNTH_SCAN:
        return None
    forced = None
    for v in range(math.ceil(lo), math.floor(hi) + 1):
        # forced iff cons /\ target != v is infeasible
        diff = _lin_add(target, {CONST: Fraction(-v)})
        feasible_ne = False
        for side in (_mk_con(_lin_add(diff, {CONST: Fraction(1)}), "le"),
                     _mk_con(_lin_add(_lin_scale(diff, Fraction(-1)),
                                      {CONST: Fraction(1)}), "le")):
            eqs, ineqs = _int_rows(cons + [side])
            if omega_sat(eqs, ineqs):
                feasible_ne = True
                break
        if not feasible_ne:
            forced = Fraction(v)
            break
    return forced


def _target_bounds(cons: list[Constraint], target: Lin
                   ) -> tuple[Optional[Fraction], Optional[Fraction]]:
    keys = [k for k in target if k != CONST and target[k] != 0]
    if len(keys) != 1 or target[keys[0]] != 1:
        return None, None
    key = keys[0]
    base = target.get(CONST, Fraction(0))
    lo = hi = None
    for c in cons:
        if c.rel != "le":
            continue
        lin = c.lin()
        others = [k for k in lin if k != CONST and lin[k] != 0]
        if others != [key]:
            continue
        a = lin[key]
        b = -lin.get(CONST, Fraction(0))
        if a > 0:
            v = b / a + base
            hi = v if hi is None else min(hi, v)
        else:
            v = b / a + base
            lo = v if lo is None else max(lo, v)
    return lo, hi


# ---------------------------------------------------------------------------
# Revalidation


def revalidate_linear_arith(cert: Certificate) -> None:
    goal = goal_from_blob(cert.detail["goal"])
    try:
        detail = prove_linear(goal, None)
    except TacticFailed as e:
        raise CertificateError(f"linear_arith no longer validates: {e}")
    for stored, fresh in zip(cert.detail["branches"], detail["branches"]):
        if stored.get("method") != fresh.get("method"):
            raise CertificateError("linear_arith method mismatch")
        if stored.get("method") == "farkas":
            az, hyps, branches = _collect_system(goal, None)
            mults = {k: Fraction(*v)
                     for k, v in stored["multipliers"].items()}
            ok = False
            for branch in branches:
                if verify_farkas(hyps + branch, mults):
                    ok = True
                    break
            if not ok:
                raise CertificateError("stored Farkas combination is invalid")

"""auto: goal-tree automation, safe decomposition first, closers second.

The move order is fixed: introduce binders and implications, split iffs,
conjunctions and set equalities, destructure hypothesis conjunctions,
case on hypothesis disjunctions, substitute variable equations, try an
assumption-matching exact, then run the closers (rfl, eval_decide,
ring_nf, linear_arith, rw_search at depth 3), and finally branch on a
disjunctive goal.  The node budget bounds the number of goal visits.
Everything is deterministic, so a recorded verdict can be re-validated
by simply running auto again.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..expr import (
    Atom, Binder, Conn, LocalDecl, PROP, Telescope, Term, Var, free_vars,
    instantiate_bvar, instantiate_metas, metavars_of, mk_conn, mk_var,
    substitute,
)
from ..norm import definitional_eq, fold_literals, normalize
from ..kernel import (
    Certificate, CertificateError, Goal, SolutionState, TacticFailed,
    TacticResult, goal_blob, goal_from_blob, register_tactic,
)
from .decide import decide_prop
from .linarith import prove_linear
from .rewrite import rw_search_term
from .ring import ring_closes

AUTO_BUDGET = 500
AUTO_RW_DEPTH = 3


class BudgetExhausted(TacticFailed):
    pass


@dataclass
class _Counter:
    n: int

    def tick(self) -> None:
        self.n -= 1
        if self.n < 0:
            raise BudgetExhausted("auto node budget exhausted")


_SIMP_ROUNDS = 25


def _simp(t):
    """Normalization with the lemma library, forward direction, fixpoint."""
    from .rewrite import apply_rule, default_library
    t = normalize(t)
    for _ in range(_SIMP_ROUNDS):
        changed = False
        for lemma in default_library():
            new = apply_rule(t, lemma, back=False)
            if new is not None and new != t:
                t = normalize(new)
                changed = True
                break
        if not changed:
            return t
    return t


def _prove(goal: Goal, budget: _Counter, seen: frozenset[str]) -> bool:
    budget.tick()
    concl = _simp(goal.concl)
    ctx = goal.ctx
    key = _goal_key(ctx, concl)
    if key in seen:
        return False
    seen = seen | {key}

    if isinstance(concl, Conn) and concl.op == "true":
        return True

    # safe decomposition of the conclusion
    if isinstance(concl, Binder) and concl.kind == "forall":
        name = ctx.fresh(concl.var)
        g = Goal(goal.case, ctx.extended(LocalDecl(name, concl.vsort)),
                 instantiate_bvar(concl.body, mk_var(name, concl.vsort)))
        return _prove(g, budget, seen)
    if isinstance(concl, Conn) and concl.op == "imp":
        name = ctx.fresh("h")
        g = Goal(goal.case,
                 ctx.extended(LocalDecl(name, PROP, prop=concl.args[0])),
                 concl.args[1])
        return _prove(g, budget, seen)
    if isinstance(concl, Conn) and concl.op in ("iff", "and"):
        a, b = concl.args
        if concl.op == "iff":
            ga = Goal(goal.case, ctx, mk_conn("imp", (a, b)))
            gb = Goal(goal.case, ctx, mk_conn("imp", (b, a)))
        else:
            ga = Goal(goal.case, ctx, a)
            gb = Goal(goal.case, ctx, b)
        return _prove(ga, budget, seen) and _prove(gb, budget, seen)
    if isinstance(concl, Atom) and concl.rel == "eq" \
            and concl.args[0].sort.kind == "Set":
        # extensionality: S = T becomes x in S <-> x in T for a fresh x
        from ..expr import mk_atom
        elem = concl.args[0].sort.args[0]
        name = ctx.fresh("x")
        x = mk_var(name, elem)
        opened = mk_conn("iff", (mk_atom("mem", (x, concl.args[0])),
                                 mk_atom("mem", (x, concl.args[1]))))
        return _prove(Goal(goal.case, ctx.extended(LocalDecl(name, elem)),
                           opened), budget, seen)

    # hypothesis decomposition, in telescope order
    for d in ctx.decls:
        if d.prop is None:
            continue
        p = normalize(d.prop)
        if isinstance(p, Conn) and p.op == "false":
            return True
        if isinstance(p, Conn) and p.op == "and":
            decls = [x if x.name != d.name
                     else LocalDecl(d.name, PROP, prop=p.args[0])
                     for x in ctx.decls]
            ctx2 = Telescope(tuple(decls))
            extra = ctx2.fresh(d.name + ".r")
            ctx2 = ctx2.extended(LocalDecl(extra, PROP, prop=p.args[1]))
            return _prove(Goal(goal.case, ctx2, concl), budget, seen)
        if isinstance(p, Conn) and p.op == "or":
            left = [x if x.name != d.name
                    else LocalDecl(d.name, PROP, prop=p.args[0])
                    for x in ctx.decls]
            right = [x if x.name != d.name
                     else LocalDecl(d.name, PROP, prop=p.args[1])
                     for x in ctx.decls]
            return _prove(Goal(goal.case, Telescope(tuple(left)), concl),
                          budget, seen) \
                and _prove(Goal(goal.case, Telescope(tuple(right)), concl),
                           budget, seen)

    # substitute variable equations (h : x = t with x not in t)
    for d in ctx.decls:
        if d.prop is None:
            continue
        p = normalize(d.prop)
        if isinstance(p, Atom) and p.rel == "eq":
            for me, other in (p.args, p.args[::-1]):
                if isinstance(me, Var) and me.name not in free_vars(other) \
                        and ctx.lookup(me.name) is not None \
                        and ctx.lookup(me.name).prop is None:
                    g = _subst_goal(goal, d.name, me.name, other)
                    return _prove(g, budget, seen)

    # assumption-matching exact
    if not metavars_of(concl):
        for d in ctx.decls:
            if d.prop is not None and not metavars_of(d.prop) \
                    and definitional_eq(d.prop, concl):
                return True

    # closers
    if _closers(Goal(goal.case, ctx, concl)):
        return True

    # disjunctive goal: branch
    if isinstance(concl, Conn) and concl.op == "or":
        return _prove(Goal(goal.case, ctx, concl.args[0]), budget, seen) \
            or _prove(Goal(goal.case, ctx, concl.args[1]), budget, seen)
    return False


def _goal_key(ctx: Telescope, concl: Term) -> str:
    from ..syntax import print_term
    hyps = ";".join(
        f"{d.name}:{print_term(d.prop)}" if d.prop is not None
        else f"{d.name}:{d.sort}"
        for d in ctx.decls)
    return hyps + "|-" + print_term(concl)


def _subst_goal(goal: Goal, hyp: str, var: str, value: Term) -> Goal:
    decls = []
    for d in goal.ctx.decls:
        if d.name == var or d.name == hyp:
            continue
        if d.prop is not None:
            decls.append(LocalDecl(d.name, PROP,
                                   prop=fold_literals(
                                       substitute(d.prop, var, value))))
        else:
            decls.append(d)
    concl = fold_literals(substitute(goal.concl, var, value))
    return Goal(goal.case, Telescope(tuple(decls)), concl)


def _closers(goal: Goal) -> bool:
    concl = goal.concl
    if metavars_of(concl):
        return False
    sides = None
    if isinstance(concl, Atom) and concl.rel == "eq":
        sides = concl.args
    elif isinstance(concl, Conn) and concl.op == "iff":
        sides = concl.args
    if sides is not None and definitional_eq(sides[0], sides[1]):
        return True
    try:
        ok, _ = decide_prop(concl)
        if ok:
            return True
    except TacticFailed:
        pass
    if ring_closes(concl):
        return True
    try:
        prove_linear(goal, None)
        return True
    except TacticFailed:
        pass
    if sides is not None:
        hit = rw_search_term(concl, goal, None, AUTO_RW_DEPTH)
        if hit is not None and not hit[2]:
            return True
    return False


@register_tactic("auto")
def auto(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    if goal.is_hole_goal():
        raise TacticFailed("auto does not apply to a hole goal")
    budget_n = int(argtext) if argtext.strip() else AUTO_BUDGET
    concl = instantiate_metas(goal.concl, state.asg_map())
    budget = _Counter(budget_n)
    start = Goal(goal.case, goal.ctx, concl)
    proved = _prove(start, budget, frozenset())
    if not proved:
        if budget.n < 0:
            raise BudgetExhausted("auto budget exhausted")
        raise TacticFailed("auto could not close the goal")
    cert = Certificate("auto", {
        "goal": goal_blob(goal, state.meta_sorts()),
        "budget": budget_n,
        "nodes_used": budget_n - budget.n,
    })
    return TacticResult(cert=cert)


def revalidate_auto(cert: Certificate) -> None:
    goal = goal_from_blob(cert.detail["goal"])
    budget = _Counter(cert.detail["budget"])
    try:
        proved = _prove(goal, budget, frozenset())
    except TacticFailed:
        proved = False
    if not proved:
        raise CertificateError("auto certificate no longer validates")

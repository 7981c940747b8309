"""Structural tactics: binder introduction, goal splitting, case analysis,
hypothesis citation, and closure up to definitional equality.

Provability-preserving tactics are flagged `safe`; the automation layer
and the forward phase of deductive sessions only chain through those.
"""

from __future__ import annotations

from ..expr import (
    Atom, Binder, Conn, INT, LocalDecl, Meta, NAT, PROP, Sort,
    Telescope, Term, free_vars, instantiate_bvar, mk_lit, mk_var,
)
from ..norm import definitional_eq, fold_literals, normalize
from ..kernel import (
    Certificate, Goal, Hole, SolutionState, TacticFailed, TacticResult,
    goal_blob, register_tactic,
)
from ..syntax import ParseError, parse_term, print_term, tokenize, _P
from .decide import Budget, DEFAULT_BUDGET, _probe_bounds, _conjuncts

MAX_CASE_SPLIT = 64


def _need_prop_goal(goal: Goal, tactic: str) -> Term:
    if goal.is_hole_goal():
        raise TacticFailed(f"{tactic} does not apply to a hole goal")
    return goal.concl


@register_tactic("intro")
def intro(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    concl = _need_prop_goal(goal, "intro")
    names = argtext.split()
    ctx = goal.ctx
    count = max(1, len(names))
    for i in range(count):
        want = names[i] if i < len(names) else None
        if isinstance(concl, Binder) and concl.kind == "forall":
            name = ctx.fresh(want or concl.var)
            ctx = ctx.extended(LocalDecl(name, concl.vsort))
            concl = instantiate_bvar(concl.body, mk_var(name, concl.vsort))
        elif isinstance(concl, Conn) and concl.op == "imp":
            name = ctx.fresh(want or "h")
            ctx = ctx.extended(LocalDecl(name, PROP, prop=concl.args[0]))
            concl = concl.args[1]
        else:
            raise TacticFailed(
                "intro needs a universally quantified or implication goal")
    return TacticResult(new_goals=(Goal(goal.case, ctx, concl),), safe=True)


@register_tactic("exists_intro")
def exists_intro(state: SolutionState, goal: Goal, argtext: str
                 ) -> TacticResult:
    concl = _need_prop_goal(goal, "exists_intro")
    if not (isinstance(concl, Binder) and concl.kind == "exists"):
        raise TacticFailed("exists_intro needs an existential goal")
    mid = state.fresh_meta_id(argtext.strip() or concl.var)
    hole = Hole(mid, goal.ctx, concl.vsort)
    body = instantiate_bvar(concl.body, Meta(concl.vsort, mid))
    return TacticResult(
        new_goals=(Goal(goal.case, goal.ctx, body),
                   Goal(mid, goal.ctx, concl.vsort)),
        new_holes=(hole,),
        safe=True,
    )


@register_tactic("iff_split")
def iff_split(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    concl = _need_prop_goal(goal, "iff_split")
    if not (isinstance(concl, Conn) and concl.op == "iff"):
        raise TacticFailed("iff_split needs an iff goal")
    a, b = concl.args
    from ..expr import mk_conn
    return TacticResult(new_goals=(
        Goal(f"{goal.case}.mp", goal.ctx, mk_conn("imp", (a, b))),
        Goal(f"{goal.case}.mpr", goal.ctx, mk_conn("imp", (b, a))),
    ), safe=True)


@register_tactic("and_split")
def and_split(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    concl = _need_prop_goal(goal, "and_split")
    if not (isinstance(concl, Conn) and concl.op == "and"):
        raise TacticFailed("and_split needs a conjunction goal")
    a, b = concl.args
    return TacticResult(new_goals=(
        Goal(f"{goal.case}.l", goal.ctx, a),
        Goal(f"{goal.case}.r", goal.ctx, b),
    ), safe=True)


def _parse_citation(argtext: str) -> tuple[str, list]:
    """Parse `h` or `h arg1 arg2 ...` into a name and raw argument trees."""
    p = _P(tokenize(argtext))
    raw = p.app_expr()
    if p.peek().kind != "eof":
        raise TacticFailed(f"trailing input in citation {argtext!r}")
    from ..syntax import RAppl, RName
    if isinstance(raw, RName):
        return raw.name, []
    if isinstance(raw, RAppl) and isinstance(raw.head, RName):
        return raw.head.name, list(raw.args)
    raise TacticFailed(f"cannot cite {argtext!r}")


def _instantiate_hyp(prop: Term, raw_args: list, ctx: Telescope,
                     metas: dict) -> tuple[Term, list[str]]:
    """Open leading foralls of a hypothesis at explicit argument terms."""
    from ..syntax import _Env, _elab
    arg_prints: list[str] = []
    for raw in raw_args:
        if not (isinstance(prop, Binder) and prop.kind == "forall"):
            raise TacticFailed("more arguments than leading quantifiers")
        env = _Env(ctx, [], dict(metas))
        arg = _elab(raw, prop.vsort, env)
        arg_prints.append(print_term(arg))
        prop = instantiate_bvar(prop.body, arg)
    return fold_literals(prop), arg_prints


@register_tactic("exact")
def exact(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    if not argtext.strip():
        raise TacticFailed("exact needs an argument")
    metas = state.meta_sorts()
    if goal.is_hole_goal():
        # term-mode: fill the hole with a well-sorted term
        try:
            value = parse_term(argtext, goal.ctx, goal.concl, metas=None)
        except (ParseError, Exception) as e:
            raise TacticFailed(f"exact: {e}")
        cert = Certificate("exact", {
            "goal": goal_blob(goal),
            "term": print_term(value),
        })
        return TacticResult(assignments=((goal.case, value),), cert=cert)
    name, raw_args = _parse_citation(argtext)
    decl = goal.ctx.lookup(name)
    if decl is None or decl.prop is None:
        raise TacticFailed(f"no hypothesis named {name!r}")
    instance, arg_prints = _instantiate_hyp(decl.prop, raw_args, goal.ctx,
                                            metas)
    concl = goal.concl
    if isinstance(concl, Meta):
        # Simultaneous hole fill: the only place a bare answer hole may be
        # unified against a hypothesis (deductive forward finish).
        if state.assigned_value(concl.mid) is not None:
            raise TacticFailed(f"?{concl.mid} is already assigned")
        cert = Certificate("exact", {
            "goal": goal_blob(goal, metas),
            "hyp": name, "args": arg_prints,
            "assigns": {concl.mid: print_term(instance)},
        })
        return TacticResult(assignments=((concl.mid, instance),), cert=cert)
    if not definitional_eq(_inst_state(instance, state),
                           _inst_state(concl, state)):
        raise TacticFailed(
            f"exact: {print_term(instance)} does not match the conclusion")
    cert = Certificate("exact", {
        "goal": goal_blob(goal, metas),
        "hyp": name, "args": arg_prints,
        "instance": print_term(instance),
    })
    return TacticResult(cert=cert)


def _inst_state(t: Term, state: SolutionState) -> Term:
    from ..expr import instantiate_metas
    return instantiate_metas(t, state.asg_map())


@register_tactic("rfl")
def rfl(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    concl = _need_prop_goal(goal, "rfl")
    concl = _inst_state(concl, state)
    sides = _eq_sides(concl)
    if sides is None:
        raise TacticFailed("rfl needs an equality or iff goal")
    lhs, rhs = sides
    if not definitional_eq(lhs, rhs):
        raise TacticFailed("rfl: sides are not definitionally equal")
    cert = Certificate("rfl", {
        "goal": goal_blob(goal, state.meta_sorts()),
        "nf": print_term(normalize(lhs)),
    })
    return TacticResult(cert=cert)


def _eq_sides(concl: Term):
    if isinstance(concl, Atom) and concl.rel == "eq":
        return concl.args
    if isinstance(concl, Conn) and concl.op == "iff":
        return concl.args
    return None


@register_tactic("have")
def have(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    _need_prop_goal(goal, "have")
    if ":" not in argtext:
        raise TacticFailed("usage: have <name> : <proposition>")
    name, prop_text = argtext.split(":", 1)
    name = name.strip()
    if not name.isidentifier():
        raise TacticFailed(f"bad hypothesis name {name!r}")
    if goal.ctx.lookup(name) is not None:
        raise TacticFailed(f"{name!r} already names a declaration")
    try:
        prop = parse_term(prop_text, goal.ctx, PROP,
                          metas=state.meta_sorts())
    except (ParseError, Exception) as e:
        raise TacticFailed(f"have: {e}")
    proof_goal = Goal(f"{goal.case}.{name}", goal.ctx, prop)
    cont = Goal(goal.case, goal.ctx.extended(
        LocalDecl(name, PROP, prop=prop)), goal.concl)
    return TacticResult(new_goals=(proof_goal, cont))


@register_tactic("cases")
def cases(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    _need_prop_goal(goal, "cases")
    name = argtext.strip()
    decl = goal.ctx.lookup(name)
    if decl is None or decl.prop is None:
        raise TacticFailed(f"no hypothesis named {name!r}")
    prop = normalize(_inst_state(decl.prop, state))
    if isinstance(prop, Conn) and prop.op == "or":
        gl = _replace_hyp(goal, name, prop.args[0], f"{goal.case}.l")
        gr = _replace_hyp(goal, name, prop.args[1], f"{goal.case}.r")
        return TacticResult(new_goals=(gl, gr), safe=True)
    if isinstance(prop, Conn) and prop.op == "and":
        ctx = Telescope(tuple(
            d if d.name != name else LocalDecl(name, PROP, prop=prop.args[0])
            for d in goal.ctx.decls))
        extra = ctx.fresh(f"{name}.r")
        ctx = ctx.extended(LocalDecl(extra, PROP, prop=prop.args[1]))
        return TacticResult(
            new_goals=(Goal(goal.case, ctx, goal.concl),), safe=True)
    if isinstance(prop, Conn) and prop.op == "false":
        cert = Certificate("cases", {
            "goal": goal_blob(goal, state.meta_sorts()),
            "false_hyp": name,
        })
        return TacticResult(cert=cert, safe=True)
    raise TacticFailed(f"cases: {name} is not a disjunction or conjunction")


def _replace_hyp(goal: Goal, name: str, prop: Term, case: str) -> Goal:
    ctx = Telescope(tuple(
        d if d.name != name else LocalDecl(name, PROP, prop=prop)
        for d in goal.ctx.decls))
    return Goal(case, ctx, goal.concl)


@register_tactic("int_cases")
def int_cases(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    """Bounded case split on an integer variable with literal bounds."""
    _need_prop_goal(goal, "int_cases")
    name = argtext.strip()
    decl = goal.ctx.lookup(name)
    if decl is None or decl.prop is not None:
        raise TacticFailed(f"no variable named {name!r}")
    if decl.sort not in (INT, NAT):
        raise TacticFailed("int_cases needs an Int or Nat variable")
    for h in state.unassigned_holes():
        if h.ctx.lookup(name) is not None:
            raise TacticFailed(
                "int_cases cannot split while an unfilled hole depends on "
                f"{name!r}")
    parts: list[Term] = []
    for d in goal.ctx.decls:
        if d.prop is not None:
            parts.extend(_conjuncts(normalize(d.prop)))
    renamed = [_rename_to_probe(p, name, decl.sort) for p in parts]
    lo, hi = _probe_bounds(renamed, Budget(DEFAULT_BUDGET))
    if decl.sort == NAT:
        lo = max(lo, 0) if lo is not None else 0
    if lo is None or hi is None:
        raise TacticFailed(f"no literal bounds on {name!r} in the hypotheses")
    import math
    lo_i, hi_i = math.ceil(lo), math.floor(hi)
    if hi_i - lo_i + 1 > MAX_CASE_SPLIT:
        raise TacticFailed(f"case split of width {hi_i - lo_i + 1} refused")
    goals = []
    for i, k in enumerate(range(lo_i, hi_i + 1), start=1):
        goals.append(_substitute_case(goal, name, k, decl.sort,
                                      f"{goal.case}.case_{i}"))
    return TacticResult(new_goals=tuple(goals), safe=True)


def _rename_to_probe(p: Term, name: str, sort: Sort) -> Term:
    from ..expr import substitute
    from .decide import _PROBE
    if name in free_vars(p):
        return substitute(p, name, mk_var(_PROBE, sort))
    return p


def _substitute_case(goal: Goal, name: str, k: int, sort: Sort,
                     case: str) -> Goal:
    from ..expr import substitute
    val = mk_lit(k, sort)
    decls = []
    for d in goal.ctx.decls:
        if d.name == name:
            continue
        if d.prop is not None:
            decls.append(LocalDecl(
                d.name, PROP,
                prop=fold_literals(substitute(d.prop, name, val))))
        else:
            decls.append(d)
    concl = fold_literals(substitute(goal.concl, name, val))
    return Goal(case, Telescope(tuple(decls)), concl)


# -- revalidation -------------------------------------------------------------


def revalidate_exact(cert: Certificate) -> None:
    from ..kernel import CertificateError, goal_from_blob
    detail = cert.detail
    goal = goal_from_blob(detail["goal"])
    if "term" in detail:
        value = parse_term(detail["term"], goal.ctx, goal.concl)
        if print_term(value) != detail["term"]:
            raise CertificateError("exact: stored term does not round-trip")
        return
    decl = goal.ctx.lookup(detail["hyp"])
    if decl is None or decl.prop is None:
        raise CertificateError("exact: cited hypothesis is gone")
    prop = decl.prop
    for arg_text in detail.get("args", []):
        if not (isinstance(prop, Binder) and prop.kind == "forall"):
            raise CertificateError("exact: over-instantiated hypothesis")
        arg = parse_term(arg_text, goal.ctx, prop.vsort)
        prop = instantiate_bvar(prop.body, arg)
    prop = fold_literals(prop)
    if "assigns" in detail:
        (mid, stored), = detail["assigns"].items()
        if print_term(prop) != stored:
            raise CertificateError("exact: assignment mismatch")
        return
    if print_term(prop) != detail["instance"]:
        raise CertificateError("exact: instance mismatch")
    if not isinstance(goal.concl, Term) \
            or not definitional_eq(prop, goal.concl):
        raise CertificateError("exact: instance no longer matches the goal")


def revalidate_rfl(cert: Certificate) -> None:
    from ..kernel import CertificateError, goal_from_blob
    goal = goal_from_blob(cert.detail["goal"])
    sides = _eq_sides(goal.concl)
    if sides is None or not definitional_eq(*sides):
        raise CertificateError("rfl certificate no longer validates")
    if print_term(normalize(sides[0])) != cert.detail["nf"]:
        raise CertificateError("rfl normal form mismatch")


def revalidate_cases(cert: Certificate) -> None:
    from ..kernel import CertificateError, goal_from_blob
    goal = goal_from_blob(cert.detail["goal"])
    decl = goal.ctx.lookup(cert.detail["false_hyp"])
    if decl is None or decl.prop is None:
        raise CertificateError("cases: false hypothesis is gone")
    prop = normalize(decl.prop)
    if not (isinstance(prop, Conn) and prop.op == "false"):
        raise CertificateError("cases: hypothesis is not False")

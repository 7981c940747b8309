"""Structural tactic behaviour on handcrafted goals."""

import pytest

from holebox.expr import INT, LocalDecl, PROP, REAL, Telescope
from holebox.kernel import (
    Goal, SolutionState, TacticFailed, apply_tactic,
)
from holebox.syntax import parse_term, print_term


def goal_state(text, decls=(), case="h"):
    tele = Telescope(tuple(decls))
    concl = parse_term(text, tele, PROP)
    return SolutionState(goals=(Goal(case, tele, concl),))


def the_goal(state, case="h"):
    return state.goal(case)


def test_intro_forall():
    st = goal_state("forall (x : Int), x = x")
    out = apply_tactic(st, "h", "intro", "x")
    g = the_goal(out)
    assert g.ctx.names() == ("x",)
    assert print_term(g.concl) == "x = x"


def test_intro_implication():
    st = goal_state("1 = 1 -> 2 = 2")
    out = apply_tactic(st, "h", "intro", "hp")
    g = the_goal(out)
    assert g.ctx.lookup("hp").prop is not None
    assert print_term(g.concl) == "2 = 2"


def test_intro_fails_on_atom():
    st = goal_state("3 = 3")
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "intro", "")


def test_exists_intro_creates_coupled_hole():
    st = goal_state("exists (a : Real), a^2 - 1 = 0")
    out = apply_tactic(st, "h", "exists_intro", "")
    assert [g.case for g in out.goals] == ["h", "a"]
    assert print_term(the_goal(out).concl) == "?a ^ 2 - 1 = 0"
    assert out.hole("a").target == REAL


def test_exists_intro_fails_on_forall():
    st = goal_state("forall (a : Int), a = a")
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "exists_intro", "")


def test_iff_split_names():
    st = goal_state("1 = 1 <-> 2 = 2")
    out = apply_tactic(st, "h", "iff_split", "")
    assert [g.case for g in out.goals] == ["h.mp", "h.mpr"]
    assert print_term(out.goal("h.mp").concl) == "1 = 1 -> 2 = 2"
    assert print_term(out.goal("h.mpr").concl) == "2 = 2 -> 1 = 1"


def test_iff_split_rejects_conjunction():
    st = goal_state("1 = 1 /\\ 2 = 2")
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "iff_split", "")


def test_exact_hypothesis():
    x = LocalDecl("x", INT)
    h = LocalDecl("h", PROP, prop=parse_term(
        "x = 3", Telescope((x,)), PROP))
    st = goal_state("x = 3", (x, h))
    out = apply_tactic(st, "h", "exact", "h")
    assert not out.goals


def test_exact_mismatch():
    x = LocalDecl("x", INT)
    h = LocalDecl("h", PROP, prop=parse_term("x = 3", Telescope((x,)), PROP))
    st = goal_state("x = 4", (x, h))
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "exact", "h")


def test_exact_with_instantiation_args():
    from holebox.expr import NAT, RAT, fn
    s = LocalDecl("s", fn(NAT, RAT))
    tele = Telescope((s,))
    h0 = LocalDecl("h0", PROP, prop=parse_term(
        "forall (m : Nat), s (m + 2) = s (m + 1) + s m", tele, PROP))
    st = goal_state("s 9 = s 8 + s 7", (s, h0))
    out = apply_tactic(st, "h", "exact", "h0 7")
    assert not out.goals


def test_rfl_definitional():
    st = goal_state("(3 : Nat) = 2 + 1")
    out = apply_tactic(st, "h", "rfl", "")
    assert not out.goals


def test_rfl_real_opaque():
    st = goal_state("(2 + 1 : Real) = 1 + 2")
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "rfl", "")


def test_rfl_interval_unfolding():
    st = goal_state("Iio ((-4/3 : Real)) = {x : Real | x < -4/3}")
    out = apply_tactic(st, "h", "rfl", "")
    assert not out.goals


def test_have_then_exact():
    st = goal_state("1 = 1")
    out = apply_tactic(st, "h", "have", "k : 2 + 2 = 4")
    assert [g.case for g in out.goals] == ["h.k", "h"]
    out = apply_tactic(out, "h.k", "eval_decide", "")
    out = apply_tactic(out, "h", "rfl", "")
    assert not out.goals


def test_cases_disjunction_and_false():
    x = LocalDecl("x", INT)
    h = LocalDecl("h", PROP, prop=parse_term(
        "x = 1 \\/ x = 2", Telescope((x,)), PROP))
    st = goal_state("0 <= x", (x, h))
    out = apply_tactic(st, "h", "cases", "h")
    assert [g.case for g in out.goals] == ["h.l", "h.r"]
    assert print_term(out.goal("h.l").ctx.lookup("h").prop) == "x = 1"
    hf = LocalDecl("hf", PROP, prop=parse_term("False", Telescope(), PROP))
    st2 = goal_state("1 = 2", (hf,))
    out2 = apply_tactic(st2, "h", "cases", "hf")
    assert not out2.goals


def test_cases_conjunction_destructures():
    h = LocalDecl("h", PROP, prop=parse_term("1 = 1 /\\ 2 = 2",
                                             Telescope(), PROP))
    st = goal_state("2 = 2", (h,))
    out = apply_tactic(st, "h", "cases", "h")
    g = the_goal(out)
    assert print_term(g.ctx.lookup("h").prop) == "1 = 1"
    assert g.ctx.lookup("h.r") is not None


def test_int_cases_bounded_split():
    x = LocalDecl("x", INT)
    tele = Telescope((x,))
    lb = LocalDecl("lb", PROP, prop=parse_term("-1 <= x", tele, PROP))
    ub = LocalDecl("ub", PROP, prop=parse_term("x <= 1", tele, PROP))
    st = goal_state("x * x <= 1", (x, lb, ub))
    out = apply_tactic(st, "h", "int_cases", "x")
    assert [g.case for g in out.goals] == \
        ["h.case_1", "h.case_2", "h.case_3"]
    assert print_term(out.goal("h.case_1").concl) == "1 <= 1"
    for case in ("h.case_1", "h.case_2", "h.case_3"):
        out = apply_tactic(out, case, "eval_decide", "")
    assert not out.goals


def test_int_cases_needs_bounds():
    x = LocalDecl("x", INT)
    st = goal_state("x = x", (x,))
    with pytest.raises(TacticFailed):
        apply_tactic(st, "h", "int_cases", "x")


# -- provability preservation of the safe tactics -----------------------------
#
# On goals over small bounded Int domains, model-checking the conjunction
# of the subgoals equals model-checking the original goal: truth of
# (ctx hypotheses -> conclusion) over all variable assignments is
# preserved by intro, iff_split, and_split, cases, and equality rewrite.

import itertools

from conftest import brute_eval
from holebox.expr import free_vars, mk_conn, substitute

DOMAIN = range(-2, 3)


def _goal_truth(goal):
    names = [d.name for d in goal.ctx.decls if d.prop is None]
    hyps = [d.prop for d in goal.ctx.decls if d.prop is not None]
    concl = goal.concl
    for vals in itertools.product(DOMAIN, repeat=len(names)):
        h = hyps
        c = concl
        for name, v in zip(names, vals):
            lit = parse_term(str(v), expected=INT)
            h = [substitute(p, name, lit) for p in h]
            c = substitute(c, name, lit)
        if all(brute_eval(p) for p in h) and not brute_eval(c):
            return False
    return True


def _state_truth(state):
    return all(_goal_truth(g) for g in state.goals)


def test_safe_tactics_preserve_model_checking(rng):
    from holebox.expr import mk_atom, mk_lit, mk_var

    def rand_atom(names):
        lhs = mk_var(rng.choice(names), INT)
        rhs = mk_lit(rng.randint(-2, 2), INT)
        return mk_atom(rng.choice(["eq", "ne", "lt", "le"]), (lhs, rhs))

    checked = 0
    for _ in range(120):
        names = ["x", "y"]
        decls = [LocalDecl(n, INT) for n in names]
        shape = rng.choice(["imp", "iff", "and", "or_hyp", "rewrite"])
        if shape in ("imp", "iff", "and"):
            concl = mk_conn(shape, (rand_atom(names), rand_atom(names)))
            hyp = rand_atom(names)
        elif shape == "or_hyp":
            concl = rand_atom(names)
            hyp = mk_conn("or", (rand_atom(names), rand_atom(names)))
        else:
            concl = rand_atom(names)
            hyp = mk_atom("eq", (mk_var("x", INT),
                                 mk_lit(rng.randint(-2, 2), INT)))
        tele = Telescope(tuple(decls) + (LocalDecl("hp", PROP, prop=hyp),))
        state = SolutionState(goals=(Goal("h", tele, concl),))
        tactic, args = {
            "imp": ("intro", "hq"), "iff": ("iff_split", ""),
            "and": ("and_split", ""), "or_hyp": ("cases", "hp"),
            "rewrite": ("rewrite", "hp"),
        }[shape]
        try:
            out = apply_tactic(state, "h", tactic, args)
        except TacticFailed:
            continue   # e.g. the rewrite pattern does not occur
        assert _state_truth(state) == _state_truth(out), shape
        checked += 1
    assert checked >= 80

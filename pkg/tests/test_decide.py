"""Exact evaluation: spec vectors plus an independent brute-force oracle."""

import pytest

from holebox.expr import INT, PROP, Telescope, mk_lit
from holebox.syntax import parse_term
from holebox.tactics.decide import (
    EvalBudgetExceeded, EvalNotClosed, EvaluatesFalse, decide_prop,
)


def decide(text, expected=PROP):
    return decide_prop(parse_term(text, Telescope(), expected))[0]


def test_rational_scientific():
    assert decide("(364000 : Rat) = 3.64 * 10^5")


def test_divisor_sum_284():
    assert decide("(sum d in {y : Nat | y in divisors 284 /\\ y < 284}, d)"
                  " = 220")


def test_units_digit():
    assert decide("(16^17 * 17^18 * 18^19) % 10 = 8")


def test_cardinality_bounded_enumeration():
    assert decide("card {x : Int | abs (x - 2) <= 28 / 5} = 11")


def test_primality_trial_division():
    assert decide("not prime (2^(2^5) + 1)")
    assert decide("prime (2^(2^4) + 1)")


def test_bounded_quantifiers():
    assert decide("forall (p : Nat), 90 < p /\\ p < 96 -> not prime p")
    assert decide("exists (p : Nat), 89 < p /\\ p < 98 /\\ prime p")


def test_evaluates_false_is_distinct():
    from holebox.expr import LocalDecl
    from holebox.kernel import Goal, SolutionState, apply_tactic
    tele = Telescope((LocalDecl("x", INT),))
    open_goal = Goal("h", tele, parse_term("x = x", tele, PROP))
    false_goal = Goal("h", Telescope(), parse_term("1 = 2", Telescope(), PROP))
    with pytest.raises(EvaluatesFalse):
        apply_tactic(SolutionState(goals=(false_goal,)), "h",
                     "eval_decide", "")
    with pytest.raises(EvalNotClosed):
        apply_tactic(SolutionState(goals=(open_goal,)), "h",
                     "eval_decide", "")


def test_budget_exceeded():
    with pytest.raises(EvalBudgetExceeded):
        decide_prop(parse_term("card {x : Int | abs x <= 10^7} = 1",
                               Telescope(), PROP), budget_n=1000)


def test_mod_zero_and_div_zero_conventions():
    assert decide("7 % 0 = 7")
    assert decide("(3 / 0 : Rat) = 0")
    assert decide("((-7) : Int) / 2 = -4")   # floor division
    assert decide("(-11213141) % 18 = 13")


def test_oracle_agreement_closed_props(fuzzer, rng):
    """Engine verdicts equal independent evaluation on closed propositions."""
    from conftest import brute_eval
    from holebox.expr import mk_app, mk_atom, mk_conn
    ops = ["add", "sub", "mul", "mod"]
    rels = ["eq", "ne", "lt", "le", "dvd"]

    def closed_num(depth):
        if depth <= 0 or rng.random() < 0.4:
            return mk_lit(rng.randint(-20, 20), INT)
        return mk_app(rng.choice(ops),
                      (closed_num(depth - 1), closed_num(depth - 1)))

    def closed_prop(depth):
        if depth <= 0 or rng.random() < 0.5:
            return mk_atom(rng.choice(rels),
                           (closed_num(2), closed_num(2)))
        op = rng.choice(["and", "or", "imp", "not"])
        if op == "not":
            return mk_conn("not", (closed_prop(depth - 1),))
        return mk_conn(op, (closed_prop(depth - 1), closed_prop(depth - 1)))

    for _ in range(500):
        prop = closed_prop(3)
        got, _ = decide_prop(prop)
        assert got == brute_eval(prop)

"""Restricted propositional equivalence between answer terms.

Two answers are equivalent when the equality statement built over the
problem's variables and hypotheses is proven by a fixed automation
stack, tried in order: rfl, eval_decide, ring_nf (closing mode),
rw_search at depth 6, auto with a 500-node budget.  First success wins
and is reported; failure of the whole stack is a verdict, not an error.
Prop-sorted answers (deductive sessions) compare by iff instead of
equality, which the verdict flags.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .expr import (
    PROP, SortError, Term, free_vars, mk_atom, mk_conn,
)
from .kernel import Goal, SolutionState, TacticFailed, apply_tactic
from .syntax import Problem


class FreeVarError(SortError):
    pass


RPE_STACK = ("rfl", "eval_decide", "ring_nf", "rw_search", "auto")

_STACK_ARGS = {"rw_search": "6", "auto": "500"}


@dataclass(frozen=True)
class RpeVerdict:
    equivalent: bool
    succeeded_by: Optional[str]      # member of RPE_STACK
    statement: Goal
    prop_answers: bool = False       # iff comparison instead of equality

    def to_json(self) -> dict:
        from .kernel import render_goal
        return {
            "equivalent": self.equivalent,
            "by": self.succeeded_by or "none",
            "statement": render_goal(self.statement),
            "propAnswers": self.prop_answers,
        }


def build_rpe_goal(p: Problem, a_hat: Term, a_bar: Term) -> Goal:
    """The equality statement over (V, Phi): a_hat = a_bar (iff on Prop)."""
    qsort = p.queriable[1]
    for label, t in (("candidate", a_hat), ("ground truth", a_bar)):
        if t.sort != qsort:
            raise SortError(
                f"{label} answer has sort {t.sort}, expected {qsort}")
        stray = free_vars(t) - {n for n, _ in p.vars}
        if stray:
            raise FreeVarError(
                f"{label} answer depends on {sorted(stray)} outside V")
    if qsort == PROP:
        concl = mk_conn("iff", (a_hat, a_bar))
    else:
        concl = mk_atom("eq", (a_hat, a_bar))
    return Goal("rpe", p.telescope(), concl)


def rpe_check(p: Problem, a_hat: Term, a_bar: Term) -> RpeVerdict:
    goal = build_rpe_goal(p, a_hat, a_bar)
    state = SolutionState(goals=(goal,))
    prop_answers = p.queriable[1] == PROP
    for stage in RPE_STACK:
        try:
            out = apply_tactic(state, "rpe", stage, _STACK_ARGS.get(stage, ""))
        except TacticFailed:
            continue
        if not out.goals:
            return RpeVerdict(True, stage, goal, prop_answers)
        # a transforming stage (ring_nf normalization mode) does not count
    return RpeVerdict(False, None, goal, prop_answers)

"""The trusted core: goals, holes, solution states, and script replay.

States are immutable snapshots.  A tactic application never mutates its
input; it either returns a fresh state or raises TacticFailed, in which
case the caller keeps the old state.  Every goal-closing step records a
certificate saying why the goal closed, and `recheck` re-validates all
of them, which substitutes for a typechecking kernel.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

from .expr import (
    ExprError, LocalDecl, Meta, OccursCheckError, PROP, Sort, SortError,
    Telescope, Term, free_vars, instantiate_metas, metavars_of,
)
from .syntax import Problem, ProofScript, ScriptLine, print_term


class KernelError(Exception):
    pass


class TacticFailed(KernelError):
    """The tactic does not apply; the input state is unchanged."""


class OutOfContextError(KernelError):
    pass


class CertificateError(KernelError):
    pass


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Goal:
    case: str
    ctx: Telescope
    concl: Union[Term, Sort]    # a Sort target marks the goal of a hole

    def is_hole_goal(self) -> bool:
        return isinstance(self.concl, Sort)


@dataclass(frozen=True)
class Hole:
    mid: str
    ctx: Telescope
    target: Sort


@dataclass(frozen=True)
class Certificate:
    tactic: str
    detail: dict

    def digest(self) -> str:
        blob = json.dumps({"tactic": self.tactic, "detail": self.detail},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class TraceStep:
    goal: str
    tactic: str
    argtext: str
    closed: tuple[str, ...] = ()
    assigned: tuple[str, ...] = ()
    cert: Optional[Certificate] = None

    def render(self) -> str:
        body = f"{self.tactic} {self.argtext}".rstrip()
        return f"@goal {self.goal} {body}"


@dataclass(frozen=True)
class SolutionState:
    goals: tuple[Goal, ...] = ()
    holes: tuple[Hole, ...] = ()
    assignment: tuple[tuple[str, Term], ...] = ()
    trace: tuple[TraceStep, ...] = ()

    # -- queries ------------------------------------------------------------

    def goal(self, case: Optional[str] = None) -> Goal:
        if case is None:
            if not self.goals:
                raise TacticFailed("no goals")
            return self.goals[0]
        for g in self.goals:
            if g.case == case:
                return g
        raise TacticFailed(f"no goal named {case!r}")

    def hole(self, mid: str) -> Hole:
        for h in self.holes:
            if h.mid == mid:
                return h
        raise KernelError(f"no hole ?{mid}")

    def asg_map(self) -> dict[str, Term]:
        return dict(self.assignment)

    def assigned_value(self, mid: str) -> Optional[Term]:
        for k, v in self.assignment:
            if k == mid:
                return v
        return None

    def unassigned_holes(self) -> tuple[Hole, ...]:
        done = {k for k, _ in self.assignment}
        return tuple(h for h in self.holes if h.mid not in done)

    def meta_sorts(self) -> dict[str, Sort]:
        return {h.mid: h.target for h in self.holes}

    def state_hash(self) -> str:
        return hashlib.sha256(render_state(self).encode()).hexdigest()

    # -- transitions ----------------------------------------------------

    def with_goal_replaced(self, case: str, new_goals: tuple[Goal, ...],
                           step: TraceStep) -> "SolutionState":
        existing = {g.case for g in self.goals if g.case != case}
        for g in new_goals:
            if g.case in existing:
                raise KernelError(f"duplicate goal name {g.case!r}")
            existing.add(g.case)
        out: list[Goal] = []
        for g in self.goals:
            if g.case == case:
                out.extend(ng for ng in new_goals if not ng.is_hole_goal())
            else:
                out.append(g)
        out.extend(ng for ng in new_goals if ng.is_hole_goal())
        return replace(self, goals=tuple(out), trace=self.trace + (step,))

    def with_new_hole(self, hole: Hole) -> "SolutionState":
        if any(h.mid == hole.mid for h in self.holes):
            raise KernelError(f"duplicate hole ?{hole.mid}")
        return replace(self, holes=self.holes + (hole,))

    def fresh_meta_id(self, base: str) -> str:
        taken = {h.mid for h in self.holes} | {g.case for g in self.goals}
        if base not in taken:
            return base
        i = 1
        while f"{base}{i}" in taken:
            i += 1
        return f"{base}{i}"


def is_terminal(s: SolutionState) -> bool:
    return not s.goals and not s.unassigned_holes()


# ---------------------------------------------------------------------------
# Metavariable assignment


def assign_metavar(s: SolutionState, mid: str, value: Term,
                   step: Optional[TraceStep] = None) -> SolutionState:
    hole = s.hole(mid)
    if s.assigned_value(mid) is not None:
        raise KernelError(f"?{mid} is already assigned")
    if value.sort != hole.target:
        raise SortError(
            f"?{mid} expects {hole.target}, got {value.sort}")
    allowed = set(hole.ctx.names())
    stray = free_vars(value) - allowed
    if stray:
        raise OutOfContextError(
            f"assignment for ?{mid} uses {sorted(stray)} outside its context")
    new_asg = dict(s.assignment)
    new_asg[mid] = value
    try:
        instantiate_metas(value, new_asg)   # occurs check, transitively
    except OccursCheckError:
        raise
    asg = tuple(sorted(new_asg.items()))
    goals = tuple(_instantiate_goal(g, new_asg) for g in s.goals
                  if g.case != mid)
    out = replace(s, goals=goals, assignment=asg)
    if step is not None:
        out = replace(out, trace=out.trace + (step,))
    return out


def _instantiate_goal(g: Goal, asg: dict[str, Term]) -> Goal:
    decls = []
    for d in g.ctx.decls:
        if d.prop is not None:
            decls.append(LocalDecl(d.name, d.sort,
                                   prop=instantiate_metas(d.prop, asg)))
        else:
            decls.append(d)
    concl = g.concl if isinstance(g.concl, Sort) \
        else instantiate_metas(g.concl, asg)
    return Goal(g.case, Telescope(tuple(decls)), concl)


# ---------------------------------------------------------------------------
# Tactic protocol


@dataclass
class TacticResult:
    """Outcome of applying one tactic to one goal."""
    new_goals: tuple[Goal, ...] = ()
    new_holes: tuple[Hole, ...] = ()
    assignments: tuple[tuple[str, Term], ...] = ()
    cert: Optional[Certificate] = None
    safe: bool = False


TacticFn = Callable[[SolutionState, Goal, str], TacticResult]

TACTICS: dict[str, TacticFn] = {}


def register_tactic(name: str):
    def deco(fn: TacticFn) -> TacticFn:
        TACTICS[name] = fn
        return fn
    return deco


def apply_tactic(s: SolutionState, case: Optional[str], tactic: str,
                 argtext: str = "") -> SolutionState:
    """Apply one named tactic; returns a fresh state or raises TacticFailed."""
    g = s.goal(case)
    fn = TACTICS.get(tactic)
    if fn is None:
        raise TacticFailed(f"unknown tactic {tactic!r}")
    res = fn(s, g, argtext)
    closed = () if res.new_goals else (g.case,)
    step = TraceStep(g.case, tactic, argtext, closed,
                     tuple(k for k, _ in res.assignments), res.cert)
    out = s
    for h in res.new_holes:
        out = out.with_new_hole(h)
    out = out.with_goal_replaced(g.case, res.new_goals, step)
    for mid, val in res.assignments:
        out = assign_metavar(out, mid, val)
    return out


# ---------------------------------------------------------------------------
# Initialization: solving-mode (hole plus goal) and proving-mode states


def init_generic(p: Problem) -> tuple[SolutionState, str]:
    """Initial state: the answer hole plus one goal over (V, Phi).

    Returns the state and the answer hole id.  Satisfiability of the
    problem is presupposed, not checked.
    """
    tele = p.telescope()
    qname, qsort = p.queriable
    mid = "w"
    hole = Hole(mid, tele, qsort)
    meta = Meta(qsort, mid)
    concl = p.conclusion()
    from .expr import substitute
    concl = substitute(concl, qname, meta)
    goal = Goal("h", tele, concl)
    hole_goal = Goal(mid, tele, qsort)
    return SolutionState(goals=(goal, hole_goal), holes=(hole,)), mid


def init_prove(p: Problem, answer: Term) -> SolutionState:
    """Theorem-mode initial state for P(answer): no holes."""
    from .expr import substitute
    tele = p.telescope()
    qname, qsort = p.queriable
    if answer.sort != qsort:
        raise SortError(f"answer sort {answer.sort}, expected {qsort}")
    concl = substitute(p.conclusion(), qname, answer)
    return SolutionState(goals=(Goal("h", tele, concl),))


# ---------------------------------------------------------------------------
# Deterministic script replay


@dataclass(frozen=True)
class ReplayReport:
    accepted: bool
    final: SolutionState
    failed_line: Optional[int] = None
    reason: Optional[str] = None


def run_script(state: SolutionState, script: ProofScript) -> ReplayReport:
    for ln in script.lines:
        try:
            state = apply_tactic(state, ln.goal, ln.tactic, ln.argtext)
        except (KernelError, ExprError) as e:
            return ReplayReport(False, state, ln.lineno,
                                f"{ln.tactic}: {e}")
    if not is_terminal(state):
        return ReplayReport(False, state, None, "script left open goals")
    return ReplayReport(True, state)


def replay_check(p: Problem, script: ProofScript) -> ReplayReport:
    """Replay a script from the generic initial state and recheck closures."""
    from . import fps as _fps
    state = _fps.session_init(p).state
    report = run_script(state, script)
    if report.accepted:
        try:
            recheck(report.final)
        except CertificateError as e:
            return ReplayReport(False, report.final, None, str(e))
    return report


def recheck(final: SolutionState) -> None:
    """Re-validate every closure certificate in a finished trace."""
    from .tactics import revalidate
    for step in final.trace:
        if step.cert is not None:
            revalidate(step, final)


# ---------------------------------------------------------------------------
# Goal serialization for self-contained certificates


def goal_blob(g: Goal, metas: Optional[dict[str, Sort]] = None) -> dict:
    from .expr import Lit, subterms
    ctx = []
    lit_sorts: set[str] = set()

    def scan(t: Term) -> None:
        for s in subterms(t):
            if isinstance(s, Lit):
                lit_sorts.add(str(s.sort))

    for d in g.ctx.decls:
        if d.prop is not None:
            ctx.append([d.name, "Prop", print_term(d.prop)])
            scan(d.prop)
        else:
            ctx.append([d.name, str(d.sort), None])
    out: dict = {"case": g.case, "ctx": ctx}
    if isinstance(g.concl, Sort):
        out["sort_target"] = str(g.concl)
    else:
        out["concl"] = print_term(g.concl)
        scan(g.concl)
        used = metavars_of(g.concl)
        for d in g.ctx.decls:
            if d.prop is not None:
                used |= metavars_of(d.prop)
        if used and metas:
            out["metas"] = {m: str(metas[m]) for m in sorted(used)}
    if len(lit_sorts) == 1:
        # lets closed-numeral conclusions reparse at the original sort
        out["numeral_sort"] = lit_sorts.pop()
    return out


def goal_from_blob(blob: dict) -> Goal:
    from .syntax import parse_term, _parse_sort_text
    menv = {m: _parse_sort_text(s) for m, s in blob.get("metas", {}).items()}
    default = None
    if blob.get("numeral_sort"):
        default = _parse_sort_text(blob["numeral_sort"])
    decls: list[LocalDecl] = []
    tele = Telescope()
    for name, sort_text, prop_text in blob["ctx"]:
        if prop_text is not None:
            d = LocalDecl(name, PROP,
                          prop=parse_term(prop_text, tele, PROP, metas=menv,
                                          default_numeral=default))
        else:
            d = LocalDecl(name, _parse_sort_text(sort_text))
        decls.append(d)
        tele = Telescope(tuple(decls))
    if "sort_target" in blob:
        return Goal(blob["case"], tele, _parse_sort_text(blob["sort_target"]))
    concl = parse_term(blob["concl"], tele, PROP, metas=menv,
                       default_numeral=default)
    return Goal(blob["case"], tele, concl)


# ---------------------------------------------------------------------------
# State rendering (case blocks, one per open goal and hole)


def render_goal(g: Goal) -> str:
    lines = [f"case {g.case}"]
    for d in g.ctx.decls:
        if d.prop is not None:
            lines.append(f"({d.name} : {print_term(d.prop)})")
        else:
            lines.append(f"({d.name} : {d.sort})")
    if isinstance(g.concl, Sort):
        lines.append(f"|- {g.concl}")
    else:
        lines.append(f"|- {print_term(g.concl)}")
    return "\n".join(lines)


def render_state(s: SolutionState) -> str:
    if not s.goals:
        parts = ["No goals"]
    else:
        parts = [render_goal(g) for g in s.goals]
    if s.assignment:
        asg = ", ".join(f"?{k} := {print_term(v)}" for k, v in s.assignment)
        parts.append(f"-- assignments: {asg}")
    return "\n".join(parts)


def script_of_trace(s: SolutionState) -> ProofScript:
    lines = tuple(
        ScriptLine(st.goal, st.tactic, st.argtext, i + 1)
        for i, st in enumerate(s.trace))
    return ProofScript(lines)

"""Session orchestration for constructive problem-solving.

Two session protocols over the kernel:

* standard sessions start from one main goal `h` whose conclusion has
  the queriable replaced by the answer hole `?w`, plus the hole case
  `w`; finishing means reaching the terminal state, and the certificate
  re-proves the instantiated statement from scratch (soundness as an
  executable check);

* deductive sessions split the main goal into a forward case `h.mp`
  (derive the answer proposition from the body) and a backward case
  `h.mpr` (recover the body from the answer), with the answer hole at
  sort Prop.  Finishing the forward case certifies the completeness
  direction; finishing backward as well certifies soundness.  The exact
  tactic citing a hypothesis against the bare `?w` target performs the
  simultaneous fill-and-close.

`fps_to_dfps` is the find-all injection: the queriable becomes an extra
universally quantified variable and the new answer is the proposition
`a = answer`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Optional

from .expr import (
    LocalDecl, Meta, PROP, Term, Var, free_vars, instantiate_metas,
    metavars_of, mk_atom, mk_conn, substitute,
)
from .kernel import (
    Goal, Hole, KernelError, SolutionState, apply_tactic, init_prove,
    is_terminal, run_script, recheck, script_of_trace,
)
from .syntax import Problem, ProofScript, ScriptLine, print_term

ANSWER_HOLE = "w"
FORWARD_HYP = "h_p_1"
BACKWARD_HYP = "h_a"


class SessionError(KernelError):
    pass


class InitError(SessionError):
    pass


class NotFinished(SessionError):
    pass


class DependsOnNonV(SessionError):
    pass


class CertifyFailed(SessionError):
    pass


@dataclass(frozen=True)
class Session:
    problem: Problem
    state: SolutionState
    answer_hole: str = ANSWER_HOLE

    @property
    def framework(self) -> str:
        return self.problem.framework

    def apply(self, case: Optional[str], tactic: str,
              argtext: str = "") -> "Session":
        return replace(self, state=apply_tactic(self.state, case, tactic,
                                                argtext))

    def phase(self) -> str:
        if self.framework != "dfps":
            return "done" if is_terminal(self.state) else "solving"
        if is_terminal(self.state):
            return "done"
        return "backward" if forward_finished(self) else "forward"


def fps_init(p: Problem) -> Session:
    if p.framework != "fps":
        raise InitError("fps_init needs a problem in the fps framework")
    if not p.concls:
        raise InitError("problem has no conclusions")
    tele = p.telescope()
    qname, qsort = p.queriable
    concl = substitute(p.conclusion(), qname, Meta(qsort, ANSWER_HOLE))
    state = SolutionState(
        goals=(Goal("h", tele, concl), Goal(ANSWER_HOLE, tele, qsort)),
        holes=(Hole(ANSWER_HOLE, tele, qsort),),
    )
    return Session(p, state)


def dfps_init(p: Problem) -> Session:
    from .syntax import DfpsShapeError, _check_dfps_shape
    if p.framework != "dfps":
        raise DfpsShapeError("dfps_init needs a problem in the dfps framework")
    _check_dfps_shape(p)
    tele = p.telescope()
    qname, qsort = p.queriable
    psi = p.concls[0].args[0]     # conclusion is (psi <-> A) by shape check
    meta = Meta(PROP, ANSWER_HOLE)
    fwd_ctx = tele.extended(LocalDecl(FORWARD_HYP, PROP, prop=psi))
    bwd_ctx = tele.extended(LocalDecl(BACKWARD_HYP, PROP, prop=meta))
    state = SolutionState(
        goals=(Goal("h.mp", fwd_ctx, meta),
               Goal("h.mpr", bwd_ctx, psi),
               Goal(ANSWER_HOLE, tele, PROP)),
        holes=(Hole(ANSWER_HOLE, tele, PROP),),
    )
    return Session(p, state)


def session_init(p: Problem) -> Session:
    return fps_init(p) if p.framework == "fps" else dfps_init(p)


def forward_finished(sess: Session) -> bool:
    """Answer hole assigned and the forward case closed (dfps only)."""
    if sess.framework != "dfps":
        raise SessionError("forward_finished applies to dfps sessions")
    if sess.state.assigned_value(sess.answer_hole) is None:
        return False
    return all(g.case != "h.mp" for g in sess.state.goals)


def extract_answer(sess: Session) -> Term:
    if sess.framework == "dfps":
        if not forward_finished(sess):
            raise NotFinished("forward phase is not finished")
    elif not is_terminal(sess.state):
        raise NotFinished("session is not terminal")
    raw = sess.state.assigned_value(sess.answer_hole)
    if raw is None:
        raise NotFinished("answer hole is unassigned")
    answer = instantiate_metas(raw, sess.state.asg_map())
    if metavars_of(answer):
        raise NotFinished("answer still contains metavariables")
    allowed = {n for n, _ in sess.problem.vars}
    stray = free_vars(answer) - allowed
    if stray:
        raise DependsOnNonV(
            f"answer depends on {sorted(stray)} outside the problem variables")
    return answer


# ---------------------------------------------------------------------------
# Certification: the soundness / completeness theorems as executable checks


@dataclass(frozen=True)
class SessionCertificate:
    framework: str
    answer: str
    forward: bool
    backward: bool
    script_hash: str
    early_exit: bool = False

    def to_json(self) -> dict:
        return {"framework": self.framework, "answer": self.answer,
                "forward": self.forward, "backward": self.backward,
                "scriptHash": self.script_hash, "earlyExit": self.early_exit}


def _script_hash(script: ProofScript) -> str:
    return hashlib.sha256(script.render().encode()).hexdigest()


def certify(sess: Session) -> SessionCertificate:
    """Replay the session trace and re-prove what the framework promises."""
    answer = extract_answer(sess)
    script = script_of_trace(sess.state)
    fresh = session_init(sess.problem)
    report = run_trace(fresh.state, sess.state)
    if sess.framework == "fps":
        if not is_terminal(report):
            raise CertifyFailed("replayed trace does not reach the terminal state")
        recheck(report)
        _recheck_statement(sess.problem, answer, script)
        return SessionCertificate("fps", print_term(answer), True, True,
                                  _script_hash(script))
    # dfps: forward always (extraction precondition), backward optional
    recheck(report)
    replayed = Session(sess.problem, report)
    if not forward_finished(replayed):
        raise CertifyFailed("replayed trace does not finish the forward phase")
    backward = is_terminal(report)
    return SessionCertificate("dfps", print_term(answer), True, backward,
                              _script_hash(script), early_exit=not backward)


def run_trace(state: SolutionState, recorded: SolutionState) -> SolutionState:
    """Deterministically re-run a recorded trace from a fresh state."""
    for step in recorded.trace:
        try:
            state = apply_tactic(state, step.goal, step.tactic, step.argtext)
        except (KernelError, Exception) as e:
            raise CertifyFailed(f"trace replay failed at {step.render()}: {e}")
    if state.state_hash() != recorded.state_hash():
        raise CertifyFailed("replayed state differs from the recorded state")
    return state


def _recheck_statement(p: Problem, answer: Term, script: ProofScript) -> None:
    """Re-prove the instantiated statement with the script's closing suffix."""
    state = init_prove(p, answer)
    report = run_script(state, prove_script(script))
    if not report.accepted:
        raise CertifyFailed(
            f"statement recheck failed at line {report.failed_line}: "
            f"{report.reason}")


def prove_script(script: ProofScript, answer_hole: str = ANSWER_HOLE
                 ) -> ProofScript:
    """Drop the answer-hole fills; what remains proves the statement."""
    lines = tuple(ln for ln in script.lines if ln.goal != answer_hole)
    return ProofScript(lines)


def dfps_prove_script(script: ProofScript) -> ProofScript:
    """Prefix a deductive trace so it applies to the plain iff statement."""
    prefix = (
        ScriptLine(None, "iff_split", "", 0),
        ScriptLine("h.mp", "intro", FORWARD_HYP, 0),
        ScriptLine("h.mpr", "intro", BACKWARD_HYP, 0),
    )
    return ProofScript(prefix + prove_script(script).lines)


# ---------------------------------------------------------------------------
# The find-all injection


def fps_to_dfps(p: Problem) -> Problem:
    """Map a find-all problem to its deductive form.

    The queriable joins the universally quantified variables, the new
    queriable is a proposition A, the conclusion becomes (psi <-> A),
    and a recorded ground-truth answer maps to `a = answer`.
    """
    qname, qsort = p.queriable
    psi = p.conclusion()
    new_answer: Optional[Term] = None
    if p.answer is not None:
        new_answer = mk_atom("eq", (Var(qsort, qname), p.answer))
    a_var = "A" if qname != "A" and all(n != "A" for n, _ in p.vars) else "A0"
    concl = mk_conn("iff", (psi, Var(PROP, a_var)))
    return Problem(
        framework="dfps",
        vars=p.vars + ((qname, qsort),),
        queriable=(a_var, PROP),
        hyps=p.hyps,
        concls=(concl,),
        answer=new_answer,
        informal=p.informal,
    )

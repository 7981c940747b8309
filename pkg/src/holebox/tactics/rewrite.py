"""Rewriting: first-order matching, the bundled lemma library, the
`rewrite` tactic, and `rw_search` (bounded breadth-first rewriting).

Rewrite rules come from the lemma library (which stands in for a proof
assistant's lemma collections) and from local equational hypotheses.
Universally
quantified sources turn their leading binders into pattern variables;
guard conditions are discharged by exact evaluation on the matched
instance.  The matched occurrence is located leftmost-innermost, and all
occurrences of the instantiated left side are replaced, so traces are
deterministic and replayable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from ..expr import (
    App, Atom, BVar, Binder, Conn, Lit, Meta, NUMERIC, PROP, Sort, Term, Var,
    alpha_eq, children, has_loose_bvars, instantiate_bvar, instantiate_metas,
    metavars_of, mk_meta, _rebuild,
)
from ..norm import definitional_eq, fold_literals
from ..kernel import (
    Certificate, CertificateError, Goal, SolutionState, TacticFailed,
    TacticResult, goal_blob, goal_from_blob, register_tactic,
)
from ..syntax import ParseError, parse_term, print_term
from .decide import decide_prop, _assign_split

RW_SEARCH_DEPTH = 6
RW_SEARCH_NODES = 2000


class NoMatch(TacticFailed):
    pass


class SearchExhausted(TacticFailed):
    pass


# ---------------------------------------------------------------------------
# Matching


def match(pat: Term, t: Term, sub: dict[str, Term]) -> bool:
    """First-order match; pattern variables are Meta nodes."""
    if isinstance(pat, Meta):
        if has_loose_bvars(t):
            return False
        if pat.sort != t.sort:
            return False
        if pat.mid in sub:
            return alpha_eq(sub[pat.mid], t)
        sub[pat.mid] = t
        return True
    if type(pat) is not type(t) or pat.sort != t.sort:
        return False
    if isinstance(pat, (Lit, Var, BVar)):
        return pat == t
    if isinstance(pat, App):
        return pat.op == t.op and _match_all(pat.args, t.args, sub)
    if isinstance(pat, Conn):
        return pat.op == t.op and _match_all(pat.args, t.args, sub)
    if isinstance(pat, Atom):
        return pat.rel == t.rel and _match_all(pat.args, t.args, sub)
    if isinstance(pat, Binder):
        return (pat.kind == t.kind and pat.vsort == t.vsort
                and match(pat.body, t.body, sub))
    return False


def _match_all(ps: tuple[Term, ...], ts: tuple[Term, ...],
               sub: dict[str, Term]) -> bool:
    if len(ps) != len(ts):
        return False
    return all(match(p, x, sub) for p, x in zip(ps, ts))


def subst_pattern(pat: Term, sub: dict[str, Term]) -> Term:
    missing = metavars_of(pat) - sub.keys()
    if missing:
        raise NoMatch(f"unbound pattern variables {sorted(missing)}")
    return instantiate_metas(pat, sub)


def occurrences(t: Term, pat: Term) -> Iterator[dict[str, Term]]:
    """Match substitutions at subterm occurrences, leftmost-innermost."""
    for k in children(t):
        yield from occurrences(k, pat)
    sub: dict[str, Term] = {}
    if match(pat, t, sub):
        yield sub


def replace_all(t: Term, old: Term, new: Term) -> Term:
    if not has_loose_bvars(t) and alpha_eq(t, old):
        return new
    kids = children(t)
    if not kids:
        return t
    return _rebuild(t, tuple(replace_all(k, old, new) for k in kids))


# ---------------------------------------------------------------------------
# Rewrite rules


@dataclass(frozen=True)
class RewriteLemma:
    name: str
    lhs: Term
    rhs: Term
    bidirectional: bool
    sides: tuple[Term, ...] = ()


def rule_from_prop(name: str, prop: Term) -> Optional[RewriteLemma]:
    """Turn a (possibly quantified, guarded) proposition into a rule."""
    metas: list[tuple[str, Sort]] = []
    i = 0
    while isinstance(prop, Binder) and prop.kind == "forall":
        mid = f"_p{i}"
        i += 1
        metas.append((mid, prop.vsort))
        prop = instantiate_bvar(prop.body, mk_meta(mid, prop.vsort))
    sides: list[Term] = []
    while isinstance(prop, Conn) and prop.op == "imp":
        sides.append(prop.args[0])
        prop = prop.args[1]
    if isinstance(prop, Atom) and prop.rel == "eq":
        lhs, rhs = prop.args
    elif isinstance(prop, Conn) and prop.op == "iff":
        lhs, rhs = prop.args
    else:
        return None
    return RewriteLemma(name, lhs, rhs, True, tuple(sides))


def _discharge_sides(rule: RewriteLemma, sub: dict[str, Term]) -> bool:
    for side in rule.sides:
        try:
            inst = subst_pattern(side, sub)
        except NoMatch:
            return False
        if metavars_of(inst):
            return False
        try:
            ok, _ = decide_prop(inst)
        except TacticFailed:
            return False
        if not ok:
            return False
    return True


def apply_rule(t: Term, rule: RewriteLemma, back: bool,
               occurrence: Optional[int] = None) -> Optional[Term]:
    """Rewrite with one rule; returns the new term or None."""
    lhs, rhs = (rule.rhs, rule.lhs) if back else (rule.lhs, rule.rhs)
    idx = 0
    for sub in occurrences(t, lhs):
        idx += 1
        if occurrence is not None and idx != occurrence:
            continue
        if not _discharge_sides(rule, sub):
            continue
        try:
            old = subst_pattern(lhs, sub)
            new = subst_pattern(rhs, sub)
        except NoMatch:
            continue
        return fold_literals(replace_all(t, old, new))
    return None


# ---------------------------------------------------------------------------
# Lemma library


class LemmaLibrary:
    def __init__(self, lemmas: tuple[RewriteLemma, ...] = ()):
        self.lemmas = lemmas

    def named(self, name: str) -> list[RewriteLemma]:
        return [l for l in self.lemmas if l.name == name]

    def __iter__(self):
        return iter(self.lemmas)


_PATTERN_SORT_TRIALS = NUMERIC


def parse_lemma_line(line: str) -> list[RewriteLemma]:
    """`name : lhs <-> rhs [if side, side]`.

    Patterns are sort-polymorphic over the numeric sorts; every meta
    assignment at one element sort (with each pattern variable either at
    the sort or at sets over it) that elaborates yields one instance.
    """
    from itertools import product
    from ..expr import set_of
    name, _, rest = line.partition(":")
    name = name.strip()
    rest = rest.strip()
    if not name or not rest:
        raise ParseError(f"malformed lemma line {line!r}")
    if " if " in rest:
        rest, _, sides_text = rest.rpartition(" if ")
        side_texts = [s.strip() for s in sides_text.split(",")]
    else:
        side_texts = []
    arrow = " <-> " if " <-> " in rest else " -> "
    lhs_text, _, rhs_text = rest.partition(arrow)
    if not rhs_text:
        raise ParseError(f"lemma {name!r} has no rewrite arrow")
    meta_names = sorted(set(_meta_tokens(rest + " " + " ".join(side_texts))))
    out: list[RewriteLemma] = []
    seen: set[str] = set()
    for sort in _PATTERN_SORT_TRIALS:
        for shape in product((False, True), repeat=len(meta_names)):
            menv = {m: (set_of(sort) if as_set else sort)
                    for m, as_set in zip(meta_names, shape)}
            try:
                lhs = parse_term(lhs_text, metas=menv)
                rhs = parse_term(rhs_text, expected=lhs.sort, metas=menv)
                sides = tuple(parse_term(s, expected=PROP, metas=menv)
                              for s in side_texts)
            except Exception:
                continue
            key = ";".join(f"{m}:{menv[m]}" for m in meta_names)
            if key in seen:
                continue
            seen.add(key)
            out.append(RewriteLemma(name, lhs, rhs, arrow == " <-> ", sides))
    if not out:
        raise ParseError(f"lemma {name!r} does not elaborate at any sort")
    return out


def _meta_tokens(text: str) -> list[str]:
    import re
    return re.findall(r"\?([A-Za-z_][A-Za-z0-9_']*)", text)


def load_lemma_library(text: str) -> LemmaLibrary:
    lemmas: list[RewriteLemma] = []
    version_seen = False
    for raw in text.splitlines():
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        if line.startswith("format_version"):
            ver = line.split(":", 1)[-1].strip()
            if ver != "1":
                raise ParseError(f"unsupported lemma library version {ver!r}")
            version_seen = True
            continue
        lemmas.extend(parse_lemma_line(line))
    if not version_seen:
        raise ParseError("lemma library is missing its format_version line")
    return LemmaLibrary(tuple(lemmas))


_DEFAULT_LIBRARY: Optional[LemmaLibrary] = None


def default_library() -> LemmaLibrary:
    global _DEFAULT_LIBRARY
    if _DEFAULT_LIBRARY is None:
        from importlib import resources
        text = (resources.files("holebox.data") / "lemmas.txt").read_text()
        _DEFAULT_LIBRARY = load_lemma_library(text)
    return _DEFAULT_LIBRARY


def set_default_library(lib: LemmaLibrary) -> None:
    global _DEFAULT_LIBRARY
    _DEFAULT_LIBRARY = lib


# ---------------------------------------------------------------------------
# The rewrite tactic


def _hyp_rules(goal: Goal, state: Optional[SolutionState]
               ) -> list[RewriteLemma]:
    asg = state.asg_map() if state is not None else {}
    out = []
    for d in goal.ctx.decls:
        if d.prop is None:
            continue
        prop = instantiate_metas(d.prop, asg)
        if metavars_of(prop):
            continue
        rule = rule_from_prop(d.name, prop)
        if rule is not None:
            out.append(rule)
    return out


@register_tactic("rewrite")
def rewrite(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    if goal.is_hole_goal():
        raise TacticFailed("rewrite does not apply to a hole goal")
    back = False
    text = argtext.strip()
    if text.startswith("<-"):
        back = True
        text = text[2:].strip()
    occurrence: Optional[int] = None
    if "@" in text:
        text, _, occ_text = text.rpartition("@")
        text = text.strip()
        occurrence = int(occ_text)
    from .structural import _parse_citation, _instantiate_hyp
    name, raw_args = _parse_citation(text)
    rules: list[RewriteLemma] = []
    decl = goal.ctx.lookup(name)
    if decl is not None and decl.prop is not None:
        prop = instantiate_metas(decl.prop, state.asg_map())
        if raw_args:
            prop, _ = _instantiate_hyp(prop, raw_args, goal.ctx,
                                       state.meta_sorts())
        rule = rule_from_prop(name, prop)
        if rule is None:
            raise TacticFailed(f"{name} is not an equation or iff")
        rules.append(rule)
    else:
        rules = default_library().named(name)
        if not rules:
            raise TacticFailed(f"no hypothesis or lemma named {name!r}")
    concl = instantiate_metas(goal.concl, state.asg_map())
    for rule in rules:
        new = apply_rule(concl, rule, back, occurrence)
        if new is not None and new != concl:
            return TacticResult(
                new_goals=(Goal(goal.case, goal.ctx, new),), safe=True)
    raise NoMatch(f"{name} does not match the conclusion")


# ---------------------------------------------------------------------------
# rw_search


def _search_rules(goal: Goal, state: Optional[SolutionState],
                  library: LemmaLibrary) -> list[tuple[RewriteLemma, bool]]:
    # a direction whose pattern is a bare variable matches every subterm
    # and only inflates the frontier, so it is skipped
    rules: list[tuple[RewriteLemma, bool]] = []
    for lem in library:
        if not isinstance(lem.lhs, Meta):
            rules.append((lem, False))
        if lem.bidirectional and not isinstance(lem.rhs, Meta):
            rules.append((lem, True))
    hyps = _hyp_rules(goal, state)
    for rule in hyps:
        if not isinstance(rule.lhs, Meta):
            rules.append((rule, False))
    for rule in hyps:
        if not isinstance(rule.rhs, Meta):
            rules.append((rule, True))
    return rules


def _try_close(concl: Term, state: Optional[SolutionState]
               ) -> Optional[tuple[str, tuple[tuple[str, Term], ...]]]:
    """rfl / eval_decide closure of an equality-shaped node."""
    sides = None
    if isinstance(concl, Atom) and concl.rel == "eq":
        sides = concl.args
    elif isinstance(concl, Conn) and concl.op == "iff":
        sides = concl.args
    if sides is None:
        return None
    if not metavars_of(concl):
        if definitional_eq(sides[0], sides[1]):
            return ("rfl", ())
        try:
            ok, _ = decide_prop(concl)
            if ok:
                return ("eval_decide", ())
        except TacticFailed:
            pass
        return None
    if state is not None:
        split = _assign_split(concl, state)
        if split is not None:
            mid, rhs = split
            from .decide import Budget, DEFAULT_BUDGET, eval_term, _value_term
            from ..norm import normalize
            try:
                val = eval_term(normalize(rhs), Budget(DEFAULT_BUDGET))
                hole = state.hole(mid)
                return ("eval_decide", ((mid, _value_term(val, hole.target)),))
            except TacticFailed:
                return None
    return None


def rw_search_term(concl: Term, goal: Goal, state: Optional[SolutionState],
                   max_depth: int = RW_SEARCH_DEPTH,
                   library: Optional[LemmaLibrary] = None,
                   node_budget: int = RW_SEARCH_NODES):
    """BFS over rewrites; returns (path, closer, assignments) or None."""
    if library is None:
        library = default_library()
    rules = _search_rules(goal, state, library)
    seen = {print_term(concl)}
    frontier: list[tuple[Term, tuple]] = [(concl, ())]
    nodes = 0
    for depth in range(max_depth + 1):
        for term, path in frontier:
            hit = _try_close(term, state)
            if hit is not None:
                closer, assigns = hit
                return path, closer, assigns
        if depth == max_depth:
            break
        nxt: list[tuple[Term, tuple]] = []
        for term, path in frontier:
            for ri, (rule, back) in enumerate(rules):
                occ = 0
                lhs = rule.rhs if back else rule.lhs
                for sub in occurrences(term, lhs):
                    occ += 1
                    new = apply_rule(term, rule, back, occ)
                    if new is None or new == term:
                        continue
                    key = print_term(new)
                    if key in seen:
                        continue
                    seen.add(key)
                    nodes += 1
                    if nodes > node_budget:
                        return None
                    nxt.append((new, path + ((rule.name, back, occ),)))
        frontier = nxt
        if not frontier:
            break
    return None


@register_tactic("rw_search")
def rw_search(state: SolutionState, goal: Goal, argtext: str) -> TacticResult:
    if goal.is_hole_goal():
        raise TacticFailed("rw_search does not apply to a hole goal")
    max_depth = int(argtext) if argtext.strip() else RW_SEARCH_DEPTH
    concl = instantiate_metas(goal.concl, state.asg_map())
    if not (isinstance(concl, Atom) and concl.rel == "eq") \
            and not (isinstance(concl, Conn) and concl.op == "iff"):
        raise TacticFailed("rw_search needs an equality or iff goal")
    hit = rw_search_term(concl, goal, state, max_depth)
    if hit is None:
        raise SearchExhausted(f"no rewrite proof within depth {max_depth}")
    path, closer, assigns = hit
    cert = Certificate("rw_search", {
        "goal": goal_blob(goal, state.meta_sorts()),
        "path": [[name, back, occ] for name, back, occ in path],
        "closer": closer,
        "assigned": {mid: print_term(v) for mid, v in assigns},
    })
    return TacticResult(assignments=assigns, cert=cert)


def revalidate_rw_search(cert: Certificate) -> None:
    goal = goal_from_blob(cert.detail["goal"])
    term = goal.concl
    if not isinstance(term, Term):
        raise CertificateError("rw_search on a hole goal")
    library = default_library()
    for name, back, occ in cert.detail["path"]:
        candidates = library.named(name) or [
            r for r in _hyp_rules(goal, None) if r.name == name]
        new = None
        for rule in candidates:
            new = apply_rule(term, rule, back, occ)
            if new is not None:
                break
        if new is None:
            raise CertificateError(f"rw_search step {name!r} fails to replay")
        term = new
    closer = cert.detail["closer"]
    if cert.detail.get("assigned"):
        return  # assignment closers are replayed by the surrounding session
    sides = term.args if isinstance(term, (Atom, Conn)) else None
    if closer == "rfl":
        if sides is None or not definitional_eq(sides[0], sides[1]):
            raise CertificateError("rw_search rfl closer fails")
    elif closer == "eval_decide":
        ok, _ = decide_prop(term)
        if not ok:
            raise CertificateError("rw_search eval closer fails")
    else:
        raise CertificateError(f"unknown rw_search closer {closer!r}")

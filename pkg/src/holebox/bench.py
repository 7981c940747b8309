"""Benchmark loading, the evaluation pipeline, and report assembly.

Each benchmark line carries four required fields (informal problem,
informal answer, formal problem, formal answer) plus optional extras: a
reference script, an `expected` marker (`script` or `parse-only`), and
free-form tags.  Parse-only entries are excluded from rate denominators.

Outcomes partition: an entry is exactly one of solved (certified answer,
equivalent to the ground truth), neSubmitted (certified answer, not
equivalent), or unsolved.  The proven flag is computed independently by
building the statement with the ground-truth answer substituted and
attempting it.  Reports are deterministic: stable key order, no
timestamps, and no dependence on the worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .expr import Term
from .fps import (
    CertifyFailed, Session, SessionError, certify, dfps_prove_script,
    extract_answer, forward_finished, prove_script, session_init,
)
from .kernel import (
    KernelError, init_prove, is_terminal, run_script, recheck,
    script_of_trace,
)
from .rpe import rpe_check
from .search import SearchConfig, SearchResult, best_first_search, \
    builtin_policy, search_states
from .syntax import (
    ParseError, Problem, ProofScript, SchemaError, parse_problem,
    parse_script, parse_term,
)


class BenchmarkLoadError(Exception):
    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        lines = "; ".join(f"line {i}: {m}" for i, m in errors)
        super().__init__(f"benchmark failed to load: {lines}")


@dataclass(frozen=True)
class BenchmarkEntry:
    id: str
    informal_problem: str
    informal_answer: str
    problem: Problem
    formal_answer: Term
    script: Optional[ProofScript] = None
    expected: str = "script"
    tags: tuple[str, ...] = ()


def load_benchmark(path: str) -> list[BenchmarkEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    entries: list[BenchmarkEntry] = []
    errors: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entries.append(_parse_entry(line))
        except (SchemaError, ParseError, ValueError, KeyError) as e:
            errors.append((lineno, str(e)))
    if errors:
        raise BenchmarkLoadError(errors)
    return entries


def _parse_entry(line: str) -> BenchmarkEntry:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}")
    for field_name in ("id", "informalProblem", "informalAnswer",
                       "formalProblem", "formalAnswer"):
        if field_name not in obj:
            raise SchemaError(f"missing field {field_name!r}")
    problem = parse_problem(obj["formalProblem"])
    answer = parse_term(obj["formalAnswer"], problem.telescope(),
                        problem.queriable[1])
    script = None
    if obj.get("script") is not None:
        script = parse_script(obj["script"])
    expected = obj.get("expected", "script")
    if expected not in ("script", "parse-only"):
        raise SchemaError(f"unknown expected marker {expected!r}")
    return BenchmarkEntry(
        str(obj["id"]), obj["informalProblem"], obj["informalAnswer"],
        problem, answer, script, expected, tuple(obj.get("tags", ())))


# ---------------------------------------------------------------------------
# Per-entry evaluation


def _solve_with_script(entry: BenchmarkEntry) -> tuple[Optional[Session], dict]:
    if entry.script is None:
        return None, {"error": "no reference script"}
    sess = session_init(entry.problem)
    state = sess.state
    for ln in entry.script.lines:
        try:
            from .kernel import apply_tactic
            state = apply_tactic(state, ln.goal, ln.tactic, ln.argtext)
        except (KernelError, Exception) as e:
            return None, {"error": f"line {ln.lineno}: {e}"}
    sess = Session(entry.problem, state)
    done = is_terminal(state) or (
        entry.problem.framework == "dfps" and forward_finished(sess))
    if not done:
        return None, {"error": "script left open goals"}
    return sess, {}


def _solve_with_search(entry: BenchmarkEntry, cfg: SearchConfig
                       ) -> tuple[Optional[Session], dict, Optional[SearchResult]]:
    result = best_first_search(entry.problem, builtin_policy, cfg)
    if result.status != "solved":
        return None, result.stats, result
    return None, result.stats, result


def _prove_ground_truth(entry: BenchmarkEntry, solver: str,
                        cfg: SearchConfig) -> bool:
    """The statement with the ground-truth answer, attempted independently."""
    try:
        state = init_prove(entry.problem, entry.formal_answer)
    except Exception:
        return False
    if solver == "script" and entry.script is not None:
        if entry.problem.framework == "dfps":
            script = dfps_prove_script(entry.script)
        else:
            script = prove_script(entry.script)
        report = run_script(state, script)
        if report.accepted:
            try:
                recheck(report.final)
                return True
            except KernelError:
                return False
        return False
    node, _ = search_states(state, builtin_policy, cfg, is_terminal)
    if node is None:
        return False
    try:
        recheck(node.state)
        return True
    except KernelError:
        return False


def evaluate_entry(entry: BenchmarkEntry, solver: str = "script",
                   cfg: SearchConfig = SearchConfig()) -> dict:
    record: dict = {"id": entry.id, "tags": sorted(entry.tags)}
    if entry.expected == "parse-only":
        record.update(outcome="skipped", proven=None, rpe=None, script=None,
                      stats={"note": "parse-only entry"})
        return record
    stats: dict = {}
    sess: Optional[Session] = None
    if solver == "script":
        sess, info = _solve_with_script(entry)
        stats.update(info)
    else:
        _, stats, result = _solve_with_search(entry, cfg)
        if result is not None and result.status == "solved":
            record["script"] = result.script.render()
            answer = parse_term(result.answer, entry.problem.telescope(),
                                entry.problem.queriable[1])
            verdict = rpe_check(entry.problem, answer, entry.formal_answer)
            record["rpe"] = verdict.to_json()
            record["outcome"] = "solved" if verdict.equivalent \
                else "neSubmitted"
            record["certificate"] = result.certificate
            record["proven"] = _prove_ground_truth(entry, solver, cfg)
            record["stats"] = _clean_stats(stats)
            return record
        record.update(outcome="unsolved", rpe=None, script=None,
                      certificate=None)
        record["proven"] = _prove_ground_truth(entry, solver, cfg)
        record["stats"] = _clean_stats(stats)
        return record
    if sess is None:
        record.update(outcome="unsolved", rpe=None, script=None,
                      certificate=None)
    else:
        try:
            answer = extract_answer(sess)
            cert = certify(sess)
        except (SessionError, CertifyFailed) as e:
            record.update(outcome="unsolved", rpe=None, script=None,
                          certificate=None)
            stats["error"] = str(e)
            answer = None
        else:
            verdict = rpe_check(entry.problem, answer, entry.formal_answer)
            record["rpe"] = verdict.to_json()
            record["outcome"] = "solved" if verdict.equivalent \
                else "neSubmitted"
            record["script"] = script_of_trace(sess.state).render()
            record["certificate"] = cert.to_json()
    record["proven"] = _prove_ground_truth(entry, solver, cfg)
    record["stats"] = _clean_stats(stats)
    return record


def _clean_stats(stats: dict) -> dict:
    out = dict(stats)
    out.pop("popped_values", None)
    return out


# ---------------------------------------------------------------------------
# Aggregation


def aggregate_metrics(records: list[dict]) -> dict:
    scored = [r for r in records if r["outcome"] != "skipped"]
    n = len(scored)
    counts = {
        "entries": len(records),
        "scored": n,
        "solved": sum(1 for r in scored if r["outcome"] == "solved"),
        "neSubmitted": sum(1 for r in scored
                           if r["outcome"] == "neSubmitted"),
        "unsolved": sum(1 for r in scored if r["outcome"] == "unsolved"),
        "proven": sum(1 for r in scored if r.get("proven")),
    }
    if n == 0:
        rates = {"solved": 0.0, "proven": 0.0, "neSubmitted": 0.0,
                 "empty": True}
    else:
        rates = {
            "solved": counts["solved"] / n,
            "proven": counts["proven"] / n,
            "neSubmitted": counts["neSubmitted"] / n,
        }
    for r in scored:
        assert (r["outcome"] == "solved") + (r["outcome"] == "neSubmitted") \
            + (r["outcome"] == "unsolved") == 1
    return {"counts": counts, "rates": rates}


def run_benchmark(entries: list[BenchmarkEntry], solver: str = "script",
                  cfg: SearchConfig = SearchConfig(),
                  workers: int = 1) -> dict:
    if workers <= 1:
        records = [evaluate_entry(e, solver, cfg) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(
                lambda e: evaluate_entry(e, solver, cfg), entries))
    report = {
        "header": {
            "format_version": "1",
            "solver": solver,
            "k": cfg.budget,
            "s": cfg.width,
            "denominator": "all entries except parse-only",
        },
        "perEntry": records,
        "aggregate": aggregate_metrics(records),
    }
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"

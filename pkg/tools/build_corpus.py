"""Regenerates the bundled corpus file from its source of truth here."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent \
    / "src" / "holebox" / "data" / "corpus.jsonl"

E = []


def entry(id, informal, ianswer, problem, answer, script=None,
          expected="script", tags=()):
    E.append({
        "id": id,
        "informalProblem": informal,
        "informalAnswer": ianswer,
        "formalProblem": problem,
        "formalAnswer": answer,
        **({"script": script} if script else {}),
        **({"expected": expected} if expected != "script" else {}),
        **({"tags": list(tags)} if tags else {}),
    })


def prob(framework, vars, queriable, hyps, concls, answer=None, informal=None):
    d = {"format_version": "1", "framework": framework, "vars": vars,
         "queriable": queriable, "hypotheses": hyps, "conclusions": concls}
    if answer is not None:
        d["answer"] = answer
    if informal is not None:
        d["informal"] = informal
    return d


entry(
    "yes_no_prime_gap",
    "Is there a prime number strictly between 90 and 96?",
    "No",
    prob("fps", [], ["a", "Prop"], [],
         ["a <-> (exists (p : Nat), prime p /\\ 90 < p /\\ p < 96)"],
         "False"),
    "False",
    ["eval_decide"],
    tags=("arithmetic", "yes-no"),
)

entry(
    "equation_find_one",
    "Find one real solution of x^2 - 1 = 0.",
    "1",
    prob("fps", [], ["a", "Real"], [], ["a^2 - 1 = 0"], "1"),
    "1",
    ["@goal w exact 1", "ring_nf"],
    tags=("equation",),
)

entry(
    "equation_find_all",
    "Find all integers x with |x| <= 2 such that x^2 - 1 = 0.",
    "{-1, 1}",
    prob("fps", [["x", "Int"]], ["a", "Set Int"],
         [["hlb", "-2 <= x"], ["hub", "x <= 2"]],
         ["x in a <-> x^2 - 1 = 0"], "{-1, 1}"),
    "{-1, 1}",
    ["@goal w exact {-1, 1}",
     "iff_split",
     "intro hm",
     "cases hm",
     "rewrite hm",
     "eval_decide",
     "rewrite hm",
     "eval_decide",
     "int_cases x",
     "linear_arith",
     "linear_arith",
     "linear_arith",
     "linear_arith",
     "linear_arith"],
    tags=("equation", "find-all"),
)

entry(
    "fermat_counterexample",
    "Find a number of the form 2^(2^n) + 1 that is not prime.",
    "n = 5",
    prob("fps", [], ["a", "Nat"], [], ["not prime (2^(2^a) + 1)"], "5"),
    "5",
    ["@goal w exact 5", "eval_decide"],
    tags=("counterexample",),
)

entry(
    "simplification_radical",
    "Simplify sqrt(28x) * sqrt(15x) * sqrt(21x) for positive real x.",
    "42 x sqrt(5 x)",
    prob("fps", [["x", "Real"]], ["a", "Real"], [["h1", "x > 0"]],
         ["a = sqrt (28 * x) * sqrt (15 * x) * sqrt (21 * x)"],
         "42 * x * sqrt (5 * x)"),
    "42 * x * sqrt (5 * x)",
    None,
    expected="parse-only",
    tags=("simplification",),
)

entry(
    "physics_droplet",
    "A spherical droplet falls through uniform mist, absorbing the water "
    "it meets; after long enough its acceleration approaches a constant. "
    "Express that steady acceleration.",
    "g / 7",
    prob("fps",
         [["g", "Real"], ["rho", "Real"], ["kk", "Real"], ["t", "Real"],
          ["m", "Real -> Real"], ["v", "Real -> Real"], ["R", "Real -> Real"],
          ["deriv", "(Real -> Real) -> Real -> Real"],
          ["limAtTop", "(Real -> Real) -> Real"]],
         ["a", "Real"],
         [["h1", "g > 0"], ["h2", "rho > 0"], ["h3", "kk > 0"],
          ["h6", "m t * g = m t * deriv v t + v t * deriv m t"],
          ["h7", "m t = 4/3 * pi * (R t)^3 * rho"],
          ["h8", "deriv m t = kk * pi * (R t)^2 * v t"]],
         ["a = limAtTop (deriv v)"],
         "g / 7"),
    "g / 7",
    None,
    expected="parse-only",
    tags=("physics",),
)

entry(
    "cardinality_abs_bound",
    "How many integers are in the solution set of |x - 2| <= 5.6?",
    "11",
    prob("fps", [["S", "Set Int"]], ["a", "Nat"],
         [["hS", "S = {x : Int | abs (x - 2) <= 28 / 5}"]],
         ["card S = a"], "11"),
    "11",
    ["rewrite hS", "eval_decide"],
    tags=("arithmetic", "counting"),
)

entry(
    "proper_divisor_sum",
    "The proper divisors of 284 are its positive divisors less than 284. "
    "What is their sum?",
    "220",
    prob("fps", [], ["a", "Nat"], [],
         ["(sum d in {y : Nat | y in divisors 284 /\\ y < 284}, d) = a"],
         "220"),
    "220",
    ["eval_decide"],
    tags=("arithmetic", "number-theory"),
)

entry(
    "f_recursive",
    "A function on positive integers has f(1) = 2, f(n) = f(n-1) + 1 for "
    "even n > 1, and f(n) = f(n-2) + 2 for odd n > 1. What is f(9)?",
    "10",
    prob("fps", [["f", "Nat -> Rat"]], ["a", "Rat"],
         [["h0", "f 1 = 2"],
          ["h1", "forall (m : Nat), 1 < m /\\ even m -> f m = f (m - 1) + 1"],
          ["h2", "forall (m : Nat), 1 < m /\\ odd m -> f m = f (m - 2) + 2"]],
         ["a = f 9"], "10"),
    "10",
    ["@goal w exact 10",
     "rewrite h2", "rewrite h2", "rewrite h2", "rewrite h2",
     "rewrite h0", "rfl"],
    tags=("arithmetic", "recursion"),
)

entry(
    "units_digit",
    "Find the units digit of 16^17 * 17^18 * 18^19.",
    "8",
    prob("fps", [], ["a", "Nat"], [],
         ["a = (16^17 * 17^18 * 18^19) % 10"], "8"),
    "8",
    ["eval_decide"],
    tags=("arithmetic", "number-theory"),
)

entry(
    "telescoping_sum",
    "Compute the sum of 1/(i(i+1)) for i from 1 to 10.",
    "10/11",
    prob("fps", [], ["a", "Rat"], [],
         ["a = sum i in range 1 10, 1 / rat (i * (i + 1))"], "10/11"),
    "10/11",
    ["eval_decide"],
    tags=("arithmetic", "series"),
)

entry(
    "calculation_rational",
    "Compute 3/4 + 1/6.",
    "11/12",
    prob("fps", [], ["a", "Rat"], [], ["a = 3/4 + 1/6"], "11/12"),
    "11/12",
    ["eval_decide"],
    tags=("arithmetic",),
)

entry(
    "nickels",
    "Eleven coins, all dimes and nickels, are worth 75 cents in total. "
    "How many nickels are there?",
    "7",
    prob("fps", [["d", "Int"], ["n", "Int"]], ["a", "Int"],
         [["h0", "d >= 0"], ["h1", "n >= 0"],
          ["h2", "d + n = 11"], ["h3", "10*d + 5*n = 75"]],
         ["n = a"], "7"),
    "7",
    ["linear_arith"],
    tags=("arithmetic", "word-problem"),
)

entry(
    "aptitude_test",
    "On a 100-question test, right answers score 5, wrong answers score "
    "-2, blanks score 0. Someone answers 80 questions and scores 232. "
    "How many answers were right?",
    "56",
    prob("fps", [["c", "Int"], ["i", "Int"]], ["a", "Int"],
         [["h0", "c >= 0"], ["h1", "i >= 0"],
          ["h2", "c + i = 80"], ["h3", "5*c - 2*i = 232"]],
         ["c = a"], "56"),
    "56",
    ["linear_arith"],
    tags=("arithmetic", "word-problem"),
)

entry(
    "sequence_s4",
    "A sequence satisfies S(n) = S(n-1) + S(n-2) from the third term on, "
    "with S(9) = 110 and S(7) = 42. What is S(4)?",
    "10",
    prob("fps", [["s", "Nat -> Rat"]], ["a", "Rat"],
         [["h0", "forall (m : Nat), s (m + 2) = s (m + 1) + s m"],
          ["h1", "s 9 = 110"], ["h2", "s 7 = 42"]],
         ["a = s 4"], "10"),
    "10",
    ["have k3 : s 9 = s 8 + s 7", "@goal h.k3 exact h0 7",
     "have k4 : s 8 = s 7 + s 6", "@goal h.k4 exact h0 6",
     "have k5 : s 7 = s 6 + s 5", "@goal h.k5 exact h0 5",
     "have k6 : s 6 = s 5 + s 4", "@goal h.k6 exact h0 4",
     "linear_arith"],
    tags=("word-problem", "recurrence"),
)

entry(
    "inverse_function",
    "Let g be the inverse of f, with g(-15)=0, g(0)=3, g(3)=9, g(9)=20. "
    "What is f(f(9))?",
    "0",
    prob("fps", [["f", "Real -> Real"], ["g", "Real -> Real"]],
         ["a", "Real"],
         [["h_inv", "forall (y : Real), f (g y) = y"],
          ["h0", "g (-15) = 0"], ["h1", "g 0 = 3"],
          ["h2", "g 3 = 9"], ["h3", "g 9 = 20"]],
         ["a = f (f 9)"], "0"),
    "0",
    ["@goal w exact 0",
     "have hf9 : f 9 = 3",
     "@goal h.hf9 rewrite <- h2",
     "@goal h.hf9 exact h_inv 3",
     "have hf3 : f 3 = 0",
     "@goal h.hf3 rewrite <- h1",
     "@goal h.hf3 exact h_inv 0",
     "rewrite hf9", "rewrite hf3", "rfl"],
    tags=("word-problem", "functions"),
)

entry(
    "consecutive_even",
    "The product of two consecutive positive even integers is 288. "
    "What is the greater one?",
    "18",
    prob("fps", [], ["a", "Int"], [],
         ["exists (m : Int), m > 0 /\\ m % 2 = 0 /\\ m * (m + 2) = 288 "
          "/\\ a = m + 2"], "18"),
    "18",
    ["@goal w exact 18", "exists_intro", "@goal m exact 16", "eval_decide"],
    tags=("word-problem",),
)

entry(
    "mod_residue",
    "Which integer n satisfies 0 <= n < 18 and n = -11213141 modulo 18?",
    "13",
    prob("fps", [["m", "Int"]], ["a", "Int"],
         [["h0", "0 <= m"], ["h1", "m < 18"],
          ["h2", "m % 18 = -11213141 % 18"]],
         ["a = m"], "13"),
    "13",
    ["linear_arith"],
    tags=("arithmetic", "number-theory"),
)

entry(
    "nickels_deductive",
    "Eleven coins, all dimes and nickels, are worth 75 cents. Derive the "
    "nickel count deductively.",
    "7",
    prob("dfps", [["d", "Int"], ["n", "Int"], ["t", "Int"]],
         ["A", "Prop"],
         [["h0", "d >= 0"], ["h1", "n >= 0"],
          ["h2", "d + n = 11"], ["h3", "10*d + 5*n = 75"]],
         ["t = n <-> A"], "t = 7"),
    "t = 7",
    ["@goal h.mp have hans : t = 7",
     "@goal h.mp.hans linear_arith",
     "@goal h.mp exact hans",
     "@goal h.mpr linear_arith"],
    tags=("deductive", "word-problem"),
)

entry(
    "sequence_s4_deductive",
    "With S(n) = S(n-1) + S(n-2), S(9) = 110, S(7) = 42, derive S(4) "
    "deductively.",
    "10",
    prob("dfps", [["s", "Nat -> Rat"], ["t", "Rat"]],
         ["A", "Prop"],
         [["h0", "forall (m : Nat), s (m + 2) = s (m + 1) + s m"],
          ["h1", "s 9 = 110"], ["h2", "s 7 = 42"]],
         ["t = s 4 <-> A"], "t = 10"),
    "t = 10",
    ["@goal h.mp have k3 : s 9 = s 8 + s 7",
     "@goal h.mp.k3 exact h0 7",
     "@goal h.mp have k4 : s 8 = s 7 + s 6",
     "@goal h.mp.k4 exact h0 6",
     "@goal h.mp have k5 : s 7 = s 6 + s 5",
     "@goal h.mp.k5 exact h0 5",
     "@goal h.mp have k6 : s 6 = s 5 + s 4",
     "@goal h.mp.k6 exact h0 4",
     "@goal h.mp have hans : t = 10",
     "@goal h.mp.hans linear_arith",
     "@goal h.mp exact hans",
     "@goal h.mpr have k3 : s 9 = s 8 + s 7",
     "@goal h.mpr.k3 exact h0 7",
     "@goal h.mpr have k4 : s 8 = s 7 + s 6",
     "@goal h.mpr.k4 exact h0 6",
     "@goal h.mpr have k5 : s 7 = s 6 + s 5",
     "@goal h.mpr.k5 exact h0 5",
     "@goal h.mpr have k6 : s 6 = s 5 + s 4",
     "@goal h.mpr.k6 exact h0 4",
     "@goal h.mpr linear_arith"],
    tags=("deductive", "recurrence"),
)

with open(OUT, "w") as fh:
    for e in E:
        fh.write(json.dumps(e, sort_keys=True) + "\n")
print(f"wrote {len(E)} entries")

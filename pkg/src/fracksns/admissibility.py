"""Exponent admissibility rules for the local and global existence results.

Each rule set is stored as data: outer cases, optional parameter gates and
exponent branches, each a list of elementary comparisons.  A comparison is
evaluated literally (strict or not as written) with a relative tolerance of
1e-12 deciding ties.  Any bound written as a fraction whose denominator is
not positive is read as +infinity.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

REL_TOL = 1e-12
INF = math.inf

RULES = ("theorem1", "assumption1", "theorem3", "assumption2")


@dataclass(frozen=True)
class ExponentTuple:
    d: int
    alpha: float
    beta: float
    mu: float = 0.0
    p: float = INF
    q: float = INF
    r: float = INF

    def __post_init__(self):
        problems = []
        if int(self.d) != self.d or self.d < 2:
            problems.append(f"d must be an integer >= 2 (got {self.d})")
        if not 1.0 < self.alpha <= 2.0:
            problems.append(f"alpha must lie in (1, 2] (got {self.alpha})")
        if not 0.0 < self.beta < 1.0:
            problems.append(f"beta must lie in (0, 1) (got {self.beta})")
        if not self.mu >= 0.0:
            problems.append(f"mu must be >= 0 (got {self.mu})")
        for name in ("p", "q", "r"):
            val = getattr(self, name)
            if not val > 0.0:
                problems.append(f"{name} must be positive or inf (got {val})")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class AdmissibilityReport:
    satisfied: bool
    rule: str
    case_path: tuple[str, ...]
    violated_inequalities: tuple[str, ...] = ()

    @property
    def first_case(self) -> str | None:
        return self.case_path[0] if self.case_path else None

    def to_dict(self) -> dict:
        return {"satisfied": self.satisfied, "rule": self.rule,
                "case_path": list(self.case_path), "violated": list(self.violated_inequalities)}

    def to_text(self) -> str:
        lines = [f"rule: {self.rule}", f"satisfied: {str(self.satisfied).lower()}"]
        lines += [f"case: {c}" for c in self.case_path]
        lines += [f"violated: {v}" for v in self.violated_inequalities]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# terms and comparisons


@dataclass(frozen=True)
class Term:
    label: str
    fn: Callable[[ExponentTuple], float]

    def __call__(self, t: ExponentTuple) -> float:
        return self.fn(t)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else INF


def _less(x: float, y: float, strict: bool) -> bool:
    if x == y:
        return not strict
    close = (math.isfinite(x) and math.isfinite(y)
             and abs(x - y) <= REL_TOL * max(abs(x), abs(y)))
    if close:
        return not strict
    return x < y


@dataclass(frozen=True)
class Cmp:
    left: Term
    strict: bool
    right: Term

    @property
    def text(self) -> str:
        return f"{self.left.label} {'<' if self.strict else '<='} {self.right.label}"

    def holds(self, t: ExponentTuple) -> bool:
        return _less(self.left(t), self.right(t), self.strict)

    def describe(self, t: ExponentTuple) -> str:
        return f"{self.text} fails: {self.left(t):.12g} vs {self.right(t):.12g}"


def chain(lo: Term | None, lo_strict: bool, var: Term, hi_strict: bool, hi: Term | None):
    out = []
    if lo is not None:
        out.append(Cmp(lo, lo_strict, var))
    if hi is not None:
        out.append(Cmp(var, hi_strict, hi))
    return out


def const(value: float, label: str | None = None) -> Term:
    return Term(label or repr(value), lambda t: value)


# variables
Q = Term("q", lambda t: t.q)
P = Term("p", lambda t: t.p)
R = Term("r", lambda t: t.r)
MU = Term("mu", lambda t: t.mu)
ALPHA = Term("alpha", lambda t: t.alpha)
BETA = Term("beta", lambda t: t.beta)
INFTY = const(INF, "inf")
ZERO = const(0.0, "0")
ONE = const(1.0, "1")
TWO = const(2.0, "2")

# exponent bounds
A = Term("d/(alpha-1)", lambda t: _ratio(t.d, t.alpha - 1))
B0 = Term("d/(2alpha-2)", lambda t: _ratio(t.d, 2 * t.alpha - 2))
B = Term("d/(2alpha-2-mu)", lambda t: _ratio(t.d, 2 * t.alpha - 2 - t.mu))
C = Term("d/(alpha-1-mu)", lambda t: _ratio(t.d, t.alpha - 1 - t.mu))
P0 = Term("qd/(d-(alpha-1)q)", lambda t: _ratio(t.q * t.d, t.d - (t.alpha - 1) * t.q))
PM = Term("qd/(d-(alpha-1-mu)q)", lambda t: _ratio(t.q * t.d, t.d - (t.alpha - 1 - t.mu) * t.q))


def _kappa(t, mu):
    return (3 * t.alpha - 3 + mu) * t.beta - t.alpha


D0 = Term("d beta/((3alpha-3)beta-alpha)", lambda t: _ratio(t.d * t.beta, _kappa(t, 0.0)))
D0x2 = Term("2d beta/((3alpha-3)beta-alpha)", lambda t: _ratio(2 * t.d * t.beta, _kappa(t, 0.0)))
Q0 = Term("d beta q/(((3alpha-3)beta-alpha)q-d beta)",
          lambda t: _ratio(t.d * t.beta * t.q, _kappa(t, 0.0) * t.q - t.d * t.beta))
D = Term("d beta/((3alpha-3+mu)beta-alpha)", lambda t: _ratio(t.d * t.beta, _kappa(t, t.mu)))
Dx2 = Term("2d beta/((3alpha-3+mu)beta-alpha)", lambda t: _ratio(2 * t.d * t.beta, _kappa(t, t.mu)))
QM = Term("d beta q/((3alpha-3+mu)beta q-alpha q-d beta)",
          lambda t: _ratio(t.d * t.beta * t.q, _kappa(t, t.mu) * t.q - t.d * t.beta))
E4 = Term("2d beta/((4alpha-4)beta-alpha)",
          lambda t: _ratio(2 * t.d * t.beta, (4 * t.alpha - 4) * t.beta - t.alpha))
E4M = Term("2d beta/((4alpha-4+mu)beta-alpha)",
           lambda t: _ratio(2 * t.d * t.beta, (4 * t.alpha - 4 + t.mu) * t.beta - t.alpha))

# parameter-gate bounds
A54 = const(5 / 4, "5/4")
A43 = const(4 / 3, "4/3")
A32 = const(3 / 2, "3/2")
G5 = Term("alpha/(5alpha-5)", lambda t: t.alpha / (5 * t.alpha - 5))
G4 = Term("alpha/(4alpha-4)", lambda t: t.alpha / (4 * t.alpha - 4))
G3 = Term("alpha/(3alpha-3)", lambda t: t.alpha / (3 * t.alpha - 3))
AM1 = Term("alpha-1", lambda t: t.alpha - 1)
A2M2 = Term("2alpha-2", lambda t: 2 * t.alpha - 2)
M_A3 = Term("alpha/beta-(3alpha-3)", lambda t: t.alpha / t.beta - (3 * t.alpha - 3))
M_A2 = Term("alpha/beta-(2alpha-2)", lambda t: t.alpha / t.beta - (2 * t.alpha - 2))
M_H2 = Term("alpha/(2beta)-(alpha-1)/2", lambda t: t.alpha / (2 * t.beta) - (t.alpha - 1) / 2)
M_H1 = Term("alpha/(2beta)-(alpha-1)", lambda t: t.alpha / (2 * t.beta) - (t.alpha - 1))
M_T3 = Term("alpha/(3beta)+(alpha-1)/3", lambda t: t.alpha / (3 * t.beta) + (t.alpha - 1) / 3)
M_T = Term("alpha/(3beta)", lambda t: t.alpha / (3 * t.beta))

LT, LE = True, False


def gate(alpha_lo, alpha_lo_strict, alpha_hi, beta_lo, beta_lo_strict, beta_hi, beta_hi_strict,
         mu_lo=None, mu_lo_strict=True, mu_hi=None, mu_hi_strict=True):
    # alpha intervals are always open below and closed above
    cmps = chain(alpha_lo, alpha_lo_strict, ALPHA, LE, alpha_hi)
    cmps += chain(beta_lo, beta_lo_strict, BETA, beta_hi_strict, beta_hi)
    cmps += chain(mu_lo, mu_lo_strict, MU, mu_hi_strict, mu_hi)
    return cmps


def branch(q_lo, q_lo_strict, q_hi_strict, q_hi, p_lo, p_hi, r_lo, r_lo_strict, r_hi):
    # p always has strict bounds on both sides, r is strict above
    return (chain(q_lo, q_lo_strict, Q, q_hi_strict, q_hi)
            + chain(p_lo, LT, P, LT, p_hi)
            + chain(r_lo, r_lo_strict, R, LT, r_hi))


@dataclass(frozen=True)
class Case:
    label: str
    gates: tuple[tuple[str, tuple[Cmp, ...]], ...]
    branches: tuple[tuple[str, tuple[Cmp, ...]], ...]


def _case(label, gates, branches):
    return Case(label, tuple((g, tuple(c)) for g, c in gates), tuple((b, tuple(c)) for b, c in branches))


# ---------------------------------------------------------------------------
# rule tables, in document order

_THM1_BR1 = branch(B0, LT, LE, A, A, P0, A, LT, P0)
_BIG = branch(A, LT, LT, INFTY, A, INFTY, Q, LE, INFTY)

THEOREM1 = (
    _case("(1)", [], [("", _THM1_BR1)]),
    _case("(2)", [], [("", _BIG)]),
)

ASSUMPTION1 = (
    _case("I", [("", gate(ONE, LT, TWO, ZERO, LT, ONE, LT))], [("", _THM1_BR1)]),
    _case("II", [("", gate(ONE, LT, A32, ZERO, LT, ONE, LT))], [("", _BIG)]),
    _case("III", [("", gate(A32, LT, TWO, ZERO, LT, G3, LE))], [("", _BIG)]),
    _case("IV", [("", gate(A32, LT, TWO, G3, LT, ONE, LT))],
          [("", branch(A, LT, LE, D0, A, INFTY, Q, LE, INFTY))]),
    _case("V", [("", gate(A32, LT, TWO, G3, LT, ONE, LT))],
          [("", branch(D0, LT, LT, D0x2, A, Q0, Q, LE, Q0))]),
)

_MU_SMALL = chain(ZERO, LT, MU, LT, AM1)
THEOREM3 = (
    _case("(1)", [], [("", _MU_SMALL + branch(B, LT, LE, A, A, PM, A, LT, P0))]),
    _case("(2)", [], [("", _MU_SMALL + branch(A, LT, LE, C, A, PM, Q, LE, INFTY))]),
    _case("(3)", [], [("", _MU_SMALL + branch(C, LT, LT, INFTY, A, INFTY, Q, LE, INFTY))]),
    _case("(4)", [], [("", chain(AM1, LE, MU, LT, A2M2)
                       + branch(B, LT, LT, INFTY, A, PM, Q, LE, INFTY))]),
)

_G3_TOP = (A32, LT, TWO, G3, LT, ONE, LT)  # 3/2 < alpha <= 2, alpha/(3alpha-3) < beta < 1

ASSUMPTION2 = (
    _case("I", [
        ("(i)", gate(ONE, LT, A54, ZERO, LT, ONE, LT, ZERO, LT, AM1, LT)),
        ("(ii)", gate(A54, LT, TWO, ZERO, LT, G5, LE, ZERO, LT, AM1, LT)),
        ("(iii)", gate(A54, LT, A43, G5, LT, ONE, LT, ZERO, LT, AM1, LT)),
        ("(iv)", gate(A43, LT, TWO, G5, LT, G4, LE, ZERO, LT, AM1, LT)),
        ("(v)", gate(A43, LT, A32, G4, LT, ONE, LT, ZERO, LT, M_A3, LE)),
        ("(vi)", gate(A32, LT, TWO, G4, LT, G3, LE, ZERO, LT, M_A3, LE)),
    ], [
        ("(1)", branch(B, LT, LE, A, A, PM, A, LT, P0)),
        ("(2)", branch(A, LT, LT, C, A, PM, Q, LE, INFTY)),
        ("(3)", branch(C, LE, LT, INFTY, A, INFTY, Q, LE, INFTY)),
    ]),
    _case("II", [
        ("(i)", gate(ONE, LT, A54, ZERO, LT, ONE, LT, AM1, LE, A2M2, LT)),
        ("(ii)", gate(A54, LT, TWO, ZERO, LT, G5, LE, AM1, LE, A2M2, LT)),
        ("(iii)", gate(A54, LT, A43, G5, LT, ONE, LT, AM1, LE, M_A3, LE)),
        ("(iv)", gate(A43, LT, TWO, G5, LT, G4, LE, AM1, LE, M_A3, LE)),
    ], [
        ("(1)", branch(B, LT, LT, INFTY, A, PM, Q, LE, INFTY)),
    ]),
    _case("III", [
        ("(i)", gate(A54, LT, A43, G5, LT, ONE, LT, M_A3, LT, M_H2, LT)),
        ("(ii)", gate(A43, LT, TWO, G5, LT, G4, LE, M_A3, LT, M_H2, LT)),
        ("(iii)", gate(A43, LT, A32, G4, LT, ONE, LT, AM1, LE, M_H2, LT)),
        ("(iv)", gate(A32, LT, TWO, G4, LT, G3, LE, AM1, LE, M_H2, LT)),
    ], [
        ("(1)", branch(B, LT, LE, D, A, PM, Q, LE, INFTY)),
        ("(2)", branch(D, LT, LT, Dx2, A, PM, Q, LE, QM)),
    ]),
    _case("IV", [
        ("(i)", gate(A43, LT, A32, G4, LT, ONE, LT, M_A3, LT, M_H1, LE)),
        ("(ii)", gate(A32, LT, TWO, G4, LT, G3, LE, M_A3, LT, M_H1, LE)),
        ("(iii)", gate(*_G3_TOP, ZERO, LT, M_H1, LE)),
    ], [
        ("(1)", branch(B, LT, LE, A, A, PM, A, LT, P0)),
        ("(2)", branch(A, LT, LE, C, A, PM, Q, LE, INFTY)),
        ("(3)", branch(C, LT, LE, D, A, INFTY, Q, LE, INFTY)),
        ("(4)", branch(D, LT, LT, Dx2, A, QM, Q, LE, QM)),
    ]),
    _case("V", [
        ("(i)", gate(A43, LT, A32, G4, LT, ONE, LT, M_H1, LT, AM1, LT)),
        ("(ii)", gate(A32, LT, TWO, G4, LT, G3, LE, M_H1, LT, AM1, LT)),
        ("(iii)", gate(*_G3_TOP, M_H1, LT, M_A2, LE)),
    ], [
        ("(1)", branch(B, LT, LE, A, A, PM, A, LT, P0)),
        ("(2)", branch(A, LT, LE, D, A, PM, Q, LE, INFTY)),
        ("(3)", branch(D, LT, LE, E4, A, PM, Q, LE, QM)),
        ("(4)", branch(E4, LE, LT, Dx2, A, QM, Q, LE, QM)),
    ]),
    _case("VI", [
        ("(i)", gate(A54, LT, A32, G5, LT, ONE, LT, M_H2, LE, M_T3, LT)),
        ("(ii)", gate(A32, LT, TWO, G5, LT, G3, LE, M_H2, LE, M_T3, LT)),
        ("(iii)", gate(*_G3_TOP, AM1, LE, M_T3, LT)),
    ], [
        ("(1)", branch(B, LT, LT, Dx2, A, PM, Q, LE, QM)),
    ]),
    _case("VII", [
        ("(i)", gate(*_G3_TOP, M_A2, LT, M_H2, LT)),
    ], [
        ("(1)", branch(B, LT, LE, E4M, A, PM, A, LT, P0)),
        ("(2)", branch(E4M, LT, LE, A, A, PM, A, LT, QM)),
        ("(3)", branch(A, LT, LE, E4, A, PM, Q, LE, QM)),
        ("(4)", branch(E4, LT, LT, Dx2, A, QM, Q, LE, QM)),
    ]),
    _case("VIII", [
        ("(i)", gate(*_G3_TOP, M_H2, LE, M_T, LT)),
    ], [
        ("(1)", branch(B, LT, LE, E4M, A, PM, A, LT, P0)),
        ("(2)", branch(E4M, LT, LE, A, A, PM, A, LT, QM)),
    ]),
    _case("IX", [
        ("(i)", gate(*_G3_TOP, M_T, LE, AM1, LT)),
    ], [
        ("(1)", branch(B, LT, LE, A, A, PM, A, LT, QM)),
    ]),
    _case("X", [
        ("(i)", gate(*_G3_TOP, M_H2, LE, AM1, LT)),
    ], [
        ("(1)", branch(A, LT, LE, E4, A, PM, Q, LE, QM)),
        ("(2)", branch(E4, LT, LT, Dx2, A, QM, Q, LE, QM)),
    ]),
)

_TABLES = {
    "theorem1": ("Theorem1", THEOREM1),
    "assumption1": ("Assumption1", ASSUMPTION1),
    "theorem3": ("Theorem3", THEOREM3),
    "assumption2": ("Assumption2", ASSUMPTION2),
}


# ---------------------------------------------------------------------------
# evaluation


def _join(*parts):
    return ".".join(p for p in parts if p)


def _failures(cmps, t):
    return [c.describe(t) for c in cmps if not c.holds(t)]


def evaluate(rule: str, t: ExponentTuple) -> AdmissibilityReport:
    """Check ``t`` against every case of ``rule``; all satisfied paths are listed."""
    try:
        prefix, table = _TABLES[rule]
    except KeyError:
        raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}") from None
    paths, violated = [], []
    for case in table:
        gates = case.gates or (("", ()),)
        for glabel, gcmps in gates:
            gfail = _failures(gcmps, t)
            if gfail:
                violated += [f"{_join(prefix, case.label, glabel)}: {f}" for f in gfail]
                continue
            for blabel, bcmps in case.branches:
                path = _join(prefix, case.label, glabel, blabel)
                bfail = _failures(bcmps, t)
                if bfail:
                    violated += [f"{path}: {f}" for f in bfail]
                else:
                    paths.append(path)
    if paths:
        violated = []
    return AdmissibilityReport(bool(paths), prefix, tuple(paths), tuple(violated))


def check_theorem_local(t: ExponentTuple) -> AdmissibilityReport:
    return evaluate("theorem1", t)


def check_assumption1(t: ExponentTuple) -> AdmissibilityReport:
    return evaluate("assumption1", t)


def check_theorem_local_sobolev(t: ExponentTuple) -> AdmissibilityReport:
    return evaluate("theorem3", t)


def check_assumption2(t: ExponentTuple) -> AdmissibilityReport:
    return evaluate("assumption2", t)


def check_all(t: ExponentTuple) -> dict[str, AdmissibilityReport]:
    return {rule: evaluate(rule, t) for rule in RULES}


# ---------------------------------------------------------------------------
# interval audit used by the randomized scans


def _case_lookup(rule: str, path: str):
    prefix, table = _TABLES[rule]
    parts = path[len(prefix) + 1:].split(".") if path != prefix else []
    for case in table:
        if not parts or parts[0] != case.label:
            continue
        rest = parts[1:]
        gates = case.gates or (("", ()),)
        for glabel, gcmps in gates:
            grest = rest[1:] if glabel else rest
            if glabel and (not rest or rest[0] != glabel):
                continue
            for blabel, bcmps in case.branches:
                if (grest[0] if grest else "") == blabel:
                    return gcmps + bcmps
    raise KeyError(path)


def interval_bounds(rule: str, path: str, t: ExponentTuple) -> dict[str, tuple[float, float]]:
    """Admissible (lower, upper) interval per variable of a case, evaluated at ``t``.

    Bounds that depend on q are evaluated at ``t.q``.
    """
    out: dict[str, list[float]] = {}
    for c in _case_lookup(rule, path):
        for var, side, other in ((c.right, 0, c.left), (c.left, 1, c.right)):
            if var.label in ("q", "p", "r", "mu", "alpha", "beta"):
                lo_hi = out.setdefault(var.label, [-INF, INF])
                val = other(t)
                lo_hi[side] = max(lo_hi[side], val) if side == 0 else min(lo_hi[side], val)
    return {k: (v[0], v[1]) for k, v in out.items()}


def interval_is_empty(rule: str, path: str, t: ExponentTuple) -> bool:
    """True when some variable of the case has an empty admissible interval at ``t``.

    A degenerate interval (lower == upper) counts as empty.
    """
    return any(not lo < hi for lo, hi in interval_bounds(rule, path, t).values())


def random_tuple(rng: random.Random, d_choices=(2, 3, 4)) -> ExponentTuple:
    """Draw a tuple spread over the parameter box; exponents up to 60, sometimes inf."""
    d = rng.choice(d_choices)
    alpha = max(rng.uniform(1.0, 2.0), 1.0 + 1e-6)
    beta = rng.uniform(1e-3, 1 - 1e-3)
    mu = rng.choice([0.0, rng.uniform(0.0, 2 * alpha - 2), rng.uniform(0.0, 2.0)])

    def expo():
        return INF if rng.random() < 0.05 else math.exp(rng.uniform(0.0, math.log(60.0)))
    return ExponentTuple(d, alpha, beta, mu, expo(), expo(), expo())


@dataclass
class ScanResult:
    n_tuples: int
    fired: dict[str, int] = field(default_factory=dict)
    empty_fired: list[tuple[ExponentTuple, str]] = field(default_factory=list)


def empty_interval_scan(n: int = 10_000, seed: int = 0) -> ScanResult:
    """Randomized audit: no firing case may have an empty admissible interval."""
    rng = random.Random(seed)
    res = ScanResult(n)
    for _ in range(n):
        t = random_tuple(rng)
        for rule in RULES:
            rep = evaluate(rule, t)
            for path in rep.case_path:
                res.fired[path] = res.fired.get(path, 0) + 1
                if interval_is_empty(rule, path, t):
                    res.empty_fired.append((t, path))
    return res


def cross_consistency_scan(n: int = 2000, seed: int = 0, mu: float = 1e-9) -> list[tuple[ExponentTuple, str]]:
    """Tuples satisfying Assumption 2 at tiny mu but failing Assumption 1.

    Every gate of Assumption 2 needs mu > 0, so mu = 0 is replaced by a small
    positive value.  Counterexamples are returned for logging, not asserted.
    """
    rng = random.Random(seed)
    found = []
    for _ in range(n):
        base = random_tuple(rng)
        t = ExponentTuple(base.d, base.alpha, base.beta, mu, base.p, base.q, base.r)
        rep2 = check_assumption2(t)
        if rep2.satisfied and not check_assumption1(t).satisfied:
            found.append((t, rep2.first_case))
    return found

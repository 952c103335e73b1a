"""Rate-region polytopes: exact symbolic projection and membership tests.

Linear inequality systems carry exact rational coefficients over two kinds of
symbols: rate variables (eliminable) and opaque entropic constants such as
``H_U`` or ``H_XYUU1U2`` (bound to numbers only when a concrete joint pmf is
supplied). Fourier-Motzkin elimination pairs every lower bound on a variable
with every upper bound, preserving the projection exactly; redundancy is
pruned syntactically and, on request, by per-inequality LP dominance.

The module also provides the closed-form equal-output regions, the
LP-feasibility region for arbitrary access structures, the forehead-model
upper bound, and optimization-backed membership for the correlated and
oblivious settings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import xlogy

from .info_core import (
    AxisMismatchError,
    Channel,
    JointPMF,
    conditional_mutual_information,
    dual_total_correlation,
    mutual_information,
    total_correlation,
)
from .rate_optimizers import (
    OptimizerConfig,
    OptResult,
    RestartRecord,
    multistart_minimize,
)

__all__ = [
    "LinearForm",
    "Inequality",
    "LinearSystem",
    "AccessStructure",
    "RateTuple",
    "MarkovViolationError",
    "FactorizationError",
    "fme_eliminate",
    "system_feasible",
    "canonical_inequality_set",
    "systems_equal",
    "entropy_bindings",
    "evaluate_system",
    "ach_two_pre_system",
    "ach_two_region_system",
    "region_ach_two",
    "region_two_equal",
    "region_equal_indv",
    "region_equal_forehead",
    "region_equal_general",
    "forehead_upper_bound",
    "forehead_upper_bound_search",
    "correlated_rate",
    "oblivious_membership",
    "ObliviousMembership",
]

Rational = Fraction | int


class MarkovViolationError(ValueError):
    """Auxiliary joint fails a required conditional-independence precondition."""

    def __init__(self, message: str, residuals: dict[str, float]):
        super().__init__(f"{message}: residuals {residuals}")
        self.residuals = residuals


class FactorizationError(MarkovViolationError):
    """Auxiliary joint fails the forehead-model factorization."""


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class LinearForm:
    """Exact-rational linear combination of named symbols plus a constant."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def from_terms(cls, terms: Mapping[str, Rational] | None = None, constant: Rational = 0) -> "LinearForm":
        coeffs = {}
        for name, val in (terms or {}).items():
            f = _to_fraction(val)
            if f != 0:
                coeffs[name] = f
        return cls(tuple(sorted(coeffs.items())), _to_fraction(constant))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        d = dict(self.coeffs)
        for name, val in other.coeffs:
            d[name] = d.get(name, Fraction(0)) + val
        return LinearForm.from_terms(d, self.constant + other.constant)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (other * -1)

    def __mul__(self, s: Rational) -> "LinearForm":
        s = _to_fraction(s)
        return LinearForm.from_terms({n: v * s for n, v in self.coeffs}, self.constant * s)

    __rmul__ = __mul__

    def get(self, name: str) -> Fraction:
        return dict(self.coeffs).get(name, Fraction(0))

    def drop(self, name: str) -> "LinearForm":
        return LinearForm.from_terms({n: v for n, v in self.coeffs if n != name}, self.constant)

    def symbols(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def evaluate(self, values: Mapping[str, float]) -> float:
        try:
            return float(self.constant) + sum(float(v) * values[n] for n, v in self.coeffs)
        except KeyError as exc:
            raise AxisMismatchError(f"no binding for symbol {exc.args[0]!r}") from None


@dataclass(frozen=True)
class Inequality:
    """lhs REL rhs with REL in {'>=', '>'}; stored exactly."""

    lhs: LinearForm
    rel: str
    rhs: LinearForm

    def __post_init__(self):
        if self.rel not in (">=", ">"):
            raise ValueError(f"relation must be '>=' or '>', got {self.rel!r}")

    def expr(self) -> LinearForm:
        """lhs - rhs, so the inequality reads expr REL 0."""
        return self.lhs - self.rhs

    def closure(self) -> "Inequality":
        return Inequality(self.lhs, ">=", self.rhs) if self.rel == ">" else self


def _canonical_expr(expr: LinearForm, rel: str) -> tuple:
    """Positive-scaled integer representation: unique key for dedup/equality."""
    values = [v for _, v in expr.coeffs] + ([expr.constant] if expr.constant != 0 else [])
    if not values:
        return (rel, (), 0)
    denom_lcm = math.lcm(*(v.denominator for v in values))
    num_gcd = math.gcd(*(abs(v.numerator * (denom_lcm // v.denominator)) for v in values))
    scale = Fraction(denom_lcm, num_gcd if num_gcd else 1)
    coeffs = tuple((n, int(v * scale)) for n, v in expr.coeffs)
    return (rel, coeffs, int(expr.constant * scale))


@dataclass(frozen=True)
class LinearSystem:
    """Inequalities plus the classification of every symbol.

    ``rate_vars`` are eliminable; every other symbol must appear in
    ``entropic_syms`` and is treated as an opaque real constant.
    """

    inequalities: tuple[Inequality, ...]
    rate_vars: frozenset[str]
    entropic_syms: frozenset[str]

    def __post_init__(self):
        overlap = self.rate_vars & self.entropic_syms
        if overlap:
            raise ValueError(f"symbols classified both ways: {sorted(overlap)}")
        for ineq in self.inequalities:
            unknown = ineq.expr().symbols() - self.rate_vars - self.entropic_syms
            if unknown:
                raise ValueError(f"unclassified symbols {sorted(unknown)} in {ineq}")

    def closure(self) -> "LinearSystem":
        return LinearSystem(tuple(i.closure() for i in self.inequalities), self.rate_vars, self.entropic_syms)

    def to_json_dict(self) -> dict:
        def form_dict(form: LinearForm) -> dict:
            out = {}
            for n, v in form.coeffs:
                out[n] = float(v) if Fraction(float(v)) == v else f"{v.numerator}/{v.denominator}"
            if form.constant != 0:
                c = form.constant
                out["const"] = float(c) if Fraction(float(c)) == c else f"{c.numerator}/{c.denominator}"
            return out

        return {
            "vars": sorted(self.rate_vars),
            "symbols": sorted(self.entropic_syms),
            "ineqs": [
                {"lhs": form_dict(i.lhs), "rel": i.rel, "rhs": form_dict(i.rhs)}
                for i in self.inequalities
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "LinearSystem":
        rate_vars = frozenset(data["vars"])

        def parse_form(d: Mapping) -> LinearForm:
            terms = {k: _to_fraction(v) for k, v in d.items() if k != "const"}
            return LinearForm.from_terms(terms, _to_fraction(d.get("const", 0)))

        ineqs = tuple(
            Inequality(parse_form(i["lhs"]), i["rel"], parse_form(i["rhs"]))
            for i in data["ineqs"]
        )
        if "symbols" in data:
            entropic = frozenset(data["symbols"])
        else:
            seen = frozenset(s for i in ineqs for s in i.expr().symbols())
            entropic = seen - rate_vars
        return cls(ineqs, rate_vars, entropic)


def canonical_inequality_set(sys: LinearSystem) -> frozenset[tuple]:
    """Canonical keys of the closed system; basis for set equality."""
    return frozenset(_canonical_expr(i.expr(), ">=") for i in sys.closure().inequalities)


def systems_equal(a: LinearSystem, b: LinearSystem) -> bool:
    """Set equality of inequalities after closure and canonicalization."""
    return canonical_inequality_set(a) == canonical_inequality_set(b)


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination


def _coeff_scaled(expr: LinearForm) -> tuple[tuple, Fraction]:
    """(canonical coefficient tuple, constant under the same positive scale)."""
    vals = [v for _, v in expr.coeffs]
    denom_lcm = math.lcm(*(v.denominator for v in vals))
    num_gcd = math.gcd(*(abs(v.numerator * (denom_lcm // v.denominator)) for v in vals))
    scale = Fraction(denom_lcm, num_gcd if num_gcd else 1)
    return tuple((n, v * scale) for n, v in expr.coeffs), expr.constant * scale


def _dedup_and_simplify(ineqs: Iterable[Inequality]) -> list[Inequality]:
    """Drop trivially true rows and keep only the strongest row per direction."""
    by_coeffs: dict[tuple, tuple[Fraction, str, Inequality]] = {}
    infeasible: list[Inequality] = []
    for ineq in ineqs:
        expr = ineq.expr()
        if not expr.coeffs:
            true_now = expr.constant > 0 or (expr.constant == 0 and ineq.rel == ">=")
            if not true_now:
                infeasible.append(ineq)
            continue
        key, norm_const = _coeff_scaled(expr)
        prev = by_coeffs.get(key)
        # smaller constant = stronger requirement; on ties '>' dominates '>='
        cand = (norm_const, 0 if ineq.rel == ">" else 1)
        if prev is None or cand < (prev[0], 0 if prev[1] == ">" else 1):
            by_coeffs[key] = (norm_const, ineq.rel, ineq)
    return [ineq for _, _, ineq in by_coeffs.values()] + infeasible


def _lp_prune(ineqs: list[Inequality], feasibility_slack: float = 1e-9) -> list[Inequality]:
    """Drop inequalities implied by the rest (LP dominance over free symbols)."""
    kept = list(ineqs)
    names = sorted({s for i in kept for s in i.expr().symbols()})
    if not names or len(kept) < 2:
        return kept
    idx = {n: j for j, n in enumerate(names)}
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1:]
        expr = kept[i].expr()
        c = np.zeros(len(names))
        for n, v in expr.coeffs:
            c[idx[n]] = float(v)
        a_ub, b_ub = [], []
        for o in others:
            oe = o.expr()
            row = np.zeros(len(names))
            for n, v in oe.coeffs:
                row[idx[n]] = -float(v)
            a_ub.append(row)
            b_ub.append(float(oe.constant))
        res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=[(None, None)] * len(names), method="highs")
        implied = res.status == 0 and res.fun >= -float(expr.constant) - feasibility_slack
        if implied:
            kept.pop(i)
        else:
            i += 1
    return kept


def fme_eliminate(sys: LinearSystem, var: str, prune: str = "lp") -> LinearSystem:
    """Eliminate one rate variable exactly; the projection is unchanged.

    Every lower bound on ``var`` is paired with every upper bound; a
    combination is strict when either parent is. ``prune`` selects the
    post-pass: ``"lp"`` (syntactic plus LP dominance), ``"syntactic"``, or
    ``"none"``.
    """
    if var not in sys.rate_vars:
        raise AxisMismatchError(f"{var!r} is not a rate variable of the system")
    lowers, uppers, rest = [], [], []
    for ineq in sys.inequalities:
        expr = ineq.expr()
        c = expr.get(var)
        if c > 0:
            lowers.append((c, expr.drop(var), ineq.rel))
        elif c < 0:
            uppers.append((c, expr.drop(var), ineq.rel))
        else:
            rest.append(ineq)
    combined: list[Inequality] = list(rest)
    for c1, r1, rel1 in lowers:
        for c2, r2, rel2 in uppers:
            expr = r1 * (-c2) + r2 * c1
            rel = ">" if (rel1 == ">" or rel2 == ">") else ">="
            combined.append(Inequality(expr, rel, LinearForm()))
    if prune == "syntactic":
        combined = _dedup_and_simplify(combined)
    elif prune == "lp":
        combined = _lp_prune(_dedup_and_simplify(combined))
    elif prune != "none":
        raise ValueError(f"unknown prune mode {prune!r}")
    return LinearSystem(tuple(combined), sys.rate_vars - {var}, sys.entropic_syms)


MEMBERSHIP_SLACK = Fraction(1, 10**9)


def system_feasible(sys: LinearSystem, slack: Fraction = MEMBERSHIP_SLACK) -> bool:
    """Exact feasibility over the rate variables with symbols as constants.

    Eliminates every rate variable, then checks the remaining constant
    inequalities with the membership slack (so float-rounded boundary points
    stay inside); entropic symbols must not appear.
    """
    if sys.entropic_syms:
        raise AxisMismatchError("feasibility needs a fully numeric system (no entropic symbols)")
    cur = sys
    for var in sorted(cur.rate_vars):
        cur = fme_eliminate(cur, var, prune="syntactic")
    for ineq in cur.inequalities:
        expr = ineq.expr()
        if expr.coeffs:
            raise AssertionError("elimination left a variable behind")
        if expr.constant < -slack:
            return False
    return True


# ---------------------------------------------------------------------------
# numeric evaluation of symbolic systems


def entropy_bindings(p: JointPMF, order: Sequence[str] | None = None) -> dict[str, float]:
    """Joint entropies of every non-empty axis subset, keyed ``H_<names>``.

    Subset names concatenate in the supplied order (default: the pmf's own
    axis order), e.g. axes (X, Y, U) produce H_X, H_Y, H_U, H_XY, H_XU,
    H_YU, H_XYU.
    """
    names = list(order) if order is not None else list(p.names)
    if set(names) != set(p.names):
        raise AxisMismatchError(f"order {names} does not match axes {p.names}")
    arr = np.asarray(p.probs)
    out: dict[str, float] = {}
    for r in range(1, len(names) + 1):
        for subset in itertools.combinations(names, r):
            axes = tuple(i for i, n in enumerate(p.names) if n not in subset)
            marg = arr.sum(axis=axes) if axes else arr
            out["H_" + "".join(subset)] = float(-xlogy(marg, marg).sum() / math.log(2.0))
    return out


def evaluate_system(
    sys: LinearSystem,
    bindings: Mapping[str, float],
    rates: Mapping[str, float],
    slack: float = 1e-9,
) -> bool:
    """Membership of a rate point, binding entropic symbols to numbers.

    Strict inequalities are evaluated as non-strict (region closure).
    """
    values = dict(bindings)
    values.update(rates)
    return all(i.expr().evaluate(values) >= -slack for i in sys.inequalities)


# ---------------------------------------------------------------------------
# the two-processor omniscient achievable region


_H_SYMS = ("H_U", "H_UU1", "H_UU2", "H_UU1U2", "H_XY", "H_XYU", "H_XYUU1", "H_XYUU2", "H_XYUU1U2")


def _lf(terms: Mapping[str, Rational], constant: Rational = 0) -> LinearForm:
    return LinearForm.from_terms(terms, constant)


def ach_two_pre_system() -> LinearSystem:
    """Internal-rate system of the two-processor scheme before eliminating R0.

    Over rates R, R1, R2 and the internal common-randomness split R0; the
    right-hand sides are the binning/decoding constraints written over
    opaque joint-entropy symbols (conditional quantities expanded), e.g. the
    first row is the within-bin selection constraint
    R - R0/2 > I(U1;U2|U) = H_UU1 + H_UU2 - H_U - H_UU1U2.
    """
    half = Fraction(1, 2)
    ineqs = (
        Inequality(_lf({"R0": 1}), ">=", _lf({})),
        Inequality(
            _lf({"R": 1, "R0": -half}), ">",
            _lf({"H_UU1": 1, "H_UU2": 1, "H_U": -1, "H_UU1U2": -1}),
        ),
        Inequality(
            _lf({"R": 1, "R0": half}), ">",
            _lf({"H_XY": 1, "H_U": 1, "H_XYU": -1}),
        ),
        Inequality(
            _lf({"R": 1, "R1": 1}), ">",
            _lf({"H_XY": 1, "H_UU1": 1, "H_XYUU1": -1}),
        ),
        Inequality(
            _lf({"R": 1, "R2": 1}), ">",
            _lf({"H_XY": 1, "H_UU2": 1, "H_XYUU2": -1}),
        ),
        Inequality(
            _lf({"R": 1, "R1": 1, "R2": 1, "R0": -half}), ">",
            _lf({"H_UU1": 1, "H_UU2": 1, "H_U": -1, "H_XY": 1, "H_XYUU1U2": -1}),
        ),
    )
    return LinearSystem(ineqs, frozenset({"R", "R1", "R2", "R0"}), frozenset(_H_SYMS))


def ach_two_region_system() -> LinearSystem:
    """The six-inequality achievable region over (R, R1, R2).

    Equal, after canonicalization, to eliminating R0 from
    :func:`ach_two_pre_system`.
    """
    ineqs = (
        Inequality(_lf({"R": 1, "R1": 1}), ">=", _lf({"H_XY": 1, "H_UU1": 1, "H_XYUU1": -1})),
        Inequality(_lf({"R": 1, "R2": 1}), ">=", _lf({"H_XY": 1, "H_UU2": 1, "H_XYUU2": -1})),
        Inequality(_lf({"R": 1}), ">=", _lf({"H_UU1": 1, "H_UU2": 1, "H_U": -1, "H_UU1U2": -1})),
        Inequality(
            _lf({"R": 1, "R1": 1, "R2": 1}), ">=",
            _lf({"H_UU1": 1, "H_UU2": 1, "H_U": -1, "H_XY": 1, "H_XYUU1U2": -1}),
        ),
        Inequality(
            _lf({"R": 2, "R1": 1, "R2": 1}), ">=",
            _lf({"H_UU1": 1, "H_UU2": 1, "H_XY": 2, "H_XYU": -1, "H_XYUU1U2": -1}),
        ),
        Inequality(
            _lf({"R": 2}), ">=",
            _lf({"H_UU1": 1, "H_UU2": 1, "H_UU1U2": -1, "H_XY": 1, "H_XYU": -1}),
        ),
    )
    return LinearSystem(ineqs, frozenset({"R", "R1", "R2"}), frozenset(_H_SYMS))


# ---------------------------------------------------------------------------
# rate tuples, access structures, closed-form regions


@dataclass(frozen=True)
class RateTuple:
    """Common message rate plus the shared-randomness rates, bits/symbol."""

    r_common: float
    r_shared: tuple[float, ...] = ()

    def __post_init__(self):
        if self.r_common < 0 or any(r < 0 for r in self.r_shared):
            raise ValueError(f"rates must be non-negative: {self}")
        object.__setattr__(self, "r_shared", tuple(float(r) for r in self.r_shared))


@dataclass(frozen=True)
class AccessStructure:
    """Which shared-randomness sources (1-based, in [1..h]) each processor sees."""

    t: int
    h: int
    views: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.t < 1 or self.h < 0:
            raise ValueError("need t >= 1 and h >= 0")
        if len(self.views) != self.t:
            raise ValueError(f"{self.t} processors but {len(self.views)} views")
        views = tuple(frozenset(int(j) for j in v) for v in self.views)
        for v in views:
            if not v <= set(range(1, self.h + 1)):
                raise ValueError(f"view {sorted(v)} not a subset of [1..{self.h}]")
        object.__setattr__(self, "views", views)

    @classmethod
    def individually(cls, t: int) -> "AccessStructure":
        return cls(t, t, tuple(frozenset({i}) for i in range(1, t + 1)))

    @classmethod
    def forehead(cls, t: int) -> "AccessStructure":
        full = set(range(1, t + 1))
        return cls(t, t, tuple(frozenset(full - {i}) for i in range(1, t + 1)))


def _markov_residuals_two(aux: JointPMF) -> dict[str, float]:
    return {
        "I(X;U2,Y|U,U1)": conditional_mutual_information(aux, ("X",), ("U2", "Y"), ("U", "U1")),
        "I(X,U1;Y|U,U2)": conditional_mutual_information(aux, ("X", "U1"), ("Y",), ("U", "U2")),
    }


def region_ach_two(aux: JointPMF, rt: RateTuple, slack: float = 1e-9) -> bool:
    """Membership of (R, R1, R2) in the two-processor achievable region.

    ``aux`` is a joint over axes named X, Y, U, U1, U2 and must satisfy the
    long Markov chain X - (U,U1) - (U,U2) - Y within 1e-6 (checked through
    both conditional-independence residuals).
    """
    required = {"X", "Y", "U", "U1", "U2"}
    if set(aux.names) != required:
        raise AxisMismatchError(f"aux needs axes {sorted(required)}, got {aux.names}")
    if len(rt.r_shared) != 2:
        raise AxisMismatchError("two-processor region needs exactly two shared rates")
    residuals = _markov_residuals_two(aux)
    if any(v > 1e-6 for v in residuals.values()):
        raise MarkovViolationError("aux violates X-(U,U1)-(U,U2)-Y", residuals)
    bindings = entropy_bindings(aux, order=("X", "Y", "U", "U1", "U2"))
    rates = {"R": rt.r_common, "R1": rt.r_shared[0], "R2": rt.r_shared[1]}
    return evaluate_system(ach_two_region_system(), bindings, rates, slack=slack)


def region_two_equal(hx: float, rt: RateTuple) -> bool:
    """Two-processor region for identical outputs: R + min(R1,R2) >= H(X), R >= H(X)/2."""
    if hx < 0:
        raise ValueError("entropy must be non-negative")
    if len(rt.r_shared) != 2:
        raise AxisMismatchError("two-processor region needs exactly two shared rates")
    return region_equal_indv(hx, 2, rt)


def region_equal_indv(hx: float, t: int, rt: RateTuple) -> bool:
    """Individually-shared equal-output region: R + min_i R_i >= H(X), t R >= (t-1) H(X)."""
    if t < 2:
        raise ValueError("need t >= 2")
    if len(rt.r_shared) != t:
        raise AxisMismatchError(f"expected {t} shared rates, got {len(rt.r_shared)}")
    hxf = _to_fraction(hx)
    r = _to_fraction(rt.r_common)
    shared = [_to_fraction(v) for v in rt.r_shared]
    return (
        r + min(shared) >= hxf - MEMBERSHIP_SLACK
        and t * r >= (t - 1) * hxf - MEMBERSHIP_SLACK
    )


def region_equal_forehead(hx: float, t: int, rt: RateTuple) -> bool:
    """Forehead equal-output region: i R + sum_{j in S} R_j >= H(X) for |S| = t - i."""
    if t < 2:
        raise ValueError("need t >= 2")
    if len(rt.r_shared) != t:
        raise AxisMismatchError(f"expected {t} shared rates, got {len(rt.r_shared)}")
    hxf = _to_fraction(hx)
    r = _to_fraction(rt.r_common)
    shared = [_to_fraction(v) for v in rt.r_shared]
    for i in range(1, t + 1):
        for s in itertools.combinations(range(t), t - i):
            if i * r + sum(shared[j] for j in s) < hxf - MEMBERSHIP_SLACK:
                return False
    return True


def region_equal_general(hx: float, acc: AccessStructure, rt: RateTuple) -> bool:
    """Equal-output region for an arbitrary access structure, by exact feasibility.

    Feasible iff there exist non-negative r, r_1..r_h with
    R >= sum_{j not in V_i} r_j + r for every processor, H(X) <= r + sum r_j,
    and R_j >= r_j. Decided by eliminating every auxiliary rate exactly.
    """
    if len(rt.r_shared) != acc.h:
        raise AxisMismatchError(f"expected {acc.h} shared rates, got {len(rt.r_shared)}")
    hxf = _to_fraction(hx)
    big_r = _to_fraction(rt.r_common)
    big_rj = [_to_fraction(v) for v in rt.r_shared]
    names = ["r"] + [f"r_{j}" for j in range(1, acc.h + 1)]
    ineqs = []
    for view in acc.views:
        terms = {"r": Fraction(-1)}
        for j in range(1, acc.h + 1):
            if j not in view:
                terms[f"r_{j}"] = Fraction(-1)
        ineqs.append(Inequality(_lf(terms, big_r), ">=", _lf({})))
    ineqs.append(Inequality(_lf({n: 1 for n in names}, -hxf), ">=", _lf({})))
    for j in range(1, acc.h + 1):
        ineqs.append(Inequality(_lf({f"r_{j}": -1}, big_rj[j - 1]), ">=", _lf({})))
    for n in names:
        ineqs.append(Inequality(_lf({n: 1}), ">=", _lf({})))
    sys = LinearSystem(tuple(ineqs), frozenset(names), frozenset())
    return system_feasible(sys)


# ---------------------------------------------------------------------------
# forehead-model upper bound


def _forehead_residuals(aux: JointPMF, x_axes, u_axis, ui_axes) -> dict[str, float]:
    res = {
        "TC(X|U,all Ui)": total_correlation(aux, [(x,) for x in x_axes], (u_axis, *ui_axes)),
    }
    for m, (xm, um) in enumerate(zip(x_axes, ui_axes), start=1):
        others = tuple(u for u in ui_axes if u != um)
        res[f"I(X{m};U{m}|rest)"] = conditional_mutual_information(
            aux, (xm,), (um,), (u_axis, *others)
        )
    return res


def forehead_upper_bound(
    aux: JointPMF,
    x_axes: Sequence[str],
    u_axis: str = "U",
    ui_axes: Sequence[str] | None = None,
) -> float:
    """Transmission-rate upper bound for the forehead model at a given auxiliary.

    ``aux`` must factor as p(u, u_1..u_t) prod_m p(x_m | u, u_{[1:t] minus m})
    within 1e-6 (two residual families are checked). Computes, for i < t, the
    worst dual total correlation among all (i+1)-subsets of the auxiliaries
    conditioned on everything else, and for i = t the full dual total
    correlation plus I(X_all; U); returns max_i r_i / i.
    """
    t = len(x_axes)
    ui_axes = tuple(ui_axes) if ui_axes is not None else tuple(f"U{i}" for i in range(1, t + 1))
    if len(ui_axes) != t:
        raise AxisMismatchError(f"{t} output axes but {len(ui_axes)} auxiliary axes")
    residuals = _forehead_residuals(aux, tuple(x_axes), u_axis, ui_axes)
    if any(v > 1e-6 for v in residuals.values()):
        raise FactorizationError("aux violates the forehead factorization", residuals)
    best = -math.inf
    for i in range(1, t):
        worst = 0.0
        for subset in itertools.combinations(range(t), i + 1):
            group = [ui_axes[j] for j in subset]
            rest = [ui_axes[j] for j in range(t) if j not in subset]
            worst = max(worst, dual_total_correlation(aux, [(g,) for g in group], (u_axis, *rest)))
        best = max(best, worst / i)
    r_t = dual_total_correlation(aux, [(u,) for u in ui_axes], (u_axis,)) + mutual_information(
        aux, tuple(x_axes), (u_axis,)
    )
    return max(best, r_t / t)


def _entropy_np(arr: np.ndarray) -> float:
    return float(-xlogy(arr, arr).sum() / math.log(2.0))


def forehead_upper_bound_search(
    q: JointPMF,
    cfg: OptimizerConfig | None = None,
    card_u: int = 2,
    card_ui: int = 2,
) -> OptResult:
    """Minimize the forehead upper bound over parameterized auxiliary families.

    The family p(u, u_1..u_t) prod_m p(x_m | u, u_rest) satisfies the
    factorization by construction; matching the target output marginal is
    enforced by a penalty schedule. Returns a certified upper bound.
    """
    cfg = cfg or OptimizerConfig(restarts=8)
    arr = np.asarray(q.probs)
    t = arr.ndim
    x_sizes = arr.shape
    u_sizes = (card_u,) + (card_ui,) * t
    n_joint = int(np.prod(u_sizes))
    chan_shapes = []
    for m in range(t):
        in_size = card_u * card_ui ** (t - 1)
        chan_shapes.append((in_size, x_sizes[m]))
    sizes = [n_joint] + [s[0] * s[1] for s in chan_shapes]
    splits = np.cumsum(sizes)[:-1]

    def build(theta: np.ndarray):
        parts = np.split(theta, splits)
        pu_all = np.exp(parts[0] - parts[0].max())
        pu_all = (pu_all / pu_all.sum()).reshape(u_sizes)
        chans = []
        for m in range(t):
            tab = parts[m + 1].reshape(chan_shapes[m])
            z = np.exp(tab - tab.max(axis=1, keepdims=True))
            chans.append((z / z.sum(axis=1, keepdims=True)))
        return pu_all, chans

    def full_joint(theta: np.ndarray) -> np.ndarray:
        pu_all, chans = build(theta)
        joint = pu_all
        for m in range(t):
            # channel inputs are (U, all U_j except U_m) in ascending order;
            # singleton axes broadcast over U_m and previously attached outputs
            shape = [1] * (t + 1)
            shape[0] = card_u
            for j in range(t):
                if j != m:
                    shape[1 + j] = card_ui
            shape += [1] * (joint.ndim - (t + 1)) + [x_sizes[m]]
            joint = joint[..., None] * chans[m].reshape(shape)
        return joint  # axes: U, U1..Ut, X1..Xt

    axis_names = ["U"] + [f"U{i}" for i in range(1, t + 1)] + [f"X{i}" for i in range(1, t + 1)]

    def objective_from_joint(joint: np.ndarray) -> float:
        pmf = JointPMF.from_named(axis_names, joint / joint.sum())
        return forehead_upper_bound(
            pmf, [f"X{i}" for i in range(1, t + 1)], "U", [f"U{i}" for i in range(1, t + 1)]
        )

    def smooth(theta: np.ndarray, lam: float) -> float:
        joint = full_joint(theta)
        induced = joint.sum(axis=tuple(range(t + 1)))
        return objective_from_joint(joint) + lam * float(((induced - arr) ** 2).sum())

    def finalize(theta: np.ndarray) -> tuple[float, bool]:
        joint = full_joint(theta)
        induced = joint.sum(axis=tuple(range(t + 1)))
        tv = float(np.abs(induced - arr).sum())
        return objective_from_joint(joint), tv <= 1e-4

    best_theta, records = multistart_minimize(
        smooth, finalize, int(sum(sizes)), cfg, (1e2, 1e3, 1e4, 1e5),
        exact=lambda th: smooth(th, 1e5),
    )
    joint = full_joint(best_theta)
    value, feasible = finalize(best_theta)
    pmf = JointPMF.from_named(axis_names, joint / joint.sum())
    dummy = Channel(
        list(q.axes), [("U", card_u)],
        np.full(arr.shape + (card_u,), 1.0 / card_u),
    )
    induced = joint.sum(axis=tuple(range(t + 1)))
    return OptResult(
        value=value,
        channel=dummy,
        diagnostics={
            "per_restart": records,
            "converged": feasible,
            "marginal_tv": float(np.abs(induced - arr).sum()),
            "aux_joint": pmf,
            "seed": cfg.seed,
        },
    )


# ---------------------------------------------------------------------------
# correlated shared randomness


def correlated_rate(qs: JointPMF, hx: float, cfg: OptimizerConfig | None = None) -> OptResult:
    """Optimal communication rate with correlated shared randomness.

    min over r >= 0 and p(u | s_1..s_t) of max_i (I(U; S_other | S_i) + r)
    subject to I(U; S_all) + r >= H(X); the inner r is optimal at
    max(0, H(X) - I(U; S_all)), leaving an unconstrained channel search.
    """
    if hx < 0:
        raise ValueError("hx must be non-negative")
    cfg = cfg or OptimizerConfig()
    arr = np.asarray(qs.probs)
    t = arr.ndim
    cu = cfg.card_u or int(np.prod(arr.shape)) + t
    n_params = arr.size * cu
    h_all = _entropy_np(arr)
    h_si = [_entropy_np(arr.sum(axis=tuple(j for j in range(t) if j != i))) for i in range(t)]

    def build(theta: np.ndarray) -> np.ndarray:
        z = theta.reshape(*arr.shape, cu)
        z = np.exp(z - z.max(axis=-1, keepdims=True))
        return z / z.sum(axis=-1, keepdims=True)

    def terms(theta: np.ndarray) -> tuple[np.ndarray, float]:
        chan = build(theta)
        joint = arr[..., None] * chan
        h_joint = _entropy_np(joint)
        h_u = _entropy_np(joint.sum(axis=tuple(range(t))))
        mi = h_all + h_u - h_joint
        cmis = np.empty(t)
        for i in range(t):
            h_siu = _entropy_np(joint.sum(axis=tuple(j for j in range(t) if j != i)))
            cmis[i] = h_siu + h_all - h_joint - h_si[i]  # I(U; S_other | S_i)
        return cmis, mi

    def smooth(theta: np.ndarray, beta: float) -> float:
        cmis, mi = terms(theta)
        lse = float(np.logaddexp.reduce(beta * cmis) / beta)
        topup = float(np.logaddexp(0.0, beta * (hx - mi)) / beta)
        return lse + topup

    def exact(theta: np.ndarray) -> float:
        cmis, mi = terms(theta)
        return float(cmis.max()) + max(0.0, hx - mi)

    best_theta, records = multistart_minimize(
        smooth, lambda th: (exact(th), True), n_params, cfg, (10.0, 1e2, 1e3, 1e4), exact=exact
    )
    chan_arr = build(best_theta)
    cmis, mi = terms(best_theta)
    out_name = "U" if "U" not in qs.names else "U_"
    channel = Channel(list(qs.axes), [(out_name, cu)], chan_arr)
    return OptResult(
        value=exact(best_theta),
        channel=channel,
        diagnostics={
            "per_restart": records,
            "converged": True,
            "top_up_rate": max(0.0, hx - mi),
            "cmi_terms": cmis.tolist(),
            "mi_all": mi,
            "seed": cfg.seed,
        },
    )


# ---------------------------------------------------------------------------
# oblivious coordinator membership


@dataclass
class ObliviousMembership:
    """Outcome of the structured-family search; 'achieved' is sound,
    'not_found' is inconclusive (the check is an inner approximation)."""

    status: str
    family: JointPMF
    marginal_tv: float
    slacks: dict[frozenset, float]
    diagnostics: dict = field(default_factory=dict)

    @property
    def achieved(self) -> bool:
        return self.status == "achieved"


def oblivious_membership(
    q: JointPMF,
    acc: AccessStructure,
    rt: RateTuple,
    cfg: OptimizerConfig | None = None,
    card_u: int | None = None,
    card_ui: int = 2,
) -> ObliviousMembership:
    """Search the structured auxiliary family for a witness at the rate tuple.

    The family is p(u) prod_j p(u_j) prod_i p(x_i | u, u_{V_i}); its output
    marginal must match ``q`` within 1e-4, and every subset inequality
    R + R_S >= I(X_all; U, U_S) must hold at the witness. Cardinalities of
    the auxiliaries are caller decisions; defaults are card_u = prod|X_i| + t
    and card_ui = 2.
    """
    cfg = cfg or OptimizerConfig()
    arr = np.asarray(q.probs)
    t = arr.ndim
    if acc.t != t:
        raise AxisMismatchError(f"access structure has t={acc.t} but joint has {t} axes")
    if len(rt.r_shared) != acc.h:
        raise AxisMismatchError(f"expected {acc.h} shared rates, got {len(rt.r_shared)}")
    cu = card_u or int(np.prod(arr.shape)) + t
    cui = [card_ui] * acc.h
    views = [sorted(v) for v in acc.views]

    sizes = [cu] + cui
    chan_shapes = []
    for i in range(t):
        in_size = cu * int(np.prod([cui[j - 1] for j in views[i]])) if views[i] else cu
        chan_shapes.append((in_size, arr.shape[i]))
    param_sizes = sizes + [s[0] * s[1] for s in chan_shapes]
    splits = np.cumsum(param_sizes)[:-1]

    def build(theta: np.ndarray):
        parts = np.split(theta, splits)
        simplices = []
        for k, size in enumerate(sizes):
            z = np.exp(parts[k] - parts[k].max())
            simplices.append(z / z.sum())
        chans = []
        for i in range(t):
            tab = parts[len(sizes) + i].reshape(chan_shapes[i])
            z = np.exp(tab - tab.max(axis=1, keepdims=True))
            chans.append(z / z.sum(axis=1, keepdims=True))
        return simplices[0], simplices[1:], chans

    def family_joint(theta: np.ndarray) -> np.ndarray:
        p_u, p_uj, chans = build(theta)
        joint = p_u
        for pj in p_uj:
            joint = joint[..., None] * pj
        # joint now over (U, U_1..U_h); attach processor outputs
        for i in range(t):
            # channel inputs are (U, U_j for j in the sorted view); singleton
            # axes broadcast over unseen sources and earlier outputs
            shape = [1] * (acc.h + 1)
            shape[0] = cu
            for j in views[i]:
                shape[j] = cui[j - 1]
            shape += [1] * (joint.ndim - (acc.h + 1)) + [arr.shape[i]]
            joint = joint[..., None] * chans[i].reshape(shape)
        return joint  # axes: U, U_1..U_h, X_1..X_t

    subsets = [frozenset(s) for r in range(acc.h + 1) for s in itertools.combinations(range(1, acc.h + 1), r)]
    r_s = {s: rt.r_common + sum(rt.r_shared[j - 1] for j in s) for s in subsets}

    def violations(theta: np.ndarray) -> tuple[float, dict[frozenset, float]]:
        joint = family_joint(theta)
        aux_axes = tuple(range(acc.h + 1))
        induced = joint.sum(axis=aux_axes)
        tv = float(np.abs(induced - arr).sum())
        h_x = _entropy_np(induced)
        h_joint = _entropy_np(joint)
        slacks = {}
        for s in subsets:
            keep_aux = (0,) + tuple(s)
            drop = tuple(ax for ax in aux_axes if ax not in keep_aux)
            marg_aux_x = joint.sum(axis=drop) if drop else joint
            h_uus = _entropy_np(marg_aux_x.sum(axis=tuple(range(len(keep_aux), marg_aux_x.ndim))))
            h_x_uus = _entropy_np(marg_aux_x)
            i_s = h_x + h_uus - h_x_uus
            slacks[s] = i_s - r_s[s]
        return tv, slacks

    def smooth(theta: np.ndarray, lam: float) -> float:
        joint = family_joint(theta)
        induced = joint.sum(axis=tuple(range(acc.h + 1)))
        pen = float(((induced - arr) ** 2).sum())
        _, slacks = violations(theta)
        hinge = sum(max(0.0, v) ** 2 for v in slacks.values())
        return lam * (pen + hinge)

    def finalize(theta: np.ndarray) -> tuple[float, bool]:
        tv, slacks = violations(theta)
        worst = max(max(slacks.values()), 0.0)
        feasible = tv <= 1e-4 and worst <= 1e-6
        return max(tv - 1e-4, worst), feasible

    best_theta, records = multistart_minimize(
        smooth, finalize, int(sum(param_sizes)), cfg, (1e2, 1e3, 1e4, 1e5, 1e6),
        exact=lambda th: smooth(th, 1e6),
    )
    tv, slacks = violations(best_theta)
    joint = family_joint(best_theta)
    names = ["U"] + [f"U{j}" for j in range(1, acc.h + 1)] + list(q.names)
    family = JointPMF.from_named(names, joint / joint.sum())
    _, feasible = finalize(best_theta)
    return ObliviousMembership(
        status="achieved" if feasible else "not_found",
        family=family,
        marginal_tv=tv,
        slacks=slacks,
        diagnostics={"per_restart": records, "seed": cfg.seed},
    )

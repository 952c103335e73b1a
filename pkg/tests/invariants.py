"""Shared invariant checkers: each asserts one documented library property.

The per-module test files exercise these at everyday sizes; the acceptance
suite re-runs them at the pinned sizes. Sample counts are arguments so both
callers share one implementation.
"""

import numpy as np
from fractions import Fraction

from coordrate.dsbs_analytic import (
    dsbs_joint,
    dsbs_wyner_ci,
    f_curve,
    f_curve_terms,
    interp_channel,
    t_star,
)
from coordrate.info_core import (
    JointPMF,
    binary_entropy,
    compose,
    conditional_mutual_information,
    dual_total_correlation,
    entropy,
    inv_binary_entropy,
    mutual_information,
    total_correlation,
    tv_distance,
)
from coordrate.rate_regions import (
    AccessStructure,
    Inequality,
    LinearForm,
    LinearSystem,
    RateTuple,
    fme_eliminate,
    region_equal_forehead,
    region_equal_general,
    region_equal_indv,
    region_two_equal,
)


def random_joint(rng, sizes, names=None) -> JointPMF:
    names = tuple(names) if names else tuple(f"X{i+1}" for i in range(len(sizes)))
    probs = rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes)
    return JointPMF.from_named(names, probs)


# ---------------------------------------------------------------------------
# information-measure invariants


def check_entropy_cap(rng, cases: int = 50) -> None:
    for _ in range(cases):
        sizes = tuple(rng.integers(2, 4, size=rng.integers(1, 4)))
        p = random_joint(rng, sizes)
        assert entropy(p) <= np.log2(np.prod(sizes)) + 1e-9


def check_measure_nonnegativity(rng, cases: int = 50) -> None:
    for _ in range(cases):
        p = random_joint(rng, (2, 3, 2), names=("A", "B", "C"))
        assert mutual_information(p, "A", "B") >= -1e-9
        assert conditional_mutual_information(p, "A", "B", "C") >= -1e-9
        assert total_correlation(p, [("A",), ("B",), ("C",)]) >= -1e-9
        assert dual_total_correlation(p, [("A",), ("B",), ("C",)]) >= -1e-9


def check_chain_identity(rng, cases: int = 100) -> None:
    """I(X,Y;U) + I(X;Y|U) = I(X;Y) + I(X;U|Y) + I(Y;U|X)."""
    for _ in range(cases):
        p = random_joint(rng, (2, 2, 3), names=("X", "Y", "U"))
        lhs = mutual_information(p, ("X", "Y"), "U") + conditional_mutual_information(p, "X", "Y", "U")
        rhs = (
            mutual_information(p, "X", "Y")
            + conditional_mutual_information(p, "X", "U", "Y")
            + conditional_mutual_information(p, "Y", "U", "X")
        )
        assert abs(lhs - rhs) <= 1e-9


def check_two_group_reduction(rng, cases: int = 50) -> None:
    for _ in range(cases):
        p = random_joint(rng, (2, 3, 2), names=("A", "B", "C"))
        cmi = conditional_mutual_information(p, "A", "B", "C")
        assert abs(total_correlation(p, [("A",), ("B",)], "C") - cmi) <= 1e-12
        assert abs(dual_total_correlation(p, [("A",), ("B",)], "C") - cmi) <= 1e-12


def check_binary_entropy_roundtrip(points: int = 200) -> None:
    for t in np.linspace(0.0, 0.5, points):
        assert abs(inv_binary_entropy(binary_entropy(float(t))) - t) <= 1e-9


def check_tv_metric(rng, cases: int = 100) -> None:
    for _ in range(cases):
        p = random_joint(rng, (2, 3), names=("A", "B"))
        q = random_joint(rng, (2, 3), names=("A", "B"))
        r = random_joint(rng, (2, 3), names=("A", "B"))
        assert tv_distance(p, p) == 0.0
        assert abs(tv_distance(p, q) - tv_distance(q, p)) <= 1e-12
        assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12


# ---------------------------------------------------------------------------
# closed-form curve invariants


def check_dsbs_closed_vs_tensor(a_values=(0.05, 0.1, 0.2, 0.3, 0.4), t_points: int = 21) -> None:
    for a in a_values:
        q = dsbs_joint(a)
        for t in np.linspace(0.0, 1.0, t_points):
            joint = compose(q, interp_channel(a, float(t)))
            mi = mutual_information(joint, ("X", "Y"), "U")
            cmi = conditional_mutual_information(joint, "X", "Y", "U")
            mi_c, cmi_c = f_curve_terms(a, float(t))
            assert abs(mi - mi_c) <= 1e-9
            assert abs(cmi - cmi_c) <= 1e-9


def check_dsbs_endpoints(a_values=(0.05, 0.1, 0.2, 0.3, 0.4)) -> None:
    for a in a_values:
        assert abs(f_curve(a, 0.0) - 0.5 * dsbs_wyner_ci(a)) <= 1e-9
        assert abs(f_curve(a, 1.0) - (1.0 - binary_entropy(a))) <= 1e-9


def check_dsbs_strict_improvement(a_values=(0.05, 0.1, 0.2, 0.3, 0.4)) -> None:
    for a in a_values:
        ts = t_star(a)
        assert f_curve(a, ts) < min(f_curve(a, 0.0), f_curve(a, 1.0)) - 1e-4


def check_dsbs_crossing_structure(a_values=(0.05, 0.1, 0.2, 0.3, 0.4)) -> None:
    """One sign change of I(X,Y;U) - I(X;Y|U); I(X;Y|U) nondecreasing in t."""
    grid = np.arange(0.0, 1.0 + 1e-12, 1e-3)
    for a in a_values:
        terms = np.array([f_curve_terms(a, float(t)) for t in grid])
        mi, cmi = terms[:, 0], terms[:, 1]
        assert np.all(np.diff(cmi) >= -1e-12)
        signs = np.sign(mi - cmi)
        changes = np.count_nonzero(np.diff(signs[signs != 0]))
        assert changes == 1


# ---------------------------------------------------------------------------
# region invariants


def random_rational_system(rng, n_vars: int = 3, max_ineqs: int = 8) -> LinearSystem:
    names = [f"x{i}" for i in range(n_vars)]
    k = int(rng.integers(2, max_ineqs + 1))
    ineqs = []
    for _ in range(k):
        coeffs = {
            n: Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 5)))
            for n in names
        }
        const = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
        rel = ">=" if rng.random() < 0.8 else ">"
        ineqs.append(Inequality(LinearForm.from_terms(coeffs, const), rel, LinearForm()))
    return LinearSystem(tuple(ineqs), frozenset(names), frozenset())


def check_fme_soundness(rng, systems: int = 20, points: int = 10_000) -> None:
    """Sampled projection equality: a point satisfies the projected system
    iff some value of the eliminated variable satisfies the original."""
    for _ in range(systems):
        sys0 = random_rational_system(rng)
        var = "x0"
        projected = fme_eliminate(sys0, var, prune="syntactic")
        others = sorted(sys0.rate_vars - {var})
        pts = rng.uniform(-3.0, 3.0, size=(points, len(others)))

        # original system: rows as coefficient on var, rest, constant
        lo = np.full(points, -np.inf)
        hi = np.full(points, np.inf)
        ok_rest = np.ones(points, dtype=bool)
        for ineq in sys0.inequalities:
            expr = ineq.expr()
            c = float(expr.get(var))
            rest = np.full(points, float(expr.constant))
            for j, n in enumerate(others):
                rest += float(expr.get(n)) * pts[:, j]
            if c > 0:
                lo = np.maximum(lo, -rest / c)
            elif c < 0:
                hi = np.minimum(hi, -rest / c)
            else:
                ok_rest &= rest >= 0
        exists = ok_rest & (lo <= hi + 1e-12)

        member = np.ones(points, dtype=bool)
        for ineq in projected.inequalities:
            expr = ineq.expr()
            val = np.full(points, float(expr.constant))
            for j, n in enumerate(others):
                val += float(expr.get(n)) * pts[:, j]
            member &= val >= -1e-12
        borderline = np.abs(lo - hi) <= 1e-9
        disagreements = (member != exists) & ~borderline
        assert not disagreements.any(), f"{disagreements.sum()} projection mismatches"


def check_region_agreement(rng, t_values=(2, 3, 4), tuples: int = 1000, hx: float = 1.0) -> None:
    for t in t_values:
        acc_i = AccessStructure.individually(t)
        acc_f = AccessStructure.forehead(t)
        for _ in range(tuples):
            rt = RateTuple(float(rng.uniform(0, 1.4 * hx)), tuple(rng.uniform(0, 1.4 * hx, t)))
            assert region_equal_general(hx, acc_i, rt) == region_equal_indv(hx, t, rt)
            assert region_equal_general(hx, acc_f, rt) == region_equal_forehead(hx, t, rt)


def check_region_monotone(rng, cases: int = 200, hx: float = 1.0) -> None:
    """Componentwise-larger tuples stay inside every closed-form region."""
    for _ in range(cases):
        t = int(rng.integers(2, 5))
        rt = RateTuple(float(rng.uniform(0, 2.0)), tuple(rng.uniform(0, 2.0, t)))
        bigger = RateTuple(
            rt.r_common + float(rng.uniform(0, 1.0)),
            tuple(v + float(rng.uniform(0, 1.0)) for v in rt.r_shared),
        )
        for region in (
            lambda x: region_equal_indv(hx, t, x),
            lambda x: region_equal_forehead(hx, t, x),
            lambda x: region_equal_general(hx, AccessStructure.individually(t), x),
        ):
            if region(rt):
                assert region(bigger)
        if t == 2 and region_two_equal(hx, rt):
            assert region_two_equal(hx, bigger)

import json
from fractions import Fraction

import numpy as np
import pytest

import invariants
from coordrate.rate_regions import (
    AxisMismatchError,
    Inequality,
    LinearForm,
    LinearSystem,
    ach_two_pre_system,
    ach_two_region_system,
    canonical_inequality_set,
    entropy_bindings,
    evaluate_system,
    fme_eliminate,
    system_feasible,
    systems_equal,
)


def lf(terms=None, const=0):
    return LinearForm.from_terms(terms or {}, const)


def simple_system(ineqs, rate_vars, syms=()):
    return LinearSystem(tuple(ineqs), frozenset(rate_vars), frozenset(syms))


class TestLinearForm:
    def test_arithmetic_is_exact(self):
        a = lf({"x": Fraction(1, 3), "y": 1}, Fraction(1, 2))
        b = lf({"x": Fraction(2, 3)}, Fraction(-1, 2))
        s = a + b
        assert s.get("x") == 1
        assert s.constant == 0
        assert (s - s).coeffs == ()
        assert (a * Fraction(3)).get("x") == 1

    def test_zero_coefficients_dropped(self):
        a = lf({"x": 1, "y": 0})
        assert a.symbols() == {"x"}

    def test_evaluate_missing_symbol(self):
        with pytest.raises(AxisMismatchError):
            lf({"x": 1}).evaluate({})


class TestElimination:
    def test_trivial(self):
        sys0 = simple_system(
            [
                Inequality(lf({"y": 1}), ">=", lf(const=1)),
                Inequality(lf({"x": 1}), ">=", lf({"y": 1})),
            ],
            {"x", "y"},
        )
        out = fme_eliminate(sys0, "y")
        assert len(out.inequalities) == 1
        expr = out.inequalities[0].expr()
        assert expr.get("x") == 1 and expr.constant == -1

    def test_var_must_be_rate_variable(self):
        sys0 = simple_system([Inequality(lf({"x": 1}), ">=", lf())], {"x"})
        with pytest.raises(AxisMismatchError):
            fme_eliminate(sys0, "z")

    def test_strictness_propagates(self):
        sys0 = simple_system(
            [
                Inequality(lf({"y": 1}), ">", lf(const=1)),
                Inequality(lf({"x": 1}), ">=", lf({"y": 1})),
            ],
            {"x", "y"},
        )
        out = fme_eliminate(sys0, "y")
        assert out.inequalities[0].rel == ">"

    def test_two_processor_region_reproduced(self):
        pre = ach_two_pre_system()
        for prune in ("lp", "syntactic"):
            out = fme_eliminate(pre, "R0", prune=prune)
            assert len(out.inequalities) == 6
            assert systems_equal(out, ach_two_region_system())

    def test_lp_prune_drops_redundant_row(self):
        sys0 = simple_system(
            [
                Inequality(lf({"x": 1}), ">=", lf(const=2)),
                Inequality(lf({"x": 1}), ">=", lf(const=1)),  # implied
                Inequality(lf({"x": 1, "y": 1}), ">=", lf(const=1)),
                Inequality(lf({"z": 1}), ">=", lf()),
            ],
            {"x", "y", "z"},
        )
        out = fme_eliminate(sys0, "z", prune="lp")
        keys = canonical_inequality_set(out)
        assert len(keys) == 2  # the x>=1 row and the x-dominated x+y row go

    def test_feasibility(self):
        feasible = simple_system(
            [
                Inequality(lf({"x": 1}), ">=", lf(const=1)),
                Inequality(lf(const=3), ">=", lf({"x": 1})),
            ],
            {"x"},
        )
        infeasible = simple_system(
            [
                Inequality(lf({"x": 1}), ">=", lf(const=3)),
                Inequality(lf(const=1), ">=", lf({"x": 1})),
            ],
            {"x"},
        )
        assert system_feasible(feasible)
        assert not system_feasible(infeasible)


class TestCanonicalization:
    def test_scaled_duplicates_collapse(self):
        a = Inequality(lf({"x": 2, "y": -1}), ">=", lf(const=4))
        b = Inequality(lf({"x": 1, "y": Fraction(-1, 2)}), ">=", lf(const=2))
        sa = simple_system([a], {"x", "y"})
        sb = simple_system([b], {"x", "y"})
        assert systems_equal(sa, sb)

    def test_closure_maps_strict(self):
        a = simple_system([Inequality(lf({"x": 1}), ">", lf())], {"x"})
        b = simple_system([Inequality(lf({"x": 1}), ">=", lf())], {"x"})
        assert systems_equal(a, b)

    def test_json_roundtrip(self):
        pre = ach_two_pre_system()
        data = json.loads(json.dumps(pre.to_json_dict()))
        back = LinearSystem.from_json_dict(data)
        assert systems_equal(pre, back)
        assert back.rate_vars == pre.rate_vars

    def test_json_halves_survive(self):
        pre = ach_two_pre_system()
        back = LinearSystem.from_json_dict(pre.to_json_dict())
        out = fme_eliminate(back, "R0")
        assert systems_equal(out, ach_two_region_system())


class TestNumericEvaluation:
    def test_entropy_bindings_names(self):
        rng = np.random.default_rng(0)
        p = invariants.random_joint(rng, (2, 2, 2), names=("X", "Y", "U"))
        b = entropy_bindings(p)
        assert set(b) == {"H_X", "H_Y", "H_U", "H_XY", "H_XU", "H_YU", "H_XYU"}
        assert b["H_XYU"] <= 3.0 + 1e-9

    def test_evaluate_system(self):
        sys0 = simple_system(
            [Inequality(lf({"R": 1}), ">=", lf({"H_X": 1}))], {"R"}, {"H_X"}
        )
        assert evaluate_system(sys0, {"H_X": 1.0}, {"R": 1.0})
        assert not evaluate_system(sys0, {"H_X": 1.0}, {"R": 0.9})


class TestSoundness:
    def test_projection_sampling_oracle(self):
        invariants.check_fme_soundness(np.random.default_rng(6), systems=25, points=2000)

import numpy as np
import pytest

import invariants
from coordrate.dsbs_analytic import (
    DsbsParams,
    dsbs_joint,
    dsbs_wyner_ci,
    f_curve,
    f_curve_terms,
    interp_channel,
    load_reference_curve,
    sweep,
    t_star,
    wyner_channel,
)
from coordrate.info_core import DomainError, compose, conditional_mutual_information, mutual_information


class TestJoint:
    def test_uniform_independent_at_half(self):
        assert np.allclose(np.asarray(dsbs_joint(0.5).probs), 0.25)

    def test_deterministic_coupling_at_zero(self):
        assert np.allclose(np.asarray(dsbs_joint(0.0).probs), [[0.0, 0.5], [0.5, 0.0]])

    def test_mutual_information_02(self):
        assert mutual_information(dsbs_joint(0.2), "X", "Y") == pytest.approx(
            0.278071905112638, abs=1e-9
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            dsbs_joint(0.6)
        with pytest.raises(DomainError):
            dsbs_joint(-0.1)


class TestChannels:
    def test_uniform_at_t_one(self):
        assert np.allclose(np.asarray(interp_channel(0.2, 1.0).probs), 0.5)

    def test_conditional_independence(self):
        joint = compose(dsbs_joint(0.1), wyner_channel(0.1))
        assert conditional_mutual_information(joint, "X", "Y", "U") <= 1e-12

    def test_mismatched_cell_leak(self):
        # the rare matched-bit cells are uninformative; the common cells
        # leak with probability b^2 / (1-a)
        a = 0.1
        b = DsbsParams(a).b
        probs = np.asarray(wyner_channel(a).probs)
        assert probs[0, 0, 0] == pytest.approx(0.5, abs=1e-15)
        assert probs[1, 1, 1] == pytest.approx(0.5, abs=1e-15)
        assert probs[1, 0, 0] == pytest.approx(b**2 / (1 - a), abs=1e-12)
        assert probs[1, 0, 0] == pytest.approx(0.003096005, abs=1e-8)
        assert probs[0, 1, 1] == pytest.approx(b**2 / (1 - a), abs=1e-12)

    def test_exact_limits(self):
        assert np.isfinite(np.asarray(wyner_channel(0.0).probs)).all()
        assert np.allclose(np.asarray(wyner_channel(0.5).probs)[1, 0], [0.5, 0.5])

    def test_alpha_range(self):
        params = DsbsParams(0.2)
        for t in np.linspace(0, 1, 11):
            assert 0.0 <= params.alpha(float(t)) <= (1 - 0.2) / 2 + 1e-15


class TestCurve:
    def test_endpoint_values(self):
        assert f_curve(0.1, 0.0) == pytest.approx(0.436380283400076, abs=1e-9)
        assert f_curve(0.1, 1.0) == pytest.approx(0.531004406410719, abs=1e-9)
        assert f_curve(0.2, 1.0) == pytest.approx(0.278071905112638, abs=1e-9)

    def test_reference_rows(self):
        for a in (0.1, 0.2):
            ts, fs = load_reference_curve(a)
            assert len(ts) >= 50
            errs = [abs(f_curve(a, float(t)) - f) for t, f in zip(ts, fs)]
            assert max(errs) <= 1e-5

    def test_plot_minimum_row(self):
        # the sampled row nearest the crossing
        assert f_curve(0.1, 0.3436) == pytest.approx(0.300527573378146, abs=1e-9)
        assert f_curve(0.2, 0.5342) == pytest.approx(0.207682616998486, abs=1e-9)

    def test_t_star_values(self):
        assert t_star(0.1) == pytest.approx(0.343436, abs=1e-5)
        assert t_star(0.2) == pytest.approx(0.442523, abs=1e-5)

    def test_crossing_at_t_star(self):
        for a in (0.1, 0.2, 0.35):
            mi, cmi = f_curve_terms(a, t_star(a))
            assert abs(mi - cmi) <= 1e-8

    def test_value_at_t_star(self):
        # regression freeze; cross-validated by the tensor-path invariant
        assert f_curve(0.1, t_star(0.1)) == pytest.approx(0.30040773, abs=1e-6)

    def test_wyner_ci_values(self):
        assert dsbs_wyner_ci(0.1) == pytest.approx(0.872760566800152, abs=1e-9)
        assert dsbs_wyner_ci(0.5) == pytest.approx(0.0, abs=1e-12)
        assert dsbs_wyner_ci(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_sweep_rows(self):
        rows = sweep(0.1, np.array([0.0, 0.5, 1.0]))
        assert [r["t"] for r in rows] == [0.0, 0.5, 1.0]
        assert rows[0]["f"] == pytest.approx(0.436380283400076, abs=1e-9)
        for r in rows:
            assert r["f"] == pytest.approx(max(r["cmi_term"], 0.5 * (r["mi_term"] + r["cmi_term"])))

    def test_domain(self):
        with pytest.raises(DomainError):
            f_curve(0.0, 0.5)
        with pytest.raises(DomainError):
            t_star(0.5)
        with pytest.raises(DomainError):
            interp_channel(0.1, 1.5)


class TestInvariants:
    def test_closed_form_matches_tensor_path(self):
        invariants.check_dsbs_closed_vs_tensor()

    def test_strict_improvement(self):
        invariants.check_dsbs_strict_improvement()

    def test_endpoint_identities(self):
        invariants.check_dsbs_endpoints()

    def test_crossing_structure(self):
        invariants.check_dsbs_crossing_structure()

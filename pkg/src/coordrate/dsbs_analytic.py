"""Closed-form rate quantities for the doubly symmetric binary source.

DSBS(a) is the pair (X, Y) of uniform bits with joint matrix
[[a/2, (1-a)/2], [(1-a)/2, a/2]], a in [0, 0.5]. This module evaluates, in
closed form, the optimal conditional-independence-inducing auxiliary channel,
the interpolation family between it and the uninformative channel, the
transmission-rate curve f(t) along that family, and the crossing point t*
where the curve's two terms meet. Every closed form is cross-checked in the
test suite against the generic tensor path through :mod:`coordrate.info_core`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .info_core import Channel, DomainError, JointPMF, binary_entropy, inv_binary_entropy

__all__ = [
    "DsbsParams",
    "dsbs_joint",
    "wyner_channel",
    "interp_channel",
    "f_curve",
    "f_curve_terms",
    "t_star",
    "dsbs_wyner_ci",
    "sweep",
    "load_reference_curve",
]


def _check_a(a: float, *, open_interval: bool = False) -> None:
    if open_interval:
        if not 0.0 < a < 0.5:
            raise DomainError(f"parameter a must lie in (0, 0.5), got {a}")
    elif not 0.0 <= a <= 0.5:
        raise DomainError(f"parameter a must lie in [0, 0.5], got {a}")


def _check_t(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"interpolation parameter t must lie in [0, 1], got {t}")


@dataclass(frozen=True)
class DsbsParams:
    """Derived parameters of DSBS(a).

    ``b`` is the crossover of the two symmetric channels that split the pair
    through a common bit; ``alpha(t)`` is the off-diagonal conditional mass
    along the interpolation family.
    """

    a: float

    def __post_init__(self) -> None:
        _check_a(self.a)

    @property
    def b(self) -> float:
        return 0.5 * (1.0 - math.sqrt(1.0 - 2.0 * self.a))

    def alpha(self, t: float) -> float:
        _check_t(t)
        return (1.0 - t) * self.b**2 + 0.5 * t * (1.0 - self.a)


def dsbs_joint(a: float) -> JointPMF:
    """The 2x2 joint [[a/2, (1-a)/2], [(1-a)/2, a/2]] over axes X, Y."""
    _check_a(a)
    m = np.array([[a / 2, (1 - a) / 2], [(1 - a) / 2, a / 2]])
    return JointPMF.from_named(("X", "Y"), m)


def wyner_channel(a: float) -> Channel:
    """The binary auxiliary channel p(u|x,y) achieving X independent of Y given U.

    The matched-bit cells (x == y), which carry mass a/2 each, reveal nothing
    about U; the common cells are near-deterministic with leak b^2/(1-a).
    a = 0 and a = 0.5 are handled as exact limits (b = 0 and b = 0.5).
    """
    return interp_channel(a, 0.0)


def interp_channel(a: float, t: float) -> Channel:
    """Mixture t * uniform + (1-t) * wyner_channel(a), as p(u|x,y)."""
    _check_a(a)
    _check_t(t)
    params = DsbsParams(a)
    r = 0.0 if a == 0.0 else params.b**2 / (1.0 - a)
    star = np.empty((2, 2, 2))
    star[0, 0] = [0.5, 0.5]
    star[1, 1] = [0.5, 0.5]
    star[1, 0] = [r, 1.0 - r]
    star[0, 1] = [1.0 - r, r]
    probs = t * np.full((2, 2, 2), 0.5) + (1.0 - t) * star
    return Channel([("X", 2), ("Y", 2)], [("U", 2)], probs)


def _h4(values: np.ndarray) -> float:
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    return float(-(v * np.log2(v)).sum())


def f_curve_terms(a: float, t: float) -> tuple[float, float]:
    """(I(X,Y;U), I(X;Y|U)) under the interpolated channel, in closed form."""
    _check_a(a, open_interval=True)
    _check_t(t)
    al = DsbsParams(a).alpha(t)
    h_joint_given_u = _h4([al, a / 2, a / 2, 1 - a - al])
    mi = 1.0 + binary_entropy(a) - h_joint_given_u
    cmi = 2.0 * binary_entropy(al + a / 2) - h_joint_given_u
    return mi, cmi


def f_curve(a: float, t: float) -> float:
    """max{I(X;Y|U), (I(X,Y;U) + I(X;Y|U)) / 2} along the interpolation."""
    mi, cmi = f_curve_terms(a, t)
    return max(cmi, 0.5 * (mi + cmi))


def t_star(a: float) -> float:
    """Closed-form crossing point where I(X,Y;U) = I(X;Y|U).

    Uses the inverse binary entropy on the [0, 0.5] branch; the result
    satisfies |I(X,Y;U) - I(X;Y|U)| <= 1e-8 at t*.
    """
    _check_a(a, open_interval=True)
    params = DsbsParams(a)
    alpha_star = inv_binary_entropy(0.5 * (1.0 + binary_entropy(a))) - a / 2
    return (alpha_star - params.b**2) / ((1.0 - a) / 2 - params.b**2)


def dsbs_wyner_ci(a: float) -> float:
    """Common-information closed form 1 + h(a) - 2 h(b)."""
    _check_a(a)
    return 1.0 + binary_entropy(a) - 2.0 * binary_entropy(DsbsParams(a).b)


def sweep(a: float, t_values: np.ndarray) -> list[dict[str, float]]:
    """Rows {a, t, f, mi_term, cmi_term} for each t; plot-ready data."""
    rows = []
    for t in np.asarray(t_values, dtype=float):
        mi, cmi = f_curve_terms(a, float(t))
        rows.append(
            {
                "a": float(a),
                "t": float(t),
                "f": max(cmi, 0.5 * (mi + cmi)),
                "mi_term": mi,
                "cmi_term": cmi,
            }
        )
    return rows


def load_reference_curve(a: float) -> tuple[np.ndarray, np.ndarray]:
    """Bundled high-precision (t, f) reference rows for a in {0.1, 0.2}.

    Regression data for the curve evaluator; values are checked in at full
    double precision.
    """
    ts, fs = [], []
    with resources.files("coordrate").joinpath("_data/dsbs_reference_curves.csv").open() as fh:
        for row in csv.DictReader(fh):
            if abs(float(row["a"]) - a) < 1e-12:
                ts.append(float(row["t"]))
                fs.append(float(row["f"]))
    if not ts:
        raise DomainError(f"no bundled reference curve for a={a}; available: 0.1, 0.2")
    return np.asarray(ts), np.asarray(fs)

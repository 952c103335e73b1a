"""Min-max optimization over auxiliary channels p(u | x_1..x_t).

Computes the common-information quantities and optimal transmission rates
that drive the rate regions: the conditional-independence minimum
(``wyner_ci``), its relaxation under a leakage budget gamma
(``relaxed_wyner_ci``), the fixed point of that relaxation (``gamma_star``),
and the min-max transmission rates for two processors and for the
individually shared randomness model.

The problems are nonconvex, so every result is a certified upper bound: the
reported value is always the exact objective of the returned channel, and the
per-restart spread is exposed in the diagnostics. Independent grid
brute-force oracles (restricted to binary alphabets and |U| = 2) are provided
for cross-checking.

Implementation notes: probability simplices are parameterized through
row-softmax of unconstrained coordinates, gradients are finite differences
(step 1e-6), and the max of competing objective terms is smoothed with a
log-sum-exp sharpness schedule followed by an exact-max polishing stage.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .info_core import Alphabet, AxisMismatchError, Channel, JointPMF

__all__ = [
    "OptimizerConfig",
    "OptResult",
    "OptimizerError",
    "wyner_ci",
    "relaxed_wyner_ci",
    "gamma_star",
    "r_opt_two",
    "r_opt_indv",
    "minmax_equivalence_check",
    "MinmaxEquivalenceReport",
    "r_opt_objective",
    "wyner_grid_oracle",
    "channel_grid_oracle",
    "multistart_minimize",
]

FD_STEP = 1e-6
BETA_SCHEDULE = (10.0, 1e2, 1e3, 1e4)
PENALTY_SCHEDULE = (10.0, 1e2, 1e3, 1e4, 1e5, 1e6)
# constraint penalties finish stiff so the equilibrium residual clears the
# 1e-6 feasibility check even where the value-vs-constraint slope is steep;
# the stiff stages run with central differences
RELAXED_PENALTY_SCHEDULE = PENALTY_SCHEDULE + (1e7, 1e8)
# marginal-matching penalties start high: a weak early penalty lets the
# auxiliary collapse to a saturated simplex corner it cannot leave
MARGINAL_PENALTY_SCHEDULE = (1e3, 1e4, 1e5, 1e6)
_LOG_FLOOR = -8.0


class OptimizerError(RuntimeError):
    """Raised when an optimization cannot produce a usable certificate."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs shared by all optimizers.

    ``card_u`` defaults per problem to the relevant cardinality bound
    (|X||Y| + 2 for two processors, prod |X_i| + t for the individually
    shared model). ``grid_resolution`` only affects the oracles.
    """

    card_u: int | None = None
    restarts: int = 32
    max_iters: int = 300
    step_tol: float = 1e-9
    value_tol: float = 1e-9
    seed: int = 0
    grid_resolution: int | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.card_u is not None and self.card_u < 1:
            raise ValueError("card_u must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.step_tol <= 0 or self.value_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class RestartRecord:
    restart_index: int
    value: float
    iterations: int
    converged: bool
    feasible: bool = True


@dataclass
class OptResult:
    """Best value found, the channel certifying it, and run diagnostics."""

    value: float
    channel: Channel
    diagnostics: dict = field(default_factory=dict)

    @property
    def per_restart(self) -> list[RestartRecord]:
        return self.diagnostics.get("per_restart", [])

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "channel": self.channel.to_json_dict(),
            "per_restart": [r.value for r in self.per_restart],
            "converged": bool(self.diagnostics.get("converged", True)),
            "seed": self.diagnostics.get("seed"),
        }


# ---------------------------------------------------------------------------
# raw-array measure helpers (hot path; JointPMF wrappers stay at the API edge)


def _H(arr: np.ndarray) -> float:
    return float(-xlogy(arr, arr).sum() / math.log(2.0))


def _softmax_rows(theta: np.ndarray) -> np.ndarray:
    z = theta - theta.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _channel_terms(q: np.ndarray, chan: np.ndarray) -> tuple[float, float]:
    """(I(X_1..X_t; U), total_correlation(X_1;..;X_t | U)) for p(u|x)."""
    t = q.ndim
    joint = q[..., None] * chan
    h_joint = _H(joint)
    h_u = _H(joint.sum(axis=tuple(range(t))))
    h_q = _H(q)
    mi = h_q + h_u - h_joint
    tc = 0.0
    for i in range(t):
        keep = tuple(j for j in range(t) if j != i)
        h_xiu = _H(joint.sum(axis=keep))
        tc += h_xiu - h_u
    tc -= h_joint - h_u
    return mi, tc


def _decomp_tensors(p_u: np.ndarray, conds: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """(full joint p(u, x_1..x_t), induced p(x_1..x_t)) from a decomposition."""
    joint = p_u.copy()
    for c in conds:
        joint = joint[..., None] * c.reshape(c.shape[0], *([1] * (joint.ndim - 1)), c.shape[1])
    induced = joint.sum(axis=0)
    return joint, induced


# ---------------------------------------------------------------------------
# generic multistart engine


def multistart_minimize(
    smooth: Callable[[np.ndarray, float], float],
    finalize: Callable[[np.ndarray], tuple[float, bool]],
    n_params: int,
    cfg: OptimizerConfig,
    schedule: Sequence[float],
    exact: Callable[[np.ndarray], float] | None = None,
    extra_inits: Sequence[np.ndarray] = (),
) -> tuple[np.ndarray, list[RestartRecord]]:
    """Multi-start local minimization with a smoothing/penalty schedule.

    ``smooth(theta, s)`` is minimized for each schedule value ``s`` with warm
    starts; ``exact`` (if given) runs a final polishing stage on the
    unsmoothed objective. ``finalize(theta)`` maps a candidate to its exact
    reported value and a feasibility flag. Restart r uses an RNG seeded with
    seed XOR r; results are merged by (feasibility, value, restart_index) so
    the outcome is independent of scheduling.
    """

    def run_one(r: int) -> tuple[np.ndarray, RestartRecord]:
        rng = np.random.default_rng(np.uint64(cfg.seed) ^ np.uint64(r))
        if r < len(extra_inits):
            theta = np.asarray(extra_inits[r], dtype=float).copy()
        elif extra_inits and r < 4 * len(extra_inits):
            # perturbed copies of the informed starts at widening noise scales
            base = np.asarray(extra_inits[r % len(extra_inits)], dtype=float)
            sigma = 0.3 * (r // len(extra_inits))
            theta = base + rng.normal(0.0, sigma, size=n_params)
        else:
            theta = rng.normal(0.0, 1.2, size=n_params)
        iters = 0
        ok = True
        for j, s in enumerate(schedule):
            jac = "3-point" if j >= len(schedule) - 2 else None
            res = minimize(
                smooth,
                theta,
                args=(s,),
                method="L-BFGS-B",
                jac=jac,
                options={"maxiter": cfg.max_iters, "eps": FD_STEP, "ftol": cfg.value_tol, "gtol": cfg.step_tol},
            )
            theta = res.x
            iters += int(res.nit)
            ok = ok and (res.status in (0, 1, 2))
        if exact is not None:
            res = minimize(
                exact,
                theta,
                method="L-BFGS-B",
                jac="3-point",
                options={"maxiter": max(50, cfg.max_iters // 3), "eps": FD_STEP},
            )
            cand, cur = finalize(res.x), finalize(theta)
            if (not cand[1], cand[0]) <= (not cur[1], cur[0]):
                theta = res.x
            iters += int(res.nit)
        value, feasible = finalize(theta)
        return theta, RestartRecord(r, value, iters, ok, feasible)

    indices = list(range(cfg.restarts))
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(run_one, indices))
    else:
        outcomes = [run_one(r) for r in indices]

    records = [rec for _, rec in outcomes]
    ordered = sorted(outcomes, key=lambda o: (not o[1].feasible, o[1].value, o[1].restart_index))
    return ordered[0][0], records


def _output_axis_name(names: Sequence[str]) -> str:
    cand = "U"
    while cand in names:
        cand += "_"
    return cand


def _require_groups(q: JointPMF, t: int | None = None) -> np.ndarray:
    arr = np.asarray(q.probs)
    if arr.ndim < 2:
        raise AxisMismatchError("optimizer inputs need at least two output axes")
    if t is not None and arr.ndim != t:
        raise AxisMismatchError(f"expected a joint over {t} groups, got {arr.ndim} axes")
    return arr


def _default_card_two(q: np.ndarray) -> int:
    return q.shape[0] * q.shape[1] + 2


def _default_card_multi(q: np.ndarray) -> int:
    return int(np.prod(q.shape)) + q.ndim


# ---------------------------------------------------------------------------
# Wyner common information (decomposition parameterization)


def _copy_variable_inits(arr: np.ndarray, cu: int) -> list[np.ndarray]:
    """Deterministic exactly-feasible decompositions with U = X and U = Y.

    Logit encodings of p(u) = copied marginal, one-hot emission for the
    copied variable, true conditional for the other; these keep the penalty
    path on the feasible manifold and prevent degenerate collapse.
    """

    def encode(p_u: np.ndarray, p_x: np.ndarray, p_y: np.ndarray) -> np.ndarray:
        parts = [np.log(np.maximum(a, 1e-13)).ravel() for a in (p_u, p_x, p_y)]
        return np.concatenate(parts).clip(_LOG_FLOOR, None)

    inits = []
    nx, ny = arr.shape
    if cu >= nx:
        p_u = np.full(cu, 1e-13)
        p_u[:nx] = arr.sum(1)
        p_x = np.full((cu, nx), 1e-13)
        p_x[np.arange(nx), np.arange(nx)] = 1.0
        p_x[nx:] = 1.0 / nx
        p_y = np.full((cu, ny), 1.0 / ny)
        p_y[:nx] = arr / np.maximum(arr.sum(1, keepdims=True), 1e-300)
        inits.append(encode(p_u, p_x, p_y))
    if cu >= ny:
        p_u = np.full(cu, 1e-13)
        p_u[:ny] = arr.sum(0)
        p_y = np.full((cu, ny), 1e-13)
        p_y[np.arange(ny), np.arange(ny)] = 1.0
        p_y[ny:] = 1.0 / ny
        p_x = np.full((cu, nx), 1.0 / nx)
        p_x[:ny] = arr.T / np.maximum(arr.sum(0)[:, None], 1e-300)
        inits.append(encode(p_u, p_x, p_y))
    return inits


def wyner_ci(q: JointPMF, cfg: OptimizerConfig | None = None) -> OptResult:
    """min I(X,Y;U) over p(u), p(x|u), p(y|u) matching the target marginal.

    The conditional-independence structure holds by construction; marginal
    matching is enforced by a quadratic penalty schedule and reported in the
    diagnostics (``marginal_tv``, ``markov_residual``). The value is the
    exact I(X,Y;U) of the returned channel attached to the true joint, an
    upper bound on the common information up to the recorded residuals.
    """
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q, 2)
    nx, ny = arr.shape
    cu = cfg.card_u or _default_card_two(arr)
    sizes = [cu, cu * nx, cu * ny]
    splits = np.cumsum(sizes)[:-1]

    def build(theta: np.ndarray):
        t_u, t_x, t_y = np.split(theta, splits)
        p_u = _softmax_rows(t_u)
        p_x = _softmax_rows(t_x.reshape(cu, nx))
        p_y = _softmax_rows(t_y.reshape(cu, ny))
        return p_u, p_x, p_y

    def smooth(theta: np.ndarray, lam: float) -> float:
        p_u, p_x, p_y = build(theta)
        joint, induced = _decomp_tensors(p_u, [p_x, p_y])
        mi = _H(induced) + _H(p_u) - _H(joint)
        return mi + lam * float(((induced - arr) ** 2).sum())

    def to_channel(theta: np.ndarray) -> np.ndarray:
        p_u, p_x, p_y = build(theta)
        joint, induced = _decomp_tensors(p_u, [p_x, p_y])
        chan = np.moveaxis(joint, 0, -1) / np.maximum(induced[..., None], 1e-300)
        chan = np.clip(chan, 0.0, None)
        chan /= chan.sum(axis=-1, keepdims=True)
        return chan

    def finalize(theta: np.ndarray) -> tuple[float, bool]:
        mi, tc = _channel_terms(arr, to_channel(theta))
        return mi, tc <= 1e-6

    best_theta, records = multistart_minimize(
        smooth, finalize, sum(sizes), cfg, MARGINAL_PENALTY_SCHEDULE,
        exact=lambda th: smooth(th, MARGINAL_PENALTY_SCHEDULE[-1]),
        extra_inits=_copy_variable_inits(arr, cu),
    )
    chan_arr = to_channel(best_theta)
    mi, tc = _channel_terms(arr, chan_arr)
    p_u, p_x, p_y = build(best_theta)
    _, induced = _decomp_tensors(p_u, [p_x, p_y])
    channel = Channel(list(q.axes), [(_output_axis_name(q.names), Alphabet(cu))], chan_arr)
    h_q = _H(arr)
    mi_xy = _H(arr.sum(1)) + _H(arr.sum(0)) - h_q
    converged = tc <= 1e-6
    return OptResult(
        value=mi,
        channel=channel,
        diagnostics={
            "per_restart": records,
            "converged": converged,
            "marginal_tv": float(np.abs(induced - arr).sum()),
            "markov_residual": tc,
            "lower_bound": mi_xy,
            "upper_bound": h_q,
            "seed": cfg.seed,
        },
    )


def _copy_channel_inits(arr: np.ndarray, cu: int) -> list[np.ndarray]:
    """Feasible channel starts p(u|x,y) = one-hot on x (or on y)."""
    inits = []
    nx, ny = arr.shape
    for axis, size in ((0, nx), (1, ny)):
        if cu < size:
            continue
        theta = np.full((nx, ny, cu), _LOG_FLOOR)
        idx = np.arange(nx)[:, None] if axis == 0 else np.arange(ny)[None, :]
        np.put_along_axis(theta, np.broadcast_to(idx, (nx, ny))[..., None], 0.0, axis=2)
        inits.append(theta.ravel())
    return inits


# ---------------------------------------------------------------------------
# relaxed common information and its fixed point


def relaxed_wyner_ci(
    q: JointPMF,
    gamma: float,
    cfg: OptimizerConfig | None = None,
    extra_inits: Sequence[np.ndarray] = (),
) -> OptResult:
    """min I(X,Y;U) over p(u|x,y) subject to I(X;Y|U) <= gamma.

    The constraint is enforced by an augmented quadratic penalty with a final
    feasibility check I(X;Y|U) <= gamma + 1e-6; an infeasible best restart is
    flagged in the diagnostics, never silently reported.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q, 2)
    cu = cfg.card_u or _default_card_two(arr)
    n_params = arr.size * cu

    def build(theta: np.ndarray) -> np.ndarray:
        return _softmax_rows(theta.reshape(*arr.shape, cu))

    def smooth(theta: np.ndarray, lam: float) -> float:
        mi, cmi = _channel_terms(arr, build(theta))
        return mi + lam * max(0.0, cmi - gamma) ** 2

    def finalize(theta: np.ndarray) -> tuple[float, bool]:
        mi, cmi = _channel_terms(arr, build(theta))
        return mi, cmi <= gamma + 1e-6

    inits = list(extra_inits) + _copy_channel_inits(arr, cu)
    best_theta, records = multistart_minimize(
        smooth, finalize, n_params, cfg, RELAXED_PENALTY_SCHEDULE,
        exact=lambda th: smooth(th, RELAXED_PENALTY_SCHEDULE[-1]),
        extra_inits=inits,
    )
    mi, cmi = _channel_terms(arr, build(best_theta))
    if gamma + 1e-6 < cmi <= gamma + 1e-3:
        # feasibility polish: short descent rounds on the constraint alone,
        # stopping at first feasibility; the value moves by at most
        # (local slope) * residual, well under reporting tolerance
        def cmi_only(th: np.ndarray) -> float:
            return _channel_terms(arr, build(th))[1]

        cand = best_theta
        for _ in range(30):
            if cmi_only(cand) <= gamma + 7e-7:
                break
            step = minimize(
                cmi_only, cand, method="L-BFGS-B", jac="3-point",
                options={"maxiter": 2, "eps": FD_STEP},
            )
            if not np.all(np.isfinite(step.x)):
                break
            cand = step.x
        cand_mi, cand_cmi = _channel_terms(arr, build(cand))
        if cand_cmi <= gamma + 1e-6 and cand_mi <= mi + 1e-3:
            best_theta = cand
    chan_arr = build(best_theta)
    mi, cmi = _channel_terms(arr, chan_arr)
    channel = Channel(list(q.axes), [(_output_axis_name(q.names), Alphabet(cu))], chan_arr)
    return OptResult(
        value=mi,
        channel=channel,
        diagnostics={
            "per_restart": records,
            "converged": cmi <= gamma + 1e-6,
            "constraint_value": cmi,
            "gamma": gamma,
            "best_theta": best_theta,
            "lower_bound": 0.0,
            "upper_bound": _H(arr),
            "seed": cfg.seed,
        },
    )


def gamma_star(q: JointPMF, cfg: OptimizerConfig | None = None) -> tuple[float, OptResult]:
    """Fixed point of gamma -> relaxed_wyner_ci(q, gamma).

    Bisection on the nonincreasing map gamma -> C_gamma - gamma over
    [0, I(X;Y)], warm-starting each evaluation with the previously best
    channels; terminates when |C_gamma - gamma| <= 1e-4 or the bracket is
    exhausted.
    """
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q, 2)
    mi_xy = _H(arr.sum(1)) + _H(arr.sum(0)) - _H(arr)
    if mi_xy <= 1e-12:
        res = relaxed_wyner_ci(q, 0.0, cfg)
        return 0.0, res

    inner = replace(cfg, restarts=max(4, cfg.restarts // 4))
    warm: list[np.ndarray] = []

    def c_gamma(g: float) -> OptResult:
        res = relaxed_wyner_ci(q, g, inner, extra_inits=warm)
        th = res.diagnostics.get("best_theta")
        if th is not None:
            warm.insert(0, th)
            del warm[2:]
        return res

    lo, hi = 0.0, mi_xy
    res_lo = c_gamma(lo)
    if res_lo.value - lo <= 0:
        return lo, res_lo
    g, res = lo, res_lo
    for _ in range(60):
        g = 0.5 * (lo + hi)
        res = c_gamma(g)
        diff = res.value - g
        if abs(diff) <= 1e-4 or (hi - lo) < 1e-6:
            break
        if diff > 0:
            lo = g
        else:
            hi = g
    final = relaxed_wyner_ci(q, g, cfg, extra_inits=warm)
    if final.value <= res.value:
        res = final
    res.diagnostics["fixed_point_residual"] = res.value - g
    return g, res


# ---------------------------------------------------------------------------
# optimal transmission rates


def _minmax_over_channels(
    q: JointPMF,
    terms: Callable[[float, float], tuple[float, ...]],
    cfg: OptimizerConfig,
    cu: int,
) -> tuple[np.ndarray, list[RestartRecord], np.ndarray]:
    """Minimize max(terms(mi, tc)) over channels p(u | x_1..x_t)."""
    arr = np.asarray(q.probs)
    n_params = arr.size * cu

    def build(theta: np.ndarray) -> np.ndarray:
        return _softmax_rows(theta.reshape(*arr.shape, cu))

    def smooth(theta: np.ndarray, beta: float) -> float:
        mi, tc = _channel_terms(arr, build(theta))
        vals = np.asarray(terms(mi, tc))
        return float(np.logaddexp.reduce(beta * vals) / beta)

    def exact(theta: np.ndarray) -> float:
        mi, tc = _channel_terms(arr, build(theta))
        return max(terms(mi, tc))

    def finalize(theta: np.ndarray) -> tuple[float, bool]:
        return exact(theta), True

    best_theta, records = multistart_minimize(
        smooth, finalize, n_params, cfg, BETA_SCHEDULE, exact=exact
    )
    return best_theta, records, build(best_theta)


def r_opt_indv(q: JointPMF, cfg: OptimizerConfig | None = None) -> OptResult:
    """Optimal transmission rate for the individually shared randomness model.

    min over p(u | x_1..x_t) of max{total_correlation(X_1;..;X_t | U),
    I(X_1..X_t; U)}; for t = 2 this is exactly the two-processor rate.
    """
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q)
    cu = cfg.card_u or _default_card_multi(arr)
    _, records, chan_arr = _minmax_over_channels(q, lambda mi, tc: (tc, mi), cfg, cu)
    mi, tc = _channel_terms(arr, chan_arr)
    lower = 0.0
    if arr.ndim == 2:
        lower = 0.5 * (_H(arr.sum(1)) + _H(arr.sum(0)) - _H(arr))
    channel = Channel(list(q.axes), [(_output_axis_name(q.names), Alphabet(cu))], chan_arr)
    return OptResult(
        value=max(tc, mi),
        channel=channel,
        diagnostics={
            "per_restart": records,
            "converged": True,
            "mi_term": mi,
            "dependence_term": tc,
            "alternate_objective": max(tc, 0.5 * (mi + tc)),
            "lower_bound": lower,
            "upper_bound": _H(arr),
            "seed": cfg.seed,
        },
    )


def r_opt_two(q: JointPMF, cfg: OptimizerConfig | None = None) -> OptResult:
    """Two-processor optimal transmission rate under unlimited shared randomness.

    min over p(u|x,y) of max{I(X;Y|U), I(X,Y;U)}; the diagnostics expose the
    alternate objective max{I(X;Y|U), (I(X,Y;U) + I(X;Y|U)) / 2} at the
    returned channel, plus the sandwich bounds 0.5 I(X;Y) <= value <= I(X;Y).
    """
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q, 2)
    if cfg.card_u is None:
        cfg = replace(cfg, card_u=_default_card_two(arr))
    res = r_opt_indv(q, cfg)
    mi_xy = _H(arr.sum(1)) + _H(arr.sum(0)) - _H(arr)
    res.diagnostics["lower_bound"] = 0.5 * mi_xy
    res.diagnostics["upper_bound"] = mi_xy
    return res


def r_opt_objective(q: JointPMF, channel: Channel) -> float:
    """Exact max{I(X;Y|U), I(X,Y;U)} of a given channel; feasible-point value."""
    arr = np.asarray(q.probs)
    chan = np.asarray(channel.probs).reshape(*arr.shape, -1)
    mi, tc = _channel_terms(arr, chan)
    return max(tc, mi)


@dataclass
class MinmaxEquivalenceReport:
    value_minmax: float
    value_halfsum: float
    result_minmax: OptResult
    result_halfsum: OptResult

    @property
    def difference(self) -> float:
        return abs(self.value_minmax - self.value_halfsum)


def minmax_equivalence_check(q: JointPMF, cfg: OptimizerConfig | None = None) -> MinmaxEquivalenceReport:
    """Optimize both equivalent min-max objectives independently.

    Objective A is max{I(X;Y|U), I(X,Y;U)}; objective B replaces the second
    term with the half sum. Their optima coincide in theory; the report
    carries the observed difference.
    """
    cfg = cfg or OptimizerConfig()
    arr = _require_groups(q, 2)
    cu = cfg.card_u or _default_card_two(arr)

    _, rec_a, chan_a = _minmax_over_channels(q, lambda mi, tc: (tc, mi), cfg, cu)
    _, rec_b, chan_b = _minmax_over_channels(q, lambda mi, tc: (tc, 0.5 * (mi + tc)), cfg, cu)

    out_name = _output_axis_name(q.names)
    mi_a, tc_a = _channel_terms(arr, chan_a)
    mi_b, tc_b = _channel_terms(arr, chan_b)
    res_a = OptResult(
        max(tc_a, mi_a),
        Channel(list(q.axes), [(out_name, Alphabet(cu))], chan_a),
        {"per_restart": rec_a, "converged": True, "seed": cfg.seed},
    )
    res_b = OptResult(
        max(tc_b, 0.5 * (mi_b + tc_b)),
        Channel(list(q.axes), [(out_name, Alphabet(cu))], chan_b),
        {"per_restart": rec_b, "converged": True, "seed": cfg.seed},
    )
    return MinmaxEquivalenceReport(res_a.value, res_b.value, res_a, res_b)


# ---------------------------------------------------------------------------
# grid brute-force oracles (binary alphabets, |U| = 2)


def _check_binary_2x2(arr: np.ndarray) -> None:
    if arr.shape != (2, 2):
        raise AxisMismatchError(f"grid oracle needs a 2x2 joint, got shape {arr.shape}")


def wyner_grid_oracle(q: JointPMF, resolution: int = 2049) -> float:
    """Exhaustive grid over binary-U decompositions p(u), p(x|u), p(y|u).

    Marginal matching is imposed exactly: with w = p(u=0) and a0 = p(x=0|u=0)
    on a grid, the remaining decomposition entries are solved from the target
    marginals and the (0,0) cell, so every evaluated point reproduces q
    exactly. Independent of the descent path used by :func:`wyner_ci`.
    """
    arr = _require_groups(q, 2)
    _check_binary_2x2(arr)
    if resolution < 64:
        raise ValueError("grid resolution must be >= 64")
    qx0 = float(arr[0].sum())
    qy0 = float(arr[:, 0].sum())
    q00 = float(arr[0, 0])
    prod_gap = float(np.abs(arr - np.outer(arr.sum(1), arr.sum(0))).sum())
    if prod_gap <= 1e-12:
        return 0.0

    w = np.linspace(0.0, 1.0, resolution)[1:-1][:, None]
    a0 = np.linspace(0.0, 1.0, resolution)[None, :]
    a1 = (qx0 - w * a0) / (1.0 - w)
    denom = w * (a0 - a1)
    with np.errstate(divide="ignore", invalid="ignore"):
        b0 = (q00 - a1 * qy0) / denom
        b1 = (qy0 - w * b0) / (1.0 - w)
    valid = (
        (a1 >= -1e-12) & (a1 <= 1 + 1e-12)
        & np.isfinite(b0) & (b0 >= -1e-12) & (b0 <= 1 + 1e-12)
        & np.isfinite(b1) & (b1 >= -1e-12) & (b1 <= 1 + 1e-12)
        & (np.abs(denom) > 1e-14)
    )
    if not valid.any():
        return float("inf")

    def ent(p):
        return -(xlogy(p, p) + xlogy(1 - p, 1 - p)) / math.log(2.0)

    ww = np.broadcast_to(w, valid.shape)
    # conditional independence given U makes H(XY|U) = H(X|U) + H(Y|U)
    h_x_u = ww * ent(a0) + (1 - ww) * ent(a1)
    h_y_u = ww * ent(b0) + (1 - ww) * ent(b1)
    mi = _H(arr) - h_x_u - h_y_u
    mi = np.where(valid, mi, np.inf)
    return float(mi.min())


def _batched_channel_measures(q: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (mi, cmi) for a batch of binary-U channels on a 2x2 joint.

    ``cand`` has shape (B, 4) holding p(u=0 | x, y) per cell (row-major).
    """
    c = cand.reshape(-1, 2, 2)
    joint = np.stack([q[None] * c, q[None] * (1.0 - c)], axis=-1)  # (B,2,2,2)

    def ent(a, axes):
        return -xlogy(a, a).sum(axis=axes) / math.log(2.0)

    h_joint = ent(joint, (1, 2, 3))
    h_u = ent(joint.sum(axis=(1, 2)), (1,))
    h_xu = ent(joint.sum(axis=2), (1, 2))
    h_yu = ent(joint.sum(axis=1), (1, 2))
    h_q = _H(q)
    mi = h_q + h_u - h_joint
    cmi = h_xu + h_yu - h_joint - h_u
    return mi, cmi


def channel_grid_oracle(
    q: JointPMF,
    objective: str = "minmax",
    gamma: float | None = None,
    hx: float | None = None,
    resolution: int = 4096,
    base: int = 17,
    top_k: int = 300,
) -> float:
    """Multilevel exhaustive grid over binary-U channels p(u | x, y).

    Objectives: ``minmax`` is max{I(X;Y|U), I(X,Y;U)}; ``halfsum`` replaces
    the second term with the half sum; ``relaxed`` is I(X,Y;U) restricted to
    I(X;Y|U) <= gamma; ``correlated`` is max_i I(U; S_other | S_i) plus the
    top-up max(0, hx - I(U; S_1 S_2)). A coarse full grid (base points per
    axis) is refined around the best cells, halving the step until the
    effective per-axis resolution reaches ``resolution``; every evaluated
    point is exact, so the returned minimum is a certified upper bound on the
    true optimum over the |U| = 2 family.
    """
    arr = _require_groups(q, 2)
    _check_binary_2x2(arr)
    if resolution < 64:
        raise ValueError("grid resolution must be >= 64")
    if objective == "relaxed" and gamma is None:
        raise ValueError("relaxed objective needs gamma")
    if objective == "correlated" and hx is None:
        raise ValueError("correlated objective needs hx")

    def score_and_value(cand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if objective == "correlated":
            mi, _ = _batched_channel_measures(arr, cand)
            c = cand.reshape(-1, 2, 2)
            joint = np.stack([arr[None] * c, arr[None] * (1.0 - c)], axis=-1)

            def ent(a, axes):
                return -xlogy(a, a).sum(axis=axes) / math.log(2.0)

            h_joint = ent(joint, (1, 2, 3))
            h_s1u = ent(joint.sum(axis=2), (1, 2))
            h_s2u = ent(joint.sum(axis=1), (1, 2))
            h_s1 = _H(arr.sum(1))
            h_s2 = _H(arr.sum(0))
            cmi_1 = h_s1u + _H(arr) - h_joint - h_s1   # I(U; S2 | S1)
            cmi_2 = h_s2u + _H(arr) - h_joint - h_s2   # I(U; S1 | S2)
            val = np.maximum(cmi_1, cmi_2) + np.maximum(0.0, hx - mi)
            return val, val
        mi, cmi = _batched_channel_measures(arr, cand)
        if objective == "minmax":
            v = np.maximum(cmi, mi)
            return v, v
        if objective == "halfsum":
            v = np.maximum(cmi, 0.5 * (mi + cmi))
            return v, v
        if objective == "relaxed":
            feas = cmi <= gamma + 1e-9
            value = np.where(feas, mi, np.inf)
            score = mi + 50.0 * np.maximum(0.0, cmi - gamma)
            return score, value
        raise ValueError(f"unknown objective {objective!r}")

    axis = np.linspace(0.0, 1.0, base)
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    step = 1.0 / (base - 1)
    best = np.inf
    offsets = np.stack(np.meshgrid(*([np.array([-1.0, 0.0, 1.0])] * 4), indexing="ij"), axis=-1).reshape(-1, 4)
    points = grid
    while True:
        scores, values = score_and_value(points)
        best = min(best, float(values.min()))
        if (1.0 / step) >= resolution:
            break
        keep = points[np.argsort(scores)[:top_k]]
        step *= 0.5
        points = np.clip((keep[:, None, :] + offsets[None, :, :] * step).reshape(-1, 4), 0.0, 1.0)
    return best

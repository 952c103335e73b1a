"""Finite-blocklength, exact-distribution simulation of the coding schemes.

For a fixed sampled codebook the induced n-letter output distribution is
computed exactly by enumerating the shared-randomness indices (never by Monte
Carlo), so the reported total-variation distance is exact for that codebook
realization. Index-set sizes are ceil(2^(n R)), keeping achievability-side
semantics. Resource guards bound the enumeration.

Schemes: the XOR conversion of two shared strings into common randomness;
codeword-averaged output synthesis driven by a common index (soft covering);
the hybrid binned scheme whose coordinator picks an index inside a
shared-randomness-selected bin; and the nested-codebook scheme for the
oblivious coordinator. Processor outputs pass through the per-letter output
channels of the auxiliary decomposition given the selected codeword; the
conditional codebooks steer the coordinator's selection.

Randomness: each codebook component draws from its own generator seeded by
(master seed, component tag), so adding a book never perturbs another book's
draw. Identical (config, seed) pairs give bit-identical reports.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import product as iproduct
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .info_core import JointPMF, PMFValidationError
from .rate_regions import AccessStructure

__all__ = [
    "ResourceGuardError",
    "CodebookInstance",
    "SimReport",
    "XorResult",
    "xor_scheme",
    "wyner_synthesis_sim",
    "binned_scheme_sim",
    "ObliviousFamily",
    "oblivious_sim",
    "trend_report",
    "TrendReport",
]

CELL_LIMIT = 2**24
TUPLE_LIMIT = 2**20

_U_BOOK, _X_BOOK, _Y_BOOK = 1, 2, 3
_UI_BOOK_BASE = 10


class ResourceGuardError(RuntimeError):
    """Requested enumeration exceeds the desk-scale resource guards."""


@dataclass(frozen=True)
class CodebookInstance:
    """Seeded realization of the random codebooks of one scheme."""

    scheme: str
    n: int
    rates: dict[str, float]
    sizes: dict[str, int]
    codewords: dict[str, np.ndarray]
    seed: int


@dataclass
class SimReport:
    """Exact induced-vs-target L1 distance for one codebook realization."""

    scheme: str
    n: int
    rates: dict[str, float]
    tv: float
    codebook_seed: int
    per_f_tv: list[float] | None = None

    def __post_init__(self):
        if not 0.0 <= self.tv <= 2.0 + 1e-12:
            raise ValueError(f"tv out of range: {self.tv}")


class XorResult(NamedTuple):
    recovered_at_p1: tuple[str, str]
    recovered_at_p2: tuple[str, str]
    message: str


def xor_scheme(w1: str, w2: str) -> XorResult:
    """Bitwise-XOR conversion of two shared strings into common randomness.

    The coordinator broadcasts w1 XOR w2; each processor XORs its own string
    back in, so both recover the full pair: one message bit yields two common
    bits.
    """
    if len(w1) != len(w2):
        raise ValueError(f"length mismatch: {len(w1)} vs {len(w2)}")
    for s in (w1, w2):
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {s!r}")

    def xor(a: str, b: str) -> str:
        return "".join("1" if x != y else "0" for x, y in zip(a, b))

    message = xor(w1, w2)
    return XorResult((w1, xor(message, w1)), (xor(message, w2), w2), message)


# ---------------------------------------------------------------------------
# sampling and exact-tensor helpers


def _index_size(n: int, rate: float) -> int:
    if rate < 0:
        raise ValueError("rates must be non-negative")
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


def _book_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(tag))))


def _sample_iid(rng: np.random.Generator, p: np.ndarray, shape) -> np.ndarray:
    cum = np.cumsum(p)
    return np.searchsorted(cum, rng.random(shape), side="right").clip(0, len(p) - 1)


def _sample_conditional(rng: np.random.Generator, table: np.ndarray, cond: np.ndarray) -> np.ndarray:
    cum = np.cumsum(table, axis=1)
    r = rng.random(cond.shape)
    return (r[..., None] > cum[cond]).sum(axis=-1).clip(0, table.shape[1] - 1)


def _check_decomp(decomp) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p_u, p_x_u, p_y_u = (np.asarray(a, dtype=float) for a in decomp)
    for a, label in ((p_u, "p_u"), (p_x_u, "p_x_u"), (p_y_u, "p_y_u")):
        if np.any(a < 0):
            raise PMFValidationError(f"{label} has negative entries")
    if abs(p_u.sum() - 1) > 1e-9 or np.any(np.abs(p_x_u.sum(1) - 1) > 1e-9) or np.any(np.abs(p_y_u.sum(1) - 1) > 1e-9):
        raise PMFValidationError("decomposition rows must be pmfs")
    if not (len(p_u) == p_x_u.shape[0] == p_y_u.shape[0]):
        raise PMFValidationError("decomposition cardinalities disagree")
    return p_u, p_x_u, p_y_u


def _guard_cells(per_letter: int, n: int) -> int:
    cells = per_letter**n
    if cells > CELL_LIMIT:
        raise ResourceGuardError(f"{per_letter}^{n} = {cells} cells exceeds the {CELL_LIMIT} guard")
    return cells


def _target_tensor(per_letter_flat: np.ndarray, n: int) -> np.ndarray:
    out = np.array([1.0])
    for _ in range(n):
        out = (out[:, None] * per_letter_flat[None, :]).ravel()
    return out


def _check_mass(induced: np.ndarray, scheme: str) -> None:
    total = float(induced.sum())
    if abs(total - 1.0) > 1e-9:
        raise PMFValidationError(f"{scheme} induced distribution sums to {total}, mass lost")


def _codeword_average(book: np.ndarray, w_rows: np.ndarray, cells: int) -> np.ndarray:
    """Mean over codewords of the position-product output tensors.

    ``book`` is (M, n) integer codewords; ``w_rows[u]`` is the flattened
    per-letter output distribution given symbol u. Exact, deterministic
    accumulation in sorted-unique order.
    """
    rows, counts = np.unique(book, axis=0, return_counts=True)
    induced = np.zeros(cells)
    for row, cnt in zip(rows, counts):
        t = np.array([1.0])
        for k in range(book.shape[1]):
            t = (t[:, None] * w_rows[row[k]][None, :]).ravel()
        induced += t * (float(cnt) / book.shape[0])
    return induced


def wyner_synthesis_sim(
    q: JointPMF,
    decomp,
    n: int,
    rate: float,
    seed: int,
    target_from_decomposition: bool = False,
) -> SimReport:
    """Soft-covering synthesis: average the output channels over a sampled book.

    Draws M = ceil(2^(n rate)) codewords iid from p_u and computes exactly
    induced(x^n, y^n) = (1/M) sum_m prod_k p(x_k|u_k(m)) p(y_k|u_k(m)),
    reporting its L1 distance to the n-fold product target. The decomposition
    must reproduce the target pair marginal within 1e-6 unless the caller
    opts into the decomposition's own induced target.
    """
    p_u, p_x_u, p_y_u = _check_decomp(decomp)
    nx, ny = p_x_u.shape[1], p_y_u.shape[1]
    q_arr = np.asarray(q.probs)
    if q_arr.shape != (nx, ny):
        raise PMFValidationError(f"target shape {q_arr.shape} vs decomposition ({nx},{ny})")
    induced_pair = np.einsum("u,ux,uy->xy", p_u, p_x_u, p_y_u)
    if target_from_decomposition:
        target_pair = induced_pair
    else:
        gap = float(np.abs(induced_pair - q_arr).sum())
        if gap > 1e-6:
            raise PMFValidationError(f"decomposition marginal misses target by TV {gap}")
        target_pair = q_arr
    cells = _guard_cells(nx * ny, n)
    m = _index_size(n, rate)
    book = _sample_iid(_book_rng(seed, _U_BOOK), p_u, (m, n))
    w_rows = np.einsum("ux,uy->uxy", p_x_u, p_y_u).reshape(len(p_u), nx * ny)
    induced = _codeword_average(book, w_rows, cells)
    _check_mass(induced, "wyner")
    tv = float(np.abs(induced - _target_tensor(target_pair.ravel(), n)).sum())
    return SimReport("wyner", n, {"R": float(rate)}, tv, seed)


# ---------------------------------------------------------------------------
# binned hybrid scheme


def build_binned_codebooks(decomp, n: int, rates, seed: int) -> CodebookInstance:
    """Sample the binned book u(m0, m*) and the conditional selection books."""
    p_u, p_x_u, p_y_u = _check_decomp(decomp)
    r0, rstar, rt1, rt2 = (float(r) for r in rates)
    m0 = _index_size(n, r0)
    ms = _index_size(n, rstar)
    b1 = _index_size(n, rt1)
    b2 = _index_size(n, rt2)
    if m0 * ms * b1 * b2 > TUPLE_LIMIT:
        raise ResourceGuardError(
            f"index tuple count {m0 * ms * b1 * b2} exceeds the {TUPLE_LIMIT} guard"
        )
    u_book = _sample_iid(_book_rng(seed, _U_BOOK), p_u, (m0 * ms, n)).reshape(m0, ms, n)
    x_book = _sample_conditional(
        _book_rng(seed, _X_BOOK), p_x_u, np.broadcast_to(u_book[:, :, None, :], (m0, ms, b1, n))
    )
    y_book = _sample_conditional(
        _book_rng(seed, _Y_BOOK), p_y_u, np.broadcast_to(u_book[:, :, None, :], (m0, ms, b2, n))
    )
    return CodebookInstance(
        scheme="binned",
        n=n,
        rates={"R0": r0, "Rstar": rstar, "Rtilde1": rt1, "Rtilde2": rt2},
        sizes={"M0": m0, "Mstar": ms, "B1": b1, "B2": b2},
        codewords={"u": u_book, "x": x_book, "y": y_book},
        seed=seed,
    )


def _typicality_selection(books: CodebookInstance, p_joint: np.ndarray, eps: float) -> np.ndarray:
    """First epsilon-typical in-bin index per (m0, b1, b2); fallback index 0."""
    if not 0 < eps < 1:
        raise ValueError(f"typicality parameter must be in (0,1), got {eps}")
    u, x, y = books.codewords["u"], books.codewords["x"], books.codewords["y"]
    m0, ms, n = u.shape
    b1 = x.shape[2]
    b2 = y.shape[2]
    cu, nx, ny = p_joint.shape
    ncells = cu * nx * ny
    flat_p = p_joint.ravel()
    lo = books.n * flat_p * (1 - eps)
    hi = books.n * flat_p * (1 + eps)
    sel = np.empty((m0, b1, b2), dtype=int)
    for i0 in range(m0):
        ids = (
            u[i0][:, None, None, :] * (nx * ny)
            + x[i0][:, :, None, :] * ny
            + y[i0][:, None, :, :]
        )  # (ms, b1, b2, n)
        base = np.arange(ms * b1 * b2) * ncells
        counts = np.bincount(
            (ids.reshape(-1, n) + base[:, None]).ravel(), minlength=ms * b1 * b2 * ncells
        ).reshape(ms, b1, b2, ncells)
        typical = ((counts >= lo - 1e-12) & (counts <= hi + 1e-12)).all(axis=-1)
        sel[i0] = np.argmax(typical, axis=0)  # all-False rows give fallback 0
    return sel


def _likelihood_weights(books: CodebookInstance, p_joint: np.ndarray) -> np.ndarray:
    """Selection probabilities (m0, ms, b1, b2) proportional to triple likelihood."""
    u, x, y = books.codewords["u"], books.codewords["x"], books.codewords["y"]
    m0, ms, n = u.shape
    cu, nx, ny = p_joint.shape
    with np.errstate(divide="ignore"):
        logp = np.log(p_joint.ravel())
    ids = (
        u[:, :, None, None, :] * (nx * ny)
        + x[:, :, :, None, :] * ny
        + y[:, :, None, :, :]
    )  # (m0, ms, b1, b2, n)
    loglik = logp[ids].sum(axis=-1)
    peak = loglik.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        z = np.exp(loglik - peak)
    z[~np.isfinite(z)] = 0.0
    z = np.where(np.broadcast_to(~np.isfinite(peak), z.shape), 1.0, z)
    return z / z.sum(axis=1, keepdims=True)


def binned_scheme_sim(
    q: JointPMF,
    aux,
    n: int,
    rates,
    seed: int,
    encoder: str = "typicality",
    eps: float = 0.1,
    target_from_decomposition: bool = False,
) -> SimReport:
    """Hybrid scheme: shared randomness picks (m0, b1, b2), the coordinator
    picks m* inside bin m0, processors emit through their output channels.

    ``rates`` is (R0, R*, Rtilde1, Rtilde2); the effective common message
    rate R0/2 + R* is recorded in the report. Encoders: ``typicality``
    (epsilon-joint-typicality of the codeword triple, smallest index first,
    fallback to the first index), ``likelihood`` (selection probability
    proportional to the triple likelihood, averaged exactly), and
    ``uniform`` (selection ignores the books; the scheme then reduces to
    plain soft covering over the whole book). per_f_tv lists the conditional
    distances given each bin index m0.
    """
    p_u, p_x_u, p_y_u = _check_decomp(aux)
    nx, ny = p_x_u.shape[1], p_y_u.shape[1]
    q_arr = np.asarray(q.probs)
    induced_pair = np.einsum("u,ux,uy->xy", p_u, p_x_u, p_y_u)
    if target_from_decomposition:
        target_pair = induced_pair
    else:
        # the in-bin selection supplies the X-Y dependence, so only the
        # per-variable marginals are required to line up with the target
        gap_x = float(np.abs(induced_pair.sum(1) - q_arr.sum(1)).sum())
        gap_y = float(np.abs(induced_pair.sum(0) - q_arr.sum(0)).sum())
        if max(gap_x, gap_y) > 1e-6:
            raise PMFValidationError(
                f"decomposition marginals miss target by TV ({gap_x}, {gap_y})"
            )
        target_pair = q_arr
    cells = _guard_cells(nx * ny, n)
    books = build_binned_codebooks(aux, n, rates, seed)
    m0, ms = books.sizes["M0"], books.sizes["Mstar"]
    b1, b2 = books.sizes["B1"], books.sizes["B2"]
    u_book = books.codewords["u"]
    w_rows = np.einsum("ux,uy->uxy", p_x_u, p_y_u).reshape(len(p_u), nx * ny)
    target = _target_tensor(target_pair.ravel(), n)
    report_rates = {
        "R": books.rates["R0"] / 2 + books.rates["Rstar"],
        **books.rates,
    }

    if encoder == "uniform":
        induced = _codeword_average(u_book.reshape(m0 * ms, n), w_rows, cells)
        _check_mass(induced, "binned")
        per_f = [
            float(np.abs(_codeword_average(u_book[i0], w_rows, cells) - target).sum())
            for i0 in range(m0)
        ]
        tv = float(np.abs(induced - target).sum())
        return SimReport("binned", n, report_rates, tv, seed, per_f_tv=per_f)

    p_joint = np.einsum("u,ux,uy->uxy", p_u, p_x_u, p_y_u)
    if encoder == "typicality":
        sel = _typicality_selection(books, p_joint, eps)
        weights = np.zeros((m0, ms))
        for i0 in range(m0):
            weights[i0] = np.bincount(sel[i0].ravel(), minlength=ms)
        weights /= b1 * b2
    elif encoder == "likelihood":
        weights = _likelihood_weights(books, p_joint).sum(axis=(2, 3)) / (b1 * b2)
    else:
        raise ValueError(f"unknown encoder {encoder!r}")

    induced = np.zeros(cells)
    per_f = []
    for i0 in range(m0):
        cond = np.zeros(cells)
        for j in range(ms):
            w = weights[i0, j]
            if w == 0.0:
                continue
            t = np.array([w])
            for k in range(n):
                t = (t[:, None] * w_rows[u_book[i0, j, k]][None, :]).ravel()
            cond += t
        induced += cond
        per_f.append(float(np.abs(cond - target).sum()))
    induced /= m0
    _check_mass(induced, "binned")
    tv = float(np.abs(induced - target).sum())
    return SimReport("binned", n, report_rates, tv, seed, per_f_tv=per_f)


# ---------------------------------------------------------------------------
# oblivious nested-codebook scheme


@dataclass(frozen=True)
class ObliviousFamily:
    """Structured auxiliary family p(u) prod_j p(u_j) prod_i p(x_i | u, u_{V_i}).

    ``channels[i]`` has shape (card_u, cards of the sorted view sources,
    output alphabet of processor i).
    """

    p_u: np.ndarray
    p_ui: tuple[np.ndarray, ...]
    channels: tuple[np.ndarray, ...]


def oblivious_sim(
    q: JointPMF,
    family: ObliviousFamily,
    acc: AccessStructure,
    n: int,
    rates,
    seed: int,
) -> SimReport:
    """Nested-codebook synthesis with an oblivious coordinator.

    Draws 2^(nR) root codewords u(w) and, for each, independent per-source
    books u_j(w, w_j); processor i emits through
    prod_k p(x_i | u_k(w), u_{V_i,k}(w, w_{V_i})). The induced distribution
    is the exact uniform average over every index tuple (w, w_1..w_h).
    """
    r, *r_shared = (float(v) for v in rates)
    if len(r_shared) != acc.h:
        raise ValueError(f"expected {acc.h} shared rates, got {len(r_shared)}")
    p_u = np.asarray(family.p_u, dtype=float)
    x_sizes = tuple(int(c.shape[-1]) for c in family.channels)
    q_arr = np.asarray(q.probs)
    if q_arr.shape != x_sizes:
        raise PMFValidationError(f"target shape {q_arr.shape} vs family outputs {x_sizes}")
    cells = _guard_cells(int(np.prod(x_sizes)), n)
    w_size = _index_size(n, r)
    wi_sizes = [_index_size(n, ri) for ri in r_shared]
    n_tuples = w_size * int(np.prod(wi_sizes)) if wi_sizes else w_size
    if n_tuples > TUPLE_LIMIT:
        raise ResourceGuardError(f"{n_tuples} index tuples exceed the {TUPLE_LIMIT} guard")

    u_book = _sample_iid(_book_rng(seed, _U_BOOK), p_u, (w_size, n))
    ui_books = [
        _sample_iid(_book_rng(seed, _UI_BOOK_BASE + j), np.asarray(family.p_ui[j], float), (w_size, wi_sizes[j], n))
        for j in range(acc.h)
    ]
    views = [sorted(v) for v in acc.views]

    induced = np.zeros(cells)
    for w in range(w_size):
        for combo in iproduct(*(range(s) for s in wi_sizes)):
            rows = []
            for i in range(acc.t):
                chan = family.channels[i]
                sel = (u_book[w],) + tuple(ui_books[j - 1][w, combo[j - 1]] for j in views[i])
                rows.append(chan[sel])  # (n, nx_i)
            per_pos = reduce(lambda a, b: np.einsum("na,nb->nab", a, b).reshape(n, -1), rows)
            t = np.array([1.0])
            for k in range(n):
                t = (t[:, None] * per_pos[k][None, :]).ravel()
            induced += t
    induced /= n_tuples
    _check_mass(induced, "oblivious")
    target = _target_tensor(q_arr.ravel(), n)
    tv = float(np.abs(induced - target).sum())
    rates_dict = {"R": r, **{f"R{j + 1}": r_shared[j] for j in range(acc.h)}}
    return SimReport("oblivious", n, rates_dict, tv, seed)


# ---------------------------------------------------------------------------
# trend aggregation


@dataclass
class TrendReport:
    rows: list[SimReport]
    aggregates: list[dict[str, float]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scheme", "n", "seed", "R", "R0", "Rstar", "R1", "R2", "tv"])
        for r in self.rows:
            writer.writerow(
                [
                    r.scheme,
                    r.n,
                    r.codebook_seed,
                    r.rates.get("R", ""),
                    r.rates.get("R0", ""),
                    r.rates.get("Rstar", ""),
                    r.rates.get("R1", r.rates.get("Rtilde1", "")),
                    r.rates.get("R2", r.rates.get("Rtilde2", "")),
                    repr(r.tv),
                ]
            )
        return buf.getvalue()


def _run_one(config: Mapping, n: int, seed: int) -> SimReport:
    cfg = dict(config)
    scheme = cfg.pop("scheme")
    if scheme == "wyner":
        return wyner_synthesis_sim(n=n, seed=seed, **cfg)
    if scheme == "binned":
        return binned_scheme_sim(n=n, seed=seed, **cfg)
    if scheme == "oblivious":
        return oblivious_sim(n=n, seed=seed, **cfg)
    raise ValueError(f"unknown scheme {scheme!r}")


def trend_report(config: Mapping, n_list: Sequence[int], seeds: Sequence[int]) -> TrendReport:
    """Run one scheme across blocklengths and seeds; aggregate the medians.

    Deterministic given the seed list; each row is an exact SimReport and the
    per-n aggregate carries median and quartiles of the tv column.
    """
    rows = [_run_one(config, n, seed) for n in n_list for seed in seeds]
    aggregates = []
    for n in n_list:
        tvs = np.array([r.tv for r in rows if r.n == n])
        aggregates.append(
            {
                "n": n,
                "median_tv": float(np.median(tvs)),
                "q25_tv": float(np.quantile(tvs, 0.25)),
                "q75_tv": float(np.quantile(tvs, 0.75)),
                "min_tv": float(tvs.min()),
            }
        )
    return TrendReport(rows, aggregates)

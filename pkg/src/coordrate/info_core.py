"""Exact discrete-distribution arithmetic and information measures.

Everything operates on dense probability tensors over named finite axes.
All information quantities are in bits (log base 2), with the convention
0*log(0) = 0 so that every measure is total. Values are immutable after
construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import xlogy

__all__ = [
    "Alphabet",
    "JointPMF",
    "Channel",
    "PMFValidationError",
    "AxisMismatchError",
    "DomainError",
    "entropy",
    "binary_entropy",
    "inv_binary_entropy",
    "mutual_information",
    "conditional_mutual_information",
    "total_correlation",
    "dual_total_correlation",
    "tv_distance",
    "marginalize",
    "condition",
    "compose",
]

PMF_TOL = 1e-9


class PMFValidationError(ValueError):
    """A probability tensor failed validation (negativity / normalization)."""


class AxisMismatchError(ValueError):
    """Axis names passed to an operation are inconsistent with the pmf."""


class DomainError(ValueError):
    """Scalar argument outside the mathematical domain of the function."""


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet, identified only by its size."""

    size: int

    def __post_init__(self) -> None:
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise PMFValidationError(f"alphabet size must be a positive integer, got {self.size!r}")


def _as_axes(axes: Sequence[tuple[str, Alphabet | int]]) -> tuple[tuple[str, Alphabet], ...]:
    out = []
    for name, alph in axes:
        if not isinstance(name, str) or not name:
            raise AxisMismatchError(f"axis name must be a non-empty string, got {name!r}")
        if isinstance(alph, (int, np.integer)):
            alph = Alphabet(int(alph))
        out.append((name, alph))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise AxisMismatchError(f"duplicate axis names: {names}")
    return tuple(out)


class JointPMF:
    """Dense joint pmf over an ordered product of named finite alphabets.

    ``probs`` is stored row-major (last axis fastest); its shape must equal
    the tuple of alphabet sizes. Entries must be non-negative and sum to one
    within ``PMF_TOL``. Re-normalization happens only on explicit request via
    ``normalized()``, never silently.
    """

    __slots__ = ("axes", "probs")

    def __init__(self, axes: Sequence[tuple[str, Alphabet | int]], probs: np.ndarray) -> None:
        axes = _as_axes(axes)
        probs = np.asarray(probs, dtype=float)
        sizes = tuple(alph.size for _, alph in axes)
        expected = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
        if probs.size != expected:
            raise PMFValidationError(f"tensor has {probs.size} entries, expected {expected}")
        probs = probs.reshape(sizes)
        if np.any(probs < 0):
            raise PMFValidationError(f"negative probability entry: min={probs.min()}")
        total = float(probs.sum())
        if abs(total - 1.0) > PMF_TOL:
            raise PMFValidationError(f"probabilities sum to {total}, not 1 within {PMF_TOL}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("JointPMF is immutable")

    @classmethod
    def from_named(cls, names: Sequence[str], probs: np.ndarray) -> "JointPMF":
        """Build a pmf from axis names, inferring alphabet sizes from the shape."""
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != len(names):
            raise AxisMismatchError(f"{len(names)} names for a {probs.ndim}-dim tensor")
        return cls([(n, Alphabet(s)) for n, s in zip(names, probs.shape)], probs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(a.size for _, a in self.axes)

    def axis_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise AxisMismatchError(f"no axis named {name!r}; have {self.names}") from None

    def normalized(self) -> "JointPMF":
        """Explicitly re-normalized copy (for inputs that fail the sum check)."""
        total = float(np.asarray(self.probs).sum())
        if total <= 0:
            raise PMFValidationError("cannot normalize an all-zero tensor")
        return JointPMF(self.axes, np.asarray(self.probs) / total)

    def to_json_dict(self) -> dict:
        return {
            "axes": [{"name": n, "size": a.size} for n, a in self.axes],
            "probs": [float(v) for v in np.asarray(self.probs).ravel()],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "JointPMF":
        axes = [(ax["name"], Alphabet(int(ax["size"]))) for ax in data["axes"]]
        return cls(axes, np.asarray(data["probs"], dtype=float))

    def __repr__(self) -> str:
        spec = ",".join(f"{n}:{a.size}" for n, a in self.axes)
        return f"JointPMF({spec})"


class Channel:
    """Conditional pmf p(outputs | inputs) over named finite alphabets.

    ``probs`` has shape (input sizes, output sizes); every input slice must
    be a pmf over the outputs within ``PMF_TOL``.
    """

    __slots__ = ("input_axes", "output_axes", "probs")

    def __init__(
        self,
        input_axes: Sequence[tuple[str, Alphabet | int]],
        output_axes: Sequence[tuple[str, Alphabet | int]],
        probs: np.ndarray,
    ) -> None:
        input_axes = _as_axes(input_axes)
        output_axes = _as_axes(list(input_axes) + list(output_axes))[len(input_axes):]
        in_sizes = tuple(a.size for _, a in input_axes)
        out_sizes = tuple(a.size for _, a in output_axes)
        probs = np.asarray(probs, dtype=float).reshape(in_sizes + out_sizes)
        if np.any(probs < 0):
            raise PMFValidationError(f"negative channel entry: min={probs.min()}")
        out_dims = tuple(range(len(in_sizes), probs.ndim))
        slice_sums = probs.sum(axis=out_dims) if out_dims else probs
        if np.any(np.abs(slice_sums - 1.0) > PMF_TOL):
            worst = float(np.abs(slice_sums - 1.0).max())
            raise PMFValidationError(f"conditional slice sums deviate from 1 by up to {worst}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "input_axes", input_axes)
        object.__setattr__(self, "output_axes", output_axes)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.input_axes)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.output_axes)

    @classmethod
    def identity(cls, in_name: str, out_name: str, size: int) -> "Channel":
        return cls([(in_name, Alphabet(size))], [(out_name, Alphabet(size))], np.eye(size))

    def to_json_dict(self) -> dict:
        return {
            "input_axes": [{"name": n, "size": a.size} for n, a in self.input_axes],
            "output_axes": [{"name": n, "size": a.size} for n, a in self.output_axes],
            "probs": [float(v) for v in np.asarray(self.probs).ravel()],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Channel":
        return cls(
            [(ax["name"], Alphabet(int(ax["size"]))) for ax in data["input_axes"]],
            [(ax["name"], Alphabet(int(ax["size"]))) for ax in data["output_axes"]],
            np.asarray(data["probs"], dtype=float),
        )

    def __repr__(self) -> str:
        ins = ",".join(self.input_names)
        outs = ",".join(self.output_names)
        return f"Channel({outs}|{ins})"


# ---------------------------------------------------------------------------
# probability calculus


def _resolve_group(p: JointPMF, group: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(group, str):
        group = (group,)
    group = tuple(group)
    for name in group:
        p.axis_index(name)
    if len(set(group)) != len(group):
        raise AxisMismatchError(f"repeated axis in group {group}")
    return group


def marginalize(p: JointPMF, names: Iterable[str] | str) -> JointPMF:
    """Sum out the listed axes. Summing out every axis leaves a scalar pmf."""
    drop = _resolve_group(p, names)
    keep = [i for i, n in enumerate(p.names) if n not in drop]
    probs = np.asarray(p.probs).sum(axis=tuple(i for i, n in enumerate(p.names) if n in drop))
    return JointPMF([p.axes[i] for i in keep], probs)


def condition(p: JointPMF, assignment: Mapping[str, int]) -> JointPMF:
    """Condition on axis=value assignments; renormalizes the kept slice.

    Conditioning on a zero-probability event is an error (no conditional
    distribution exists).
    """
    idx: list = [slice(None)] * len(p.names)
    for name, val in assignment.items():
        i = p.axis_index(name)
        size = p.sizes[i]
        if not 0 <= int(val) < size:
            raise AxisMismatchError(f"value {val} out of range for axis {name!r} of size {size}")
        idx[i] = int(val)
    sub = np.asarray(p.probs)[tuple(idx)]
    mass = float(sub.sum())
    if mass <= 0.0:
        raise PMFValidationError(f"conditioning event {dict(assignment)} has zero probability")
    keep = [p.axes[i] for i, n in enumerate(p.names) if n not in assignment]
    return JointPMF(keep, sub / mass)


def compose(p: JointPMF, ch: Channel) -> JointPMF:
    """Attach channel outputs: joint over p's axes plus ch's outputs.

    Requires every channel input axis to appear in ``p`` with matching size;
    result probability is p(x) * ch(out | inputs-of-x).
    """
    for name, alph in ch.input_axes:
        i = p.axis_index(name)
        if p.sizes[i] != alph.size:
            raise AxisMismatchError(
                f"axis {name!r} has size {p.sizes[i]} in pmf but {alph.size} in channel"
            )
    clash = set(p.names) & set(ch.output_names)
    if clash:
        raise AxisMismatchError(f"output axes already present in pmf: {sorted(clash)}")
    letters = {}
    for n in list(p.names) + list(ch.output_names):
        letters.setdefault(n, chr(ord("a") + len(letters)))
    p_sub = "".join(letters[n] for n in p.names)
    c_sub = "".join(letters[n] for n in ch.input_names) + "".join(letters[n] for n in ch.output_names)
    o_sub = p_sub + "".join(letters[n] for n in ch.output_names)
    out = np.einsum(f"{p_sub},{c_sub}->{o_sub}", np.asarray(p.probs), np.asarray(ch.probs))
    return JointPMF(list(p.axes) + list(ch.output_axes), out)


# ---------------------------------------------------------------------------
# information measures (bits)


def _entropy_arr(arr: np.ndarray) -> float:
    return float(-xlogy(arr, arr).sum() / np.log(2.0))


def entropy(p: JointPMF) -> float:
    """Shannon entropy of the full joint, in bits."""
    return _entropy_arr(np.asarray(p.probs))


def _group_entropy(p: JointPMF, group: tuple[str, ...]) -> float:
    keep = set(group)
    axes = tuple(i for i, n in enumerate(p.names) if n not in keep)
    return _entropy_arr(np.asarray(p.probs).sum(axis=axes) if axes else np.asarray(p.probs))


def binary_entropy(t: float) -> float:
    """h(t) = -t log2 t - (1-t) log2 (1-t) on [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"binary_entropy needs t in [0,1], got {t}")
    return float(-(xlogy(t, t) + xlogy(1.0 - t, 1.0 - t)) / np.log(2.0))


def inv_binary_entropy(y: float) -> float:
    """The unique t in [0, 0.5] with binary_entropy(t) = y, by bisection.

    The bracket is driven to double-precision exhaustion (the entropy is flat
    at 0.5, so stopping on |h(t) - y| alone would leave t-error near the
    top); the result satisfies |h(t) - y| <= 1e-12.
    """
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"inv_binary_entropy needs y in [0,1], got {y}")
    if y == 1.0:
        # h is quadratically flat at 0.5: every t within ~6e-9 of 0.5 maps to
        # float 1.0, so 0.5 is the canonical preimage
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            raise AxisMismatchError(f"axis groups overlap: {groups}")
        seen |= set(g)


def mutual_information(p: JointPMF, group_a: Iterable[str] | str, group_b: Iterable[str] | str) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B), other axes marginalized out."""
    a = _resolve_group(p, group_a)
    b = _resolve_group(p, group_b)
    _disjoint(a, b)
    return _group_entropy(p, a) + _group_entropy(p, b) - _group_entropy(p, a + b)


def conditional_mutual_information(
    p: JointPMF,
    group_a: Iterable[str] | str,
    group_b: Iterable[str] | str,
    cond: Iterable[str] | str,
) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)."""
    a = _resolve_group(p, group_a)
    b = _resolve_group(p, group_b)
    c = _resolve_group(p, cond)
    _disjoint(a, b, c)
    return (
        _group_entropy(p, a + c)
        + _group_entropy(p, b + c)
        - _group_entropy(p, a + b + c)
        - _group_entropy(p, c)
    )


def total_correlation(
    p: JointPMF,
    groups: Sequence[Iterable[str] | str],
    cond: Iterable[str] | str = (),
) -> float:
    """Multivariate dependence: sum_i H(X_i|C) - H(X_1..X_t|C), in bits."""
    gs = [_resolve_group(p, g) for g in groups]
    c = _resolve_group(p, cond)
    _disjoint(*gs, c)
    hc = _group_entropy(p, c)
    all_names = tuple(n for g in gs for n in g)
    return sum(_group_entropy(p, g + c) - hc for g in gs) - (_group_entropy(p, all_names + c) - hc)


def dual_total_correlation(
    p: JointPMF,
    groups: Sequence[Iterable[str] | str],
    cond: Iterable[str] | str = (),
) -> float:
    """H(X_1..X_t|C) - sum_i H(X_i | C, X_{rest}), in bits."""
    gs = [_resolve_group(p, g) for g in groups]
    c = _resolve_group(p, cond)
    _disjoint(*gs, c)
    hc = _group_entropy(p, c)
    all_names = tuple(n for g in gs for n in g)
    h_all = _group_entropy(p, all_names + c) - hc
    total = h_all
    for i, g in enumerate(gs):
        rest = tuple(n for j, gg in enumerate(gs) if j != i for n in gg)
        # H(X_i | C, rest) = H(all, C) - H(rest, C)
        total -= _group_entropy(p, all_names + c) - _group_entropy(p, rest + c)
    return total


def tv_distance(p: JointPMF, q: JointPMF) -> float:
    """L1 distance sum |p - q| over identical axes (q realigned by name)."""
    if set(p.names) != set(q.names):
        raise AxisMismatchError(f"axis sets differ: {p.names} vs {q.names}")
    perm = tuple(q.axis_index(n) for n in p.names)
    q_arr = np.transpose(np.asarray(q.probs), perm)
    if q_arr.shape != np.asarray(p.probs).shape:
        raise AxisMismatchError(f"alphabet sizes differ: {p.sizes} vs {q_arr.shape}")
    return float(np.abs(np.asarray(p.probs) - q_arr).sum())

"""Constructive inverse of T - lambda as a truncated coefficient series.

When the forward rate at lambda is < 1, the inverse acts columnwise as
(T - lambda)^{-1} e_i = sum_{l>=0} a^i_{i+l} e_{i+l} with

    a^i_{i+l} = (-1)^l  prod_{m=0}^{l-1} w_{i+m} / prod_{m=0}^{l} (d_{i+m} - lambda),

(empty numerator product = 1, so a^i_i = 1/(d_i - lambda)).  When the
backward rate is < 1 and the shift part is invertible, the inverse runs
downward instead:

    a^i_{i-k} = (-1)^{k+1} prod_{m=1}^{k-1} (d_{i-m} - lambda) / prod_{m=1}^{k} w_{i-m},

(empty diagonal product = 1, so a^i_{i-1} = 1 / w_{i-1}).  Coefficients
are built and stored as (log-magnitude, phase) pairs so that products of
hundreds of factors neither overflow nor underflow; complex values are
materialized on demand.

Exact cancellations make the truncated series an inverse up to a
geometrically small tail:

    forward:   w_i a^{i+1}_{i+l+1} + (d_i - lambda) a^i_{i+l+1} = 0,
    backward:  w_{i-l-1} a^i_{i-l-1} + (d_{i-l} - lambda) a^i_{i-l} = 0,

and residual_identity measures how well (T - lambda) F e_i = F (T - lambda) e_i = e_i
holds on the stored columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DenominatorZero, SpecError, WeightZero
from .radii import RadiusEstimate, backward_rate, forward_rate
from .sequences import hull_window, log_abs
from .shifts import ShiftModel

__all__ = [
    "InverseSeries",
    "build_forward",
    "build_backward",
    "residual_identity",
    "telescoping_residual",
    "construct_resolvent",
    "default_index_range",
]

_TINY = 1e-300


@dataclass
class InverseSeries:
    """Truncated inverse columns for i in index_range (both ends inclusive)."""

    direction: str
    lam: complex
    L: int
    index_range: tuple[int, int]
    tail_bound: float = 0.0
    _logmag: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _phase: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def column(self, i: int) -> np.ndarray:
        """Materialized complex coefficients of column i.

        Forward: entry l sits at basis index i + l (l = 0..L).
        Backward: entry k-1 sits at basis index i - k (k = 1..L).
        """
        if i not in self._logmag:
            raise SpecError(f"column {i} outside stored range {self.index_range}")
        # alternating signs applied exactly, not through the phase angle
        if self.direction == "forward":
            signs = 1.0 - 2.0 * (np.arange(self.L + 1) & 1)
        else:
            signs = 2.0 * (np.arange(1, self.L + 1) & 1) - 1.0
        return signs * np.exp(self._logmag[i]) * np.exp(1j * self._phase[i])

    def basis_indices(self, i: int) -> np.ndarray:
        if self.direction == "forward":
            return i + np.arange(self.L + 1)
        return i - np.arange(1, self.L + 1)

    def coefficient(self, i: int, j: int) -> complex:
        col = self.column(i)
        off = j - i if self.direction == "forward" else i - j - 1
        if not 0 <= off < len(col):
            return 0.0
        return complex(col[off])


def default_index_range(model: ShiftModel) -> tuple[int, int]:
    """Column range covering every distinct local coefficient pattern."""
    return hull_window([model.weights, model.diagonals], 1)


def _prefix(values: np.ndarray) -> np.ndarray:
    out = np.empty(len(values) + 1)
    out[0] = 0.0
    np.cumsum(values, out=out[1:])
    return out


def _tail_bound(logmags: dict[int, np.ndarray]) -> float:
    """max_i |a_last| / (1 - rho) with rho the observed last-step ratio.

    Divergent columns (rho >= 1) report +inf.
    """
    worst = 0.0
    for lm in logmags.values():
        if len(lm) < 2:
            return math.inf
        last = math.exp(lm[-1])
        prev = math.exp(lm[-2])
        if last == 0.0:
            continue
        rho = last / prev if prev > 0.0 else math.inf
        if rho >= 1.0:
            return math.inf
        worst = max(worst, last / (1.0 - rho))
    return worst


def build_forward(model: ShiftModel, lam: complex, L: int,
                  index_range: tuple[int, int] | None = None) -> InverseSeries:
    """Forward inverse columns (caller is responsible for the rate gate).

    Raises DenominatorZero when some d_i equals lambda inside the working
    span; the forward series does not exist at such lambda.
    """
    if L < 0:
        raise SpecError("series length must be >= 0")
    if model.step != 1:
        raise SpecError("inverse series require a step-1 model")
    a, b = index_range if index_range is not None else default_index_range(model)
    if b < a:
        raise SpecError("index range must satisfy a <= b")
    lam = complex(lam)

    wv = model.weights.values(a, b + L)
    dv = model.diagonals.values(a, b + L) - lam
    dz = np.abs(dv) == 0.0
    if dz.any():
        first = a + int(np.argmax(dz))
        raise DenominatorZero(f"d_{first} - lambda = 0; forward series undefined")

    logw = log_abs(wv)
    zw = np.concatenate(([0], np.cumsum((np.abs(wv) == 0.0).astype(np.int64))))
    pw = _prefix(np.where(np.isneginf(logw), 0.0, logw))
    aw = _prefix(np.angle(wv))
    pd = _prefix(np.log(np.abs(dv)))
    ad = _prefix(np.angle(dv))

    ls = np.arange(L + 1)
    logmags: dict[int, np.ndarray] = {}
    phases: dict[int, np.ndarray] = {}
    for i in range(a, b + 1):
        t = i - a
        lm = (pw[t + ls] - pw[t]) - (pd[t + ls + 1] - pd[t])
        lm[(zw[t + ls] - zw[t]) > 0] = -np.inf
        ph = (aw[t + ls] - aw[t]) - (ad[t + ls + 1] - ad[t])
        logmags[i] = lm
        phases[i] = ph
    return InverseSeries("forward", lam, L, (a, b),
                         tail_bound=_tail_bound(logmags),
                         _logmag=logmags, _phase=phases)


def build_backward(model: ShiftModel, lam: complex, L: int,
                   index_range: tuple[int, int] | None = None) -> InverseSeries:
    """Backward inverse columns (caller is responsible for the rate gate).

    Raises WeightZero when a required weight vanishes (the backward series
    divides by backward weight products).
    """
    if L < 1:
        raise SpecError("backward series length must be >= 1")
    if model.step != 1:
        raise SpecError("inverse series require a step-1 model")
    a, b = index_range if index_range is not None else default_index_range(model)
    if b < a:
        raise SpecError("index range must satisfy a <= b")
    lam = complex(lam)

    wv = model.weights.values(a - L, b - 1)
    wz = np.abs(wv) == 0.0
    if wz.any():
        first = (a - L) + int(np.argmax(wz))
        raise WeightZero(f"w_{first} = 0; backward series undefined")
    dv = model.diagonals.values(a - L + 1, b - 1) - lam

    ks = np.arange(1, L + 1)
    logmags: dict[int, np.ndarray] = {}
    phases: dict[int, np.ndarray] = {}
    for i in range(a, b + 1):
        # values at i-1, i-2, ..., going down
        wl = np.log(np.abs(wv))[i - 1 - (a - L) :: -1][:L]
        wa = np.angle(wv)[i - 1 - (a - L) :: -1][:L]
        dslice = dv[i - a + L - 2 :: -1][: L - 1] if L > 1 else np.empty(0, complex)
        dl = log_abs(dslice)
        num_log = np.concatenate(([0.0], np.cumsum(np.where(np.isneginf(dl), 0.0, dl))))
        num_dead = np.concatenate(([0], np.cumsum(np.isneginf(dl).astype(np.int64))))
        num_ang = np.concatenate(([0.0], np.cumsum(np.angle(dslice))))
        den_log = np.cumsum(wl)
        den_ang = np.cumsum(wa)
        lm = num_log[ks - 1] - den_log[ks - 1]
        lm[num_dead[ks - 1] > 0] = -np.inf
        ph = num_ang[ks - 1] - den_ang[ks - 1]
        logmags[i] = lm
        phases[i] = ph
    return InverseSeries("backward", lam, L, (a, b),
                         tail_bound=_tail_bound(logmags),
                         _logmag=logmags, _phase=phases)


def _probe_ok(series: InverseSeries, i: int) -> None:
    a, b = series.index_range
    if not (a <= i and i + 1 <= b):
        raise SpecError(f"probe {i} needs columns {i} and {i + 1} inside {series.index_range}")


def residual_identity(series: InverseSeries, model: ShiftModel,
                      probe_indices: list[int] | None = None) -> float:
    """max over probes of || (T-lambda) F e_i - e_i || and || F (T-lambda) e_i - e_i ||.

    The two-sided identity witness on the truncated columns; for a
    convergent series this decays geometrically in L.
    """
    a, b = series.index_range
    if probe_indices is None:
        mid = (a + b) // 2
        probe_indices = sorted({max(a, min(mid, b - 1)), a, max(a, b - 1)})
    lam = series.lam
    L = series.L
    worst = 0.0
    for i in probe_indices:
        _probe_ok(series, i)
        ci = series.column(i)
        cp = series.column(i + 1)
        if series.direction == "forward":
            wv = model.weights.values(i, i + L)
            dv = model.diagonals.values(i, i + L) - lam
            out = np.zeros(L + 2, dtype=complex)
            out[: L + 1] += dv * ci
            out[1 : L + 2] += wv * ci
            out[0] -= 1.0
            res1 = np.linalg.norm(out)
            w_i = model.weights.value_at(i)
            d_i = model.diagonals.value_at(i) - lam
            comb = np.zeros(L + 2, dtype=complex)
            comb[: L + 1] += d_i * ci
            comb[1 : L + 2] += w_i * cp
            comb[0] -= 1.0
            res2 = np.linalg.norm(comb)
        else:
            # ci[k-1] sits at basis i-k
            wv = model.weights.values(i - L, i - 1)[::-1]      # w_{i-k}
            dv = model.diagonals.values(i - L, i - 1)[::-1] - lam
            out = np.zeros(L + 1, dtype=complex)               # slot j = basis i-j
            out[1 : L + 1] += dv * ci
            out[0:L] += wv * ci
            out[0] -= 1.0
            res1 = np.linalg.norm(out)
            w_i = model.weights.value_at(i)
            d_i = model.diagonals.value_at(i) - lam
            comb = np.zeros(L + 1, dtype=complex)
            comb[1 : L + 1] += d_i * ci
            comb[0:L] += w_i * cp                              # c'_{j+1} at basis i-j
            comb[0] -= 1.0
            res2 = np.linalg.norm(comb)
        worst = max(worst, float(res1), float(res2))
    return worst


def telescoping_residual(series: InverseSeries, model: ShiftModel) -> float:
    """max relative violation of the exact cancellation identities."""
    a, b = series.index_range
    lam = series.lam
    L = series.L
    worst = 0.0
    for i in range(a, b):
        ci = series.column(i)
        cp = series.column(i + 1)
        w_i = model.weights.value_at(i)
        d_i = model.diagonals.value_at(i) - lam
        if series.direction == "forward":
            if L < 1:
                continue
            t1 = w_i * cp[:L]          # w_i a^{i+1}_{i+l+1}, l = 0..L-1
            t2 = d_i * ci[1 : L + 1]   # (d_i-lam) a^i_{i+l+1}
        else:
            if L < 2:
                continue
            # within-column: w_{i-l-1} a^i_{i-l-1} + (d_{i-l}-lam) a^i_{i-l}, l = 1..L-1
            wv = model.weights.values(i - L, i - 2)[::-1]      # w_{i-l-1}
            dv = model.diagonals.values(i - L + 1, i - 1)[::-1] - lam
            t1 = wv * ci[1:L]
            t2 = dv * ci[0 : L - 1]
        scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), _TINY)
        worst = max(worst, float(np.max(np.abs(t1 + t2) / scale)))
    return worst


def construct_resolvent(model: ShiftModel, lam: complex, k_max: int = 64,
                        target_tail: float = 1e-8, L_max: int = 8192,
                        index_range: tuple[int, int] | None = None):
    """Pick a convergent direction at lambda and build it.

    Returns (series, forward_estimate, backward_estimate); series is None
    when neither rate is < 1 (lambda is a spectrum candidate).  The series
    length is chosen so the geometric tail factor R^L drops below
    target_tail.
    """
    fwd = forward_rate(model, lam, k_max)
    bwd = backward_rate(model, lam, k_max)

    def pick_length(rate: RadiusEstimate) -> int:
        r = min(max(rate.value, 1e-12), 1.0 - 1e-12)
        need = math.ceil(math.log(target_tail) / math.log(r)) + 4
        return max(8, min(L_max, need))

    series = None
    if fwd.value < 1.0:
        series = build_forward(model, lam, pick_length(fwd), index_range)
    elif model.invertible_shift and bwd.value < 1.0:
        series = build_backward(model, lam, pick_length(bwd), index_range)
    return series, fwd, bwd

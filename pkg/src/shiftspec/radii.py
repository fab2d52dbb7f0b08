"""Forward/backward growth rates deciding spectrum membership.

For the operator T = S + D and a probe point lambda, two rates are
evaluated:

  forward:  lim_k [ sup_i |prod_{m=0}^{k-1} w_{i+m}| / |prod_{m=0}^{k} (d_{i+m}-lambda)| ]^(1/k)
  backward: lim_k [ sup_i |prod_{m=0}^{k-1} (d_{i-m}-lambda)| / |prod_{m=0}^{k} w_{i-m}| ]^(1/k)

Membership of lambda in the spectrum is decided by where these rates sit
relative to 1 (see the spectrum module).  Rates are extended reals:

  * a zero denominator factor inside any window forces the supremum to
    +inf at every window length, so the rate is +inf (this is what makes
    lambda values that exactly hit a diagonal entry come out as members);
  * once every numerator window contains a zero the rate is 0.

Constant and periodic coefficient pairs evaluate in closed form (the rate
is the ratio of per-period geometric means).  Everything else runs the
truncated estimator: exact sliding-window maxima s_k of the log-domain
window sums for k = 1..k_max, then two extrapolations of s_k / k -> log R:

  * secant slope across a highly composite gap G (exact once s_k is affine
    plus a periodic-in-k oscillation whose period divides G, which covers
    every family supported here);
  * the plain k_max-th root.

The reported value is the slope estimate; the gap between the two in value
scale is reported as the uncertainty.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .sequences import hull_window, log_abs
from .shifts import ShiftModel

__all__ = [
    "RadiusEstimate",
    "RateField",
    "forward_rate",
    "backward_rate",
    "rate_field",
    "invertibility_consistency",
]

_METHODS = ("closed_form_constant", "closed_form_periodic",
            "truncated_slope", "truncated_root", "degenerate")


@dataclass(frozen=True)
class RadiusEstimate:
    """A growth-rate value with truncation metadata.

    value is an extended real >= 0 (0 and +inf are meaningful);
    uncertainty is the disagreement between the two truncated estimators in
    value scale, and 0 for closed forms and exact infinite/zero cases.
    """

    value: float
    log_value: float
    k_used: int
    method: str
    uncertainty: float

    def __post_init__(self):
        if self.method not in _METHODS:
            raise SpecError(f"unknown rate method {self.method!r}")


@dataclass
class RateField:
    """Batched log-rates over an array of lambda points (scan workhorse)."""

    log_plus: np.ndarray
    unc_plus: np.ndarray
    log_minus: np.ndarray | None
    unc_minus: np.ndarray | None
    method: str
    k_max: int


def _lifted_period_values(model: ShiftModel):
    """(weights, diagonals) lifted to a common period, or None."""
    pw = model.weights.period
    pd = model.diagonals.period
    if pw is None or pd is None:
        return None
    L = pw * pd // math.gcd(pw, pd)
    return model.weights.values(0, L - 1), model.diagonals.values(0, L - 1)


def _closed_rates(model: ShiftModel, lam: np.ndarray, want_minus: bool):
    """Closed-form log-rates for constant/periodic coefficient pairs.

    Forward and backward finite values are exact negatives of each other
    (both reduce to the same per-period sum), so their product is exactly 1.
    """
    lifted = _lifted_period_values(model)
    if lifted is None:
        raise SpecError("closed form requires constant or periodic weights and diagonals")
    wv, dv = lifted
    p = len(wv)
    den = np.abs(dv[None, :] - lam[:, None])
    den_zero = (den == 0.0).any(axis=1)
    with np.errstate(divide="ignore"):
        sd = np.sum(np.log(den, out=np.full_like(den, -np.inf), where=den > 0.0), axis=1)
    if (np.abs(wv) == 0.0).any():
        log_plus = np.where(den_zero, np.inf, -np.inf)
        log_minus = np.full(lam.shape, np.inf) if want_minus else None
    else:
        t = (float(np.sum(np.log(np.abs(wv)))) - sd) / p
        log_plus = np.where(den_zero, np.inf, t)
        log_minus = np.where(den_zero, -np.inf, -t) if want_minus else None
    zeros = np.zeros(lam.shape)
    method = "closed_form_constant" if p == 1 else "closed_form_periodic"
    return RateField(log_plus, zeros, log_minus,
                     zeros if want_minus else None, method, 0)


def _slope_gap(k_max: int) -> int:
    """Highly composite secant gap <= k_max // 2 (covers small periods)."""
    half = k_max // 2
    if half >= 60:
        return (half // 60) * 60
    if half >= 12:
        return (half // 12) * 12
    return max(half, 1)


def _sliding_s(num_log, den_log, off: int, k_max: int, starts: int) -> np.ndarray:
    """s[k-1] = max over window starts of (k-term num sum - (k+1)-term den sum).

    num window for start a covers a+off .. a+off+k-1; den window covers
    a .. a+k.  num_log/den_log have shape (n,) or (B, n); the result is
    (k_max, B) (B = 1 when both are one-dimensional).  A -inf den window
    forces the ratio to +inf (zero-denominator priority, which also covers
    the 0/0 window case).
    """
    num = np.atleast_2d(num_log[..., off:off + starts]).astype(float, copy=True)
    den = np.atleast_2d(den_log[..., 0:starts] + den_log[..., 1:starts + 1])
    B = max(num.shape[0], den.shape[0])
    s = np.empty((k_max, B))
    for k in range(1, k_max + 1):
        ratio = np.where(np.isneginf(den), np.inf, num - den)
        s[k - 1] = np.max(ratio, axis=-1)
        if k < k_max:
            num = num + num_log[..., off + k:off + k + starts]
            den = den + den_log[..., k + 1:k + 1 + starts]
    return s


def _estimates_from_s(s: np.ndarray, k_max: int):
    """(log_rate, uncertainty_in_value_scale) columns from an s matrix."""
    last = s[-1]
    G = _slope_gap(k_max)
    finite = np.isfinite(last)
    log_val = np.where(np.isposinf(last), np.inf, -np.inf)
    unc = np.zeros(last.shape)
    if finite.any():
        slope = (s[k_max - 1, finite] - s[k_max - 1 - G, finite]) / G
        root = last[finite] / k_max
        log_val[finite] = slope
        unc[finite] = np.abs(np.exp(slope) - np.exp(root))
    return log_val, unc


class _TruncatedEngine:
    """Shared index grids and weight logs for truncated rate evaluation."""

    def __init__(self, model: ShiftModel, k_max: int):
        K = k_max + 1
        a, b = hull_window([model.weights, model.diagonals], K)
        self.starts = b - a + 1
        hi = b + k_max + 1
        self.logw = log_abs(model.weights.values(a, hi))
        self.dvals = model.diagonals.values(a, hi)
        self.k_max = k_max

    def log_rates(self, lam: np.ndarray, want_minus: bool):
        with np.errstate(divide="ignore"):
            dmat = np.abs(self.dvals[None, :] - lam[:, None])
            logd = np.log(dmat, out=np.full_like(dmat, -np.inf), where=dmat > 0.0)
        s_plus = _sliding_s(self.logw, logd, 0, self.k_max, self.starts)
        lp, up = _estimates_from_s(s_plus, self.k_max)
        lm = um = None
        if want_minus:
            s_minus = _sliding_s(logd, self.logw, 1, self.k_max, self.starts)
            lm, um = _estimates_from_s(s_minus, self.k_max)
        return lp, up, lm, um


def _has_closed_form(model: ShiftModel) -> bool:
    return model.weights.period is not None and model.diagonals.period is not None


def rate_field(model: ShiftModel, lam: np.ndarray, k_max: int = 64, *,
               method: str = "auto", want_minus: bool | None = None,
               threads: int = 1) -> RateField:
    """Evaluate log-rates for an array of lambda points.

    method: "auto" picks the closed form when both coefficient sequences
    are constant/periodic, otherwise the truncated estimator; "closed" and
    "truncated" force a path.  want_minus defaults to evaluating the
    backward rate only when the shift part is invertible.
    """
    if model.step != 1:
        raise SpecError("rates are defined for step-1 models; use submodels()")
    if k_max < 8:
        raise SpecError(f"k_max must be >= 8, got {k_max}")
    lam = np.ascontiguousarray(np.asarray(lam, dtype=complex).ravel())
    if want_minus is None:
        want_minus = model.invertible_shift
    if method not in ("auto", "closed", "truncated"):
        raise SpecError(f"unknown rate method {method!r}")
    if method == "closed" or (method == "auto" and _has_closed_form(model)):
        return _closed_rates(model, lam, want_minus)

    engine = _TruncatedEngine(model, k_max)
    B = lam.shape[0]
    log_plus = np.empty(B)
    unc_plus = np.empty(B)
    log_minus = np.empty(B) if want_minus else None
    unc_minus = np.empty(B) if want_minus else None

    chunk = max(64, int(2_000_000 // max(engine.starts, 1)))
    spans = [(i, min(i + chunk, B)) for i in range(0, B, chunk)]

    def work(span):
        i, j = span
        lp, up, lm, um = engine.log_rates(lam[i:j], want_minus)
        log_plus[i:j] = lp
        unc_plus[i:j] = up
        if want_minus:
            log_minus[i:j] = lm
            unc_minus[i:j] = um

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, spans))
    else:
        for span in spans:
            work(span)
    return RateField(log_plus, unc_plus, log_minus, unc_minus, "truncated_slope", k_max)


def _scalar_estimate(log_val: float, unc: float, field: RateField,
                     degenerate: bool) -> RadiusEstimate:
    if degenerate:
        method = "degenerate"
    elif field.method.startswith("closed"):
        method = field.method
    elif not np.isfinite(log_val):
        method = "truncated_root"
    else:
        method = "truncated_slope"
    return RadiusEstimate(value=float(np.exp(log_val)), log_value=float(log_val),
                          k_used=field.k_max, method=method, uncertainty=float(unc))


def forward_rate(model: ShiftModel, lam: complex, k_max: int = 64, *,
                 method: str = "auto") -> RadiusEstimate:
    """The forward growth rate at a single lambda."""
    f = rate_field(model, np.array([lam]), k_max, method=method, want_minus=False)
    return _scalar_estimate(f.log_plus[0], f.unc_plus[0], f, degenerate=False)


def backward_rate(model: ShiftModel, lam: complex, k_max: int = 64, *,
                  method: str = "auto") -> RadiusEstimate:
    """The backward growth rate at a single lambda.

    When some weight is zero the backward window denominators vanish, the
    rate is +inf and the estimate is flagged as degenerate.
    """
    f = rate_field(model, np.array([lam]), k_max, method=method, want_minus=True)
    return _scalar_estimate(f.log_minus[0], f.unc_minus[0], f,
                            degenerate=not model.invertible_shift)


def invertibility_consistency(model: ShiftModel, k_max: int = 64,
                              tol: float = 1e-9):
    """Rates at lambda = 0 plus the necessary invertibility condition.

    If T is invertible then at least one of the two rates at the origin is
    <= 1; returns (forward, backward, consistent) where consistent checks
    that disjunction up to tol.
    """
    fwd = forward_rate(model, 0.0, k_max)
    bwd = backward_rate(model, 0.0, k_max)
    consistent = (fwd.value <= 1.0 + tol) or (bwd.value <= 1.0 + tol)
    return fwd, bwd, consistent

"""Finitely described bi-infinite complex sequences.

Weight and diagonal sequences live on all of Z, but every family supported
here admits a finite description: constant, periodic, two-sided step,
explicit table with constant tails, and a seeded random span with constant
tails.  Each family exposes a *start window*: an index range [a, b] such
that every distinct value window of length <= K occurring anywhere in the
sequence already occurs starting at some index in [a, b].  Suprema of
window products over all of Z then reduce to maxima over a finite set of
starts, which is what keeps the growth-rate computations downstream exact
rather than sampled.

Products of many factors are handled in the log-modulus domain; a zero
value contributes -inf so that any window containing it has product zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError

__all__ = [
    "SequenceSpec",
    "Constant",
    "Periodic",
    "Step",
    "Explicit",
    "RandomSpan",
    "log_abs",
    "log_modulus_prefix",
    "window_log_sums",
    "hull_window",
    "sequence_from_obj",
]


def _as_complex(v) -> complex:
    """Accept a number or a [re, im] pair (JSON forms)."""
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, complex):
        return v
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SpecError(f"expected a number or [re, im] pair, got {v!r}")


def _num_obj(z: complex):
    """JSON form of a complex value: bare real when imag == 0."""
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def log_abs(values: np.ndarray) -> np.ndarray:
    """Elementwise log|v| with -inf at exact zeros (no warnings)."""
    a = np.abs(np.asarray(values))
    out = np.full(a.shape, -np.inf)
    nz = a > 0.0
    out[nz] = np.log(a[nz])
    return out


@dataclass(frozen=True)
class SequenceSpec:
    """Base class; concrete families implement total evaluation over Z."""

    kind = "abstract"

    def value_at(self, i: int) -> complex:
        raise NotImplementedError

    def values(self, a: int, b: int) -> np.ndarray:
        """Values at indices a..b inclusive, as a complex array."""
        raise NotImplementedError

    def window(self, K: int) -> tuple[int, int]:
        """Start-index range covering every distinct window of length <= K."""
        raise NotImplementedError

    @property
    def period(self) -> int | None:
        """Exact period when the sequence is periodic, else None."""
        return None

    def sup_abs(self) -> float:
        raise NotImplementedError

    def inf_abs(self) -> float:
        raise NotImplementedError

    def abs_spec(self) -> "SequenceSpec":
        """The sequence of moduli |v_i|, same family."""
        raise NotImplementedError

    def subsample(self, n: int, j: int) -> "SequenceSpec":
        """The residue-class sequence i -> v_{j + i*n} (0 <= j < n)."""
        raise NotImplementedError

    def to_obj(self) -> dict:
        raise NotImplementedError

    def _check_subsample(self, n: int, j: int) -> None:
        if n < 1 or not 0 <= j < n:
            raise SpecError(f"subsample needs n >= 1 and 0 <= j < n, got n={n}, j={j}")


@dataclass(frozen=True)
class Constant(SequenceSpec):
    value: complex

    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "value", _as_complex(self.value))

    def value_at(self, i: int) -> complex:
        return self.value

    def values(self, a: int, b: int) -> np.ndarray:
        return np.full(b - a + 1, self.value, dtype=complex)

    def window(self, K: int) -> tuple[int, int]:
        _check_K(K)
        return (0, 0)

    @property
    def period(self) -> int | None:
        return 1

    def sup_abs(self) -> float:
        return abs(self.value)

    def inf_abs(self) -> float:
        return abs(self.value)

    def abs_spec(self) -> SequenceSpec:
        return Constant(abs(self.value))

    def subsample(self, n: int, j: int) -> SequenceSpec:
        self._check_subsample(n, j)
        return self

    def to_obj(self) -> dict:
        return {"kind": "constant", "value": _num_obj(self.value)}


@dataclass(frozen=True)
class Periodic(SequenceSpec):
    entries: tuple[complex, ...]

    kind = "periodic"

    def __post_init__(self):
        if len(self.entries) == 0:
            raise SpecError("periodic sequence needs at least one entry")
        object.__setattr__(self, "entries", tuple(_as_complex(v) for v in self.entries))

    def value_at(self, i: int) -> complex:
        return self.entries[i % len(self.entries)]

    def values(self, a: int, b: int) -> np.ndarray:
        arr = np.asarray(self.entries, dtype=complex)
        idx = np.mod(np.arange(a, b + 1), len(self.entries))
        return arr[idx]

    def window(self, K: int) -> tuple[int, int]:
        _check_K(K)
        return (0, len(self.entries) - 1)

    @property
    def period(self) -> int | None:
        return len(self.entries)

    def sup_abs(self) -> float:
        return max(abs(v) for v in self.entries)

    def inf_abs(self) -> float:
        return min(abs(v) for v in self.entries)

    def abs_spec(self) -> SequenceSpec:
        return Periodic(tuple(abs(v) for v in self.entries))

    def subsample(self, n: int, j: int) -> SequenceSpec:
        self._check_subsample(n, j)
        if n == 1:
            return self
        p = len(self.entries)
        p_new = p // math.gcd(n, p)
        vals = tuple(self.entries[(j + i * n) % p] for i in range(p_new))
        if len(set(vals)) == 1:
            return Constant(vals[0])
        return Periodic(vals)

    def to_obj(self) -> dict:
        return {"kind": "periodic", "values": [_num_obj(v) for v in self.entries]}


@dataclass(frozen=True)
class Step(SequenceSpec):
    """left for indices i < 0, right for i >= 0."""

    left: complex
    right: complex

    kind = "step"

    def __post_init__(self):
        object.__setattr__(self, "left", _as_complex(self.left))
        object.__setattr__(self, "right", _as_complex(self.right))

    def value_at(self, i: int) -> complex:
        return self.right if i >= 0 else self.left

    def values(self, a: int, b: int) -> np.ndarray:
        idx = np.arange(a, b + 1)
        return np.where(idx >= 0, self.right, self.left).astype(complex)

    def window(self, K: int) -> tuple[int, int]:
        _check_K(K)
        return (-K, K)

    def sup_abs(self) -> float:
        return max(abs(self.left), abs(self.right))

    def inf_abs(self) -> float:
        return min(abs(self.left), abs(self.right))

    def abs_spec(self) -> SequenceSpec:
        return Step(abs(self.left), abs(self.right))

    def subsample(self, n: int, j: int) -> SequenceSpec:
        # j + i*n >= 0 exactly when i >= 0 (since 0 <= j < n), so the
        # residue sequence is again a step at index 0.
        self._check_subsample(n, j)
        return self if n == 1 else Step(self.left, self.right)

    def to_obj(self) -> dict:
        return {"kind": "step", "left": _num_obj(self.left), "right": _num_obj(self.right)}


@dataclass(frozen=True)
class Explicit(SequenceSpec):
    """Finite table over [i_min, i_min + len - 1] with constant tails."""

    i_min: int
    table: tuple[complex, ...]
    left_tail: complex
    right_tail: complex

    kind = "explicit"

    def __post_init__(self):
        if len(self.table) == 0:
            raise SpecError("explicit sequence needs a non-empty table")
        object.__setattr__(self, "table", tuple(_as_complex(v) for v in self.table))
        object.__setattr__(self, "left_tail", _as_complex(self.left_tail))
        object.__setattr__(self, "right_tail", _as_complex(self.right_tail))

    @property
    def i_max(self) -> int:
        return self.i_min + len(self.table) - 1

    def value_at(self, i: int) -> complex:
        if i < self.i_min:
            return self.left_tail
        if i > self.i_max:
            return self.right_tail
        return self.table[i - self.i_min]

    def values(self, a: int, b: int) -> np.ndarray:
        idx = np.arange(a, b + 1)
        out = np.where(idx < self.i_min, self.left_tail, self.right_tail).astype(complex)
        lo = max(a, self.i_min)
        hi = min(b, self.i_max)
        if lo <= hi:
            out[lo - a : hi - a + 1] = np.asarray(self.table, dtype=complex)[
                lo - self.i_min : hi - self.i_min + 1
            ]
        return out

    def window(self, K: int) -> tuple[int, int]:
        _check_K(K)
        return (self.i_min - K, self.i_max + K)

    def sup_abs(self) -> float:
        return max(abs(self.left_tail), abs(self.right_tail), max(abs(v) for v in self.table))

    def inf_abs(self) -> float:
        return min(abs(self.left_tail), abs(self.right_tail), min(abs(v) for v in self.table))

    def abs_spec(self) -> SequenceSpec:
        return Explicit(
            self.i_min,
            tuple(abs(v) for v in self.table),
            abs(self.left_tail),
            abs(self.right_tail),
        )

    def subsample(self, n: int, j: int) -> SequenceSpec:
        self._check_subsample(n, j)
        if n == 1:
            return self
        lo = math.ceil((self.i_min - j) / n)
        hi = math.floor((self.i_max - j) / n)
        if lo > hi:
            # table skipped entirely; keep one anchor value so tails split correctly
            hi = lo
        vals = tuple(self.value_at(j + i * n) for i in range(lo, hi + 1))
        return Explicit(lo, vals, self.left_tail, self.right_tail)

    def to_obj(self) -> dict:
        return {
            "kind": "explicit",
            "i_min": self.i_min,
            "values": [_num_obj(v) for v in self.table],
            "left_tail": _num_obj(self.left_tail),
            "right_tail": _num_obj(self.right_tail),
        }


@dataclass(frozen=True)
class RandomSpan(Explicit):
    """Seeded random table over [i_min, i_max]: moduli uniform in
    [r_lo, r_hi], phases uniform in [0, 2pi).  Deterministic for a given
    seed, so runs replay exactly; outside the span the tails apply."""

    seed: int = 0
    modulus_range: tuple[float, float] = (0.5, 1.5)

    kind = "random"

    def __init__(self, seed, i_min, i_max, modulus_range, left_tail, right_tail):
        r_lo, r_hi = float(modulus_range[0]), float(modulus_range[1])
        if i_max < i_min:
            raise SpecError("random span needs i_min <= i_max")
        if not (0.0 <= r_lo <= r_hi):
            raise SpecError("random span needs 0 <= r_lo <= r_hi")
        size = i_max - i_min + 1
        rng = np.random.default_rng(int(seed))
        moduli = rng.uniform(r_lo, r_hi, size)
        phases = rng.uniform(0.0, 2.0 * np.pi, size)
        table = tuple(complex(m * np.cos(ph), m * np.sin(ph)) for m, ph in zip(moduli, phases))
        super().__init__(i_min=int(i_min), table=table,
                         left_tail=_as_complex(left_tail), right_tail=_as_complex(right_tail))
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "modulus_range", (r_lo, r_hi))

    def to_obj(self) -> dict:
        return {
            "kind": "random",
            "seed": self.seed,
            "i_min": self.i_min,
            "i_max": self.i_max,
            "modulus_range": [self.modulus_range[0], self.modulus_range[1]],
            "left_tail": _num_obj(self.left_tail),
            "right_tail": _num_obj(self.right_tail),
        }


def _check_K(K: int) -> None:
    if K < 1:
        raise SpecError(f"window length bound must be >= 1, got {K}")


def log_modulus_prefix(spec: SequenceSpec, a: int, b: int) -> np.ndarray:
    """Prefix sums of log-moduli over indices a..b inclusive.

    Returns P of length b - a + 2 with P[0] = 0 and
    P[j] = sum_{i=a}^{a+j-1} log|v_i|, using -inf once a zero value has
    been crossed.  A window product of moduli over [a+j, a+j+k-1] is
    exp(P[j+k] - P[j]); any window containing a zero must be treated as
    product 0 (numerator) or quotient +inf (denominator) by the caller,
    since the IEEE difference of two -inf prefixes is nan.
    """
    if b < a:
        raise SpecError("prefix range must satisfy a <= b")
    lv = log_abs(spec.values(a, b))
    out = np.empty(len(lv) + 1)
    out[0] = 0.0
    np.cumsum(lv, out=out[1:])
    return out


def window_log_sums(logvals: np.ndarray, k: int, n_starts: int) -> np.ndarray:
    """Sliding sums of k consecutive log-moduli for starts 0..n_starts-1.

    Exact -inf semantics: a window containing a -inf term sums to -inf
    (zero-count bookkeeping avoids nan from -inf prefix differences).
    """
    logvals = np.asarray(logvals, dtype=float)
    if len(logvals) < n_starts + k - 1:
        raise ValueError("logvals too short for requested windows")
    neg = np.isneginf(logvals)
    finite = np.where(neg, 0.0, logvals)
    P = np.concatenate(([0.0], np.cumsum(finite)))
    Z = np.concatenate(([0], np.cumsum(neg.astype(np.int64))))
    sums = P[k : k + n_starts] - P[:n_starts]
    dead = (Z[k : k + n_starts] - Z[:n_starts]) > 0
    return np.where(dead, -np.inf, sums)


def hull_window(specs: list[SequenceSpec], K: int) -> tuple[int, int]:
    """Joint start window for several sequences read at shared indices.

    The interval hull of the individual windows, padded by the lcm of any
    periods present so that tail windows of one sequence can align with
    every residue phase of another.
    """
    _check_K(K)
    a = min(s.window(K)[0] for s in specs)
    b = max(s.window(K)[1] for s in specs)
    pad = 1
    for s in specs:
        if s.period is not None:
            pad = pad * s.period // math.gcd(pad, s.period)
    return (a - pad, b + pad)


_KIND_KEYS = {
    "constant": {"kind", "value"},
    "periodic": {"kind", "values"},
    "step": {"kind", "left", "right"},
    "explicit": {"kind", "i_min", "values", "left_tail", "right_tail"},
    "random": {"kind", "seed", "i_min", "i_max", "modulus_range", "left_tail", "right_tail"},
}


def sequence_from_obj(obj: dict) -> SequenceSpec:
    """Parse the JSON form of a sequence; unknown fields are rejected."""
    if not isinstance(obj, dict):
        raise SpecError(f"sequence description must be an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in _KIND_KEYS:
        raise SpecError(f"unknown sequence kind {kind!r}")
    extra = set(obj) - _KIND_KEYS[kind]
    if extra:
        raise SpecError(f"unknown fields for {kind} sequence: {sorted(extra)}")
    missing = _KIND_KEYS[kind] - set(obj)
    if missing:
        raise SpecError(f"missing fields for {kind} sequence: {sorted(missing)}")
    if kind == "constant":
        return Constant(obj["value"])
    if kind == "periodic":
        if not isinstance(obj["values"], list) or not obj["values"]:
            raise SpecError("periodic 'values' must be a non-empty list")
        return Periodic(tuple(obj["values"]))
    if kind == "step":
        return Step(obj["left"], obj["right"])
    if kind == "explicit":
        if not isinstance(obj["values"], list) or not obj["values"]:
            raise SpecError("explicit 'values' must be a non-empty list")
        return Explicit(int(obj["i_min"]), tuple(obj["values"]),
                        obj["left_tail"], obj["right_tail"])
    mr = obj["modulus_range"]
    if not isinstance(mr, (list, tuple)) or len(mr) != 2:
        raise SpecError("random 'modulus_range' must be [r_lo, r_hi]")
    return RandomSpan(obj["seed"], int(obj["i_min"]), int(obj["i_max"]),
                      (mr[0], mr[1]), obj["left_tail"], obj["right_tail"])

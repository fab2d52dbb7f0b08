"""Operator model: a bilateral weighted n-shift plus a diagonal.

The operator acts on the standard two-sided basis as
T e_i = w_i e_{i+n} + d_i e_i.  Boundedness is structural here (all
sequence families are bounded), and invertibility of the shift part is
decided exactly from inf_i |w_i|.  Power norms reduce to maxima of window
products over the weight sequence's start window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError
from .sequences import SequenceSpec, log_abs, sequence_from_obj, window_log_sums

__all__ = [
    "ShiftModel",
    "norm_power",
    "shift_invertible",
    "normalize_phases",
    "spectral_radius_bounds",
    "inner_radius_bounds",
    "model_from_obj",
]


@dataclass(frozen=True)
class ShiftModel:
    """T = (weighted n-shift) + (diagonal).  Immutable; safe to share."""

    weights: SequenceSpec
    diagonals: SequenceSpec
    step: int = 1
    weight_sup: float = field(init=False)
    weight_inf: float = field(init=False)
    diag_sup: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.weights, SequenceSpec) or not isinstance(self.diagonals, SequenceSpec):
            raise SpecError("weights and diagonals must be sequence specs")
        if self.step < 1:
            raise SpecError(f"shift step must be >= 1, got {self.step}")
        object.__setattr__(self, "weight_sup", self.weights.sup_abs())
        object.__setattr__(self, "weight_inf", self.weights.inf_abs())
        object.__setattr__(self, "diag_sup", self.diagonals.sup_abs())

    @property
    def invertible_shift(self) -> bool:
        return self.weight_inf > 0.0

    def submodels(self) -> list["ShiftModel"]:
        """Residue-class 1-shift models; [self] when step == 1.

        For step n, basis vectors split into n invariant subspaces indexed
        by residue j, and on each one the operator is an ordinary weighted
        shift with weights w_{j+in} and diagonals d_{j+in}.
        """
        if self.step == 1:
            return [self]
        return [
            ShiftModel(self.weights.subsample(self.step, j),
                       self.diagonals.subsample(self.step, j), step=1)
            for j in range(self.step)
        ]

    def to_obj(self) -> dict:
        return {
            "weights": self.weights.to_obj(),
            "diagonals": self.diagonals.to_obj(),
            "step": self.step,
        }


def model_from_obj(obj: dict) -> ShiftModel:
    """Parse {"weights": ..., "diagonals": ..., "step": n}; strict fields."""
    if not isinstance(obj, dict):
        raise SpecError("model description must be an object")
    allowed = {"weights", "diagonals", "step"}
    extra = set(obj) - allowed
    if extra:
        raise SpecError(f"unknown model fields: {sorted(extra)}")
    if "weights" not in obj or "diagonals" not in obj:
        raise SpecError("model needs 'weights' and 'diagonals'")
    step = obj.get("step", 1)
    if not isinstance(step, int) or isinstance(step, bool):
        raise SpecError("model 'step' must be an integer")
    return ShiftModel(sequence_from_obj(obj["weights"]),
                      sequence_from_obj(obj["diagonals"]), step=step)


def shift_invertible(model: ShiftModel) -> bool:
    """True iff the shift part has a bounded inverse (inf |w_i| > 0)."""
    return model.invertible_shift


def _max_window_log(spec: SequenceSpec, k: int) -> float:
    """max over all starts i in Z of sum_{m<k} log|v_{i+m}|, exactly."""
    a, b = spec.window(k)
    lv = log_abs(spec.values(a, b + k - 1))
    return float(np.max(window_log_sums(lv, k, b - a + 1)))


def _min_window_log(spec: SequenceSpec, k: int) -> float:
    a, b = spec.window(k)
    lv = log_abs(spec.values(a, b + k - 1))
    return float(np.min(window_log_sums(lv, k, b - a + 1)))


def norm_power(model: ShiftModel, k: int) -> float:
    """Operator norm of the k-th power of the shift part.

    Equals the supremum over starts of the modulus of the k-fold forward
    weight product; computed exactly from the finite start window.
    """
    if k < 1:
        raise SpecError(f"power must be >= 1, got {k}")
    if model.step != 1:
        raise SpecError("norm_power requires step 1; use submodels() for n-shifts")
    return float(np.exp(_max_window_log(model.weights, k)))


def normalize_phases(model: ShiftModel) -> ShiftModel:
    """Replace weights by their moduli; diagonals unchanged.

    The original and normalized models are unitarily equivalent, so every
    spectral quantity computed downstream agrees between the two.
    """
    return ShiftModel(model.weights.abs_spec(), model.diagonals, step=model.step)


def _require_pure_shift(model: ShiftModel) -> None:
    if model.step != 1:
        raise SpecError("spectral radius bounds require step 1")
    if model.diag_sup != 0.0:
        raise SpecError("spectral radius bounds require identically zero diagonals")


def spectral_radius_bounds(model: ShiftModel, k_max: int) -> tuple[float, float]:
    """(estimate, upper bound) for the spectral radius of the shift part.

    r = lim_k ||S^k||^(1/k) = inf_k ||S^k||^(1/k), so every k gives a valid
    upper bound; the estimate is the k_max-th root.  Diagonals must be 0.
    """
    _require_pure_shift(model)
    if k_max < 1:
        raise SpecError("k_max must be >= 1")
    logs = [_max_window_log(model.weights, k) / k for k in range(1, k_max + 1)]
    return float(np.exp(logs[-1])), float(np.exp(min(logs)))


def inner_radius_bounds(model: ShiftModel, k_max: int) -> tuple[float, float]:
    """(estimate, lower bound) for the inner spectral edge 1/r(S^{-1}).

    ||S^{-k}|| is the reciprocal of the infimum k-fold weight product, so
    1/r(S^{-1}) = sup_k [inf-product]^(1/k) and every k gives a valid
    lower bound.  Requires an invertible shift and zero diagonals.
    """
    _require_pure_shift(model)
    if k_max < 1:
        raise SpecError("k_max must be >= 1")
    if not model.invertible_shift:
        raise SpecError("inner radius needs an invertible shift (inf |w| > 0)")
    logs = [_min_window_log(model.weights, k) / k for k in range(1, k_max + 1)]
    return float(np.exp(logs[-1])), float(np.exp(max(logs)))

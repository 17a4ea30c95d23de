#!/usr/bin/env python3
"""Relative L2 errors between predictions and reference fields."""

from typing import Optional, Union

import numpy as np

from ..reference.fields import Field
from ..utils.errors import InvalidArgumentError

FieldLike = Union[Field, np.ndarray]


def _values(field: FieldLike) -> np.ndarray:
    return field.values if isinstance(field, Field) else np.asarray(field, dtype=float)


def _check_meshes(pred: FieldLike, ref: FieldLike) -> None:
    if isinstance(pred, Field) and isinstance(ref, Field):
        if list(pred.axes) != list(ref.axes) or any(
                pred.axes[k].shape != ref.axes[k].shape
                or not np.allclose(pred.axes[k], ref.axes[k], rtol=0.0, atol=1e-12)
                for k in ref.axes):
            raise InvalidArgumentError("prediction and reference live on different meshes")
    if _values(pred).shape != _values(ref).shape:
        raise InvalidArgumentError(
            f"shape mismatch: prediction {_values(pred).shape}, reference {_values(ref).shape}")


def relative_l2(pred: FieldLike, ref: FieldLike, take_sqrt: bool = False,
                weights: Optional[np.ndarray] = None) -> float:
    """
    sum (pred - ref)^2 w / sum ref^2 w, square-rooted when ``take_sqrt``.

    Weights default to the reference's quadrature weights (unit weights for bare arrays).
    """
    _check_meshes(pred, ref)
    p, r = _values(pred), _values(ref)
    if weights is None:
        weights = ref.grid_weights() if isinstance(ref, Field) else np.ones(r.shape)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), r.shape)
    denominator = float(np.sum(r * r * weights))
    if denominator == 0.0:
        raise InvalidArgumentError("relative error against an identically zero reference")
    ratio = float(np.sum((p - r) ** 2 * weights)) / denominator
    return float(np.sqrt(ratio)) if take_sqrt else ratio


def both_errors(pred: FieldLike, ref: FieldLike,
                weights: Optional[np.ndarray] = None) -> dict:
    """The error as printed (no root) and its square root."""
    value = relative_l2(pred, ref, False, weights)
    return {'rel_l2': value, 'rel_l2_sqrt': float(np.sqrt(value))}

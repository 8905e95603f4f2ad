"""Input validation helpers shared by the function API and the estimators."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ParameterError, ValidationError

PROB_TOL = 1e-12


def as_bit_array(bits, length=None, name="bits"):
    """Coerce ``bits`` to a 1-D ``uint8`` array of zeros and ones.

    Accepts a :class:`~blockamp.bits.BitString`, a string of ``0``/``1``
    characters, or any integer sequence.
    """
    if hasattr(bits, "bits") and isinstance(getattr(bits, "bits"), np.ndarray):
        arr = bits.bits
    elif isinstance(bits, str):
        if not bits or set(bits) - {"0", "1"}:
            raise ValidationError(f"{name}: expected a non-empty 0/1 string")
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise ValidationError(f"{name}: expected a 1-D bit vector, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValidationError(f"{name}: entries must be 0 or 1")
        arr = arr.astype(np.uint8)
    if length is not None and arr.size != length:
        raise ParameterError(f"{name}: expected {length} bits, got {arr.size}")
    return arr


def check_bits(X, n_features=None):
    """Validate a 2-D array of bit rows, sklearn style.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_features)
        Each row is one bit string.
    n_features : int, optional
        Required row length.

    Returns
    -------
    ndarray of dtype uint8
    """
    X = check_array(X, dtype=None, ensure_2d=True)
    if not np.isin(X, (0, 1)).all():
        raise ValidationError("X must contain only 0/1 entries")
    if n_features is not None and X.shape[1] != n_features:
        raise ParameterError(f"X has {X.shape[1]} columns, expected {n_features}")
    return X.astype(np.uint8)


def check_probability_vector(p, name="probs"):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{name}: expected a non-empty 1-D vector")
    if (p < 0).any():
        raise ValidationError(f"{name}: negative entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{name}: sums to {p.sum()!r}, not 1")
    return p


def check_open_unit(value, name):
    if not 0.0 < value < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {value}")
    return float(value)

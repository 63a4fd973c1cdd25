"""Input validation helpers for the estimator API."""

import numpy as np
from sklearn.utils import check_array, check_random_state

from .data import ReturnSeries
from .model import check_series

__all__ = ["check_returns", "check_random_state", "as_seed"]


def check_returns(y, min_length=2) -> np.ndarray:
    """Coerce ``y`` to a finite 1-d float array.

    Accepts lists, numpy arrays, pandas objects, ``(n, 1)`` column arrays and
    :class:`ReturnSeries`.
    """
    if isinstance(y, ReturnSeries):
        y = y.values
    arr = check_array(y, ensure_2d=False, dtype=np.float64, ensure_all_finite=False)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return check_series(arr, min_length=min_length)


def as_seed(random_state):
    """Turn an sklearn-style ``random_state`` into an integer seed or None."""
    if random_state is None or isinstance(random_state, (int, np.integer)):
        return None if random_state is None else int(random_state)
    rs = check_random_state(random_state)
    return int(rs.randint(0, 2**31 - 1))

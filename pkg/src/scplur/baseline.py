"""Causal FIR least-squares (Wiener-approximation) forecaster."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InsufficientLengthError, InvalidConfigError, ShapeError, SingularSystemError

DEFAULT_LENGTH = 64
DEFAULT_RIDGE = 1e-6


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Taps ``w[0..L-1]``; ``w[0]`` multiplies the most recent input."""

    coefficients: np.ndarray
    ridge: float = DEFAULT_RIDGE

    def __post_init__(self):
        w = np.asarray(self.coefficients, dtype=float)
        if w.ndim != 1 or len(w) < 1:
            raise ShapeError("FIR coefficients must be a nonempty 1-D vector")
        if not np.all(np.isfinite(w)):
            raise ShapeError("FIR coefficients must be finite")
        object.__setattr__(self, "coefficients", w)

    @property
    def length(self) -> int:
        return len(self.coefficients)


def _lagged(inputs: np.ndarray, length: int) -> np.ndarray:
    """Rows ``[u[t], u[t-1], ..., u[t-L+1]]`` for ``t = L-1 .. n-1``."""
    return np.lib.stride_tricks.sliding_window_view(inputs, length)[:, ::-1]


def fit_fir(
    pairs: Iterable[tuple],
    length: int = DEFAULT_LENGTH,
    ridge: float = DEFAULT_RIDGE,
) -> FirFilter:
    """Ridge least-squares fit of ``target[t] ~ sum_l w[l] * input[t - l]``.

    Each element of ``pairs`` is an ``(input, target)`` pair of equal-length
    windows; rows start at ``t = L - 1`` so every regression row sees a full
    input history.  Rows from all pairs are pooled into one dense system.
    """
    if length < 1:
        raise InvalidConfigError(f"FIR length must be >= 1, got {length}")
    if ridge < 0:
        raise InvalidConfigError(f"ridge must be >= 0, got {ridge}")
    gram = np.zeros((length, length))
    rhs = np.zeros(length)
    rows = 0
    for inputs, target in pairs:
        u = np.asarray(inputs, dtype=float)
        v = np.asarray(target, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise ShapeError(f"input/target windows must be equal-length 1-D, got {u.shape} and {v.shape}")
        if len(u) < length:
            continue
        design = _lagged(u, length)
        gram += design.T @ design
        rhs += design.T @ v[length - 1 :]
        rows += len(design)
    if rows < length:
        raise InsufficientLengthError(f"{rows} regression rows for a length-{length} filter")
    gram[np.diag_indices(length)] += ridge
    if ridge == 0 and np.linalg.cond(gram) > 1e12:
        raise SingularSystemError("normal equations are rank deficient; use ridge > 0")
    try:
        w = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    return FirFilter(w, ridge)


def one_step_pairs(series) -> list:
    """``(input, target)`` pairs for a one-step-ahead predictor of ``series``."""
    s = np.asarray(series, dtype=float)
    return [(s[:-1], s[1:])]


def apply_fir(filt: FirFilter, inputs, warmup=None) -> np.ndarray:
    """Causal convolution of ``inputs`` with the filter.

    ``warmup`` supplies samples preceding ``inputs``; missing history is
    treated as zeros.  Output has the length of ``inputs``.
    """
    u = np.asarray(inputs, dtype=float)
    lead = np.zeros(filt.length - 1)
    if warmup is not None:
        tail = np.asarray(warmup, dtype=float)[-(filt.length - 1):] if filt.length > 1 else np.zeros(0)
        lead[len(lead) - len(tail):] = tail
    full = np.concatenate([lead, u])
    return np.convolve(full, filt.coefficients, mode="valid")


def predict_fir(filt: FirFilter, history, horizon: Optional[int] = None) -> np.ndarray:
    """Recursive multi-step forecast from the end of ``history``.

    The filter is read as a one-step-ahead predictor; each forecast is fed
    back as the newest input for the next step.  ``horizon`` defaults to the
    history length.
    """
    h = np.asarray(history, dtype=float)
    if h.ndim != 1 or len(h) < 1:
        raise ShapeError("history must be a nonempty 1-D series")
    steps = len(h) if horizon is None else int(horizon)
    w = filt.coefficients
    L = len(w)
    # buffer holds the newest L values, most recent first
    buf = np.zeros(L)
    recent = h[::-1][:L]
    buf[: len(recent)] = recent
    out = np.empty(steps)
    for t in range(steps):
        nxt = float(np.dot(w, buf))
        out[t] = nxt
        buf[1:] = buf[:-1]
        buf[0] = nxt
    return out

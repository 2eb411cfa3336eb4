"""Response matrix for excitation-counting detectors and its analytic inverse.

When a detector only reports how many of n qubits read 1, the (n+1) x (n+1)
response has elements

    L_ij = sum_q B(j, 1-p1, q) * B(n-j, p0, i-q),   max{0, i+j-n} <= q <= min{i, j},

with B(n, p, k) = C(n, k) p^k (1-p)^(n-k): of the j truly excited qubits q
survive, and i - q of the n - j unexcited ones flip up.  The inverse is the
same expression evaluated at the substituted parameters p0', p1' used for the
individual-qubit inverse, so no numerical matrix inversion is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .error_model import EPS_SINGULAR
from .errors import SingularModelError
from .reconstruct import Distribution

#: Exact integer binomial coefficients below this size, log-gamma above
#: (keeps the build stable for hundreds of qubits).
EXACT_COMB_LIMIT = 60


def binomial_pmf(n: int, p: float, k: np.ndarray | int) -> np.ndarray:
    """C(n, k) p^k (1-p)^(n-k) for integer k, valid for p outside [0, 1] too.

    The substituted inverse parameters are generally negative, so the sign is
    tracked separately on the log-gamma path.
    """
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    out = np.zeros(k.shape)
    ok = (k >= 0) & (k <= n)
    kk = k[ok]
    if n <= EXACT_COMB_LIMIT:
        comb = np.array([math.comb(n, int(x)) for x in kk], dtype=float)
        out[ok] = comb * np.power(p, kk) * np.power(1.0 - p, n - kk)
        return out
    log_comb = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(int(x) + 1) for x in kk])
        - np.array([math.lgamma(n - int(x) + 1) for x in kk])
    )
    with np.errstate(divide="ignore"):
        log_p = np.where(kk > 0, kk * np.log(np.abs(p)), 0.0)
        log_q = np.where(n - kk > 0, (n - kk) * np.log(np.abs(1.0 - p)), 0.0)
    sign = np.where((kk % 2 == 1) & (p < 0), -1.0, 1.0)
    sign *= np.where(((n - kk) % 2 == 1) & (1.0 - p < 0), -1.0, 1.0)
    zero = ((p == 0.0) & (kk > 0)) | ((p == 1.0) & (kk < n))
    out[ok] = np.where(zero, 0.0, sign * np.exp(log_comb + log_p + log_q))
    return out


def response_element(n: int, p0: float, p1: float, i: int, j: int) -> float:
    """Probability of recording i excitations when j qubits are truly excited."""
    lo = max(0, i + j - n)
    hi = min(i, j)
    if hi < lo:
        return 0.0
    q = np.arange(lo, hi + 1)
    return float(np.sum(binomial_pmf(j, 1.0 - p1, q) * binomial_pmf(n - j, p0, i - q)))


def response_matrix(n: int, p0: float, p1: float) -> np.ndarray:
    """(n+1) x (n+1) matrix with columns indexed by the true excitation count."""
    L = np.empty((n + 1, n + 1))
    for j in range(n + 1):
        for i in range(n + 1):
            L[i, j] = response_element(n, p0, p1, i, j)
    return L


@dataclass(frozen=True)
class CollectiveResponse:
    """Response matrix for a uniform-rate excitation-counting detector."""

    n: int
    p0: float
    p1: float
    matrix: np.ndarray


def build_response(n: int, p0: float, p1: float) -> CollectiveResponse:
    if n < 1:
        raise ValueError("need at least one qubit")
    if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0):
        raise ValueError(f"flip rates ({p0}, {p1}) outside [0, 1]")
    return CollectiveResponse(n=n, p0=p0, p1=p1, matrix=response_matrix(n, p0, p1))


def build_inverse_response(n: int, p0: float, p1: float) -> np.ndarray:
    """Analytic inverse: the response expression at the substituted parameters.

    Entries are not probabilities, so a bare matrix is returned.
    """
    s = p0 + p1 - 1.0
    if abs(s) <= EPS_SINGULAR:
        raise SingularModelError(f"p0 + p1 = {p0 + p1} is 1; collective response is singular")
    return response_matrix(n, p0 / s, p1 / s)


@dataclass(frozen=True)
class CollectiveCounts:
    """Shots per recorded excitation number; entry j = shots that read j ones."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) < 2:
            raise ValueError("need counts for 0..n excitations with n >= 1")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")
        if sum(self.counts) < 1:
            raise ValueError("counts record is empty")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    @property
    def shots(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class UnfoldResult:
    """Unfolded excitation distribution plus the conditioning of the response."""

    distribution: Distribution
    condition_number: float


def unfold_collective(counts: CollectiveCounts, p0: float, p1: float) -> UnfoldResult:
    """Reconstruct the true excitation distribution from recorded excitation counts.

    Error bars follow the same propagation rule as the individual-addressing
    path, with the analytic inverse response in place of the tensored inverse.
    The condition number of the response is reported alongside, since the
    inversion quality degrades as n * p grows.
    """
    n = counts.n
    n_shots = counts.shots
    f = np.asarray(counts.counts, dtype=float) / n_shots
    forward = build_response(n, p0, p1)
    inv = build_inverse_response(n, p0, p1)
    g = inv @ f
    radicand = (inv * inv) @ f - g * g
    clamped = tuple(int(i) for i in np.nonzero(radicand < 0)[0])
    sigmas = np.sqrt(np.clip(radicand, 0.0, None) / n_shots)
    dist = Distribution(values=g, sigmas=sigmas, shots=n_shots, clamped=clamped)
    return UnfoldResult(distribution=dist, condition_number=float(np.linalg.cond(forward.matrix)))


__all__ = [
    "EXACT_COMB_LIMIT",
    "binomial_pmf",
    "response_element",
    "response_matrix",
    "CollectiveResponse",
    "CollectiveCounts",
    "UnfoldResult",
    "build_response",
    "build_inverse_response",
    "unfold_collective",
]

"""Raw counts -> measured frequencies -> unfolded true distribution, with error bars.

Measured frequencies f_i = N_i / N carry binomial error bars
sqrt(f_i (1 - f_i) / N).  Unfolding applies the inverse response map and
propagates the bars as

    sigma_g_i = sqrt( [ sum_j (Minv_ij)^2 f_j  -  g_i^2 ] / N ),

where the squared-element sum is evaluated with the elementwise-squared
inverse factors, again as an O(n 2^n) tensor contraction.  Unfolded entries
may come out slightly negative; they are returned as-is so that corrected
operator expectations stay unbiased, with an optional Euclidean projection
onto the probability simplex for callers that need a bona fide distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .error_model import DetectorModel, apply_factored, inverse_factor_matrices
from .errors import ResourceLimitError

#: Full-distribution reconstruction densifies 2^n vectors; refuse beyond this.
#: Operator-expectation paths in `observables` iterate observed outcomes only
#: and have no such limit.
DENSE_LIMIT_QUBITS = 26


@dataclass(frozen=True)
class CountsRecord:
    """Shot counts per outcome index for one measurement setting.

    `setting` is a per-qubit basis string over {X, Y, Z}, qubit 0 leftmost
    (e.g. "XZZ" measures X on qubit 0 and Z on qubits 1, 2).
    """

    n: int
    counts: dict[int, int]
    setting: str

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if len(self.setting) != self.n or any(c not in "XYZ" for c in self.setting):
            raise ValueError(f"setting {self.setting!r} is not a length-{self.n} XYZ string")
        total = 0
        for idx, c in self.counts.items():
            if not 0 <= idx < (1 << self.n):
                raise ValueError(f"outcome index {idx} out of range for {self.n} qubits")
            if c < 0:
                raise ValueError(f"negative count {c} at outcome {idx}")
            total += c
        if total < 1:
            raise ValueError("counts record is empty")

    @property
    def shots(self) -> int:
        return sum(self.counts.values())

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(outcome indices, counts) as sorted numpy arrays."""
        if not self.counts:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        idx = np.array(sorted(self.counts), dtype=np.int64)
        cnt = np.array([self.counts[int(i)] for i in idx], dtype=np.int64)
        return idx, cnt

    @classmethod
    def from_outcomes(cls, n: int, outcomes: np.ndarray, setting: str) -> "CountsRecord":
        """Build a record from one outcome index per shot."""
        values, counts = np.unique(np.asarray(outcomes, dtype=np.int64), return_counts=True)
        return cls(n=n, counts={int(v): int(c) for v, c in zip(values, counts)}, setting=setting)


@dataclass(frozen=True)
class Distribution:
    """Probability-like vector with per-entry one-sigma error bars."""

    values: np.ndarray
    sigmas: np.ndarray
    shots: int
    clamped: tuple[int, ...] = field(default=())
    projected: bool = False

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.sigmas, dtype=float)
        if v.shape != s.shape or v.ndim != 1:
            raise ValueError("values and sigmas must be 1-D arrays of equal length")
        if np.any(s < 0):
            raise ValueError("sigmas must be nonnegative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sigmas", s)


def densify(record: CountsRecord) -> np.ndarray:
    """Counts map -> dense frequency vector of length 2^n."""
    if record.n > DENSE_LIMIT_QUBITS:
        raise ResourceLimitError(
            f"full-distribution path refuses n = {record.n} > {DENSE_LIMIT_QUBITS};"
            " use operator expectations instead"
        )
    f = np.zeros(1 << record.n)
    idx, cnt = record.index_arrays()
    f[idx] = cnt / record.shots
    return f


def frequencies(record: CountsRecord) -> Distribution:
    """Measured frequencies with binomial error bars."""
    f = densify(record)
    n_shots = record.shots
    return Distribution(values=f, sigmas=np.sqrt(f * (1.0 - f) / n_shots), shots=n_shots)


def correct(record: CountsRecord, model: DetectorModel, project: bool = False) -> Distribution:
    """Unfold measured counts through the inverse response map, with error bars.

    With a trivial model this reduces exactly to `frequencies`.  Entries where
    sampling fluctuation drives the variance radicand below zero are clamped
    to zero and listed in `clamped` (for genuine frequency vectors the
    radicand is nonnegative by Cauchy-Schwarz, so only float fuzz lands here).
    """
    if model.n != record.n:
        raise ValueError(f"model has {model.n} qubits, counts have {record.n}")
    f = densify(record)
    n_shots = record.shots
    inv = inverse_factor_matrices(model)
    g = apply_factored(inv, f)
    second_moment = apply_factored([a * a for a in inv], f)
    radicand = second_moment - g * g
    clamped = tuple(int(i) for i in np.nonzero(radicand < 0)[0])
    sigmas = np.sqrt(np.clip(radicand, 0.0, None) / n_shots)
    if project:
        g = project_to_simplex(g)
    return Distribution(values=g, sigmas=sigmas, shots=n_shots, clamped=clamped, projected=project)


def correct_distribution(f: np.ndarray, model: DetectorModel, shots: int) -> Distribution:
    """Unfold an already-dense frequency vector (same math as `correct`)."""
    f = np.asarray(f, dtype=float)
    inv = inverse_factor_matrices(model)
    g = apply_factored(inv, f)
    radicand = apply_factored([a * a for a in inv], f) - g * g
    clamped = tuple(int(i) for i in np.nonzero(radicand < 0)[0])
    sigmas = np.sqrt(np.clip(radicand, 0.0, None) / shots)
    return Distribution(values=g, sigmas=sigmas, shots=shots, clamped=clamped)


def project_to_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sorting algorithm)."""
    x = np.asarray(values, dtype=float)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


__all__ = [
    "DENSE_LIMIT_QUBITS",
    "CountsRecord",
    "Distribution",
    "densify",
    "frequencies",
    "correct",
    "correct_distribution",
    "project_to_simplex",
]

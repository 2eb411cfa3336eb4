"""Per-qubit readout flip-error model and its tensored n-qubit response map.

A single detector misreports 0 as 1 with probability p0 and 1 as 0 with
probability p1, which is the column-stochastic matrix

    D = [[1-p0,  p1 ],
         [ p0 , 1-p1]].

For n independently read qubits the full 2^n x 2^n response is the tensor
product of the per-qubit matrices, so it is never materialized: applying it
(or its inverse) to a distribution costs O(n * 2^n) via n single-qubit
contractions.  The inverse has the same tensored form with the substituted
parameters

    p0' = p0 / (p0 + p1 - 1),    p1' = p1 / (p0 + p1 - 1),

which exists whenever p0 + p1 != 1 on every qubit.  p0' and p1' are generally
outside [0, 1]; they are bookkeeping parameters, not probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import NoDataError, SingularModelError
from .util import bits_to_index

if TYPE_CHECKING:
    from .reconstruct import CountsRecord

#: |p0 + p1 - 1| at or below this is treated as singular; beyond it the inversion
#: amplifies noise past any practical use.
EPS_SINGULAR = 1e-9


@dataclass(frozen=True)
class DetectorModel:
    """Ordered per-qubit flip probabilities (p0, p1), qubit 0 first."""

    per_qubit: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.per_qubit) < 1:
            raise ValueError("model needs at least one qubit")
        clean = []
        for k, (p0, p1) in enumerate(self.per_qubit):
            p0, p1 = float(p0), float(p1)
            if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0):
                raise ValueError(f"qubit {k}: flip rates ({p0}, {p1}) outside [0, 1]")
            clean.append((p0, p1))
        object.__setattr__(self, "per_qubit", tuple(clean))

    @classmethod
    def uniform(cls, n: int, p0: float, p1: float | None = None) -> "DetectorModel":
        """Same rates on every qubit; p1 defaults to p0."""
        if p1 is None:
            p1 = p0
        return cls(tuple((p0, p1) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.per_qubit)

    @property
    def p0(self) -> np.ndarray:
        return np.array([p for p, _ in self.per_qubit])

    @property
    def p1(self) -> np.ndarray:
        return np.array([p for _, p in self.per_qubit])

    def is_uniform_symmetric(self) -> bool:
        """True when every qubit has p0 == p1 == the shared rate p."""
        p00, p10 = self.per_qubit[0]
        return all(p0 == p00 and p1 == p00 for p0, p1 in self.per_qubit) and p00 == p10

    def require_invertible(self) -> None:
        s = self.p0 + self.p1 - 1.0
        bad = np.nonzero(np.abs(s) <= EPS_SINGULAR)[0]
        if bad.size:
            raise SingularModelError(
                f"p0 + p1 = 1 on qubit(s) {bad.tolist()}; response map is singular"
            )

    def inverted_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """(p0', p1') per qubit; raises SingularModelError when undefined."""
        self.require_invertible()
        s = self.p0 + self.p1 - 1.0
        return self.p0 / s, self.p1 / s


def single_qubit_matrix(model: DetectorModel, qubit: int) -> np.ndarray:
    """Column-stochastic 2x2 response of one detector."""
    p0, p1 = model.per_qubit[qubit]
    return np.array([[1.0 - p0, p1], [p0, 1.0 - p1]])


def single_qubit_inverse(model: DetectorModel, qubit: int) -> np.ndarray:
    """Analytic 2x2 inverse, same form as the forward matrix with primed rates."""
    p0p, p1p = model.inverted_rates()
    a, b = p0p[qubit], p1p[qubit]
    return np.array([[1.0 - a, b], [a, 1.0 - b]])


def factor_matrices(model: DetectorModel) -> list[np.ndarray]:
    return [single_qubit_matrix(model, k) for k in range(model.n)]


def inverse_factor_matrices(model: DetectorModel) -> list[np.ndarray]:
    model.require_invertible()
    return [single_qubit_inverse(model, k) for k in range(model.n)]


def apply_factored(mats: Sequence[np.ndarray], vec: np.ndarray) -> np.ndarray:
    """Apply the tensor product of 2x2 factors (qubit k = bit k) to vectors.

    Accepts a single length-2^n vector or a batch of shape (m, 2^n); never
    builds the 2^n x 2^n matrix.
    """
    n = len(mats)
    v = np.asarray(vec, dtype=float)
    single = v.ndim == 1
    if single:
        v = v[None, :]
    if v.shape[1] != 1 << n:
        raise ValueError(f"vector length {v.shape[1]} != 2**{n}")
    m = v.shape[0]
    for k, a in enumerate(mats):
        lead = 1 << (n - 1 - k)
        trail = 1 << k
        v = np.einsum("ab,mxbz->mxaz", a, v.reshape(m, lead, 2, trail)).reshape(m, 1 << n)
    return v[0] if single else v


def apply_m(model: DetectorModel, g: np.ndarray) -> np.ndarray:
    """Distort a true distribution g into the recorded one f = (D_1 (x) ... (x) D_n) g."""
    return apply_factored(factor_matrices(model), g)


def apply_m_inverse(model: DetectorModel, f: np.ndarray) -> np.ndarray:
    """Undo the distortion: g = (D_1^-1 (x) ... (x) D_n^-1) f.

    The result sums to sum(f) (each inverse factor has unit column sums) but
    individual entries may be negative: linear inversion is unbiased, not
    positivity-preserving.
    """
    return apply_factored(inverse_factor_matrices(model), f)


def m_element(model: DetectorModel, j: int, i: int) -> float:
    """Probability of recording outcome j when the true outcome is i."""
    n = model.n
    for name, idx in (("j", j), ("i", i)):
        if not 0 <= idx < (1 << n):
            raise ValueError(f"outcome {name}={idx} out of range for {n} qubits")
    prob = 1.0
    for k in range(n):
        d = single_qubit_matrix(model, k)
        prob *= d[(j >> k) & 1, (i >> k) & 1]
    return prob


@dataclass(frozen=True)
class CalibrationResult:
    """Estimated model plus per-rate binomial standard errors and exposures."""

    model: DetectorModel
    p0_stderr: tuple[float, ...]
    p1_stderr: tuple[float, ...]
    shots_at_zero: tuple[int, ...]
    shots_at_one: tuple[int, ...]


def calibrate(records: Iterable[tuple[int | str, "CountsRecord"]]) -> CalibrationResult:
    """Estimate per-qubit flip rates from runs with known computational-basis inputs.

    Each record pairs the known prepared bitstring (index or qubit-0-leftmost
    string) with the raw counts read back.  Every qubit must be exposed to 0 in
    at least one record (for p0) and to 1 in at least one record (for p1);
    otherwise NoDataError says which rates are uncovered.  Rates are plain
    frequency estimates with sqrt(p(1-p)/N) standard errors; a never-observed
    flip is reported as exactly 0 with a zero error bar.
    """
    records = list(records)
    if not records:
        raise NoDataError("no calibration records supplied")
    n = records[0][1].n
    exposures = np.zeros((n, 2), dtype=np.int64)  # shots with known bit 0 / 1
    flips = np.zeros((n, 2), dtype=np.int64)  # read back as the opposite bit
    for known, record in records:
        if record.n != n:
            raise ValueError(f"mixed qubit counts in calibration records: {record.n} != {n}")
        known_idx = known if isinstance(known, int) else bits_to_index(str(known))
        if not 0 <= known_idx < (1 << n):
            raise ValueError(f"known state {known} out of range for {n} qubits")
        for outcome, shots in record.counts.items():
            if shots == 0:
                continue
            for k in range(n):
                truth = (known_idx >> k) & 1
                read = (outcome >> k) & 1
                exposures[k, truth] += shots
                if read != truth:
                    flips[k, truth] += shots
    missing = []
    for k in range(n):
        if exposures[k, 0] == 0:
            missing.append(f"qubit {k}: p0 (never prepared in 0)")
        if exposures[k, 1] == 0:
            missing.append(f"qubit {k}: p1 (never prepared in 1)")
    if missing:
        raise NoDataError(
            "calibration cannot estimate " + "; ".join(missing)
            + "; supply runs covering both input values (e.g. all-zeros and all-ones)"
        )
    rates = flips / exposures
    stderr = np.sqrt(rates * (1.0 - rates) / exposures)
    model = DetectorModel(tuple((rates[k, 0], rates[k, 1]) for k in range(n)))
    return CalibrationResult(
        model=model,
        p0_stderr=tuple(stderr[:, 0]),
        p1_stderr=tuple(stderr[:, 1]),
        shots_at_zero=tuple(int(x) for x in exposures[:, 0]),
        shots_at_one=tuple(int(x) for x in exposures[:, 1]),
    )


def explicit_matrix(model: DetectorModel, inverse: bool = False) -> np.ndarray:
    """Dense 2^n x 2^n response (test/diagnostic use only; refuses n > 12)."""
    if model.n > 12:
        raise ValueError("explicit matrix limited to n <= 12; use the factored application")
    mats = inverse_factor_matrices(model) if inverse else factor_matrices(model)
    out = np.array([[1.0]])
    for a in reversed(mats):  # qubit 0 is the least-significant bit
        out = np.kron(out, a)
    return out


__all__ = [
    "EPS_SINGULAR",
    "DetectorModel",
    "CalibrationResult",
    "single_qubit_matrix",
    "single_qubit_inverse",
    "factor_matrices",
    "inverse_factor_matrices",
    "apply_factored",
    "apply_m",
    "apply_m_inverse",
    "m_element",
    "calibrate",
    "explicit_matrix",
]

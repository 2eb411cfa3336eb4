"""Corrected expectation values of diagonal multi-qubit observables.

A Pauli string measured in its own eigenbasis is diagonal with per-outcome
values prod_k (+-1); a readout flip on qubit k damps each non-identity factor.
Replacing the observable by a corrected one whose per-qubit rows are

    diag(sigma) . Dk^-1  =  [1 - 2 p0', -(1 - 2 p1')]      (non-identity factor)
                            [1, 1]                          (identity factor)

makes its average over the *distorted* frequencies equal the true expectation.
For p0 = p1 = p this collapses to the scalar scale (1 - 2p)^(-n_p) where n_p
is the support of the string, so the statistical cost depends on the support,
not on the total qubit number.

The same term-by-term correction handles collective-spin moments, the spin
squeezing parameter, and graph-state entanglement witnesses, where products of
stabilizers are expanded into subset Pauli strings each carrying its own
support-dependent factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .collective import CollectiveCounts
from .error_model import DetectorModel
from .errors import DegenerateMeanSpinError, SettingMismatchError, SingularModelError
from .graphs import GraphSpec
from .reconstruct import CountsRecord
from .util import parity_signs, popcount

_FACTORS = "IXYZ"

# single-qubit products: (a, b) -> (a*b as factor, t with a*b = i^t * factor)
_PRODUCT_TABLE = {
    ("X", "Y"): ("Z", 1),
    ("Y", "X"): ("Z", 3),
    ("Y", "Z"): ("X", 1),
    ("Z", "Y"): ("X", 3),
    ("Z", "X"): ("Y", 1),
    ("X", "Z"): ("Y", 3),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli factors, qubit k = factors[k]."""

    n: int
    factors: str
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        if len(self.factors) != self.n or any(c not in _FACTORS for c in self.factors):
            raise ValueError(f"factors {self.factors!r} is not a length-{self.n} IXYZ string")

    @property
    def support(self) -> int:
        """Number of non-identity factors."""
        return sum(1 for c in self.factors if c != "I")

    @property
    def support_mask(self) -> int:
        return sum(1 << k for k, c in enumerate(self.factors) if c != "I")

    def outcome_values(self, indices: np.ndarray) -> np.ndarray:
        """Diagonal values in the string's own eigenbasis, one per outcome index."""
        return self.coefficient * parity_signs(indices, self.support_mask)


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product of two Pauli strings; raises if the result is not real."""
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} != {b.n}")
    phase = 0
    out = []
    for fa, fb in zip(a.factors, b.factors):
        if fa == "I":
            out.append(fb)
        elif fb == "I":
            out.append(fa)
        elif fa == fb:
            out.append("I")
        else:
            factor, t = _PRODUCT_TABLE[(fa, fb)]
            out.append(factor)
            phase = (phase + t) % 4
    if phase % 2:
        raise ValueError(f"product of {a.factors} and {b.factors} has imaginary phase")
    sign = 1.0 if phase == 0 else -1.0
    return PauliString(a.n, "".join(out), sign * a.coefficient * b.coefficient)


def validate_setting(record: CountsRecord, obs: PauliString) -> None:
    """Counts must come from the eigenbasis of every non-identity factor."""
    if record.n != obs.n:
        raise ValueError(f"observable has {obs.n} qubits, counts have {record.n}")
    for k, c in enumerate(obs.factors):
        if c != "I" and record.setting[k] != c:
            raise SettingMismatchError(
                f"observable needs {c} on qubit {k} but counts were taken in"
                f" setting {record.setting!r}"
            )


def _mean_and_sigma(values: np.ndarray, weights: np.ndarray, shots: int) -> tuple[float, float]:
    mean = float(np.dot(weights, values))
    var = float(np.dot(weights, values * values)) - mean * mean
    return mean, math.sqrt(max(var, 0.0) / shots)


def expect_raw(record: CountsRecord, obs: PauliString) -> tuple[float, float]:
    """Uncorrected expectation and its standard error from raw counts."""
    validate_setting(record, obs)
    idx, cnt = record.index_arrays()
    return _mean_and_sigma(obs.outcome_values(idx), cnt / record.shots, record.shots)


@dataclass(frozen=True)
class CorrectedObservable:
    """Per-qubit corrected rows; `scale` is set when they reduce to a scalar.

    The reduction happens whenever every supported qubit has p0 == p1, in which
    case the corrected observable is scale * original with
    scale = prod_k 1/(1 - 2 p_k) over supported qubits.
    """

    obs: PauliString
    rows: np.ndarray  # (n, 2)
    scale: float | None

    def outcome_values(self, indices: np.ndarray) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if self.scale is not None:
            return self.scale * self.obs.outcome_values(idx)
        vals = np.full(idx.shape, self.obs.coefficient)
        for k, c in enumerate(self.obs.factors):
            if c == "I":
                continue
            bits = (idx >> k) & 1
            vals = vals * np.where(bits == 1, self.rows[k, 1], self.rows[k, 0])
        return vals


def correction_factor(obs: PauliString, model: DetectorModel) -> CorrectedObservable:
    """Corrected form of a diagonal observable under the given detector model."""
    if model.n != obs.n:
        raise ValueError(f"observable has {obs.n} qubits, model has {model.n}")
    p0p, p1p = model.inverted_rates()
    rows = np.ones((obs.n, 2))
    scalar = True
    scale = 1.0
    for k, c in enumerate(obs.factors):
        if c == "I":
            continue
        rows[k, 0] = 1.0 - 2.0 * p0p[k]
        rows[k, 1] = -(1.0 - 2.0 * p1p[k])
        p0, p1 = model.per_qubit[k]
        if p0 == p1:
            scale /= 1.0 - 2.0 * p0
        else:
            scalar = False
    return CorrectedObservable(obs=obs, rows=rows, scale=scale if scalar else None)


def expect_corrected(
    record: CountsRecord, obs: PauliString, model: DetectorModel
) -> tuple[float, float]:
    """True expectation recovered from distorted counts, with its standard error."""
    validate_setting(record, obs)
    corrected = correction_factor(obs, model)
    idx, cnt = record.index_arrays()
    return _mean_and_sigma(corrected.outcome_values(idx), cnt / record.shots, record.shots)


def expect_raw_from_probs(probs: np.ndarray, obs: PauliString) -> float:
    """Exact-distribution variant of expect_raw (no shot noise, no bars)."""
    idx = np.arange(len(probs), dtype=np.int64)
    return float(np.dot(probs, obs.outcome_values(idx)))


def expect_corrected_from_probs(probs: np.ndarray, obs: PauliString, model: DetectorModel) -> float:
    """Exact-distribution variant of expect_corrected."""
    idx = np.arange(len(probs), dtype=np.int64)
    return float(np.dot(probs, correction_factor(obs, model).outcome_values(idx)))


# ---------------------------------------------------------------------------
# graph-state stabilizers and the entanglement witness
# ---------------------------------------------------------------------------


def stabilizer_generators(graph: GraphSpec) -> list[PauliString]:
    """One generator per vertex: X there, Z on its neighbors."""
    gens = []
    for k in range(graph.n):
        factors = ["I"] * graph.n
        factors[k] = "X"
        for j in graph.neighbors(k):
            factors[j] = "Z"
        gens.append(PauliString(graph.n, "".join(factors)))
    return gens


def subset_products(gens: Sequence[PauliString]) -> list[PauliString]:
    """Products of every subset of generators, indexed by subset bitmask."""
    if not gens:
        raise ValueError("no generators")
    n = gens[0].n
    prods: list[PauliString] = [PauliString(n, "I" * n)] * (1 << len(gens))
    for mask in range(1, 1 << len(gens)):
        low = (mask & -mask).bit_length() - 1
        prods[mask] = pauli_multiply(prods[mask ^ (1 << low)], gens[low])
    return prods


def class_outcome_values(
    indices: np.ndarray,
    graph: GraphSpec,
    color: int,
    model: DetectorModel | None = None,
) -> np.ndarray:
    """Per-outcome value of prod_{k in class} (S_k + 1)/2, one entry per index.

    Without a model this is the 0/1 projector (all class stabilizers read +1).
    With a model the product is expanded into its 2^m stabilizer-subset Pauli
    strings, each corrected by its own support-dependent factor, so averaging
    against distorted frequencies estimates the true class-product expectation.
    """
    idx = np.asarray(indices, dtype=np.int64)
    gens = stabilizer_generators(graph)
    members = graph.color_class(color)
    if model is None:
        ok = np.ones(idx.shape, dtype=bool)
        for k in members:
            ok &= parity_signs(idx, gens[k].support_mask) > 0
        return ok.astype(float)
    vals = np.zeros(idx.shape)
    for term in subset_products([gens[k] for k in members]):
        vals += correction_factor(term, model).outcome_values(idx)
    return vals / (1 << len(members))


def color_class_product(
    record: CountsRecord,
    graph: GraphSpec,
    color: int,
    model: DetectorModel | None = None,
) -> tuple[float, float]:
    """Expectation of prod_{k in class} (S_k + 1)/2 from counts, with error bar.

    Raw (model None): per-shot projector, binomial bar.  Corrected: subset
    expansion evaluated per shot, so the bar is the empirical standard error
    of the single per-shot estimator.  Summing per-term variances instead
    would under-cover badly: all 2^m terms ride on the same shots and are
    positively correlated (checked against bootstrap resampling).
    """
    gens = stabilizer_generators(graph)
    members = graph.color_class(color)
    for k in members:
        validate_setting(record, gens[k])
    idx, cnt = record.index_arrays()
    weights = cnt / record.shots
    return _mean_and_sigma(
        class_outcome_values(idx, graph, color, model), weights, record.shots
    )


def witness_value(
    class_products: Mapping[int, tuple[float, float]], graph: GraphSpec
) -> tuple[float, float]:
    """Genuine-multipartite-entanglement witness from per-class product expectations.

    W = 3 - 2 * sum over color classes; negative values certify genuine
    n-qubit entanglement.  Per-class bars combine in quadrature (independent
    settings).
    """
    missing = [c for c in graph.colors if c not in class_products]
    if missing:
        raise SettingMismatchError(f"no measurement supplied for color class(es) {missing}")
    total = sum(class_products[c][0] for c in graph.colors)
    var = sum(class_products[c][1] ** 2 for c in graph.colors)
    return 3.0 - 2.0 * total, 2.0 * math.sqrt(var)


def witness_from_counts(
    records: Mapping[int, CountsRecord],
    graph: GraphSpec,
    model: DetectorModel | None = None,
) -> tuple[float, float]:
    """Witness straight from one counts record per color class."""
    missing = [c for c in graph.colors if c not in records]
    if missing:
        raise SettingMismatchError(f"no counts supplied for color class(es) {missing}")
    products = {
        color: color_class_product(records[color], graph, color, model)
        for color in graph.colors
    }
    return witness_value(products, graph)


# ---------------------------------------------------------------------------
# collective-spin moments and spin squeezing
# ---------------------------------------------------------------------------


def excitation_weights(
    counts: CountsRecord | CollectiveCounts,
) -> tuple[int, np.ndarray, int]:
    """(n, weights over excitation number 0..n, shots) from either record kind."""
    if isinstance(counts, CollectiveCounts):
        w = np.asarray(counts.counts, dtype=float) / counts.shots
        return counts.n, w, counts.shots
    idx, cnt = counts.index_arrays()
    w = np.bincount(popcount(idx), weights=cnt, minlength=counts.n + 1)
    return counts.n, w / counts.shots, counts.shots


@dataclass(frozen=True)
class JzMoments:
    """First and second moments of J_z = sum_k sigma_k^z / 2, raw and corrected."""

    n: int
    shots: int
    p: float
    jz: float
    jz2: float
    sigma_jz: float
    sigma_jz2: float
    jz_corrected: float
    jz2_corrected: float
    sigma_jz_corrected: float
    sigma_jz2_corrected: float


def jz_moments_corrected_weights(weights: np.ndarray, p: float, shots: int = 1) -> JzMoments:
    """Same as jz_moments_corrected, from an excitation-number weight vector.

    Exact (infinite-shot) inputs pass their true distribution here; `shots`
    only scales the error bars.
    """
    if abs(1.0 - 2.0 * p) <= 1e-12:
        raise SingularModelError("p = 0.5 leaves no collective signal to correct")
    w = np.asarray(weights, dtype=float)
    n = len(w) - 1
    v = n / 2.0 - np.arange(n + 1, dtype=float)
    jz = float(np.dot(w, v))
    jz2 = float(np.dot(w, v * v))
    sigma_jz = math.sqrt(max(jz2 - jz * jz, 0.0) / shots)
    jz4 = float(np.dot(w, v**4))
    sigma_jz2 = math.sqrt(max(jz4 - jz2 * jz2, 0.0) / shots)
    c = 1.0 - 2.0 * p
    return JzMoments(
        n=n,
        shots=shots,
        p=p,
        jz=jz,
        jz2=jz2,
        sigma_jz=sigma_jz,
        sigma_jz2=sigma_jz2,
        jz_corrected=jz / c,
        jz2_corrected=(jz2 - n * p * (1.0 - p)) / (c * c),
        sigma_jz_corrected=sigma_jz / abs(c),
        sigma_jz2_corrected=sigma_jz2 / (c * c),
    )


def jz_moments_corrected(
    counts: CountsRecord | CollectiveCounts, p: float
) -> JzMoments:
    """Measured J_z moments and their flip-corrected values (uniform rate p).

    An outcome with m excitations sits at J_z = n/2 - m.  The first moment
    rescales by (1-2p)^-1; the second moment first sheds the flip-noise floor
    n p (1-p) and then rescales by (1-2p)^-2.
    """
    _, w, shots = excitation_weights(counts)
    return jz_moments_corrected_weights(w, p, shots)


@dataclass(frozen=True)
class SqueezingInput:
    """Counts in the squeezing (Z) and mean-spin (X) bases plus the detector model."""

    counts_z: CountsRecord | CollectiveCounts
    counts_x: CountsRecord | CollectiveCounts
    n: int
    model: DetectorModel

    def uniform_rate(self) -> float:
        pairs = set(self.model.per_qubit)
        if len(pairs) != 1 or self.model.per_qubit[0][0] != self.model.per_qubit[0][1]:
            raise ValueError("closed-form squeezing correction needs uniform p0 == p1")
        return self.model.per_qubit[0][0]


@dataclass(frozen=True)
class SqueezingResult:
    n: int
    p: float
    xi: float
    sigma_xi: float
    xi_corrected: float
    sigma_xi_corrected: float
    xi_detection: float
    negative_radicand: bool
    jz2: float
    jz2_corrected: float
    jx: float
    jx_corrected: float


def _first_order_xi_sigma(xi: float, jz2: float, sigma_jz2: float, jx: float, sigma_jx: float) -> float:
    if xi == 0.0 or jz2 <= 0.0:
        return 0.0
    return xi * math.sqrt((sigma_jz2 / (2.0 * jz2)) ** 2 + (sigma_jx / jx) ** 2)


def squeezing_from_weights(
    z_weights: np.ndarray,
    x_weights: np.ndarray,
    p: float,
    shots_z: int = 1,
    shots_x: int = 1,
) -> SqueezingResult:
    """Squeezing from excitation-number weight vectors in the Z and X bases."""
    zmom = jz_moments_corrected_weights(z_weights, p, shots_z)
    n = zmom.n
    wx = np.asarray(x_weights, dtype=float)
    if len(wx) != n + 1:
        raise ValueError(f"X-basis weights cover {len(wx) - 1} qubits, expected {n}")
    v = n / 2.0 - np.arange(n + 1, dtype=float)
    jx = float(np.dot(wx, v))
    sigma_jx = math.sqrt(max(float(np.dot(wx, v * v)) - jx * jx, 0.0) / shots_x)
    c = 1.0 - 2.0 * p
    jx_c = jx / c
    sigma_jx_c = sigma_jx / abs(c)
    if abs(jx_c) < 1e-9:
        raise DegenerateMeanSpinError(f"|<Jx>| ~ {abs(jx_c):.2e}; squeezing is undefined")

    xi = math.sqrt(n * zmom.jz2) / abs(jx)
    xi_d = math.sqrt(n * n * p * (1.0 - p) / (c * c)) / abs(jx_c)
    xi_c2 = n * zmom.jz2_corrected / (jx_c * jx_c)
    negative = xi_c2 < 0.0
    xi_c = 0.0 if negative else math.sqrt(xi_c2)

    sigma_xi = _first_order_xi_sigma(xi, zmom.jz2, zmom.sigma_jz2, jx, sigma_jx)
    if negative or xi_c == 0.0:
        sigma_xi_c = float("nan")
    else:
        sigma_xi_c = _first_order_xi_sigma(
            xi_c, zmom.jz2_corrected, zmom.sigma_jz2_corrected, jx_c, sigma_jx_c
        )
    return SqueezingResult(
        n=n,
        p=p,
        xi=xi,
        sigma_xi=sigma_xi,
        xi_corrected=xi_c,
        sigma_xi_corrected=sigma_xi_c,
        xi_detection=xi_d,
        negative_radicand=negative,
        jz2=zmom.jz2,
        jz2_corrected=zmom.jz2_corrected,
        jx=jx,
        jx_corrected=jx_c,
    )


def squeezing_corrected(inp: SqueezingInput) -> SqueezingResult:
    """Spin squeezing parameter xi = sqrt(n <Jz^2> / <Jx>^2), raw and corrected.

    The detection-noise share xi_d^2 = n^2 p (1-p) (1-2p)^-2 <Jx_c>^-2 obeys
    xi^2 = xi_c^2 + xi_d^2 identically.  When sampling noise pushes the
    corrected radicand negative, xi_c is reported as 0 with a flag.  Error
    bars come from first-order propagation; by construction they also satisfy
    sigma_xi_c / sigma_xi ~ xi / xi_c when the Jz^2 term dominates.
    """
    p = inp.uniform_rate()
    for counts, want in ((inp.counts_z, "Z"), (inp.counts_x, "X")):
        if isinstance(counts, CountsRecord) and counts.setting != want * counts.n:
            raise SettingMismatchError(
                f"expected an all-{want} setting, got {counts.setting!r}"
            )
    nz, wz, shots_z = excitation_weights(inp.counts_z)
    nx, wx, shots_x = excitation_weights(inp.counts_x)
    for label, nn in (("Z", nz), ("X", nx)):
        if nn != inp.n:
            raise ValueError(f"{label}-basis counts cover {nn} qubits, expected {inp.n}")
    return squeezing_from_weights(wz, wx, p, shots_z, shots_x)


# ---------------------------------------------------------------------------
# sensitivity of the correction to calibration error
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SensitivityEstimate:
    """Relative error in a corrected expectation from miscalibrating p by p*e."""

    first_order: float  # 2 n_p p e / (1 - 2p)
    first_order_simple: float  # 2 n_p p e
    exact: float  # (1-2p)^n_p / (1-2p(1+e))^n_p - 1


def calibration_sensitivity(obs: PauliString, p: float, e: float) -> SensitivityEstimate:
    """First-order and exact relative error when the calibrated rate is p(1+e)."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"rate p = {p} must lie in (0, 0.5)")
    n_p = obs.support
    dp = p * e
    first = 2.0 * n_p * dp / (1.0 - 2.0 * p)
    exact = (1.0 - 2.0 * p) ** n_p / (1.0 - 2.0 * p * (1.0 + e)) ** n_p - 1.0
    return SensitivityEstimate(first_order=first, first_order_simple=2.0 * n_p * dp, exact=exact)


__all__ = [
    "PauliString",
    "pauli_multiply",
    "validate_setting",
    "expect_raw",
    "expect_corrected",
    "expect_raw_from_probs",
    "expect_corrected_from_probs",
    "CorrectedObservable",
    "correction_factor",
    "stabilizer_generators",
    "subset_products",
    "class_outcome_values",
    "color_class_product",
    "witness_value",
    "witness_from_counts",
    "excitation_weights",
    "JzMoments",
    "jz_moments_corrected",
    "jz_moments_corrected_weights",
    "SqueezingInput",
    "SqueezingResult",
    "squeezing_corrected",
    "squeezing_from_weights",
    "SensitivityEstimate",
    "calibration_sensitivity",
]

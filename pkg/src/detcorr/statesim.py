"""Desk-scale simulator for graph-state readout experiments.

Pipeline per measurement setting: build the graph state as a dense density
matrix, apply independent single-qubit depolarizing preparation noise, rotate
into the requested product basis, sample a finite number of shots from the
exact outcome distribution, then flip each recorded bit independently with the
detector error rates.  Everything downstream (stabilizer values, witness
curves) runs on the resulting counts exactly as it would on experimental data.

All randomness flows through counter-based streams keyed by (seed, labels), so
results are bit-identical across runs and across worker-thread counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .collective import CollectiveCounts, binomial_pmf
from .error_model import DetectorModel, apply_m
from .errors import ResourceLimitError
from .graphs import GraphSpec, build_graph, class_setting
from .observables import (
    PauliString,
    class_outcome_values,
    color_class_product,
    correction_factor,
    expect_corrected,
    expect_raw,
    stabilizer_generators,
    subset_products,
    witness_value,
)
from .reconstruct import CountsRecord
from .util import derived_rng, parity_signs

#: Density matrices are 4^n complex entries; refuse beyond this.
DENSE_QUBIT_LIMIT = 14

DEFAULT_N = 10
DEFAULT_P = 0.03
DEFAULT_SHOTS = 5000
DEFAULT_SEED = 42
DEFAULT_BOOTSTRAP = 200

_SQRT2 = np.sqrt(2.0)
_ROTATIONS = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / _SQRT2,
}
_PAULI_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing preparation-noise strength per qubit."""

    p_n: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_n <= 1.0:
            raise ValueError(f"depolarizing probability {self.p_n} outside [0, 1]")


@dataclass(frozen=True)
class ShotPlan:
    """Shots per setting and the root seed; optional list of settings to run."""

    shots: int
    seed: int
    settings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError("need at least one shot")


def _check_dense(n: int) -> None:
    if n > DENSE_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"dense simulation refuses n = {n} > {DENSE_QUBIT_LIMIT} qubits"
        )


def _apply_1bit(vec: np.ndarray, a: np.ndarray, bit: int, total_bits: int) -> np.ndarray:
    """Contract a 2x2 matrix against one bit position of a flat length-2^total vector."""
    lead = 1 << (total_bits - 1 - bit)
    trail = 1 << bit
    return np.einsum("ab,xbz->xaz", a, vec.reshape(lead, 2, trail)).reshape(-1)


def _conjugate_1q(rho: np.ndarray, a: np.ndarray, k: int, n: int) -> np.ndarray:
    """A_k rho A_k^dagger for a single-qubit operator A on qubit k.

    Flattened C-order, a 2^n x 2^n matrix is a length-4^n vector whose low n
    bits index the column and high n bits the row, so conjugation is two
    single-bit contractions.
    """
    flat = _apply_1bit(rho.reshape(-1), a, n + k, 2 * n)
    flat = _apply_1bit(flat, a.conj(), k, 2 * n)
    return flat.reshape(1 << n, 1 << n)


def graph_state_vector(graph: GraphSpec) -> np.ndarray:
    """|G> = prod_edges CZ |+...+>, as a dense statevector."""
    _check_dense(graph.n)
    dim = 1 << graph.n
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    idx = np.arange(dim)
    for a, b in sorted(graph.edges):
        both = ((idx >> a) & 1) & ((idx >> b) & 1)
        psi[both == 1] *= -1.0
    return psi


def graph_state_density(graph: GraphSpec) -> np.ndarray:
    psi = graph_state_vector(graph)
    return np.outer(psi, psi.conj())


def apply_depolarizing(rho: np.ndarray, p_n: float) -> np.ndarray:
    """Independent single-qubit depolarizing on every qubit, by operator sum."""
    if p_n == 0.0:
        return rho
    n = rho.shape[0].bit_length() - 1
    for k in range(n):
        mixed = sum(_conjugate_1q(rho, pauli, k, n) for pauli in _PAULI_1Q.values())
        rho = (1.0 - 0.75 * p_n) * rho + 0.25 * p_n * mixed
    return rho


def rotate_to_setting(rho: np.ndarray, setting: str) -> np.ndarray:
    """Rotate so that the requested product basis becomes the computational one."""
    n = rho.shape[0].bit_length() - 1
    if len(setting) != n or any(c not in "XYZ" for c in setting):
        raise ValueError(f"setting {setting!r} is not a length-{n} XYZ string")
    for k, c in enumerate(setting):
        if c != "Z":
            rho = _conjugate_1q(rho, _ROTATIONS[c], k, n)
    return rho


def exact_state(graph: GraphSpec, noise: NoiseSpec) -> np.ndarray:
    """Dense density matrix of the noisy prepared state."""
    return apply_depolarizing(graph_state_density(graph), noise.p_n)


def outcome_probabilities_dense(graph: GraphSpec, noise: NoiseSpec, setting: str) -> np.ndarray:
    """Outcome distribution via the full density matrix (reference path)."""
    rho = rotate_to_setting(exact_state(graph, noise), setting)
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    return probs / probs.sum()


def outcome_probabilities(graph: GraphSpec, noise: NoiseSpec, setting: str) -> np.ndarray:
    """Exact outcome distribution in the given basis, before detector flips.

    Single-qubit depolarizing commutes with single-qubit basis rotations, and
    on outcome probabilities it acts as an independent symmetric bit flip with
    rate p_n / 2, so the noisy distribution follows from the pure state plus a
    flip layer.  Agrees with the dense-matrix route to machine precision at a
    fraction of the cost.
    """
    if len(setting) != graph.n or any(c not in "XYZ" for c in setting):
        raise ValueError(f"setting {setting!r} is not a length-{graph.n} XYZ string")
    psi = graph_state_vector(graph)
    for k, c in enumerate(setting):
        if c != "Z":
            psi = _apply_1bit(psi, _ROTATIONS[c], k, graph.n)
    probs = np.abs(psi) ** 2
    if noise.p_n > 0.0:
        flip = DetectorModel.uniform(graph.n, noise.p_n / 2.0)
        probs = apply_m(flip, probs)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def pauli_expectation_dense(rho: np.ndarray, obs: PauliString) -> float:
    """tr(rho P) for a Pauli string, via index gymnastics instead of a dense P."""
    n = rho.shape[0].bit_length() - 1
    if obs.n != n:
        raise ValueError(f"observable has {obs.n} qubits, state has {n}")
    flip = phase_mask = 0
    n_y = 0
    for k, c in enumerate(obs.factors):
        if c in ("X", "Y"):
            flip |= 1 << k
        if c in ("Z", "Y"):
            phase_mask |= 1 << k
        if c == "Y":
            n_y += 1
    idx = np.arange(rho.shape[0], dtype=np.int64)
    signs = parity_signs(idx, phase_mask)
    total = complex(1j) ** n_y * np.sum(signs * rho[idx ^ flip, idx])
    return float(obs.coefficient * total.real)


def stabilizer_expectations_noisy(graph: GraphSpec, noise: NoiseSpec) -> np.ndarray:
    """Exact <S_k> under depolarizing noise: each non-identity factor damps by 1 - p_n."""
    supports = np.array([1 + graph.degree(k) for k in range(graph.n)])
    return (1.0 - noise.p_n) ** supports


def _sample_from_probs(
    probs: np.ndarray, n: int, setting: str, model: DetectorModel, plan: ShotPlan
) -> CountsRecord:
    """Draw shots from an exact distribution, then flip each recorded bit."""
    rng = derived_rng(plan.seed, f"setting:{setting}")
    outcomes = rng.choice(len(probs), size=plan.shots, p=probs).astype(np.int64)
    for k in range(n):
        p0, p1 = model.per_qubit[k]
        bits = (outcomes >> k) & 1
        flip_prob = np.where(bits == 1, p1, p0)
        flips = rng.random(plan.shots) < flip_prob
        outcomes ^= flips.astype(np.int64) << k
    return CountsRecord.from_outcomes(n, outcomes, setting)


def sample_setting(
    graph: GraphSpec,
    noise: NoiseSpec,
    setting: str,
    model: DetectorModel,
    plan: ShotPlan,
) -> CountsRecord:
    """Finite-shot counts in one basis, detector flips included; seed-deterministic."""
    _check_dense(graph.n)
    if model.n != graph.n:
        raise ValueError(f"model has {model.n} qubits, graph has {graph.n}")
    probs = outcome_probabilities(graph, noise, setting)
    return _sample_from_probs(probs, graph.n, setting, model, plan)


# ---------------------------------------------------------------------------
# exact witness curves (no sampling)
# ---------------------------------------------------------------------------


def _class_term_supports(graph: GraphSpec, color: int) -> list[int]:
    gens = stabilizer_generators(graph)
    return [t.support for t in subset_products([gens[k] for k in graph.color_class(color)])]


def witness_exact_corrected(graph: GraphSpec, p_n: float) -> float:
    """Exact-limit corrected witness: every subset term damps by (1-p_n)^support."""
    total = 0.0
    for color in graph.colors:
        supports = _class_term_supports(graph, color)
        total += sum((1.0 - p_n) ** s for s in supports) / len(supports)
    return 3.0 - 2.0 * total


def witness_exact_raw(graph: GraphSpec, p_n: float, p: float) -> float:
    """Exact-limit uncorrected witness: terms damp by [(1-p_n)(1-2p)]^support."""
    damp = (1.0 - p_n) * (1.0 - 2.0 * p)
    total = 0.0
    for color in graph.colors:
        supports = _class_term_supports(graph, color)
        total += sum(damp**s for s in supports) / len(supports)
    return 3.0 - 2.0 * total


def witness_dense(graph: GraphSpec, noise: NoiseSpec) -> float:
    """Brute-force tr(rho_ex W) from the dense state (test oracle)."""
    rho = exact_state(graph, noise)
    gens = stabilizer_generators(graph)
    total = 0.0
    for color in graph.colors:
        terms = subset_products([gens[k] for k in graph.color_class(color)])
        total += sum(pauli_expectation_dense(rho, t) for t in terms) / len(terms)
    return 3.0 - 2.0 * total


def find_witness_crossing(
    graph: GraphSpec, lo: float = 0.0, hi: float = 0.15, tol: float = 1e-10
) -> float:
    """Preparation-noise level where the exact corrected witness changes sign."""
    f_lo = witness_exact_corrected(graph, lo)
    f_hi = witness_exact_corrected(graph, hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"no sign change in [{lo}, {hi}]: W({lo})={f_lo}, W({hi})={f_hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if witness_exact_corrected(graph, mid) * f_lo <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# figure experiments
# ---------------------------------------------------------------------------

_STATE_KINDS = ("ghz", "linear_cluster")


def _thread_count(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("DETCORR_THREADS", "1"))
    return max(1, int(threads))


def _run_tasks(fn: Callable, tasks: Sequence, threads: int | None) -> list:
    """Run tasks serially or on a thread pool; output order always matches input."""
    workers = _thread_count(threads)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _child_seed(seed: int, label: str) -> int:
    """Independent 64-bit seed for a named sub-experiment."""
    rng = derived_rng(seed, label)
    return int(rng.integers(0, 2**63 - 1))


def _bootstrap_weights(
    weights: np.ndarray, shots: int, resamples: int, rng: np.random.Generator
) -> np.ndarray:
    """(resamples, outcomes) frequency matrix drawn from the observed frequencies."""
    return rng.multinomial(shots, weights, size=resamples) / shots


def figure1_experiment(
    n: int = DEFAULT_N,
    p: float = DEFAULT_P,
    p_n: float = 0.0,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP,
    threads: int | None = None,
) -> list[dict]:
    """Stabilizer values before and after correction for the star and path states.

    One row per (state, vertex): raw and corrected <S_k> with propagated and
    bootstrap error bars.
    """
    model = DetectorModel.uniform(n, p)
    noise = NoiseSpec(p_n)
    tasks = []
    for state in _STATE_KINDS:
        graph = build_graph(state, n)
        for color in graph.colors:
            tasks.append((state, graph, color))

    def run(task):
        state, graph, color = task
        setting = class_setting(graph, color)
        child = _child_seed(seed, f"fig1:{state}:color{color}")
        record = sample_setting(graph, noise, setting, model, ShotPlan(shots, child))
        idx, cnt = record.index_arrays()
        weights = cnt / record.shots
        boot = _bootstrap_weights(
            weights, record.shots, bootstrap_resamples,
            derived_rng(child, f"bootstrap:{setting}"),
        )
        gens = stabilizer_generators(graph)
        rows = []
        for k in graph.color_class(color):
            raw, raw_sigma = expect_raw(record, gens[k])
            corr, corr_sigma = expect_corrected(record, gens[k], model)
            raw_vals = gens[k].outcome_values(idx)
            corr_vals = correction_factor(gens[k], model).outcome_values(idx)
            rows.append(
                {
                    "state": state,
                    "k": k,
                    "support": gens[k].support,
                    "raw": raw,
                    "raw_sigma": raw_sigma,
                    "raw_sigma_boot": float(np.std(boot @ raw_vals, ddof=1)),
                    "corrected": corr,
                    "corrected_sigma": corr_sigma,
                    "corrected_sigma_boot": float(np.std(boot @ corr_vals, ddof=1)),
                }
            )
        return rows

    chunks = _run_tasks(run, tasks, threads)
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (_STATE_KINDS.index(r["state"]), r["k"]))
    return rows


def default_pn_grid() -> tuple[float, ...]:
    """Preparation-noise grid 0 .. 0.10 in steps of 0.005."""
    return tuple(np.round(np.arange(0.0, 0.1001, 0.005), 6))


def figure2_experiment(
    n: int = DEFAULT_N,
    p: float = DEFAULT_P,
    p_n_grid: Sequence[float] | None = None,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP,
    threads: int | None = None,
) -> list[dict]:
    """Entanglement witness vs preparation noise, before and after correction.

    One row per (state, p_n): sampled raw and corrected witness with error
    bars, plus the exact (infinite-shot) values of both curves.
    """
    grid = tuple(float(x) for x in (default_pn_grid() if p_n_grid is None else p_n_grid))
    model = DetectorModel.uniform(n, p)
    tasks = []
    for state in _STATE_KINDS:
        graph = build_graph(state, n)
        for p_n in grid:
            tasks.append((state, graph, p_n))

    def run(task):
        state, graph, p_n = task
        noise = NoiseSpec(p_n)
        child = _child_seed(seed, f"fig2:{state}:pn={p_n:.6f}")
        raw_products: dict[int, tuple[float, float]] = {}
        corr_products: dict[int, tuple[float, float]] = {}
        boot_raw = []
        boot_corr = []
        for color in graph.colors:
            setting = class_setting(graph, color)
            record = sample_setting(graph, noise, setting, model, ShotPlan(shots, child))
            raw_products[color] = color_class_product(record, graph, color)
            corr_products[color] = color_class_product(record, graph, color, model)
            idx, cnt = record.index_arrays()
            weights = cnt / record.shots
            boot = _bootstrap_weights(
                weights, record.shots, bootstrap_resamples,
                derived_rng(child, f"bootstrap:{setting}"),
            )
            boot_raw.append(boot @ class_outcome_values(idx, graph, color))
            boot_corr.append(boot @ class_outcome_values(idx, graph, color, model))
        w_raw, w_raw_sigma = witness_value(raw_products, graph)
        w_corr, w_corr_sigma = witness_value(corr_products, graph)
        return {
            "state": state,
            "p_n": p_n,
            "w_raw": w_raw,
            "w_raw_sigma": w_raw_sigma,
            "w_raw_sigma_boot": float(np.std(3.0 - 2.0 * sum(boot_raw), ddof=1)),
            "w_corrected": w_corr,
            "w_corrected_sigma": w_corr_sigma,
            "w_corrected_sigma_boot": float(np.std(3.0 - 2.0 * sum(boot_corr), ddof=1)),
            "w_raw_exact": witness_exact_raw(graph, p_n, p),
            "w_corrected_exact": witness_exact_corrected(graph, p_n),
        }

    rows = _run_tasks(run, tasks, threads)
    rows.sort(key=lambda r: (_STATE_KINDS.index(r["state"]), r["p_n"]))
    return rows


# ---------------------------------------------------------------------------
# collective-measurement sampling (spin squeezing inputs)
# ---------------------------------------------------------------------------


def coherent_x_collective_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact excitation distributions of a coherent spin state along +x.

    In the Z basis every qubit is a fair coin (binomial excitation count); in
    the X basis every qubit reads the +1 outcome (zero excitations).
    """
    z = binomial_pmf(n, 0.5, np.arange(n + 1))
    x = np.zeros(n + 1)
    x[0] = 1.0
    return z, x


def sample_collective_counts(
    weights: np.ndarray,
    p0: float,
    p1: float,
    shots: int,
    seed: int,
    label: str = "",
) -> CollectiveCounts:
    """Per-shot excitation-count sampling with detector flips.

    Draws the true excitation number from `weights`, keeps each excited qubit
    with probability 1 - p1, and flips each unexcited one up with probability
    p0.
    """
    weights = np.asarray(weights, dtype=float)
    n = len(weights) - 1
    rng = derived_rng(seed, f"collective:{label}")
    m_true = rng.choice(n + 1, size=shots, p=weights / weights.sum())
    kept = rng.binomial(m_true, 1.0 - p1)
    raised = rng.binomial(n - m_true, p0)
    recorded = kept + raised
    return CollectiveCounts(tuple(int(c) for c in np.bincount(recorded, minlength=n + 1)))


__all__ = [
    "DENSE_QUBIT_LIMIT",
    "DEFAULT_N",
    "DEFAULT_P",
    "DEFAULT_SHOTS",
    "DEFAULT_SEED",
    "DEFAULT_BOOTSTRAP",
    "NoiseSpec",
    "ShotPlan",
    "build_graph",
    "class_setting",
    "graph_state_vector",
    "graph_state_density",
    "apply_depolarizing",
    "rotate_to_setting",
    "exact_state",
    "outcome_probabilities",
    "outcome_probabilities_dense",
    "pauli_expectation_dense",
    "stabilizer_expectations_noisy",
    "sample_setting",
    "witness_exact_corrected",
    "witness_exact_raw",
    "witness_dense",
    "find_witness_crossing",
    "figure1_experiment",
    "figure2_experiment",
    "default_pn_grid",
    "coherent_x_collective_weights",
    "sample_collective_counts",
]

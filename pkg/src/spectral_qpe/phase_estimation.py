"""Eigenvalue extraction by phase estimation.

Pipeline: put the index register into a uniform superposition, apply the
system unitary conditionally so index value j receives U^j, run the inverse
QFT on the index register, and measure it.  A measured bin j estimates an
eigenphase w = 2*pi*j/M of U; for U = e^{-iHt} that phase maps back to an
energy, and the system register collapses onto the matching eigenvector
content.

Two conditional-power constructions are provided (a flag-qubit comparator
loop and the per-index-bit binary route); they must agree to 1e-10 and the
tests enforce that.  The module also carries the closed-form measurement
distribution, which verifies the whole pipeline without sampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import hamiltonian as ham
from . import oracle
from . import qft
from . import statevector as sv
from .errors import ContractViolation

#: Work/flag qubits must be |0> to this amplitude tolerance at readout.
WORK_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class PhaseEstimationConfig:
    """Everything one estimation run needs.

    Exactly one unitary source must be given:

    * ``unitary`` -- a dense gate over the system register (needs an explicit
      ``time`` so measured phases can be mapped to energies), or
    * ``hamiltonian`` + ``evolution`` -- Trotterized e^{-iHt}, or
    * ``recipe`` + ``evolution`` -- any object exposing
      ``num_qubits`` and ``apply_step(state, dt, system_qubits, controls)``
      (grid problems use this to run their position/momentum switching
      inside the conditional evolution).
    """

    layout: sv.RegisterLayout
    unitary: sv.GateMatrix | None = None
    hamiltonian: ham.HamiltonianSum | None = None
    evolution: ham.EvolutionParams | None = None
    recipe: object | None = None
    time: float | None = None
    trials: int = 1
    seed: int = 0
    power_method: str = "binary_power"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.power_method not in ("flag_loop", "binary_power"):
            raise ValueError(f"unknown power_method {self.power_method!r}")
        if self.power_method == "flag_loop" and self.layout.w_work < 1:
            raise ValueError("flag_loop needs at least one work qubit for the flag")
        sources = [self.unitary, self.hamiltonian, self.recipe]
        if sum(s is not None for s in sources) != 1:
            raise ValueError(
                "config needs exactly one of: unitary, hamiltonian, recipe"
            )
        if self.unitary is not None:
            if self.evolution is not None:
                raise ValueError("evolution params only apply to hamiltonian/recipe mode")
            if self.unitary.arity != self.layout.l_system:
                raise ValueError(
                    f"unitary acts on {self.unitary.arity} qubits but the system "
                    f"register has {self.layout.l_system}"
                )
            if self.time is None:
                raise ValueError("raw-unitary mode needs an explicit time")
            if self.time == 0:
                raise ValueError("time must be nonzero")
        else:
            if self.evolution is None:
                raise ValueError("hamiltonian/recipe mode needs evolution params")
            system_qubits = (
                self.hamiltonian.num_system_qubits
                if self.hamiltonian is not None
                else self.recipe.num_qubits
            )
            if system_qubits != self.layout.l_system:
                raise ValueError(
                    f"unitary source spans {system_qubits} qubits but the system "
                    f"register has {self.layout.l_system}"
                )
            if self.time is not None and self.time != self.evolution.time:
                raise ValueError("config time conflicts with evolution.time")
            if self.evolution.time == 0:
                raise ValueError("evolution time must be nonzero")

    @property
    def evolution_time(self) -> float:
        """The t in U = e^{-iHt}; used to map phases back to energies."""
        return self.time if self.time is not None else self.evolution.time


@dataclass(frozen=True)
class PhaseSample:
    """One measured readout: bin, its phase 2*pi*bin/M, the energy estimate,
    and the post-measurement system-register state."""

    bin: int
    phase: float
    energy: float
    collapsed_state: sv.StateVector


@dataclass(frozen=True)
class Histogram:
    """Readout-bin counts over a batch of trials."""

    counts: np.ndarray
    trials: int

    @property
    def empirical_probs(self) -> np.ndarray:
        return self.counts / self.trials


@dataclass(frozen=True)
class EigenResult:
    """Aggregate of a multi-trial run.

    ``peaks`` holds (bin, empirical probability) pairs at or above the
    detection threshold, sorted by descending probability (ties by bin);
    ``eigenvectors`` holds one collapsed system state per peak, aligned.
    """

    samples: list[PhaseSample]
    histogram: Histogram
    peaks: list[tuple[int, float]]
    eigenvectors: list[sv.StateVector]


def default_peak_threshold(trials: int) -> float:
    """Detection threshold tau = max(0.05, 4/sqrt(trials))."""
    return max(0.05, 4.0 / math.sqrt(trials))


def prepare_index_superposition(
    state: sv.StateVector, layout: sv.RegisterLayout
) -> sv.StateVector:
    """Hadamard every index qubit: |0>|sys> -> (1/sqrt(M)) sum_j |j>|sys>."""
    if state.num_qubits != layout.total_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits, layout spans {layout.total_qubits}"
        )
    index_values = sv.register_values(state.num_qubits, layout.index_qubits)
    residue = np.abs(state.amplitudes[index_values != 0])
    if residue.size and float(residue.max()) > WORK_RESIDUE_TOL:
        raise ValueError(
            f"index register is not |0...0>: residue amplitude {float(residue.max()):.3e}"
        )
    h = sv.hadamard()
    for qubit in layout.index_qubits:
        state = sv.apply_gate(state, h, [qubit])
    return state


def _stable_square(matrix: np.ndarray) -> np.ndarray:
    """Square a unitary, snapping back onto the unitary manifold when float
    drift from many repeated squarings approaches the gate tolerance."""
    squared = matrix @ matrix
    defect = np.abs(squared.conj().T @ squared - np.eye(len(squared))).max()
    if defect > sv.UNITARY_TOL / 4:
        u, _, vh = np.linalg.svd(squared)
        squared = u @ vh
    return squared


class _MatrixPowers:
    """Applies controlled-U^p for a dense system unitary, memoizing squarings."""

    def __init__(self, matrix: np.ndarray, system_qubits: list[int]) -> None:
        self._pow2 = [np.asarray(matrix, dtype=np.complex128)]
        self._system = system_qubits

    def _power_matrix(self, power: int) -> np.ndarray:
        result = None
        s = 0
        while power:
            while s >= len(self._pow2):
                self._pow2.append(_stable_square(self._pow2[-1]))
            if power & 1:
                block = self._pow2[s]
                result = block if result is None else block @ result
            power >>= 1
            s += 1
        return result

    def apply_controlled(self, state, controls, power: int):
        gate = sv.GateMatrix(self._power_matrix(power))
        return sv.apply_controlled_gate(state, gate, controls, self._system)


class _TrotterPowers:
    """Applies controlled-U^p where U is r Trotter slices of a local Hamiltonian."""

    def __init__(self, h, params, layout) -> None:
        self._gates = ham.slice_gates(h, params.time / params.slices, layout)
        self._slices = params.slices

    def apply_controlled(self, state, controls, power: int):
        for _ in range(power * self._slices):
            for targets, gate in self._gates:
                state = sv.apply_controlled_gate(state, gate, controls, targets)
        return state


class _RecipePowers:
    """Applies controlled-U^p by running a step recipe under controls."""

    def __init__(self, recipe, params, layout) -> None:
        self._recipe = recipe
        self._dt = params.time / params.slices
        self._slices = params.slices
        self._system = layout.system_qubits

    def apply_controlled(self, state, controls, power: int):
        for _ in range(power * self._slices):
            state = self._recipe.apply_step(state, self._dt, self._system, controls)
        return state


def _unitary_driver(config: PhaseEstimationConfig):
    layout = config.layout
    if config.unitary is not None:
        return _MatrixPowers(config.unitary.matrix, layout.system_qubits)
    if config.hamiltonian is not None:
        return _TrotterPowers(config.hamiltonian, config.evolution, layout)
    return _RecipePowers(config.recipe, config.evolution, layout)


def _flip_flag_where_index_ge(
    state: sv.StateVector, index_values: np.ndarray, flag: int, threshold: int
) -> sv.StateVector:
    """X on the flag qubit wherever the index register reads >= threshold.

    The loop counter is classical, so the comparator reduces to a masked
    amplitude swap; no reversible comparator circuit is needed.
    """
    amps = state.amplitudes.copy()
    flag_mask = 1 << flag
    idx = np.arange(len(amps))
    src = idx[(index_values >= threshold) & ((idx & flag_mask) == 0)]
    dst = src | flag_mask
    src_vals = amps[src]
    amps[src] = amps[dst]
    amps[dst] = src_vals
    return sv._wrap_state(state.num_qubits, amps)


def apply_conditional_powers_flag_loop(
    state: sv.StateVector, config: PhaseEstimationConfig
) -> sv.StateVector:
    """Conditional powers via the comparator loop.

    For i = 1..M: raise the flag on components whose index value j satisfies
    i <= j, apply controlled-U on the flag, lower the flag again.  Component
    j thus receives exactly U^j.  The flag must end |0>; anything else is an
    internal contract violation.
    """
    layout = config.layout
    if layout.w_work < 1:
        raise ValueError("flag_loop needs a work qubit to hold the flag")
    driver = _unitary_driver(config)
    flag = layout.work_qubits[0]
    index_values = sv.register_values(state.num_qubits, layout.index_qubits)
    for i in range(1, layout.num_bins + 1):
        state = _flip_flag_where_index_ge(state, index_values, flag, i)
        state = driver.apply_controlled(state, [flag], 1)
        state = _flip_flag_where_index_ge(state, index_values, flag, i)
    flag_set = ((np.arange(len(state.amplitudes)) >> flag) & 1).astype(bool)
    flag_residue = np.abs(state.amplitudes[flag_set])
    if flag_residue.size and float(flag_residue.max()) > WORK_RESIDUE_TOL:
        raise ContractViolation(
            f"flag qubit not restored to |0>: residue {float(flag_residue.max()):.3e}"
        )
    return state


def apply_conditional_powers_binary(
    state: sv.StateVector, config: PhaseEstimationConfig
) -> sv.StateVector:
    """Conditional powers via index bits: controlled-U^(2^s) off index qubit s."""
    driver = _unitary_driver(config)
    for s, qubit in enumerate(config.layout.index_qubits):
        state = driver.apply_controlled(state, [qubit], 2**s)
    return state


def _initial_state(va: sv.StateVector, layout: sv.RegisterLayout) -> sv.StateVector:
    """|0>_index (x) |va>_system (x) |0>_work as one register."""
    if va.num_qubits != layout.l_system:
        raise ValueError(
            f"guess state spans {va.num_qubits} qubits but the system register "
            f"has {layout.l_system}"
        )
    amps = np.zeros(2**layout.total_qubits, dtype=np.complex128)
    amps[np.arange(2**layout.l_system) << layout.m_index] = va.amplitudes
    return sv._wrap_state(layout.total_qubits, amps)


def pre_measurement_state(
    va: sv.StateVector, config: PhaseEstimationConfig, *, _corrupt_qft_sign: bool = False
) -> sv.StateVector:
    """Everything before measurement; deterministic (no randomness involved).

    ``_corrupt_qft_sign`` is a negative-control hook for the oracle-check
    command: it runs the readout with the wrong transform direction, which
    the distribution cross-check must catch.
    """
    layout = config.layout
    state = _initial_state(va, layout)
    state = prepare_index_superposition(state, layout)
    if config.power_method == "flag_loop":
        state = apply_conditional_powers_flag_loop(state, config)
    else:
        state = apply_conditional_powers_binary(state, config)
    readout = qft.qft_forward if _corrupt_qft_sign else qft.qft_inverse
    return readout(state, layout.index_qubits)


def pre_measurement_distribution(
    va: sv.StateVector, config: PhaseEstimationConfig, *, _corrupt_qft_sign: bool = False
) -> np.ndarray:
    """Exact readout-bin distribution, computed from amplitudes (no sampling)."""
    state = pre_measurement_state(va, config, _corrupt_qft_sign=_corrupt_qft_sign)
    return sv.register_distribution(state, config.layout.index_qubits)


def _collapse_at_bin(
    state: sv.StateVector, layout: sv.RegisterLayout, bin_index: int
) -> sv.StateVector:
    """System-register state conditioned on reading ``bin_index``.

    Verifies the work register carries no amplitude (flags must have been
    uncomputed), then projects, extracts and renormalizes.
    """
    amps = state.amplitudes
    if layout.w_work:
        index_values = sv.register_values(state.num_qubits, layout.index_qubits)
        work_values = sv.register_values(state.num_qubits, layout.work_qubits)
        residue = np.abs(amps[(index_values == bin_index) & (work_values != 0)])
        if residue.size and float(residue.max()) > WORK_RESIDUE_TOL:
            raise ContractViolation(
                f"work register not |0> at readout: residue {float(residue.max()):.3e}"
            )
    system = amps[bin_index + (np.arange(2**layout.l_system) << layout.m_index)]
    norm = float(np.linalg.norm(system))
    if norm == 0.0:
        raise ValueError(f"readout bin {bin_index} carries no amplitude")
    return sv._wrap_state(layout.l_system, system / norm)


def _sample_for_bin(
    bin_index: int, collapsed: sv.StateVector, config: PhaseEstimationConfig
) -> PhaseSample:
    phase = 2.0 * math.pi * bin_index / config.layout.num_bins
    return PhaseSample(
        bin=bin_index,
        phase=phase,
        energy=phase_to_energy(phase, config.evolution_time),
        collapsed_state=collapsed,
    )


def run_phase_estimation(
    va: sv.StateVector,
    config: PhaseEstimationConfig,
    rng: np.random.Generator | None = None,
) -> PhaseSample:
    """One full estimation trial.

    Without an explicit generator this uses trial stream 0 of the config
    seed, so it reproduces the first trial of :func:`sample_spectrum`.
    """
    layout = config.layout
    state = pre_measurement_state(va, config)
    if rng is None:
        rng = sv.trial_stream(config.seed, 0)
    outcome, post = sv.measure_register(state, layout.index_qubits, rng)
    collapsed = _collapse_at_bin(post, layout, outcome.bits)
    return _sample_for_bin(outcome.bits, collapsed, config)


def _draw_trial_bins(
    seed: int, trials: int, cumulative: np.ndarray, threads: int
) -> np.ndarray:
    """Per-trial readout bins; trial t uses its own stream, so the result is
    independent of how trials are chunked across threads."""

    def draw_range(bounds: tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        out = np.empty(hi - lo, dtype=np.int64)
        for t in range(lo, hi):
            u = sv.trial_stream(seed, t).random()
            out[t - lo] = sv._draw_from_cumulative(cumulative, u)
        return out

    if threads <= 1 or trials < 2:
        return draw_range((0, trials))
    edges = np.linspace(0, trials, min(threads, trials) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(draw_range, zip(edges[:-1], edges[1:])))
    return np.concatenate(parts)


def sample_spectrum(
    va: sv.StateVector,
    config: PhaseEstimationConfig,
    *,
    threshold: float | None = None,
    threads: int = 1,
) -> EigenResult:
    """Run ``config.trials`` independent estimations and aggregate.

    The pipeline up to measurement consumes no randomness, so the
    pre-measurement state is computed once; each trial then draws only its
    measurement outcome from its own seed-derived stream.  The outcome
    sequence is bit-identical to running the full pipeline per trial, for
    any thread count.
    """
    layout = config.layout
    pre = pre_measurement_state(va, config)
    probs = sv.register_distribution(pre, layout.index_qubits)
    cumulative = np.cumsum(probs)
    bins = _draw_trial_bins(config.seed, config.trials, cumulative, threads)
    counts = np.bincount(bins, minlength=layout.num_bins)
    histogram = Histogram(counts, config.trials)
    if threshold is None:
        threshold = default_peak_threshold(config.trials)
    elif not (threshold > 0.0 and math.isfinite(threshold)):
        raise ValueError(f"peak threshold must be a positive real, got {threshold!r}")
    empirical = counts / config.trials
    peak_bins = [int(b) for b in np.nonzero(empirical >= threshold)[0]]
    peak_bins.sort(key=lambda b: (-empirical[b], b))
    collapsed = {b: _collapse_at_bin(pre, layout, b) for b in sorted(set(bins.tolist()))}
    samples = [_sample_for_bin(int(b), collapsed[int(b)], config) for b in bins]
    peaks = [(b, float(empirical[b])) for b in peak_bins]
    eigenvectors = [collapsed[b] for b in peak_bins]
    return EigenResult(samples, histogram, peaks, eigenvectors)


def analytic_bin_distribution(components, m_index: int) -> np.ndarray:
    """Closed-form readout distribution for known spectral components.

    ``components`` is a list of (weight |c_k|^2, phase w_k) pairs; the result
    is P(j) = sum_k w_k * F_M(w_k - 2*pi*j/M) with the leakage kernel
    F_M(d) = sin^2(M*d/2) / (M^2 * sin^2(d/2)) and F_M(0) = 1.
    """
    if m_index < 1:
        raise ValueError(f"m_index must be >= 1, got {m_index}")
    weights = np.array([w for w, _ in components], dtype=float)
    phases = np.array([p for _, p in components], dtype=float)
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"component weights must sum to 1, got {total!r}")
    M = 2**m_index
    delta = phases[:, None] - (2.0 * np.pi / M) * np.arange(M)[None, :]
    return weights @ _leakage_kernel(delta, M)


def _leakage_kernel(delta: np.ndarray, M: int) -> np.ndarray:
    """F_M(d) = sin^2(M*d/2)/(M^2 sin^2(d/2)), with F_M = 1 at d = 0 mod 2*pi."""
    half_sin = np.sin(delta / 2.0)
    on_grid = np.abs(half_sin) < 1e-12
    safe = np.where(on_grid, 1.0, half_sin)
    kernel = (np.sin(M * delta / 2.0) / (M * safe)) ** 2
    return np.where(on_grid, 1.0, kernel)


def phase_to_energy(phase: float, t: float) -> float:
    """Energy estimate E = -phase/t, wrapped into the window (-pi/t, pi/t].

    Aliasing is the caller's problem: eigenvalues outside the window fold
    back into it, so t must be chosen small enough up front.
    """
    if t == 0:
        raise ValueError("evolution time t must be nonzero")
    wrapped = math.pi - (math.pi + phase) % (2.0 * math.pi)
    return wrapped / t


def eigenvector_fidelity(
    collapsed: sv.StateVector, h, energy: float, tol: float
) -> float:
    """Overlap of a collapsed state with the eigenspace near ``energy``.

    ``h`` may be a :class:`~spectral_qpe.hamiltonian.HamiltonianSum` or a
    dense Hermitian matrix.  Returns <c|P|c> where P projects onto oracle
    eigenvectors with |lambda - energy| <= tol; raises if no eigenvalue is
    that close (the peak was mis-identified).
    """
    dense = oracle.assemble_dense(h) if isinstance(h, ham.HamiltonianSum) else h
    decomposition = oracle.eigendecompose(dense)
    mask = np.abs(decomposition.eigenvalues - energy) <= tol
    if not mask.any():
        raise ValueError(
            f"no oracle eigenvalue within {tol!r} of energy {energy!r}"
        )
    overlaps = decomposition.eigenvectors[:, mask].conj().T @ collapsed.amplitudes
    return float(np.sum(np.abs(overlaps) ** 2))

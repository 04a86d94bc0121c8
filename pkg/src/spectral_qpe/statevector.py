"""Dense state-vector simulation core.

Conventions, used consistently across the package:

* A register of ``q`` qubits is a flat array of ``2**q`` complex128
  amplitudes.  Qubit 0 is the least significant bit of the basis index, so
  basis state ``|j>`` assigns qubit ``i`` the bit ``(j >> i) & 1``.
* Wherever a list of qubits defines a multi-bit value (gate targets, measured
  registers, QFT registers), position ``i`` of the list contributes bit ``i``
  of that value -- list order is least-significant-first.
* States are never silently renormalized.  Any public operation whose result
  drifts off unit norm by more than ``NORM_TOL`` raises
  :class:`~spectral_qpe.errors.ContractViolation`.
* Randomness comes from per-trial streams derived from one master seed via
  :func:`trial_stream`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

#: Hard cap on register size: 2**26 amplitudes is ~1 GiB of complex128.
MAX_QUBITS = 26
#: Largest gate the simulator will apply as a dense matrix.
MAX_GATE_ARITY = 12
#: Allowed drift of sum |a_i|^2 from 1 before a state is rejected.
NORM_TOL = 1e-6
#: Allowed deviation of max |G^dag G - I| from 0 for gate matrices.
UNITARY_TOL = 1e-10


class GateMatrix:
    """A unitary acting on ``arity`` qubits, validated at construction."""

    __slots__ = ("arity", "matrix")

    def __init__(self, matrix) -> None:
        mat = np.array(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"gate must be a square matrix, got shape {mat.shape}")
        dim = mat.shape[0]
        arity = dim.bit_length() - 1
        if dim < 2 or 2**arity != dim:
            raise ValueError(f"gate dimension {dim} is not a power of two >= 2")
        if arity > MAX_GATE_ARITY:
            raise ValueError(
                f"gate acts on {arity} qubits; dense application is capped at {MAX_GATE_ARITY}"
            )
        defect = float(np.abs(mat.conj().T @ mat - np.eye(dim)).max())
        if defect > UNITARY_TOL:
            raise ValueError(f"gate is not unitary: max|G^dag G - I| = {defect:.3e}")
        mat.setflags(write=False)
        self.arity = arity
        self.matrix = mat

    def __repr__(self) -> str:
        return f"GateMatrix(arity={self.arity})"


def hadamard() -> GateMatrix:
    """Single-qubit Hadamard."""
    return GateMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def pauli_x() -> GateMatrix:
    return GateMatrix(np.array([[0, 1], [1, 0]]))


def pauli_z() -> GateMatrix:
    return GateMatrix(np.array([[1, 0], [0, -1]]))


def phase_shift(theta: float) -> GateMatrix:
    """diag(1, e^{i*theta})."""
    return GateMatrix(np.array([[1, 0], [0, np.exp(1j * theta)]]))


def swap_gate() -> GateMatrix:
    return GateMatrix(
        np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    )


@dataclass(frozen=True)
class RegisterLayout:
    """Partition of a simulation register into index | system | work.

    The index register occupies qubits [0, m_index), the system register the
    next l_system qubits, and any work qubits sit on top.  With the
    least-significant-bit convention this makes index-register extraction a
    mask of the low bits of the basis index.
    """

    m_index: int
    l_system: int
    w_work: int = 0

    def __post_init__(self) -> None:
        if self.m_index < 1:
            raise ValueError(f"index register needs at least 1 qubit, got {self.m_index}")
        if self.l_system < 1:
            raise ValueError(f"system register needs at least 1 qubit, got {self.l_system}")
        if self.w_work < 0:
            raise ValueError(f"work register size must be >= 0, got {self.w_work}")
        if self.total_qubits > MAX_QUBITS:
            raise ValueError(
                f"layout spans {self.total_qubits} qubits, exceeding the cap of {MAX_QUBITS}"
            )

    @property
    def total_qubits(self) -> int:
        return self.m_index + self.l_system + self.w_work

    @property
    def num_bins(self) -> int:
        """M = 2**m_index, the number of readout bins."""
        return 2**self.m_index

    @property
    def index_qubits(self) -> list[int]:
        return list(range(self.m_index))

    @property
    def system_qubits(self) -> list[int]:
        return list(range(self.m_index, self.m_index + self.l_system))

    @property
    def work_qubits(self) -> list[int]:
        return list(range(self.m_index + self.l_system, self.total_qubits))


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of reading a sub-register: its integer value and Born probability."""

    bits: int
    probability: float


class StateVector:
    """Amplitudes of a pure ``num_qubits``-qubit state (unit norm enforced)."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes) -> None:
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
        amps = np.array(amplitudes, dtype=np.complex128)
        if amps.shape != (2**num_qubits,):
            raise ValueError(
                f"expected {2**num_qubits} amplitudes for {num_qubits} qubits, got shape {amps.shape}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not normalized: sum|a|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        self.num_qubits = num_qubits
        self.amplitudes = amps

    def probabilities(self) -> np.ndarray:
        """Born probabilities |a_i|^2 over all basis states."""
        return np.abs(self.amplitudes) ** 2

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


def _wrap_state(num_qubits: int, amps: np.ndarray) -> StateVector:
    """Wrap freshly computed amplitudes, enforcing the no-drift contract."""
    norm_sq = float(np.vdot(amps, amps).real)
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise ContractViolation(f"state norm drifted: sum|a|^2 = {norm_sq!r}")
    state = StateVector.__new__(StateVector)
    amps.setflags(write=False)
    state.num_qubits = num_qubits
    state.amplitudes = amps
    return state


def new_basis_state(q: int, index: int) -> StateVector:
    """|index> on q qubits."""
    if not 0 <= index < 2**q:
        raise ValueError(f"basis index {index} out of range for {q} qubits")
    amps = np.zeros(2**q, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(q, amps)


def load_amplitudes(q: int, values) -> StateVector:
    """Wrap a caller-supplied amplitude array (must already be normalized)."""
    return StateVector(q, values)


def _check_qubits(qubits, q: int, what: str) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate {what} qubits: {list(qubits)}")
    for qu in qubits:
        if not 0 <= qu < q:
            raise ValueError(f"{what} qubit {qu} out of range for {q}-qubit state")


def _apply_matrix(
    amps: np.ndarray,
    q: int,
    matrix: np.ndarray,
    targets,
    controls=(),
) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to ``targets`` (optionally controlled) and
    return new amplitudes.

    ``targets[0]`` is the least significant bit of the matrix's own index.
    The flat array is viewed as a rank-q tensor whose axis 0 is the most
    significant qubit; target axes are moved to the front and the matrix is
    applied as one matmul over the collapsed remainder.
    """
    k = len(targets)
    out = amps.copy()
    tensor = out.reshape((2,) * q)
    selector = [slice(None)] * q
    for c in controls:
        selector[q - 1 - c] = 1
    sub = tensor[tuple(selector)]
    # Axis bookkeeping for the control-sliced view: remaining axes correspond
    # to the non-control qubits in descending order.
    remaining = [qb for qb in range(q - 1, -1, -1) if qb not in controls]
    front = [remaining.index(t) for t in reversed(targets)]
    moved = np.moveaxis(sub, front, range(k))
    shape = moved.shape
    mixed = matrix @ np.ascontiguousarray(moved).reshape(2**k, -1)
    sub[...] = np.moveaxis(mixed.reshape(shape), range(k), front)
    return out


def apply_gate(state: StateVector, gate: GateMatrix, targets) -> StateVector:
    """Apply ``gate`` to the given target qubits (identity elsewhere)."""
    targets = list(targets)
    _check_qubits(targets, state.num_qubits, "target")
    if len(targets) != gate.arity:
        raise ValueError(f"gate arity {gate.arity} != {len(targets)} targets")
    amps = _apply_matrix(state.amplitudes, state.num_qubits, gate.matrix, targets)
    return _wrap_state(state.num_qubits, amps)


def apply_controlled_gate(state: StateVector, gate: GateMatrix, controls, targets) -> StateVector:
    """Apply ``gate`` to ``targets`` only where all ``controls`` are |1>."""
    controls = list(controls)
    targets = list(targets)
    _check_qubits(controls + targets, state.num_qubits, "control/target")
    if len(targets) != gate.arity:
        raise ValueError(f"gate arity {gate.arity} != {len(targets)} targets")
    amps = _apply_matrix(
        state.amplitudes, state.num_qubits, gate.matrix, targets, controls
    )
    return _wrap_state(state.num_qubits, amps)


def apply_diagonal_phase(state: StateVector, qubits, phases, controls=()) -> StateVector:
    """Multiply each amplitude by ``phases[v]`` where v is the value of the
    ``qubits`` register (optionally only where ``controls`` are all |1>).

    ``phases`` must be unit-modulus (it is a diagonal unitary).  This is the
    workhorse for potential/kinetic phase multiplications on grid problems,
    where the register can exceed the dense-gate arity cap.
    """
    qubits = list(qubits)
    controls = list(controls)
    _check_qubits(qubits + controls, state.num_qubits, "register/control")
    phases = np.asarray(phases, dtype=np.complex128)
    if phases.shape != (2 ** len(qubits),):
        raise ValueError(
            f"need {2 ** len(qubits)} phase factors for a {len(qubits)}-qubit register"
        )
    defect = float(np.abs(np.abs(phases) - 1.0).max())
    if defect > UNITARY_TOL:
        raise ValueError(f"phase factors are not unit modulus: max deviation {defect:.3e}")
    idx = np.arange(2**state.num_qubits)
    value = np.zeros_like(idx)
    for bit, qu in enumerate(qubits):
        value |= ((idx >> qu) & 1) << bit
    factors = phases[value]
    if controls:
        cmask = 0
        for c in controls:
            cmask |= 1 << c
        factors = np.where((idx & cmask) == cmask, factors, 1.0)
    return _wrap_state(state.num_qubits, state.amplitudes * factors)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> with the first argument conjugated."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def register_values(q: int, qubits) -> np.ndarray:
    """Value of the ``qubits`` register for every basis index of a q-qubit state."""
    idx = np.arange(2**q)
    value = np.zeros_like(idx)
    for bit, qu in enumerate(qubits):
        value |= ((idx >> qu) & 1) << bit
    return value


def register_distribution(state: StateVector, qubits) -> np.ndarray:
    """Marginal Born distribution over the values of a sub-register."""
    qubits = list(qubits)
    if not qubits:
        raise ValueError("cannot take the distribution of an empty register")
    _check_qubits(qubits, state.num_qubits, "register")
    values = register_values(state.num_qubits, qubits)
    return np.bincount(
        values, weights=state.probabilities(), minlength=2 ** len(qubits)
    )


def _draw_from_cumulative(cumulative: np.ndarray, u: float) -> int:
    """Map one uniform draw to an outcome index.

    Zero-probability outcomes produce repeated cumulative values and are
    never selected by the right-sided search.
    """
    total = cumulative[-1]
    idx = int(np.searchsorted(cumulative, u * total, side="right"))
    return min(idx, len(cumulative) - 1)


def measure_register(
    state: StateVector, qubits, rng: np.random.Generator
) -> tuple[MeasurementOutcome, StateVector]:
    """Projectively measure a sub-register.

    Draws exactly one uniform variate from ``rng``, so a fixed seed and call
    sequence reproduce the outcome sequence bit for bit.  The returned state
    is the renormalized projection consistent with the outcome.
    """
    qubits = list(qubits)
    if not qubits:
        raise ValueError("cannot measure an empty qubit list")
    probs = register_distribution(state, qubits)
    outcome = _draw_from_cumulative(np.cumsum(probs), rng.random())
    values = register_values(state.num_qubits, qubits)
    amps = np.where(values == outcome, state.amplitudes, 0.0)
    p = float(probs[outcome])
    amps /= np.sqrt(p)
    return MeasurementOutcome(outcome, p), _wrap_state(state.num_qubits, amps)


def trial_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent RNG stream for one trial.

    Stream ``t`` is ``default_rng(SeedSequence(master_seed, spawn_key=(t,)))``:
    numpy's documented counter scheme for deriving child streams.  Streams are
    reproducible across platforms and independent of how trials are scheduled
    across threads.
    """
    if trial_index < 0:
        raise ValueError(f"trial index must be >= 0, got {trial_index}")
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return np.random.default_rng(seq)

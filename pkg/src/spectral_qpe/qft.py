"""Quantum Fourier transform over a qubit register.

Sign convention: the forward transform maps |j> to
(1/sqrt(M)) sum_k e^{+2*pi*i*jk/M} |k>.  The inverse is therefore the readout
transform: it concentrates a phase state (1/sqrt(M)) sum_j e^{i*w*j}|j> at
bin w*M/(2*pi), so a measured bin j estimates w with a plus sign as 2*pi*j/M.

Implemented as the standard Hadamard + controlled-phase circuit with a final
bit-reversal swap layer, so the returned register is in natural bit order.
Register lists are least-significant-bit first, like everywhere else in the
package.  Both transforms accept extra ``controls``: with controls given, the
whole transform acts only on amplitudes whose control qubits are all |1>
(every constituent gate picks up the controls), which is what conditional
evolution of grid problems needs.
"""

from __future__ import annotations

import math

from . import statevector as sv


def _validated_register(state: sv.StateVector, register, controls) -> tuple[list[int], list[int]]:
    register = list(register)
    controls = list(controls)
    if not register:
        raise ValueError("QFT register must contain at least one qubit")
    sv._check_qubits(register + controls, state.num_qubits, "register/control")
    return register, controls


def _apply(state: sv.StateVector, gate: sv.GateMatrix, targets, controls) -> sv.StateVector:
    if controls:
        return sv.apply_controlled_gate(state, gate, controls, targets)
    return sv.apply_gate(state, gate, targets)


def _bit_reversal(state: sv.StateVector, register, controls) -> sv.StateVector:
    swap = sv.swap_gate()
    m = len(register)
    for i in range(m // 2):
        state = _apply(state, swap, [register[i], register[m - 1 - i]], controls)
    return state


def qft_forward(state: sv.StateVector, register, controls=()) -> sv.StateVector:
    """Apply the forward transform (e^{+2*pi*i*jk/M} kernel) to ``register``."""
    register, controls = _validated_register(state, register, controls)
    h = sv.hadamard()
    for t in range(len(register) - 1, -1, -1):
        state = _apply(state, h, [register[t]], controls)
        for b in range(t - 1, -1, -1):
            gate = sv.phase_shift(math.pi / 2 ** (t - b))
            state = _apply(state, gate, [register[t]], [*controls, register[b]])
    return _bit_reversal(state, register, controls)


def qft_inverse(state: sv.StateVector, register, controls=()) -> sv.StateVector:
    """Exact inverse of :func:`qft_forward` (the readout transform)."""
    register, controls = _validated_register(state, register, controls)
    state = _bit_reversal(state, register, controls)
    h = sv.hadamard()
    for t in range(len(register)):
        for b in range(t):
            gate = sv.phase_shift(-math.pi / 2 ** (t - b))
            state = _apply(state, gate, [register[t]], [*controls, register[b]])
        state = _apply(state, h, [register[t]], controls)
    return state

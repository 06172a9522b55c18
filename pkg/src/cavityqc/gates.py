"""Ideal gate unitaries on the pairwise-encoded logical subspace.

A logical qubit is a node pair holding exactly one excitation:
|0_L> = |0>|1> and |1_L> = |1>|0>. Partial excitation transfer rotates the
logical qubit about x, a differential frequency shift rotates it about z,
and transfer conditioned on a control qubit gives the entangling gate.
Matrices here are the ideal references that the physical-mechanism
simulations must reproduce on the logical subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionFailure

UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class GateUnitary:
    """A unitary with its arity (in logical qubits), label and parameters."""

    matrix: np.ndarray
    arity: int
    label: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        d = 2**self.arity
        if m.shape != (d, d):
            raise ValueError(f"{self.label}: expected a {d}x{d} matrix")
        dev = np.abs(m @ m.conj().T - np.eye(d)).max()
        if dev > UNITARITY_TOL * 10:
            raise ValueError(f"{self.label}: matrix is not unitary (dev {dev:.2e})")


def et_gate(theta: float) -> GateUnitary:
    """Partial excitation transfer on span{|0>|1>, |1>|0>}.

    [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]; acts on the logical
    qubit as the Bloch rotation R_x(theta). A full transfer (theta = pi)
    swaps the pair states up to the overall factor -i.
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    m = np.array([[c, -1j * s], [-1j * s, c]])
    return GateUnitary(m, arity=1, label="ET", params=(theta,))


def phase_gate(chi: float) -> GateUnitary:
    """Differential pair phase diag(e^(-i chi/2), e^(i chi/2)): logical R_z."""
    m = np.diag([np.exp(-1j * chi / 2.0), np.exp(1j * chi / 2.0)])
    return GateUnitary(m, arity=1, label="PHASE", params=(chi,))


def controlled_et(theta: float) -> GateUnitary:
    """Excitation transfer on the target pair, gated by the control qubit.

    Identity when the control is |0_L>, et_gate(theta) on the target when
    the control is |1_L>. Physical realizations (photon-number blockade or
    the transistor coupling) must match this matrix on the logical
    subspace.
    """
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = et_gate(theta).matrix
    return GateUnitary(m, arity=2, label="C(ET)", params=(theta,))


def pcet() -> GateUnitary:
    """Phased controlled transfer: (PHASE(pi/2) x I) . C(ET(pi)).

    Equals the logical CNOT times the global phase e^(-i pi/4).
    """
    phase_on_control = np.kron(phase_gate(np.pi / 2.0).matrix, np.eye(2))
    m = phase_on_control @ controlled_et(np.pi).matrix
    return GateUnitary(m, arity=2, label="PCET")


CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

TOFFOLI = np.eye(8, dtype=complex)
TOFFOLI[6:, 6:] = np.array([[0, 1], [1, 0]])


def haar_random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary from a seeded generator (deterministic)."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# Rotation synthesis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationSynthesis:
    """z-x-z Euler synthesis of a single-qubit unitary.

    ``angles`` = (a, b, c) with target ~ Rz(a) Rx(b) Rz(c) up to the global
    phase; ``ops`` lists the gates in application order (first gate first),
    zero-angle entries dropped.
    """

    angles: tuple[float, float, float]
    ops: tuple[tuple[str, float], ...]
    global_phase: complex

    def matrix(self) -> np.ndarray:
        a, b, c = self.angles
        return phase_gate(a).matrix @ et_gate(b).matrix @ phase_gate(c).matrix


def _wrap_angle(x: float) -> float:
    wrapped = float(np.mod(x + np.pi, 2.0 * np.pi) - np.pi)
    return 0.0 if abs(wrapped) < 1e-12 else wrapped


def synthesize_rotation(target, tol: float = 1e-10) -> RotationSynthesis:
    """Decompose a single-qubit unitary into transfer and phase rotations.

    Any U with unit-modulus determinant factors (up to global phase) as
    Rz(a) Rx(b) Rz(c); the equivalent gate sequence is PHASE(c), ET(b),
    PHASE(a) applied in that order. Raises DecompositionFailure for
    non-unitary input; the recomposition is checked against the target to
    ``tol``.
    """
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2):
        raise DecompositionFailure("expected a 2x2 matrix")
    if np.abs(u @ u.conj().T - np.eye(2)).max() > 1e-8:
        raise DecompositionFailure("input matrix is not unitary")

    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    su = u / np.sqrt(det)

    # z-y-z angles of the special-unitary part
    beta = 2.0 * np.arctan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[1, 0]) < 1e-12:
        alpha_plus_gamma = 2.0 * np.angle(su[1, 1])
        alpha_minus_gamma = 0.0
    elif abs(su[0, 0]) < 1e-12:
        alpha_plus_gamma = 0.0
        alpha_minus_gamma = 2.0 * np.angle(su[1, 0])
    else:
        alpha_plus_gamma = 2.0 * np.angle(su[1, 1])
        alpha_minus_gamma = 2.0 * np.angle(su[1, 0])
    alpha = 0.5 * (alpha_plus_gamma + alpha_minus_gamma)
    gamma = 0.5 * (alpha_plus_gamma - alpha_minus_gamma)

    # rotate the middle axis from y to x
    a = _wrap_angle(alpha + np.pi / 2.0)
    b = _wrap_angle(beta)
    c = _wrap_angle(gamma - np.pi / 2.0)
    # degenerate middles collapse the two z-rotations into one
    if b == 0.0:
        a, c = _wrap_angle(a + c), 0.0
    elif abs(abs(b) - np.pi) < 1e-12:
        a, c = _wrap_angle(a - c), 0.0

    recomposed = phase_gate(a).matrix @ et_gate(b).matrix @ phase_gate(c).matrix
    k = int(np.argmax(np.abs(recomposed)))
    phase = u.flat[k] / recomposed.flat[k]
    deviation = np.abs(u - phase * recomposed).max()
    if deviation > tol:
        raise DecompositionFailure(
            f"recomposition deviates by {deviation:.2e} (tolerance {tol:.1e})"
        )

    ops = tuple(
        (kind, angle)
        for kind, angle in (("PHASE", c), ("ET", b), ("PHASE", a))
        if angle != 0.0
    )
    return RotationSynthesis(angles=(a, b, c), ops=ops, global_phase=complex(phase))


# ---------------------------------------------------------------------------
# Pairwise encoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogicalQubit:
    """A node pair holding exactly one excitation.

    |0_L> puts the excitation on node_b (occupations (0, 1)), |1_L> on
    node_a (occupations (1, 0)); anything else lies outside the logical
    subspace.
    """

    node_a: int
    node_b: int

    def occupations(self, bit: int) -> tuple[int, int]:
        if bit not in (0, 1):
            raise ValueError("logical bit must be 0 or 1")
        return (1, 0) if bit else (0, 1)


def encode(bits) -> tuple[int, ...]:
    """Node occupations of a logical bitstring: 0 -> (0, 1), 1 -> (1, 0)."""
    occ: list[int] = []
    for b in bits:
        bit = int(b)
        if bit not in (0, 1):
            raise ValueError("logical bits must be 0 or 1")
        occ.extend((1, 0) if bit else (0, 1))
    return tuple(occ)


def decode(amplitudes, n_qubits: int) -> tuple[np.ndarray, float]:
    """Project node-occupation amplitudes onto the encoded subspace.

    ``amplitudes`` maps occupation tuples (two nodes per qubit) to complex
    amplitudes; returns the 2^n logical vector and the leakage norm left
    outside the encoded subspace. The input is assumed normalized.
    """
    logical = np.zeros(2**n_qubits, dtype=complex)
    captured = 0.0
    for occ, amp in amplitudes.items():
        if len(occ) != 2 * n_qubits:
            raise ValueError("occupation tuple length must be 2 * n_qubits")
        bits = []
        ok = True
        for q in range(n_qubits):
            pair = (occ[2 * q], occ[2 * q + 1])
            if pair == (0, 1):
                bits.append(0)
            elif pair == (1, 0):
                bits.append(1)
            else:
                ok = False
                break
        if ok:
            index = int("".join(str(b) for b in bits), 2) if bits else 0
            logical[index] += amp
            captured += abs(amp) ** 2
    leakage = float(max(0.0, 1.0 - captured))
    return logical, leakage

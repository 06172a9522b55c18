"""Time evolution: exact propagation, closed forms, and the model-error sweep.

Propagation is by eigendecomposition of the (desk-scale) dense Hermitian
matrix, so no integrator tolerance enters any comparison. Closed forms
implemented here: the two-pair swap evolution, the photon-number blockade
amplitudes, and the transistor transfer; each is validated elsewhere
against direct numeric propagation of the corresponding Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import (
    CollectiveBasis,
    CompositeBasis,
    FockFactor,
    Mode,
    build_microscopic_basis,
    collective_excitation_state,
    pair_isometry,
)
from .errors import BasisMismatch
from .hamiltonian import (
    CouplingSet,
    DetuningSet,
    EffectiveRates,
    HamiltonianMatrix,
    microscopic_hamiltonian,
    transistor_hamiltonian,
    two_level_swap_hamiltonian,
)
from .state import StateVector, fidelity, inner

__all__ = [
    "StateVector",
    "fidelity",
    "inner",
    "propagate",
    "evolve_on_grid",
    "analytic_pair_evolution",
    "BlockadeSolution",
    "blockade_solution",
    "TransistorBasis",
    "transistor_evolution",
    "transistor_oracle",
    "ErrorReport",
    "effective_model_error",
    "first_maximum_time",
]


def propagate(h: HamiltonianMatrix, psi0: StateVector, t: float) -> StateVector:
    """psi(t) = exp(-i H t) psi(0) via the cached eigendecomposition."""
    if psi0.basis is not None and h.basis is not None and psi0.basis != h.basis:
        raise BasisMismatch("state and Hamiltonian live on different bases")
    if psi0.dim != h.dim:
        raise BasisMismatch(f"dimension mismatch: {psi0.dim} vs {h.dim}")
    if not np.isfinite(t):
        raise ValueError("propagation time must be finite")
    if t == 0.0:
        return StateVector(psi0.amplitudes.copy(), psi0.basis)
    w, v = h.eigensystem()
    coeffs = v.conj().T @ psi0.amplitudes
    amps = v @ (np.exp(-1j * w * t) * coeffs)
    return StateVector(amps, psi0.basis)


def evolve_on_grid(
    h: HamiltonianMatrix, psi0: StateVector, times: np.ndarray
) -> np.ndarray:
    """(len(times), dim) array of propagated amplitudes."""
    if psi0.basis is not None and h.basis is not None and psi0.basis != h.basis:
        raise BasisMismatch("state and Hamiltonian live on different bases")
    w, v = h.eigensystem()
    coeffs = v.conj().T @ psi0.amplitudes
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    return (phases * coeffs) @ v.T


def first_maximum_time(fn, t_low: float, t_high: float, iterations: int = 200) -> float:
    """Location of the maximum of a unimodal function by ternary search."""
    lo, hi = float(t_low), float(t_high)
    for _ in range(iterations):
        third = (hi - lo) / 3.0
        m1, m2 = lo + third, hi - third
        if fn(m1) < fn(m2):
            lo = m1
        else:
            hi = m2
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Closed-form pair evolution
# ---------------------------------------------------------------------------


def analytic_pair_evolution(
    alpha1: complex,
    beta1: complex,
    alpha2: complex,
    beta2: complex,
    swap_rate: float,
    n_atoms: int,
    t: float,
    basis: CollectiveBasis | None = None,
) -> StateVector:
    """Closed-form swap evolution of a product pair state, interaction frame.

    Starting from (alpha1|0> + beta1|1>)(alpha2|0> + beta2|1>) the two
    coherent oscillations run at swap_rate * N in the single-excitation
    sector and at twice that in the doubly-excited sector, each sector
    carrying its own overall phase:

        psi(t) = a1 a2 |00>
               + e^(-i w t) { b1 a2 [cos(wt)|10> - i sin(wt)|01>]
                            + a1 b2 [cos(wt)|01> - i sin(wt)|10>] }
               + e^(-2 i w t) b1 b2 [cos(2wt)|11> - i sin(2wt)|2+>],

    with w = swap_rate * n_atoms.
    """
    for pair in ((alpha1, beta1), (alpha2, beta2)):
        norm = abs(pair[0]) ** 2 + abs(pair[1]) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("each node amplitude pair must be normalized")
    w = swap_rate * n_atoms
    c1, s1 = np.cos(w * t), np.sin(w * t)
    c2, s2 = np.cos(2 * w * t), np.sin(2 * w * t)
    ph1 = np.exp(-1j * w * t)
    ph2 = np.exp(-2j * w * t)
    amps = np.zeros(6, dtype=complex)
    amps[0] = alpha1 * alpha2
    amps[1] = ph1 * (beta1 * alpha2 * c1 - 1j * alpha1 * beta2 * s1)
    amps[2] = ph1 * (alpha1 * beta2 * c1 - 1j * beta1 * alpha2 * s1)
    amps[3] = ph2 * beta1 * beta2 * c2
    amps[4] = ph2 * beta1 * beta2 * (-1j) * s2
    return StateVector(amps, basis if basis is not None else CollectiveBasis())


# ---------------------------------------------------------------------------
# Photon-number blockade amplitudes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockadeSolution:
    """Closed-form single-excitation amplitudes under n cavity photons.

    c2 rides the state with the excitation on node 1, c3 on node 2, for the
    initial condition c2(0) = 1, c3(0) = 0. The evolution solves

        dc2/dt = i E2' c2 - i sqrt(N1 N2) W c3
        dc3/dt = i E3' c3 - i sqrt(N1 N2) W c2

    with dressed diagonal phases E2', E3' and exchange rate W; c3 is the
    two-frequency superposition C1 e^(i r1 t) + C2 e^(i r2 t).
    """

    r1: float
    r2: float
    c_const_1: float
    c_const_2: float
    energy_2: float
    energy_3: float
    exchange: float
    diag_2: float
    diag_3: float

    def c3(self, t):
        t = np.asarray(t, dtype=float)
        return self.c_const_1 * np.exp(1j * self.r1 * t) + self.c_const_2 * np.exp(
            1j * self.r2 * t
        )

    def c2(self, t):
        t = np.asarray(t, dtype=float)
        if self.exchange == 0.0:
            return np.exp(1j * self.diag_2 * t)
        return (self.c_const_1 / self.exchange) * (
            (self.diag_3 - self.r1) * np.exp(1j * self.r1 * t)
            - (self.diag_3 - self.r2) * np.exp(1j * self.r2 * t)
        )


def blockade_solution(
    rates: EffectiveRates, n1: int, n2: int, n_photons: int
) -> BlockadeSolution:
    """Solve the dressed two-state exchange for c2(0)=1, c3(0)=0.

    The two frequencies are

        r_{1,2} = [ (N1-1) wt1 + (N2-1) wt2 - N1 W1 - N2 W2
                    +/- sqrt( (wt2 - wt1 + N2 W2 - N1 W1)^2
                              + 4 N1 N2 Ws^2 ) ] / 2

    with dressed frequencies wt_m = w_m + 2 n W_m; the constants obey
    C1 = -C2 = -sqrt(N1 N2) Ws / (r1 - r2). The stored energies are the
    bare-frequency diagonal values (symmetric in the two nodes).
    """
    swap = complex(rates.swap_rate)
    if abs(swap.imag) > 1e-12 * max(1.0, abs(swap)):
        raise ValueError("blockade closed form assumes a real exchange rate")
    ws = swap.real
    w1, w2 = rates.shift_rate_1, rates.shift_rate_2
    wt1 = rates.dressed_freq(0, n_photons)
    wt2 = rates.dressed_freq(1, n_photons)

    diag_2 = (n1 / 2.0 - 1.0) * wt1 + (n2 / 2.0) * wt2 - n1 * w1
    diag_3 = (n1 / 2.0) * wt1 + (n2 / 2.0 - 1.0) * wt2 - n2 * w2
    exchange = np.sqrt(n1 * n2) * ws
    disc = np.sqrt((wt2 - wt1 + n2 * w2 - n1 * w1) ** 2 + 4.0 * n1 * n2 * ws**2)
    mean = 0.5 * (diag_2 + diag_3)
    r1 = mean + 0.5 * disc
    r2 = mean - 0.5 * disc
    c1 = 0.0 if disc == 0.0 else -exchange / disc

    energy_2 = (
        (n1 / 2.0 - 1.0) * rates.transition_freq_1
        + (n2 / 2.0) * rates.transition_freq_2
        - n1 * w1
    )
    energy_3 = (
        (n1 / 2.0) * rates.transition_freq_1
        + (n2 / 2.0 - 1.0) * rates.transition_freq_2
        - n2 * w2
    )
    return BlockadeSolution(
        r1=float(r1),
        r2=float(r2),
        c_const_1=float(c1),
        c_const_2=float(-c1),
        energy_2=float(energy_2),
        energy_3=float(energy_3),
        exchange=float(exchange),
        diag_2=float(diag_2),
        diag_3=float(diag_3),
    )


# ---------------------------------------------------------------------------
# Transistor transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransistorBasis:
    """Four collective states reachable from the transistor initial state.

    Labels give the control excitation and the two target node states,
    where target "1" is a lower-transition excitation and "2" a parked
    upper-level excitation.
    """

    n_atoms: int = 1

    dim = 4
    labels = ("ctrl1|01", "ctrl1|10", "ctrl0|02", "ctrl0|20")

    def index(self, label: str) -> int:
        return self.labels.index(label)


def transistor_evolution(
    alpha: complex,
    beta: complex,
    n_atoms: int,
    rate: float,
    t: float,
    basis: TransistorBasis | None = None,
) -> StateVector:
    """Closed-form transistor transfer of a target superposition.

    The excited control drains into the targets' parked level at the
    collectively enhanced rate sqrt(N) * rate:

        psi(t) =   cos(sqrt(N) W t) |ctrl1>(alpha|01> + beta|10>)
               - i sin(sqrt(N) W t) |ctrl0>(alpha|02> + beta|20>).
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ValueError("target amplitudes must be normalized")
    arg = np.sqrt(n_atoms) * rate * t
    c, s = np.cos(arg), np.sin(arg)
    amps = np.array([alpha * c, beta * c, -1j * alpha * s, -1j * beta * s])
    return StateVector(amps, basis if basis is not None else TransistorBasis(n_atoms))


def _merge_excitations(basis: CompositeBasis, *vecs: np.ndarray) -> np.ndarray:
    """Product of excitation patterns living on disjoint node sets."""
    out = vecs[0]
    for v in vecs[1:]:
        merged = np.zeros(basis.dim, dtype=complex)
        for i in np.nonzero(out)[0]:
            occ_i = basis.occupation(i)
            for j in np.nonzero(v)[0]:
                occ_j = basis.occupation(j)
                merged[basis.index(tuple(a + b for a, b in zip(occ_i, occ_j)))] = (
                    out[i] * v[j]
                )
        out = merged
    return out


def transistor_oracle(
    control,
    targets,
    couplings: CouplingSet,
    detunings: DetuningSet,
    alpha: complex,
    beta: complex,
    include_target_upper_swap: bool = False,
):
    """Numeric ingredients for checking the closed-form transistor transfer.

    Returns (hamiltonian, initial StateVector, projector) where the
    projector rows are the four reachable collective states in
    TransistorBasis order; projecting a propagated microscopic state onto
    them yields amplitudes directly comparable to transistor_evolution.
    """
    h = transistor_hamiltonian(
        control,
        targets,
        couplings,
        detunings,
        include_target_upper_swap=include_target_upper_swap,
    )
    mb = h.basis
    ctrl_exc = collective_excitation_state(mb, 0, 1)
    low = [collective_excitation_state(mb, m, 1) for m in (1, 2)]
    up = [collective_excitation_state(mb, m, 2) for m in (1, 2)]
    states = np.array(
        [
            _merge_excitations(mb, ctrl_exc, low[1]),
            _merge_excitations(mb, ctrl_exc, low[0]),
            up[1],
            up[0],
        ]
    )
    psi0 = StateVector(alpha * states[0] + beta * states[1], mb)
    return h, psi0, states


# ---------------------------------------------------------------------------
# Effective-model error sweep
# ---------------------------------------------------------------------------

ERROR_METRIC = (
    "max over the time grid of 1 - |<psi_eff(t)|P psi_full(t)>|^2 / |P psi_full(t)|^2, "
    "P projecting onto the zero-photon collective pair subspace; leakage "
    "1 - |P psi_full|^2 is reported separately"
)


@dataclass(frozen=True)
class ErrorReport:
    """Effective-versus-microscopic error study over a detuning sweep."""

    deltas: tuple[float, ...]
    max_infidelity: tuple[float, ...]
    max_leakage: tuple[float, ...]
    swap_periods: float
    grid_points: int
    metric: str = ERROR_METRIC

    def rows(self):
        return [
            {"delta": d, "max_infidelity": i, "max_leakage": l}
            for d, i, l in zip(self.deltas, self.max_infidelity, self.max_leakage)
        ]


def effective_model_error(
    nodes,
    couplings: CouplingSet,
    deltas,
    swap_periods: float = 1.0,
    grid_points: int = 200,
    n_max: int = 2,
) -> ErrorReport:
    """Compare microscopic and effective swap dynamics over a detuning sweep.

    For each detuning the same initial state (one collective excitation on
    node 1, photon vacuum) is propagated under (a) the full microscopic
    Hamiltonian with one cavity mode at frequency gap - delta and (b) the
    collective swap Hamiltonian with rate |g|^2/delta, over ``swap_periods``
    full swap periods pi / (sqrt(N1 N2) rate). The report carries, per
    delta, the maximum projected infidelity and the maximum leakage out of
    the zero-photon collective subspace.
    """
    nodes = tuple(nodes)
    if len(nodes) != 2 or any(n.level_count != 2 for n in nodes):
        raise BasisMismatch("error study runs on a two-level node pair")
    gaps = {node.transition_freq for node in nodes}
    if len(gaps) != 1:
        raise ValueError("nodes must share a transition frequency")
    gap = gaps.pop()
    g = couplings.coupling(0, 0)
    if couplings.coupling(0, 1) != g:
        raise ValueError("error study assumes equal couplings")

    n1, n2 = (node.atom_count for node in nodes)
    atomic = build_microscopic_basis(nodes, fock=None)
    isometry = pair_isometry(atomic)
    collective = CollectiveBasis(nodes)

    max_inf, max_leak = [], []
    for delta in deltas:
        swap_rate = abs(g) ** 2 / delta if delta != 0 else 0.0
        if swap_rate != 0.0:
            period = np.pi / (np.sqrt(n1 * n2) * abs(swap_rate))
        else:
            period = np.pi  # arbitrary finite window for the decoupled case
        times = np.linspace(0.0, swap_periods * period, grid_points)

        fock = FockFactor((Mode(frequency=gap - delta),), (n_max,))
        micro_basis = build_microscopic_basis(nodes, fock)
        h_full = microscopic_hamiltonian(nodes, couplings, fock)
        h_eff = two_level_swap_hamiltonian(nodes, swap_rate)

        vac = micro_basis.fock_block_indices((0,))
        psi_full0 = np.zeros(micro_basis.dim, dtype=complex)
        psi_full0[vac] = collective_excitation_state(atomic, 0)
        psi_eff0 = StateVector(isometry.conj() @ psi_full0[vac], collective)

        full = evolve_on_grid(h_full, StateVector(psi_full0, micro_basis), times)
        eff = evolve_on_grid(h_eff, psi_eff0, times)

        projected = full[:, vac] @ isometry.conj().T
        proj_norm_sq = np.sum(np.abs(projected) ** 2, axis=1)
        overlap = np.abs(np.sum(np.conj(eff) * projected, axis=1)) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            infidelity = 1.0 - np.where(proj_norm_sq > 0, overlap / proj_norm_sq, 0.0)
        leakage = 1.0 - proj_norm_sq

        max_inf.append(float(np.clip(infidelity, 0.0, 1.0).max()))
        max_leak.append(float(np.clip(leakage, 0.0, 1.0).max()))

    return ErrorReport(
        deltas=tuple(float(d) for d in deltas),
        max_infidelity=tuple(max_inf),
        max_leakage=tuple(max_leak),
        swap_periods=swap_periods,
        grid_points=grid_points,
    )

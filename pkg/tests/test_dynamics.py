"""Propagation, closed forms, blockade amplitudes, transistor, error sweep."""

import numpy as np
import pytest

from cavityqc import (
    CouplingSet,
    DetuningSet,
    EffectiveRates,
    NodeSpec,
    StateVector,
    analytic_pair_evolution,
    blockade_solution,
    effective_model_error,
    evolve_on_grid,
    fidelity,
    first_maximum_time,
    lamb_shift_hamiltonian,
    propagate,
    transistor_evolution,
    transistor_rate,
    two_level_swap_hamiltonian,
)
from cavityqc.dynamics import transistor_oracle
from cavityqc.errors import BasisMismatch
from cavityqc.hamiltonian import HamiltonianMatrix

RATE = 0.7


def _swap_pair(n_atoms, rate=RATE, **kwargs):
    nodes = (NodeSpec(n_atoms), NodeSpec(n_atoms))
    return two_level_swap_hamiltonian(nodes, rate, rotating_frame=True, **kwargs)


def _basis_state(h, index):
    vec = np.zeros(h.dim, dtype=complex)
    vec[index] = 1.0
    return StateVector(vec, h.basis)


# --- propagation ----------------------------------------------------------------


def test_propagate_identity_at_zero_time():
    h = _swap_pair(2)
    psi0 = _basis_state(h, 1)
    out = propagate(h, psi0, 0.0)
    assert np.abs(out.amplitudes - psi0.amplitudes).max() == 0.0


def test_rabi_half_period():
    omega = 0.3
    h = HamiltonianMatrix(omega * np.array([[0, 1], [1, 0]], dtype=complex), None)
    psi0 = StateVector(np.array([1.0, 0.0]), None)
    out = propagate(h, psi0, np.pi / (2 * omega))
    assert abs(out.amplitudes[0]) < 1e-12
    assert out.amplitudes[1] == pytest.approx(-1j, abs=1e-12)


def test_swap_oscillation_probability_closed_form():
    n_atoms = 3
    h = _swap_pair(n_atoms)
    psi0 = _basis_state(h, 1)
    for t in np.linspace(0.0, 5.0, 50):
        p = propagate(h, psi0, t).probability(2)
        assert p == pytest.approx(np.sin(n_atoms * RATE * t) ** 2, abs=1e-12)


def test_norm_conserved():
    h = _swap_pair(3)
    rng = np.random.default_rng(7)
    amps = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi0 = StateVector(amps / np.linalg.norm(amps), h.basis)
    for t in (0.1, 3.7, 120.0):
        assert abs(propagate(h, psi0, t).norm() - 1.0) < 1e-9


def test_propagate_rejects_basis_mismatch():
    h = _swap_pair(2)
    other = _swap_pair(3)
    psi0 = _basis_state(other, 0)
    with pytest.raises(BasisMismatch):
        propagate(h, psi0, 1.0)


def test_fidelity_examples():
    h = _swap_pair(2)
    a = _basis_state(h, 1)
    b = _basis_state(h, 2)
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == pytest.approx(0.0)
    theta = 0.77
    mixed = StateVector(
        np.cos(theta) * a.amplitudes - 1j * np.sin(theta) * b.amplitudes, h.basis
    )
    assert fidelity(a, mixed) == pytest.approx(np.cos(theta) ** 2, abs=1e-12)


# --- closed-form pair evolution -----------------------------------------------


def test_pair_evolution_full_transfer_phase():
    # beta1 = alpha2 = 1: after a quarter period the excitation sits on
    # node 2 with amplitude (-i) * (-i) = -1
    n_atoms = 2
    t = np.pi / (2 * RATE * n_atoms)
    out = analytic_pair_evolution(0.0, 1.0, 1.0, 0.0, RATE, n_atoms, t)
    expected = np.zeros(6, dtype=complex)
    expected[2] = -1.0
    assert np.abs(out.amplitudes - expected).max() < 1e-12


def test_pair_evolution_identity_at_zero_time():
    a1, b1 = 0.6, 0.8
    a2, b2 = 1 / np.sqrt(3), np.sqrt(2 / 3)
    out = analytic_pair_evolution(a1, b1, a2, b2, RATE, 2, 0.0)
    expected = np.array([a1 * a2, b1 * a2, a1 * b2, b1 * b2, 0.0, 0.0])
    assert np.abs(out.amplitudes - expected).max() < 1e-12


def test_pair_evolution_doubled_frequency_sector():
    n_atoms = 3
    for t in np.linspace(0.0, 2.0, 25):
        out = analytic_pair_evolution(0.0, 1.0, 0.0, 1.0, RATE, n_atoms, t)
        assert out.probability(4) == pytest.approx(
            np.sin(2 * RATE * n_atoms * t) ** 2, abs=1e-12
        )


def test_pair_evolution_requires_normalized_inputs():
    with pytest.raises(ValueError):
        analytic_pair_evolution(1.0, 1.0, 1.0, 0.0, RATE, 2, 0.0)


@pytest.mark.parametrize("n_atoms", [1, 2, 3])
def test_pair_evolution_matches_propagation(n_atoms):
    h = _swap_pair(n_atoms)
    a1, b1 = 0.6, 0.8j
    a2, b2 = np.sqrt(0.3), -np.sqrt(0.7)
    psi0 = analytic_pair_evolution(a1, b1, a2, b2, RATE, n_atoms, 0.0, basis=h.basis)
    for t in np.linspace(0.0, 9.0, 100):
        numeric = propagate(h, psi0, t)
        closed = analytic_pair_evolution(a1, b1, a2, b2, RATE, n_atoms, t, basis=h.basis)
        assert fidelity(numeric, closed) >= 1.0 - 1e-9


def test_extracted_frequencies():
    for n_atoms in (1, 2, 3):
        h = _swap_pair(n_atoms)
        psi2 = _basis_state(h, 1)
        observed = lambda t: propagate(h, psi2, t).probability(2)
        t_star = first_maximum_time(observed, 0.0, np.pi / (n_atoms * RATE))
        assert np.pi / (2 * t_star) == pytest.approx(n_atoms * RATE, rel=1e-6)

        psi4 = _basis_state(h, 3)
        doubled = lambda t: propagate(h, psi4, t).probability(4)
        t_star = first_maximum_time(doubled, 0.0, np.pi / (2 * n_atoms * RATE))
        assert np.pi / (2 * t_star) == pytest.approx(2 * n_atoms * RATE, rel=1e-6)


# --- blockade amplitudes ---------------------------------------------------------


def _resonant_rates(n1, n2, shift_1, shift_2, swap):
    # bare frequencies chosen so freq_2 - freq_1 + n2 shift_2 - n1 shift_1 = 0
    return EffectiveRates(
        swap_rate=swap,
        shift_rate_1=shift_1,
        shift_rate_2=shift_2,
        transition_freq_1=0.0,
        transition_freq_2=n1 * shift_1 - n2 * shift_2,
    )


def test_blockade_resonant_full_transfer():
    n1, n2, swap = 2, 3, 0.31
    rates = _resonant_rates(n1, n2, 0.12, 0.25, swap)
    sol = blockade_solution(rates, n1, n2, 0)
    t_star = np.pi / (2 * np.sqrt(n1 * n2) * swap)
    assert abs(sol.c3(t_star)) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert sol.c_const_1 == pytest.approx(-0.5)
    assert sol.c_const_2 == pytest.approx(0.5)
    # phase structure: c2 = e^(i (E2+E3) t / 2) cos(. t), c3 carries the -i
    for t in np.linspace(0.0, 3.0, 17):
        phase = np.exp(0.5j * (sol.energy_2 + sol.energy_3) * t)
        assert sol.c2(t) == pytest.approx(
            phase * np.cos(np.sqrt(n1 * n2) * swap * t), abs=1e-12
        )
        assert sol.c3(t) == pytest.approx(
            -1j * phase * np.sin(np.sqrt(n1 * n2) * swap * t), abs=1e-12
        )


def test_blockade_photon_suppression():
    # one photon with (shift_2 - shift_1)^2 = 1e6 N1 N2 swap^2 blocks transfer
    n1 = n2 = 1
    swap = 1e-4
    gap = np.sqrt(1e6 * n1 * n2 * swap**2)
    rates = _resonant_rates(n1, n2, 0.05, 0.05 + gap, swap)
    sol = blockade_solution(rates, n1, n2, 1)
    times = np.linspace(0.0, 1e4, 4001)
    peak = (np.abs(sol.c3(times)) ** 2).max()
    assert peak < 1e-3
    # amplitude bound 4 C1^2
    assert peak <= 4 * sol.c_const_1**2 + 1e-15


def test_blockade_norm_closure_everywhere():
    rates = _resonant_rates(2, 3, 0.12, 0.25, 0.31)
    for n_ph in (0, 1, 3):
        sol = blockade_solution(rates, 2, 3, n_ph)
        times = np.linspace(0.0, 50.0, 500)
        total = np.abs(sol.c2(times)) ** 2 + np.abs(sol.c3(times)) ** 2
        assert np.abs(total - 1.0).max() < 1e-9


def test_blockade_amplitudes_satisfy_rate_equations():
    # fourth-order finite differences as the independent derivative oracle
    n1, n2, n_ph = 2, 3, 1
    shift_1, shift_2, swap = 0.12, 0.25, 0.31
    rates = EffectiveRates(swap, shift_1, shift_2, 0.3, 0.9)
    sol = blockade_solution(rates, n1, n2, n_ph)

    wt1 = 0.3 + 2 * n_ph * shift_1
    wt2 = 0.9 + 2 * n_ph * shift_2
    diag_2 = (n1 / 2 - 1) * wt1 + (n2 / 2) * wt2 - n1 * shift_1
    diag_3 = (n1 / 2) * wt1 + (n2 / 2 - 1) * wt2 - n2 * shift_2
    exchange = np.sqrt(n1 * n2) * swap

    def derivative(f, t, h=1e-3):
        return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)

    for t in np.linspace(0.1, 20.0, 40):
        res_2 = derivative(sol.c2, t) - (
            1j * diag_2 * sol.c2(t) - 1j * exchange * sol.c3(t)
        )
        res_3 = derivative(sol.c3, t) - (
            1j * diag_3 * sol.c3(t) - 1j * exchange * sol.c2(t)
        )
        assert abs(res_2) < 1e-9
        assert abs(res_3) < 1e-9


def test_blockade_matches_collective_propagation():
    # the closed form reproduces direct propagation under the pair builder
    n1, n2, n_ph = 2, 3, 2
    g1, g2, d1, d2 = 0.03, 0.04, 0.5, 0.8
    freq = 1.0
    nodes = (
        NodeSpec(n1, 2, (-freq / 2, freq / 2)),
        NodeSpec(n2, 2, (-freq / 2, freq / 2)),
    )
    couplings = CouplingSet(g21_by_node=(g1, g2))
    detunings = DetuningSet(lower=(d1, d2))
    h = lamb_shift_hamiltonian(nodes, couplings, detunings, n_photons=n_ph)
    rates = EffectiveRates.from_couplings(g1, g2, d1, d2, freq, freq)
    sol = blockade_solution(rates, n1, n2, n_ph)
    psi0 = StateVector(np.eye(6)[1], h.basis)
    for t in np.linspace(0.0, 200.0, 60):
        out = propagate(h, psi0, t)
        assert out.amplitudes[1] == pytest.approx(complex(sol.c2(t)), abs=1e-9)
        assert out.amplitudes[2] == pytest.approx(complex(sol.c3(t)), abs=1e-9)


def test_blockade_transfer_time_scaling():
    swap = 0.31
    reference = None
    for n1, n2 in ((1, 1), (2, 2), (2, 3), (3, 3)):
        rates = _resonant_rates(n1, n2, 0.12, 0.25, swap)
        sol = blockade_solution(rates, n1, n2, 0)
        probability = lambda t: abs(sol.c3(t)) ** 2
        window = np.pi / (np.sqrt(n1 * n2) * swap)
        t_star = first_maximum_time(probability, 0.0, window)
        expected = np.pi / (2 * np.sqrt(n1 * n2) * swap)
        assert t_star == pytest.approx(expected, rel=1e-6)


# --- transistor transfer ----------------------------------------------------------


def _transistor_setup(n_atoms):
    node = NodeSpec(n_atoms, 3, (0.0, 1.0, 2.0))
    couplings = CouplingSet(g21=0.02, g32=0.03)
    detunings = DetuningSet(lower=(0.5,) * 3, upper=(None, 0.7, 0.7))
    return node, couplings, detunings


def test_transistor_evolution_endpoints():
    alpha, beta = 0.6, 0.8
    out = transistor_evolution(alpha, beta, 2, 0.1, 0.0)
    assert np.abs(out.amplitudes - np.array([alpha, beta, 0, 0])).max() < 1e-12

    t_full = np.pi / (2 * np.sqrt(2) * 0.1)
    out = transistor_evolution(alpha, beta, 2, 0.1, t_full)
    assert abs(out.amplitudes[0]) < 1e-12
    assert out.amplitudes[2] == pytest.approx(-1j * alpha, abs=1e-12)
    assert out.amplitudes[3] == pytest.approx(-1j * beta, abs=1e-12)


@pytest.mark.parametrize("n_atoms", [1, 2])
def test_transistor_closed_form_matches_propagation(n_atoms):
    node, couplings, detunings = _transistor_setup(n_atoms)
    rate = transistor_rate(couplings, detunings)
    alpha, beta = 0.6, 0.8j
    h, psi0, projector = transistor_oracle(
        node, (node, node), couplings, detunings, alpha, beta
    )
    times = np.linspace(0.0, 2 * np.pi / (np.sqrt(n_atoms) * rate), 80)
    grid = evolve_on_grid(h, psi0, times)
    for t, amplitudes in zip(times, grid):
        projected = projector.conj() @ amplitudes
        closed = transistor_evolution(alpha, beta, n_atoms, rate, t)
        overlap = abs(np.vdot(closed.amplitudes, projected)) ** 2
        assert overlap >= 1.0 - 1e-9


def test_transistor_transfer_time_scales_inverse_sqrt_n():
    t_star = {}
    for n_atoms in (1, 2):
        node, couplings, detunings = _transistor_setup(n_atoms)
        rate = transistor_rate(couplings, detunings)
        h, psi0, projector = transistor_oracle(
            node, (node, node), couplings, detunings, 1.0, 0.0
        )

        def transferred(t):
            amps = propagate(h, psi0, t).amplitudes
            proj = projector.conj() @ amps
            return abs(proj[2]) ** 2 + abs(proj[3]) ** 2

        window = np.pi / (np.sqrt(n_atoms) * rate)
        t_star[n_atoms] = first_maximum_time(transferred, 0.0, window)
        assert t_star[n_atoms] == pytest.approx(
            np.pi / (2 * np.sqrt(n_atoms) * rate), rel=1e-6
        )
    assert t_star[1] / t_star[2] == pytest.approx(np.sqrt(2.0), rel=1e-6)


def test_transistor_control_in_ground_state_is_inert():
    # conditionality of the mechanism: with all control atoms in the ground
    # state the cross-transition exchange annihilates the target state
    node, couplings, detunings = _transistor_setup(2)
    h, _, projector = transistor_oracle(
        node, (node, node), couplings, detunings, 1.0, 0.0
    )
    mb = h.basis
    from cavityqc import collective_excitation_state

    target_low = collective_excitation_state(mb, 1, 1)
    assert np.abs(h.matrix @ target_low).max() < 1e-14


def test_transistor_upper_swap_channel_degrades_closed_form():
    node, couplings, detunings = _transistor_setup(2)
    rate = transistor_rate(couplings, detunings)
    h, psi0, projector = transistor_oracle(
        node, (node, node), couplings, detunings, 1.0, 0.0,
        include_target_upper_swap=True,
    )
    t = np.pi / (2 * np.sqrt(2) * rate)
    projected = projector.conj() @ propagate(h, psi0, t).amplitudes
    closed = transistor_evolution(1.0, 0.0, 2, rate, t)
    overlap = abs(np.vdot(closed.amplitudes, projected)) ** 2
    assert overlap < 1.0 - 1e-6


def test_position_phases_do_not_change_transfer_probabilities():
    # the swap algebra is position independent once the collective states
    # absorb their plane-wave phases
    from cavityqc import build_microscopic_basis, collective_excitation_state
    from cavityqc.basis import pair_isometry
    from cavityqc.hamiltonian import swap_hamiltonian_microscopic

    n_atoms = 2
    k = (1.3, -0.4, 0.8)
    positions = tuple((0.1 * j, -0.2 * j, 0.05 * j * j) for j in range(n_atoms))
    nodes = (
        NodeSpec(n_atoms, positions=positions),
        NodeSpec(n_atoms, positions=positions),
    )
    micro = build_microscopic_basis(nodes)
    h = swap_hamiltonian_microscopic(nodes, RATE, wave_vector=k, rotating_frame=True)
    psi0 = StateVector(collective_excitation_state(micro, 0, wave_vector=k), micro)
    target = pair_isometry(micro, wave_vector=k)[2]
    for t in np.linspace(0.0, 4.0, 25):
        amps = propagate(h, psi0, t).amplitudes
        p = abs(np.vdot(target, amps)) ** 2
        assert p == pytest.approx(np.sin(n_atoms * RATE * t) ** 2, abs=1e-12)


# --- effective-versus-microscopic error sweep --------------------------------------


def test_error_sweep_detuning_claim_small_n():
    g = 0.01
    nodes = (NodeSpec(1), NodeSpec(1))
    deltas = [f * np.sqrt(1) * g for f in (10, 30, 100, 300)]
    report = effective_model_error(nodes, CouplingSet(g21=g), deltas)
    infidelity = dict(zip((10, 30, 100, 300), report.max_infidelity))
    assert infidelity[30] < 1e-3
    # envelope decreases along the sweep (10% fringe jitter allowed)
    values = report.max_infidelity
    assert all(b <= 1.1 * a for a, b in zip(values, values[1:]))


def test_error_sweep_scaling_at_huge_detuning():
    g = 0.01
    nodes = (NodeSpec(1), NodeSpec(1))
    report = effective_model_error(nodes, CouplingSet(g21=g), [1e4 * g])
    assert report.max_infidelity[0] < 1e-6


def test_error_sweep_decoupled_limit():
    nodes = (NodeSpec(1), NodeSpec(1))
    report = effective_model_error(nodes, CouplingSet(g21=0.0), [0.3])
    assert report.max_infidelity[0] < 1e-12
    assert report.max_leakage[0] < 1e-12


def test_error_report_values_lie_in_unit_interval():
    g = 0.01
    nodes = (NodeSpec(2), NodeSpec(2))
    deltas = [f * np.sqrt(2) * g for f in (10, 30)]
    report = effective_model_error(nodes, CouplingSet(g21=g), deltas, grid_points=80)
    for value in report.max_infidelity + report.max_leakage:
        assert 0.0 <= value <= 1.0

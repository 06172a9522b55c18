"""Hamiltonian builders for ensemble nodes coupled through a common cavity.

Microscopic model: each atom is a two- or three-level system; cavity modes
drive the transitions

    transition 0: level 1 <-> level 0 via mode slot 0
    transition 1: level 2 <-> level 1 via mode slot 1
    transition 2: level 2 <-> level 0 via mode slot 2

with rotating-wave (excitation conserving) couplings g S_ul a + h.c.
Eliminating the photon exchange to second order (unitary transformation
H_s = exp(-s) H exp(s) with H_1 + [H_0, s] = 0) yields the effective
Hamiltonians built here: the general photon-dressed form, the photon-free
exchange form, the two-level swap special case, the photon-number
(Lamb-shift) blockade form, and the cross-transition transistor coupling.

Collective-basis builders offer two ladder conventions for the doubly
excited block: "bosonic" (large-ensemble limit, sqrt(N n) amplitudes) and
"exact" (finite-N Dicke combinatorics, sqrt(2(N-1)) for the second
excitation). The two agree on the single-excitation sector; "bosonic" is
the default because the closed-form pair evolution and its
doubled-frequency sector are exact under it at any N, which is the
convention the rest of the suite is specified against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    CollectiveBasis,
    CompositeBasis,
    FockFactor,
    NodeSpec,
    PAIR_OCCUPATIONS,
    build_microscopic_basis,
)
from .errors import (
    BasisMismatch,
    EigenFailure,
    MissingCoupling,
    ResonanceSingularity,
)

# (upper_level, lower_level) per transition index
TRANSITIONS = ((1, 0), (2, 1), (2, 0))

HERMITICITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Parameter containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingSet:
    """Interaction constants per transition, optionally per node.

    ``g21`` couples transition 0 (levels 1<->0), ``g32`` transition 1
    (2<->1), ``g31`` transition 2 (2<->0). A ``*_by_node`` tuple overrides
    the uniform value node by node. ``None`` disables a transition.
    """

    g21: complex | None = None
    g32: complex | None = None
    g31: complex | None = None
    g21_by_node: tuple[complex, ...] | None = None
    g32_by_node: tuple[complex, ...] | None = None
    g31_by_node: tuple[complex, ...] | None = None

    def enabled(self) -> tuple[int, ...]:
        out = []
        for t, (uniform, by_node) in enumerate(self._slots()):
            if uniform is not None or by_node is not None:
                out.append(t)
        return tuple(out)

    def _slots(self):
        return (
            (self.g21, self.g21_by_node),
            (self.g32, self.g32_by_node),
            (self.g31, self.g31_by_node),
        )

    def coupling(self, transition: int, node_index: int) -> complex:
        uniform, by_node = self._slots()[transition]
        if by_node is not None:
            return complex(by_node[node_index])
        if uniform is None:
            upper, lower = TRANSITIONS[transition]
            raise MissingCoupling(
                f"transition {upper + 1}<->{lower + 1} has no interaction constant"
            )
        return complex(uniform)


@dataclass(frozen=True)
class DetuningSet:
    """Per-node detunings of each transition from its driving mode.

    ``lower[m]``      : gap(1,0) of node m minus the mode-0 frequency,
    ``upper[m]``      : gap(2,1) minus the mode-1 frequency,
    ``two_photon[m]`` : gap(2,0) minus the mode-2 frequency.
    Entries may be None when the transition is unused.
    """

    lower: tuple[float | None, ...] = ()
    upper: tuple[float | None, ...] = ()
    two_photon: tuple[float | None, ...] = ()

    @classmethod
    def from_system(cls, nodes, couplings: CouplingSet, fock: FockFactor):
        """Derive detunings from level energies and mode frequencies."""
        slot_of = _mode_slots(couplings, fock)
        values: list[list[float | None]] = [[], [], []]
        for t in range(3):
            for node in nodes:
                upper, lower = TRANSITIONS[t]
                if t in slot_of and node.level_count > upper:
                    freq = fock.modes[slot_of[t]].frequency
                    values[t].append(node.energy_gap(upper, lower) - freq)
                else:
                    values[t].append(None)
        return cls(tuple(values[0]), tuple(values[1]), tuple(values[2]))

    def value(self, transition: int, node_index: int) -> float:
        seq = (self.lower, self.upper, self.two_photon)[transition]
        try:
            delta = seq[node_index]
        except IndexError:
            delta = None
        if delta is None:
            raise ResonanceSingularity(
                f"no detuning available for transition {transition}, node {node_index}"
            )
        return float(delta)


@dataclass(frozen=True)
class EffectiveRates:
    """Second-order rates of a driven two-level node pair.

    ``shift_rate_m`` is |g_m|^2 / Delta_m, the per-photon level shift of
    node m; ``swap_rate`` is the inter-node exchange rate
    g_1 conj(g_2) (1/Delta_1 + 1/Delta_2) / 2; ``transition_freq_m`` is the
    bare two-level splitting. Dressed frequencies grow linearly with the
    photon number: freq + 2 n shift.
    """

    swap_rate: complex
    shift_rate_1: float
    shift_rate_2: float
    transition_freq_1: float = 0.0
    transition_freq_2: float = 0.0

    @classmethod
    def from_couplings(cls, g1, g2, delta_1, delta_2, freq_1=0.0, freq_2=0.0):
        swap = 0.5 * g1 * np.conj(g2) * (1.0 / delta_1 + 1.0 / delta_2)
        return cls(
            swap_rate=complex(swap),
            shift_rate_1=abs(g1) ** 2 / delta_1,
            shift_rate_2=abs(g2) ** 2 / delta_2,
            transition_freq_1=freq_1,
            transition_freq_2=freq_2,
        )

    def shift_rate(self, node_index: int) -> float:
        return (self.shift_rate_1, self.shift_rate_2)[node_index]

    def transition_freq(self, node_index: int) -> float:
        return (self.transition_freq_1, self.transition_freq_2)[node_index]

    def dressed_freq(self, node_index: int, n_photons: int) -> float:
        return self.transition_freq(node_index) + 2.0 * n_photons * self.shift_rate(
            node_index
        )


@dataclass
class HamiltonianMatrix:
    """Dense Hermitian matrix tagged with its basis."""

    matrix: np.ndarray
    basis: object = field(repr=False)
    label: str = ""
    _eig: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        if self.basis is not None and self.matrix.shape[0] != self.basis.dim:
            raise BasisMismatch(
                f"matrix of dimension {self.matrix.shape[0]} does not fit basis "
                f"of dimension {self.basis.dim}"
            )
        scale = max(1.0, float(np.abs(self.matrix).max(initial=0.0)))
        dev = float(np.abs(self.matrix - self.matrix.conj().T).max(initial=0.0))
        if dev > HERMITICITY_TOL * scale:
            raise ValueError(f"matrix is not Hermitian (deviation {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigensystem(self):
        """Cached eigendecomposition (values, vectors)."""
        if self._eig is None:
            try:
                w, v = np.linalg.eigh(self.matrix)
            except np.linalg.LinAlgError as exc:
                raise EigenFailure(str(exc)) from exc
            self._eig = (w, v)
        return self._eig


# ---------------------------------------------------------------------------
# Term assembly over product bases
# ---------------------------------------------------------------------------


def _transition(upper: int, lower: int):
    return [(upper, lower, 1.0)]


def _projector(level: int):
    return [(level, level, 1.0)]


def _annihilate(n_levels: int):
    return [(n - 1, n, np.sqrt(n)) for n in range(1, n_levels)]


def _create(n_levels: int):
    return [(n + 1, n, np.sqrt(n + 1)) for n in range(n_levels - 1)]


def _number(n_levels: int):
    return [(n, n, float(n)) for n in range(n_levels)]


def _add_term(h: np.ndarray, basis: CompositeBasis, coeff: complex, *factors):
    """Add coeff * prod_k O_k to ``h``; factors are (site, entries) pairs.

    Sites must be distinct; entries list (to, from, amplitude) triples of
    each local operator. Same-site operator products must be multiplied out
    before calling.
    """
    if coeff == 0:
        return
    idx = np.arange(basis.dim)
    tables = [entries for _, entries in factors]
    for combo in itertools.product(*tables):
        mask = np.ones(basis.dim, dtype=bool)
        shift = 0
        amp = coeff
        for (site, _), (to, fr, a) in zip(factors, combo):
            mask &= basis.site_occupations(site) == fr
            shift += (to - fr) * basis.stride(site)
            amp *= a
        if not mask.any():
            continue
        src = idx[mask]
        h[src + shift, src] += amp


def _add_diag(h: np.ndarray, basis: CompositeBasis, site: int, values):
    occ = basis.site_occupations(site)
    h[np.arange(basis.dim), np.arange(basis.dim)] += np.asarray(values)[occ]


def _mode_slots(couplings: CouplingSet, fock: FockFactor | None) -> dict[int, int]:
    """Map enabled transition index -> mode slot in the Fock factor."""
    enabled = couplings.enabled()
    if fock is None:
        return {t: t for t in enabled}
    if fock.mode_count != len(enabled):
        raise MissingCoupling(
            f"{fock.mode_count} modes declared for {len(enabled)} enabled "
            "transitions; one mode per enabled transition is required"
        )
    return {t: slot for slot, t in enumerate(enabled)}


def _atom_phases(basis: CompositeBasis, wave_vector) -> np.ndarray:
    """Plane-wave phase e^(i k.r_j) per atomic site of the basis."""
    phases = np.ones(basis.n_atomic_sites, dtype=complex)
    if wave_vector is None:
        return phases
    k = np.asarray(wave_vector, dtype=float)
    for m, node in enumerate(basis.nodes):
        pos = node.atom_positions()
        for j in range(node.atom_count):
            phases[basis.atom_site(m, j)] = np.exp(1j * (pos[j] @ k))
    return phases


def _check_detuning(delta: float, nodes, context: str, floor_scale: float):
    scale = max(
        (abs(e) for node in nodes for e in node.level_energies), default=1.0
    )
    scale = max(scale, 1.0e-300)
    if abs(delta) < floor_scale * scale:
        raise ResonanceSingularity(
            f"{context}: |detuning| {abs(delta):.3e} below floor "
            f"{floor_scale:.1e} x max|energy| {scale:.3e}"
        )


# ---------------------------------------------------------------------------
# Microscopic Hamiltonian and excitation counter
# ---------------------------------------------------------------------------


def microscopic_parts(nodes, couplings: CouplingSet, fock: FockFactor, cap=None):
    """(basis, static part, interaction part) of the microscopic model.

    The static part carries atomic level energies and photon energies; the
    interaction part carries the rotating-wave atom-photon couplings.
    """
    kwargs = {} if cap is None else {"cap": cap}
    basis = build_microscopic_basis(nodes, fock, **kwargs)
    slot_of = _mode_slots(couplings, fock)

    h0 = np.zeros((basis.dim, basis.dim), dtype=complex)
    for m, node in enumerate(basis.nodes):
        for j in range(node.atom_count):
            _add_diag(h0, basis, basis.atom_site(m, j), node.level_energies)
    for a, (mode, nmax) in enumerate(zip(fock.modes, fock.n_max)):
        _add_diag(
            h0, basis, basis.mode_site(a), [mode.frequency * n for n in range(nmax + 1)]
        )

    h1 = np.zeros((basis.dim, basis.dim), dtype=complex)
    for t, slot in slot_of.items():
        upper, lower = TRANSITIONS[t]
        mode = fock.modes[slot]
        mode_site = basis.mode_site(slot)
        n_levels = fock.n_max[slot] + 1
        phases = _atom_phases(basis, mode.wave_vector)
        for m, node in enumerate(basis.nodes):
            if node.level_count <= upper:
                continue
            g = couplings.coupling(t, m)
            for j in range(node.atom_count):
                site = basis.atom_site(m, j)
                coeff = g * phases[site]
                _add_term(
                    h1,
                    basis,
                    coeff,
                    (site, _transition(upper, lower)),
                    (mode_site, _annihilate(n_levels)),
                )
                _add_term(
                    h1,
                    basis,
                    np.conj(coeff),
                    (site, _transition(lower, upper)),
                    (mode_site, _create(n_levels)),
                )
    return basis, h0, h1


def microscopic_hamiltonian(
    nodes, couplings: CouplingSet, fock: FockFactor, cap=None
) -> HamiltonianMatrix:
    """Full microscopic Hamiltonian: atoms + photons + rotating-wave coupling."""
    basis, h0, h1 = microscopic_parts(nodes, couplings, fock, cap)
    return HamiltonianMatrix(h0 + h1, basis, label="microscopic")


def total_excitation_operator(
    basis: CompositeBasis, couplings: CouplingSet
) -> np.ndarray:
    """Diagonal quanta counter that commutes with the microscopic model.

    Atoms count their level index (the top level carries two quanta);
    photons count 1 quantum per photon on transitions 0 and 1 and 2 quanta
    on the direct 2<->0 transition, matching the photon cost of the level
    they create.
    """
    slot_of = _mode_slots(couplings, basis.fock)
    diag = np.zeros(basis.dim)
    for site in range(basis.n_atomic_sites):
        diag += basis.site_occupations(site)
    for t, slot in slot_of.items():
        upper, lower = TRANSITIONS[t]
        diag += (upper - lower) * basis.site_occupations(basis.mode_site(slot))
    return np.diag(diag.astype(complex))


# ---------------------------------------------------------------------------
# Schrieffer-Wolff generator and numeric oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwCoefficients:
    """Generator coefficients, one (alpha, beta) pair per node and transition.

    alpha multiplies the photon-absorbing monomial g S_ul a, beta = -alpha
    multiplies the emitting conjugate. Disabled transitions carry zeros.
    """

    alpha: np.ndarray
    detunings: DetuningSet

    @property
    def beta(self) -> np.ndarray:
        return -self.alpha


def sw_coefficients(
    nodes, couplings: CouplingSet, fock: FockFactor, floor_scale: float = 1e-9
) -> SwCoefficients:
    """First-order generator coefficients alpha = -1/Delta per node/transition."""
    nodes = tuple(nodes)
    detunings = DetuningSet.from_system(nodes, couplings, fock)
    slot_of = _mode_slots(couplings, fock)
    alpha = np.zeros((len(nodes), 3))
    for t in slot_of:
        upper, _ = TRANSITIONS[t]
        for m, node in enumerate(nodes):
            if node.level_count <= upper:
                continue
            delta = detunings.value(t, m)
            _check_detuning(delta, nodes, f"transition {t}, node {m}", floor_scale)
            alpha[m, t] = -1.0 / delta
    return SwCoefficients(alpha=alpha, detunings=detunings)


def sw_generator(
    nodes, couplings: CouplingSet, fock: FockFactor, floor_scale: float = 1e-9
) -> np.ndarray:
    """Anti-Hermitian generator s eliminating the first-order coupling."""
    nodes = tuple(nodes)
    coeffs = sw_coefficients(nodes, couplings, fock, floor_scale)
    basis = build_microscopic_basis(nodes, fock)
    slot_of = _mode_slots(couplings, fock)
    s = np.zeros((basis.dim, basis.dim), dtype=complex)
    for t, slot in slot_of.items():
        upper, lower = TRANSITIONS[t]
        mode = fock.modes[slot]
        mode_site = basis.mode_site(slot)
        n_levels = fock.n_max[slot] + 1
        phases = _atom_phases(basis, mode.wave_vector)
        for m, node in enumerate(nodes):
            if node.level_count <= upper:
                continue
            g = couplings.coupling(t, m)
            a = coeffs.alpha[m, t]
            for j in range(node.atom_count):
                site = basis.atom_site(m, j)
                coeff = a * g * phases[site]
                _add_term(
                    s,
                    basis,
                    coeff,
                    (site, _transition(upper, lower)),
                    (mode_site, _annihilate(n_levels)),
                )
                _add_term(
                    s,
                    basis,
                    -np.conj(coeff),
                    (site, _transition(lower, upper)),
                    (mode_site, _create(n_levels)),
                )
    return s


def schrieffer_wolff_hamiltonian(
    nodes, couplings: CouplingSet, fock: FockFactor, floor_scale: float = 1e-9
) -> HamiltonianMatrix:
    """Numeric second-order Hamiltonian H_0 + [H_1, s]/2.

    Built entirely from matrix products; serves as the independent oracle
    for the analytic effective builders.
    """
    basis, h0, h1 = microscopic_parts(nodes, couplings, fock)
    s = sw_generator(nodes, couplings, fock, floor_scale)
    h = h0 + 0.5 * (h1 @ s - s @ h1)
    return HamiltonianMatrix(h, basis, label="schrieffer-wolff")


# ---------------------------------------------------------------------------
# Analytic effective Hamiltonians (microscopic bases)
# ---------------------------------------------------------------------------


def _add_swap_terms(
    h, basis, nodes, couplings, deltas_of, slot_wave_vectors, floor_scale
):
    """Intra- and inter-node exchange terms shared by the effective forms."""
    for t in couplings.enabled():
        upper, lower = TRANSITIONS[t]
        phases = _atom_phases(basis, slot_wave_vectors.get(t))
        supported = [
            m for m, node in enumerate(nodes) if node.level_count > upper
        ]
        deltas = {}
        for m in supported:
            deltas[m] = deltas_of(t, m)
            _check_detuning(
                deltas[m], nodes, f"transition {t}, node {m}", floor_scale
            )
        # intra-node double sums, self terms included
        for m in supported:
            g = couplings.coupling(t, m)
            rate = abs(g) ** 2 / deltas[m]
            for i in basis.node_sites(m):
                for j in basis.node_sites(m):
                    coeff = rate * phases[i] * np.conj(phases[j])
                    if i == j:
                        _add_term(h, basis, coeff, (i, _projector(upper)))
                    else:
                        _add_term(
                            h,
                            basis,
                            coeff,
                            (i, _transition(upper, lower)),
                            (j, _transition(lower, upper)),
                        )
        # inter-node exchange
        if len(supported) >= 2:
            for m1, m2 in itertools.combinations(supported, 2):
                g1 = couplings.coupling(t, m1)
                g2 = couplings.coupling(t, m2)
                pref = 0.5 * (1.0 / deltas[m1] + 1.0 / deltas[m2])
                for i in basis.node_sites(m1):
                    for j in basis.node_sites(m2):
                        coeff = pref * g1 * np.conj(g2) * phases[i] * np.conj(phases[j])
                        _add_term(
                            h,
                            basis,
                            coeff,
                            (i, _transition(upper, lower)),
                            (j, _transition(lower, upper)),
                        )
                        _add_term(
                            h,
                            basis,
                            np.conj(coeff),
                            (i, _transition(lower, upper)),
                            (j, _transition(upper, lower)),
                        )


def effective_hamiltonian_microscopic(
    nodes, couplings: CouplingSet, fock: FockFactor, floor_scale: float = 1e-9
) -> HamiltonianMatrix:
    """Analytic second-order Hamiltonian with explicit photon operators.

    Contains, per enabled transition: the intra-node and inter-node
    exchange terms, the photon-number level shifts
    (P_upper - P_lower) n_mode, and, when several transitions are enabled,
    the Hermitian-symmetrized two-photon and Raman cross terms. Agrees with
    the numeric Schrieffer-Wolff oracle away from the Fock truncation edge.
    """
    nodes = tuple(nodes)
    basis, h0, _ = microscopic_parts(nodes, couplings, fock)
    detunings = DetuningSet.from_system(nodes, couplings, fock)
    slot_of = _mode_slots(couplings, fock)
    wave_vectors = {t: fock.modes[slot].wave_vector for t, slot in slot_of.items()}

    h = h0.copy()
    _add_swap_terms(
        h, basis, nodes, couplings, detunings.value, wave_vectors, floor_scale
    )

    # photon-number level shifts
    for t, slot in slot_of.items():
        upper, lower = TRANSITIONS[t]
        mode_site = basis.mode_site(slot)
        n_levels = fock.n_max[slot] + 1
        for m, node in enumerate(nodes):
            if node.level_count <= upper:
                continue
            rate = abs(couplings.coupling(t, m)) ** 2 / detunings.value(t, m)
            for j in basis.node_sites(m):
                _add_term(
                    h, basis, rate, (j, _projector(upper)), (mode_site, _number(n_levels))
                )
                _add_term(
                    h, basis, -rate, (j, _projector(lower)), (mode_site, _number(n_levels))
                )

    # cross terms between transition pairs, one atom at a time
    enabled = set(slot_of)
    k_of = {
        t: np.asarray(wave_vectors[t] or (0.0, 0.0, 0.0), dtype=float)
        for t in enabled
    }

    def _mode(t):
        slot = slot_of[t]
        return basis.mode_site(slot), fock.n_max[slot] + 1

    for m, node in enumerate(nodes):
        if node.level_count < 3:
            continue
        pos = node.atom_positions()
        for j in range(node.atom_count):
            site = basis.atom_site(m, j)
            r = pos[j]
            if {0, 1} <= enabled:
                # two-photon climb to the top level: S(2<-0) a_0 a_1
                d0, d1 = detunings.value(0, m), detunings.value(1, m)
                g0, g1 = couplings.coupling(0, m), couplings.coupling(1, m)
                coeff = (
                    0.5
                    * (1.0 / d1 - 1.0 / d0)
                    * g0
                    * g1
                    * np.exp(1j * ((k_of[0] + k_of[1]) @ r))
                )
                m0, l0 = _mode(0)
                m1, l1 = _mode(1)
                _add_term(
                    h, basis, coeff,
                    (site, _transition(2, 0)), (m0, _annihilate(l0)), (m1, _annihilate(l1)),
                )
                _add_term(
                    h, basis, np.conj(coeff),
                    (site, _transition(0, 2)), (m0, _create(l0)), (m1, _create(l1)),
                )
            if {0, 2} <= enabled:
                # Raman between the upper levels: S(2<-1) a_2 adag_0
                d0, d2 = detunings.value(0, m), detunings.value(2, m)
                g0, g2 = couplings.coupling(0, m), couplings.coupling(2, m)
                coeff = (
                    0.5
                    * (1.0 / d0 + 1.0 / d2)
                    * np.conj(g0)
                    * g2
                    * np.exp(1j * ((k_of[2] - k_of[0]) @ r))
                )
                m0, l0 = _mode(0)
                m2, l2 = _mode(2)
                _add_term(
                    h, basis, coeff,
                    (site, _transition(2, 1)), (m2, _annihilate(l2)), (m0, _create(l0)),
                )
                _add_term(
                    h, basis, np.conj(coeff),
                    (site, _transition(1, 2)), (m2, _create(l2)), (m0, _annihilate(l0)),
                )
            if {1, 2} <= enabled:
                # Raman between the lower levels: S(1<-0) a_2 adag_1
                d1, d2 = detunings.value(1, m), detunings.value(2, m)
                g1, g2 = couplings.coupling(1, m), couplings.coupling(2, m)
                coeff = (
                    -0.5
                    * (1.0 / d1 + 1.0 / d2)
                    * np.conj(g1)
                    * g2
                    * np.exp(1j * ((k_of[2] - k_of[1]) @ r))
                )
                m1, l1 = _mode(1)
                m2, l2 = _mode(2)
                _add_term(
                    h, basis, coeff,
                    (site, _transition(1, 0)), (m2, _annihilate(l2)), (m1, _create(l1)),
                )
                _add_term(
                    h, basis, np.conj(coeff),
                    (site, _transition(0, 1)), (m2, _create(l2)), (m1, _annihilate(l1)),
                )

    return HamiltonianMatrix(h, basis, label="effective-microscopic")


def photon_free_effective_hamiltonian(
    nodes,
    couplings: CouplingSet,
    detunings: DetuningSet,
    wave_vectors: dict[int, tuple] | None = None,
    rotating_frame: bool = False,
    floor_scale: float = 1e-9,
) -> HamiltonianMatrix:
    """Effective exchange Hamiltonian with no real photons, atomic basis only.

    Bare level energies plus the intra- and inter-node exchange terms of
    every enabled transition; equals the zero-photon block of the general
    photon-dressed form.
    """
    nodes = tuple(nodes)
    basis = build_microscopic_basis(nodes, fock=None)
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    if not rotating_frame:
        for m, node in enumerate(nodes):
            for j in range(node.atom_count):
                _add_diag(h, basis, basis.atom_site(m, j), node.level_energies)
    _add_swap_terms(
        h, basis, nodes, couplings, detunings.value, wave_vectors or {}, floor_scale
    )
    return HamiltonianMatrix(h, basis, label="photon-free-effective")


def swap_hamiltonian_microscopic(
    nodes,
    swap_rate: float,
    wave_vector=None,
    rotating_frame: bool = False,
) -> HamiltonianMatrix:
    """Two-level swap Hamiltonian over the full product basis.

    Bare energies plus swap_rate * Jtilde_+ Jtilde_- where Jtilde_+ is the
    phase-threaded collective raising operator over all atoms of both
    nodes; the double sum includes the self terms. Equal couplings and
    detunings are assumed (the equal-rate special case of the photon-free
    form).
    """
    nodes = tuple(nodes)
    if any(node.level_count != 2 for node in nodes):
        raise BasisMismatch("swap Hamiltonian requires two-level nodes")
    basis = build_microscopic_basis(nodes, fock=None)
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    if not rotating_frame:
        for m, node in enumerate(nodes):
            for j in range(node.atom_count):
                _add_diag(h, basis, basis.atom_site(m, j), node.level_energies)
    phases = _atom_phases(basis, wave_vector)
    n_sites = basis.n_atomic_sites
    for i in range(n_sites):
        for j in range(n_sites):
            coeff = swap_rate * phases[i] * np.conj(phases[j])
            if i == j:
                _add_term(h, basis, coeff, (i, _projector(1)))
            else:
                _add_term(
                    h, basis, coeff, (i, _transition(1, 0)), (j, _transition(0, 1))
                )
    return HamiltonianMatrix(h, basis, label="swap-microscopic")


# ---------------------------------------------------------------------------
# Collective-basis builders (two-level node pairs)
# ---------------------------------------------------------------------------


def _ladder_amp(node: NodeSpec, n_from: int, ladder: str) -> float:
    """Amplitude of J_- taking the collective state |n_from> to |n_from - 1>."""
    n_atoms = node.atom_count
    if n_from == 1:
        return np.sqrt(n_atoms)
    if n_from == 2:
        if ladder == "bosonic":
            return np.sqrt(2.0 * n_atoms)
        if ladder == "exact":
            return np.sqrt(2.0 * max(n_atoms - 1, 0))
        raise ValueError(f"unknown ladder convention: {ladder!r}")
    return 0.0


def collective_pair_hamiltonian(
    nodes,
    swap_rate: complex,
    shift_rates: tuple[float, float],
    n_photons: int = 0,
    rotating_frame: bool = False,
    ladder: str = "bosonic",
) -> HamiltonianMatrix:
    """Two-node collective Hamiltonian on the six-state pair basis.

    Diagonal: bare energies, the intra-node exchange shifts
    shift_m * (J_+ J_-)_m and the photon-number level shifts
    shift_m (2 n_m - N_m) n_photons. Off-diagonal: the inter-node exchange
    swap_rate J_+^(1) J_-^(2) + h.c.
    """
    nodes = tuple(nodes)
    basis = CollectiveBasis(nodes)
    if n_photons < 0:
        raise ValueError("photon number must be non-negative")

    occ = PAIR_OCCUPATIONS
    h = np.zeros((6, 6), dtype=complex)
    for a, (n1, n2) in enumerate(occ):
        diag = 0.0
        for m, n_m in enumerate((n1, n2)):
            node = nodes[m]
            if not rotating_frame:
                diag += n_m * node.level_energies[1] + (
                    node.atom_count - n_m
                ) * node.level_energies[0]
            diag += shift_rates[m] * (2 * n_m - node.atom_count) * n_photons
            diag += shift_rates[m] * _ladder_amp(node, n_m, ladder) ** 2
        h[a, a] = diag
        # inter-node exchange: (n1, n2) -> (n1 + 1, n2 - 1)
        target = (n1 + 1, n2 - 1)
        if target in occ:
            b = occ.index(target)
            amp = (
                swap_rate
                * _ladder_amp(nodes[0], n1 + 1, ladder)
                * _ladder_amp(nodes[1], n2, ladder)
            )
            h[b, a] += amp
            h[a, b] += np.conj(amp)

    rot = CollectiveBasis.occupation_rotation()
    return HamiltonianMatrix(rot @ h @ rot.T, basis, label="collective-pair")


def two_level_swap_hamiltonian(
    nodes,
    swap_rate: float,
    rotating_frame: bool = False,
    ladder: str = "bosonic",
) -> HamiltonianMatrix:
    """Equal-rate collective swap Hamiltonian on the six-state pair basis.

    The single-excitation block is exact for any atom number: diagonal
    shifts N_m * swap_rate, off-diagonal sqrt(N1 N2) * swap_rate. In the
    doubly-excited block the default "bosonic" ladder uses the
    large-ensemble amplitudes (coupling 2 N swap_rate for equal nodes),
    under which the closed-form pair evolution holds exactly; "exact"
    instead uses finite-N Dicke combinatorics, 2 sqrt(N(N-1)) swap_rate.
    """
    rate = complex(swap_rate)
    if abs(rate.imag) > 1e-12 * max(1.0, abs(rate)):
        raise ValueError("swap_rate must be real for the equal-coupling form")
    h = collective_pair_hamiltonian(
        nodes,
        swap_rate=rate.real,
        shift_rates=(rate.real, rate.real),
        n_photons=0,
        rotating_frame=rotating_frame,
        ladder=ladder,
    )
    h.label = "two-level-swap"
    return h


def lamb_shift_hamiltonian(
    nodes,
    couplings: CouplingSet,
    detunings: DetuningSet,
    n_photons: int,
    rotating_frame: bool = False,
    ladder: str = "bosonic",
    floor_scale: float = 1e-9,
) -> HamiltonianMatrix:
    """Photon-number dependent pair Hamiltonian with per-node couplings.

    Real cavity photons shift each node's transition by
    2 n |g_m|^2 / Delta_m, detuning the inter-node exchange; with n = 0 and
    equal couplings this reduces to the plain two-level swap form.
    """
    nodes = tuple(nodes)
    if len(nodes) != 2:
        raise BasisMismatch("lamb shift builder works on a node pair")
    g = [couplings.coupling(0, m) for m in range(2)]
    deltas = [detunings.value(0, m) for m in range(2)]
    for m, d in enumerate(deltas):
        _check_detuning(d, nodes, f"lower transition, node {m}", floor_scale)
    rates = EffectiveRates.from_couplings(g[0], g[1], deltas[0], deltas[1])
    h = collective_pair_hamiltonian(
        nodes,
        swap_rate=rates.swap_rate,
        shift_rates=(rates.shift_rate_1, rates.shift_rate_2),
        n_photons=n_photons,
        rotating_frame=rotating_frame,
        ladder=ladder,
    )
    h.label = "lamb-shift"
    return h


def effective_hamiltonian(
    nodes,
    couplings: CouplingSet,
    detunings: DetuningSet,
    photon_numbers: tuple[int, int, int] = (0, 0, 0),
    rotating_frame: bool = False,
    ladder: str = "bosonic",
    floor_scale: float = 1e-9,
) -> HamiltonianMatrix:
    """General effective Hamiltonian reduced to the collective pair basis.

    Two-level node pairs only; photons enter through the lower-transition
    mode occupation. For three-level nodes or explicit photon operators use
    effective_hamiltonian_microscopic.
    """
    nodes = tuple(nodes)
    if any(node.level_count != 2 for node in nodes):
        raise BasisMismatch(
            "collective reduction requires two-level nodes; build the "
            "microscopic effective Hamiltonian for three-level systems"
        )
    if any(photon_numbers[1:]):
        raise ValueError("two-level nodes couple only to the first mode")
    h = lamb_shift_hamiltonian(
        nodes,
        couplings,
        detunings,
        n_photons=photon_numbers[0],
        rotating_frame=rotating_frame,
        ladder=ladder,
        floor_scale=floor_scale,
    )
    h.label = "effective-collective"
    return h


# ---------------------------------------------------------------------------
# Quantum-transistor coupling
# ---------------------------------------------------------------------------


def transistor_hamiltonian(
    control: NodeSpec,
    targets: tuple[NodeSpec, NodeSpec],
    couplings: CouplingSet,
    detunings: DetuningSet,
    wave_vectors: tuple | None = None,
    include_target_upper_swap: bool = False,
    rotating_frame: bool = True,
    floor_scale: float = 1e-9,
) -> HamiltonianMatrix:
    """Cross-transition exchange between a control node and two target nodes.

    The control's lower transition (1<->0) exchanges excitation with each
    target's upper transition (2<->1):

        H = sum_m c_m sum_{jc, jm} ( g21_c conj(g32_m) phi S(1<-0)_jc S(1<-2)_jm
                                     + h.c. ),
        c_m = (1/Delta_lower_control + 1/Delta_upper_target_m) / 2.

    ``include_target_upper_swap`` adds the co-propagating exchange of the
    targets' upper transition among the target atoms (the channel that is
    negligible when the cross rate dominates); it is off by default so the
    default matrix is the pure cross-transition form. The interaction frame
    is used by default; set rotating_frame=False to add bare energies.
    """
    nodes = (control,) + tuple(targets)
    if len(nodes) != 3:
        raise BasisMismatch("transistor coupling needs one control and two targets")
    if any(node.level_count != 3 for node in nodes[1:]):
        raise BasisMismatch("target nodes must be three-level")
    basis = build_microscopic_basis(nodes, fock=None)
    k_lower, k_upper = wave_vectors if wave_vectors is not None else (None, None)
    phases_lower = _atom_phases(basis, k_lower)
    phases_upper = _atom_phases(basis, k_upper)

    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    if not rotating_frame:
        for m, node in enumerate(nodes):
            for j in range(node.atom_count):
                _add_diag(h, basis, basis.atom_site(m, j), node.level_energies)

    g21c = couplings.coupling(0, 0)
    delta_c = detunings.value(0, 0)
    _check_detuning(delta_c, nodes, "control lower transition", floor_scale)
    for m in (1, 2):
        g32m = couplings.coupling(1, m)
        delta_m = detunings.value(1, m)
        _check_detuning(delta_m, nodes, f"target {m} upper transition", floor_scale)
        pref = 0.5 * (1.0 / delta_c + 1.0 / delta_m)
        for jc in basis.node_sites(0):
            for jm in basis.node_sites(m):
                coeff = (
                    pref
                    * g21c
                    * np.conj(g32m)
                    * phases_lower[jc]
                    * np.conj(phases_upper[jm])
                )
                _add_term(
                    h, basis, coeff, (jc, _transition(1, 0)), (jm, _transition(1, 2))
                )
                _add_term(
                    h,
                    basis,
                    np.conj(coeff),
                    (jc, _transition(0, 1)),
                    (jm, _transition(2, 1)),
                )

    if include_target_upper_swap:
        deltas = {m: detunings.value(1, m) for m in (1, 2)}
        for m in (1, 2):
            g = couplings.coupling(1, m)
            rate = abs(g) ** 2 / deltas[m]
            for i in basis.node_sites(m):
                for j in basis.node_sites(m):
                    coeff = rate * phases_upper[i] * np.conj(phases_upper[j])
                    if i == j:
                        _add_term(h, basis, coeff, (i, _projector(2)))
                    else:
                        _add_term(
                            h, basis, coeff, (i, _transition(2, 1)), (j, _transition(1, 2))
                        )
        pref = 0.5 * (1.0 / deltas[1] + 1.0 / deltas[2])
        g1 = couplings.coupling(1, 1)
        g2 = couplings.coupling(1, 2)
        for i in basis.node_sites(1):
            for j in basis.node_sites(2):
                coeff = pref * g1 * np.conj(g2) * phases_upper[i] * np.conj(phases_upper[j])
                _add_term(
                    h, basis, coeff, (i, _transition(2, 1)), (j, _transition(1, 2))
                )
                _add_term(
                    h,
                    basis,
                    np.conj(coeff),
                    (i, _transition(1, 2)),
                    (j, _transition(2, 1)),
                )

    return HamiltonianMatrix(h, basis, label="transistor")


def transistor_rate(couplings: CouplingSet, detunings: DetuningSet) -> float:
    """Single-atom cross-transition exchange rate of the transistor coupling."""
    g21c = couplings.coupling(0, 0)
    g32 = couplings.coupling(1, 1)
    delta_c = detunings.value(0, 0)
    delta_t = detunings.value(1, 1)
    if delta_c == 0.0 or delta_t == 0.0:
        raise ResonanceSingularity("transistor detunings must be nonzero")
    pref = 0.5 * (1.0 / delta_c + 1.0 / delta_t)
    return float(abs(pref * g21c * np.conj(g32)))

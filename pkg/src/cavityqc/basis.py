"""Hilbert-space bookkeeping: node specs, product bases, collective states.

Conventions used throughout the package:

* hbar = 1, all energies are angular frequencies;
* atomic levels are indexed 0, 1, 2 from the ground state up;
* a "node" is an ensemble of identical atoms acting as one collective site;
* collective node states |0>, |1>, |2> are the permutation-symmetric
  superpositions with 0, 1 or 2 excited atoms (Dicke states), truncated at
  two excitations per node pair;
* atomic positions default to the origin, so every plane-wave phase factor
  is 1; non-zero positions thread the matching phases through both the
  microscopic operators and the collective state definitions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatch, DimensionCap
from .state import StateVector

DEFAULT_DIMENSION_CAP = 200_000

Vector3 = tuple[float, float, float]


@dataclass(frozen=True)
class NodeSpec:
    """One multi-atom node: atom count, level structure, optional positions."""

    atom_count: int
    level_count: int = 2
    level_energies: tuple[float, ...] = (0.0, 1.0)
    positions: tuple[Vector3, ...] | None = None

    def __post_init__(self):
        if self.atom_count < 1:
            raise ValueError("atom_count must be positive")
        if self.level_count not in (2, 3):
            raise ValueError("level_count must be 2 or 3")
        if len(self.level_energies) != self.level_count:
            raise ValueError("level_energies length must equal level_count")
        if any(
            b <= a for a, b in zip(self.level_energies, self.level_energies[1:])
        ):
            raise ValueError("level_energies must be strictly increasing")
        if self.positions is not None and len(self.positions) != self.atom_count:
            raise ValueError("positions list length must equal atom_count")

    def atom_positions(self) -> np.ndarray:
        """(atom_count, 3) array; zeros unless positions were supplied."""
        if self.positions is None:
            return np.zeros((self.atom_count, 3))
        return np.asarray(self.positions, dtype=float)

    def energy_gap(self, upper: int, lower: int) -> float:
        return self.level_energies[upper] - self.level_energies[lower]

    @property
    def transition_freq(self) -> float:
        """Splitting of the lowest transition (level 1 minus level 0)."""
        return self.energy_gap(1, 0)


@dataclass(frozen=True)
class Mode:
    """A quantized cavity mode."""

    frequency: float
    wave_vector: Vector3 = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class FockFactor:
    """Photon-mode factor of a composite basis, with per-mode truncation.

    The truncation must exceed the largest photon number reachable from the
    initial states of interest by at least one guard level; builders that
    compare against operator products near the truncation edge restrict
    themselves to interior sectors.
    """

    modes: tuple[Mode, ...]
    n_max: tuple[int, ...]

    def __post_init__(self):
        if len(self.modes) != len(self.n_max):
            raise ValueError("one truncation per mode required")
        if any(n < 1 for n in self.n_max):
            raise ValueError("n_max must be at least 1 per mode")

    @property
    def mode_count(self) -> int:
        return len(self.modes)


class CompositeBasis:
    """Full product basis: one site per atom, then one site per photon mode.

    Index order is lexicographic over the occupation tuple with the last
    site varying fastest, so indices are stable across runs.
    """

    def __init__(
        self,
        nodes: tuple[NodeSpec, ...],
        fock: FockFactor | None = None,
        cap: int = DEFAULT_DIMENSION_CAP,
    ):
        self.nodes = tuple(nodes)
        self.fock = fock
        shape: list[int] = []
        labels: list[str] = []
        for m, node in enumerate(self.nodes):
            for j in range(node.atom_count):
                shape.append(node.level_count)
                labels.append(f"node{m}.atom{j}")
        if fock is not None:
            for a, nmax in enumerate(fock.n_max):
                shape.append(nmax + 1)
                labels.append(f"mode{a}")
        self.shape = tuple(shape)
        self.site_labels = tuple(labels)
        dim = 1
        for d in self.shape:
            dim *= d
            if dim > cap:
                raise DimensionCap(
                    f"product dimension exceeds cap {cap} (shape {self.shape})"
                )
        self.dim = dim
        self._occ_cache: dict[int, np.ndarray] = {}

    # -- identity ---------------------------------------------------------

    def _key(self):
        return (self.nodes, self.fock, self.shape)

    def __eq__(self, other):
        return isinstance(other, CompositeBasis) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"CompositeBasis(dim={self.dim}, sites={len(self.shape)})"

    # -- site layout ------------------------------------------------------

    @property
    def n_atomic_sites(self) -> int:
        return sum(node.atom_count for node in self.nodes)

    def atom_site(self, node_index: int, atom_index: int) -> int:
        offset = sum(n.atom_count for n in self.nodes[:node_index])
        return offset + atom_index

    def node_sites(self, node_index: int) -> range:
        offset = sum(n.atom_count for n in self.nodes[:node_index])
        return range(offset, offset + self.nodes[node_index].atom_count)

    def mode_site(self, mode_index: int) -> int:
        if self.fock is None:
            raise BasisMismatch("basis carries no photon modes")
        return self.n_atomic_sites + mode_index

    # -- indexing ---------------------------------------------------------

    def stride(self, site: int) -> int:
        s = 1
        for d in self.shape[site + 1 :]:
            s *= d
        return s

    def index(self, occupations: tuple[int, ...]) -> int:
        if len(occupations) != len(self.shape):
            raise ValueError("occupation tuple length mismatch")
        return int(np.ravel_multi_index(occupations, self.shape))

    def occupation(self, index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unravel_index(index, self.shape))

    def site_occupations(self, site: int) -> np.ndarray:
        """Occupation of one site for every basis index (cached)."""
        if site not in self._occ_cache:
            idx = np.arange(self.dim)
            self._occ_cache[site] = (idx // self.stride(site)) % self.shape[site]
        return self._occ_cache[site]

    def basis_state(self, occupations: tuple[int, ...]) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index(occupations)] = 1.0
        return vec

    # -- photon sector helpers ---------------------------------------------

    def atomic_subbasis(self) -> "CompositeBasis":
        return CompositeBasis(self.nodes, fock=None)

    def fock_block_indices(self, mode_occupations: tuple[int, ...]) -> np.ndarray:
        """Basis indices whose photon occupations equal the given tuple."""
        if self.fock is None:
            raise BasisMismatch("basis carries no photon modes")
        fock_shape = self.shape[self.n_atomic_sites :]
        offset = int(np.ravel_multi_index(mode_occupations, fock_shape))
        block = 1
        for d in fock_shape:
            block *= d
        return np.arange(self.dim // block) * block + offset


def build_microscopic_basis(
    nodes,
    fock: FockFactor | None = None,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> CompositeBasis:
    """Full product basis over every atom and every photon mode."""
    return CompositeBasis(tuple(nodes), fock, cap)


# ---------------------------------------------------------------------------
# Two-node collective basis
# ---------------------------------------------------------------------------

PAIR_LABELS = ("00", "10", "01", "11", "2+", "2-")

# auxiliary occupation representation used internally by Hamiltonian builders:
# per-node excitation numbers, total at most two
PAIR_OCCUPATIONS = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2))


@dataclass(frozen=True)
class CollectiveBasis:
    """The six two-node collective states, indexed 0..5.

    Labels name per-node excitation numbers; "2+" and "2-" are the
    symmetric and antisymmetric combinations of the doubly-excited
    one-node states, (|20> +/- |02>)/sqrt(2).

    ``nodes`` is optional: when present it pins atom counts and level
    energies (needed for bare-energy diagonals and microscopic expansion),
    when absent the basis is the abstract six-dimensional space.
    """

    nodes: tuple[NodeSpec, NodeSpec] | None = None

    def __post_init__(self):
        if self.nodes is not None:
            if len(self.nodes) != 2:
                raise BasisMismatch("collective pair basis needs exactly two nodes")
            if any(n.level_count != 2 for n in self.nodes):
                raise BasisMismatch("collective pair basis requires two-level nodes")

    dim = 6
    labels = PAIR_LABELS

    def index(self, label: str) -> int:
        return PAIR_LABELS.index(label)

    def sector(self, index: int) -> int:
        """Total collective excitation number of basis state ``index``."""
        return (0, 1, 1, 2, 2, 2)[index]

    @staticmethod
    def occupation_rotation() -> np.ndarray:
        """Orthogonal map from the occupation list to the labelled states.

        Rows are the labelled states, columns the occupation states in
        PAIR_OCCUPATIONS order; only the 20/02 pair is mixed.
        """
        rot = np.eye(6)
        s = 1.0 / np.sqrt(2.0)
        rot[4, 4], rot[4, 5] = s, s
        rot[5, 4], rot[5, 5] = s, -s
        return rot


def build_two_node_collective_basis(nodes=None) -> CollectiveBasis:
    """The six-state collective basis of a node pair."""
    if nodes is not None:
        nodes = tuple(nodes)
    return CollectiveBasis(nodes)


# ---------------------------------------------------------------------------
# Collective states expanded over microscopic product bases
# ---------------------------------------------------------------------------


def _phases(node: NodeSpec, wave_vector) -> np.ndarray:
    if wave_vector is None:
        return np.ones(node.atom_count, dtype=complex)
    k = np.asarray(wave_vector, dtype=float)
    return np.exp(1j * (node.atom_positions() @ k))


def collective_excitation_state(
    basis: CompositeBasis,
    node_index: int,
    excited_level: int = 1,
    wave_vector=None,
) -> np.ndarray:
    """Single collective excitation of one node, all other atoms ground.

    N^(-1/2) sum_j e^(i k.r_j) |0 ... excited_level at atom j ... 0>, taken
    over the atoms of the chosen node; every other site stays at level 0.
    """
    node = basis.nodes[node_index]
    if excited_level >= node.level_count:
        raise BasisMismatch("node does not have the requested level")
    phases = _phases(node, wave_vector)
    occ = [0] * len(basis.shape)
    vec = np.zeros(basis.dim, dtype=complex)
    for j in range(node.atom_count):
        occ_j = list(occ)
        occ_j[basis.atom_site(node_index, j)] = excited_level
        vec[basis.index(tuple(occ_j))] = phases[j]
    return vec / np.sqrt(node.atom_count)


def double_excitation_state(
    basis: CompositeBasis, node_index: int, wave_vector=None
) -> np.ndarray:
    """Symmetric two-excitation state of one two-level node.

    sqrt(2/(N(N-1))) sum_{j>f} e^(i k.(r_j+r_f)) |... e_j ... e_f ...>;
    requires at least two atoms in the node.
    """
    node = basis.nodes[node_index]
    if node.atom_count < 2:
        raise BasisMismatch("double excitation needs at least two atoms")
    phases = _phases(node, wave_vector)
    occ = [0] * len(basis.shape)
    vec = np.zeros(basis.dim, dtype=complex)
    for j, f in itertools.combinations(range(node.atom_count), 2):
        occ_jf = list(occ)
        occ_jf[basis.atom_site(node_index, j)] = 1
        occ_jf[basis.atom_site(node_index, f)] = 1
        vec[basis.index(tuple(occ_jf))] = phases[j] * phases[f]
    norm = np.sqrt(node.atom_count * (node.atom_count - 1) / 2.0)
    return vec / norm


def ground_state(basis: CompositeBasis) -> np.ndarray:
    return basis.basis_state(tuple(0 for _ in basis.shape))


def pair_isometry(basis: CompositeBasis, wave_vector=None) -> np.ndarray:
    """(6, dim) matrix whose rows are the collective pair states.

    Rows follow PAIR_LABELS. States requiring more atoms than a node has
    (doubly-excited one-node states for single-atom nodes) come out as zero
    rows; projections onto them simply vanish.
    """
    if len(basis.nodes) != 2 or any(n.level_count != 2 for n in basis.nodes):
        raise BasisMismatch("pair isometry requires exactly two two-level nodes")
    if basis.fock is not None:
        raise BasisMismatch("pair isometry acts on the atomic factor only")

    one = [collective_excitation_state(basis, m, 1, wave_vector) for m in (0, 1)]

    def _two(m):
        if basis.nodes[m].atom_count < 2:
            return np.zeros(basis.dim, dtype=complex)
        return double_excitation_state(basis, m, wave_vector)

    # |11>: the two single-node excitation patterns act on disjoint atom
    # sets, so the product state is assembled by merging occupation tuples
    both = np.zeros(basis.dim, dtype=complex)
    for i in np.nonzero(one[0])[0]:
        occ_i = basis.occupation(i)
        for j in np.nonzero(one[1])[0]:
            occ_j = basis.occupation(j)
            merged = tuple(a + b for a, b in zip(occ_i, occ_j))
            both[basis.index(merged)] = one[0][i] * one[1][j]

    rows = np.zeros((6, basis.dim), dtype=complex)
    rows[0] = ground_state(basis)
    rows[1] = one[0]
    rows[2] = one[1]
    rows[3] = both
    two1, two2 = _two(0), _two(1)
    rows[4] = (two1 + two2) / np.sqrt(2.0)
    rows[5] = (two1 - two2) / np.sqrt(2.0)
    return rows


def symmetrize(
    state: StateVector, wave_vector=None
) -> tuple[StateVector, float]:
    """Project a microscopic two-node state onto the collective pair basis.

    Returns the (unnormalized) projection as a StateVector on the matching
    CollectiveBasis together with the leakage 1 - |projection|^2.
    """
    basis = state.basis
    if not isinstance(basis, CompositeBasis):
        raise BasisMismatch("symmetrize expects a microscopic product basis")
    rows = pair_isometry(basis, wave_vector)
    amps = rows.conj() @ state.amplitudes
    leakage = float(max(0.0, 1.0 - np.linalg.norm(amps) ** 2))
    collective = CollectiveBasis(basis.nodes)
    return StateVector(amps, collective), leakage

'''
This module:
    - Describes the operations a remote party wants applied (GeneratorSpec: Involution, NLevel, ProductSpec).
    - Builds stators, the hybrid objects sum_j |j_a> (x) O_j that pair Alice's basis states with operators on
    the remote system, for the 2-level, n-level and product cases.
    - Applies stators to states and checks eigenoperator equations O_A S = lambda_B S.
    - Lifts a remote generator L_Z to the Alice-side operator A with A S = L_Z S, by discrete Fourier
    interpolation of the spectrum of L_Z over powers of the shift operator V.
'''

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from . import linalg
from .errors import DimMismatch, NotInvolution, NotRootOfUnity, SpectrumNotInteger
from .linalg import Operator, StateVector

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-10

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}

NAMED_AXES = {
    'x': (1.0, 0.0, 0.0),
    'y': (0.0, 1.0, 0.0),
    'z': (0.0, 0.0, 1.0),
}


def pauli(axis):
    """Single-qubit Pauli operator for 'x', 'y' or 'z'."""
    return Operator([2], PAULI[axis])


def axis_operator(axis):
    """
    sigma_n = n . sigma for a named axis or a unit 3-vector.

    Raises:
        NotInvolution: If the vector is not a unit vector (sigma_n^2 = |n|^2 I).
    """
    if isinstance(axis, str):
        axis = NAMED_AXES[axis]
    nx, ny, nz = (float(c) for c in axis)
    op = Operator([2], nx * PAULI['x'] + ny * PAULI['y'] + nz * PAULI['z'])
    if not op.is_involution():
        raise NotInvolution(f"Axis {axis} is not a unit vector")
    return op


def spin_operators(n):
    """
    Spin-j matrices (Lx, Ly, Lz) for j = (n - 1) / 2, in the basis where Lz = diag(j, j-1, ..., -j).
    """
    j = (n - 1) / 2
    m = j - np.arange(n)
    # <m+1| L+ |m> = sqrt(j(j+1) - m(m+1)); basis index decreases as m increases
    raising = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1)
    lx = (raising + raising.T) / 2
    ly = (raising - raising.T) / 2j
    return Operator([n], lx), Operator([n], ly), Operator([n], np.diag(m))


def default_spectrum(n):
    """
    Integer spectrum of L_Z used when none is given.

    Odd n: the spin-j values j, ..., -j (the spin-1 case is diag(1, 0, -1)).
    Even n: 0, ..., n-1. A half-integer spectrum would give U^n = -I.
    """
    if n % 2:
        j = (n - 1) // 2
        return tuple(range(j, -j - 1, -1))
    return tuple(range(n))


def _check_integer_spectrum(spectrum, n):
    values = []
    for value in spectrum:
        if abs(value - round(value)) > INTEGER_TOL:
            raise SpectrumNotInteger(f"Eigenvalue {value} is not an integer")
        values.append(int(round(value)))
    by_residue = {}
    for value in values:
        previous = by_residue.setdefault(value % n, value)
        if previous != value:
            raise SpectrumNotInteger(f"Eigenvalues {previous} and {value} coincide mod {n}; no lift exists")
    return tuple(values)


@dataclass(frozen=True, eq=False)
class Involution:
    """
    Remote generator sigma_n with sigma_n^2 = I (a spin axis or any hermitian involution).

    Attributes:
        generator (Operator): The involution, over the remote party's system registers.
        angle (float): Rotation angle alpha of exp(i alpha sigma_n).
    """
    generator: Operator
    angle: float = 0.0

    def __post_init__(self):
        if not (self.generator.is_involution() and self.generator.is_hermitian()):
            raise NotInvolution(f"Generator over {self.generator.dims} is not a hermitian involution")
        object.__setattr__(self, 'angle', float(self.angle))

    @classmethod
    def from_axis(cls, axis, angle=0.0):
        return cls(axis_operator(axis), angle)

    @property
    def n(self):
        return 2

    @property
    def dims(self):
        return self.generator.dims

    @property
    def clock(self):
        return self.generator


@dataclass(frozen=True, eq=False)
class NLevel:
    """
    Remote n-level generator L_Z = E diag(spectrum) E^dag and its clock U = exp(2 pi i L_Z / n).

    Attributes:
        spectrum (tuple[int]): Eigenvalues of L_Z, one per column of the eigenbasis.
        eigenbasis (Operator): Unitary whose columns are the eigenvectors of L_Z.
        angles (tuple[float]): alpha_1..alpha_{n-1} of exp(i sum_k alpha_k L_Z^k). Defaults to zeros.
    """
    spectrum: tuple
    eigenbasis: Operator
    angles: tuple = ()

    def __post_init__(self):
        n = self.eigenbasis.side
        if len(self.spectrum) != n:
            raise DimMismatch(f"Spectrum of length {len(self.spectrum)} does not fit a {n}-level system")
        if n < 2:
            raise DimMismatch("An n-level generator needs n >= 2")
        if not self.eigenbasis.is_unitary():
            raise DimMismatch("Eigenbasis of L_Z must be unitary")
        object.__setattr__(self, 'spectrum', _check_integer_spectrum(self.spectrum, n))
        angles = tuple(float(a) for a in self.angles) or (0.0,) * (n - 1)
        if len(angles) != n - 1:
            raise DimMismatch(f"A {n}-level rotation takes {n - 1} angles, got {len(angles)}")
        object.__setattr__(self, 'angles', angles)
        if not clock_order_holds(self.clock, n):
            raise NotRootOfUnity(f"exp(2 pi i L_Z / {n}) is not an n-th root of unity")

    @classmethod
    def default(cls, n, dims=None, angles=()):
        """Generator with the default spectrum, diagonal in the computational basis."""
        return cls(default_spectrum(n), Operator.identity(dims or [n]), angles)

    @classmethod
    def from_axis(cls, n, axis, angles=()):
        """Generator whose eigenvectors are those of the spin-j component along `axis`."""
        if isinstance(axis, str):
            axis = NAMED_AXES[axis]
        axis = np.asarray(axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > INTEGER_TOL:
            raise DimMismatch(f"Axis {tuple(axis)} is not a unit vector")
        lx, ly, lz = spin_operators(n)
        component = axis[0] * lx.mat + axis[1] * ly.mat + axis[2] * lz.mat
        evals, evecs = np.linalg.eigh(component)
        # eigh sorts ascending; the default spectrum of odd n is descending
        if n % 2:
            evecs = evecs[:, ::-1]
        return cls(default_spectrum(n), Operator([n], evecs), angles)

    @property
    def n(self):
        return len(self.spectrum)

    @property
    def dims(self):
        return self.eigenbasis.dims

    def _function(self, values):
        E = self.eigenbasis.mat
        return Operator(self.dims, (E * values) @ E.conj().T)

    @property
    def generator(self):
        return self._function(np.asarray(self.spectrum, dtype=complex))

    @property
    def clock(self):
        return self._function(np.exp(2j * np.pi * np.asarray(self.spectrum) / self.n))

    def rotation_generator(self):
        """Hermitian H = sum_k alpha_k L_Z^k, the exponent of the target rotation."""
        L = self.generator
        H = Operator(self.dims, np.zeros((self.n, self.n)))
        for k, alpha in enumerate(self.angles, start=1):
            H = H + alpha * L.power(k)
        return H


@dataclass(frozen=True, eq=False)
class ProductSpec:
    """
    Operation on N distributed systems.

    Attributes:
        parts (tuple[Involution | NLevel]): One generator per remote party, Remote(1) first.
        couplings (dict[tuple[int], float]): Angle of each product generator, keyed by per-party powers
            (k_1, ..., k_N) with 0 <= k_i < n_i, not all zero.
    """
    parts: tuple
    couplings: dict = field(default_factory=dict)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DimMismatch("A product operation needs at least one part")
        object.__setattr__(self, 'parts', parts)
        levels = [p.n for p in parts]
        couplings = {}
        for key, angle in dict(self.couplings).items():
            key = tuple(int(k) for k in key)
            if len(key) != len(parts) or any(not 0 <= k < n for k, n in zip(key, levels)) or not any(key):
                raise DimMismatch(f"Coupling key {key} is not a non-zero power tuple for levels {levels}")
            couplings[key] = float(angle)
        object.__setattr__(self, 'couplings', couplings)

    @property
    def levels(self):
        return tuple(p.n for p in self.parts)

    def power_tuples(self):
        return power_tuples(self.levels)


GeneratorSpec = Union[Involution, NLevel, ProductSpec]


def power_tuples(levels):
    """All non-zero tuples (k_1, ..., k_N), 0 <= k_i < levels[i], in lexicographic order."""
    return [k for k in itertools.product(*(range(n) for n in levels)) if any(k)]


def couplings_from_subsets(subsets, n_parties):
    """
    Convert {subset of 1-based party indices: angle} into power-tuple keys.

    {(1, 2): a} with 3 parties becomes {(1, 1, 0): a}.
    """
    couplings = {}
    for subset, angle in subsets.items():
        if isinstance(subset, int):
            subset = (subset,)
        key = [0] * n_parties
        for party in subset:
            key[party - 1] = 1
        couplings[tuple(key)] = float(angle)
    return couplings


class Stator(NamedTuple):
    """
    Hybrid state-operator object sum_j |j_a> (x) terms[j].

    Attributes:
        alice_dim (int): Dimension of Alice's side.
        bob_dims (tuple[int]): Register dimensions the terms act on.
        terms (tuple[Operator]): One operator per Alice basis state.
    """
    alice_dim: int
    bob_dims: tuple
    terms: tuple

    def stacked(self):
        """Array of shape (alice_dim, D, D) holding the term matrices."""
        return np.array([t.mat for t in self.terms])

    def to_dict(self):
        return {"alice_dim": self.alice_dim, "bob_dims": list(self.bob_dims),
                "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, data):
        return _build_stator([Operator.from_dict(t) for t in data["terms"]])


def _build_stator(terms):
    terms = tuple(terms)
    if not terms:
        raise DimMismatch("A stator needs at least one term")
    bob_dims = terms[0].dims
    if any(t.dims != bob_dims for t in terms):
        raise DimMismatch("All stator terms must act on the same registers")
    return Stator(len(terms), bob_dims, terms)


def make_two_level_stator(g):
    """
    |0_a> (x) I + |1_a> (x) sigma_n.

    Args:
        g (Involution | Operator): The involution sigma_n.

    Raises:
        NotInvolution: If g does not square to the identity.
    """
    generator = g.generator if isinstance(g, Involution) else g
    if not generator.is_involution():
        raise NotInvolution(f"Operator over {generator.dims} does not square to the identity")
    return _build_stator([Operator.identity(generator.dims), generator])


def make_n_level_stator(n, U):
    """
    sum_{m<n} |m_a> (x) U^m.

    Raises:
        NotRootOfUnity: If U is not unitary or U^n differs from the identity.
    """
    if not U.is_unitary():
        raise NotRootOfUnity(f"Operator over {U.dims} is not unitary")
    if not clock_order_holds(U, n):
        raise NotRootOfUnity(f"U^{n} is not the identity")
    return _build_stator(U.power(m) for m in range(n))


def stator_for(spec):
    """The stator a single-party generator prepares: 2-level for an Involution, n-level for NLevel."""
    if isinstance(spec, Involution):
        return make_two_level_stator(spec)
    return make_n_level_stator(spec.n, spec.clock)


def product_stator(parts):
    """
    Tensor product of stators; term (j_1, ..., j_N) is O_{j_1} (x) ... (x) O_{j_N}, first part most significant.
    """
    parts = list(parts)
    if not parts:
        raise DimMismatch("product_stator needs at least one part")
    terms = [linalg.tensor_all(combo) for combo in itertools.product(*(p.terms for p in parts))]
    return _build_stator(terms)


class AppliedStator(NamedTuple):
    state: StateVector
    norm: float


def apply(S, psi):
    """
    Act with a stator on a remote state.

    Args:
        S (Stator): The stator.
        psi (StateVector): State over S.bob_dims.

    Returns:
        AppliedStator: The normalized state sum_j |j_a> (x) O_j psi over (alice_dim,) + bob_dims, and the
        norm it had before normalization.
    """
    if psi.dims != S.bob_dims:
        raise DimMismatch(f"Stator acts on {S.bob_dims}, state is over {psi.dims}")
    amps = (S.stacked() @ psi.amps).reshape(-1)
    norm = float(np.linalg.norm(amps))
    return AppliedStator(StateVector((S.alice_dim,) + S.bob_dims, amps / norm), norm)


def eigenoperator_residual(S, opA, lamB):
    """
    Frobenius norm of opA S - lamB S, with the stator viewed as the stack of its terms.

    Zero (within 1e-10) iff the eigenoperator equation opA S = lamB S holds.
    """
    if opA.dims != (S.alice_dim,):
        raise DimMismatch(f"Alice operator over {opA.dims} does not fit a stator with alice_dim {S.alice_dim}")
    if lamB.dims != S.bob_dims:
        raise DimMismatch(f"Eigenoperator over {lamB.dims} does not fit stator terms over {S.bob_dims}")
    T = S.stacked()
    left = (opA.mat @ T.reshape(S.alice_dim, -1)).reshape(T.shape)
    right = lamB.mat @ T
    return float(np.linalg.norm(left - right))


def shift_operator(n):
    """Cyclic shift V|m> = |m-1 mod n>; V^n = I and V = sigma_x for n = 2."""
    if n < 2:
        raise DimMismatch("The shift operator needs n >= 2")
    return Operator([n], np.roll(np.eye(n), -1, axis=0))


def lift_coefficients(spec):
    """
    Coefficients c_k of A = sum_k c_k V^k with A S = L_Z S on the n-level stator of spec.clock.

    c_k = (1/n) sum_r g(r) w^{-rk}, w = exp(2 pi i / n), where g(r) is the eigenvalue of L_Z congruent to r
    mod n (zero if there is none). c_{n-k} = conj(c_k) because g is real.
    """
    n = spec.n
    samples = np.zeros(n)
    for value in spec.spectrum:
        samples[value % n] = value
    return np.fft.fft(samples) / n


def lift_generator(spec):
    """
    Alice-side partner A of the remote generator L_Z: A S = L_Z S for S = make_n_level_stator(n, U).

    Args:
        spec (NLevel): The remote generator.

    Returns:
        Operator: Hermitian A over Alice's n-level register.
    """
    coefficients = lift_coefficients(spec)
    V = shift_operator(spec.n)
    A = sum(c * V.power(k).mat for k, c in enumerate(coefficients))
    A = (A + A.conj().T) / 2
    logger.debug("Lifted spectrum %s to coefficients %s", spec.spectrum, np.round(coefficients, 12))
    return Operator([spec.n], A)


def alice_partner(spec):
    """Alice's eigenoperator partner of the remote generator: sigma_x for an Involution, the lift for NLevel."""
    if isinstance(spec, Involution):
        return shift_operator(2)
    return lift_generator(spec)


def hermitian_eigenoperator_pairs(n, U):
    """
    The hermitian pairs (V + V^dag, U + U^dag) and (i(V - V^dag), i(U - U^dag)) of the n-level stator of U.
    """
    V = shift_operator(n)
    return [(V + V.dag(), U + U.dag()),
            (1j * (V - V.dag()), 1j * (U - U.dag()))]


def generator_power_rank(spec, tol=1e-8):
    """Number of linearly independent operators among L_Z, L_Z^2, ..., L_Z^{n-1}."""
    L = spec.generator
    stack = np.array([L.power(k).mat.reshape(-1) for k in range(1, spec.n)])
    return int(np.linalg.matrix_rank(stack, tol=tol))


def clock_order_holds(U, n):
    return math.isclose(float(np.linalg.norm(U.power(n).mat - np.eye(U.side))), 0.0, abs_tol=linalg.UNITARY_TOL)

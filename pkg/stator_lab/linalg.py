'''
This module:
    - Holds the two value types every other module is written in: StateVector (a normalized amplitude
    vector over a register space with explicit per-register dimensions) and Operator (a dense complex
    matrix over such a space).
    - Provides the dense linear algebra the protocols need on small composite spaces (total dimension up
    to about 1024): Kronecker products, exponentials of hermitian generators, local action on a subset of
    registers, projective measurement, bipartite entanglement entropy and phase-insensitive comparison.

Index convention: the first register is the most significant index, exactly as numpy.kron orders its
operands. Every module inherits this convention.
'''

import functools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (BadBipartition, DimMismatch, ImpossibleForcedOutcome, NonHermitianInput,
                     NonOrthonormalBasis)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
INVOLUTION_TOL = 1e-10
NORM_TOL = 1e-12
BASIS_TOL = 1e-10
MIN_FORCED_PROB = 1e-14
ENTROPY_CUTOFF = 1e-14


def _as_dims(dims):
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimMismatch(f"Register dimensions must be positive integers, got {dims}")
    return dims


def _frozen(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Amplitude vector over a composite register space.

    Attributes:
        dims (tuple[int]): One dimension per register, most significant first.
        amps (numpy.ndarray): Complex amplitudes, length prod(dims). Read-only.
    """
    dims: tuple
    amps: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise DimMismatch(f"{amps.size} amplitudes do not fit register dims {dims}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("State amplitudes must be finite")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'amps', _frozen(amps))

    @property
    def size(self):
        return self.amps.size

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm() - 1.0) <= tol

    def normalized(self):
        """Return the state rescaled to unit norm."""
        norm = self.norm()
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector")
        return StateVector(self.dims, self.amps / norm)

    def tensor(self):
        """Amplitudes reshaped to one axis per register."""
        return self.amps.reshape(self.dims)

    def permute(self, order):
        """
        Reorder the registers.

        Args:
            order (Sequence[int]): New position i holds old register order[i].

        Returns:
            StateVector: The same state with its registers reordered.
        """
        order = list(order)
        if sorted(order) != list(range(len(self.dims))):
            raise DimMismatch(f"{order} is not a permutation of {len(self.dims)} registers")
        amps = np.transpose(self.tensor(), order).reshape(-1)
        return StateVector([self.dims[i] for i in order], amps)

    def to_dict(self):
        return {"dims": list(self.dims),
                "amps": [[float(a.real), float(a.imag)] for a in self.amps]}

    @classmethod
    def from_dict(cls, data):
        amps = [complex(re, im) for re, im in data["amps"]]
        return cls(data["dims"], amps)


@dataclass(frozen=True, eq=False)
class Operator:
    """
    Dense square matrix acting on a composite register space.

    Attributes:
        dims (tuple[int]): One dimension per register, most significant first.
        mat (numpy.ndarray): Complex matrix of side prod(dims). Read-only.
    """
    dims: tuple
    mat: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.dims)
        side = math.prod(dims)
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (side, side):
            raise DimMismatch(f"Matrix of shape {mat.shape} does not fit register dims {dims}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("Operator entries must be finite")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'mat', _frozen(mat))

    @classmethod
    def identity(cls, dims):
        dims = _as_dims(dims)
        return cls(dims, np.eye(math.prod(dims)))

    @property
    def side(self):
        return self.mat.shape[0]

    def dag(self):
        return Operator(self.dims, self.mat.conj().T)

    def power(self, k):
        """Non-negative integer power."""
        return Operator(self.dims, np.linalg.matrix_power(self.mat, k))

    def is_unitary(self, tol=UNITARY_TOL):
        return bool(np.allclose(self.mat.conj().T @ self.mat, np.eye(self.side), rtol=0, atol=tol))

    def is_hermitian(self, tol=HERMITIAN_TOL):
        return bool(np.allclose(self.mat, self.mat.conj().T, rtol=0, atol=tol))

    def is_involution(self, tol=INVOLUTION_TOL):
        return bool(np.allclose(self.mat @ self.mat, np.eye(self.side), rtol=0, atol=tol))

    def __matmul__(self, other):
        if other.dims != self.dims:
            raise DimMismatch(f"Operator dims {self.dims} do not match operand dims {other.dims}")
        if isinstance(other, StateVector):
            return StateVector(self.dims, self.mat @ other.amps)
        return Operator(self.dims, self.mat @ other.mat)

    def __add__(self, other):
        if other.dims != self.dims:
            raise DimMismatch(f"Cannot add operators over {self.dims} and {other.dims}")
        return Operator(self.dims, self.mat + other.mat)

    def __sub__(self, other):
        if other.dims != self.dims:
            raise DimMismatch(f"Cannot subtract operators over {self.dims} and {other.dims}")
        return Operator(self.dims, self.mat - other.mat)

    def __mul__(self, scalar):
        return Operator(self.dims, complex(scalar) * self.mat)

    __rmul__ = __mul__

    def to_dict(self):
        return {"dims": list(self.dims),
                "mat": [[[float(a.real), float(a.imag)] for a in row] for row in self.mat]}

    @classmethod
    def from_dict(cls, data):
        mat = [[complex(re, im) for re, im in row] for row in data["mat"]]
        return cls(data["dims"], mat)


class ForcedOutcome(NamedTuple):
    """Select a measurement outcome instead of sampling it. The true Born probability is still reported."""
    outcome: int


class MeasurementResult(NamedTuple):
    outcome: int
    prob: float
    collapsed: StateVector


RandomSource = np.random.Generator


def basis_state(dims, index):
    """Computational basis state |index> over `dims` (index in the flattened, most-significant-first order)."""
    dims = _as_dims(dims)
    amps = np.zeros(math.prod(dims), dtype=complex)
    amps[index] = 1.0
    return StateVector(dims, amps)


def zero_state(dims):
    return basis_state(dims, 0)


def random_state(dims, rng):
    """Haar-random pure state: a normalized complex-normal vector."""
    dims = _as_dims(dims)
    size = math.prod(dims)
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return StateVector(dims, amps / np.linalg.norm(amps))


def computational_basis(d):
    return [basis_state([d], m) for m in range(d)]


def fourier_basis(d):
    """Basis |k'> = d^{-1/2} sum_m exp(2 pi i k m / d) |m>, k = 0..d-1."""
    m = np.arange(d)
    return [StateVector([d], np.exp(2j * np.pi * k * m / d) / np.sqrt(d)) for k in range(d)]


def tensor(a, b):
    """
    Kronecker product of two operators or two states.

    Args:
        a (Operator | StateVector): Most significant operand.
        b (Operator | StateVector): Least significant operand, same kind as `a`.

    Returns:
        Operator | StateVector: dims = a.dims + b.dims.
    """
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(a.dims + b.dims, np.kron(a.mat, b.mat))
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(a.dims + b.dims, np.kron(a.amps, b.amps))
    raise TypeError(f"Cannot tensor {type(a).__name__} with {type(b).__name__}")


def tensor_all(items):
    return functools.reduce(tensor, items)


def expi_hermitian(H, t):
    """
    Compute exp(i t H) for a hermitian H through its spectral decomposition.

    Args:
        H (Operator): Hermitian generator.
        t (float): Real parameter.

    Returns:
        Operator: The unitary exp(i t H).

    Raises:
        NonHermitianInput: If H is not hermitian within HERMITIAN_TOL.
    """
    if not H.is_hermitian():
        raise NonHermitianInput(f"Generator over {H.dims} is not hermitian")
    # symmetrize so the eigensolver sees an exactly hermitian matrix
    evals, evecs = scipy.linalg.eigh((H.mat + H.mat.conj().T) / 2)
    return Operator(H.dims, (evecs * np.exp(1j * t * evals)) @ evecs.conj().T)


def fidelity_up_to_phase(a, b):
    """
    Overlap modulus |<a|b>|, equal to 1 iff the states agree up to a global phase.

    Raises:
        DimMismatch: If the register dimensions differ.
    """
    if a.dims != b.dims:
        raise DimMismatch(f"Cannot compare states over {a.dims} and {b.dims}")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps))))


def _check_register(state, register):
    if not 0 <= register < len(state.dims):
        raise DimMismatch(f"Register {register} does not exist in a state over {state.dims}")


def apply_to_registers(state, op, targets):
    """
    Apply `op` to the registers `targets` of `state`, leaving the rest untouched.

    Args:
        state (StateVector): The global state.
        op (Operator): Operator whose dims equal the dims of `targets`, in the order given.
        targets (Sequence[int]): Register positions, distinct.

    Returns:
        StateVector: The updated state.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise DimMismatch(f"Target registers {targets} repeat")
    for t in targets:
        _check_register(state, t)
    if op.dims != tuple(state.dims[t] for t in targets):
        raise DimMismatch(f"Operator over {op.dims} cannot act on registers {targets} of {state.dims}")
    front = list(range(len(targets)))
    psi = np.moveaxis(state.tensor(), targets, front)
    shape = psi.shape
    psi = (op.mat @ psi.reshape(op.side, -1)).reshape(shape)
    return StateVector(state.dims, np.moveaxis(psi, front, targets).reshape(-1))


def check_basis(basis, d):
    """Raise NonOrthonormalBasis unless `basis` is an orthonormal basis of a d-dimensional register."""
    if len(basis) != d or any(b.dims != (d,) for b in basis):
        raise NonOrthonormalBasis(f"Expected {d} basis vectors over a {d}-level register")
    B = np.array([b.amps for b in basis])
    if not np.allclose(B.conj() @ B.T, np.eye(d), rtol=0, atol=BASIS_TOL):
        raise NonOrthonormalBasis("Measurement basis is not orthonormal")
    return B


def measure_projective(state, register, basis, rng_or_forced):
    """
    Projective measurement of one register.

    Args:
        state (StateVector): Normalized global state.
        register (int): Position of the measured register.
        basis (list[StateVector]): Orthonormal basis of that register.
        rng_or_forced (numpy.random.Generator | ForcedOutcome): Where the outcome comes from.

    Returns:
        MeasurementResult: (outcome, Born probability, renormalized post-measurement state). The
        measured register is kept, in the state basis[outcome].

    Raises:
        NonOrthonormalBasis: If `basis` is not an orthonormal basis of the register.
        ImpossibleForcedOutcome: If a forced outcome has probability below MIN_FORCED_PROB.
    """
    _check_register(state, register)
    d = state.dims[register]
    B = check_basis(basis, d)
    psi = np.moveaxis(state.tensor(), register, 0)
    rest_shape = psi.shape[1:]
    branches = B.conj() @ psi.reshape(d, -1)
    probs = np.sum(np.abs(branches) ** 2, axis=1)

    if isinstance(rng_or_forced, ForcedOutcome):
        outcome = int(rng_or_forced.outcome)
        if not 0 <= outcome < d:
            raise ImpossibleForcedOutcome(f"Forced outcome {outcome} is not one of {d} outcomes")
        if probs[outcome] < MIN_FORCED_PROB:
            logger.warning("Forced outcome %d has probability %.3e", outcome, probs[outcome])
            raise ImpossibleForcedOutcome(f"Forced outcome {outcome} has probability {probs[outcome]:.3e}")
    else:
        outcome = int(rng_or_forced.choice(d, p=probs / probs.sum()))

    prob = float(probs[outcome])
    collapsed = np.multiply.outer(B[outcome], branches[outcome] / np.sqrt(prob))
    collapsed = np.moveaxis(collapsed.reshape((d,) + rest_shape), 0, register)
    return MeasurementResult(outcome, prob, StateVector(state.dims, collapsed.reshape(-1)))


def project_out(state, register, vector):
    """
    Remove a register that is known to be in the product state `vector`.

    Returns:
        StateVector: The state of the remaining registers, renormalized.
    """
    _check_register(state, register)
    if len(state.dims) == 1:
        raise DimMismatch("Cannot remove the only register of a state")
    if vector.dims != (state.dims[register],):
        raise DimMismatch(f"Vector over {vector.dims} does not fit register {register} of {state.dims}")
    psi = np.moveaxis(state.tensor(), register, 0)
    rest = np.tensordot(vector.amps.conj(), psi, axes=(0, 0))
    dims = state.dims[:register] + state.dims[register + 1:]
    return StateVector(dims, rest.reshape(-1)).normalized()


def reduced_density_matrix(state, keep):
    """Partial trace of |state><state| over every register not in `keep` (kept in ascending order)."""
    keep = sorted(keep)
    traced = [i for i in range(len(state.dims)) if i not in keep]
    d_keep = math.prod(state.dims[i] for i in keep)
    M = np.transpose(state.tensor(), keep + traced).reshape(d_keep, -1)
    return M @ M.conj().T


def entanglement_entropy(state, bipartition):
    """
    Von Neumann entropy (bits) of one side of a bipartition of a pure state.

    Args:
        state (StateVector): Normalized pure state.
        bipartition (Sequence[int]): Register positions of one side; nonempty, proper subset.

    Returns:
        float: Entropy in [0, log2 min(d_left, d_right)].

    Raises:
        BadBipartition: If the subset is empty, the whole system, repeats, or names unknown registers.
    """
    side = list(bipartition)
    n_regs = len(state.dims)
    if not side or len(set(side)) != len(side) or len(side) >= n_regs \
            or any(not 0 <= i < n_regs for i in side):
        raise BadBipartition(f"{side} is not a proper nonempty subset of {n_regs} registers")
    rho = reduced_density_matrix(state, side)
    evals = scipy.linalg.eigvalsh(rho)
    evals = evals[evals > ENTROPY_CUTOFF]
    return float(max(0.0, -np.sum(evals * np.log2(evals))))

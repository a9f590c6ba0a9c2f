'''
This module:
    - Holds the locality-enforcing execution engine every protocol runs on: parties, registers with owners,
    the global state vector, an append-only transcript of local gates, measurements and classical messages,
    and a ledger of consumed entanglement and classical symbols.
    - Rejects any gate or measurement that touches a register of another party (LocalityViolation), so a
    protocol that runs to completion is LOCC by construction.
    - Packages the result of a protocol run (ProtocolOutcome) and renders it as the JSON report.
'''

import collections
import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .. import linalg
from ..errors import DimMismatch, LocalityViolation, MissingPair, SymbolOutOfRange
from ..linalg import ForcedOutcome, Operator, StateVector

logger = logging.getLogger(__name__)

ROLES = ('ancilla-a', 'ancilla-b', 'system', 'pointer')


@dataclass(frozen=True, order=True)
class PartyId:
    """Alice is index 0; Remote(i) (the B_i holding system i) is index i >= 1."""
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"Party index must be non-negative, got {self.index}")

    @classmethod
    def remote(cls, i):
        if i < 1:
            raise ValueError(f"Remote parties are numbered from 1, got {i}")
        return cls(i)

    @property
    def is_alice(self):
        return self.index == 0

    def __str__(self):
        return "Alice" if self.is_alice else f"Remote({self.index})"


ALICE = PartyId(0)
BOB = PartyId(1)


@dataclass(frozen=True)
class Register:
    id: int
    dim: int
    owner: PartyId
    role: str


@dataclass(frozen=True)
class LocalGate:
    party: PartyId
    regs: Tuple[int, ...]
    name: str
    correction: bool = False

    def to_dict(self):
        return {"gate": {"party": self.party.index, "regs": list(self.regs), "name": self.name}}


@dataclass(frozen=True)
class Measurement:
    party: PartyId
    reg: int
    outcome: int
    prob: float

    def to_dict(self):
        return {"measure": {"party": self.party.index, "reg": self.reg,
                            "outcome": self.outcome, "prob": self.prob}}


@dataclass(frozen=True)
class ClassicalMessage:
    sender: PartyId
    receiver: PartyId
    symbol: int
    arity: int

    def to_dict(self):
        return {"msg": {"from": self.sender.index, "to": self.receiver.index,
                        "symbol": self.symbol, "arity": self.arity}}


@dataclass
class ResourceLedger:
    """
    Consumed resources. Entries are only ever appended.

    Attributes:
        entangled_pairs (list[tuple[int, PartyId]]): (n, remote party) per distributed pair.
        classical_to_alice (list[int]): Arity of every symbol received by Alice.
        classical_from_alice (list[int]): Arity of every symbol sent by Alice.
    """
    entangled_pairs: List[Tuple[int, PartyId]] = field(default_factory=list)
    classical_to_alice: List[int] = field(default_factory=list)
    classical_from_alice: List[int] = field(default_factory=list)

    def to_dict(self):
        return {"pairs": [{"n": n, "with": party.index} for n, party in self.entangled_pairs],
                "to_alice": len(self.classical_to_alice),
                "from_alice": len(self.classical_from_alice)}


@dataclass
class SharedPair:
    reg_a: int
    reg_b: int
    n: int
    remote: PartyId
    used: bool = False


class Session:
    """
    Execution state of one protocol run.

    A Session is single-threaded. Distinct sessions share nothing and may run in parallel.

    Args:
        registers (list[Register]): System registers, in state order.
        state (StateVector): Normalized initial state over those registers.
        seed (int): Seed of the session's random source.
        force_branch (Sequence[int | None], optional): Outcomes to force, consumed one per measurement in
            order; None entries (and measurements past the end) are sampled.
    """

    def __init__(self, registers, state, seed=0, force_branch=None):
        self.registers = list(registers)
        self.state = state
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.transcript = []
        self.ledger = ResourceLedger()
        self.branch_record = []
        self.pairs = []
        self.initial_system_state = state
        self.system_ids = [r.id for r in self.registers]
        self._forced = collections.deque(force_branch or [])
        self._next_id = len(self.registers)

    # bookkeeping

    @property
    def parties(self):
        return sorted({r.owner for r in self.registers if r.role == 'system'} | {ALICE})

    def register(self, reg_id):
        for reg in self.registers:
            if reg.id == reg_id:
                return reg
        raise DimMismatch(f"Register {reg_id} does not exist (or was measured out)")

    def position(self, reg_id):
        return self.registers.index(self.register(reg_id))

    def system_registers(self, party=None):
        """Ids of the system registers, optionally only those owned by `party`."""
        return [r.id for r in self.registers
                if r.role == 'system' and (party is None or r.owner == party)]

    def _append(self, register, vector):
        self.registers.append(register)
        self.state = linalg.tensor(self.state, vector)

    def _new_id(self):
        reg_id = self._next_id
        self._next_id += 1
        return reg_id

    def _check_owner(self, party, reg_ids):
        for reg_id in reg_ids:
            owner = self.register(reg_id).owner
            if owner != party:
                logger.warning("%s attempted to act on register %d owned by %s", party, reg_id, owner)
                raise LocalityViolation(f"{party} cannot act on register {reg_id} owned by {owner}")

    # party-level primitives

    def add_register(self, party, dim, role):
        """A party prepares a fresh local register in |0>."""
        if role not in ROLES:
            raise ValueError(f"Unknown register role {role!r}")
        reg_id = self._new_id()
        self._append(Register(reg_id, dim, party, role), linalg.zero_state([dim]))
        return reg_id

    def distribute_entangled_pair(self, n, remote):
        """
        Share the maximally entangled state n^{-1/2} sum_m |m_a m_b> between Alice and `remote`.

        Returns:
            tuple[int, int]: (Alice's register a, the remote register b).
        """
        if remote.is_alice:
            raise LocalityViolation("Entangled pairs are shared between Alice and a remote party")
        reg_a, reg_b = self._new_id(), self._new_id()
        pair = StateVector([n, n], np.eye(n).reshape(-1) / math.sqrt(n))
        self.registers.extend([Register(reg_a, n, ALICE, 'ancilla-a'), Register(reg_b, n, remote, 'ancilla-b')])
        self.state = linalg.tensor(self.state, pair)
        self.pairs.append(SharedPair(reg_a, reg_b, n, remote))
        self.ledger.entangled_pairs.append((n, remote))
        logger.info("Distributed a %d-level pair between Alice and %s (registers %d, %d)", n, remote, reg_a, reg_b)
        return reg_a, reg_b

    def ensure_pair(self, remote, n):
        """Distribute an n-level pair with `remote` unless an unused one is already shared."""
        if not any(not p.used and p.remote == remote and p.n == n for p in self.pairs):
            self.distribute_entangled_pair(n, remote)

    def take_pair(self, remote, n):
        """Mark the oldest unused n-level pair shared with `remote` as used and return it."""
        for pair in self.pairs:
            if not pair.used and pair.remote == remote and pair.n == n:
                pair.used = True
                return pair
        raise MissingPair(f"No unused {n}-level pair is shared with {remote}")

    def apply_local(self, party, U, regs, name='U', correction=False):
        """
        Apply a unitary U to registers all owned by `party`.

        Raises:
            LocalityViolation: If any register belongs to another party.
        """
        regs = list(regs)
        self._check_owner(party, regs)
        if not U.is_unitary():
            raise DimMismatch(f"Local gate {name} over {U.dims} is not unitary")
        self.state = linalg.apply_to_registers(self.state, U, [self.position(r) for r in regs])
        event = LocalGate(party, tuple(regs), name, correction)
        self.transcript.append(event)
        logger.debug("%s applied %s on %s", party, name, regs)

    def measure(self, party, reg, basis=None):
        """
        Measure a register owned by `party` and remove it from the state.

        Args:
            party (PartyId): The measuring party.
            reg (int): Register id.
            basis (list[StateVector], optional): Measurement basis; computational basis by default.

        Returns:
            int: The outcome.
        """
        self._check_owner(party, [reg])
        register = self.register(reg)
        basis = basis or linalg.computational_basis(register.dim)
        forced = self._forced.popleft() if self._forced else None
        source = ForcedOutcome(forced) if forced is not None else self.rng
        outcome, prob, collapsed = linalg.measure_projective(self.state, self.position(reg), basis, source)
        self.state = linalg.project_out(collapsed, self.position(reg), basis[outcome])
        self.registers.remove(register)
        self.transcript.append(Measurement(party, reg, outcome, prob))
        self.branch_record.append((outcome, prob))
        logger.debug("%s measured register %d: outcome %d (p=%.6f)", party, reg, outcome, prob)
        return outcome

    def send_classical(self, sender, receiver, symbol, arity):
        """
        Send one classical symbol of the given arity.

        Raises:
            SymbolOutOfRange: Unless 0 <= symbol < arity.
        """
        if not 0 <= symbol < arity:
            raise SymbolOutOfRange(f"Symbol {symbol} is outside [0, {arity})")
        if sender == receiver:
            raise ValueError("A party cannot send a message to itself")
        self.transcript.append(ClassicalMessage(sender, receiver, int(symbol), int(arity)))
        if receiver.is_alice:
            self.ledger.classical_to_alice.append(arity)
        if sender.is_alice:
            self.ledger.classical_from_alice.append(arity)
        logger.debug("%s -> %s: %d (arity %d)", sender, receiver, symbol, arity)

    def last_message(self, receiver):
        """The most recent classical message delivered to `receiver`."""
        for event in reversed(self.transcript):
            if isinstance(event, ClassicalMessage) and event.receiver == receiver:
                return event
        raise LookupError(f"{receiver} has not received any message")

    # views of the state

    def joint_state(self, reg_ids):
        """The global state with its registers in the order `reg_ids` (which must name every register)."""
        positions = [self.position(r) for r in reg_ids]
        if len(positions) != len(self.registers):
            raise DimMismatch("joint_state needs every live register; measure ancillas out first")
        return self.state.permute(positions)

    def system_state(self):
        return self.joint_state(self.system_ids)

    def system_dims(self):
        return tuple(self.register(r).dim for r in self.system_ids)


def new_session(system_dims, owners, initial_state=None, seed=0, force_branch=None):
    """
    Create a session holding only system registers.

    Args:
        system_dims (Sequence[int]): Dimension of each system register.
        owners (Sequence[PartyId]): Owner of each system register.
        initial_state (StateVector, optional): Normalized state over system_dims; |0...0> by default.
        seed (int): Seed of the session's random source.
        force_branch (Sequence[int | None], optional): Forced measurement outcomes, in order.

    Raises:
        DimMismatch: If dims, owners and state disagree.
    """
    system_dims = tuple(int(d) for d in system_dims)
    owners = list(owners)
    if len(owners) != len(system_dims):
        raise DimMismatch(f"{len(owners)} owners for {len(system_dims)} system registers")
    state = initial_state if initial_state is not None else linalg.zero_state(system_dims)
    if state.dims != system_dims:
        raise DimMismatch(f"Initial state over {state.dims} does not match system dims {system_dims}")
    if not state.is_normalized():
        raise DimMismatch("Initial state is not normalized")
    registers = [Register(i, d, owner, 'system') for i, (d, owner) in enumerate(zip(system_dims, owners))]
    logger.info("New session: systems %s owned by %s, seed %s", system_dims, [str(o) for o in owners], seed)
    return Session(registers, state, seed, force_branch)


def embed_operator(op, positions, dims):
    """Extend `op`, acting on the registers at `positions`, by the identity on the rest of `dims`."""
    dims = tuple(dims)
    size = math.prod(dims)
    identity = StateVector(dims * 2, np.eye(size).reshape(-1))
    full = linalg.apply_to_registers(identity, op, list(positions))
    return Operator(dims, full.amps.reshape(size, size))


@dataclass
class ProtocolOutcome:
    """
    Result of a protocol run.

    Attributes:
        final_system_state (StateVector): System registers after every ancilla was measured out.
        target_unitary (Operator | None): The intended operation on the system registers, computed directly
            (None when the run only prepares a stator).
        fidelity (float): |<final | target . initial>|.
        initial_state (StateVector): System state the session started from.
        transcript (list): Events of the run.
        ledger (ResourceLedger): Consumed resources.
        branch_record (list[tuple[int, float]]): (outcome, probability) of every measurement.
        extras (dict): Protocol-specific results.
    """
    final_system_state: StateVector
    target_unitary: Operator
    fidelity: float
    initial_state: StateVector
    transcript: list
    ledger: ResourceLedger
    branch_record: list
    extras: dict = field(default_factory=dict)

    def to_report(self, scenario, seed, angles, passed):
        return {"scenario": scenario,
                "seed": seed,
                "dims": list(self.final_system_state.dims),
                "angles": [float(a) for a in angles],
                "fidelity": self.fidelity,
                "ledger": self.ledger.to_dict(),
                "transcript": [event.to_dict() for event in self.transcript],
                "branches": [{"outcome": o, "prob": p} for o, p in self.branch_record],
                "pass": bool(passed)}


def finish(session, target):
    """Compare the session's system state with target . initial and package the outcome."""
    final = session.system_state()
    expected = target @ session.initial_system_state
    fidelity = linalg.fidelity_up_to_phase(final, expected)
    logger.info("Protocol finished with fidelity %.12f", fidelity)
    return ProtocolOutcome(final, target, fidelity, session.initial_system_state, list(session.transcript),
                           session.ledger, list(session.branch_record))

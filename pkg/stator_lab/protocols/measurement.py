'''
This module:
    - Lets Alice measure an involution sigma_n of a remote system (any hermitian involution, including
    products such as sigma_z (x) sigma_z) by coupling her half of a stator to a local two-level pointer.
    - The coupling is W = exp(i pi/4 (1 - sigma_x^a)(1 - X_P)): it flips the pointer iff the ancilla is in
    |->, so a pointer reading 0 means sigma_n = +1.
    - WAIT_FOR_CBIT couples only after the stator is fully prepared. INSTANTANEOUS couples before Bob's bit
    arrives; the coupling then realizes s sigma_n, s = +1 or -1 fixed by that bit, and the reported outcome is
    the pointer label times s.
    - Afterwards Alice measures a and sends one bit; the remote party restores the state with i sigma_n, so
    the system ends in P_+-(sigma_n) psi normalized.
'''

import enum
import logging
import math
from dataclasses import dataclass

from .. import linalg
from ..linalg import Operator
from ..stator import Involution
from .preparation import deliver_preparation, entangle_and_measure
from .rotation import measure_and_correct
from .session import ALICE, ProtocolOutcome, embed_operator

logger = logging.getLogger(__name__)


class MeasurementMode(enum.Enum):
    WAIT_FOR_CBIT = 'wait'
    INSTANTANEOUS = 'instantaneous'


@dataclass
class RemoteMeasurementOutcome(ProtocolOutcome):
    """
    ProtocolOutcome of a remote measurement; target_unitary holds the projector (1 + outcome sigma_n)/2.

    Attributes:
        outcome (int): +1 or -1.
        outcome_prob (float): Born probability of the outcome on the initial state.
        coupling_sign (int): Sign s of the realized coupling (always +1 in WAIT_FOR_CBIT mode).
        mode (MeasurementMode): How the pointer was coupled.
    """
    outcome: int = 1
    outcome_prob: float = 0.0
    coupling_sign: int = 1
    mode: MeasurementMode = MeasurementMode.WAIT_FOR_CBIT

    @property
    def post_state(self):
        return self.final_system_state


def pointer_coupling():
    """W over (a, P): identity when a is |+>, X on the pointer when a is |->."""
    X = Operator([2], [[0, 1], [1, 0]])
    flip = Operator.identity([2]) - X
    return linalg.expi_hermitian((math.pi / 4) * linalg.tensor(flip, flip), 1.0)


def remote_measurement(session, remote, g, mode=MeasurementMode.WAIT_FOR_CBIT):
    """
    Measure sigma_n on the system of `remote` without any operation by Alice on that system.

    Args:
        session (Session): Session whose `remote` party owns the registers g acts on.
        remote (PartyId): The remote party.
        g (Involution | Operator): The observable sigma_n.
        mode (MeasurementMode): When Alice couples her pointer.

    Returns:
        RemoteMeasurementOutcome: Outcome +-1, its probability and the post-measurement state; fidelity
        compares the final state with the normalized projection of the initial state.
    """
    if not isinstance(g, Involution):
        g = Involution(g)
    mode = MeasurementMode(mode)
    regs = session.system_registers(remote)
    session.ensure_pair(remote, 2)
    reg_a, prep_outcome = entangle_and_measure(session, remote, g)

    if mode is MeasurementMode.WAIT_FOR_CBIT:
        deliver_preparation(session, remote, reg_a, prep_outcome, 2)

    pointer = session.add_register(ALICE, 2, 'pointer')
    session.apply_local(ALICE, pointer_coupling(), [reg_a, pointer], name='W')
    reading = session.measure(ALICE, pointer)
    reading_prob = session.branch_record[-1][1]
    label = 1 if reading == 0 else -1

    coupling_sign = 1
    if mode is MeasurementMode.INSTANTANEOUS:
        deliver_preparation(session, remote, reg_a, prep_outcome, 2)
        # the delivered bit tells Alice whether her coupling acted with +g or -g
        coupling_sign = -1 if session.last_message(ALICE).symbol else 1
    outcome = label * coupling_sign
    measure_and_correct(session, remote, reg_a, g)
    logger.info("Remote measurement of %s (%s): outcome %+d, p=%.6f", remote, mode.value, outcome, reading_prob)

    positions = [session.system_ids.index(r) for r in regs]
    local_projector = 0.5 * (Operator.identity(g.dims) + outcome * g.generator)
    projector = embed_operator(local_projector, positions, session.system_dims())
    expected = (projector @ session.initial_system_state).normalized()
    final = session.system_state()
    return RemoteMeasurementOutcome(final, projector, linalg.fidelity_up_to_phase(final, expected),
                                    session.initial_system_state, list(session.transcript), session.ledger,
                                    list(session.branch_record), outcome=outcome, outcome_prob=reading_prob,
                                    coupling_sign=coupling_sign, mode=mode)

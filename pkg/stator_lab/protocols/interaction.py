'''
This module:
    - Applies the interaction exp(i lambda O_A (x) sigma_n) between Alice's own system and a remote system,
    or exp(i lambda O_A (x) L_Z) for an n-level remote generator, using a single stator.
    - Builds the remote CNOT-class gate exp(i pi/4 sigma_x^A (1 - sigma_x^B)) from the interaction.
'''

import logging
import math

from .. import linalg
from ..errors import DimMismatch, NonHermitianInput
from ..stator import Involution, alice_partner
from .preparation import prepare_stator
from .rotation import measure_and_correct
from .session import ALICE, embed_operator, finish

logger = logging.getLogger(__name__)


def _registers(session, remote, spec, opA):
    alice_regs = session.system_registers(ALICE)
    alice_dims = tuple(session.register(r).dim for r in alice_regs)
    if not alice_regs or opA.dims != alice_dims:
        raise DimMismatch(f"O_A over {opA.dims} does not fit Alice's system over {alice_dims}")
    remote_regs = session.system_registers(remote)
    remote_dims = tuple(session.register(r).dim for r in remote_regs)
    if spec.dims != remote_dims:
        raise DimMismatch(f"Remote generator over {spec.dims} does not fit {remote} over {remote_dims}")
    if not opA.is_hermitian():
        raise NonHermitianInput("O_A must be hermitian")
    return alice_regs, remote_regs


def interact(session, remote, spec, opA, lam):
    """
    Protocol steps of the remote interaction, without packaging the outcome.

    Returns:
        tuple[list[int], list[int]]: Alice's and the remote party's system registers.
    """
    alice_regs, remote_regs = _registers(session, remote, spec, opA)
    session.ensure_pair(remote, spec.n)
    reg_a = prepare_stator(session, remote, spec)
    H = lam * linalg.tensor(opA, alice_partner(spec))
    session.apply_local(ALICE, linalg.expi_hermitian(H, 1.0), alice_regs + [reg_a], name='U_Aa')
    outcome = measure_and_correct(session, remote, reg_a, spec)
    logger.info("Remote interaction (lambda=%.6f) with %s finished on branch %d", lam, remote, outcome)
    return alice_regs, remote_regs


def _embedded(session, op, regs):
    positions = [session.system_ids.index(r) for r in regs]
    return embed_operator(op, positions, session.system_dims())


def remote_interaction(session, remote, spec, opA, lam):
    """
    Apply exp(i lambda O_A (x) sigma_n) (or O_A (x) L_Z for an NLevel spec) to Alice's and a remote system.

    Args:
        session (Session): Session in which Alice owns the O_A registers and `remote` owns the spec registers.
        remote (PartyId): The remote party.
        spec (Involution | NLevel): Remote generator; its angles are ignored.
        opA (Operator): Hermitian operator on Alice's system.
        lam (float): Coupling strength.

    Returns:
        ProtocolOutcome
    """
    alice_regs, remote_regs = interact(session, remote, spec, opA, lam)
    target = linalg.expi_hermitian(lam * linalg.tensor(opA, spec.generator), 1.0)
    return finish(session, _embedded(session, target, alice_regs + remote_regs))


def cnot_unitary():
    """exp(i pi/4 sigma_x^A (1 - sigma_x^B)) over (A, B)."""
    X = linalg.Operator([2], [[0, 1], [1, 0]])
    H = (math.pi / 4) * linalg.tensor(X, linalg.Operator.identity([2]) - X)
    return linalg.expi_hermitian(H, 1.0)


def remote_cnot(session, remote):
    """
    Remote CNOT-class gate between Alice's qubit A and the remote qubit B.

    It is the interaction with O_A = sigma_x, sigma_n = sigma_x and lambda = -pi/4, followed by Alice's
    local exp(i pi/4 sigma_x^A).
    """
    sigma_x = Involution.from_axis('x')
    alice_regs, remote_regs = interact(session, remote, sigma_x, sigma_x.generator, -math.pi / 4)
    local = linalg.expi_hermitian(sigma_x.generator, math.pi / 4)
    session.apply_local(ALICE, local, alice_regs, name='local-rotation')
    return finish(session, _embedded(session, cnot_unitary(), alice_regs + remote_regs))

'''
This module:
    - Prepares a stator between Alice and a remote party from one shared entangled pair: the remote party
    applies the controlled-powers gate sum_m |m_b><m_b| (x) U^m to its ancilla and system, measures the
    ancilla in the Fourier basis, and sends the outcome to Alice, who removes the outcome-dependent phases.
    - The 2-level preparation is the n = 2 case with U = sigma_n (the Fourier basis is then the sigma_x basis
    and Alice's fix is the pi rotation about z).
    - The two halves of the procedure are exposed separately so a protocol can delay Alice's fix.
'''

import logging

import numpy as np
import scipy.linalg

from .. import linalg
from ..errors import DimMismatch
from ..linalg import Operator
from ..stator import Involution
from .session import ALICE

logger = logging.getLogger(__name__)


def controlled_powers(U, n):
    """sum_m |m_b><m_b| (x) U^m over (b, system registers of U)."""
    blocks = [U.power(m).mat for m in range(n)]
    return Operator((n,) + U.dims, scipy.linalg.block_diag(*blocks))


def phase_correction(n, k):
    """Alice's fix after outcome k: diag(exp(2 pi i k m / n)) on |m_a>."""
    m = np.arange(n)
    return Operator([n], np.diag(np.exp(2j * np.pi * k * m / n)))


def _clock_and_regs(session, remote, spec):
    regs = session.system_registers(remote)
    if not regs:
        raise DimMismatch(f"{remote} owns no system register")
    dims = tuple(session.register(r).dim for r in regs)
    if spec.dims != dims:
        raise DimMismatch(f"Generator over {spec.dims} does not fit the system of {remote} over {dims}")
    return spec.clock, regs


def entangle_and_measure(session, remote, spec):
    """
    Remote half of the preparation: controlled powers, then a Fourier-basis measurement of b.

    Returns:
        tuple[int, int]: (Alice's ancilla register, the remote outcome k). Nothing has been sent yet.
    """
    n = spec.n
    clock, regs = _clock_and_regs(session, remote, spec)
    pair = session.take_pair(remote, n)
    session.apply_local(remote, controlled_powers(clock, n), [pair.reg_b] + regs, name='controlled-U')
    outcome = session.measure(remote, pair.reg_b, linalg.fourier_basis(n))
    return pair.reg_a, outcome


def deliver_preparation(session, remote, reg_a, outcome, n):
    """Classical half: the remote party sends its outcome and Alice applies the phase correction."""
    session.send_classical(remote, ALICE, outcome, n)
    if outcome:
        session.apply_local(ALICE, phase_correction(n, outcome), [reg_a], name='phase-fix', correction=True)


def prepare_stator(session, remote, spec):
    n = spec.n
    reg_a, outcome = entangle_and_measure(session, remote, spec)
    deliver_preparation(session, remote, reg_a, outcome, n)
    logger.info("Prepared a %d-level stator toward %s (outcome %d)", n, remote, outcome)
    return reg_a


def prepare_stator_two_level(session, remote, g):
    """
    Turn a shared ebit into the 2-level stator |0_a> I + |1_a> sigma_n acting on the remote system.

    Args:
        session (Session): Session holding an unused 2-level pair shared with `remote`.
        remote (PartyId): Party owning the target system registers.
        g (Involution | Operator): The involution sigma_n.

    Returns:
        int: Alice's ancilla register a.
    """
    if not isinstance(g, Involution):
        g = Involution(g)
    return prepare_stator(session, remote, g)


def prepare_stator_n_level(session, remote, spec):
    """
    Turn a shared n-level pair into the n-level stator sum_m |m_a> U^m, U = exp(2 pi i L_Z / n).

    Returns:
        int: Alice's ancilla register a.
    """
    return prepare_stator(session, remote, spec)

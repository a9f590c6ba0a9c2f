'''
This module:
    - Rotates a remote system by exp(i alpha sigma_n) (2-level) or exp(i sum_k alpha_k L_Z^k) (n-level) with
    one shared pair, one symbol to Alice (stator preparation) and one symbol back (Alice's outcome).
    - Alice applies the rotation generated by her eigenoperator partner to her half of the stator, measures
    it in the computational basis and sends the outcome m; the remote party undoes the shift with U^(n-m).
'''

import logging
import math

from .. import linalg
from ..stator import Involution, NLevel, alice_partner
from .preparation import prepare_stator
from .session import ALICE, embed_operator, finish

logger = logging.getLogger(__name__)


def remote_correction(spec, outcome):
    """
    Unitary the remote party applies after Alice reports `outcome`, or None when nothing is needed.

    For an involution this is U_pi = exp(i pi sigma_n / 2) = i sigma_n; for an n-level clock U it is U^(n-m).
    """
    if not outcome:
        return None
    if isinstance(spec, Involution):
        return linalg.expi_hermitian(spec.generator, math.pi / 2)
    return spec.clock.power((spec.n - outcome) % spec.n)


def alice_generator(spec):
    """Alice's exponent: alpha sigma_x for an involution, sum_k alpha_k A^k for an n-level generator."""
    A = alice_partner(spec)
    if isinstance(spec, Involution):
        return spec.angle * A
    H = 0.0 * A
    for k, alpha in enumerate(spec.angles, start=1):
        H = H + alpha * A.power(k)
    return H


def target_generator(spec):
    if isinstance(spec, Involution):
        return spec.angle * spec.generator
    return spec.rotation_generator()


def measure_and_correct(session, remote, reg_a, spec):
    """Alice measures a, sends m (arity n) and the remote party applies its correction."""
    outcome = session.measure(ALICE, reg_a)
    session.send_classical(ALICE, remote, outcome, spec.n)
    correction = remote_correction(spec, outcome)
    if correction is not None:
        session.apply_local(remote, correction, session.system_registers(remote), name='shift-fix', correction=True)
    return outcome


def rotate_prepared(session, remote, reg_a, spec):
    """Rotation steps after the stator is in place on Alice's register `reg_a`."""
    session.apply_local(ALICE, linalg.expi_hermitian(alice_generator(spec), 1.0), [reg_a], name='U_a')
    return measure_and_correct(session, remote, reg_a, spec)


def _remote_rotation(session, remote, spec):
    regs = session.system_registers(remote)
    session.ensure_pair(remote, spec.n)
    reg_a = prepare_stator(session, remote, spec)
    outcome = rotate_prepared(session, remote, reg_a, spec)
    logger.info("Remote rotation on %s finished on branch %d", remote, outcome)
    target = linalg.expi_hermitian(target_generator(spec), 1.0)
    positions = [session.system_ids.index(r) for r in regs]
    return finish(session, embed_operator(target, positions, session.system_dims()))


def remote_rotation_two_level(session, remote, g):
    """
    Apply exp(i alpha sigma_n) to the system of `remote` by LOCC plus one ebit.

    Args:
        session (Session): Session whose `remote` party owns the target system registers.
        remote (PartyId): The remote party.
        g (Involution): sigma_n and the angle alpha.

    Returns:
        ProtocolOutcome: Final state, target unitary and fidelity. Independent of every measurement outcome.
    """
    return _remote_rotation(session, remote, g)


def remote_rotation_n_level(session, remote, spec):
    """
    Apply exp(i sum_k alpha_k L_Z^k) to an n-level remote system with one n-level pair and two nits.

    Args:
        spec (NLevel): Generator L_Z with its angles alpha_1..alpha_{n-1}.
    """
    if not isinstance(spec, NLevel):
        raise TypeError(f"remote_rotation_n_level takes an NLevel, got {type(spec).__name__}")
    return _remote_rotation(session, remote, spec)

'''
This module:
    - Performs exp(i sum_k alpha_k (x)_i L_i^(k_i)) on N remote systems, one system per remote party, by
    preparing one stator per party and letting Alice rotate all her ancillas together.
    - Each remote party receives exactly one symbol (Alice's outcome on its ancilla) and corrects alone.
'''

import logging

from .. import linalg
from ..errors import DimMismatch
from ..linalg import Operator
from ..stator import ProductSpec, alice_partner
from .preparation import prepare_stator
from .rotation import measure_and_correct
from .session import ALICE, PartyId, embed_operator, finish

logger = logging.getLogger(__name__)


def product_generator(operators, couplings):
    """
    sum over coupling keys of alpha_k (x)_i operators[i]^(k_i).

    Args:
        operators (list[Operator]): One operator per party, first party most significant.
        couplings (dict[tuple[int], float]): Angle of each power tuple.
    """
    dims = tuple(d for op in operators for d in op.dims)
    H = 0.0 * Operator.identity(dims)
    for key, alpha in couplings.items():
        H = H + alpha * linalg.tensor_all([op.power(k) for op, k in zip(operators, key)])
    return H


def remote_multi(session, spec):
    """
    Run the distributed product rotation over Remote(1)..Remote(N).

    Args:
        session (Session): Session whose Remote(i) owns the system registers of spec.parts[i - 1].
        spec (ProductSpec): Per-party generators and the coupling angles.

    Returns:
        ProtocolOutcome: extras["outcomes"] lists Alice's outcome for each party.
    """
    if not isinstance(spec, ProductSpec):
        raise TypeError(f"remote_multi takes a ProductSpec, got {type(spec).__name__}")
    remotes = [PartyId.remote(i) for i in range(1, len(spec.parts) + 1)]
    system_regs = []
    for party in remotes:
        regs = session.system_registers(party)
        if not regs:
            raise DimMismatch(f"{party} owns no system register")
        system_regs.extend(regs)

    ancillas = []
    for party, part in zip(remotes, spec.parts):
        session.ensure_pair(party, part.n)
        ancillas.append(prepare_stator(session, party, part))

    H_alice = product_generator([alice_partner(p) for p in spec.parts], spec.couplings)
    session.apply_local(ALICE, linalg.expi_hermitian(H_alice, 1.0), ancillas, name='U_a')
    outcomes = [measure_and_correct(session, party, reg_a, part)
                for party, reg_a, part in zip(remotes, ancillas, spec.parts)]
    logger.info("Multi-party rotation over %d parties finished on branch %s", len(remotes), outcomes)

    H_target = product_generator([p.generator for p in spec.parts], spec.couplings)
    target = linalg.expi_hermitian(H_target, 1.0)
    positions = [session.system_ids.index(r) for r in system_regs]
    outcome = finish(session, embed_operator(target, positions, session.system_dims()))
    outcome.extras["outcomes"] = outcomes
    return outcome

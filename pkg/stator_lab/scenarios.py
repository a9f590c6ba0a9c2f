'''
This module:
    - Names the protocol runs the command line and the verifier drive (rotate2, rotaten, multi, interact,
    cnot, measure, prepare, identity) and builds each one's generator from a ScenarioParams.
    - Knows each scenario's system layout (register dimensions and owners) so a run can start from any
    input state, and validates parameters before anything executes.
'''

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from . import linalg
from .errors import ConfigError, StatorLabError
from .linalg import StateVector
from .protocols import (ALICE, BOB, MeasurementMode, PartyId, ProtocolOutcome, new_session, remote_cnot,
                        remote_interaction, remote_measurement, remote_multi, remote_rotation_n_level,
                        remote_rotation_two_level)
from .protocols.preparation import prepare_stator
from .stator import (Involution, NLevel, ProductSpec, apply, pauli, power_tuples, stator_for)

logger = logging.getLogger(__name__)

MAX_SYSTEM_DIM = 64


@dataclass(frozen=True)
class ScenarioParams:
    """
    Parameters shared by every scenario. Unused fields are ignored by the scenarios that do not need them.

    Attributes:
        n (int): Level count of each remote system.
        parties (int): Number of remote parties (multi only).
        angles (tuple[float]): Rotation angles, lambda for interact, coupling angles for multi.
        axis (str | tuple[float]): Named axis or unit 3-vector of the remote generator.
        spectrum (tuple[int], optional): Integer spectrum of L_Z, diagonal in the computational basis.
        mode (MeasurementMode): Coupling mode of the measure scenario.
    """
    n: int = 2
    parties: int = 1
    angles: tuple = ()
    axis: object = 'z'
    spectrum: Optional[tuple] = None
    mode: MeasurementMode = MeasurementMode.WAIT_FOR_CBIT


class Scenario(NamedTuple):
    name: str
    layout: Callable
    run: Callable
    description: str


def involution(params, angle=0.0):
    return Involution.from_axis(params.axis, angle)


def n_level(params, angles=()):
    n = params.n
    angles = tuple(angles) + (0.0,) * (n - 1 - len(angles))
    if params.spectrum is not None:
        return NLevel(tuple(params.spectrum), linalg.Operator.identity([n]), angles)
    return NLevel.from_axis(n, params.axis, angles)


def remote_generator(params, angles=()):
    """Involution for n = 2 (unless a spectrum is given), NLevel otherwise."""
    if params.n == 2 and params.spectrum is None:
        return involution(params, angles[0] if angles else 0.0)
    return n_level(params, angles)


def product_spec(params):
    parts = tuple(remote_generator(params) for _ in range(params.parties))
    keys = power_tuples([p.n for p in parts])
    angles = tuple(params.angles) + (0.0,) * (len(keys) - len(params.angles))
    return ProductSpec(parts, dict(zip(keys, angles)))


def _first_angle(params):
    return params.angles[0] if params.angles else 0.0


# layouts: (system dims, owners)

def _remote_qubit(params):
    return [2], [BOB]


def _remote_qudit(params):
    return [params.n], [BOB]


def _multi_layout(params):
    return [params.n] * params.parties, [PartyId.remote(i) for i in range(1, params.parties + 1)]


def _interact_layout(params):
    return [2, params.n], [ALICE, BOB]


def _cnot_layout(params):
    return [2, 2], [ALICE, BOB]


# runners

def _run_identity(session, params):
    return remote_rotation_two_level(session, BOB, involution(params, 0.0))


def _run_rotate2(session, params):
    return remote_rotation_two_level(session, BOB, involution(params, _first_angle(params)))


def _run_rotaten(session, params):
    return remote_rotation_n_level(session, BOB, n_level(params, params.angles))


def _run_multi(session, params):
    return remote_multi(session, product_spec(params))


def _run_interact(session, params):
    return remote_interaction(session, BOB, remote_generator(params), pauli('x'), _first_angle(params))


def _run_cnot(session, params):
    return remote_cnot(session, BOB)


def _run_measure(session, params):
    return remote_measurement(session, BOB, involution(params), params.mode)


def _run_prepare(session, params):
    """Stator preparation alone; the 'final state' is the joint (a, system) state."""
    spec = remote_generator(params)
    session.ensure_pair(BOB, spec.n)
    reg_a = prepare_stator(session, BOB, spec)
    joint = session.joint_state([reg_a] + session.system_ids)
    expected = apply(stator_for(spec), session.initial_system_state).state
    fidelity = linalg.fidelity_up_to_phase(joint, expected)
    logger.info("Stator preparation finished with fidelity %.12f", fidelity)
    return ProtocolOutcome(joint, None, fidelity, session.initial_system_state, list(session.transcript),
                           session.ledger, list(session.branch_record))


SCENARIOS = {
    s.name: s for s in [
        Scenario('identity', _remote_qubit, _run_identity, "2-level remote rotation with zero angle"),
        Scenario('rotate2', _remote_qubit, _run_rotate2, "2-level remote rotation exp(i alpha sigma_n)"),
        Scenario('rotaten', _remote_qudit, _run_rotaten, "n-level remote rotation exp(i sum alpha_k L_Z^k)"),
        Scenario('multi', _multi_layout, _run_multi, "product rotation on N remote systems"),
        Scenario('interact', _interact_layout, _run_interact, "remote interaction exp(i lambda sigma_x (x) G)"),
        Scenario('cnot', _cnot_layout, _run_cnot, "remote CNOT-class gate"),
        Scenario('measure', _remote_qubit, _run_measure, "remote measurement of sigma_n"),
        Scenario('prepare', _remote_qudit, _run_prepare, "stator preparation"),
    ]
}


def get_scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError('scenario', f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None


def validate(name, params):
    """
    Check that `params` can drive scenario `name`, by building its generators once.

    Raises:
        ConfigError: Naming the offending option.
    """
    get_scenario(name)
    if params.n < 2:
        raise ConfigError('n', "must be at least 2")
    if params.parties < 1:
        raise ConfigError('parties', "must be at least 1")
    if name == 'multi' and params.n ** params.parties > MAX_SYSTEM_DIM:
        raise ConfigError('parties', f"n^parties must not exceed {MAX_SYSTEM_DIM}")
    if name == 'rotaten' and len(params.angles) > params.n - 1:
        raise ConfigError('angles', f"a {params.n}-level rotation takes at most {params.n - 1} angles")
    if name == 'multi':
        count = len(power_tuples([params.n] * params.parties))
        if len(params.angles) > count:
            raise ConfigError('angles', f"{params.parties} parties of {params.n} levels take at most {count} angles")
    if name in ('rotate2', 'measure', 'identity') and params.spectrum is not None:
        raise ConfigError('spectrum', f"{name} takes an axis, not a spectrum")
    try:
        if name in ('rotate2', 'measure', 'identity'):
            involution(params)
        elif name == 'rotaten':
            n_level(params, params.angles)
        elif name == 'multi':
            product_spec(params)
        elif name in ('interact', 'prepare'):
            remote_generator(params)
    except StatorLabError as exc:
        option = 'spectrum' if params.spectrum is not None else 'axis'
        raise ConfigError(option, str(exc)) from exc


def layout(name, params):
    dims, owners = get_scenario(name).layout(params)
    return tuple(dims), owners


def run_scenario(name, params, state=None, seed=0, force_branch=None):
    """
    Run one scenario in a fresh session.

    Args:
        name (str): Scenario name.
        params (ScenarioParams): Scenario parameters.
        state (StateVector, optional): Input state over the scenario's system layout; |0...0> by default.
        seed (int | numpy.random.SeedSequence): Seed of the session's random source.
        force_branch (Sequence[int | None], optional): Forced measurement outcomes, in order.

    Returns:
        ProtocolOutcome
    """
    scenario = get_scenario(name)
    dims, owners = layout(name, params)
    session = new_session(dims, owners, state, seed, force_branch)
    return scenario.run(session, params)


def basis_inputs(name, params):
    """Every computational basis state of the scenario's system, in index order."""
    dims = layout(name, params)[0]
    return [linalg.basis_state(dims, j) for j in range(math.prod(dims))]


def uniform_superposition(name, params):
    dims = layout(name, params)[0]
    size = math.prod(dims)
    return StateVector(dims, [1 / math.sqrt(size)] * size)

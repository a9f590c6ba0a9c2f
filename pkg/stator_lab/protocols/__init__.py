from .session import (ALICE, BOB, PartyId, ProtocolOutcome, Register, ResourceLedger, Session, embed_operator,
                      finish, new_session)
from .preparation import prepare_stator_n_level, prepare_stator_two_level
from .rotation import remote_rotation_n_level, remote_rotation_two_level
from .multi import remote_multi
from .interaction import remote_cnot, remote_interaction
from .measurement import MeasurementMode, RemoteMeasurementOutcome, remote_measurement

__all__ = [
    'ALICE', 'BOB', 'PartyId', 'ProtocolOutcome', 'Register', 'ResourceLedger', 'Session', 'embed_operator',
    'finish', 'new_session', 'prepare_stator_n_level', 'prepare_stator_two_level', 'remote_rotation_n_level',
    'remote_rotation_two_level', 'remote_multi', 'remote_cnot', 'remote_interaction', 'MeasurementMode',
    'RemoteMeasurementOutcome', 'remote_measurement',
]

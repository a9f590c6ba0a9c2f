
from . import errors, linalg, stator, protocols, scenarios, verify
from .stator import Involution, NLevel, ProductSpec, Stator
from .protocols import ALICE, BOB, PartyId, Session, new_session

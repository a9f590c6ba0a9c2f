"""
Tests for the session engine and every remote-operation protocol.
"""
import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from stator_lab import linalg, stator, verify
from stator_lab.errors import DimMismatch, LocalityViolation, MissingPair, NonHermitianInput, SymbolOutOfRange
from stator_lab.linalg import Operator, StateVector
from stator_lab.protocols import (ALICE, BOB, MeasurementMode, PartyId, new_session, prepare_stator_n_level,
                                  prepare_stator_two_level, remote_cnot, remote_interaction, remote_measurement,
                                  remote_multi, remote_rotation_n_level, remote_rotation_two_level)
from stator_lab.protocols.rotation import remote_correction
from stator_lab.protocols.session import LocalGate
from stator_lab.stator import Involution, NLevel, ProductSpec

FIDELITY = 1 - 1e-9


def unit_vector(rng):
    v = rng.normal(size=3)
    return tuple(v / np.linalg.norm(v))


def bob_session(dims=(2,), state=None, seed=0, force_branch=None):
    return new_session(dims, [BOB] * len(dims), state, seed, force_branch)


def assert_ledger(ledger, pairs, to_alice, from_alice):
    report = ledger.to_dict()
    assert [p["n"] for p in report["pairs"]] == pairs
    assert report["to_alice"] == to_alice
    assert report["from_alice"] == from_alice


# session engine

def test_new_session_single_qubit():
    s = bob_session()
    assert s.system_dims() == (2,)
    assert s.transcript == [] and s.ledger.to_dict() == {"pairs": [], "to_alice": 0, "from_alice": 0}


def test_new_session_three_remotes():
    owners = [PartyId.remote(i) for i in (1, 2, 3)]
    s = new_session([2, 2, 2], owners)
    assert s.parties == [ALICE] + owners


def test_new_session_dims_mismatch():
    with pytest.raises(DimMismatch):
        new_session([2], [BOB], linalg.zero_state([3]))
    with pytest.raises(DimMismatch):
        new_session([2, 2], [BOB])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_distributed_pair_is_maximally_entangled(n):
    s = bob_session()
    reg_a, reg_b = s.distribute_entangled_pair(n, BOB)
    entropy = linalg.entanglement_entropy(s.state, [s.position(reg_a)])
    assert entropy == pytest.approx(math.log2(n), abs=1e-10)
    s.distribute_entangled_pair(n, BOB)
    assert len(s.ledger.entangled_pairs) == 2


def test_apply_local_enforces_ownership():
    s = bob_session()
    reg_a, reg_b = s.distribute_entangled_pair(2, BOB)
    s.apply_local(ALICE, stator.pauli('x'), [reg_a])
    with pytest.raises(LocalityViolation):
        s.apply_local(ALICE, stator.pauli('x'), s.system_registers(BOB))
    with pytest.raises(LocalityViolation):
        s.apply_local(BOB, stator.pauli('x'), [reg_a])


def test_gate_spanning_two_remotes_is_rejected():
    owners = [PartyId.remote(1), PartyId.remote(2)]
    s = new_session([2, 2], owners)
    swap = Operator([2, 2], np.eye(4)[[0, 2, 1, 3]])
    with pytest.raises(LocalityViolation):
        s.apply_local(owners[0], swap, s.system_registers())


def test_locality_fuzz(rng):
    owners = [PartyId.remote(1), PartyId.remote(2)]
    s = new_session([2, 2], owners)
    for party in owners:
        s.distribute_entangled_pair(2, party)
    registers = list(s.registers)
    parties = [ALICE] + owners
    raised = 0
    for _ in range(1000):
        party = parties[rng.integers(len(parties))]
        foreign = [r for r in registers if r.owner != party]
        target = foreign[rng.integers(len(foreign))]
        regs = [target.id]
        own = [r for r in registers if r.owner == party]
        if own and rng.random() < 0.5:
            regs.append(own[rng.integers(len(own))].id)
        gate = Operator.identity([s.register(r).dim for r in regs])
        with pytest.raises(LocalityViolation):
            s.apply_local(party, gate, regs)
        raised += 1
    assert raised == 1000
    assert s.transcript == []


def test_send_classical_ledger_and_range():
    s = bob_session()
    s.send_classical(BOB, ALICE, 0, 2)
    s.send_classical(ALICE, BOB, 2, 3)
    assert s.ledger.classical_to_alice == [2]
    assert s.ledger.classical_from_alice == [3]
    with pytest.raises(SymbolOutOfRange):
        s.send_classical(ALICE, BOB, 5, 3)


def test_last_message_is_latest_delivery():
    s = bob_session()
    with pytest.raises(LookupError):
        s.last_message(ALICE)
    s.send_classical(BOB, ALICE, 1, 2)
    s.send_classical(ALICE, BOB, 2, 3)
    s.send_classical(BOB, ALICE, 0, 2)
    assert s.last_message(ALICE).symbol == 0
    assert s.last_message(BOB).symbol == 2


def test_preparation_needs_a_pair():
    with pytest.raises(MissingPair):
        prepare_stator_two_level(bob_session(), BOB, Involution.from_axis('x'))


# stator preparation

@pytest.mark.parametrize("branch", [0, 1])
def test_prepare_two_level_bell_state(branch):
    s = bob_session(force_branch=[branch])
    s.distribute_entangled_pair(2, BOB)
    reg_a = prepare_stator_two_level(s, BOB, Involution.from_axis('x'))
    joint = s.joint_state([reg_a] + s.system_ids)
    assert linalg.fidelity_up_to_phase(joint, StateVector([2, 2], np.array([1, 0, 0, 1]) / math.sqrt(2))) \
        == pytest.approx(1.0, abs=1e-10)
    assert_ledger(s.ledger, [2], 1, 0)
    assert s.branch_record[0] == (branch, pytest.approx(0.5))


def test_prepare_two_level_matches_stator(rng):
    psi = linalg.random_state([2], rng)
    g = Involution.from_axis(unit_vector(rng))
    for branch in (0, 1):
        s = bob_session(state=psi, force_branch=[branch])
        s.distribute_entangled_pair(2, BOB)
        reg_a = prepare_stator_two_level(s, BOB, g)
        expected = stator.apply(stator.make_two_level_stator(g), psi).state
        assert linalg.fidelity_up_to_phase(s.joint_state([reg_a] + s.system_ids), expected) > 1 - 1e-10


@pytest.mark.parametrize("branch", [0, 1, 2])
def test_prepare_n_level_all_branches(rng, branch):
    spec = NLevel.default(3)
    psi = linalg.random_state([3], rng)
    s = bob_session((3,), psi, force_branch=[branch])
    s.distribute_entangled_pair(3, BOB)
    reg_a = prepare_stator_n_level(s, BOB, spec)
    expected = stator.apply(stator.make_n_level_stator(3, spec.clock), psi).state
    assert linalg.fidelity_up_to_phase(s.joint_state([reg_a] + s.system_ids), expected) > 1 - 1e-10
    assert s.branch_record[0][1] == pytest.approx(1 / 3)
    assert_ledger(s.ledger, [3], 1, 0)


def test_prepare_n_level_at_two_matches_two_level(rng):
    psi = linalg.random_state([2], rng)
    states = []
    for spec in (Involution.from_axis('z'), NLevel.default(2)):
        s = bob_session(state=psi, force_branch=[1])
        s.distribute_entangled_pair(2, BOB)
        reg_a = prepare_stator_n_level(s, BOB, spec)
        states.append(s.joint_state([reg_a] + s.system_ids))
    assert_allclose(states[0].amps, states[1].amps, atol=1e-10)


# remote rotations

def test_rotate_two_level_random_triples(rng):
    for _ in range(100):
        psi = linalg.random_state([2], rng)
        g = Involution.from_axis(unit_vector(rng), rng.uniform(-math.pi, math.pi))
        oracle = verify.oracle_direct(g, psi)
        for profile in itertools.product((0, 1), repeat=2):
            outcome = remote_rotation_two_level(bob_session(state=psi, force_branch=list(profile)), BOB, g)
            assert outcome.fidelity >= FIDELITY
            assert linalg.fidelity_up_to_phase(outcome.final_system_state, oracle) >= FIDELITY


def test_rotate_two_level_half_pi_on_plus(plus_state):
    g = Involution.from_axis('z', math.pi / 2)
    outcome = remote_rotation_two_level(bob_session(state=plus_state, seed=3), BOB, g)
    minus = StateVector([2], np.array([1, -1]) / math.sqrt(2))
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, minus) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("branch", [0, 1])
def test_rotate_zero_angle_is_identity(rng, branch):
    psi = linalg.random_state([2], rng)
    outcome = remote_rotation_two_level(bob_session(state=psi, force_branch=[0, branch]), BOB,
                                        Involution.from_axis('y'))
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, psi) >= FIDELITY


def test_rotate_two_level_ledger():
    outcome = remote_rotation_two_level(bob_session(), BOB, Involution.from_axis('x', 0.4))
    assert_ledger(outcome.ledger, [2], 1, 1)
    assert outcome.ledger.classical_to_alice == [2] and outcome.ledger.classical_from_alice == [2]
    assert verify.check_causality(outcome.transcript)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_rotate_n_level_all_branches(rng, n):
    for _ in range(50):
        angles = tuple(rng.uniform(-2, 2, size=n - 1))
        spec = NLevel.default(n, angles=angles)
        psi = linalg.random_state([n], rng)
        oracle = verify.oracle_direct(spec, psi)
        for k, m in itertools.product(range(n), repeat=2):
            outcome = remote_rotation_n_level(bob_session((n,), psi, force_branch=[k, m]), BOB, spec)
            assert outcome.fidelity >= FIDELITY
            assert linalg.fidelity_up_to_phase(outcome.final_system_state, oracle) >= FIDELITY
            assert verify.check_causality(outcome.transcript)


def test_rotate_qutrit_example(rng):
    spec = NLevel.default(3, angles=(1.1, 0.4))
    psi = linalg.random_state([3], rng)
    for m in range(3):
        outcome = remote_rotation_n_level(bob_session((3,), psi, force_branch=[0, m]), BOB, spec)
        assert outcome.fidelity >= FIDELITY
    assert_ledger(outcome.ledger, [3], 1, 1)
    assert outcome.ledger.classical_from_alice == [3]


def test_qutrit_outcome_one_is_undone_by_clock_squared():
    spec = NLevel.default(3)
    assert_allclose(remote_correction(spec, 1).mat, spec.clock.power(2).mat, atol=1e-12)
    assert_allclose(remote_correction(spec, 2).mat, spec.clock.mat, atol=1e-12)
    assert remote_correction(spec, 0) is None


def test_rotate_n_level_uniform_outcomes(rng):
    spec = NLevel.default(3, angles=(0.3, -0.8))
    counts = np.zeros(3, dtype=int)
    for seed in range(600):
        outcome = remote_rotation_n_level(bob_session((3,), seed=seed), BOB, spec)
        counts[outcome.branch_record[1][0]] += 1
        assert outcome.branch_record[1][1] == pytest.approx(1 / 3)
    assert verify.chi_square_uniform(counts).passed


# distributed systems

def multi_session(levels, state=None, force_branch=None, seed=0):
    owners = [PartyId.remote(i) for i in range(1, len(levels) + 1)]
    return new_session(levels, owners, state, seed, force_branch)


def test_multi_pair_coupling(rng):
    parts = (Involution.from_axis('z'), Involution.from_axis('x'))
    alpha = 0.9
    spec = ProductSpec(parts, stator.couplings_from_subsets({(1, 2): alpha}, 2))
    psi = linalg.random_state([2, 2], rng)
    expected = linalg.expi_hermitian(alpha * linalg.tensor(stator.pauli('z'), stator.pauli('x')), 1.0) @ psi
    outcome = remote_multi(multi_session([2, 2], psi, seed=4), spec)
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, expected) >= FIDELITY
    assert_ledger(outcome.ledger, [2, 2], 2, 2)


def test_multi_three_qubits_full_family(rng):
    parts = tuple(Involution.from_axis(unit_vector(rng)) for _ in range(3))
    couplings = {key: rng.uniform(-1, 1) for key in stator.power_tuples([2, 2, 2])}
    spec = ProductSpec(parts, couplings)
    psi = linalg.random_state([2, 2, 2], rng)
    oracle = verify.oracle_direct(spec, psi)
    for profile in [(0,) * 6, (1,) * 6, (0, 1, 1, 0, 1, 0)]:
        outcome = remote_multi(multi_session([2, 2, 2], psi, list(profile)), spec)
        assert linalg.fidelity_up_to_phase(outcome.final_system_state, oracle) >= FIDELITY
        assert verify.check_causality(outcome.transcript)
    assert_ledger(outcome.ledger, [2, 2, 2], 3, 3)


def test_multi_zero_couplings_identity_in_every_branch(rng):
    parts = (Involution.from_axis('x'), Involution.from_axis('y'))
    spec = ProductSpec(parts, {})
    psi = linalg.random_state([2, 2], rng)
    for alice in itertools.product((0, 1), repeat=2):
        outcome = remote_multi(multi_session([2, 2], psi, [0, 0] + list(alice)), spec)
        assert linalg.fidelity_up_to_phase(outcome.final_system_state, psi) >= FIDELITY


def test_multi_mixed_dimensions(rng):
    parts = (Involution.from_axis('z'), NLevel.default(3))
    couplings = {key: rng.uniform(-1, 1) for key in stator.power_tuples([2, 3])}
    spec = ProductSpec(parts, couplings)
    psi = linalg.random_state([2, 3], rng)
    outcome = remote_multi(multi_session([2, 3], psi, [1, 2, 1, 1]), spec)
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, verify.oracle_direct(spec, psi)) >= FIDELITY
    assert outcome.ledger.classical_from_alice == [2, 3]


# remote interaction and CNOT

def interaction_session(alice_dim, remote_dim, state=None, force_branch=None, seed=0):
    return new_session([alice_dim, remote_dim], [ALICE, BOB], state, seed, force_branch)


def test_interaction_zero_coupling(rng):
    psi = linalg.random_state([2, 2], rng)
    outcome = remote_interaction(interaction_session(2, 2, psi), BOB, Involution.from_axis('x'),
                                 stator.pauli('x'), 0.0)
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, psi) >= FIDELITY


def test_interaction_with_alice_qutrit(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    opA = Operator([3], (A + A.conj().T) / 2)
    g = Involution.from_axis(unit_vector(rng))
    psi = linalg.random_state([3, 2], rng)
    oracle = verify.interaction_oracle(opA, g, 0.7) @ psi
    for branch in itertools.product((0, 1), repeat=2):
        outcome = remote_interaction(interaction_session(3, 2, psi, list(branch)), BOB, g, opA, 0.7)
        assert linalg.fidelity_up_to_phase(outcome.final_system_state, oracle) >= FIDELITY
        assert outcome.fidelity >= FIDELITY


def test_interaction_with_n_level_remote(rng):
    spec = NLevel.default(3)
    psi = linalg.random_state([2, 3], rng)
    oracle = verify.interaction_oracle(stator.pauli('y'), spec, -0.45) @ psi
    for k, m in itertools.product(range(3), repeat=2):
        outcome = remote_interaction(interaction_session(2, 3, psi, [k, m]), BOB, spec, stator.pauli('y'), -0.45)
        assert linalg.fidelity_up_to_phase(outcome.final_system_state, oracle) >= FIDELITY


def test_interaction_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        remote_interaction(interaction_session(2, 2), BOB, Involution.from_axis('x'),
                           Operator([2], [[0, 1], [0, 0]]), 0.3)


def test_cnot_matches_closed_form(rng):
    psi = linalg.random_state([2, 2], rng)
    for profile in itertools.product((0, 1), repeat=2):
        outcome = remote_cnot(interaction_session(2, 2, psi, list(profile)), BOB)
        assert linalg.fidelity_up_to_phase(outcome.final_system_state, verify.cnot_oracle() @ psi) >= FIDELITY
    assert_ledger(outcome.ledger, [2], 1, 1)


def test_cnot_leaves_alice_alone_when_remote_is_plus(rng, plus_state):
    alice = linalg.random_state([2], rng)
    psi = linalg.tensor(alice, plus_state)
    outcome = remote_cnot(interaction_session(2, 2, psi, seed=11), BOB)
    assert linalg.fidelity_up_to_phase(outcome.final_system_state, psi) >= FIDELITY


# remote measurement

def test_measure_eigenstate_gives_plus_one():
    outcome = remote_measurement(bob_session(), BOB, Involution.from_axis('z'))
    assert outcome.outcome == 1
    assert outcome.outcome_prob == pytest.approx(1.0)
    assert outcome.fidelity == pytest.approx(1.0, abs=1e-10)
    assert_ledger(outcome.ledger, [2], 1, 1)


@pytest.mark.parametrize("mode", list(MeasurementMode))
def test_measure_post_state_is_projection(rng, mode):
    g = Involution.from_axis(unit_vector(rng))
    psi = linalg.random_state([2], rng)
    for profile in itertools.product((0, 1), repeat=3):
        outcome = remote_measurement(bob_session(state=psi, force_branch=list(profile)), BOB, g, mode)
        projector = 0.5 * (Operator.identity([2]) + outcome.outcome * g.generator)
        expected = (projector @ psi).normalized()
        assert linalg.fidelity_up_to_phase(outcome.post_state, expected) >= 1 - 1e-10
        assert outcome.outcome_prob == pytest.approx(float(np.vdot(psi.amps, (projector @ psi).amps).real))
        assert verify.check_causality(outcome.transcript)


def test_instantaneous_sign_follows_preparation_bit(plus_state):
    g = Involution.from_axis('z')
    for prep in (0, 1):
        for reading in (0, 1):
            outcome = remote_measurement(bob_session(state=plus_state, force_branch=[prep, reading]), BOB, g,
                                         MeasurementMode.INSTANTANEOUS)
            sign = 1 if prep == 0 else -1
            assert outcome.coupling_sign == sign
            assert outcome.outcome == sign * (1 if reading == 0 else -1)
            assert outcome.fidelity >= 1 - 1e-10


def test_instantaneous_delivers_bit_after_pointer():
    outcome = remote_measurement(bob_session(seed=2), BOB, Involution.from_axis('x'), MeasurementMode.INSTANTANEOUS)
    kinds = [type(e).__name__ for e in outcome.transcript]
    measurements = [i for i, kind in enumerate(kinds) if kind == 'Measurement']
    # remote ancilla, then the pointer, then Alice's ancilla
    assert len(measurements) == 3
    assert measurements[1] < kinds.index('ClassicalMessage')


@pytest.mark.parametrize("prep", [0, 1])
def test_instantaneous_outcome_uses_delivered_bit(plus_state, prep):
    session = bob_session(state=plus_state, force_branch=[prep, 0])
    outcome = remote_measurement(session, BOB, Involution.from_axis('z'), MeasurementMode.INSTANTANEOUS)
    delivered = session.last_message(ALICE)
    assert delivered.sender == BOB and delivered.symbol == prep
    assert outcome.coupling_sign == (-1 if delivered.symbol else 1)
    assert outcome.outcome == outcome.coupling_sign


def test_measure_parity_of_bell_state():
    bell = StateVector([2, 2], np.array([1, 0, 0, 1]) / math.sqrt(2))
    parity = Involution(linalg.tensor(stator.pauli('z'), stator.pauli('z')))
    outcome = remote_measurement(bob_session((2, 2), bell, seed=5), BOB, parity)
    assert outcome.outcome == 1
    assert outcome.outcome_prob == pytest.approx(1.0)
    assert linalg.fidelity_up_to_phase(outcome.post_state, bell) == pytest.approx(1.0, abs=1e-10)


def test_corrections_are_flagged():
    outcome = remote_rotation_two_level(bob_session(force_branch=[1, 1]), BOB, Involution.from_axis('x', 0.2))
    corrections = [e for e in outcome.transcript if isinstance(e, LocalGate) and e.correction]
    assert [c.party for c in corrections] == [ALICE, BOB]

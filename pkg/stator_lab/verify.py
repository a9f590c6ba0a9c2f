'''
This module:
    - Computes target operations directly (oracle_direct), with plain matrix exponentials and none of the
    protocol machinery, so protocol runs can be checked against them.
    - Counts the independent product eigenoperators of N n-level stators (count_eigenoperators) and compares
    N pairs with a single n^N-level pair.
    - Tests classical message symbols for uniformity and for independence of the angles and input states
    (chi-square at significance 0.001, via scipy.stats).
    - Reconstructs the process matrix of a scenario from forced-branch runs on basis inputs.
    - Runs seeded trial batches into pandas DataFrames and audits transcripts for causal ordering.
'''

import functools
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
import pandas as pd
import scipy.stats

from . import linalg, scenarios
from .errors import ConfigError, DimMismatch, EmptyCounts, NonUnitaryProcess, TooLarge
from .linalg import Operator
from .protocols import ALICE
from .protocols.measurement import RemoteMeasurementOutcome
from .protocols.session import ClassicalMessage, LocalGate
from .stator import (Involution, NLevel, ProductSpec, eigenoperator_residual, make_n_level_stator,
                     power_tuples, product_stator, shift_operator)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-8
RESIDUAL_TOL = 1e-10
SIGNIFICANCE = 0.001
FIDELITY_TOL = 1e-9
PROCESS_UNITARY_TOL = 1e-8
MAX_FAMILY_DIM = 256
MAX_FULL_CHECK_DIM = 64
MAX_PROCESS_DIM = 16
DEFAULT_BRANCH_PROFILE = (0,) * 64
MESSAGE_COLUMNS = ["trial", "sender", "receiver", "remote", "direction", "symbol", "arity"]


# oracles

def _expi(H, t=1.0):
    evals, evecs = np.linalg.eigh(H)
    return (evecs * np.exp(1j * t * evals)) @ evecs.conj().T


def _spec_hamiltonian(spec):
    if isinstance(spec, Involution):
        return spec.angle * spec.generator.mat
    if isinstance(spec, NLevel):
        L = spec.generator.mat
        return sum(alpha * np.linalg.matrix_power(L, k) for k, alpha in enumerate(spec.angles, start=1))
    gens = [p.generator.mat for p in spec.parts]
    side = math.prod(g.shape[0] for g in gens)
    H = np.zeros((side, side), dtype=complex)
    for key, alpha in spec.couplings.items():
        H += alpha * functools.reduce(np.kron, [np.linalg.matrix_power(g, k) for g, k in zip(gens, key)])
    return H


def spec_dims(spec):
    if isinstance(spec, ProductSpec):
        return tuple(d for p in spec.parts for d in p.dims)
    return spec.dims


def oracle_unitary(spec):
    """The target unitary of an Involution, NLevel or ProductSpec, by direct exponentiation."""
    return Operator(spec_dims(spec), _expi(_spec_hamiltonian(spec)))


def oracle_direct(spec, psi):
    """
    Apply the target unitary of `spec` to psi without running any protocol.

    Raises:
        DimMismatch: If psi is not over the spec's registers.
    """
    return oracle_unitary(spec) @ psi


def interaction_oracle(opA, spec, lam):
    """exp(i lambda O_A (x) G) for the remote generator G of spec."""
    H = lam * np.kron(opA.mat, spec.generator.mat)
    return Operator(opA.dims + spec.dims, _expi(H))


def cnot_oracle():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    H = (math.pi / 4) * np.kron(X, np.eye(2) - X)
    return Operator([2, 2], _expi(H))


# operator families

@dataclass
class OperatorFamilyReport:
    n: int
    parties: int
    generated: int
    independent: int
    expected: int
    max_residual: float

    @property
    def passed(self):
        return self.independent == self.expected and self.max_residual <= RESIDUAL_TOL

    def to_dict(self):
        return {"dims": [self.n, self.parties], "generated": self.generated, "independent": self.independent,
                "expected": self.expected, "max_residual": self.max_residual, "pass": self.passed}


def _default_clock(n):
    return NLevel.default(n).clock


def count_eigenoperators(n, N):
    """
    Enumerate the product eigenoperators (x)_i U^(k_i), k != 0, of N n-level stators and count the
    linearly independent ones.

    The rank comes from the Gram matrix of the candidates, which is the Kronecker power of the
    single-party Gram matrix tr(U^(-k) U^l) / n. Every candidate is also checked against the eigenoperator
    equation with Alice operator (x)_i V^(k_i): on the full product stator while n^N <= 64, party by party
    beyond that.

    Raises:
        TooLarge: If n^N exceeds 256.
    """
    if n < 2 or N < 1:
        raise ValueError(f"Need n >= 2 and N >= 1, got n={n}, N={N}")
    D = n ** N
    if D > MAX_FAMILY_DIM:
        raise TooLarge(f"n^N = {D} exceeds {MAX_FAMILY_DIM}")
    U = _default_clock(n)
    V = shift_operator(n)
    # the default clock is diagonal, so its powers are compared through their diagonals
    diagonals = np.array([np.diag(U.mat) ** k for k in range(n)])
    gram_one = diagonals.conj() @ diagonals.T / n
    gram = functools.reduce(np.kron, [gram_one] * N)[1:, 1:]
    independent = int(np.linalg.matrix_rank(gram, tol=RANK_TOL, hermitian=True))

    keys = power_tuples([n] * N)
    if N > 1 and D <= MAX_FULL_CHECK_DIM:
        S = product_stator([make_n_level_stator(n, U)] * N)
        residuals = [eigenoperator_residual(S, linalg.tensor_all([V.power(k) for k in key]),
                                            linalg.tensor_all([U.power(k) for k in key])) for key in keys]
    elif n <= MAX_FULL_CHECK_DIM:
        single = make_n_level_stator(n, U)
        residuals = [eigenoperator_residual(single, V.power(k), U.power(k)) for k in range(1, n)]
    else:
        # for a single large clock V S = U S reduces to U^n = I
        residuals = [float(np.linalg.norm(U.power(n).mat - np.eye(n)))]
    report = OperatorFamilyReport(n, N, len(keys), independent, D - 1, max(residuals))
    logger.info("Operator family n=%d N=%d: %d independent of %d", n, N, independent, len(keys))
    return report


class DLevelComparison(NamedTuple):
    product: OperatorFamilyReport
    single: OperatorFamilyReport

    @property
    def equal(self):
        return self.product.independent == self.single.independent


def d_level_equivalence(n, N):
    """Compare the family of N n-level pairs with that of one n^N-level pair."""
    return DLevelComparison(count_eigenoperators(n, N), count_eigenoperators(n ** N, 1))


# statistics

@dataclass
class ChiSquareReport:
    arity: int
    counts: List[int]
    statistic: float
    dof: int
    pvalue: float

    @property
    def passed(self):
        return self.pvalue > SIGNIFICANCE

    def to_dict(self):
        return {"arity": self.arity, "counts": list(self.counts), "statistic": self.statistic, "dof": self.dof,
                "pvalue": self.pvalue, "pass": self.passed}


def chi_square_uniform(counts):
    """
    Goodness of fit of symbol counts to the uniform distribution over len(counts) symbols.

    Raises:
        EmptyCounts: If there are no counts or no trials.
    """
    counts = [int(c) for c in counts]
    if not counts or sum(counts) == 0:
        raise EmptyCounts("chi-square needs at least one observation")
    statistic, pvalue = scipy.stats.chisquare(counts)
    return ChiSquareReport(len(counts), counts, float(statistic), len(counts) - 1, float(pvalue))


@dataclass
class ContingencyReport:
    statistic: float
    dof: int
    pvalue: float

    @property
    def passed(self):
        return self.pvalue > SIGNIFICANCE

    def to_dict(self):
        return {"statistic": self.statistic, "dof": self.dof, "pvalue": self.pvalue, "pass": self.passed}


def chi_square_compatible(*histograms):
    """Chi-square homogeneity test that two or more symbol histograms come from one distribution."""
    table = np.array(histograms, dtype=float)
    if len(histograms) < 2 or table.sum(axis=1).min() == 0:
        raise EmptyCounts("need at least two histograms, each with an observation")
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return ContingencyReport(0.0, 0, 1.0)
    result = scipy.stats.chi2_contingency(table, correction=False)
    return ContingencyReport(float(result[0]), int(result[2]), float(result[1]))


# process matrices

def reconstruct_process_matrix(name, params, force_branch=DEFAULT_BRANCH_PROFILE):
    """
    Effective unitary of a scenario on its system registers.

    Runs the scenario on every computational basis input under one forced branch profile, then on the
    uniform superposition to align the column phases.

    Raises:
        NonUnitaryProcess: If the assembled matrix is not unitary within 1e-8.
    """
    if name in ('measure', 'prepare'):
        raise ConfigError('scenario', f"{name} does not implement a unitary on the system")
    dims = scenarios.layout(name, params)[0]
    size = math.prod(dims)
    if size > MAX_PROCESS_DIM:
        raise TooLarge(f"Process matrix of dimension {size} exceeds {MAX_PROCESS_DIM}")

    def output(state):
        return scenarios.run_scenario(name, params, state, 0, force_branch).final_system_state.amps

    M = np.column_stack([output(e) for e in scenarios.basis_inputs(name, params)])
    overlaps = M.conj().T @ output(scenarios.uniform_superposition(name, params))
    M = M * (overlaps / np.abs(overlaps))
    process = Operator(dims, M)
    if not process.is_unitary(tol=PROCESS_UNITARY_TOL):
        logger.error("Reconstructed process of %s is not unitary", name)
        raise NonUnitaryProcess(f"Process matrix of {name} is not unitary")
    return process


def equal_up_to_phase(a, b, tol=PROCESS_UNITARY_TOL):
    """True iff operators a and b agree entrywise within tol after removing one global phase."""
    inner = np.vdot(a.mat, b.mat)
    if abs(inner) == 0:
        return False
    phase = inner / abs(inner)
    return bool(np.allclose(a.mat * phase, b.mat, rtol=0, atol=tol))


# trial batches

class TrialBatch(NamedTuple):
    messages: pd.DataFrame
    trials: pd.DataFrame


def trial_seed(seed, trial):
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def message_rows(transcript, trial):
    """One table row per classical message; `remote` is the non-Alice end of the channel."""
    rows = []
    for event in transcript:
        if isinstance(event, ClassicalMessage):
            to_alice = event.receiver == ALICE
            rows.append({"trial": trial, "sender": event.sender.index, "receiver": event.receiver.index,
                         "remote": (event.sender if to_alice else event.receiver).index,
                         "direction": "to_alice" if to_alice else "from_alice",
                         "symbol": event.symbol, "arity": event.arity})
    return rows


def run_trials(name, params, trials, seed, state=None):
    """
    Run `trials` independent seeded runs of a scenario.

    Trial t draws from SeedSequence(seed, spawn_key=(t,)), so any subset of trials can be rerun alone and
    the tables do not depend on execution order.

    Returns:
        TrialBatch: `messages` has one row per classical message (trial, sender, receiver, remote, direction,
        symbol, arity); `trials` has one row per run (trial, fidelity, and outcome/coupling_sign for
        measurements).
    """
    messages = []
    runs = []
    for t in range(trials):
        outcome = scenarios.run_scenario(name, params, state, trial_seed(seed, t))
        messages.extend(message_rows(outcome.transcript, t))
        row = {"trial": t, "fidelity": outcome.fidelity}
        if isinstance(outcome, RemoteMeasurementOutcome):
            row.update(outcome=outcome.outcome, coupling_sign=outcome.coupling_sign)
        runs.append(row)
    logger.info("Ran %d trials of %s (seed %d): %d messages", trials, name, seed, len(messages))
    message_frame = pd.DataFrame(messages, columns=MESSAGE_COLUMNS).sort_values(["trial"], kind="stable")
    return TrialBatch(message_frame.reset_index(drop=True),
                      pd.DataFrame(runs).sort_values("trial").reset_index(drop=True))


def symbol_counts(messages, direction, remote=None, arity=None):
    """
    Histogram over 0..arity-1 of the symbols sent in one direction, optionally on one remote party's channel.

    Raises:
        EmptyCounts: If no message matches.
        DimMismatch: If the matching messages mix arities and no arity is given.
    """
    rows = messages[messages["direction"] == direction]
    if remote is not None:
        rows = rows[rows["remote"] == remote]
    if arity is not None:
        rows = rows[rows["arity"] == arity]
    if rows.empty:
        raise EmptyCounts(f"No messages in direction {direction}")
    arities = rows["arity"].unique()
    if len(arities) > 1:
        raise DimMismatch(f"Messages {direction} mix arities {sorted(arities)}")
    return rows["symbol"].value_counts().reindex(range(int(arities[0])), fill_value=0).astype(int).tolist()


def channel_key(direction, remote, arity):
    return f"{direction}/party{remote}/arity{arity}"


def message_uniformity(messages):
    """
    Chi-square uniformity report per channel: one histogram for each (direction, remote party, arity),
    so symbols of different arities are never pooled.
    """
    reports = {}
    for (direction, remote, arity), rows in messages.groupby(["direction", "remote", "arity"], sort=True):
        counts = rows["symbol"].value_counts().reindex(range(int(arity)), fill_value=0).astype(int).tolist()
        reports[channel_key(direction, int(remote), int(arity))] = chi_square_uniform(counts)
    return reports


def value_counts(series, labels):
    return series.value_counts().reindex(list(labels), fill_value=0).astype(int).tolist()


# transcripts

def check_causality(transcript):
    """
    True iff every correction gate comes after a classical message addressed to the correcting party.
    """
    received = set()
    for event in transcript:
        if isinstance(event, ClassicalMessage):
            received.add(event.receiver)
        elif isinstance(event, LocalGate) and event.correction and event.party not in received:
            logger.error("%s applied correction %s before receiving any message", event.party, event.name)
            return False
    return True

'''
This module:
    - Parses the command line into a RunConfig, validates it per scenario and runs it.
    - Protocol scenarios run once and report fidelity against the direct oracle; count-ops reports the
    eigenoperator family; stats runs a seeded batch and chi-square tests every message channel.
    - Writes the JSON report (sorted keys, so the same config and seed give the same bytes) to --out or
    stdout, and a short summary derived from that report to stderr.
    - Exit codes: 0 when every check passes, 1 when a check fails, 2 for a bad configuration.
'''

import argparse
import json
import logging
import math
import os
import pathlib
import sys
from dataclasses import dataclass, field
from typing import List, Optional

from . import scenarios, verify
from .errors import ConfigError, ImpossibleForcedOutcome, StatorLabError
from .linalg import StateVector
from .protocols import MeasurementMode
from .protocols.measurement import RemoteMeasurementOutcome

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = 'STATOR_LAB_LOG_LEVEL'
EXTRA_COMMANDS = ('count-ops', 'stats')
DEFAULT_STATS_TARGET = 'rotate2'


@dataclass
class RunConfig:
    """
    One command-line run.

    Attributes:
        scenario (str): A protocol scenario, 'count-ops' or 'stats'.
        target (str, optional): Scenario whose messages 'stats' tallies.
        n (int): Levels per remote system.
        parties (int): Number of remote parties.
        angles (list[float]): Rotation angles.
        axis (str | tuple[float]): Named axis or unit 3-vector.
        spectrum (list[int], optional): Integer spectrum of L_Z.
        trials (int): Trials for 'stats'.
        seed (int): Root seed.
        state (str, optional): Input state, inline JSON or a path to a JSON file.
        out (str, optional): Report path; stdout when omitted.
        force_branch (list[int], optional): Forced measurement outcomes.
    """
    scenario: str
    target: Optional[str] = None
    n: int = 2
    parties: int = 1
    angles: List[float] = field(default_factory=list)
    axis: object = 'z'
    spectrum: Optional[List[int]] = None
    trials: int = 10000
    seed: int = 0
    state: Optional[str] = None
    out: Optional[str] = None
    force_branch: Optional[List[int]] = None

    @property
    def protocol(self):
        """Scenario that actually runs protocols (the target for 'stats')."""
        if self.scenario == 'stats':
            return self.target or DEFAULT_STATS_TARGET
        return self.scenario

    def params(self):
        mode = MeasurementMode.INSTANTANEOUS if self.scenario == 'stats' else MeasurementMode.WAIT_FOR_CBIT
        return scenarios.ScenarioParams(self.n, self.parties, tuple(self.angles), self.axis,
                                        tuple(self.spectrum) if self.spectrum is not None else None, mode)

    def validate(self):
        """
        Raises:
            ConfigError: Naming the first offending option.
        """
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError('seed', "must be an unsigned 64-bit integer")
        if self.scenario == 'count-ops':
            if self.n < 2:
                raise ConfigError('n', "must be at least 2")
            if self.parties < 1:
                raise ConfigError('parties', "must be at least 1")
            if self.n ** self.parties > verify.MAX_FAMILY_DIM:
                raise ConfigError('parties', f"n^parties must not exceed {verify.MAX_FAMILY_DIM}")
            return
        if self.scenario == 'stats':
            if self.trials < 1:
                raise ConfigError('trials', "must be positive")
            if self.protocol in EXTRA_COMMANDS:
                raise ConfigError('scenario', f"stats cannot tally {self.protocol}")
            if self.force_branch is not None:
                raise ConfigError('force-branch', "stats samples every branch; run a single scenario to force one")
        scenarios.validate(self.protocol, self.params())
        if self.force_branch is not None:
            levels = max(self.n, 2)
            if any(not 0 <= b < levels for b in self.force_branch):
                raise ConfigError('force-branch', f"outcomes must lie in [0, {levels})")
        self.input_state()

    def input_state(self):
        """The --state input over the scenario's system layout, or None for |0...0>."""
        if self.state is None:
            return None
        dims = scenarios.layout(self.protocol, self.params())[0]
        return parse_state(self.state, dims)


def parse_axis(text):
    if text in ('x', 'y', 'z'):
        return text
    try:
        vector = tuple(float(c) for c in text.replace(',', ' ').split())
    except ValueError:
        raise ConfigError('axis', f"expected x, y, z or three numbers, got {text!r}") from None
    if len(vector) != 3:
        raise ConfigError('axis', f"expected three components, got {len(vector)}")
    if not math.isclose(math.hypot(*vector), 1.0, abs_tol=1e-9):
        raise ConfigError('axis', f"{vector} is not a unit vector")
    return vector


def parse_state(text, dims):
    """
    Read a state from inline JSON or a JSON file.

    Accepted forms: {"dims": [...], "amps": [[re, im], ...]}, a list of [re, im] pairs, or a list of reals.
    The state is normalized; its dims must match the scenario.
    """
    path = pathlib.Path(text)
    if not text.lstrip().startswith(('{', '[')) and path.is_file():
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError('state', f"not valid JSON: {exc}") from None
    try:
        if isinstance(data, dict):
            state = StateVector.from_dict(data)
        else:
            amps = [complex(*a) if isinstance(a, list) else complex(a) for a in data]
            state = StateVector(dims, amps)
    except (TypeError, ValueError) as exc:
        raise ConfigError('state', str(exc)) from None
    if state.dims != tuple(dims):
        raise ConfigError('state', f"state over {list(state.dims)} does not match the scenario dims {list(dims)}")
    if state.norm() == 0:
        raise ConfigError('state', "state is zero")
    return state.normalized()


def build_parser():
    parser = argparse.ArgumentParser(prog='stator_lab',
                                     description="Simulate stator-based remote operations under LOCC.")
    choices = sorted(scenarios.SCENARIOS) + list(EXTRA_COMMANDS)
    parser.add_argument('command', nargs='?', choices=choices, help="Scenario to run (same as --scenario)")
    parser.add_argument('--scenario', help="Scenario to run; with stats, the scenario whose messages are tallied")
    parser.add_argument('--n', type=int, default=2, help="Levels of each remote system")
    parser.add_argument('--parties', type=int, default=1, help="Number of remote parties")
    parser.add_argument('--alpha', '--angles', dest='angles', type=float, nargs='+', default=[],
                        help="Rotation angles (coupling angles in power-tuple order for multi)")
    parser.add_argument('--axis', default='z', help="x, y, z or a unit vector 'nx,ny,nz'")
    parser.add_argument('--spectrum', type=int, nargs='+', help="Integer spectrum of L_Z")
    parser.add_argument('--trials', type=int, default=10000, help="Trials for stats")
    parser.add_argument('--seed', type=int, default=0, help="Root seed")
    parser.add_argument('--state', help="Input state: inline JSON or a JSON file")
    parser.add_argument('--out', help="Report path (stdout when omitted)")
    parser.add_argument('--force-branch', dest='force_branch', type=int, nargs='+',
                        help="Measurement outcomes to force, in order")
    return parser


def config_from_args(args):
    if args.command and args.scenario and args.command != 'stats' and args.command != args.scenario:
        raise ConfigError('scenario', f"conflicts with the positional scenario {args.command!r}")
    if args.command == 'stats':
        scenario, target = 'stats', args.scenario
    elif args.command:
        scenario, target = args.command, None
    elif args.scenario:
        scenario, target = args.scenario, None
    else:
        raise ConfigError('scenario', "is required")
    if scenario not in scenarios.SCENARIOS and scenario not in EXTRA_COMMANDS:
        raise ConfigError('scenario', f"unknown scenario {scenario!r}")
    return RunConfig(scenario, target, args.n, args.parties, list(args.angles), parse_axis(args.axis),
                     args.spectrum, args.trials, args.seed, args.state, args.out, args.force_branch)


# runners

def _run_protocol(config):
    name = config.scenario
    try:
        outcome = scenarios.run_scenario(name, config.params(), config.input_state(), config.seed,
                                         config.force_branch)
    except ImpossibleForcedOutcome as exc:
        raise ConfigError('force-branch', str(exc)) from exc
    causal = verify.check_causality(outcome.transcript)
    passed = outcome.fidelity >= 1 - verify.FIDELITY_TOL and causal
    report = outcome.to_report(name, config.seed, config.angles, passed)
    report["causal"] = causal
    if isinstance(outcome, RemoteMeasurementOutcome):
        report["measurement"] = {"outcome": outcome.outcome, "prob": outcome.outcome_prob,
                                 "coupling_sign": outcome.coupling_sign, "mode": outcome.mode.value}
    return report


def _run_count_ops(config):
    comparison = verify.d_level_equivalence(config.n, config.parties)
    family = comparison.product
    passed = family.passed and comparison.single.passed and comparison.equal
    return {"scenario": "count-ops", "seed": config.seed, "dims": [config.n, config.parties],
            "operator_family": family.to_dict(), "d_level": comparison.single.to_dict(),
            "d_level_equal": comparison.equal, "pass": passed}


def _run_stats(config):
    target = config.protocol
    params = config.params()
    batch = verify.run_trials(target, params, config.trials, config.seed, config.input_state())
    chi_square = {channel: r.to_dict() for channel, r in verify.message_uniformity(batch.messages).items()}
    min_fidelity = float(batch.trials["fidelity"].min())
    passed = all(r["pass"] for r in chi_square.values()) and min_fidelity >= 1 - verify.FIDELITY_TOL
    report = {"scenario": "stats", "target": target, "seed": config.seed, "trials": config.trials,
              "dims": list(scenarios.layout(target, params)[0]), "angles": [float(a) for a in config.angles],
              "chi_square": chi_square, "min_fidelity": min_fidelity}
    if "coupling_sign" in batch.trials:
        signs = verify.chi_square_uniform(verify.value_counts(batch.trials["coupling_sign"], (1, -1)))
        outcomes = verify.value_counts(batch.trials["outcome"], (1, -1))
        report["coupling_sign"] = signs.to_dict()
        report["outcomes"] = {"+1": outcomes[0], "-1": outcomes[1]}
        passed = passed and signs.passed
    report["pass"] = passed
    return report


RUNNERS = {
    'count-ops': _run_count_ops,
    'stats': _run_stats,
}


def summarize(report):
    """Human-readable lines derived from a report."""
    lines = [f"scenario: {report['scenario']}  seed: {report['seed']}"]
    if "fidelity" in report:
        lines.append(f"fidelity: {report['fidelity']:.12f}")
    if "ledger" in report:
        ledger = report["ledger"]
        lines.append(f"pairs: {len(ledger['pairs'])}  to Alice: {ledger['to_alice']}  "
                     f"from Alice: {ledger['from_alice']}")
    if "measurement" in report:
        lines.append(f"outcome: {report['measurement']['outcome']:+d}  p={report['measurement']['prob']:.6f}")
    if "operator_family" in report:
        family = report["operator_family"]
        lines.append(f"independent eigenoperators: {family['independent']} (expected {family['expected']})")
    for channel, chi in report.get("chi_square", {}).items():
        lines.append(f"{channel}: counts {chi['counts']}  p={chi['pvalue']:.4f}")
    if "coupling_sign" in report:
        lines.append(f"coupling sign: counts {report['coupling_sign']['counts']}  "
                     f"p={report['coupling_sign']['pvalue']:.4f}")
    lines.append("PASS" if report["pass"] else "FAIL")
    return "\n".join(lines)


def write_report(report, out):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        pathlib.Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _configure_logging():
    level = os.environ.get(LOG_LEVEL_ENV, 'WARNING').upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format='%(levelname)s %(name)s: %(message)s')


def run(config):
    """
    Execute a validated RunConfig.

    Returns:
        int: 0 if every check passed, 1 if one failed, 2 if the configuration was rejected.
    """
    try:
        config.validate()
        report = RUNNERS.get(config.scenario, _run_protocol)(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StatorLabError as exc:
        logger.error("%s failed: %s", config.scenario, exc)
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    write_report(report, config.out)
    print(summarize(report), file=sys.stderr)
    if not report["pass"]:
        logger.error("%s: checks failed", config.scenario)
    return 0 if report["pass"] else 1


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)

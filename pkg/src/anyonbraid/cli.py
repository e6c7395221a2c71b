"""Command-line front end.

Commands::

    anyonbraid verify         consistency-check a built-in or file model
    anyonbraid teleport-stats Monte Carlo forced-measurement statistics
    anyonbraid braid-check    measurement braid vs direct-braid oracle
    anyonbraid compile        emit the measurement schedule of a braid word
    anyonbraid run            execute a schedule file

Output is machine-first (JSON by default, CSV via ``--format csv``, aligned
tables behind ``--human``) and byte-reproducible for fixed ``(seed,
config)``: every stochastic command requires an explicit ``--seed`` and
trial ``t`` draws from the substream ``default_rng([seed, t])``.

Exit codes: 0 pass, 1 check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import compiler as cp
from . import fusion_space as fs
from . import measurement as ms
from . import teleport as tp
from .errors import AnyonError, MaxAttemptsExceeded
from .model import CONSISTENCY_TOL, load_builtin
from .model_io import load_model_file

#: Default fidelity tolerance for oracle comparisons.
FIDELITY_TOL = 1e-9


class _CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _load_model(args, file_tolerance=None):
    name = args.model
    if os.path.exists(name) or os.sep in name or name.endswith(".model"):
        if file_tolerance is None:
            file_tolerance = getattr(args, "tolerance", CONSISTENCY_TOL)
        try:
            return load_model_file(name, file_tolerance)
        except AnyonError as exc:
            raise _CliError(f"model file error: {exc}", 2) from exc
    try:
        return load_builtin(name, k=args.k)
    except AnyonError as exc:
        raise _CliError(str(exc), 2) from exc


def _parse_word(text: str) -> "cp.BraidWord":
    try:
        return cp.BraidWord.parse(text)
    except AnyonError as exc:
        raise _CliError(str(exc), 2) from exc


def _default_charge(model, args):
    label = args.charge or model.meta.get("computational_charge")
    if label is None:
        raise _CliError("this model has no default charge; pass --charge", 2)
    try:
        return model.charge(label)
    except AnyonError as exc:
        raise _CliError(str(exc), 2) from exc


def _phase(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag),
            "arg": float(np.angle(z))}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key, value in obj.items():
            yield from _flatten(value, f"{prefix}{key}." if prefix else f"{key}.")
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            yield from _flatten(value, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _emit(payload: dict, args) -> None:
    if getattr(args, "human", False):
        width = max((len(k) for k, _ in _flatten(payload)), default=0)
        for key, value in _flatten(payload):
            print(f"{key:<{width}}  {value}")
    elif getattr(args, "format", "json") == "csv":
        print("key,value")
        for key, value in _flatten(payload):
            print(f"{key},{value}")
    else:
        print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _cmd_verify(args) -> int:
    # load files with the consistency gate disabled so a parseable but
    # inconsistent model is reported with its residuals (exit 1), while
    # parse errors stay exit 2
    model = _load_model(args, file_tolerance=float("inf"))
    report = model.verify_consistency(args.tolerance)
    payload = {
        "model": model.name,
        "params": model.params,
        "charges": list(model.labels),
        "report": report.as_dict(),
        "vacuum_probability_residual": model.vacuum_probability_residual(),
    }
    _emit(payload, args)
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# teleport-stats
# ---------------------------------------------------------------------------


def _teleport_configuration(model, charge):
    """4-leaf teleport setup: resource pair on (0, 1), encoded anyons right."""
    pair = fs.entangled_pair_state(model, charge)
    return fs.attach_pair(pair, 2, charge)


def _cmd_teleport_stats(args) -> int:
    if args.trials < 1:
        raise _CliError("--trials must be >= 1", 2)
    if args.max_attempts < 1:
        raise _CliError("--max-attempts must be >= 1", 2)
    model = _load_model(args)
    charge = _default_charge(model, args)
    initial = _teleport_configuration(model, charge)
    target, recovery = (1, 2), (0, 1)
    da2 = tp.expected_attempt_bound(model, charge)
    per_channel: dict[str, dict] = {}
    attempts = []
    exceeded = 0
    trace = ms.MeasurementTrace() if args.trace else None
    for t in range(args.trials):
        rng = _substream(args.seed, t)
        try:
            _, record = tp.forced_measurement(initial, target, recovery, rng,
                                              max_attempts=args.max_attempts,
                                              routing=args.routing, trace=trace)
        except MaxAttemptsExceeded:
            exceeded += 1
            continue
        attempts.append(record.attempts)
        for e, f in zip(record.recovery_outcomes(), record.target_outcomes()):
            stats = per_channel.setdefault(e.label, {"attempts": 0, "successes": 0})
            stats["attempts"] += 1
            stats["successes"] += int(f.index == 0)
    n = len(attempts)
    mean = float(np.mean(attempts)) if n else float("nan")
    std = float(np.std(attempts, ddof=1)) if n > 1 else float("nan")
    channels = {}
    for label, stats in sorted(per_channel.items()):
        expected = float(model.qd[model.charge(label).index] / da2)
        count, hits = stats["attempts"], stats["successes"]
        p_hat = hits / count
        sigma = math.sqrt(expected * (1 - expected) / count) if count else float("nan")
        channels[label] = {
            "attempts": count,
            "successes": hits,
            "empirical": p_hat,
            "expected": expected,
            "z": (p_hat - expected) / sigma if sigma else float("nan"),
        }
    tails = {}
    for horizon in (5, 10, 20):
        bound = tp.failure_tail_probability(model, charge, horizon)
        frac = sum(a > horizon for a in attempts) / n if n else float("nan")
        sigma = math.sqrt(bound * (1 - bound) / n) if n else float("nan")
        tails[str(horizon)] = {"empirical": frac, "bound": bound,
                               "bound_plus_3sigma": bound + 3 * sigma}
    payload = {
        "config": {
            "model": model.name, "params": model.params, "charge": charge.label,
            "seed": args.seed, "trials": args.trials,
            "max_attempts": args.max_attempts, "routing": args.routing,
        },
        "per_channel_success": channels,
        "attempts": {
            "trials": n,
            "mean": mean,
            "std": std,
            "expected_mean": tp.expected_mean_attempts(model, charge),
            "bound": da2,
            "mean_z": (mean - tp.expected_mean_attempts(model, charge))
                      / (std / math.sqrt(n)) if n > 1 else float("nan"),
        },
        "tail_probabilities": tails,
        "max_attempts_exceeded": exceeded,
    }
    if trace is not None:
        payload["trace"] = trace.entries
    _emit(payload, args)
    return 0


# ---------------------------------------------------------------------------
# braid-check
# ---------------------------------------------------------------------------


def _braid_payload(records) -> list:
    out = []
    for rec in records:
        out.append({
            "direction": rec.direction,
            "quad": list(rec.quad),
            "attempts": list(rec.attempts),
            "extracted_phase": _phase(rec.extracted_phase),
            "step_phases": [_phase(p) for p in rec.step_phases],
            "oracle_fidelity": rec.oracle_fidelity,
            "outcomes": [[c.label for c in step.outcomes] for step in rec.steps],
        })
    return out


def _cmd_braid_check(args) -> int:
    model = _load_model(args)
    charge = _default_charge(model, args)
    word = _parse_word(args.word)
    n_comp = args.n_computational or max(2, word.max_strand() + 1)
    try:
        layout, initial = cp.build_array(model, charge, n_comp)
        schedule = cp.compile_word(word, layout)
    except (cp.ScheduleError, AnyonError) as exc:
        raise _CliError(str(exc), 2) from exc
    if args.random_state:
        initial = cp.random_encoded_state(layout, _substream(args.seed, 2 ** 31))
    final, records = cp.execute(schedule, initial, _substream(args.seed, 0),
                                routing=args.routing,
                                max_attempts=args.max_attempts)
    payload = {
        "config": {
            "model": model.name, "params": model.params, "charge": charge.label,
            "word": str(word), "n_computational": n_comp, "seed": args.seed,
            "routing": args.routing, "random_state": bool(args.random_state),
        },
        "braids": _braid_payload(records),
        "resource_defect": cp.check_resources(layout, final),
    }
    if args.compare_word:
        other = _parse_word(args.compare_word)
        if other.max_strand() + 1 > n_comp:
            raise _CliError("compare word needs more strands than the layout has", 2)
        final_b, records_b = cp.execute(cp.compile_word(other, layout), initial,
                                        _substream(args.seed, 1),
                                        routing=args.routing,
                                        max_attempts=args.max_attempts)
        fid = fs.fidelity(final, final_b)
        payload["compare"] = {
            "word": str(other),
            "fidelity": fid,
            "phase": _phase(tp.relative_phase(final, final_b)) if fid > 0.5 else None,
            "braids": _braid_payload(records_b),
        }
        passed = fid >= 1.0 - args.tolerance
    else:
        oracle = cp.direct_braid_reference(word, layout, initial, routing=args.routing)
        fid = fs.fidelity(final, oracle)
        payload["oracle_fidelity"] = fid
        payload["phase_vs_oracle"] = _phase(tp.relative_phase(final, oracle)) if fid > 0.5 else None
        passed = (fid >= 1.0 - args.tolerance
                  and payload["resource_defect"] < cp.RESOURCE_TOL)
    payload["passed"] = bool(passed)
    _emit(payload, args)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# compile / run
# ---------------------------------------------------------------------------


def _cmd_compile(args) -> int:
    model = _load_model(args)
    charge = _default_charge(model, args)
    word = _parse_word(args.word)
    n_comp = args.n_computational or max(2, word.max_strand() + 1)
    try:
        layout, _ = cp.build_array(model, charge, n_comp,
                                   self_dual_economy=args.economy)
        schedule = cp.compile_word(word, layout)
    except AnyonError as exc:
        raise _CliError(str(exc), 2) from exc
    text = json.dumps(schedule.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_run(args) -> int:
    try:
        with open(args.schedule, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _CliError(f"cannot read schedule: {exc}", 2) from exc
    try:
        schedule = cp.schedule_from_dict(data)
    except AnyonError as exc:
        raise _CliError(f"bad schedule: {exc}", 2) from exc
    layout = schedule.layout
    _, initial = cp.build_array(layout.model, layout.charge,
                                len(layout.computational),
                                layout.self_dual_economy)
    final, records = cp.execute(schedule, initial, _substream(args.seed, 0),
                                routing=args.routing,
                                max_attempts=args.max_attempts)
    oracle = cp.direct_braid_reference(schedule.word, layout, initial,
                                       routing=args.routing)
    fid = fs.fidelity(final, oracle)
    payload = {
        "config": {"schedule": args.schedule, "seed": args.seed,
                   "routing": args.routing, "word": str(schedule.word)},
        "records": _braid_payload(r for r in records
                                  if isinstance(r, tp.BraidRecord)),
        "readouts": [{"pair": list(r.pair), "outcome": r.charge.label,
                      "probability": r.probability}
                     for r in records if isinstance(r, ms.MeasurementOutcome)],
        "resource_defect": cp.check_resources(layout, final),
        "oracle_fidelity": fid,
        "final_state": json.loads(fs.state_to_json(final)),
    }
    passed = fid >= 1.0 - args.tolerance
    payload["passed"] = bool(passed)
    _emit(payload, args)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_model_args(p, with_charge=True):
    p.add_argument("--model", required=True,
                   help="built-in name (fibonacci, ising, su2_k) or model file path")
    p.add_argument("--k", type=int, default=None, help="level for su2_k")
    if with_charge:
        p.add_argument("--charge", default=None,
                       help="computational charge label (default: model's standard choice)")


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--human", action="store_true", help="aligned key/value table")


def _add_stochastic_args(p):
    p.add_argument("--seed", type=int, required=True,
                   help="64-bit master seed (required: no silent nondeterminism)")
    p.add_argument("--max-attempts", type=int, default=tp.MAX_ATTEMPTS_DEFAULT)
    p.add_argument("--routing", choices=("over", "under"), default="over")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anyonbraid",
        description="Braiding stationary anyons with adaptive charge measurements")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="consistency-check an anyon model")
    _add_model_args(p, with_charge=False)
    p.add_argument("--tolerance", type=float, default=CONSISTENCY_TOL)
    _add_output_args(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("teleport-stats", help="forced-measurement Monte Carlo statistics")
    _add_model_args(p)
    _add_stochastic_args(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--trace", action="store_true",
                   help="include the per-measurement trajectory log")
    _add_output_args(p)
    p.set_defaults(func=_cmd_teleport_stats)

    p = sub.add_parser("braid-check", help="measurement braid vs direct-braid oracle")
    _add_model_args(p)
    _add_stochastic_args(p)
    p.add_argument("--word", required=True, help="braid word, e.g. \"s1 s2' s1\"")
    p.add_argument("--compare-word", default=None,
                   help="second word; check phase-equivalence of the two results")
    p.add_argument("--n-computational", type=int, default=None)
    p.add_argument("--random-state", action="store_true",
                   help="start from a seeded random encoded state")
    p.add_argument("--tolerance", type=float, default=FIDELITY_TOL)
    _add_output_args(p)
    p.set_defaults(func=_cmd_braid_check)

    p = sub.add_parser("compile", help="emit the measurement schedule of a braid word")
    _add_model_args(p)
    p.add_argument("--word", required=True)
    p.add_argument("--n-computational", type=int, default=None)
    p.add_argument("--economy", action="store_true",
                   help="flag the layout as the self-dual single-row economy variant")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("run", help="execute a schedule file")
    p.add_argument("--schedule", required=True)
    _add_stochastic_args(p)
    p.add_argument("--tolerance", type=float, default=FIDELITY_TOL)
    _add_output_args(p)
    p.set_defaults(func=_cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except AnyonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

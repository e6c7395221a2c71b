"""Projective topological charge measurement of anyon pairs.

A measurement of the collective charge of leaves ``(i, j)`` projects the
state onto a definite fusion channel and renormalizes (Born rule).  For
adjacent leaves this is one F-move into the pair-resolved basis, a channel
mask, and the inverse F-move.  For non-adjacent pairs the charge line of
leaf ``j`` is first transported next to ``i`` by elementary braids, passing
either over (``routing="over"``, counterclockwise crossings) or under
(``"under"``) the intervening lines, and transported back afterwards with
the inverse braids.  The routing is an explicit parameter because the two
conventions are physically distinct measurement processes.

All functions are pure: they return new states and leave inputs untouched.
Stochastic sampling takes an explicit ``numpy.random.Generator``; concurrent
trials must not share one generator stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPosition, ZeroProbabilityOutcome
from .fusion_space import StateVector, _pair_channels, _resolve_matrix, transport_matrix
from .model import Charge

#: Outcomes below this Born probability are treated as impossible; this
#: separates exact zeros from round-off.
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MeasurementOutcome:
    """One sampled pair measurement: where, what was found, how likely."""

    pair: tuple[int, int]
    charge: Charge
    probability: float
    routing: str


@dataclass
class MeasurementTrace:
    """Line-oriented record of a measurement trajectory.

    Each entry is ``(pair, routing, outcome label, probability, cumulative
    log-probability)``; the stats commands of the CLI consume these lines.
    """

    entries: list = field(default_factory=list)
    log_probability: float = 0.0

    def record(self, outcome: MeasurementOutcome) -> None:
        self.log_probability += math.log(outcome.probability)
        self.entries.append({
            "pair": list(outcome.pair),
            "routing": outcome.routing,
            "outcome": outcome.charge.label,
            "probability": outcome.probability,
            "cumulative_log_probability": self.log_probability,
        })

    def to_jsonl(self) -> str:
        import json

        return "\n".join(json.dumps(entry) for entry in self.entries)


def _measurement_op(state: StateVector, i: int, j: int, routing: str):
    """(channels, W) with W unitary and per-row pair charges ``channels``.

    ``W = U T`` maps standard amplitudes into the basis where the (possibly
    transported) pair has an explicit collective charge; the projector onto
    channel ``c`` is ``W^dag diag(channels == c) W``.
    """
    n = state.num_leaves
    if not (0 <= i < j < n):
        raise InvalidPosition(f"invalid pair ({i}, {j}) for {n} leaves")
    if state.resolved_pair is not None:
        raise InvalidPosition("measurement requires the standard basis")
    model = state.model
    key = ("measure", state.leaves, state.total, i, j, routing)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    if j == i + 1:
        _, U = _resolve_matrix(model, state.leaves, state.total, i)
        _, channels = _pair_channels(model, state.leaves, state.total, i)
        W = U
    else:
        moved, T = transport_matrix(model, state.leaves, state.total, i, j, routing)
        _, U = _resolve_matrix(model, moved, state.total, i)
        _, channels = _pair_channels(model, moved, state.total, i)
        W = U @ T
    model._cache[key] = (channels, W)
    return channels, W


def pair_charge_distribution(state: StateVector, i: int, j: int,
                             routing: str = "over") -> dict[Charge, float]:
    """Born probabilities for the collective charge of leaves ``(i, j)``.

    The probabilities sum to 1; channels absent from the state's support
    appear with probability 0.0 only if they are structurally admissible.
    """
    channels, W = _measurement_op(state, i, j, routing)
    weights = np.abs(W @ state.amps) ** 2
    dist: dict[Charge, float] = {}
    for c in sorted(set(int(x) for x in channels)):
        dist[state.model.charges[c]] = float(weights[channels == c].sum())
    return dist


def project_pair(state: StateVector, i: int, j: int, c,
                 routing: str = "over") -> tuple[StateVector, float]:
    """Project leaves ``(i, j)`` onto collective charge ``c`` and renormalize.

    Returns the post-measurement state and the Born probability of the
    outcome.  Raises :class:`ZeroProbabilityOutcome` when the outcome is
    impossible (probability below the floor).
    """
    model = state.model
    ci = model.charge(c).index
    channels, W = _measurement_op(state, i, j, routing)
    resolved = W @ state.amps
    mask = channels == ci
    prob = float(np.linalg.norm(resolved[mask]) ** 2)
    if prob < PROBABILITY_FLOOR:
        raise ZeroProbabilityOutcome(
            f"outcome {model.labels[ci]} on pair ({i}, {j}) has probability {prob:.3e}")
    resolved[~mask] = 0.0
    post = W.conj().T @ resolved / math.sqrt(prob)
    return state._replace_amps(post), prob


def sample_measurement(state: StateVector, i: int, j: int, rng,
                       routing: str = "over",
                       trace: MeasurementTrace | None = None,
                       ) -> tuple[MeasurementOutcome, StateVector]:
    """Draw one measurement outcome for pair ``(i, j)`` and collapse.

    Sampling is inverse-CDF over the channels in charge-index order, so a
    fixed generator stream reproduces the trajectory exactly.
    """
    dist = pair_charge_distribution(state, i, j, routing)
    u = rng.random()
    acc = 0.0
    chosen = None
    for charge, p in dist.items():  # charges iterate in index order
        acc += p
        if u < acc and p >= PROBABILITY_FLOOR:
            chosen = charge
            break
    if chosen is None:  # u fell into round-off slack; take the likeliest
        chosen = max(dist, key=dist.get)
    post, prob = project_pair(state, i, j, chosen, routing)
    outcome = MeasurementOutcome((i, j), chosen, prob, routing)
    if trace is not None:
        trace.record(outcome)
    return outcome, post

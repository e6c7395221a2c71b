"""Braid words on a quasi-1D anyon array, compiled to measurement schedules.

The array holds stationary computational anyons of a self-dual charge ``a``
with one entangled resource pair ``(a, a)`` in the vacuum channel between
each adjacent pair of computational anyons.  A braid generator on
computational strands ``i, i+1`` maps to one
:func:`anyonbraid.teleport.measurement_braid` on the contiguous quad formed
by those two anyons and the resource pair between them, i.e. three forced
measurements; no anyon ever moves.

For an odd number of computational anyons the last one is created together
with a boundary partner anyon parked at the right end of the array, so the
register as a whole still starts from vacuum pair creation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (ProtocolError, ScheduleError, UnsupportedCharge,
                     ZeroProbabilityOutcome)
from .fusion_space import StateVector, attach_pair, empty_state, random_state
from .measurement import (MeasurementOutcome, MeasurementTrace,
                          pair_charge_distribution, project_pair,
                          sample_measurement)
from .model import AnyonModel
from .teleport import (MAX_ATTEMPTS_DEFAULT, BraidRecord, _quad_steps,
                       direct_quad_braid, measurement_braid)

#: Resource pairs must return to the vacuum channel at least this sharply.
RESOURCE_TOL = 1e-10


@dataclass(frozen=True)
class ArrayLayout:
    """Leaf positions of a built array.

    ``computational[i]`` is the leaf index of the i-th computational anyon;
    ``resources[i]`` is the leaf pair of the entangled resource between
    computational anyons ``i`` and ``i+1``.  ``boundary_partner`` is the
    leaf holding the creation partner of the last computational anyon when
    their number is odd.
    """

    model: AnyonModel
    charge: str
    computational: tuple[int, ...]
    resources: tuple[tuple[int, int], ...]
    boundary_partner: int | None
    self_dual_economy: bool

    @property
    def n_leaves(self) -> int:
        return len(self.computational) * 3 - 2 + (self.boundary_partner is not None)

    def quad(self, generator: int) -> tuple[int, int, int, int]:
        """Contiguous quad used by braid generator ``s<generator>`` (1-based)."""
        n = len(self.computational)
        if not 1 <= generator < n:
            raise ScheduleError(f"generator index {generator} out of range 1..{n - 1}")
        p = self.computational[generator - 1]
        ra, rb = self.resources[generator - 1]
        q = self.computational[generator]
        if (ra, rb, q) != (p + 1, p + 2, p + 3):
            raise ScheduleError(f"quad at generator {generator} is not contiguous")
        return (p, ra, rb, q)

    def describe(self) -> dict:
        return {
            "model": self.model.name,
            "params": self.model.params,
            "charge": self.charge,
            "n_computational": len(self.computational),
            "computational": list(self.computational),
            "resources": [list(p) for p in self.resources],
            "boundary_partner": self.boundary_partner,
            "self_dual_economy": self.self_dual_economy,
        }


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid generators, e.g. ``s1 s2' s1`` (apostrophe = inverse)."""

    generators: tuple[int, ...]  # signed: +i for s_i, -i for its inverse

    @classmethod
    def parse(cls, text: str) -> "BraidWord":
        gens = []
        for token in text.split():
            m = re.fullmatch(r"s(\d+)('?)", token)
            if not m:
                raise ScheduleError(
                    f"cannot parse braid token {token!r}; expected s<i> or s<i>'")
            idx = int(m.group(1))
            if idx < 1:
                raise ScheduleError(f"generator index must be >= 1 in {token!r}")
            gens.append(-idx if m.group(2) else idx)
        return cls(tuple(gens))

    def __str__(self) -> str:
        return " ".join(f"s{abs(g)}" + ("'" if g < 0 else "") for g in self.generators)

    def inverse(self) -> "BraidWord":
        return BraidWord(tuple(-g for g in reversed(self.generators)))

    def max_strand(self) -> int:
        return max((abs(g) for g in self.generators), default=1)


@dataclass(frozen=True)
class ScheduleStep:
    """One adaptive measurement instruction.

    ``kind`` is ``"forced_measurement"`` (with braid grouping metadata) or
    ``"readout"`` (``pair`` only).
    """

    kind: str
    pair: tuple[int, int]
    recovery: tuple[int, int] | None = None
    braid_index: int | None = None
    generator: int | None = None
    direction: str | None = None
    quad: tuple[int, int, int, int] | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "pair": list(self.pair)}
        if self.kind == "forced_measurement":
            d.update(recovery=list(self.recovery), braid_index=self.braid_index,
                     generator=self.generator, direction=self.direction,
                     quad=list(self.quad))
        return d


@dataclass(frozen=True)
class Schedule:
    """Ordered measurement instructions compiled from a braid word."""

    layout: ArrayLayout
    word: BraidWord
    steps: tuple[ScheduleStep, ...]

    def to_dict(self) -> dict:
        return {
            "format": "anyonbraid-schedule-v1",
            "layout": self.layout.describe(),
            "word": str(self.word),
            "steps": [s.to_dict() for s in self.steps],
        }


# ---------------------------------------------------------------------------
# Array construction.
# ---------------------------------------------------------------------------


def build_array(model: AnyonModel, a, n_computational: int,
                self_dual_economy: bool = False) -> tuple[ArrayLayout, StateVector]:
    """Create the initial array state and its layout.

    Computational anyons are created pairwise from vacuum, which requires a
    self-dual charge; with an odd count the last anyon's creation partner
    stays at the right end of the array as a spectator.  One resource pair
    in the vacuum channel is inserted between each adjacent computational
    pair, so braid quads are contiguous.
    """
    ca = model.charge(a)
    if n_computational < 2:
        raise ProtocolError("an array needs at least 2 computational anyons")
    if model.dual(ca) != ca:
        raise UnsupportedCharge(
            f"computational charge must be self-dual; dual({ca.label}) = "
            f"{model.dual(ca).label}")
    state = empty_state(model)
    for _ in range((n_computational + 1) // 2):
        state = attach_pair(state, state.num_leaves, ca)
    odd = n_computational % 2 == 1
    # Insert resource pairs right-to-left so earlier gaps keep their index.
    for gap in range(n_computational - 1, 0, -1):
        state = attach_pair(state, gap, model.dual(ca))
    computational = tuple(3 * i for i in range(n_computational))
    resources = tuple((3 * i + 1, 3 * i + 2) for i in range(n_computational - 1))
    partner = state.num_leaves - 1 if odd else None
    layout = ArrayLayout(model, ca.label, computational, resources, partner,
                         bool(self_dual_economy))
    return layout, state


def random_encoded_state(layout: ArrayLayout, rng) -> StateVector:
    """A random register state compatible with the layout: resource pairs in
    the vacuum channel, everything else Haar-like random."""
    model = layout.model
    _, initial = build_array(model, layout.charge, len(layout.computational),
                             layout.self_dual_economy)
    while True:
        state = random_state(model, initial.leaves, initial.total, rng)
        try:
            for pair in layout.resources:
                state, _ = project_pair(state, pair[0], pair[1], 0)
        except ZeroProbabilityOutcome:
            continue  # vanishing vacuum weight; redraw
        return state


def check_resources(layout: ArrayLayout, state: StateVector,
                    tol: float = RESOURCE_TOL) -> float:
    """Worst deviation of any resource pair from a sharp vacuum channel."""
    worst = 0.0
    for pair in layout.resources:
        dist = pair_charge_distribution(state, pair[0], pair[1])
        worst = max(worst, abs(1.0 - dist.get(layout.model.vacuum, 0.0)))
    return worst


# ---------------------------------------------------------------------------
# Compilation and execution.
# ---------------------------------------------------------------------------


def compile_word(word: BraidWord, layout: ArrayLayout) -> Schedule:
    """Expand each braid generator into its three forced measurements."""
    steps = []
    for b, g in enumerate(word.generators):
        quad = layout.quad(abs(g))
        direction = "positive" if g > 0 else "inverse"
        for target, recovery in _quad_steps(quad, direction):
            steps.append(ScheduleStep("forced_measurement", target, recovery,
                                      braid_index=b, generator=abs(g),
                                      direction=direction, quad=quad))
    return Schedule(layout, word, tuple(steps))


def execute(schedule: Schedule, state: StateVector, rng,
            routing: str = "over", max_attempts: int = MAX_ATTEMPTS_DEFAULT,
            trace: MeasurementTrace | None = None,
            ) -> tuple[StateVector, list]:
    """Run a schedule stochastically.

    Returns the final state and one record per schedule unit: a
    :class:`BraidRecord` per compiled generator (its three forced
    measurements) or a :class:`MeasurementOutcome` per readout step.
    Resource pairs are checked to be back in the vacuum channel after every
    braid unit.
    """
    records: list = []
    i = 0
    steps = schedule.steps
    while i < len(steps):
        step = steps[i]
        if step.kind == "readout":
            outcome, state = sample_measurement(state, step.pair[0], step.pair[1],
                                                rng, routing=routing, trace=trace)
            records.append(outcome)
            i += 1
            continue
        if step.kind != "forced_measurement":
            raise ScheduleError(f"unknown step kind {step.kind!r}")
        group = [s for s in steps[i:i + 3]
                 if s.kind == "forced_measurement" and s.braid_index == step.braid_index]
        if len(group) != 3 or group != list(_expected_group(step)):
            raise ScheduleError(
                f"braid group {step.braid_index} is not three consistent forced measurements")
        state, record = measurement_braid(state, step.quad, step.direction, rng,
                                          routing=routing,
                                          max_attempts=max_attempts, trace=trace)
        records.append(record)
        defect = check_resources(schedule.layout, state)
        if defect > RESOURCE_TOL:
            raise ProtocolError(
                f"resource pair not replenished after braid {step.braid_index}: "
                f"defect {defect:.3e}")
        i += 3
    return state, records


def _expected_group(step: ScheduleStep):
    for target, recovery in _quad_steps(step.quad, step.direction):
        yield ScheduleStep("forced_measurement", target, recovery,
                           braid_index=step.braid_index, generator=step.generator,
                           direction=step.direction, quad=step.quad)


def direct_braid_reference(word: BraidWord, layout: ArrayLayout,
                           state: StateVector, routing: str = "over") -> StateVector:
    """Apply the braid word directly with R-matrices (the oracle path).

    Each generator exchanges the two computational anyons of its quad,
    transporting the moving line across the resource leaves with the given
    routing convention; this is the adiabatic-transport baseline that the
    measurement pathway replaces.
    """
    for g in word.generators:
        quad = layout.quad(abs(g))
        state = direct_quad_braid(state, quad, +1 if g > 0 else -1, routing)
    return state


def readout(state: StateVector, pair, rng, routing: str = "over") -> MeasurementOutcome:
    """Sample the collective charge of a pair (qubit initialization/readout)."""
    outcome, _ = sample_measurement(state, int(pair[0]), int(pair[1]), rng,
                                    routing=routing)
    return outcome


# ---------------------------------------------------------------------------
# Schedule serialization.
# ---------------------------------------------------------------------------


def schedule_from_dict(data: dict, model: AnyonModel | None = None) -> Schedule:
    """Rebuild a schedule dumped with ``Schedule.to_dict``.

    If ``model`` is omitted it is reconstructed from the layout header via
    :func:`anyonbraid.model.load_builtin`.
    """
    from .model import load_builtin

    if data.get("format") != "anyonbraid-schedule-v1":
        raise ScheduleError(f"unknown schedule format {data.get('format')!r}")
    lay = data["layout"]
    if model is None:
        model = load_builtin(lay["model"], k=lay["params"].get("k"))
    layout = ArrayLayout(model, lay["charge"],
                         tuple(lay["computational"]),
                         tuple(tuple(p) for p in lay["resources"]),
                         lay["boundary_partner"], lay["self_dual_economy"])
    word = BraidWord.parse(data["word"]) if data.get("word") else BraidWord(())
    steps = []
    for s in data["steps"]:
        if s["kind"] == "readout":
            steps.append(ScheduleStep("readout", tuple(s["pair"])))
        else:
            steps.append(ScheduleStep("forced_measurement", tuple(s["pair"]),
                                      tuple(s["recovery"]), s["braid_index"],
                                      s["generator"], s["direction"],
                                      tuple(s["quad"])))
    schedule = Schedule(layout, word, tuple(steps))
    compiled = compile_word(word, layout)
    if word.generators and compiled.steps != schedule.steps:
        raise ScheduleError("schedule steps do not match the declared braid word")
    return schedule

"""States of n anyons over standard fusion-tree bases.

A state is a unit-norm complex amplitude vector over the left-canonical
fusion chain: leaves ``l_0, ..., l_{n-1}`` fuse in order,

    y_0 = l_0,  y_j in fuse(y_{j-1}, l_j),  y_{n-1} = total,

and a :class:`FusionTree` records the free internal labels
``(y_1, ..., y_{n-2})``.  Trees are enumerated in lexicographic order of the
internal labels, which fixes the basis indexing.

All kets are orthonormal and all public operations keep states unit-norm:
the diagrammatic normalization prefactors of the underlying formalism are
absorbed into the isometry definitions here, so Born probabilities and
fidelities are unchanged while phase bookkeeping stays explicit.  The only
cup/cap bending the module ever performs is flipping a pair state
``(a, dual a) -> (dual a, a)``, which contributes the bending phase
``kappa_a`` tracked in a :class:`DiagramIsotopyNote`.

States are immutable; operations return new states, so independent Monte
Carlo trials can fan out across workers freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisMismatch, InvalidPosition, UnknownChargeError
from .model import AnyonModel, Charge

#: Unit-norm tolerance enforced on construction.
NORM_TOL = 1e-9


@dataclass(frozen=True, order=True)
class FusionTree:
    """One standard-basis label: leaf charges, internal chain labels, total."""

    leaves: tuple[int, ...]
    internals: tuple[int, ...]
    total: int

    def labels(self, model: AnyonModel) -> dict:
        return {
            "leaves": [model.labels[i] for i in self.leaves],
            "internals": [model.labels[i] for i in self.internals],
            "total": model.labels[self.total],
        }


@dataclass
class DiagramIsotopyNote:
    """Accumulated unit-modulus bending factors (kappa phases).

    Bending a charge line through a cup or cap multiplies the state by the
    model's kappa phase; this note keeps those factors auditable instead of
    silently normalizing them away.
    """

    factor: complex = 1.0 + 0.0j
    events: list = field(default_factory=list)

    def absorb(self, phase: complex, what: str) -> None:
        if abs(abs(phase) - 1.0) > 1e-9:
            raise ValueError(f"isotopy factor must be a phase, got |{phase}|")
        self.factor *= phase
        self.events.append((what, complex(phase)))


class StateVector:
    """Normalized amplitudes over an enumerated fusion-tree basis.

    ``resolved_pair`` marks a state written in the reassociated basis where
    the pair ``(resolved_pair, resolved_pair + 1)`` carries an explicit
    collective charge label in place of the chain label at that slot; see
    :func:`apply_f_move`.
    """

    __slots__ = ("model", "leaves", "total", "trees", "amps", "resolved_pair")

    def __init__(self, model, leaves, total, amps, resolved_pair=None, _trees=None):
        self.model = model
        self.leaves = tuple(model.charge(l).index for l in leaves)
        self.total = model.charge(total).index
        self.resolved_pair = resolved_pair
        if _trees is not None:
            self.trees = _trees
        elif resolved_pair is None:
            self.trees = _chain_trees(model, self.leaves, self.total)
        else:
            self.trees = _resolved_trees(model, self.leaves, self.total, resolved_pair)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if len(amps) != len(self.trees):
            raise BasisMismatch(
                f"expected {len(self.trees)} amplitudes, got {len(amps)}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |amps| = {norm}")
        # Stored as given (not re-divided) so that text dumps round-trip
        # bit-exactly; every operation renormalizes explicitly where needed.
        self.amps = amps
        self.amps.flags.writeable = False

    @property
    def num_leaves(self) -> int:
        return len(self.leaves)

    @property
    def dim(self) -> int:
        return len(self.trees)

    def leaf_charges(self) -> tuple[Charge, ...]:
        return tuple(self.model.charges[i] for i in self.leaves)

    def _replace_amps(self, amps) -> "StateVector":
        return StateVector(self.model, self.leaves, self.total, amps,
                           resolved_pair=self.resolved_pair, _trees=self.trees)

    def __repr__(self) -> str:
        leaves = ",".join(self.model.labels[i] for i in self.leaves)
        return (f"StateVector({self.model.name}; leaves=[{leaves}]; "
                f"total={self.model.labels[self.total]}; dim={self.dim})")


# ---------------------------------------------------------------------------
# Basis enumeration.
# ---------------------------------------------------------------------------


def standard_basis(model: AnyonModel, leaves, total) -> list[FusionTree]:
    """All admissible fusion trees for the given leaves and total charge.

    Returns the empty list when the total charge is unreachable.
    """
    leaf_idx = tuple(model.charge(l).index for l in leaves)
    return list(_chain_trees(model, leaf_idx, model.charge(total).index))


def _chain_trees(model, leaves, total):
    key = ("basis", leaves, total)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    n = len(leaves)
    if n == 0:
        trees = (FusionTree((), (), total),) if total == 0 else ()
    elif n == 1:
        trees = (FusionTree(leaves, (), total),) if leaves[0] == total else ()
    else:
        chains = [(leaves[0],)]
        for j in range(1, n):
            allowed = model.N[:, leaves[j], :]
            if j < n - 1:
                chains = [c + (int(y),) for c in chains for y in np.flatnonzero(allowed[c[-1]])]
            else:
                chains = [c for c in chains if allowed[c[-1], total]]
        trees = tuple(FusionTree(leaves, c[1:], total) for c in chains)
    model._cache[key] = trees
    return trees


def _resolved_trees(model, leaves, total, pos):
    """Trees of the basis where pair (pos, pos+1) has an explicit channel.

    The internal slot at ``pos`` holds the pair charge ``c``; the chain
    constraint becomes ``c in fuse(l_pos, l_{pos+1})`` with the next chain
    label fusing from the charge before the pair.  ``pos = 0`` coincides
    with the standard basis.
    """
    key = ("rbasis", leaves, total, pos)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    n = len(leaves)
    if pos == 0:
        trees = _chain_trees(model, leaves, total)
    else:
        chains = [(leaves[0],)]
        for j in range(1, n):
            new = []
            for c in chains:
                if j == pos:
                    options = np.flatnonzero(model.N[leaves[j], leaves[j + 1]])
                elif j == pos + 1:
                    options = np.flatnonzero(model.N[c[-2], c[-1]])
                else:
                    options = np.flatnonzero(model.N[c[-1], leaves[j]])
                for y in options:
                    if j < n - 1 or y == total:
                        new.append(c + (int(y),))
            chains = new
        trees = tuple(FusionTree(leaves, c[1:n - 1], total) for c in chains)
    model._cache[key] = trees
    return trees


def basis_index(trees) -> dict:
    return {t.internals: i for i, t in enumerate(trees)}


# ---------------------------------------------------------------------------
# Elementary states.
# ---------------------------------------------------------------------------


def empty_state(model: AnyonModel) -> StateVector:
    """The zero-anyon vacuum register."""
    return StateVector(model, (), 0, [1.0])


def entangled_pair_state(model: AnyonModel, a) -> StateVector:
    """The particle-antiparticle pair ``(a, dual a)`` in the vacuum channel."""
    ca = model.charge(a)
    return StateVector(model, (ca.index, model.dual(ca).index), 0, [1.0])


def flipped_pair_state(model: AnyonModel, a, note: DiagramIsotopyNote | None = None) -> StateVector:
    """The pair written in the order ``(dual a, a)``.

    Obtained from :func:`entangled_pair_state` by bending both lines, which
    contributes the phase ``kappa_a``; the phase is recorded in ``note`` and
    applied to the amplitude.
    """
    ca = model.charge(a)
    kappa = model.kappa(ca)
    if note is not None:
        note.absorb(kappa, f"bend pair ({ca.label}, {model.dual(ca).label})")
    return StateVector(model, (model.dual(ca).index, ca.index), 0, [kappa])


def random_state(model: AnyonModel, leaves, total, rng) -> StateVector:
    """Haar-like random state: iid complex normal amplitudes, normalized."""
    trees = standard_basis(model, leaves, total)
    if not trees:
        raise ValueError("empty basis: total charge unreachable")
    amps = rng.normal(size=len(trees)) + 1j * rng.normal(size=len(trees))
    return StateVector(model, leaves, total, amps / np.linalg.norm(amps))


# ---------------------------------------------------------------------------
# F-moves.
# ---------------------------------------------------------------------------


def _resolve_matrix(model, leaves, total, pos):
    """Unitary U with amps_resolved = U @ amps_standard for pair (pos, pos+1)."""
    key = ("resolveU", leaves, total, pos)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    std = _chain_trees(model, leaves, total)
    res = _resolved_trees(model, leaves, total, pos)
    if pos == 0:
        U = np.eye(len(std), dtype=complex)
    else:
        res_idx = basis_index(res)
        U = np.zeros((len(res), len(std)), dtype=complex)
        n = len(leaves)
        for s, tree in enumerate(std):
            chain = (leaves[0],) + tree.internals + (total,)
            before = chain[pos - 1]
            e = chain[pos]
            after = chain[pos + 1]
            for c in np.flatnonzero(model.N[leaves[pos], leaves[pos + 1]]):
                amp = model.F[before, leaves[pos], leaves[pos + 1], after, e, c]
                if amp != 0:
                    target = tree.internals[:pos - 1] + (int(c),) + tree.internals[pos:]
                    U[res_idx[target], s] += amp
    model._cache[key] = (res, U)
    return res, U


def apply_f_move(state: StateVector, pos: int, direction: int = +1) -> StateVector:
    """Reassociate once: make the collective charge of pair (pos, pos+1)
    explicit (``direction=+1``) or return to the standard chain (``-1``).

    The transformation is the unitary F-move between the two fusion orders;
    the physical state is unchanged.
    """
    n = state.num_leaves
    if not 0 <= pos <= n - 2:
        raise InvalidPosition(f"no reassociation site at {pos} for {n} leaves")
    _, U = _resolve_matrix(state.model, state.leaves, state.total, pos)
    if direction >= 0:
        if state.resolved_pair is not None:
            raise InvalidPosition("state is already reassociated; undo that move first")
        return StateVector(state.model, state.leaves, state.total, U @ state.amps,
                           resolved_pair=pos)
    if state.resolved_pair != pos:
        raise InvalidPosition(
            f"state is not reassociated at {pos} (at {state.resolved_pair})")
    return StateVector(state.model, state.leaves, state.total,
                       U.conj().T @ state.amps)


def _pair_channels(model, leaves, total, pos):
    """Per-tree pair charge of the resolved basis at ``pos``."""
    res = _resolved_trees(model, leaves, total, pos)
    if pos == 0:
        if len(leaves) == 2:
            return res, np.array([total] * len(res))
        return res, np.array([t.internals[0] for t in res])
    return res, np.array([t.internals[pos - 1] for t in res])


# ---------------------------------------------------------------------------
# Braids.
# ---------------------------------------------------------------------------


def _braid_matrix(model, leaves, total, pos, sign):
    """Matrix of the elementary exchange of leaves (pos, pos+1).

    Returns ``(new_leaves, B)`` with ``amps_new = B @ amps``.  ``sign=+1``
    is the counterclockwise exchange (phase ``R_c^{ab}`` per pair channel);
    ``sign=-1`` is its inverse.
    """
    key = ("braid", leaves, total, pos, sign)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    a, b = leaves[pos], leaves[pos + 1]
    swapped = leaves[:pos] + (b, a) + leaves[pos + 2:]
    _, channels = _pair_channels(model, leaves, total, pos)
    _, U = _resolve_matrix(model, leaves, total, pos)
    _, Us = _resolve_matrix(model, swapped, total, pos)
    phases = model.R[a, b, channels] if sign > 0 else np.conj(model.R[b, a, channels])
    B = Us.conj().T @ (phases[:, None] * U)
    model._cache[key] = (swapped, B)
    return swapped, B


def apply_braid(state: StateVector, pos: int, sign: int = +1) -> StateVector:
    """Exchange adjacent leaves ``pos`` and ``pos + 1``.

    ``sign=+1`` applies the counterclockwise crossing, ``sign=-1`` the
    clockwise one; the two compose to the identity.
    """
    n = state.num_leaves
    if not 0 <= pos <= n - 2:
        raise InvalidPosition(f"no adjacent pair at {pos} for {n} leaves")
    if state.resolved_pair is not None:
        raise InvalidPosition("braid requires the standard basis; undo the F-move first")
    if sign not in (+1, -1):
        raise ValueError("braid sign must be +1 or -1")
    new_leaves, B = _braid_matrix(state.model, state.leaves, state.total, pos, sign)
    return StateVector(state.model, new_leaves, state.total, B @ state.amps)


def transport_matrix(model, leaves, total, i, j, routing="over"):
    """Composite braid that carries leaf ``j`` to position ``i + 1``.

    Returns ``(new_leaves, T)`` with ``T`` unitary.  With ``routing="over"``
    every crossing on the way is the counterclockwise (+1) elementary braid;
    ``"under"`` uses the inverse crossings.  Transporting back is ``T^dag``.
    """
    if routing not in ("over", "under"):
        raise ValueError(f"routing must be 'over' or 'under', got {routing!r}")
    sign = +1 if routing == "over" else -1
    key = ("transport", leaves, total, i, j, routing)
    hit = model._cache.get(key)
    if hit is not None:
        return hit
    cur = leaves
    dim = len(_chain_trees(model, leaves, total))
    T = np.eye(dim, dtype=complex)
    for pos in range(j - 1, i, -1):
        cur, B = _braid_matrix(model, cur, total, pos, sign)
        T = B @ T
    model._cache[key] = (cur, T)
    return cur, T


# ---------------------------------------------------------------------------
# Inner products and pair attachment.
# ---------------------------------------------------------------------------


def inner(s1: StateVector, s2: StateVector) -> complex:
    """Hermitian inner product ``<s1|s2>`` of two same-basis states."""
    if s1.model is not s2.model:
        raise BasisMismatch("states belong to different models")
    if (s1.leaves, s1.total, s1.resolved_pair) != (s2.leaves, s2.total, s2.resolved_pair):
        raise BasisMismatch("states are expressed over different bases")
    return complex(np.vdot(s1.amps, s2.amps))


def fidelity(s1: StateVector, s2: StateVector) -> float:
    """Overlap magnitude ``|<s1|s2>|``; 1 means equal up to a global phase."""
    return abs(inner(s1, s2))


def attach_pair(state: StateVector, position: int, a,
                note: DiagramIsotopyNote | None = None) -> StateVector:
    """Insert a vacuum-channel pair ``(a, dual a)`` at the given leaf position.

    The inserted pair becomes leaves ``position`` and ``position + 1`` of the
    result, re-expressed in the standard chain basis by one F-move per
    branch.  The map is an isometry, so the norm is preserved; no bending is
    involved (a flipped pair order goes through :func:`flipped_pair_state`).
    """
    model = state.model
    n = state.num_leaves
    if not 0 <= position <= n:
        raise InvalidPosition(f"attach position {position} out of range 0..{n}")
    if state.resolved_pair is not None:
        raise InvalidPosition("attach requires the standard basis")
    ca = model.charge(a).index
    cab = model.dual(ca).index
    new_leaves = state.leaves[:position] + (ca, cab) + state.leaves[position:]
    new_trees = _chain_trees(model, new_leaves, state.total)
    idx = basis_index(new_trees)
    out = np.zeros(len(new_trees), dtype=complex)
    for s, tree in enumerate(state.trees):
        if state.amps[s] == 0:
            continue
        chain = ((state.leaves[0],) + tree.internals + (state.total,)) if n else ()
        y = 0 if position == 0 else chain[position - 1]
        for z in np.flatnonzero(model.N[y, ca]):
            amp = np.conj(model.F[y, ca, cab, y, z, 0])
            if amp == 0:
                continue
            # The running charge goes y -> z (absorb a) -> y (absorb dual a)
            # and the rest of the chain is untouched.
            new_chain = chain[:position] + (int(z), y) + chain[position:]
            out[idx[new_chain[1:-1]]] += amp * state.amps[s]
    return StateVector(model, new_leaves, state.total, out)


# ---------------------------------------------------------------------------
# Serialization: bit-exact text round-trip at double precision.
# ---------------------------------------------------------------------------


def state_to_json(state: StateVector) -> str:
    """Dump leaves, total and (internal labels, re, im) rows as JSON text."""
    model = state.model
    rows = [
        {"internals": [model.labels[i] for i in t.internals],
         "re": float(state.amps[n].real), "im": float(state.amps[n].imag)}
        for n, t in enumerate(state.trees)
    ]
    return json.dumps({
        "model": model.name,
        "params": model.params,
        "leaves": [model.labels[i] for i in state.leaves],
        "total": model.labels[state.total],
        "amplitudes": rows,
    }, indent=2)


def state_from_json(model: AnyonModel, text: str) -> StateVector:
    """Rebuild a state dumped by :func:`state_to_json` against ``model``."""
    data = json.loads(text)
    leaves = tuple(model.charge(l).index for l in data["leaves"])
    total = model.charge(data["total"]).index
    trees = _chain_trees(model, leaves, total)
    idx = basis_index(trees)
    amps = np.zeros(len(trees), dtype=complex)
    for row in data["amplitudes"]:
        internals = tuple(model.charge(l).index for l in row["internals"])
        if internals not in idx:
            raise UnknownChargeError(f"row {row['internals']} is not an admissible tree")
        amps[idx[internals]] = row["re"] + 1j * row["im"]
    return StateVector(model, leaves, total, amps)

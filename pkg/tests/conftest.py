import numpy as np
import pytest

from anyonbraid import (StateVector, apply_f_move, attach_pair,
                        entangled_pair_state, load_builtin, project_pair,
                        random_state)


@pytest.fixture(scope="session")
def fibonacci():
    return load_builtin("fibonacci")


@pytest.fixture(scope="session")
def ising():
    return load_builtin("ising")


@pytest.fixture(scope="session")
def su2_2():
    return load_builtin("su2_k", k=2)


@pytest.fixture(scope="session")
def su2_3():
    return load_builtin("su2_k", k=3)


@pytest.fixture(scope="session")
def protocol_models(ising, fibonacci, su2_3):
    """The built-in models exercised at protocol level, with their
    computational charges."""
    return [(ising, "1/2"), (fibonacci, "1"), (su2_3, "1/2")]


def teleport_config(model, a):
    """4-leaf teleport setup: resource pair on leaves (0, 1), encoded state
    carried by leaves 2, 3.  Target pair (1, 2), recovery pair (0, 1)."""
    return attach_pair(entangled_pair_state(model, a), 2, a)


def random_teleport_state(model, a, rng):
    """Random encoded state of the teleport configuration."""
    shape = teleport_config(model, a)
    state = random_state(model, shape.leaves, shape.total, rng)
    state, _ = project_pair(state, 0, 1, 0)
    return state


def quad_config(model, a):
    """Braid quad: computational anyons on leaves 0 and 3, resource pair in
    the vacuum channel on leaves (1, 2)."""
    return attach_pair(entangled_pair_state(model, a), 1, model.dual(a).label)


def random_quad_state(model, a, rng):
    shape = quad_config(model, a)
    state = random_state(model, shape.leaves, shape.total, rng)
    state, _ = project_pair(state, 1, 2, 0)
    return state


def random_register_state(layout, rng):
    from anyonbraid import random_encoded_state

    return random_encoded_state(layout, rng)


def five_leaf_config(model, a):
    """Teleport setup with a real encoded register: resource pair (0, 1),
    anyon 2 carries state information entangled with leaves 3, 4."""
    return attach_pair(attach_pair(entangled_pair_state(model, a), 2, a), 4, a)


def random_five_leaf_state(model, a, rng):
    shape = five_leaf_config(model, a)
    state = random_state(model, shape.leaves, shape.total, rng)
    state, _ = project_pair(state, 0, 1, 0)
    return state


def rerooted_reference(state):
    """Independent teleport oracle for target pair (1, 2), recovery (0, 1).

    Amplitudes are carried over tree by tree: the chain label pattern
    (0, a, rest...) of the input equals the resolved-basis pattern
    (pair charge 0, a, rest...) of the output; one inverse F-move returns
    to the standard chain.  No projector is involved.
    """
    model = state.model
    resolved = apply_f_move(state, 1, +1)  # only to borrow the basis layout
    amps = np.zeros(resolved.dim, dtype=complex)
    res_index = {t.internals: k for k, t in enumerate(resolved.trees)}
    for n, tree in enumerate(state.trees):
        if state.amps[n] == 0:
            continue
        assert tree.internals[0] == 0, "input must have (0,1) in the vacuum channel"
        amps[res_index[tree.internals]] = state.amps[n]
    target = StateVector(model, state.leaves, state.total, amps, resolved_pair=1)
    return apply_f_move(target, 1, -1)

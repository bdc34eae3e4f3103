import itertools
from functools import lru_cache

import numpy as np
import pytest

from optoteleport.fock import Ensemble, PureState, as_ensemble
from optoteleport.elements import beamsplitter, loss_channel, phase_shift, state_swap
from optoteleport import oracle as om


@lru_cache(maxsize=None)
def two_photon_loss_oracle(theta: float, transmittance: float):
    """Memoized dense-oracle run of the two-photon-pump loss scenario (the
    heavy fixture shared across test modules); treat results as read-only."""
    return om.blue_two_photon_loss(theta, transmittance)


def random_sparse_state(rng, registry, n_terms=3, max_total=2):
    """Random normalized state with bounded total excitation (keeps every
    splitter output within the cutoffs)."""
    occs = [
        occ
        for occ in itertools.product(*[range(c + 1) for c in registry.cutoffs])
        if sum(occ) <= max_total
    ]
    picks = rng.choice(len(occs), size=min(n_terms, len(occs)), replace=False)
    terms = {occs[i]: complex(rng.normal(), rng.normal()) for i in picks}
    return PureState(registry, terms).normalized()


def apply_ops_sparse(state, ops) -> Ensemble:
    """Run a circuit description through the sparse engine."""
    ens = as_ensemble(state)
    for op in ops:
        kind = op[0]
        if kind == "bs":
            ens = ens.map_pure(lambda s, a=op[1], b=op[2]: beamsplitter(s, a, b))
        elif kind == "phase":
            ens = ens.map_pure(lambda s, m=op[1], p=op[2]: phase_shift(s, m, p))
        elif kind == "swap":
            ens = ens.map_pure(lambda s, a=op[1], b=op[2]: state_swap(s, a, b))
        elif kind == "loss":
            ens = loss_channel(ens, op[1], op[2])
        else:
            raise ValueError(kind)
    return ens


def random_circuit(rng, labels, n_ops=4):
    ops = []
    for _ in range(n_ops):
        kind = rng.choice(["bs", "loss", "phase"])
        if kind == "bs":
            i, j = rng.choice(len(labels), size=2, replace=False)
            ops.append(("bs", labels[i], labels[j]))
        elif kind == "loss":
            ops.append(("loss", labels[rng.integers(len(labels))], float(rng.uniform(0.3, 0.95))))
        else:
            ops.append(("phase", labels[rng.integers(len(labels))], float(rng.uniform(0, 2 * np.pi))))
    return ops


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)

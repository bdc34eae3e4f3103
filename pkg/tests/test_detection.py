import itertools
import math

import numpy as np
import pytest

from optoteleport.fock import ModeRegistry, PureState, basis_state
from optoteleport.detection import (
    ClickPattern,
    OutcomeClass,
    apply_dark_counts,
    bell_measurement,
    class_conditional,
    class_weights,
    classify_pattern,
    threshold_measure,
)
from optoteleport.protocol import ProtocolConfig, run_ideal, target_state
from optoteleport.analysis import ensemble_to_density_matrix
from optoteleport import oracle as om

from conftest import random_sparse_state

S2 = 1 / math.sqrt(2)


# ------------------------------------------------------------ classification

@pytest.mark.parametrize(
    "clicks,expected",
    [
        ((True, True, False, False), OutcomeClass.M_PLUS),  # cH cV
        ((False, False, True, True), OutcomeClass.M_PLUS),  # dH dV
        ((False, True, True, False), OutcomeClass.M_MINUS),  # cV dH
        ((True, False, False, True), OutcomeClass.M_MINUS),  # cH dV
        ((True, False, True, False), OutcomeClass.SAME_POL_DISCARD),  # cH dH
        ((False, True, False, True), OutcomeClass.SAME_POL_DISCARD),  # cV dV
    ],
)
def test_classify_double_clicks(clicks, expected):
    assert classify_pattern(ClickPattern(*clicks)) is expected


def test_classify_everything_else_is_not_herald():
    double = {
        (True, True, False, False), (False, False, True, True),
        (False, True, True, False), (True, False, False, True),
        (True, False, True, False), (False, True, False, True),
    }
    for clicks in itertools.product((False, True), repeat=4):
        if clicks in double:
            continue
        assert classify_pattern(ClickPattern(*clicks)) is OutcomeClass.NOT_HERALD


# ------------------------------------------------------------------ measure

def test_threshold_measure_vacuum():
    reg = ModeRegistry(("d1", "d2"), 2)
    results = threshold_measure(basis_state(reg, (0, 0)), ["d1", "d2"])
    weights = {clicks: w for clicks, w, _ in results}
    assert weights[(False, False)] == pytest.approx(1.0)
    assert sum(weights.values()) == pytest.approx(1.0)


def test_threshold_measure_cannot_resolve_two_photons():
    reg = ModeRegistry(("d1", "d2"), 2)
    results = threshold_measure(basis_state(reg, (2, 0)), ["d1", "d2"])
    weights = {clicks: w for clicks, w, _ in results}
    assert weights[(True, False)] == pytest.approx(1.0)


def test_threshold_measure_bell_pair_conditionals():
    # analyzer output (cH cV - dH dV)/sqrt(2) alongside a memory state
    theta = 0.5
    labels = ("mA", "mB", "cH", "cV", "dH", "dV")
    reg = ModeRegistry(labels, 2)
    psi = PureState(reg, {})
    mem_plus = {(0, 1): math.sin(theta), (1, 0): math.cos(theta)}
    terms = {}
    for (a, b), amp in mem_plus.items():
        terms[(a, b, 1, 1, 0, 0)] = amp * S2
        terms[(a, b, 0, 0, 1, 1)] = -amp * S2
    state = PureState(reg, terms)
    results = threshold_measure(state, ["cH", "cV", "dH", "dV"])
    weights = {clicks: w for clicks, w, _ in results}
    assert weights[(True, True, False, False)] == pytest.approx(0.5)
    assert weights[(False, False, True, True)] == pytest.approx(0.5)
    for clicks, w, cond in results:
        if w == 0.0:
            continue
        assert cond.total_weight == pytest.approx(1.0)
        (bw, bs), = cond.branches
        assert abs(bs.amplitude((0, 1))) == pytest.approx(math.sin(theta))


def test_threshold_measure_weight_sum(rng):
    reg = ModeRegistry(("a", "b", "c"), 2)
    for _ in range(10):
        state = random_sparse_state(rng, reg, n_terms=4)
        results = threshold_measure(state, ["b", "c"])
        assert sum(w for _, w, _ in results) == pytest.approx(state.norm_squared, abs=1e-12)


# ----------------------------------------------------------- Bell analyzer

def _ideal_joint(theta, phi=0.0, n_max=2):
    labels = ("mechA", "mechB", "H2", "V2", "H1", "V1")
    reg = ModeRegistry(labels, n_max)
    s2 = S2
    terms = {}
    for (mem, stokes), amp in {((0, 1), "V2"): s2, ((1, 0), "H2"): s2}.items():
        for (pol, inamp) in (("V1", math.cos(theta)), ("H1", math.sin(theta) * np.exp(1j * phi))):
            occ = {"mechA": mem[0], "mechB": mem[1], stokes: 1, pol: 1}
            key = tuple(occ.get(m, 0) for m in labels)
            terms[key] = amp * inamp
    return PureState(reg, terms)


@pytest.mark.parametrize("theta", np.linspace(0.05, 1.5, 20))
def test_bell_measurement_ideal_conditionals(theta):
    results = bell_measurement(_ideal_joint(theta))
    totals = class_weights(results)
    assert totals[OutcomeClass.M_PLUS] == pytest.approx(0.25, abs=1e-12)
    assert totals[OutcomeClass.M_MINUS] == pytest.approx(0.25, abs=1e-12)
    w_plus, cond_plus = class_conditional(results, OutcomeClass.M_PLUS)
    target = target_state(theta, registry=cond_plus.registry)
    from optoteleport.fock import fidelity

    assert fidelity(cond_plus, target) == pytest.approx(1.0, abs=1e-12)
    w_minus, cond_minus = class_conditional(results, OutcomeClass.M_MINUS)
    target_m = target_state(theta, outcome=OutcomeClass.M_MINUS, registry=cond_minus.registry)
    assert fidelity(cond_minus, target_m) == pytest.approx(1.0, abs=1e-12)


def test_bell_measurement_two_photon_input_heralds_empty_memory():
    # two input photons, no memory excitation: the cross-polarized component
    # heralds while leaving the memory in its ground state
    theta = math.pi / 3
    labels = ("mechA", "mechB", "H2", "V2", "H1", "V1")
    reg = ModeRegistry(labels, 2)
    two_photon = {
        (0, 0, 0, 0, 2, 0): math.sin(theta) ** 2,
        (0, 0, 0, 0, 0, 2): math.cos(theta) ** 2,
        (0, 0, 0, 0, 1, 1): math.sin(2 * theta) / math.sqrt(2),
    }
    state = PureState(reg, two_photon)
    results = bell_measurement(state)
    totals = class_weights(results)
    herald = totals[OutcomeClass.M_PLUS] + totals[OutcomeClass.M_MINUS]
    assert herald == pytest.approx(math.sin(2 * theta) ** 2 / 2, abs=1e-12)
    _, cond = class_conditional(results, OutcomeClass.M_PLUS)
    (w, branch), = cond.branches
    assert branch.amplitude((0, 0)) == pytest.approx(1.0)


def test_bell_measurement_same_polarization_pairs_discarded():
    # both photons horizontally polarized, one per port: they bunch, so the
    # same-polarization double clicks never fire and no herald results
    labels = ("mechA", "mechB", "H2", "V2", "H1", "V1")
    reg = ModeRegistry(labels, 2)
    state = basis_state(reg, {"H2": 1, "H1": 1})
    totals = class_weights(bell_measurement(state))
    assert totals[OutcomeClass.M_PLUS] == 0.0
    assert totals[OutcomeClass.M_MINUS] == 0.0
    assert totals[OutcomeClass.NOT_HERALD] == pytest.approx(1.0)
    # two photons in one port do produce same-polarization coincidences
    state2 = basis_state(reg, {"H1": 2})
    totals2 = class_weights(bell_measurement(state2))
    assert totals2[OutcomeClass.SAME_POL_DISCARD] == pytest.approx(0.5)
    assert totals2[OutcomeClass.NOT_HERALD] == pytest.approx(0.5)


def test_bell_measurement_missing_modes():
    reg = ModeRegistry(("mechA", "H1", "V1"), 2)
    with pytest.raises(KeyError):
        bell_measurement(basis_state(reg, {}))


def test_bell_measurement_matches_dense_oracle():
    theta, phi = 0.8, 0.3
    results = bell_measurement(_ideal_joint(theta, phi))
    oracle, (weights, conds) = om.ideal_teleport(theta, phi, cutoff=2)
    totals = class_weights(results)
    assert totals[OutcomeClass.M_PLUS] == pytest.approx(weights["plus"], abs=1e-10)
    assert totals[OutcomeClass.M_MINUS] == pytest.approx(weights["minus"], abs=1e-10)
    assert totals[OutcomeClass.NOT_HERALD] == pytest.approx(weights["none"], abs=1e-10)
    w, cond = class_conditional(results, OutcomeClass.M_PLUS)
    assert np.allclose(
        w * ensemble_to_density_matrix(cond), conds["plus"], atol=1e-10
    )


# -------------------------------------------------------------- dark counts

def test_dark_counts_zero_probability_is_identity():
    results = bell_measurement(_ideal_joint(0.3))
    assert apply_dark_counts(results, 0.0) == results


def test_dark_counts_vacuum_false_heralds():
    labels = ("mechA", "mechB", "H2", "V2", "H1", "V1")
    reg = ModeRegistry(labels, 2)
    vacuum = basis_state(reg, {})
    p = 0.01
    flipped = apply_dark_counts(bell_measurement(vacuum), p)
    totals = class_weights(flipped)
    assert totals[OutcomeClass.M_PLUS] == pytest.approx(2 * p**2 * (1 - p) ** 2, abs=1e-15)
    assert sum(totals.values()) == pytest.approx(1.0, abs=1e-12)


def test_dark_counts_small_rate_barely_moves_fidelity():
    base = run_ideal(ProtocolConfig(theta=math.pi / 6))
    shifted = run_ideal(ProtocolConfig(theta=math.pi / 6, p_dark=1e-5))
    f0 = base.outcomes[OutcomeClass.M_PLUS].fidelity
    f1 = shifted.outcomes[OutcomeClass.M_PLUS].fidelity
    assert 0.0 < f0 - f1 < 1e-4


def test_dark_counts_preserve_total_weight(rng):
    labels = ("mechA", "mechB", "H2", "V2", "H1", "V1")
    reg = ModeRegistry(labels, 2)
    state = random_sparse_state(rng, reg, n_terms=4)
    results = bell_measurement(state)
    flipped = apply_dark_counts(results, 0.07)
    assert sum(r.weight for r in flipped) == pytest.approx(
        sum(r.weight for r in results), abs=1e-12
    )


def test_dark_counts_validate_probability():
    results = bell_measurement(_ideal_joint(0.3))
    with pytest.raises(ValueError):
        apply_dark_counts(results, 1.0)

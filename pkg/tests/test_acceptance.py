"""Acceptance suite.

One test per acceptance criterion, each printing a pass line with the
measured numbers (run with ``pytest tests/test_acceptance.py -v -s``).
Tolerances are fixed here and nowhere else.
"""

import itertools
import math
import time

import numpy as np
import pytest

from optoteleport.fock import ModeRegistry, fidelity, trace_out
from optoteleport.elements import beamsplitter, loss_channel, phase_shift, state_swap
from optoteleport.detection import OutcomeClass, threshold_measure
from optoteleport.protocol import (
    LossScenario,
    ProtocolConfig,
    run_ideal,
    run_thermal,
    run_wcs,
    run_with_loss,
    target_state,
)
from optoteleport.analysis import (
    CLASSICAL_FIDELITY_BOUND,
    ensemble_to_density_matrix,
    fidelity_closed_form,
    threshold_search,
)
from optoteleport import oracle as om

from conftest import apply_ops_sparse, random_circuit, random_sparse_state

M_PLUS, M_MINUS = OutcomeClass.M_PLUS, OutcomeClass.M_MINUS


def _ok(name: str, detail: str) -> None:
    print(f"[PASS] {name}: {detail}")


def test_thermal_curve_matches_closed_form():
    """Simulated heralded fidelity equals the closed form over the full
    occupation grid, well under ten seconds."""
    grid = [round(0.05 * k, 2) for k in range(11)]
    start = time.monotonic()
    worst = 0.0
    for nbar in grid:
        report = run_thermal(ProtocolConfig(theta=math.pi / 6, nbar=nbar))
        got = report.outcomes[M_PLUS].fidelity
        worst = max(worst, abs(got - fidelity_closed_form(nbar, 2)))
    elapsed = time.monotonic() - start
    assert worst < 1e-9
    assert elapsed < 10.0
    _ok("thermal curve vs closed form", f"max |dF| = {worst:.2e} over {grid}, {elapsed:.2f}s")


def test_classical_bound_threshold():
    """The fidelity crosses the 2/3 classical bound at an initial occupation
    of 0.230 +/- 0.005."""
    crossing = threshold_search(CLASSICAL_FIDELITY_BOUND)
    assert crossing == pytest.approx(0.230, abs=0.005)
    below = run_thermal(ProtocolConfig(theta=0.5, nbar=crossing - 0.004))
    above = run_thermal(ProtocolConfig(theta=0.5, nbar=crossing + 0.004))
    assert below.outcomes[M_PLUS].fidelity > CLASSICAL_FIDELITY_BOUND
    assert above.outcomes[M_PLUS].fidelity < CLASSICAL_FIDELITY_BOUND
    _ok("classical bound threshold", f"crossing at nbar = {crossing:.6f}")


def test_ideal_protocol_heralds():
    """Twenty random input angles: herald weights are exactly one quarter and
    both heralded states match their targets."""
    rng = np.random.default_rng(7)
    worst_fid, worst_w = 1.0, 0.0
    for theta in rng.uniform(0.0, math.pi / 2, size=20):
        report = run_ideal(ProtocolConfig(theta=float(theta)))
        plus, minus = report.outcomes[M_PLUS], report.outcomes[M_MINUS]
        assert abs(plus.weight - 0.25) < 1e-10
        assert abs(minus.weight - 0.25) < 1e-10
        worst_w = max(worst_w, abs(plus.weight - 0.25), abs(minus.weight - 0.25))
        fp = fidelity(
            plus.conditional, target_state(theta, registry=plus.conditional.registry)
        )
        fm = fidelity(
            minus.conditional,
            target_state(theta, outcome=M_MINUS, registry=minus.conditional.registry),
        )
        assert abs(fp - 1.0) < 1e-10 and abs(fm - 1.0) < 1e-10
        worst_fid = min(worst_fid, fp, fm)
    _ok("ideal protocol", f"min fidelity {worst_fid:.15f}, max weight error {worst_w:.1e}")


def test_propagation_loss_invariance():
    """Loss before the analyzer rescales the herald weight linearly and never
    touches the teleported state."""
    theta = math.pi / 3
    for t in [round(0.1 * k, 1) for k in range(1, 11)]:
        report = run_with_loss(ProtocolConfig(theta=theta, t_nd=t), LossScenario.NON_DETECTION)
        plus = report.outcomes[M_PLUS]
        assert abs(plus.weight - t * 0.25) < 1e-10
        assert abs(plus.fidelity - 1.0) < 1e-10
    _ok("propagation-loss invariance", "weight = T/4 and fidelity = 1 for T in 0.1..1.0")


def test_detection_loss_scaling():
    """Detector inefficiency rescales the herald weight quadratically."""
    theta = math.pi / 3
    for t in [round(0.1 * k, 1) for k in range(1, 11)]:
        report = run_with_loss(ProtocolConfig(theta=theta, t_det=t), LossScenario.DETECTION)
        plus = report.outcomes[M_PLUS]
        assert abs(plus.weight - t * t * 0.25) < 1e-10
        assert abs(plus.fidelity - 1.0) < 1e-10
    _ok("detection-loss scaling", "weight = T^2/4 and fidelity = 1 for T in 0.1..1.0")


def test_two_photon_pump_loss_engine_equivalence():
    """The contaminated herald from a two-photon pump through the loss channel
    agrees element by element with the dense oracle at every test point, and
    its single-loss sector stays proportional to the closed-form reference."""
    from optoteleport.analysis import one_loss_sector, two_photon_loss_reference
    from conftest import two_photon_loss_oracle

    worst = worst_ref = 0.0
    for theta, t in itertools.product((math.pi / 4, math.pi / 6), (0.3, 0.5, 0.8)):
        report = run_with_loss(ProtocolConfig(theta=theta, t_nd=t), LossScenario.BLUE_TWO_PHOTON)
        unnorm = report.details["unnormalized_plus"]
        labeled = {}
        for w, s in unnorm.branches:
            terms = list(s.items())
            for o1, a1 in terms:
                for o2, a2 in terms:
                    labeled[(o1, o2)] = labeled.get((o1, o2), 0.0) + w * a1 * np.conj(a2)
        weights, rho_oracle, basis = two_photon_loss_oracle(theta, t)
        for i, oi in enumerate(basis):
            for j, oj in enumerate(basis):
                worst = max(worst, abs(labeled.get((oi, oj), 0.0) - rho_oracle[i, j]))
        worst = max(worst, abs(report.outcomes[M_PLUS].weight - weights["plus"]))

        _, rho_lossless, _ = two_photon_loss_oracle(theta, 1.0)
        sigma = one_loss_sector(rho_oracle, rho_lossless, t)
        ref_sector = two_photon_loss_reference(theta, t) - t**2 * two_photon_loss_reference(theta, 1.0)
        worst_ref = max(worst_ref, float(np.abs(sigma * 2 * (1 - t) * t - ref_sector).max()))
    assert worst < 1e-10
    assert worst_ref < 1e-10
    _ok(
        "two-photon pump loss equivalence",
        f"max element deviation {worst:.2e}; single-loss sector vs reference {worst_ref:.2e}",
    )


def test_weak_pulse_sector_ratios():
    """Contamination and sector weights follow the amplitude-ratio formulas
    to within one percent."""
    alpha, beta = 0.05, 0.2
    report = run_wcs(ProtocolConfig(theta=math.pi / 4, alpha=alpha, beta=beta, nbar=0.0))
    contamination = report.details["contamination_ratio"]
    expected = alpha**2 / (2 * beta**2)
    assert contamination == pytest.approx(expected, rel=1e-2)
    table = report.details["sector_ratio_table"]
    for sector, want in (
        ((1, 2), beta**2 / 2),
        ((2, 1), alpha**2 / 2),
        ((2, 2), alpha**2 * beta**2 / 4),
        ((1, 1), 1.0),
    ):
        assert table[sector] == pytest.approx(want, rel=1e-2)
    _ok(
        "weak-pulse sector ratios",
        f"contamination {contamination:.6f} vs {expected:.6f}; sectors within 1%",
    )


def test_randomized_circuit_oracle_equivalence():
    """Fifty random circuits over up to five modes: the sparse engine matches
    the dense density-matrix oracle through splitters, loss, threshold
    measurement and partial trace."""
    rng = np.random.default_rng(20260809)
    worst = 0.0
    for case in range(50):
        n_modes = int(rng.integers(3, 6))
        labels = tuple(f"m{i}" for i in range(n_modes))
        registry = ModeRegistry(labels, 2)
        oracle = om.DenseOracle(labels, 2)
        state = random_sparse_state(rng, registry, n_terms=3, max_total=2)
        ops = random_circuit(rng, labels, n_ops=int(rng.integers(2, 6)))
        sparse = apply_ops_sparse(state, ops)
        dense = oracle.run_circuit(oracle.pure_rho(state.terms), ops)
        worst = max(worst, float(np.abs(ensemble_to_density_matrix(sparse) - dense).max()))
        if case % 2 == 0:
            k = int(rng.integers(1, min(3, n_modes)))
            detectors = list(rng.choice(labels, size=k, replace=False))
            got = threshold_measure(sparse, detectors)
            want = oracle.threshold_patterns(dense, detectors)
            for (clicks_s, weight_s, cond_s), (clicks_d, weight_d, reduced_d, _) in zip(got, want):
                assert clicks_s == clicks_d
                worst = max(worst, abs(weight_s - weight_d))
                if weight_s > 1e-12:
                    diff = np.abs(weight_s * ensemble_to_density_matrix(cond_s) - reduced_d).max()
                    worst = max(worst, float(diff))
        else:
            k = int(rng.integers(1, n_modes))
            dropped = list(rng.choice(labels, size=k, replace=False))
            kept = [m for m in labels if m not in dropped]
            diff = np.abs(
                ensemble_to_density_matrix(trace_out(sparse, dropped)) - oracle.ptrace(dense, kept)
            ).max()
            worst = max(worst, float(diff))
    assert worst < 1e-10
    _ok("randomized circuit equivalence", f"50 circuits, max deviation {worst:.2e}")


def test_conservation_suite():
    """Unitarity of splitter/phase/swap, trace preservation of loss and
    threshold measurement, and multiplicativity of composed loss."""
    rng = np.random.default_rng(99)
    registry = ModeRegistry(("a", "b", "c"), 3)
    worst_norm = worst_weight = worst_comp = 0.0
    for _ in range(20):
        state = random_sparse_state(rng, registry, n_terms=4, max_total=3)
        for unitary in (
            lambda s: beamsplitter(s, "a", "b"),
            lambda s: phase_shift(s, "c", float(rng.uniform(0, 2 * math.pi))),
            lambda s: state_swap(s, "b", "c"),
        ):
            out = unitary(state)
            worst_norm = max(worst_norm, abs(out.norm_squared - state.norm_squared))
        t = float(rng.uniform(0.2, 0.95))
        lossy = loss_channel(state, "b", t)
        worst_weight = max(worst_weight, abs(lossy.total_weight - state.norm_squared))
        measured = threshold_measure(state, ["a", "c"])
        worst_weight = max(
            worst_weight, abs(sum(w for _, w, _ in measured) - state.norm_squared)
        )
        t1, t2 = float(rng.uniform(0.3, 0.9)), float(rng.uniform(0.3, 0.9))
        twice = loss_channel(loss_channel(state, "a", t1), "a", t2)
        once = loss_channel(state, "a", t1 * t2)
        diff = np.abs(ensemble_to_density_matrix(twice) - ensemble_to_density_matrix(once)).max()
        worst_comp = max(worst_comp, float(diff))
    assert worst_norm < 1e-10
    assert worst_weight < 1e-10
    assert worst_comp < 1e-10
    _ok(
        "conservation suite",
        f"norm drift {worst_norm:.1e}, weight drift {worst_weight:.1e}, "
        f"loss composition {worst_comp:.1e}",
    )

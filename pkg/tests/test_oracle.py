import math

import numpy as np
import pytest

from optoteleport import oracle as om

S2 = 1 / math.sqrt(2)


def test_beamsplitter_convention():
    o = om.DenseOracle(("x", "y"), 2)
    u = o.beamsplitter_matrix("x", "y")
    assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)
    out = u @ o.ket({(1, 0): 1.0})
    assert np.allclose(out, o.ket({(1, 0): S2, (0, 1): S2}), atol=1e-12)
    out = u @ o.ket({(0, 1): 1.0})
    assert np.allclose(out, o.ket({(1, 0): S2, (0, 1): -S2}), atol=1e-12)


def test_beamsplitter_two_photon_bunching():
    o = om.DenseOracle(("x", "y"), 2)
    u = o.beamsplitter_matrix("x", "y")
    out = u @ o.ket({(1, 1): 1.0})
    assert np.allclose(out, o.ket({(2, 0): S2, (0, 2): -S2}), atol=1e-12)


def test_beamsplitter_applied_twice_is_identity():
    o = om.DenseOracle(("x", "y"), 3)
    rho = o.pure_rho({(2, 1): 1.0})
    twice = o.apply_beamsplitter(o.apply_beamsplitter(rho, "x", "y"), "x", "y")
    assert np.allclose(twice, rho, atol=1e-12)


def test_loss_kraus_completeness():
    o = om.DenseOracle(("x",), 3)
    for t in (0.2, 0.6, 0.95):
        kraus = o.loss_kraus("x", t)
        total = sum(a.conj().T @ a for a in kraus)
        assert np.allclose(total, np.eye(4), atol=1e-12)


def test_loss_single_photon_rho():
    o = om.DenseOracle(("x",), 2)
    rho = o.apply_loss(o.pure_rho({(1,): 1.0}), "x", 0.7)
    assert rho[o.index((1,)), o.index((1,))] == pytest.approx(0.7)
    assert rho[o.index((0,)), o.index((0,))] == pytest.approx(0.3)


def test_loss_coherence_damping():
    # |0><1| coherences damp by sqrt(T)
    o = om.DenseOracle(("x",), 2)
    rho = o.pure_rho({(0,): S2, (1,): S2})
    out = o.apply_loss(rho, "x", 0.49)
    assert out[o.index((0,)), o.index((1,))] == pytest.approx(0.5 * 0.7)


def test_identity_circuit_returns_input():
    o = om.DenseOracle(("x", "y"), 2)
    rho = o.pure_rho({(1, 0): 0.6, (0, 1): 0.8})
    assert o.run_circuit(rho, []) is rho


def test_phase_and_swap_matrices():
    o = om.DenseOracle(("x", "y"), 2)
    single = om.DenseOracle(("x",), 2)
    v = single.phase_matrix("x", math.pi / 2) @ single.ket({(2,): 1.0})
    assert v[single.index((2,))] == pytest.approx(-1.0)
    # the phase shows up on coherences between occupation sectors
    rho = o.pure_rho({(0, 0): S2, (1, 0): S2})
    out = o.apply_phase(rho, "x", math.pi / 2)
    assert out[o.index((0, 0)), o.index((1, 0))] == pytest.approx(0.5 * (-1j), abs=1e-12)
    swapped = o.apply_swap(o.pure_rho({(2, 1): 1.0}), "x", "y")
    assert swapped[o.index((1, 2)), o.index((1, 2))] == pytest.approx(1.0)


def test_tms_vacuum_distribution():
    o = om.DenseOracle(("x", "y"), 4)
    g = 0.1
    rho = o.apply_tms(o.pure_rho({(0, 0): 1.0}), "x", "y", math.atanh(g))
    d = np.real(np.diag(rho))
    base = d[o.index((0, 0))]
    for n in (1, 2):
        assert d[o.index((n, n))] / base == pytest.approx(g ** (2 * n), rel=1e-6)


def test_ptrace_bell_state():
    o = om.DenseOracle(("x", "y"), 1)
    rho = o.pure_rho({(0, 1): S2, (1, 0): S2})
    reduced = o.ptrace(rho, ["x"])
    assert np.allclose(reduced, 0.5 * np.eye(2), atol=1e-12)


def test_threshold_patterns_weights_sum():
    o = om.DenseOracle(("x", "y", "z"), 2)
    rho = o.pure_rho({(1, 0, 1): 0.6, (0, 1, 0): 0.8})
    results = o.threshold_patterns(rho, ["y", "z"])
    assert sum(w for _, w, _, _ in results) == pytest.approx(1.0, abs=1e-12)


def test_ideal_teleport_scenario():
    theta = math.pi / 6
    _, (weights, conds) = om.ideal_teleport(theta, cutoff=2)
    assert weights["plus"] == pytest.approx(0.25, abs=1e-12)
    assert weights["minus"] == pytest.approx(0.25, abs=1e-12)
    assert weights["same_pol"] == pytest.approx(0.0, abs=1e-12)
    assert weights["none"] == pytest.approx(0.5, abs=1e-12)
    mech = om.DenseOracle(("mechA", "mechB"), 2)
    target = mech.ket({(0, 1): math.sin(theta), (1, 0): math.cos(theta)})
    assert mech.fidelity(conds["plus"] / weights["plus"], target) == pytest.approx(1.0, abs=1e-12)


def test_lossy_teleport_scalings():
    theta = 0.9
    _, w_nd, c_nd = om.lossy_teleport(theta, t_nd=0.4)
    assert w_nd["plus"] == pytest.approx(0.4 * 0.25, abs=1e-12)
    _, w_det, c_det = om.lossy_teleport(theta, t_det=0.6)
    assert w_det["plus"] == pytest.approx(0.36 * 0.25, abs=1e-12)
    mech = om.DenseOracle(("mechA", "mechB"), 2)
    target = mech.ket({(0, 1): math.sin(theta), (1, 0): math.cos(theta)})
    for weights, conds in ((w_nd, c_nd), (w_det, c_det)):
        assert mech.fidelity(conds["plus"] / weights["plus"], target) == pytest.approx(
            1.0, abs=1e-12
        )

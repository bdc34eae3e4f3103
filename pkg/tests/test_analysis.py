import math

import numpy as np
import pytest

from optoteleport.analysis import (
    CLASSICAL_FIDELITY_BOUND,
    MECH_PAIR_BASIS,
    component_state,
    fidelity_curve,
    one_loss_sector,
    p_add_closed_form,
    threshold_search,
    two_photon_loss_reference,
    wcs_error_ratios,
)
from optoteleport import oracle as om


def test_p_add_zero_occupation():
    assert p_add_closed_form(0.0, 2) == 0.0
    assert p_add_closed_form(0.0, 1) == 0.0


def test_p_add_reference_points():
    assert p_add_closed_form(0.23, 2) == pytest.approx(0.3303, abs=5e-4)
    assert p_add_closed_form(0.1, 2) == pytest.approx(0.1723, abs=1e-4)


def test_p_add_rejects_bad_arguments():
    with pytest.raises(ValueError):
        p_add_closed_form(-0.1)
    with pytest.raises(ValueError):
        p_add_closed_form(0.1, order=3)


def test_polynomial_identity(rng):
    # (1 + 2s + 3s^2 + 2s^3 + s^4) factorizes as (1 + s + s^2)^2
    for s in rng.uniform(0.0, 1.0, size=1000):
        lhs = 1 + 2 * s + 3 * s**2 + 2 * s**3 + s**4
        rhs = (1 + s + s**2) ** 2
        assert abs(lhs - rhs) < 1e-12
    nbar = 0.31
    s = nbar / (1 + nbar)
    term_sum = (2 * s + 3 * s**2 + 2 * s**3 + s**4) / (1 + 2 * s + 3 * s**2 + 2 * s**3 + s**4)
    assert p_add_closed_form(nbar, 2) == pytest.approx(term_sum, abs=1e-12)


def test_threshold_search_reference_points():
    assert threshold_search(CLASSICAL_FIDELITY_BOUND) == pytest.approx(0.2331, abs=5e-3)
    assert threshold_search(1.0) == pytest.approx(0.0, abs=1e-5)
    assert threshold_search(0.8277) == pytest.approx(0.100, abs=1e-3)


def test_threshold_search_guards():
    with pytest.raises(ValueError):
        threshold_search(0.0)
    with pytest.raises(ValueError):
        threshold_search(0.01)


def test_fidelity_curve_zero_grid():
    (point,) = fidelity_curve([0.0])
    assert point.f_order2 == 1.0
    assert point.f_order1 == 1.0
    assert point.f_sim == pytest.approx(1.0, abs=1e-12)


def test_fidelity_curve_crossing_and_agreement():
    points = fidelity_curve([0.1, 0.2, 0.23, 0.3])
    for p in points:
        assert abs(p.f_sim - p.f_order2) < 1e-9
        assert p.f_order2 + p.p_add_order2 == pytest.approx(1.0, abs=1e-12)
        assert p.f_order2 <= p.f_order1
    # the 2/3 crossing sits at 0.2331, so the two-digit occupation 0.23 lands
    # within the slope-equivalent of that rounding
    at_threshold = points[2]
    assert at_threshold.f_order2 == pytest.approx(2 / 3, abs=3.5e-3)


def test_fidelity_curve_monotone():
    values = [p.f_order2 for p in fidelity_curve(np.linspace(0, 0.5, 6), simulate=False)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_wcs_error_ratios_reference():
    table = wcs_error_ratios(0.1, 0.2)
    assert table["sectors"][(1, 2)] == pytest.approx(0.02)
    assert table["sectors"][(2, 1)] == pytest.approx(0.005)
    assert table["sectors"][(2, 2)] == pytest.approx(1e-4)
    assert table["sectors"][(1, 1)] == 1.0
    assert table["contamination"] == pytest.approx(0.125)


def test_wcs_error_ratios_limits():
    assert wcs_error_ratios(0.1, 0.1)["contamination"] == pytest.approx(0.5)
    assert wcs_error_ratios(1e-6, 0.1)["contamination"] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        wcs_error_ratios(0.0, 0.1)


def test_component_states_norm_and_energy_sectors():
    # each heralded component is unit norm and carries j + k + 1 phonons, so
    # every component with occupied seeds is orthogonal to the ideal one
    theta = 0.7
    states = {(j, k): component_state(j, k, theta) for j in range(3) for k in range(3)}
    from optoteleport.fock import inner_product

    for (j, k), state in states.items():
        assert state.norm_squared == pytest.approx(1.0, abs=1e-12)
        for occ, _ in state.items():
            assert sum(occ) == j + k + 1
        if (j, k) != (0, 0):
            assert abs(inner_product(states[(0, 0)], state)) < 1e-12


def test_two_photon_reference_single_loss_sector():
    # the single-loss sector of the simulated herald is proportional to the
    # corresponding sector of the closed-form reference (ratio one half)
    from conftest import two_photon_loss_oracle

    theta, t = math.pi / 6, 0.5
    _, rho_t, _ = two_photon_loss_oracle(theta, t)
    _, rho_1, _ = two_photon_loss_oracle(theta, 1.0)
    sigma = one_loss_sector(rho_t, rho_1, t)
    ref_full = two_photon_loss_reference(theta, t)
    ref_none = two_photon_loss_reference(theta, 1.0)
    ref_sector = ref_full - t**2 * ref_none  # the single-loss bracket
    r = 1.0 - t
    assert np.allclose(sigma * (2 * r * t), ref_sector, atol=1e-12)
    # a constant multiple across every nonzero element
    mask = np.abs(ref_sector) > 1e-15
    ratios = sigma[mask] / ref_sector[mask]
    assert np.allclose(ratios, 1.0 / (2 * r * t), atol=1e-10)


def test_two_photon_reference_unit_transmittance_is_pure():
    theta = 0.5
    ref = two_photon_loss_reference(theta, 1.0)
    eigvals = np.linalg.eigvalsh(ref)
    assert eigvals[-1] == pytest.approx(0.25, abs=1e-12)
    assert np.all(np.abs(eigvals[:-1]) < 1e-12)
    idx = {occ: i for i, occ in enumerate(MECH_PAIR_BASIS)}
    assert ref[idx[(2, 0)], idx[(0, 2)]] == pytest.approx(
        math.sin(theta) * math.cos(theta) / 4, abs=1e-12
    )

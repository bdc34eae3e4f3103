"""Closed-form results, curve generation, threshold search and verification
bridges between the sparse engine and the dense oracle.

The closed forms live here (not in the protocol) so that simulation results
are always derived by the pipeline and only cross-checked against formulas.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fock import Ensemble, ModeRegistry, PureState
from .protocol import ProtocolConfig, OutcomeClass, run_thermal

CLASSICAL_FIDELITY_BOUND = 2.0 / 3.0


# ------------------------------------------------------------- closed forms

def p_add_closed_form(nbar: float, order: int = 2) -> float:
    """Total weight of unwanted multi-phonon components in the heralded state.

    With s = nbar/(nbar+1): order 2 gives 1 - 1/(1+s+s^2)^2 (equivalently
    (2s+3s^2+2s^3+s^4)/(1+2s+3s^2+2s^3+s^4)), order 1 gives 1 - 1/(1+s)^2.
    """
    if nbar < 0.0:
        raise ValueError("mean occupation must be non-negative")
    if order not in (1, 2):
        raise ValueError("truncation order must be 1 or 2")
    s = nbar / (nbar + 1.0)
    if order == 1:
        return 1.0 - 1.0 / (1.0 + s) ** 2
    return 1.0 - 1.0 / (1.0 + s + s**2) ** 2


def fidelity_closed_form(nbar: float, order: int = 2) -> float:
    return 1.0 - p_add_closed_form(nbar, order)


def component_state(
    j: int,
    k: int,
    theta: float,
    phi: float = 0.0,
    *,
    minus: bool = False,
    labels: Sequence[str] = ("mechA", "mechB"),
    n_max: int = 3,
) -> PureState:
    """Heralded mechanical state for memories starting in |j, k>.

    The pair conversion adds one phonon to whichever arm scattered, so the
    herald leaves e^{i phi} sin(theta)|j, k+1> +/- cos(theta)|j+1, k>.
    """
    registry = ModeRegistry(tuple(labels), n_max)
    sign = -1.0 if minus else 1.0
    return PureState(
        registry,
        {
            (j, k + 1): cmath.exp(1j * phi) * math.sin(theta),
            (j + 1, k): sign * math.cos(theta),
        },
    )


@dataclass
class CurvePoint:
    nbar: float
    f_order2: float
    f_order1: float
    p_add_order2: float
    p_add_order1: float
    f_sim: float | None = None


def fidelity_curve(
    nbar_grid: Iterable[float],
    *,
    simulate: bool = True,
    theta: float = math.pi / 6,
    n_max: int = 3,
) -> list[CurvePoint]:
    """Closed-form (both truncation orders) and simulated heralded fidelity."""
    points = []
    for nbar in nbar_grid:
        if nbar < 0.0:
            raise ValueError("grid values must be non-negative")
        f2 = fidelity_closed_form(nbar, 2)
        f1 = fidelity_closed_form(nbar, 1)
        f_sim = None
        if simulate:
            config = ProtocolConfig(theta=theta, nbar=nbar, n_max=n_max, thermal_order=2)
            report = run_thermal(config)
            f_sim = report.outcomes[OutcomeClass.M_PLUS].fidelity
        points.append(CurvePoint(nbar, f2, f1, 1.0 - f2, 1.0 - f1, f_sim))
    return points


def threshold_search(
    target_fidelity: float = CLASSICAL_FIDELITY_BOUND,
    *,
    order: int = 2,
    tol: float = 1e-6,
    nbar_max: float = 20.0,
) -> float:
    """Mean occupation at which the closed-form fidelity crosses the target.

    Bisection on the monotonically decreasing fidelity; chosen over algebraic
    inversion for robustness.
    """
    if not 0.0 < target_fidelity <= 1.0:
        raise ValueError("target fidelity must lie in (0, 1]")
    if fidelity_closed_form(nbar_max, order) > target_fidelity:
        raise ValueError("target fidelity not reachable within the search range")
    lo, hi = 0.0, nbar_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fidelity_closed_form(mid, order) > target_fidelity:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def wcs_error_ratios(alpha: complex, beta: complex) -> dict:
    """Relative weights of the pulse photon-number sectors that cause errors.

    Ratios are with respect to the single-photon/single-photon sector:
    {(1,2): |b|^2/2, (2,1): |a|^2/2, (2,2): |a|^2 |b|^2 / 4, (1,1): 1}, plus
    the heralded contamination ratio |a|^2 / (2 |b|^2).
    """
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    if a2 == 0.0 or b2 == 0.0:
        raise ValueError("both pulse amplitudes must be nonzero")
    return {
        "sectors": {
            (1, 2): b2 / 2.0,
            (2, 1): a2 / 2.0,
            (2, 2): a2 * b2 / 4.0,
            (1, 1): 1.0,
        },
        "contamination": a2 / (2.0 * b2),
    }


# ----------------------------------------------- lossy two-photon reference

MECH_PAIR_BASIS = tuple((a, b) for a in range(3) for b in range(3))


def two_photon_loss_reference(theta: float, transmittance: float) -> np.ndarray:
    """Closed-form reference matrix for the two-photon-pump lossy herald.

    Structure: (T^2 |w><w| + 2RT (|u1><u1| + |u2><u2|)) / 4 with
    w  = cos|20> + sin|02>,  u1 = cos|20> + sin|11>,  u2 = sin|02> + cos|11>
    over the mechanical pair basis.  This treats the no-loss events as if the
    two same-polarization photons were resolved onto separate detectors; the
    simulated pipeline with threshold detectors instead bunches them onto one
    detector, so only the single-loss (RT) sector of this reference is
    proportional to the pipeline output (see ``one_loss_sector``).
    """
    t = float(transmittance)
    r = 1.0 - t
    dim = len(MECH_PAIR_BASIS)
    idx = {occ: i for i, occ in enumerate(MECH_PAIR_BASIS)}
    w = np.zeros(dim, dtype=complex)
    u1 = np.zeros(dim, dtype=complex)
    u2 = np.zeros(dim, dtype=complex)
    w[idx[(2, 0)]] = math.cos(theta)
    w[idx[(0, 2)]] = math.sin(theta)
    u1[idx[(2, 0)]] = math.cos(theta)
    u1[idx[(1, 1)]] = math.sin(theta)
    u2[idx[(0, 2)]] = math.sin(theta)
    u2[idx[(1, 1)]] = math.cos(theta)
    out = t**2 * np.outer(w, w.conj())
    out += 2.0 * r * t * (np.outer(u1, u1.conj()) + np.outer(u2, u2.conj()))
    return out / 4.0


def one_loss_sector(rho_at_t: np.ndarray, rho_no_loss: np.ndarray, transmittance: float) -> np.ndarray:
    """Extract the exactly-one-photon-lost sector of the heralded matrix.

    The surviving-pair events scale as T^2 relative to the lossless run, so
    sigma = (rho(T) - T^2 rho(1)) / (T R) isolates the single-loss sector.
    """
    t = float(transmittance)
    r = 1.0 - t
    if r == 0.0:
        raise ValueError("no loss sector at unit transmittance")
    return (rho_at_t - t**2 * rho_no_loss) / (t * r)


# --------------------------------------------------------- dense-side bridge

def state_to_dense_vector(state: PureState) -> np.ndarray:
    """Embed a sparse pure state in the dense basis of its registry.

    The basis index is row-major over the per-mode dimensions (cutoff + 1),
    matching :class:`optoteleport.oracle.DenseOracle`.
    """
    dims = tuple(c + 1 for c in state.registry.cutoffs)
    vec = np.zeros(int(np.prod(dims)) if dims else 1, dtype=complex)
    for occ, amp in state.items():
        index = 0
        for n, d in zip(occ, dims):
            index = index * d + n
        vec[index] = amp
    return vec


def ensemble_to_density_matrix(ensemble: Ensemble) -> np.ndarray:
    """Dense density matrix sum_i w_i |b_i><b_i| of a sparse ensemble."""
    dims = tuple(c + 1 for c in ensemble.registry.cutoffs)
    dim = int(np.prod(dims)) if dims else 1
    rho = np.zeros((dim, dim), dtype=complex)
    for weight, branch in ensemble.branches:
        vec = state_to_dense_vector(branch)
        rho += weight * np.outer(vec, vec.conj())
    return rho

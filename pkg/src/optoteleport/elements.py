"""Optical and optomechanical circuit primitives.

Beamsplitters, phase shifters, photon-loss channels, the pulsed
optomechanical interactions (pair creation for blue detuning, state swap for
red detuning) and state preparation helpers.  All functions are pure maps on
sparse states; anything non-unitary returns an :class:`~optoteleport.fock.Ensemble`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

from .fock import (
    CutoffError,
    Ensemble,
    ModeRegistry,
    PureState,
    as_ensemble,
    basis_state,
)

TMS_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class LossSpec:
    """Linear loss as a fictitious beamsplitter tapping off the mode.

    ``transmittance`` is the survival probability of each photon; the
    reflected fraction is traced out as the loss.
    """

    transmittance: float

    def __post_init__(self):
        if not 0.0 < self.transmittance <= 1.0:
            raise ValueError(f"transmittance must be in (0, 1], got {self.transmittance}")

    @property
    def reflectance(self) -> float:
        return 1.0 - self.transmittance


class InteractionModel(Enum):
    """How blue-detuned pulses convert into phonon/Stokes pairs.

    PAPER: each pump photon deterministically becomes exactly one pair with
    no bosonic enhancement factors; reproduces all closed-form results.
    FULL_TMS: the complete two-mode-squeezing operator including sqrt(n+1)
    ladder factors; physically complete, for comparison studies.
    """

    PAPER = "paper"
    FULL_TMS = "full_tms"


@dataclass(frozen=True)
class InteractionSpec:
    model: InteractionModel = InteractionModel.PAPER
    r: float = 0.0  # squeeze parameter, FULL_TMS only
    max_order: int | None = None  # cap on created pairs; None = cutoff-limited

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("squeeze parameter must be non-negative")
        if self.max_order is not None and self.max_order < 1:
            raise ValueError("max_order must be at least 1")


# --------------------------------------------------------------------- linear

@lru_cache(maxsize=None)
def _bs_coefficients(m: int, n: int) -> tuple[tuple[int, int, float], ...]:
    """Amplitudes for |m, n> through the 50/50 splitter.

    Convention (fixed project-wide, also used by the Bell analyzer and the
    dense oracle): mode1's creation operator maps to (out1 + out2)/sqrt(2)
    and mode2's to (out1 - out2)/sqrt(2), outputs occupying the input slots.
    """
    total = m + n
    out = []
    for p in range(total + 1):
        q = total - p
        c = 0
        for a in range(max(0, p - n), min(m, p) + 1):
            b = p - a
            c += math.comb(m, a) * math.comb(n, b) * (-1) ** (n - b)
        if c:
            amp = (
                c
                * math.sqrt(math.factorial(p) * math.factorial(q) / (math.factorial(m) * math.factorial(n)))
                / 2 ** (total / 2)
            )
            out.append((p, q, amp))
    return tuple(out)


def beamsplitter(state: PureState, mode1: str, mode2: str) -> PureState:
    """50/50 beamsplitter between two modes, applied in place.

    Raises :class:`CutoffError` if any populated output occupation would
    exceed a cutoff; truncation is never silent.
    """
    registry = state.registry
    i, j = registry.index(mode1), registry.index(mode2)
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    c1, c2 = registry.cutoffs[i], registry.cutoffs[j]

    def expand(occ, amp):
        m, n = occ[i], occ[j]
        for p, q, coeff in _bs_coefficients(m, n):
            if p > c1 or q > c2:
                raise CutoffError(
                    f"beamsplitter output |{p},{q}> on ({mode1!r},{mode2!r}) exceeds cutoffs ({c1},{c2})"
                )
            new = list(occ)
            new[i], new[j] = p, q
            yield tuple(new), amp * coeff

    return state.map_terms(expand)


def phase_shift(state: PureState, mode: str, phi: float) -> PureState:
    """Multiply each term by exp(i phi n) with n the mode's occupation."""
    idx = state.registry.index(mode)
    return state.map_terms(lambda occ, amp: [(occ, amp * cmath.exp(1j * phi * occ[idx]))])


def state_swap(state: PureState, mode_x: str, mode_y: str) -> PureState:
    """Perfect swap of two modes' occupations (red-detuned readout interaction).

    An imperfect readout is modeled by composing with :func:`loss_channel`.
    """
    registry = state.registry
    i, j = registry.index(mode_x), registry.index(mode_y)
    if registry.cutoffs[i] != registry.cutoffs[j]:
        raise CutoffError(f"swap requires equal cutoffs on {mode_x!r} and {mode_y!r}")

    def expand(occ, amp):
        new = list(occ)
        new[i], new[j] = occ[j], occ[i]
        yield tuple(new), amp

    return state.map_terms(expand)


def loss_channel(state: PureState | Ensemble, mode: str, spec: LossSpec | float) -> Ensemble:
    """Photon loss on one mode as a sum over Kraus branches.

    Branch m (m photons lost) maps |n> to sqrt(C(n,m)) T^((n-m)/2) R^(m/2)
    |n-m>; the total ensemble weight is preserved.
    """
    if not isinstance(spec, LossSpec):
        spec = LossSpec(float(spec))
    t, r = spec.transmittance, spec.reflectance

    def channel(pure: PureState) -> Ensemble:
        registry = pure.registry
        idx = registry.index(mode)
        if t == 1.0:
            return Ensemble.from_pure(pure)
        max_n = max((occ[idx] for occ, _ in pure.items()), default=0)
        collected = []
        for m in range(max_n + 1):
            terms = {}
            for occ, amp in pure.items():
                n = occ[idx]
                if n < m:
                    continue
                coeff = math.sqrt(math.comb(n, m)) * t ** ((n - m) / 2.0) * r ** (m / 2.0)
                new = list(occ)
                new[idx] = n - m
                terms[tuple(new)] = amp * coeff
            sub = PureState(registry, terms)
            if not sub.is_zero():
                collected.append((sub.norm_squared, sub.normalized()))
        return Ensemble(registry, collected)

    return as_ensemble(state).map_channel(channel)


# ------------------------------------------------------------- optomechanics

def generate_epr_paper_model(
    state: PureState,
    blue_a: str,
    blue_b: str,
    mech_a: str,
    mech_b: str,
    stokes_h: str,
    stokes_v: str,
) -> PureState:
    """Convert every pump photon into one phonon/Stokes pair, per path.

    A pump photon in path A adds one excitation to (mech_a, stokes_h), one in
    path B to (mech_b, stokes_v); amplitudes are carried over unchanged (no
    sqrt(n+1) enhancement) and the pump modes end in vacuum.  Apply after
    splitting the pump on ``beamsplitter(blue_a, blue_b)``.
    """
    registry = state.registry
    ia, ib = registry.index(blue_a), registry.index(blue_b)
    ima, imb = registry.index(mech_a), registry.index(mech_b)
    ih, iv = registry.index(stokes_h), registry.index(stokes_v)

    def expand(occ, amp):
        na, nb = occ[ia], occ[ib]
        new = list(occ)
        new[ia] = new[ib] = 0
        new[ima] += na
        new[ih] += na
        new[imb] += nb
        new[iv] += nb
        for pos in (ima, ih, imb, iv):
            if new[pos] > registry.cutoffs[pos]:
                raise CutoffError(
                    f"pair conversion exceeds cutoff on mode {registry.labels[pos]!r}"
                )
        yield tuple(new), amp

    return state.map_terms(expand)


def two_mode_squeeze(state: PureState, optical: str, mech: str, spec: InteractionSpec) -> PureState:
    """Two-mode squeezing exp(r (a†b† - ab)) on (optical, mech), truncated.

    Uses the normal-ordered decomposition
    exp(G a†b†) cosh(r)^-(n_a+n_b+1) exp(-G ab) with G = tanh r, which is
    exact below the cutoff.  The result is renormalized; a warning reports
    the truncated tail when it exceeds ``TMS_TAIL_TOL``.
    """
    if spec.model is not InteractionModel.FULL_TMS:
        raise ValueError("two_mode_squeeze requires the FULL_TMS interaction model")
    registry = state.registry
    ia, ib = registry.index(optical), registry.index(mech)
    ca, cb = registry.cutoffs[ia], registry.cutoffs[ib]
    g = math.tanh(spec.r)
    cosh_r = math.cosh(spec.r)
    if g == 0.0:
        return state

    tail_estimate = 0.0

    def expand(occ, amp):
        nonlocal tail_estimate
        p0, q0 = occ[ia], occ[ib]
        # exp(-G ab)
        lowered = []
        for k in range(min(p0, q0) + 1):
            coeff = (
                (-g) ** k
                / math.factorial(k)
                * math.sqrt(math.factorial(p0) / math.factorial(p0 - k))
                * math.sqrt(math.factorial(q0) / math.factorial(q0 - k))
            )
            lowered.append((p0 - k, q0 - k, coeff))
        for p, q, coeff in lowered:
            coeff /= cosh_r ** (p + q + 1)
            # exp(G a†b†), truncated by the cutoffs and the configured order
            j_max = min(ca - p, cb - q)
            if spec.max_order is not None:
                j_max = min(j_max, spec.max_order)
            for jj in range(j_max + 1):
                raise_coeff = (
                    g ** jj
                    / math.factorial(jj)
                    * math.sqrt(math.factorial(p + jj) / math.factorial(p))
                    * math.sqrt(math.factorial(q + jj) / math.factorial(q))
                )
                new = list(occ)
                new[ia], new[ib] = p + jj, q + jj
                yield tuple(new), amp * coeff * raise_coeff
            # first dropped term, for the tail report
            jj = j_max + 1
            dropped = (
                g ** jj
                / math.factorial(jj)
                * math.sqrt(math.factorial(p + jj) / math.factorial(p))
                * math.sqrt(math.factorial(q + jj) / math.factorial(q))
            )
            tail_estimate += abs(amp * coeff * dropped) ** 2

    squeezed = state.map_terms(expand)
    deviation = abs(squeezed.norm_squared - state.norm_squared)
    if tail_estimate > TMS_TAIL_TOL or deviation > TMS_TAIL_TOL:
        warnings.warn(
            f"two_mode_squeeze truncation tail ~{max(tail_estimate, deviation):.2e} "
            f"exceeds {TMS_TAIL_TOL:.0e}; increase cutoffs or reduce r",
            stacklevel=2,
        )
    scale = math.sqrt(state.norm_squared / squeezed.norm_squared)
    return PureState(registry, {o: a * scale for o, a in squeezed.items()})


# ---------------------------------------------------------------- preparation

def prepare_thermal(
    nbar: float,
    cutoff: int,
    mode: str,
    *,
    renormalized: bool = False,
    n_max: int | None = None,
) -> Ensemble:
    """Single-mode thermal ensemble with mean occupation ``nbar``.

    Weights are proportional to s^n with s = nbar/(nbar+1).  With
    ``renormalized=False`` the truncated weights (1-s) s^n are kept as-is
    (total weight below one); with ``renormalized=True`` they are rescaled to
    sum to one.
    """
    if nbar < 0.0:
        raise ValueError("mean occupation must be non-negative")
    n_max = cutoff if n_max is None else n_max
    if cutoff > n_max:
        raise CutoffError(f"thermal cutoff {cutoff} exceeds mode cutoff {n_max}")
    registry = ModeRegistry((mode,), n_max)
    s = nbar / (nbar + 1.0)
    raw = [s**n for n in range(cutoff + 1)]
    if renormalized:
        total = sum(raw)
        weights = [w / total for w in raw]
    else:
        weights = [(1.0 - s) * w for w in raw]
    return Ensemble(registry, [(w, basis_state(registry, (n,))) for n, w in enumerate(weights)])


def prepare_coherent_truncated(amplitude: complex, order: int, mode: str, *, n_max: int = 3) -> PureState:
    """Weak-pulse expansion |0> + a|1> + (a^2/sqrt(2))|2>, unnormalized.

    Valid for |amplitude| well below one; warns above 0.3.  Orders above two
    are unsupported by this approximation.
    """
    if order not in (1, 2):
        raise ValueError("truncated coherent expansion supports order 1 or 2 only")
    if abs(amplitude) > 0.3:
        warnings.warn(
            f"|amplitude| = {abs(amplitude):.3g} is large for a truncated weak-pulse expansion",
            stacklevel=2,
        )
    registry = ModeRegistry((mode,), n_max)
    terms = {(0,): 1.0 + 0.0j, (1,): complex(amplitude)}
    if order == 2:
        terms[(2,)] = complex(amplitude) ** 2 / math.sqrt(2.0)
    return PureState(registry, terms)


def prepare_input_qubit(
    theta: float,
    phi: float = 0.0,
    *,
    labels: Sequence[str] = ("H1", "V1"),
    n_max: int = 3,
) -> PureState:
    """Polarization qubit cos(theta)|01> + e^{i phi} sin(theta)|10> on (H, V)."""
    registry = ModeRegistry(tuple(labels), n_max)
    return PureState(
        registry,
        {
            (0, 1): math.cos(theta),
            (1, 0): cmath.exp(1j * phi) * math.sin(theta),
        },
    )


def prepare_polarized_pulse(
    amplitude: complex,
    order: int,
    theta: float,
    phi: float = 0.0,
    *,
    labels: Sequence[str] = ("H1", "V1"),
    n_max: int = 4,
) -> PureState:
    """Weak pulse split over two polarization modes, unnormalized.

    The n-photon component distributes binomially with amplitudes
    sqrt(C(n,k)) (e^{i phi} sin)^k cos^{n-k} over |k, n-k>_{HV}; the pulse
    expansion itself is truncated like :func:`prepare_coherent_truncated`.
    """
    if order not in (1, 2):
        raise ValueError("truncated pulse expansion supports order 1 or 2 only")
    if abs(amplitude) > 0.3:
        warnings.warn(
            f"|amplitude| = {abs(amplitude):.3g} is large for a truncated weak-pulse expansion",
            stacklevel=2,
        )
    registry = ModeRegistry(tuple(labels), n_max)
    alpha_h = cmath.exp(1j * phi) * math.sin(theta)
    alpha_v = math.cos(theta)
    amp = complex(amplitude)
    pulse_coeff = {0: 1.0 + 0.0j, 1: amp, 2: amp**2 / math.sqrt(2.0)}
    terms: dict[tuple, complex] = {}
    for n in range(order + 1):
        for k in range(n + 1):
            coeff = pulse_coeff[n] * math.sqrt(math.comb(n, k)) * alpha_h**k * alpha_v ** (n - k)
            occ = (k, n - k)
            terms[occ] = terms.get(occ, 0.0 + 0.0j) + coeff
    return PureState(registry, terms)

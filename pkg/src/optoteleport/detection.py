"""PBS routing, threshold detection and Bell-pattern classification.

The Bell analyzer mixes the memory output (port 2, modes H2/V2) with the
input photon (port 1, modes H1/V1) on a 50/50 beamsplitter per polarization
and routes each output through a polarizing splitter onto four threshold
detectors.  With the project beamsplitter convention the detector modes
occupy the input slots:

    cH <- H1 slot      cV <- V1 slot       (same side of the splitter)
    dH <- H2 slot      dV <- V2 slot       (other side)

A coincidence of orthogonal polarizations on the same side heralds the
"plus" Bell outcome, on opposite sides the "minus" outcome; same-polarization
coincidences are identified and discarded, everything else is not a herald.
Threshold detectors click on one or more photons and never resolve number.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .fock import (
    Ensemble,
    FockStateError,
    PureState,
    as_ensemble,
    trace_out,
)
from .elements import LossSpec, beamsplitter, loss_channel

# Mode labels consumed by the Bell analyzer, in detector order (cH, cV, dH, dV).
BELL_INPUT_PORT = ("H1", "V1")
BELL_MEMORY_PORT = ("H2", "V2")
BELL_DETECTOR_MODES = ("H1", "V1", "H2", "V2")

WEIGHT_SUM_TOL = 1e-10


class InvariantError(FockStateError):
    """An internal bookkeeping invariant failed (probability leak etc.)."""


class ClickPattern(NamedTuple):
    c_h: bool
    c_v: bool
    d_h: bool
    d_v: bool

    @property
    def num_clicks(self) -> int:
        return int(self.c_h) + int(self.c_v) + int(self.d_h) + int(self.d_v)

    def __str__(self) -> str:
        names = ("cH", "cV", "dH", "dV")
        on = [n for n, c in zip(names, self) if c]
        return "+".join(on) if on else "none"


class OutcomeClass(Enum):
    M_PLUS = "MPlus"
    M_MINUS = "MMinus"
    SAME_POL_DISCARD = "SamePolDiscard"
    NOT_HERALD = "NotHerald"


def classify_pattern(pattern: ClickPattern) -> OutcomeClass:
    """Total classification of the sixteen click patterns."""
    if pattern.num_clicks != 2:
        return OutcomeClass.NOT_HERALD
    if (pattern.c_h and pattern.c_v) or (pattern.d_h and pattern.d_v):
        return OutcomeClass.M_PLUS
    if (pattern.c_v and pattern.d_h) or (pattern.c_h and pattern.d_v):
        return OutcomeClass.M_MINUS
    # remaining double clicks: cH+dH or cV+dV
    return OutcomeClass.SAME_POL_DISCARD


@dataclass
class HeraldedResult:
    """One detector pattern with its class, probability weight and the
    normalized conditional ensemble over the remaining (memory) modes."""

    pattern: ClickPattern
    outcome: OutcomeClass
    weight: float
    conditional: Ensemble


def threshold_measure(
    state: PureState | Ensemble, detector_modes: Sequence[str]
) -> list[tuple[tuple[bool, ...], float, Ensemble]]:
    """Project onto all 2^k click patterns of threshold detectors.

    For each pattern the per-mode projectors are |0><0| (no click) and
    1 - |0><0| (click); the detector modes are then traced out.  Returns
    (clicks, weight, normalized conditional ensemble) for every pattern;
    weights sum to the input weight.
    """
    ens = as_ensemble(state)
    registry = ens.registry
    idx = [registry.index(m) for m in detector_modes]
    k = len(idx)

    collected: dict[tuple, list] = {
        clicks: [] for clicks in itertools.product((False, True), repeat=k)
    }
    for weight, branch in ens.branches:
        split: dict[tuple, dict] = {}
        for occ, amp in branch.items():
            clicks = tuple(occ[i] >= 1 for i in idx)
            split.setdefault(clicks, {})[occ] = amp
        for clicks, terms in split.items():
            collected[clicks].append((weight, PureState(registry, terms)))

    results = []
    for clicks in itertools.product((False, True), repeat=k):
        branches = []
        pattern_weight = 0.0
        for weight, projected in collected[clicks]:
            n2 = projected.norm_squared
            if n2 <= 0.0:
                continue
            pattern_weight += weight * n2
            sub = trace_out(projected.normalized(), detector_modes)
            branches.extend((weight * n2 * bw, bs) for bw, bs in sub.branches)
        reduced_registry = registry.subset(
            m for m in registry.labels if m not in set(detector_modes)
        )
        conditional = Ensemble(reduced_registry, branches)
        if pattern_weight > 0.0:
            conditional = conditional.normalized()
        results.append((clicks, pattern_weight, conditional))

    total = sum(w for _, w, _ in results)
    if abs(total - ens.total_weight) > WEIGHT_SUM_TOL * max(1.0, ens.total_weight):
        raise InvariantError(
            f"pattern weights sum to {total}, input weight {ens.total_weight}"
        )
    return results


def bell_measurement(
    joint: PureState | Ensemble,
    *,
    detector_loss: LossSpec | float | None = None,
) -> list[HeraldedResult]:
    """Full Bell-state analysis of a joint memory + optical state.

    Applies the 50/50 beamsplitter per polarization (H1 with H2, V1 with V2),
    optionally a loss channel on each of the four detector modes (detector
    inefficiency), then threshold detection and pattern classification.
    Returns all sixteen patterns with conditional ensembles over the
    remaining modes.
    """
    ens = as_ensemble(joint)
    for mode in BELL_DETECTOR_MODES:
        if mode not in ens.registry.labels:
            raise KeyError(f"joint state is missing Bell analyzer mode {mode!r}")

    mixed = ens.map_pure(
        lambda s: beamsplitter(
            beamsplitter(s, BELL_INPUT_PORT[0], BELL_MEMORY_PORT[0]),
            BELL_INPUT_PORT[1],
            BELL_MEMORY_PORT[1],
        )
    )
    if detector_loss is not None:
        spec = detector_loss if isinstance(detector_loss, LossSpec) else LossSpec(float(detector_loss))
        if spec.transmittance != 1.0:
            for mode in BELL_DETECTOR_MODES:
                mixed = loss_channel(mixed, mode, spec)

    results = []
    for clicks, weight, conditional in threshold_measure(mixed, BELL_DETECTOR_MODES):
        pattern = ClickPattern(*clicks)
        results.append(
            HeraldedResult(pattern, classify_pattern(pattern), weight, conditional)
        )
    return results


def apply_dark_counts(results: Sequence[HeraldedResult], p_dark: float) -> list[HeraldedResult]:
    """Convolve pattern weights with independent per-detector false clicks.

    A silent detector clicks with probability ``p_dark``; genuine clicks are
    never erased, and a dark count does not alter the conditional state, so
    each new pattern's conditional is the weight-mixture of its origins.
    """
    if not 0.0 <= p_dark < 1.0:
        raise ValueError("dark-count probability must lie in [0, 1)")
    if p_dark == 0.0:
        return list(results)

    weights: dict[ClickPattern, float] = {}
    mixtures: dict[ClickPattern, list] = {}
    registry = None
    for res in results:
        registry = res.conditional.registry
        if res.weight == 0.0:
            continue
        silent = [i for i, clicked in enumerate(res.pattern) if not clicked]
        for extra in itertools.product((False, True), repeat=len(silent)):
            prob = 1.0
            new = list(res.pattern)
            for pos, flips in zip(silent, extra):
                prob *= p_dark if flips else (1.0 - p_dark)
                if flips:
                    new[pos] = True
            target = ClickPattern(*new)
            weights[target] = weights.get(target, 0.0) + res.weight * prob
            mixtures.setdefault(target, []).append((res.weight * prob, res.conditional))

    out = []
    for clicks in itertools.product((False, True), repeat=4):
        pattern = ClickPattern(*clicks)
        weight = weights.get(pattern, 0.0)
        branches = []
        if weight > 0.0:
            for w, cond in mixtures[pattern]:
                branches.extend(((w / weight) * bw, bs) for bw, bs in cond.branches)
        conditional = Ensemble(registry, branches)
        out.append(HeraldedResult(pattern, classify_pattern(pattern), weight, conditional))
    return out


def class_weights(results: Sequence[HeraldedResult]) -> dict[OutcomeClass, float]:
    """Total weight per outcome class."""
    totals = {cls: 0.0 for cls in OutcomeClass}
    for res in results:
        totals[res.outcome] += res.weight
    return totals


def class_conditional(results: Sequence[HeraldedResult], outcome: OutcomeClass) -> tuple[float, Ensemble]:
    """Aggregate weight and normalized conditional ensemble of one class."""
    picked = [r for r in results if r.outcome is outcome]
    weight = sum(r.weight for r in picked)
    registry = picked[0].conditional.registry if picked else None
    branches = []
    if weight > 0.0:
        for r in picked:
            if r.weight == 0.0:
                continue
            branches.extend(((r.weight / weight) * bw, bs) for bw, bs in r.conditional.branches)
    if registry is None:
        raise ValueError("no results supplied")
    return weight, Ensemble(registry, branches).compact()

"""End-to-end teleportation scenarios.

Each run composes the same pipeline: a pump pulse is split over two paths,
converted into phonon/Stokes pairs by the optomechanical devices, the Stokes
light (path A in H polarization, path B in V) meets the input photon on the
Bell analyzer, and the heralded mechanical state is classified, summarized
and compared against the ideal teleported state.

Scenario variants add thermal initial occupation of the mechanical modes,
weak-coherent-state pulses enumerated photon-sector by photon-sector, and
linear losses before the analyzer or at the detectors.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

from .fock import (
    Ensemble,
    ModeRegistry,
    PureState,
    basis_state,
    drop_vacuum_modes,
    fidelity,
    tensor,
)
from .elements import (
    InteractionModel,
    InteractionSpec,
    beamsplitter,
    generate_epr_paper_model,
    loss_channel,
    phase_shift,
    prepare_coherent_truncated,
    prepare_input_qubit,
    prepare_thermal,
    state_swap,
    two_mode_squeeze,
)
from .detection import (
    HeraldedResult,
    OutcomeClass,
    apply_dark_counts,
    bell_measurement,
    class_conditional,
)

MECH_A, MECH_B = "mechA", "mechB"
STOKES_H, STOKES_V = "H2", "V2"
INPUT_H, INPUT_V = "H1", "V1"
BLUE_A, BLUE_B = "blueA", "blueB"
READOUT_A, READOUT_B = "roA", "roB"


class ConfigError(ValueError):
    """A scenario configuration is invalid or inconsistent with the run."""


class LossScenario(Enum):
    NON_DETECTION = "nondetection"
    DETECTION = "detection"
    BLUE_TWO_PHOTON = "blue_two_photon"


_MODELS = ("paper", "full_tms")
_THERMAL_NORMS = ("paper", "renorm")

# JSON config keys <-> dataclass fields
_CONFIG_KEYS = {
    "theta": "theta",
    "phi": "phi",
    "nbar": "nbar",
    "alpha": "alpha",
    "beta": "beta",
    "T_nd": "t_nd",
    "T_det": "t_det",
    "p_dark": "p_dark",
    "n_max": "n_max",
    "model": "model",
    "thermal_order": "thermal_order",
    "thermal_norm": "thermal_norm",
}


@dataclass(frozen=True)
class ProtocolConfig:
    """All scenario knobs.

    ``alpha`` is the pump (blue-detuned) pulse amplitude and ``beta`` the
    input (resonant) pulse amplitude for weak-coherent-state runs; for the
    full two-mode-squeezing model ``|alpha|`` doubles as the pair amplitude
    tanh(r).  ``nbar`` is the residual mean thermal occupation of each
    mechanical mode, absorbing any readout-pulse heating.
    """

    theta: float = math.pi / 6
    phi: float = 0.0
    nbar: float = 0.0
    alpha: complex = 0.1
    beta: complex = 0.2
    t_nd: float = 1.0
    t_det: float = 1.0
    p_dark: float = 0.0
    n_max: int = 3
    model: str = "paper"
    thermal_order: int = 2
    thermal_norm: str = "paper"

    def validate(self) -> "ProtocolConfig":
        if self.nbar < 0.0:
            raise ConfigError("nbar must be non-negative")
        if not 0.0 < self.t_nd <= 1.0:
            raise ConfigError("T_nd must lie in (0, 1]")
        if not 0.0 < self.t_det <= 1.0:
            raise ConfigError("T_det must lie in (0, 1]")
        if not 0.0 <= self.p_dark < 1.0:
            raise ConfigError("p_dark must lie in [0, 1)")
        if self.n_max < 2:
            raise ConfigError("n_max must be at least 2")
        if self.model not in _MODELS:
            raise ConfigError(f"model must be one of {_MODELS}")
        if self.thermal_order not in (1, 2):
            raise ConfigError("thermal_order must be 1 or 2")
        if self.thermal_order == 2 and self.n_max < 3:
            raise ConfigError("order-2 thermal truncation needs n_max >= 3")
        if self.thermal_norm not in _THERMAL_NORMS:
            raise ConfigError(f"thermal_norm must be one of {_THERMAL_NORMS}")
        return self

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProtocolConfig":
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, name in _CONFIG_KEYS.items():
            if key not in data:
                continue
            value = data[key]
            if name in ("alpha", "beta") and isinstance(value, (list, tuple)):
                value = complex(value[0], value[1])
            kwargs[name] = value
        return cls(**kwargs).validate()

    def to_dict(self) -> dict:
        out = {}
        for key, name in _CONFIG_KEYS.items():
            value = getattr(self, name)
            if isinstance(value, complex):
                value = value.real if value.imag == 0.0 else [value.real, value.imag]
            out[key] = value
        return out


@dataclass
class OutcomeSummary:
    """Per-class herald weight, normalized conditional state and its overlap
    with the ideal teleported state (``p_add`` is the complementary weight of
    unwanted components)."""

    weight: float
    conditional: Ensemble
    fidelity: float | None = None
    p_add: float | None = None


@dataclass
class TeleportReport:
    scenario: str
    config: ProtocolConfig
    outcomes: dict[OutcomeClass, OutcomeSummary]
    patterns: list[HeraldedResult]
    details: dict = field(default_factory=dict)


def target_state(
    theta: float,
    phi: float = 0.0,
    outcome: OutcomeClass = OutcomeClass.M_PLUS,
    *,
    registry: ModeRegistry | None = None,
    n_max: int = 3,
) -> PureState:
    """Ideal teleported state on the mechanical modes.

    The "plus" herald leaves e^{i phi} sin(theta)|01> + cos(theta)|10>
    (amplitudes exchanged relative to the input qubit); the "minus" herald
    carries a pi phase on the second term.
    """
    if registry is None:
        registry = ModeRegistry((MECH_A, MECH_B), n_max)
    sign = {OutcomeClass.M_PLUS: 1.0, OutcomeClass.M_MINUS: -1.0}[outcome]
    return PureState(
        registry,
        {
            (0, 1): cmath.exp(1j * phi) * math.sin(theta),
            (1, 0): sign * math.cos(theta),
        },
    )


# ------------------------------------------------------------------ pipeline

def _pumped_memory(
    n_pump: int,
    mech_occ: tuple[int, int],
    mech_cutoff: int,
    optical_cutoff: int,
) -> PureState:
    """Memory + Stokes state after pumping with an n-photon pulse.

    The pump enters path A of the splitter; each scattered photon leaves one
    phonon in its path's device and one Stokes photon in that path's
    polarization (A -> H, B -> V).  Spent pump modes are dropped.
    """
    cutoffs = {
        BLUE_A: max(n_pump, 1),
        BLUE_B: max(n_pump, 1),
        MECH_A: mech_cutoff,
        MECH_B: mech_cutoff,
        STOKES_H: optical_cutoff,
        STOKES_V: optical_cutoff,
    }
    registry = ModeRegistry((BLUE_A, BLUE_B, MECH_A, MECH_B, STOKES_H, STOKES_V), cutoffs)
    state = basis_state(registry, {BLUE_A: n_pump, MECH_A: mech_occ[0], MECH_B: mech_occ[1]})
    if n_pump:
        state = beamsplitter(state, BLUE_A, BLUE_B)
        state = generate_epr_paper_model(state, BLUE_A, BLUE_B, MECH_A, MECH_B, STOKES_H, STOKES_V)
    return drop_vacuum_modes(state, (BLUE_A, BLUE_B))


def _analyze(joint: PureState | Ensemble, config: ProtocolConfig) -> list[HeraldedResult]:
    """Propagation loss, Bell analysis, detector loss and dark counts."""
    state: PureState | Ensemble = joint
    if config.t_nd != 1.0:
        state = loss_channel(state, STOKES_H, config.t_nd)
        state = loss_channel(state, STOKES_V, config.t_nd)
    results = bell_measurement(state, detector_loss=config.t_det if config.t_det != 1.0 else None)
    return apply_dark_counts(results, config.p_dark)


def _merge_results(weighted: Sequence[tuple[float, Sequence[HeraldedResult]]]) -> list[HeraldedResult]:
    """Combine per-branch Bell analyses into one list over the 16 patterns.

    Every entry must enumerate the same patterns in the same order, which the
    analyzer guarantees.
    """
    if not weighted:
        raise ValueError("nothing to merge")
    template = weighted[0][1]
    registry = template[0].conditional.registry
    merged = []
    for i, sample in enumerate(template):
        weight = 0.0
        entries = []
        for scale, results in weighted:
            res = results[i]
            if res.pattern != sample.pattern:
                raise ValueError("pattern order mismatch while merging results")
            w = scale * res.weight
            if w > 0.0:
                weight += w
                entries.append((w, res.conditional))
        branches = []
        if weight > 0.0:
            for w, cond in entries:
                branches.extend(((w / weight) * bw, bs) for bw, bs in cond.branches)
        merged.append(
            HeraldedResult(sample.pattern, sample.outcome, weight, Ensemble(registry, branches))
        )
    return merged


def _summarize(
    results: Sequence[HeraldedResult], theta: float, phi: float
) -> dict[OutcomeClass, OutcomeSummary]:
    outcomes = {}
    for cls in OutcomeClass:
        weight, conditional = class_conditional(results, cls)
        fid = p_add = None
        if cls in (OutcomeClass.M_PLUS, OutcomeClass.M_MINUS) and weight > 0.0:
            target = target_state(theta, phi, cls, registry=conditional.registry)
            fid = fidelity(conditional, target)
            p_add = 1.0 - fid
        outcomes[cls] = OutcomeSummary(weight, conditional, fid, p_add)
    return outcomes


# ------------------------------------------------------------------ scenarios

def run_ideal(config: ProtocolConfig) -> TeleportReport:
    """Single-photon pump and input, ground-state memory, no loss."""
    config.validate()
    if config.nbar != 0.0:
        raise ConfigError("ideal run requires nbar = 0")
    if config.t_nd != 1.0 or config.t_det != 1.0:
        raise ConfigError("ideal run requires unit transmittances")
    if config.model != "paper":
        raise ConfigError("ideal run uses the pair-conversion model")
    memory = _pumped_memory(1, (0, 0), config.n_max, config.n_max)
    joint = tensor(
        memory,
        prepare_input_qubit(config.theta, config.phi, n_max=config.n_max),
    )
    results = _analyze(joint, config)
    outcomes = _summarize(results, config.theta, config.phi)
    return TeleportReport("ideal", config, outcomes, list(results))


def _thermal_weights(config: ProtocolConfig) -> list[tuple[float, int]]:
    """(weight, occupation) pairs of the truncated single-mode thermal state."""
    ens = prepare_thermal(
        config.nbar,
        config.thermal_order,
        MECH_A,
        renormalized=config.thermal_norm == "renorm",
        n_max=config.n_max,
    )
    out = []
    for weight, state in ens.branches:
        (occ,) = [occ for occ, _ in state.items()]
        out.append((weight, occ[0]))
    return out


def run_thermal(config: ProtocolConfig) -> TeleportReport:
    """Single-photon pulses with both memories initially thermal.

    The initial two-mode thermal mixture is enumerated exactly over the
    truncated occupations; no sampling is involved.
    """
    config.validate()
    if config.model != "paper":
        raise ConfigError("run_thermal uses the pair-conversion model; see run_thermal_tms")
    if config.n_max < config.thermal_order + 1:
        raise ConfigError("n_max too small for the thermal truncation order")
    weights = _thermal_weights(config)
    input_state = prepare_input_qubit(config.theta, config.phi, n_max=config.n_max)

    weighted = []
    components = {}
    for (w_j, j), (w_k, k) in itertools.product(weights, weights):
        joint = tensor(_pumped_memory(1, (j, k), config.n_max, config.n_max), input_state)
        results = _analyze(joint, replace(config, p_dark=0.0))
        weighted.append((w_j * w_k, results))
        plus_weight, plus_cond = class_conditional(results, OutcomeClass.M_PLUS)
        comp_fid = None
        if plus_weight > 0.0:
            target = target_state(config.theta, config.phi, registry=plus_cond.registry)
            comp_fid = fidelity(plus_cond, target)
        components[(j, k)] = {
            "weight": w_j * w_k * plus_weight,
            "fidelity_vs_ideal": comp_fid,
            "conditional": plus_cond,
        }

    merged = apply_dark_counts(_merge_results(weighted), config.p_dark)
    outcomes = _summarize(merged, config.theta, config.phi)
    s = config.nbar / (config.nbar + 1.0)
    details = {
        "s": s,
        "initial_weights": weights,
        "components": components,
    }
    return TeleportReport("thermal", config, outcomes, merged, details)


def run_thermal_tms(config: ProtocolConfig) -> TeleportReport:
    """Thermal-memory run with the full two-mode-squeezing interaction.

    The pair amplitude is tanh(r) = |alpha|.  Bosonic sqrt(n+1) enhancement
    on thermally occupied memories makes the heralded fidelity deviate from
    the flat pair-conversion model; this run exists for that comparison.
    """
    config.validate()
    if config.model != "full_tms":
        raise ConfigError("run_thermal_tms requires model = 'full_tms'")
    g = abs(config.alpha)
    if not 0.0 < g < 1.0:
        raise ConfigError("full_tms needs a pair amplitude |alpha| in (0, 1)")
    spec = InteractionSpec(InteractionModel.FULL_TMS, r=math.atanh(g))
    mech_cutoff = config.n_max
    optical_cutoff = config.n_max + 1  # analyzer outputs can exceed the memory cutoff
    cutoffs = {
        MECH_A: mech_cutoff,
        MECH_B: mech_cutoff,
        STOKES_H: optical_cutoff,
        STOKES_V: optical_cutoff,
    }
    registry = ModeRegistry((MECH_A, MECH_B, STOKES_H, STOKES_V), cutoffs)
    weights = _thermal_weights(config)
    input_state = prepare_input_qubit(config.theta, config.phi, n_max=optical_cutoff)

    weighted = []
    for (w_j, j), (w_k, k) in itertools.product(weights, weights):
        state = basis_state(registry, {MECH_A: j, MECH_B: k})
        state = two_mode_squeeze(state, STOKES_H, MECH_A, spec)
        state = two_mode_squeeze(state, STOKES_V, MECH_B, spec)
        joint = tensor(state, input_state)
        weighted.append((w_j * w_k, _analyze(joint, replace(config, p_dark=0.0))))

    merged = apply_dark_counts(_merge_results(weighted), config.p_dark)
    outcomes = _summarize(merged, config.theta, config.phi)
    return TeleportReport(
        "thermal_tms", config, outcomes, merged, {"pair_amplitude": g, "r": math.atanh(g)}
    )


def run_wcs(config: ProtocolConfig) -> TeleportReport:
    """Weak-coherent-state pump and input, enumerated photon sector by sector.

    Sector (b, r) fixes the pump and input photon numbers; its weight is the
    product of the squared truncated pulse-expansion coefficients.  Sectors
    never interfere in any reported quantity because they leave orthogonal
    phonon-number records, so enumerating them keeps every ratio exact.
    """
    config.validate()
    if config.nbar != 0.0:
        raise ConfigError("weak-coherent-state run assumes ground-state memories")
    if config.model != "paper":
        raise ConfigError("weak-coherent-state run uses the pair-conversion model")
    alpha, beta = complex(config.alpha), complex(config.beta)
    if abs(alpha) > 0.3 or abs(beta) > 0.3:
        raise ConfigError("pulse amplitudes above 0.3 are outside the validated expansion")

    mech_cutoff = max(config.n_max, 2)
    optical_cutoff = 4  # up to two pump and two input photons meet per polarization

    pump_pulse = prepare_coherent_truncated(alpha, 2, BLUE_A, n_max=2)
    input_pulse = prepare_coherent_truncated(beta, 2, INPUT_H, n_max=2)

    def sector_amp(pulse: PureState, n: int) -> complex:
        return pulse.amplitude((n,))

    def polarized_fock(n: int) -> PureState:
        """Normalized n-photon component of the polarized input pulse."""
        registry = ModeRegistry((INPUT_H, INPUT_V), optical_cutoff)
        a_h = cmath.exp(1j * config.phi) * math.sin(config.theta)
        a_v = math.cos(config.theta)
        terms = {
            (k, n - k): math.sqrt(math.comb(n, k)) * a_h**k * a_v ** (n - k)
            for k in range(n + 1)
        }
        return PureState(registry, terms)

    sectors = {}
    weighted = []
    for n_b, n_r in itertools.product(range(3), range(3)):
        coeff = sector_amp(pump_pulse, n_b) * sector_amp(input_pulse, n_r)
        sector_weight = abs(coeff) ** 2
        if sector_weight == 0.0:
            continue
        memory = _pumped_memory(n_b, (0, 0), mech_cutoff, optical_cutoff)
        joint = tensor(memory, polarized_fock(n_r))
        results = _analyze(joint, replace(config, p_dark=0.0))
        weighted.append((sector_weight, results))
        class_totals = {}
        for cls in OutcomeClass:
            w, _ = class_conditional(results, cls)
            class_totals[cls] = sector_weight * w
        sectors[(n_b, n_r)] = {"weight": sector_weight, "class_weights": class_totals}

    merged = apply_dark_counts(_merge_results(weighted), config.p_dark)
    outcomes = _summarize(merged, config.theta, config.phi)

    def herald_weight(sector):
        if sector not in sectors:
            return 0.0
        cw = sectors[sector]["class_weights"]
        return cw[OutcomeClass.M_PLUS] + cw[OutcomeClass.M_MINUS]

    ideal_w = herald_weight((1, 1))
    details = {
        "sectors": sectors,
        "ideal_weight": ideal_w,
        "harmless_vacuum_weight": herald_weight((0, 2)),  # leaves the memory empty
        "contamination_weight": herald_weight((2, 0)),  # leaves one phonon per memory
        "contamination_ratio": herald_weight((2, 0)) / ideal_w if ideal_w else None,
        "sector_ratio_table": {
            sector: sectors[sector]["weight"] / sectors[(1, 1)]["weight"]
            for sector in ((1, 2), (2, 1), (2, 2), (1, 1))
            if (1, 1) in sectors and sector in sectors
        },
    }
    return TeleportReport("wcs", config, outcomes, merged, details)


def run_with_loss(config: ProtocolConfig, scenario: LossScenario | str) -> TeleportReport:
    """Lossy single-photon scenarios.

    NON_DETECTION places the loss on the memory output before the Bell
    splitter (herald weight scales by T, conditional state untouched);
    DETECTION puts it at the four detectors (weight scales by T^2);
    BLUE_TWO_PHOTON sends a two-photon pump through the nondetection loss and
    reports the resulting contaminated heralded state.
    """
    config.validate()
    scenario = LossScenario(scenario)
    if config.nbar != 0.0:
        raise ConfigError("loss scenarios assume ground-state memories")
    if config.model != "paper":
        raise ConfigError("loss scenarios use the pair-conversion model")

    if scenario is LossScenario.NON_DETECTION:
        if config.t_det != 1.0:
            raise ConfigError("nondetection scenario keeps detectors ideal")
        n_pump, optical_cutoff = 1, config.n_max
    elif scenario is LossScenario.DETECTION:
        if config.t_nd != 1.0:
            raise ConfigError("detection scenario keeps propagation ideal")
        n_pump, optical_cutoff = 1, config.n_max
    else:
        if config.t_det != 1.0:
            raise ConfigError("two-photon-pump scenario applies loss before the analyzer")
        n_pump, optical_cutoff = 2, max(config.n_max, 3)

    memory = _pumped_memory(n_pump, (0, 0), max(config.n_max, n_pump), optical_cutoff)
    joint = tensor(memory, prepare_input_qubit(config.theta, config.phi, n_max=optical_cutoff))
    results = _analyze(joint, config)
    outcomes = _summarize(results, config.theta, config.phi)

    details: dict = {"scenario": scenario.value}
    if scenario is LossScenario.NON_DETECTION:
        details["transmittance"] = config.t_nd
        details["weight_vs_ideal"] = outcomes[OutcomeClass.M_PLUS].weight / 0.25
    elif scenario is LossScenario.DETECTION:
        details["transmittance"] = config.t_det
        details["weight_vs_ideal"] = outcomes[OutcomeClass.M_PLUS].weight / 0.25
    else:
        details["transmittance"] = config.t_nd
        plus = outcomes[OutcomeClass.M_PLUS]
        details["unnormalized_plus"] = plus.conditional.scaled(plus.weight) if plus.weight else plus.conditional
    return TeleportReport(f"loss_{scenario.value}", config, outcomes, list(results), details)


# -------------------------------------------------------- post-herald steps

def feed_forward(result: HeraldedResult) -> HeraldedResult:
    """Phase correction making the "minus" herald usable like the "plus" one.

    A pi phase on the first memory arm flips the sign of the |10> component,
    so the corrected conditional overlaps the "plus" target; "plus" heralds
    pass through unchanged.
    """
    if result.outcome is OutcomeClass.M_PLUS:
        return result
    if result.outcome is not OutcomeClass.M_MINUS:
        raise ValueError(f"feed-forward applies to heralds only, got {result.outcome}")
    corrected = result.conditional.map_pure(lambda s: phase_shift(s, MECH_A, math.pi))
    return HeraldedResult(result.pattern, result.outcome, result.weight, corrected)


@dataclass
class ReadoutResult:
    """Optical state retrieved from the memory by the red-detuned pulse."""

    optical: Ensemble
    detected_weight: float
    fidelity: float | None = None
    conditional_fidelity: float | None = None


def readout(
    result: HeraldedResult,
    efficiency: float = 1.0,
    target: PureState | None = None,
) -> ReadoutResult:
    """Swap the memory onto readout optical modes and apply readout loss.

    The swap is perfect; an inefficient readout is the swap composed with a
    loss channel of the given transmittance on each readout mode.  A memory
    left in the ground state produces no readout photons at all.
    """
    conditional = result.conditional
    mech_registry = conditional.registry
    cutoffs = dict(zip(mech_registry.labels, mech_registry.cutoffs))
    cutoffs.update({READOUT_A: cutoffs[MECH_A], READOUT_B: cutoffs[MECH_B]})
    full = ModeRegistry(mech_registry.labels + (READOUT_A, READOUT_B), cutoffs)
    vacuum = basis_state(ModeRegistry((READOUT_A, READOUT_B), {READOUT_A: cutoffs[READOUT_A], READOUT_B: cutoffs[READOUT_B]}), (0, 0))

    swapped = conditional.map_pure(
        lambda s: state_swap(state_swap(tensor(s, vacuum), MECH_A, READOUT_A), MECH_B, READOUT_B)
    )
    lossy: Ensemble = swapped
    if efficiency != 1.0:
        lossy = loss_channel(lossy, READOUT_A, efficiency)
        lossy = loss_channel(lossy, READOUT_B, efficiency)
    from .fock import trace_out  # local import to keep module top tidy

    optical = trace_out(lossy, (MECH_A, MECH_B))
    vacuum_weight = 0.0
    for w, s in optical.branches:
        amp = s.amplitude((0, 0))
        vacuum_weight += w * abs(amp) ** 2
    detected = optical.total_weight - vacuum_weight

    fid = cond_fid = None
    if target is not None:
        swapped_target = PureState(
            optical.registry, {occ: amp for occ, amp in target.items()}
        )
        fid = fidelity(optical, swapped_target)
        cond_fid = fid / detected if detected > 0.0 else None
    return ReadoutResult(optical, detected, fid, cond_fid)

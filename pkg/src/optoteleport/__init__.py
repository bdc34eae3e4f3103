"""Fock-space simulator for pulsed optomechanical quantum teleportation.

The package propagates sparse multimode Fock states through the optical and
optomechanical elements of a dual-rail teleportation setup: entangling
pair-creation pulses, beamsplitters, loss channels, threshold detectors and
Bell-pattern classification.  A dense density-matrix oracle provides an
independent verification path for every scenario.
"""

__version__ = "0.1.0"

from .fock import (
    CutoffError,
    Ensemble,
    FockStateError,
    ModeRegistry,
    NormalizationError,
    PureState,
    RegistryMismatchError,
    basis_state,
    fidelity,
    inner_product,
    superpose,
    tensor,
    trace_out,
)
from .elements import (
    InteractionModel,
    InteractionSpec,
    LossSpec,
    beamsplitter,
    generate_epr_paper_model,
    loss_channel,
    phase_shift,
    prepare_coherent_truncated,
    prepare_input_qubit,
    prepare_polarized_pulse,
    prepare_thermal,
    state_swap,
    two_mode_squeeze,
)
from .detection import (
    ClickPattern,
    HeraldedResult,
    OutcomeClass,
    apply_dark_counts,
    bell_measurement,
    classify_pattern,
    threshold_measure,
)
from .protocol import (
    ConfigError,
    LossScenario,
    ProtocolConfig,
    TeleportReport,
    feed_forward,
    readout,
    run_ideal,
    run_thermal,
    run_thermal_tms,
    run_wcs,
    run_with_loss,
    target_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]

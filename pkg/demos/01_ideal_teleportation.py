"""Walk through the ideal teleportation pipeline step by step.

A single blue-detuned pump photon is split over two optomechanical devices,
leaving one joint phonon/Stokes excitation delocalized over the paths.  The
Stokes light meets the input polarization qubit on the Bell analyzer; a
cross-polarized coincidence teleports the qubit onto the pair of mechanical
modes with the amplitudes exchanged.
"""

import math

from optoteleport import (
    ModeRegistry,
    OutcomeClass,
    ProtocolConfig,
    basis_state,
    beamsplitter,
    feed_forward,
    generate_epr_paper_model,
    prepare_input_qubit,
    readout,
    run_ideal,
    target_state,
    tensor,
)
from optoteleport.fock import drop_vacuum_modes, ket_string

theta = math.pi / 6

# --- stage 1: pump splitting and pair creation -----------------------------
registry = ModeRegistry(
    ("blueA", "blueB", "mechA", "mechB", "H2", "V2"),
    {"blueA": 1, "blueB": 1, "mechA": 2, "mechB": 2, "H2": 2, "V2": 2},
)
pump = basis_state(registry, {"blueA": 1})
split = beamsplitter(pump, "blueA", "blueB")
print("pump after splitter:         ", ket_string(split))

entangled = generate_epr_paper_model(split, "blueA", "blueB", "mechA", "mechB", "H2", "V2")
memory = drop_vacuum_modes(entangled, ("blueA", "blueB"))
print("memory + Stokes entangled:   ", ket_string(memory))

# --- stage 2: the input qubit ----------------------------------------------
qubit = prepare_input_qubit(theta, n_max=2)
print("input qubit (theta = pi/6):  ", ket_string(qubit))
joint = tensor(memory, qubit)
print(f"joint state carries {joint.num_terms} terms before the analyzer")

# --- stage 3: full run with herald classification ---------------------------
report = run_ideal(ProtocolConfig(theta=theta, n_max=2, thermal_order=1))
print("\nherald statistics:")
for outcome, summary in report.outcomes.items():
    print(f"  {outcome.value:16s} weight {summary.weight:.4f}", end="")
    if summary.fidelity is not None:
        print(f"  fidelity {summary.fidelity:.12f}")
    else:
        print()

plus = report.outcomes[OutcomeClass.M_PLUS]
(w, state), = plus.conditional.branches
print("\nteleported state (plus herald):", ket_string(state))
print("input had cos ->", f"{math.cos(theta):.4f}", "on V; the memory holds it on arm A")

# --- stage 4: feed forward and readout --------------------------------------
minus_pattern = next(
    r for r in report.patterns if r.outcome is OutcomeClass.M_MINUS and r.weight > 0
)
corrected = feed_forward(minus_pattern)
(_, corrected_state), = corrected.conditional.branches
print("minus herald after feed-forward:", ket_string(corrected_state))

target = target_state(theta, registry=plus.conditional.registry)
retrieved = readout(plus, efficiency=0.8, target=target)
print(
    f"readout at 80% efficiency: detected weight {retrieved.detected_weight:.3f}, "
    f"conditional fidelity {retrieved.conditional_fidelity:.6f}"
)

"""Error budget for weak-coherent-state pulses.

With coherent pulses instead of single photons, the two-photon expansion
terms create false heralds.  Enumerating the pump/input photon-number
sectors makes every error channel visible without sampling:

  sector (0, 2): two input photons, no scattering.  False heralds leave the
                 memories empty, which the readout cannot even see.
  sector (2, 0): two pump photons, no input photon.  False heralds leave one
                 phonon in each memory, the only herald-contaminating term.
  higher sectors are suppressed by further amplitude factors.
"""

from optoteleport import OutcomeClass, ProtocolConfig, run_wcs, readout
from optoteleport.analysis import wcs_error_ratios

alpha, beta = 0.05, 0.2
report = run_wcs(ProtocolConfig(theta=0.6, alpha=alpha, beta=beta, nbar=0.0))

print(f"pump amplitude {alpha}, input amplitude {beta}")
print(f"{'sector':>8} {'weight':>12} {'plus-herald':>12} {'minus-herald':>13}")
for (n_b, n_r), sector in sorted(report.details["sectors"].items()):
    cw = sector["class_weights"]
    print(
        f"  ({n_b},{n_r}) {sector['weight']:12.3e} "
        f"{cw[OutcomeClass.M_PLUS]:12.3e} {cw[OutcomeClass.M_MINUS]:13.3e}"
    )

print("\nheadline numbers:")
print(f"  ideal herald weight          {report.details['ideal_weight']:.3e}")
print(f"  empty-memory false heralds   {report.details['harmless_vacuum_weight']:.3e}")
print(f"  phonon-pair contamination    {report.details['contamination_weight']:.3e}")
print(f"  contamination / ideal        {report.details['contamination_ratio']:.6f}")

formulas = wcs_error_ratios(alpha, beta)
print(f"  amplitude-ratio prediction   {formulas['contamination']:.6f}")
print("  sector ratios vs prediction:")
for sector, want in formulas["sectors"].items():
    got = report.details["sector_ratio_table"][sector]
    print(f"    {sector}: measured {got:.3e}  formula {want:.3e}")

# the empty-memory false heralds produce no readout photons at all
empty = next(
    r
    for r in run_wcs(ProtocolConfig(theta=0.6, alpha=0.0, beta=beta, nbar=0.0)).patterns
    if r.outcome is OutcomeClass.M_PLUS and r.weight > 0
)
print(
    "\nreadout of an empty-memory false herald detects photons with probability",
    f"{readout(empty, 1.0).detected_weight:.1f}",
)

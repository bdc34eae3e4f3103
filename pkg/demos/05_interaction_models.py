"""Flat pair conversion versus the full two-mode-squeezing interaction.

The default interaction model converts each pump photon into exactly one
phonon/Stokes pair with no bosonic enhancement; it reproduces the closed-form
fidelity curve.  The full squeezing operator adds sqrt(n+1) ladder factors,
which amplify scattering on already-occupied (thermal) memories and admit
multi-pair events, both of which depress the heralded fidelity.
"""

import warnings

from optoteleport import OutcomeClass, ProtocolConfig, run_thermal, run_thermal_tms
from optoteleport.analysis import fidelity_closed_form

pair_amplitude = 0.1

print(f"pair amplitude tanh(r) = {pair_amplitude}")
print(f"{'nbar':>6} {'flat (sim)':>12} {'closed form':>12} {'full squeeze':>13}")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # deep thermal seeds graze the cutoff
    for nbar in (0.0, 0.05, 0.1, 0.15, 0.2):
        flat = run_thermal(ProtocolConfig(theta=0.5, nbar=nbar))
        full = run_thermal_tms(
            ProtocolConfig(theta=0.5, nbar=nbar, model="full_tms", alpha=pair_amplitude, n_max=5)
        )
        print(
            f"{nbar:6.2f} {flat.outcomes[OutcomeClass.M_PLUS].fidelity:12.6f} "
            f"{fidelity_closed_form(nbar, 2):12.6f} "
            f"{full.outcomes[OutcomeClass.M_PLUS].fidelity:13.6f}"
        )

print(
    "\nat zero occupation the squeezing leaves 1/(1 + 1.5 g^2) from multi-pair"
    "\nevents; with thermal seeds the enhancement factors dominate the gap"
)

"""Compare computed and closed-form spectra of the stacked iteration matrix.

With P = I the predicted set for A + h A_c matches; a generic P moves the
spectrum away from it because the closed forms do not involve P.
"""

import numpy as np

from pmco.graphs import GdsSchedule, gds_topology, laplacian
from pmco.semistability import random_paracontracting
from pmco.switched import (
    McoCoefficients,
    SwitchedSystemMatrices,
    check_theorem_conditions,
    verify_spectrum_containment_A,
    verify_spectrum_containment_B,
)


def main():
    rng = np.random.default_rng(5)
    lap = laplacian(gds_topology(GdsSchedule(3, (1,)), rng)).astype(float)
    coeffs = McoCoefficients(mu=0.3, eta=0.5, kappa=0.8, h=0.4)
    for label, p in (("P = I", np.eye(2)), ("random P", random_paracontracting(2, rng, full_rank=True))):
        inst = SwitchedSystemMatrices.build(1, coeffs, lap, p)
        a, b = verify_spectrum_containment_A(inst), verify_spectrum_containment_B(inst)
        print(f"{label:<9} A+hA_c miss {a.max_miss:.2e}   B+h^2A_c miss {b.max_miss:.2e}")
    rep = check_theorem_conditions(SwitchedSystemMatrices.build(1, coeffs, lap, np.eye(2)))
    print("hypotheses:", {k: v for k, v in rep.to_json().items() if k != "violated_details"})


if __name__ == "__main__":
    main()

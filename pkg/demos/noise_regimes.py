"""Compare the codes under the noise sources of a trapped-ion machine.

Each run prepares a Bell pair across two code blocks, applies a
transversal CNOT between error-correction rounds and checks the ZZ or XX
parity at readout.

    python demos/noise_regimes.py [shots]
"""

import math
import sys

from compass_sim import ExperimentSpec, bias_zz
from compass_sim.codes import CODE_NAMES
from compass_sim.noise import NoiseParams
from compass_sim.sweep import noise_from, run_both_bases

shots = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000

regimes = {
    "depolarizing p=1e-3": (NoiseParams.depolarizing(1e-3), True),
    "MS over-rotation p=1e-3": (noise_from({"eps_ms": math.asin(math.sqrt(1e-3)), "p1q": 0.0}), False),
    "dephasing 1/T2=2/s": (NoiseParams.from_rates(inv_t2=2.0), False),
    "crosstalk ratio 0.02": (NoiseParams.from_rates(rabi_ratio=0.02), True),
}

for label, (noise, crosstalk) in regimes.items():
    print(f"\n{label}")
    for i, code in enumerate(CODE_NAMES):
        rx, rz = run_both_bases(ExperimentSpec(code, "Z", noise, shots=shots, seed=i, include_crosstalk=crosstalk))
        b = bias_zz(rx, rz)
        print(f"   {code:12s} XX violated {rx.rate:.2e}   ZZ violated {rz.rate:.2e}   "
              f"Bias_ZZ {'n/a' if b is None else f'{b:.2f}'}")

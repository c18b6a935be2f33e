"""Sweep the two-qubit error rate and find where encoding starts to pay off.

The comparator is an unencoded CNOT built from the same native gates.
Subset sampling keeps the low-noise end cheap.

    python demos/pseudothreshold_sweep.py
"""

from compass_sim import sweep_and_map

res = sweep_and_map(["p2q:1e-4:1e-2:log:7"], fixed={"inv_t2": 0.0}, shots=20_000, method="subset", kmax=4,
                    include_crosstalk=False)

print("p2q       " + "".join(f"{c:>13s}" for c in res.codes) + "   best")
for i, p in enumerate(res.axes[0].values):
    cell = res.cell(i)
    rates = "".join(f"{cell.combined(c):13.2e}" for c in res.codes)
    print(f"{p:.2e}{rates}   {cell.best_code(res.codes)}")

for code in res.codes:
    pts = res.pseudothresholds(code)["p2q"]
    print(f"{code}: pseudothreshold {pts[0]['p2q']:.2e}" if pts else f"{code}: no crossing in range")

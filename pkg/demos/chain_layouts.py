"""Find ion-chain orderings that keep crosstalk from causing single-fault failures.

A pair of ions may sit next to each other only if an unwanted XX between
them after any entangling gate stays correctable.  The optimizer searches
for a path through the resulting graph that uses as few forbidden
adjacencies as possible.

    python demos/chain_layouts.py
"""

import time

from compass_sim import build_graph, optimal_chain, validate_chain
from compass_sim.codes import CODE_NAMES, N_DATA

for name in CODE_NAMES:
    t0 = time.perf_counter()
    g = build_graph(name)
    best = optimal_chain(name)
    pub = validate_chain(name)
    data = sum(g.degree(q) for q in range(N_DATA)) / N_DATA
    anc = sum(g.degree(q) for q in range(N_DATA, g.n)) / (g.n - N_DATA)
    print(f"{name}: {len(g.edges)} safe pairs, mean degree data {data:.1f} / ancilla {anc:.1f}")
    print(f"   optimal   {best.order}  forbidden adjacencies {best.extra_edge_count}")
    print(f"   published {pub.order}  forbidden adjacencies {pub.extra_edge_count} {list(pub.bad_adjacencies)}")
    print(f"   ({time.perf_counter() - t0:.1f} s)")

"""SOM versus exhaustive search, greedy and random on tiny networks."""
import numpy as np

from somdsa import oracle
from somdsa.scenario import generate_instance
from somdsa.som import SolverConfig

# %% Score every method on 3-controller, 4-channel networks at several densities
for density in (0.3, 0.7, 1.0):
    gaps = {"greedy": [], "random": [], "som": []}
    for seed in range(40):
        inst = generate_instance(3, 4, density, (1, 2), seed)
        best = oracle.exact_solve(inst).cost
        gaps["greedy"].append(oracle.greedy_solve(inst).cost - best)
        gaps["random"].append(oracle.random_solve(inst, seed).cost - best)
        gaps["som"].append(oracle.som_solve(inst, SolverConfig(seed=seed)).cost - best)
    summary = ", ".join(f"{m}: mean gap {np.mean(g):.2f}, optimal {np.mean(np.array(g) == 0):.0%}"
                        for m, g in gaps.items())
    print(f"density {density}: {summary}")

# %% Larger networks, where enumeration is out of reach: SOM against greedy
for S, C in [(10, 6), (20, 8)]:
    som_costs, greedy_costs = [], []
    for seed in range(5):
        inst = generate_instance(S, C, 0.3, (1, 3), seed)
        som_costs.append(oracle.som_solve(inst, SolverConfig(seed=seed)).cost)
        greedy_costs.append(oracle.greedy_solve(inst).cost)
    print(f"S={S} C={C}: som mean cost {np.mean(som_costs):.1f}, greedy {np.mean(greedy_costs):.1f}")

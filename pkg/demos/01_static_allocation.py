"""Static allocation on one random network.

Generate a small cognitive network, look at its interference structure, then
let the SOM anneal its channel weights and read off an assignment.
"""
import numpy as np

from somdsa import build_proximity, cost, solve, SolverConfig
from somdsa.scenario import generate_instance

# %% A network of 8 spectrum controllers sharing 5 channels
inst = generate_instance(S=8, C=5, density=0.35, demand_range=(1, 2), seed=3)
print("demand per SC:", inst.R.tolist())
print("conflict graph (co-channel):")
print(inst.conflict)

# %% Proximity costs decay with channel separation; binary interference only
# penalizes co-channel use.
P = build_proximity(inst)
print("P[0, :, 0] =", P[0, :, 0].tolist())

# %% Solve
result = solve(inst, SolverConfig(seed=0))
print("assignment:")
print(result.assignment)
print(f"cost={result.cost} converged={result.converged} outer_steps={result.outer_steps}")

# %% The trace shows the weights settling while alpha and sigma anneal
for row in result.trace[:: max(1, len(result.trace) // 8)]:
    print(f"t={row.outer_step:3d} epoch={row.epoch} dW={row.max_delta_w:.2e} "
          f"cost={row.decoded_cost:.0f} alpha={row.alpha:.3f} sigma={row.sigma:.3f}")

# %% Final weights are row-stochastic up to the demand: each row sums to R[j]
print("row sums:", np.round(result.state.W.sum(axis=1), 12).tolist())
assert cost(result.assignment, P) == result.cost

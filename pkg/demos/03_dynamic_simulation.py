"""Spectrum mobility: primary users arrive and leave, SCs re-solve.

Each tick carrying events triggers one re-allocation on the channels still
free. Cold and warm starts are compared by how many grants they move.
"""
from somdsa import sim
from somdsa.scenario import Event, generate_instance
from somdsa.som import SolverConfig

inst = generate_instance(S=6, C=5, density=0.4, demand_range=(1, 2), seed=11)
events = [
    Event(3, "pu_arrival", pu="tv", channel=2),
    Event(5, "pu_arrival", pu="radar", channel=0),
    Event(7, "demand_change", sc=1, demand=2),
    Event(9, "pu_departure", pu="tv"),
    Event(12, "pu_arrival", pu="cell", channel=4, position=(0.5, 0.5), radius=0.3),
]

for warm in (False, True):
    rows, final = sim.run_simulation(inst, events, SolverConfig(seed=0, warm_start=warm))
    print("warm start" if warm else "cold start")
    print(sim.metrics_to_csv(rows))
    print("final mask:")
    print(final.mask.astype(int))

"""Which channels can a secondary link use near active primary users?

A PU receiver close to our transmitter, or a PU transmitter close to our
receiver, takes its channel away. Several controllers' observations are
fused conservatively.
"""
from somdsa.scenario import PrimaryUser, fuse_sensing, identify_opportunities

tx, rx = (0.0, 0.0), (4.0, 0.0)
pus = [
    PrimaryUser("r1", (0.5, 0.5), "receiver", active_channel=0, r_tx=1.0, r_rx=1.0),
    PrimaryUser("t1", (4.2, -0.3), "transmitter", active_channel=2, r_tx=1.0, r_rx=1.0),
    PrimaryUser("t2", (0.2, 0.0), "transmitter", active_channel=3, r_tx=1.0, r_rx=1.0),
    PrimaryUser("far", (10.0, 10.0), "receiver", active_channel=1, r_tx=1.0, r_rx=1.0),
]
print("opportunities:", sorted(identify_opportunities(tx, rx, pus, C=5)))
# t2 transmits next to our transmitter, which does not hurt it: channel 3 survives

observations = [
    [1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0],
]
print("fused availability:", fuse_sensing(observations, C=5).astype(int).tolist())

"""Tour of the genus-2 quotient: group relations, area, domain reduction.

The surface is the unit disk modulo the octagon group: four hyperbolic
translations (trace 2 + 2*sqrt(2)) and their inverses pair opposite edges
of a regular octagon.  Everything downstream (flow, observables,
equidistribution statistics) leans on three facts checked here: the
relation word closes up, the fundamental domain has area 4*pi, and greedy
reduction lands every point inside the domain with a recorded witness word.
"""

import numpy as np

from anosovlab.geometry import (
    bolza_group, disk_distance, frame_coordinates, geodesic_flow,
    reduce_to_domain, sample_uniform,
)

group, domain = bolza_group()

word = group.relation_product().m
defect = min(np.abs(word - np.eye(2)).max(), np.abs(word + np.eye(2)).max())
print("relation word defect      : %.3e" % defect)
print("octagon area              : %.12f   (4*pi = %.12f)"
      % (domain.area(), 4 * np.pi))
print("systole                   : %.6f" % group.systole)
print("apothem / circumradius    : %.6f / %.6f" % (domain.apothem, domain.circumradius))

# push a uniform cloud far out of the domain with the flow, then fold back
states = sample_uniform(2000, seed=5)
moved = geodesic_flow(states, 4.0)
w_moved, _ = frame_coordinates(moved)
outside = ~domain.contains(w_moved)
print("\nafter t=4 transport       : %d of %d base points left the octagon"
      % (outside.sum(), len(w_moved)))

lengths = []
for m in moved[np.flatnonzero(outside)[:200]]:
    _, word_used = reduce_to_domain(m, group, domain)
    lengths.append(len(word_used))
lengths = np.array(lengths)
print("reduction word lengths    : min %d  median %d  max %d"
      % (lengths.min(), int(np.median(lengths)), lengths.max()))

# the witness word is an exact certificate: replaying it recovers the input
far = moved[np.flatnonzero(outside)[0]]
red, witness = reduce_to_domain(far, group, domain)
replay = red.m.copy()
for idx in witness[::-1]:
    replay = group.gen_array[(idx + 4) % 8] @ replay
defect = min(np.abs(replay - far).max(), np.abs(replay + far).max())
w_far, _ = frame_coordinates(far)
w_red, _ = frame_coordinates(red.m)
print("\nwitness word %-12s : replay defect %.3e, |w| %.3f -> %.3f"
      % (witness, defect, abs(w_far), abs(w_red)))
print("reduced point in domain   : %s" % bool(domain.contains(np.array([w_red]))[0]))

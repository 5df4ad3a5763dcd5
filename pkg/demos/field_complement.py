"""Complementary channel matrices over GF(5).

Draw a random 3-user channel, build its complement and show that the sum
keeps only the direct links.
"""
import numpy as np

from ergodic_alignment import channels
from ergodic_alignment.finite_field import FieldMatrix, complement_matrix

q, K = 5, 3
rng = channels.stream(11, "states")
H = FieldMatrix.from_array(channels.sample_ff_states(rng, q, K, 1)[0], q)
G = complement_matrix(H)

print("H =\n", H.array)
print("g(H) =\n", G.array)
print("H + g(H) =\n", (H + G).array)
# applying the map twice gives H back
assert complement_matrix(G) == H

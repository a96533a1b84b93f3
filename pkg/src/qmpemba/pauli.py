"""Pauli matrices in the shared basis: index 0 = |up>, 1 = |down>, sigma_z|up> = +|up>."""

import numpy as np

ID2 = np.eye(2)
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
SP = np.array([[0.0, 1.0], [0.0, 0.0]])  # sigma^+ = (sigma^x + i sigma^y)/2
SM = np.array([[0.0, 0.0], [1.0, 0.0]])

# Real stand-in for the y channel: (i sigma^y) x (-i sigma^y) = sigma^y x sigma^y,
# so pairing these keeps two-site operators (and the long-range MPO) real.
ISY = np.array([[0.0, 1.0], [-1.0, 0.0]])
MISY = -ISY

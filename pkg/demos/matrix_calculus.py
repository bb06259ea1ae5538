"""x^B, H(x) and the Jordan reduction on a small index matrix."""
import numpy as np

from grvar.trimat import IndexMatrix, jordan_block, jordan_reduce, mat_H, mat_power_x

B = IndexMatrix(np.array([[1.0, 2.0, -1.0], [0.0, 0.5, 3.0], [0.0, 0.0, -2.0]]))
A = mat_power_x(B, 2.0)
print("2^B =\n", A.entries)
print("homomorphism residual:", np.abs(mat_power_x(B, 3.0).entries @ A.entries - mat_power_x(B, 6.0).entries).max())
print("B H(2) - (2^B - I):", np.abs(B.entries @ mat_H(B, 2.0).entries - A.entries + np.eye(3)).max())

N = np.array([[0.0, 1.5, -0.4], [0.0, 0.0, -2.0], [0.0, 0.0, 0.0]])
Q = jordan_reduce(N).entries
print("Q =\n", Q)
print("Q J Q^-1 - B:", np.abs(Q @ jordan_block(3).entries @ np.linalg.inv(Q) - N).max())

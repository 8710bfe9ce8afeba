"""Independent brute-force oracles used to check the library.

Everything here is written from the definitions with explicit index
loops or a generic dense solver, deliberately avoiding the code paths
under test.
"""

import numpy as np


def fiber_oracle(data: np.ndarray, mode: int, fixed: tuple[int, int]) -> np.ndarray:
    I, J, K = data.shape
    if mode == 1:
        j, k = fixed
        return np.array([data[i, j, k] for i in range(I)])
    if mode == 2:
        i, k = fixed
        return np.array([data[i, j, k] for j in range(J)])
    i, j = fixed
    return np.array([data[i, j, k] for k in range(K)])


def unfold_oracle(data: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n unfolding by explicit index arithmetic: remaining modes in
    increasing order, earlier mode varying fastest."""
    I, J, K = data.shape
    if mode == 1:
        M = np.zeros((I, J * K))
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    M[i, j + J * k] = data[i, j, k]
    elif mode == 2:
        M = np.zeros((J, I * K))
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    M[j, i + I * k] = data[i, j, k]
    else:
        M = np.zeros((K, I * J))
        for i in range(I):
            for j in range(J):
                for k in range(K):
                    M[k, i + I * j] = data[i, j, k]
    return M


def tucker_triple_sum(G: np.ndarray, A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Tucker reconstruction as the explicit triple sum of scaled outer
    products."""
    P, Q, R = G.shape
    out = np.zeros((A.shape[0], B.shape[0], C.shape[0]))
    for p in range(P):
        for q in range(Q):
            for r in range(R):
                out += G[p, q, r] * np.einsum("i,j,k->ijk", A[:, p], B[:, q], C[:, r])
    return out


def core_lstsq_oracle(data: np.ndarray, A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Minimum-norm core by solving the dense least-squares system whose
    design columns are the vectorized outer products a_p o b_q o c_r."""
    P, Q, R = A.shape[1], B.shape[1], C.shape[1]
    cols = []
    for r in range(R):
        for q in range(Q):
            for p in range(P):
                cols.append(
                    np.einsum("i,j,k->ijk", A[:, p], B[:, q], C[:, r]).ravel(order="F")
                )
    design = np.stack(cols, axis=1)
    g, *_ = np.linalg.lstsq(design, data.ravel(order="F"), rcond=None)
    return g.reshape((P, Q, R), order="F")

import itertools

import numpy as np
import pytest

from somdsa.model import NetworkInstance


def brute_cost(A, I):
    """Ordered-pair enumeration straight from the interference tensor.

    The proximity value is the unrolled decay max(0, co-channel severity - separation),
    written without reference to build_proximity.
    """
    A = np.asarray(A)
    S, C = A.shape
    total = 0
    for n, m, k, j in itertools.product(range(S), range(C), range(S), range(C)):
        if n == k or not A[n, m] or not A[k, j]:
            continue
        base = max(int(I[n][k][c]) for c in range(C))
        total += max(0, base - abs(m - j))
    return total


def pair_instance(C=2, R=(1, 1), severity=1):
    I = np.zeros((2, 2, C), dtype=int)
    I[0, 1] = I[1, 0] = severity
    return NetworkInstance(2, C, list(R), I)


def random_instance(rng, S, C, max_sev=1, max_r=None):
    I = rng.integers(0, max_sev + 1, size=(S, S, C))
    I = np.maximum(I, I.transpose(1, 0, 2))
    for n in range(S):
        I[n, n] = 0
    R = rng.integers(0, (C if max_r is None else min(C, max_r)) + 1, size=S)
    if R.sum() == 0:
        R[0] = 1
    return NetworkInstance(S, C, R, I)


def random_assignment(rng, R, C):
    A = np.zeros((len(R), C), dtype=int)
    for n, r in enumerate(R):
        A[n, rng.choice(C, size=int(r), replace=False)] = 1
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

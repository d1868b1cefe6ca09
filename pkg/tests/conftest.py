import math

import numpy as np
import pytest
from scipy.linalg import expm

from kerrcoupler.core import CouplerParams, InitialAmplitudes


def dense_ladder(d):
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    eye = np.eye(d)
    return np.kron(a, eye), np.kron(eye, a)


def dense_coherent(alpha1, alpha2, d):
    def column(alpha):
        v = np.array([alpha ** k / math.sqrt(math.factorial(k)) for k in range(d)], dtype=complex)
        return v * np.exp(-abs(alpha) ** 2 / 2)
    return np.kron(column(alpha1), column(alpha2))


def dense_evolved(params, init, t, d=30):
    """Product-basis state under the full two-mode Hamiltonian via scipy expm.

    Independent of the block-diagonal oracle: per-mode cutoff, dense operators.
    """
    a1, a2 = dense_ladder(d)
    a1d, a2d = a1.conj().T, a2.conj().T
    n1, n2 = a1d @ a1, a2d @ a2
    h = (params.delta / 2 * (n1 - n2)
         + params.chi * (a1d @ a1d @ a1 @ a1 + a2d @ a2d @ a2 @ a2)
         + 2 * params.chi * n1 @ n2
         + params.kappa * (a1d @ a2 + a2d @ a1))
    psi = expm(-1j * h * t) @ dense_coherent(init.alpha1, init.alpha2, d)
    return psi, (a1, a2)


def dense_moment(psi, ops, idx):
    a1, a2 = ops
    n1, n2, n3, n4 = idx
    mp = np.linalg.matrix_power
    op = (mp(a1.conj().T, n1) @ mp(a2.conj().T, n3) @ mp(a1, n2) @ mp(a2, n4))
    return complex(psi.conj() @ op @ psi)


@pytest.fixture
def fig1_params():
    return CouplerParams(kappa=1.0, chi=0.5, delta=0.0)


@pytest.fixture
def fig1_init():
    return InitialAmplitudes(2.0, 0.0)

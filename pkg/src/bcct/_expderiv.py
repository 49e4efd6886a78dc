"""Closed-form t-derivatives of boundary factors of the form c(z)*exp(L(z)).

All smooth factors in this package (the cut-off g, outer functions, singular
inner functions, Blaschke products) are exponentials of functions whose z
derivatives are explicit pole sums.  With z = e^{it} and psi(t) = L(e^{it}),

    psi^(n)(t) = i^n * sum_k S(n,k) z^k L^(k)(z)

(S = Stirling numbers of the second kind, from (z d/dz)^n), and the t
derivatives of exp(psi) follow from the complete Bell recurrence

    B_0 = 1,   B_{n+1} = sum_k C(n,k) psi^(k+1) B_{n-k},
    (d/dt)^m exp(psi) = B_m * exp(psi).
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if k == n:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def t_derivs_from_z_derivs(z: np.ndarray, z_derivs: list[np.ndarray], m_max: int):
    """psi^(n)(t) for n = 1..m_max from L^(k)(z), k = 1..m_max."""
    out = []
    for n in range(1, m_max + 1):
        acc = np.zeros_like(z, dtype=complex)
        zp = np.ones_like(z, dtype=complex)
        for k in range(1, n + 1):
            zp = zp * z
            s = stirling2(n, k)
            if s:
                acc += s * zp * z_derivs[k - 1]
        out.append((1j ** n) * acc)
    return out


def bell_factors(psi_derivs: list[np.ndarray], m_max: int) -> list[np.ndarray]:
    """B_0..B_m_max of the complete Bell recurrence (per point)."""
    shape = psi_derivs[0].shape if psi_derivs else ()
    bell = [np.ones(shape, dtype=complex)]
    for n in range(m_max):
        acc = np.zeros(shape, dtype=complex)
        for k in range(n + 1):
            acc += comb(n, k) * psi_derivs[k] * bell[n - k]
        bell.append(acc)
    return bell


def exp_t_derivatives(z: np.ndarray, value: np.ndarray, z_derivs: list[np.ndarray], m_max: int):
    """[G, G', ..., G^(m_max)] of G(t) = value(e^{it}) with value = exp(L)."""
    if m_max == 0:
        return [value]
    psi = t_derivs_from_z_derivs(z, z_derivs, m_max)
    bell = bell_factors(psi, m_max)
    return [value * b for b in bell]

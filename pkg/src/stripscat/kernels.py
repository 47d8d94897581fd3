"""Singularity splits of the layer kernels.

Both layer kernels are decomposed, with rho = r^2, as

    hypersingular:  (i k0/4) H1(k0 r)/r = 1/(2 pi r^2) + P_a(rho) ln r + Q_a(rho)
    single layer:   (i/4) H0(k0 r)      =                P_s(rho) ln r + Q_s(rho)

with P_*, Q_* entire functions of rho.  The singular pieces act on the
Chebyshev bases in closed form (see chebkit); P and Q are expanded in a
bivariate Chebyshev series on the strip square and never quadratured near
their (removable) diagonal.

Q is evaluated by its power series for |k0 r| <= Z_SWITCH and from the
Hankel function directly above (where the subtraction of the singular
parts is benign); the two paths agree to ~1e-13 at the switch radius.
"""

from __future__ import annotations

import numpy as np
from scipy.special import hankel1, jv

from .chebkit import cheb_coeffs_2d

EULER_GAMMA = 0.5772156649015328606
Z_SWITCH = 6.0
_NTERMS = 42


def _harmonic(n: int) -> float:
    return sum(1.0 / i for i in range(1, n + 1))


def p_antisym(k0: complex, rho: np.ndarray) -> np.ndarray:
    """Coefficient of ln r in the hypersingular kernel: -(k0/(2 pi)) J1(k0 r)/r."""
    rho = np.asarray(rho, dtype=complex)
    z = k0 * np.sqrt(rho)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    ratio = np.where(small, 0.5 - (z * z) / 16.0, jv(1, zs) / zs)
    return -(k0 * k0 / (2 * np.pi)) * ratio


def q_antisym(k0: complex, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    z2q = (k0 * k0 / 4.0) * rho
    out = np.empty(rho.shape, dtype=complex)
    small = np.abs(z2q) <= (Z_SWITCH / 2.0) ** 2

    # series branch
    s1 = np.zeros_like(z2q)
    s2 = np.zeros_like(z2q)
    term = np.ones_like(z2q)
    for j in range(_NTERMS):
        psum = -2.0 * EULER_GAMMA + _harmonic(j) + _harmonic(j + 1)
        s1 += term
        s2 += term * psum
        term = term * (-z2q) / ((j + 1) * (j + 2))
    c0 = 1j * k0 * k0 / 8.0 - (k0 * k0 / (4 * np.pi)) * np.log(k0 / 2.0)
    ser = c0 * s1 + (k0 * k0 / (8 * np.pi)) * s2

    # direct branch
    r = np.sqrt(np.where(small, 1.0, rho))
    direct = (1j * k0 / 4.0) * hankel1(1, k0 * r) / r - 1.0 / (2 * np.pi * r * r) \
        - p_antisym(k0, np.where(small, 1.0, rho)) * np.log(r)
    out[...] = np.where(small, ser, direct)
    return out


def p_sym(k0: complex, rho: np.ndarray) -> np.ndarray:
    """Coefficient of ln r in the single-layer kernel: -(1/(2 pi)) J0(k0 r)."""
    rho = np.asarray(rho, dtype=complex)
    return -jv(0, k0 * np.sqrt(rho)) / (2 * np.pi)


def q_sym(k0: complex, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    z2q = (k0 * k0 / 4.0) * rho
    small = np.abs(z2q) <= (Z_SWITCH / 2.0) ** 2

    s1 = np.zeros_like(z2q)
    s2 = np.zeros_like(z2q)
    term = np.ones_like(z2q)
    for j in range(_NTERMS):
        s1 += term
        term = term * (-z2q) / ((j + 1) * (j + 1))
    term = np.ones_like(z2q)
    for j in range(1, _NTERMS):
        term = term * (-z2q) / (j * j)
        s2 += -term * _harmonic(j)          # (-1)^{j+1} H_j z2q^j / (j!)^2
    c0 = 0.25j - (np.log(k0 / 2.0) + EULER_GAMMA) / (2 * np.pi)
    ser = c0 * s1 - s2 / (2 * np.pi)

    r = np.sqrt(np.where(small, 1.0, rho))
    direct = 0.25j * hankel1(0, k0 * r) - p_sym(k0, np.where(small, 1.0, rho)) * np.log(r)
    return np.where(small, ser, direct)


def hyper_kernel(k0: complex, r: np.ndarray) -> np.ndarray:
    """Full hypersingular kernel (i k0/4) H1(k0 r)/r (off-diagonal use)."""
    r = np.asarray(r, dtype=float)
    return 0.25j * k0 * hankel1(1, k0 * r) / r


def single_kernel(k0: complex, r: np.ndarray) -> np.ndarray:
    """Full single-layer kernel (i/4) H0(k0 r)."""
    return 0.25j * hankel1(0, k0 * np.asarray(r, dtype=float))


class KernelExpansion:
    """Bivariate Chebyshev data of the P/Q kernel factors on the strip square.

    For the scaled variables s = x/a, t = x'/a the factors P(a^2 (s-t)^2)
    and Q(a^2 (s-t)^2) are entire; `pi_hat` and `q_hat` are their T_p(s)T_q(t)
    coefficient matrices on a roots grid of size `order`.
    """

    def __init__(self, k0: complex, a: float, parity_antisym: bool, order: int):
        self.k0 = k0
        self.a = a
        self.order = order
        pfun = p_antisym if parity_antisym else p_sym
        qfun = q_antisym if parity_antisym else q_sym
        self.pi_hat = cheb_coeffs_2d(lambda S, T: pfun(k0, a * a * (S - T) ** 2), order)
        self.q_hat = cheb_coeffs_2d(lambda S, T: qfun(k0, a * a * (S - T) ** 2), order)

    def tail_mass(self) -> float:
        """Relative magnitude of the trailing coefficient block (resolution check)."""
        m = self.order
        tail = max(np.max(np.abs(self.pi_hat[m - 4:, :])), np.max(np.abs(self.pi_hat[:, m - 4:])),
                   np.max(np.abs(self.q_hat[m - 4:, :])), np.max(np.abs(self.q_hat[:, m - 4:])))
        base = max(np.max(np.abs(self.pi_hat)), np.max(np.abs(self.q_hat)))
        return float(tail / base)


def kernel_order(k0: complex, a: float) -> int:
    """DCT resolution adequate for the entire kernel factors (type ~ 2 k0 a)."""
    return int(max(72, 24 + 10 * np.ceil(abs(k0) * a)))


_KER_CACHE: dict = {}


def kernel_expansion(k0: complex, a: float, parity_antisym: bool, order: int) -> KernelExpansion:
    """Memoized KernelExpansion (the DCTs are reused heavily downstream)."""
    key = (complex(k0), float(a), bool(parity_antisym), int(order))
    ker = _KER_CACHE.get(key)
    if ker is None:
        ker = KernelExpansion(k0, a, parity_antisym, order)
        if len(_KER_CACHE) > 32:
            _KER_CACHE.clear()
        _KER_CACHE[key] = ker
    return ker

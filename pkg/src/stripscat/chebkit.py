"""Chebyshev polynomial machinery shared by the solvers and spectral layer.

Conventions on the reference interval [-1, 1], weight w(s) = 1 - s^2:

* second kind:  int sqrt(w) U_m U_n ds = (pi/2) delta_mn
* first kind:   int T_m T_n / sqrt(w) ds = (pi/2) delta_mn (1 + delta_m0)
* transforms:   int sqrt(w) U_n(s) e^{izs} ds = pi i^n (n+1) J_{n+1}(z)/z
                int T_n(s) e^{izs} / sqrt(w) ds = pi i^n J_n(z)
* log kernel:   ln|s-t| = -ln 2 - 2 sum_{r>=1} T_r(s) T_r(t)/r

All "closed-form" matrices below are exact rational/pi expressions derived
from these identities; they carry the singular (hypersingular / log) parts
of the layer operators so that only entire kernels are ever quadratured.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct
from scipy.special import jv


# ---------------------------------------------------------------------------
# nodes and polynomial evaluation
# ---------------------------------------------------------------------------
def gauss_cheb2(n: int):
    """Nodes/weights for int_{-1}^{1} sqrt(1-s^2) f(s) ds."""
    j = np.arange(1, n + 1)
    s = np.cos(j * np.pi / (n + 1))
    w = (np.pi / (n + 1)) * np.sin(j * np.pi / (n + 1)) ** 2
    return s, w


def gauss_cheb1(n: int):
    """Nodes/weights for int_{-1}^{1} f(s)/sqrt(1-s^2) ds."""
    j = np.arange(n)
    s = np.cos((2 * j + 1) * np.pi / (2 * n))
    return s, np.full(n, np.pi / n)


def eval_u_series(coef: np.ndarray, s):
    """sum_n coef[n] U_n(s) by the three-term recurrence."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=complex)
    um2 = np.ones_like(s, dtype=complex)
    um1 = 2.0 * s + 0j
    for n, c in enumerate(coef):
        if n == 0:
            out += c * um2
        elif n == 1:
            out += c * um1
        else:
            un = 2 * s * um1 - um2
            out += c * un
            um2, um1 = um1, un
    return out


def eval_t_series(coef: np.ndarray, s):
    """sum_n coef[n] T_n(s) by the three-term recurrence."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=complex)
    tm2 = np.ones_like(s, dtype=complex)
    tm1 = s + 0j
    for n, c in enumerate(coef):
        if n == 0:
            out += c * tm2
        elif n == 1:
            out += c * tm1
        else:
            tn = 2 * s * tm1 - tm2
            out += c * tn
            tm2, tm1 = tm1, tn
    return out


# ---------------------------------------------------------------------------
# Fourier images of the weighted bases
# ---------------------------------------------------------------------------
def bessel_ratio(n: int, z) -> np.ndarray:
    """J_{n+1}(z)/z with the correct z -> 0 limit (1/2 for n = 0)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    zsafe = np.where(small, 1.0, z)
    out = jv(n + 1, zsafe) / zsafe
    return np.where(small, 0.5 if n == 0 else 0.0, out)


def u_transform_matrix(nmax: int, z) -> np.ndarray:
    """Matrix F[i, n] = int sqrt(w) U_n(s) e^{i z_i s} ds = pi i^n (n+1) J_{n+1}(z_i)/z_i."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    cols = [np.pi * (1j ** n) * (n + 1) * bessel_ratio(n, z) for n in range(nmax)]
    return np.stack(cols, axis=1)


def plain_t_moment(j: int) -> float:
    """int_{-1}^{1} T_j(s) ds."""
    if j % 2 == 1:
        return 0.0
    return 2.0 / (1 - j * j)


def plain_t_transform_matrix(nmax: int, z, extra: int = 48) -> np.ndarray:
    """Matrix E[i, n] = int_{-1}^{1} T_n(s) e^{i z_i s} ds.

    Via e^{izs} = J_0(z) + 2 sum_m i^m J_m(z) T_m(s) and the exact product
    moments int T_m T_n ds; the m-series is truncated once J_m(z) is below
    roundoff (m > |z| + extra).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    mmax = int(np.max(np.abs(z))) + extra
    m = np.arange(mmax + 1)
    Jm = jv(m[None, :], z[:, None])          # (nz, mmax+1)
    wts = np.where(m == 0, 1.0, 2.0) * (1j ** m)
    C = np.zeros((mmax + 1, nmax))
    for mm in range(mmax + 1):
        for n in range(nmax):
            C[mm, n] = 0.5 * (plain_t_moment(mm + n) + plain_t_moment(abs(mm - n)))
    return (Jm * wts[None, :]) @ C


# ---------------------------------------------------------------------------
# closed-form coupling matrices
# ---------------------------------------------------------------------------
def w_matrix(nrow: int, ncol: int) -> np.ndarray:
    """W[m, p] = int sqrt(w) U_m T_p ds = (pi/4)[(1+d_p0) d_mp - d_{m+2,p}]."""
    W = np.zeros((nrow, ncol))
    for m in range(nrow):
        if m < ncol:
            W[m, m] = (np.pi / 4) * (2.0 if m == 0 else 1.0)
        if m + 2 < ncol:
            W[m, m + 2] = -np.pi / 4
    return W


def c3_matrix(nrow: int, ncol: int) -> np.ndarray:
    """C3[p, n] = int_{-1}^{1} T_p T_n ds = (J(p+n) + J(|p-n|))/2."""
    J = np.array([plain_t_moment(j) for j in range(nrow + ncol + 1)])
    p = np.arange(nrow)[:, None]
    n = np.arange(ncol)[None, :]
    return 0.5 * (J[p + n] + J[np.abs(p - n)])


def z_matrix(n: int) -> np.ndarray:
    """Z[m, n] = int_{-1}^{1} U_m T_n ds (exact, via T_n U_m product rule)."""
    def moment_u(j: int) -> float:
        if j < 0:
            if j == -1:
                return 0.0
            return -moment_u(-j - 2)
        if j % 2 == 1:
            return 0.0
        return 2.0 / (j + 1)

    Z = np.zeros((n, n))
    for m in range(n):
        for q in range(n):
            Z[m, q] = 0.5 * (moment_u(m + q) + moment_u(m - q))
    return Z


def mass2_matrix(n: int) -> np.ndarray:
    """M[m, n] = int_{-1}^{1} (1-s^2) U_m U_n ds."""
    def c(p: int) -> float:
        if p % 2 == 1:
            return 0.0
        return 2.0 / (1 - p * p)

    M = np.zeros((n, n))
    for m in range(n):
        for q in range(n):
            M[m, q] = 0.5 * (c(abs(m - q)) - c(m + q + 2))
    return M


def log_uu_matrix(n: int) -> np.ndarray:
    """L[g, d] = int int sqrt(w)U_g(s) ln|s-t| sqrt(w)U_d(t) ds dt.

    Pentadiagonal (offsets 0, +-2) closed form from the bilinear log
    expansion; L[0,0] also carries the -ln 2 constant.
    """
    L = np.zeros((n, n))
    for g in range(n):
        L[g, g] = -(np.pi ** 2 / 8) * ((1.0 / g if g >= 1 else 0.0) + 1.0 / (g + 2))
        if g == 0:
            L[0, 0] += -(np.pi ** 2 / 4) * np.log(2)
        if g + 2 < n:
            L[g, g + 2] = np.pi ** 2 / (8 * (g + 2))
            L[g + 2, g] = L[g, g + 2]
    return L


def log_point_u(nmax: int, s) -> np.ndarray:
    """ell[i, n] = int ln|s_i - t| sqrt(w(t)) U_n(t) dt (closed form).

    ell_0 = -(pi/2) ln 2 + (pi/4) T_2(s); for n >= 1,
    ell_n = -(pi/2)[T_n(s)/n - T_{n+2}(s)/(n+2)].
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    T = np.cos(np.arange(nmax + 2)[None, :] * np.arccos(np.clip(s, -1, 1))[:, None])
    out = np.zeros((len(s), nmax), dtype=float)
    out[:, 0] = -(np.pi / 2) * np.log(2) + (np.pi / 4) * T[:, 2]
    for n in range(1, nmax):
        out[:, n] = -(np.pi / 2) * (T[:, n] / n - T[:, n + 2] / (n + 2))
    return out


def log_point_t(nmax: int, s) -> np.ndarray:
    """lam[i, n] = int ln|s_i - t| T_n(t)/sqrt(w(t)) dt = -pi ln2 [n=0]; -(pi/n) T_n(s)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    T = np.cos(np.arange(nmax)[None, :] * np.arccos(np.clip(s, -1, 1))[:, None])
    out = np.empty((len(s), nmax))
    out[:, 0] = -np.pi * np.log(2)
    for n in range(1, nmax):
        out[:, n] = -(np.pi / n) * T[:, n]
    return out


def pv_t_over_linear(nmax: int, s) -> np.ndarray:
    """R[i, p] = PV int_{-1}^{1} T_p(t)/(t - s_i) dt for |s_i| < 1.

    Recurrence R_{p+1} = 2 s R_p - R_{p-1} + 2 J(p) with
    R_0 = ln|(1-s)/(1+s)| and R_1 = 2 + s R_0.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    R = np.zeros((len(s), nmax))
    R[:, 0] = np.log(np.abs((1 - s) / (1 + s)))
    if nmax > 1:
        R[:, 1] = 2.0 + s * R[:, 0]
    for p in range(1, nmax - 1):
        R[:, p + 1] = 2 * s * R[:, p] - R[:, p - 1] + 2 * plain_t_moment(p)
    return R


def log_point_plain_t(nmax: int, s) -> np.ndarray:
    """Lam[i, n] = int_{-1}^{1} ln|s_i - t| T_n(t) dt, |s_i| < 1 (also valid |s|>1).

    Integration by parts with the T antiderivative A_n and the PV integrals
    above: Lam_n = A_n(1) ln|s-1| - A_n(-1) ln|s+1| - PV int A_n/(t-s) dt.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    R = pv_t_over_linear(nmax + 2, s)
    out = np.zeros((len(s), nmax))
    l1 = np.log(np.abs(s - 1.0))
    l2 = np.log(np.abs(s + 1.0))
    for n in range(nmax):
        if n == 0:
            # A_0 = t
            out[:, 0] = l1 - (-1.0) * l2 - R[:, 1]
        elif n == 1:
            # A_1 = t^2/2 = (T_2 + T_0)/4
            out[:, 1] = 0.5 * l1 - 0.5 * l2 - 0.25 * (R[:, 2] + R[:, 0])
        else:
            ap = 0.5 / (n + 1)
            am = 0.5 / (n - 1)
            A1 = ap - am                      # A_n(1)
            Am1 = ap * (-1.0) ** (n + 1) - am * (-1.0) ** (n - 1)
            out[:, n] = A1 * l1 - Am1 * l2 - (ap * R[:, n + 1] - am * R[:, n - 1])
    return out


# ---------------------------------------------------------------------------
# Chebyshev coefficient extraction (DCT on the roots grid)
# ---------------------------------------------------------------------------
def cheb_coeffs_1d(values: np.ndarray) -> np.ndarray:
    """T-coefficients of the interpolant through f(cos((2i+1)pi/2M))."""
    M = values.shape[0]
    c = dct(values, type=2, axis=0) / M
    c[0] *= 0.5
    return c


def cheb_coeffs_2d(f, M: int) -> np.ndarray:
    """C[p, q] with f(s, t) ~ sum C[p,q] T_p(s) T_q(t), roots grid of size M."""
    i = np.arange(M)
    s = np.cos((2 * i + 1) * np.pi / (2 * M))
    S, T = np.meshgrid(s, s, indexing="ij")
    F = np.asarray(f(S, T), dtype=complex)
    C = dct(dct(F, type=2, axis=0), type=2, axis=1) / (M * M)
    C[0, :] *= 0.5
    C[:, 0] *= 0.5
    return C


def cheb_grid(M: int) -> np.ndarray:
    i = np.arange(M)
    return np.cos((2 * i + 1) * np.pi / (2 * M))


# ---------------------------------------------------------------------------
# edge-log expansions
# ---------------------------------------------------------------------------
def edge_log_t_coeffs(nmax: int) -> np.ndarray:
    """T-coefficients of (1-s) ln(1-s) on [-1, 1] (exact).

    From ln(1-s) = -ln2 - 2 sum_r T_r/r and (1-s)T_r = T_r - (T_{r+1}+T_{|r-1|})/2;
    coefficients decay like 2/j^3.  The mirror function (1+s)ln(1+s) has
    coefficients (-1)^j times these.
    """
    b = np.zeros(nmax)
    b[0] -= np.log(2)
    if nmax > 1:
        b[1] += np.log(2)
    for r in range(1, nmax + 2):
        c = -2.0 / r
        if r < nmax:
            b[r] += c
        if r + 1 < nmax:
            b[r + 1] -= c / 2
        j = abs(r - 1)
        if j < nmax:
            b[j] -= c / 2
    return b


def _alt_harmonic_tail(m: int) -> float:
    """T(m) = sum_{j>=m} (-1)^j / j (exact, via digamma)."""
    from scipy.special import psi
    return (-1.0) ** m * 0.5 * (psi((m + 1) / 2.0) - psi(m / 2.0))


def edge_log_u_tail_sum(n_from: int, alternating: bool) -> float:
    """sum_{n>=n_from} (+-1)^n (n+1) u_n for the U-image of (1-s)ln(1-s).

    The U coefficients satisfy (n+1) u_n = 1/(n(n-1)) - 1/((n+2)(n+3)) for
    n >= 2, so the plain sum telescopes and the alternating one reduces to
    digamma tails.  Used to evaluate edge limits of densities that fold the
    edge-log expansion into a truncated coefficient vector.
    """
    n = max(int(n_from), 2)
    if not alternating:
        return 1.0 / (n - 1) - 1.0 / (n + 2)
    A = -_alt_harmonic_tail(n - 1) - _alt_harmonic_tail(n)
    C = _alt_harmonic_tail(n + 2) + _alt_harmonic_tail(n + 3)
    return A - C


# ---------------------------------------------------------------------------
# edge-graded quadrature in the theta variable
# ---------------------------------------------------------------------------
def theta_graded(dist: float, nper: int = 20, ratio: float = 2.0):
    """Panelized Gauss nodes on theta in [0, pi], geometric toward theta = 0.

    Resolves integrands on s = cos(theta) whose nearest feature is at
    distance `dist` beyond the s = +1 endpoint (feature scale sqrt(dist)
    in theta).  The innermost panel size is snapped to a power of two so
    the layout is locally constant in `dist` (keeps finite-difference
    stencils of evaluated fields noise-free).  Returns (theta_nodes, weights).
    """
    th_min = max(0.25 * np.sqrt(max(dist, 1e-14)), 1e-7)
    th_min = 2.0 ** np.floor(np.log2(th_min))
    edges = [0.0, th_min]
    t = th_min
    while t < np.pi:
        t = min(t * ratio, np.pi)
        edges.append(t)
    xg, wg = np.polynomial.legendre.leggauss(nper)
    nodes = []
    wts = []
    for t0, t1 in zip(edges[:-1], edges[1:]):
        nodes.append(t0 + (xg + 1) / 2 * (t1 - t0))
        wts.append(wg * (t1 - t0) / 2)
    return np.concatenate(nodes), np.concatenate(wts)

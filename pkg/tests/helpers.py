"""Seeded random objects and brute-force oracles shared by the tests.

The oracles here deliberately avoid the package's fast paths: twirls are
integrated by quadrature over the group, superoperators are built column
by column from basis matrices.
"""
import numpy as np
import scipy.linalg

from twirlkit import matrix as mx
from twirlkit.groups import U1Density, U1Rep, fejer_density, rep_unitary


def random_state(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(rng, d, n_kraus=3):
    """Random CPTP map: Kraus operators from blocks of a random isometry."""
    v = random_unitary(rng, d * n_kraus)[:, :d]
    return mx.KrausOperation(tuple(v[i * d:(i + 1) * d] for i in range(n_kraus)))


def random_fejer(rng, degree):
    amps = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    return fejer_density(amps)


def random_charges(rng, d, spread=3):
    return rng.integers(-spread, spread + 1, size=d)


def superop_by_columns(fn, d):
    """Superoperator of a linear map ``fn`` on d x d matrices, from basis images."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for i in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            s[:, i + d * j] = mx.vec(fn(e))
    return s


def quadrature_twirl(rho, density: U1Density, rep: U1Rep, n_points=None):
    """int dphi/2pi w(phi) U_phi rho U_phi^dag by an equispaced rule.

    Exact for trigonometric polynomials of degree below ``n_points``; the
    density is evaluated pointwise, so it must be a nonnegative polynomial.
    """
    k = max(density.max_k, rep.max_difference())
    n_points = n_points or 4 * k + 8
    phis = 2 * np.pi * np.arange(n_points) / n_points
    weights = density.evaluate(phis) / n_points
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for phi, wt in zip(phis, weights):
        u = rep_unitary(rep, phi)
        out += wt * u @ rho @ u.conj().T
    return out


def circle_convolution_coeffs(w1: U1Density, w2: U1Density, n_points=256):
    """Fourier coefficients of int dpsi/2pi w1(psi) w2(phi - psi), by quadrature."""
    phis = 2 * np.pi * np.arange(n_points) / n_points
    f1 = w1.evaluate(phis)
    f2 = w2.evaluate(phis)
    v = np.array([np.mean(f1 * f2[(j - np.arange(n_points)) % n_points])
                  for j in range(n_points)])
    k = w1.max_k + w2.max_k
    ks = np.arange(-k, k + 1)
    return np.array([np.mean(v * np.exp(1j * kk * phis)) for kk in ks])


def toeplitz_psd(coeffs):
    c = np.asarray(coeffs)
    k = c.size // 2
    return np.linalg.eigvalsh(scipy.linalg.toeplitz(c[k:])).min()

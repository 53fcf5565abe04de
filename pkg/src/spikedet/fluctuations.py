"""Second-order (fluctuation) laws of the outlier eigenpairs.

For a separated spike at outlier location rho, the joint fluctuations of
the eigenspace projection and the eigenvalue block are governed by a pair
of 2x2 matrices D(rho) and R(rho) built from h, m and their derivatives,
coupled to independent GUE matrices of the spike's multiplicity.  The MP
specialization C(rho) = D R D^T has a closed form used by the likelihood
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral_law import MarchenkoPastur, SpectralLaw
from .spike_algebra import (
    NotSeparatedError,
    SpikeDescriptor,
    rho_for,
    separation_check,
    zeta_for,
)

# Eigenvalues of D R D^T below this are a hard error; within [-PSD_TOL, 0)
# they are clipped to zero before taking the matrix square root.
PSD_TOL = 1e-10


@dataclass(frozen=True)
class FluctuationLaw:
    """Per-spike second-order law: location, projection limit, covariances."""

    rho: float
    zeta: float
    D: np.ndarray
    R: np.ndarray
    C: np.ndarray


def d_matrix(rho: float, law: SpectralLaw) -> np.ndarray:
    """2x2 coefficient matrix mapping resolvent fluctuations to (V, L)."""
    law.check_off_support(rho)
    h = law.h(rho)
    h1 = law.h_prime(rho)
    h2 = law.h_second(rho)
    return np.array(
        [
            [h * (1.0 + h) * h2 / h1**3, -h * (1.0 + h) / h1**2],
            [-rho / h1, 0.0],
        ]
    )


def r_matrix(rho: float, law: SpectralLaw) -> np.ndarray:
    """Covariance of the centered resolvent pair at rho.

    Entries are the central moments of ((l-rho)^-1, (l-rho)^-2) under the
    limiting law, expressed through m and its derivatives.
    """
    law.check_off_support(rho)
    m = law.m(rho).real
    m1 = law.m_derivative(rho, 1).real
    m2 = law.m_derivative(rho, 2).real
    m3 = law.m_derivative(rho, 3).real
    off = m2 / 2.0 - m * m1
    return np.array([[m1 - m * m, off], [off, m3 / 6.0 - m1 * m1]])


def c_matrix_mp(omega: float, c: float) -> np.ndarray:
    """Closed-form D R D^T for the MP law at a separated spike."""
    law = MarchenkoPastur(c)
    if not separation_check(omega, law):
        edge = law.b if omega > 0 else law.a
        raise NotSeparatedError(f"spike omega={omega} not separated at c={c}", edge)
    w = omega
    c11 = (
        c**2
        * (1.0 + w) ** 2
        / ((c + w) ** 2 * (w**2 - c))
        * (c * (1.0 + w) ** 2 / (c + w) ** 2 + 1.0)
    )
    c12 = (1.0 + w) ** 3 * c**2 / ((w + c) ** 2 * w)
    c22 = c * (1.0 + w) ** 2 * (w**2 - c) / w**2
    return np.array([[c11, c12], [c12, c22]])


def fluctuation_law(omega: float, law: SpectralLaw) -> FluctuationLaw:
    """Bundle rho, zeta, D, R and C = D R D^T for one separated spike."""
    rho = rho_for(omega, law)
    zeta = zeta_for(omega, law)
    D = d_matrix(rho, law)
    R = r_matrix(rho, law)
    return FluctuationLaw(rho=rho, zeta=zeta, D=D, R=R, C=D @ R @ D.T)


def _psd_sqrt_2x2(C: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root with the documented clipping rule."""
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    if w.min() < -PSD_TOL:
        raise ValueError(f"covariance not PSD: eigenvalue {w.min()}")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def sample_gue(j: int, rng: np.random.Generator) -> np.ndarray:
    """One GUE(j) draw: real N(0,1) diagonal, unit-variance complex upper part."""
    if j < 1:
        raise ValueError(f"dimension must be >= 1, got {j}")
    g = (rng.standard_normal((j, j)) + 1j * rng.standard_normal((j, j))) / math.sqrt(2.0)
    return (g + g.conj().T) / math.sqrt(2.0)


def sample_joint_fluctuation(
    spike: SpikeDescriptor, law: SpectralLaw, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (G, L) for one spike: projection matrix and eigenvalue vector.

    G is the Hermitian j x j limit of the scaled projection fluctuation;
    L holds the eigenvalues of the coupled matrix K sorted decreasing,
    matching the ordering of the sample eigenvalue block.
    """
    flaw = fluctuation_law(spike.omega, law)
    s = _psd_sqrt_2x2(flaw.C)
    j = spike.multiplicity
    m1 = sample_gue(j, rng)
    m2 = sample_gue(j, rng)
    g = s[0, 0] * m1 + s[0, 1] * m2
    k = s[1, 0] * m1 + s[1, 1] * m2
    lam = np.linalg.eigvalsh(k)[::-1]
    return g, lam


def gaussian_logpdf(x: np.ndarray, cov: np.ndarray) -> float:
    """Log density of N(0, cov) at x; rejects near-singular covariances."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if np.linalg.cond(cov) >= 1e12:
        raise ValueError("covariance is numerically singular")
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance must be positive definite")
    quad = float(x @ np.linalg.solve(cov, x))
    return -0.5 * quad - 0.5 * logdet - 0.5 * len(x) * math.log(2.0 * math.pi)


__all__ = [
    "FluctuationLaw",
    "d_matrix",
    "r_matrix",
    "c_matrix_mp",
    "fluctuation_law",
    "sample_gue",
    "sample_joint_fluctuation",
    "gaussian_logpdf",
]

"""Spike <-> outlier-eigenvalue algebra.

Maps a population spike amplitude ``omega`` to the almost-sure location
``rho`` of the corresponding sample eigenvalue outside the bulk, and to the
limiting squared alignment ``zeta`` between sample and population
eigenspaces.  Both the Marchenko-Pastur closed forms and the general-law
forms (root finding on h) are provided, and they must agree; tests pit one
against the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .spectral_law import MarchenkoPastur, OffSupportError, SpectralLaw


class NotSeparatedError(ValueError):
    """Spike too weak to escape the bulk; carries the edge it collapses to."""

    def __init__(self, message: str, edge: float) -> None:
        super().__init__(message)
        self.edge = edge


class InsideBulkError(ValueError):
    """Observed eigenvalue sits inside the bulk, inversion undefined."""


@dataclass(frozen=True)
class SpikeDescriptor:
    """One spike of the perturbation: amplitude, multiplicity, block start.

    ``index_offset`` is the 0-based position of the spike's eigenvalue block
    among the sorted sample eigenvalues: cumulative multiplicities from the
    top for positive spikes, from the bottom for negative ones.
    """

    omega: float
    multiplicity: int
    index_offset: int

    def __post_init__(self) -> None:
        if self.omega <= -1.0 or self.omega == 0.0:
            raise ValueError(f"omega must be > -1 and nonzero, got {self.omega}")
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be >= 1, got {self.multiplicity}")


def spike_descriptors(
    omegas: list[float], multiplicities: list[int], matrix_dim: int
) -> list[SpikeDescriptor]:
    """Block offsets for spikes sorted by decreasing omega.

    Positive spikes occupy the top of the spectrum (offset = cumulative
    multiplicity of stronger spikes); negative spikes occupy the bottom
    (offset counted back from ``matrix_dim``).
    """
    if sorted(omegas, reverse=True) != list(omegas):
        raise ValueError("omegas must be sorted decreasing")
    if len(omegas) != len(multiplicities):
        raise ValueError("omegas and multiplicities must have equal length")
    if any(om == 0.0 for om in omegas):
        raise ValueError("omega = 0 is not a spike")
    if sum(multiplicities) > matrix_dim:
        raise ValueError("total multiplicity exceeds matrix dimension")
    out = []
    top = 0
    for om, j in zip(omegas, multiplicities):
        if om > 0:
            out.append(SpikeDescriptor(om, j, top))
            top += j
    tail = 0
    negatives = []
    for om, j in zip(reversed(omegas), reversed(multiplicities)):
        if om < 0:
            tail += j
            negatives.append(SpikeDescriptor(om, j, matrix_dim - tail))
    out.extend(reversed(negatives))
    return out


def separation_check(omega: float, law: SpectralLaw, guard: float = 1.0) -> bool:
    """True iff the spike escapes the bulk (strict inequality).

    ``guard`` >= 1 tightens the requirement to |omega| > guard*sqrt(c) for
    the MP law; the asymptotics degrade badly right at the threshold.
    """
    if omega <= -1.0 or omega == 0.0:
        raise ValueError(f"omega must be > -1 and nonzero, got {omega}")
    if guard < 1.0:
        raise ValueError(f"guard factor must be >= 1, got {guard}")
    if isinstance(law, MarchenkoPastur):
        return abs(omega) > guard * math.sqrt(law.c)
    h_a, h_b = law.h_edge_limits()
    target = (1.0 + omega) / omega
    if omega > 0:
        ok = h_b + target < 0.0
    else:
        ok = h_a + target > 0.0
    if ok and guard > 1.0:
        # generic guard: compare against the amplitude whose root would sit
        # exactly at the guarded edge
        ok = abs(omega) > guard * abs(omega_at_edge(law, omega > 0))
    return ok


def omega_at_edge(law: SpectralLaw, positive: bool) -> float:
    """Amplitude whose outlier collapses onto the near edge."""
    h_a, h_b = law.h_edge_limits()
    h_lim = h_b if positive else h_a
    # h(rho) = -(1+w)/w  =>  w = -1/(1+h)
    return -1.0 / (1.0 + h_lim)


def rho_of_omega_mp(omega: float, c: float) -> float:
    """MP closed form rho = 1 + w + c(1+w)/w for a separated spike."""
    law = MarchenkoPastur(c)
    if not separation_check(omega, law):
        edge = law.b if omega > 0 else law.a
        raise NotSeparatedError(
            f"spike omega={omega} not separated at c={c} (|omega| <= sqrt(c))", edge
        )
    return 1.0 + omega + c * (1.0 + omega) / omega


def rho_of_omega_general(omega: float, law: SpectralLaw) -> float:
    """Outlier location as the root of h(rho) + (1+omega)/omega = 0.

    Bracketed bisection (brentq) refined by Newton; h is strictly monotone
    off the support so the bracket always isolates a single root.
    """
    if omega <= -1.0 or omega == 0.0:
        raise ValueError(f"omega must be > -1 and nonzero, got {omega}")
    if not separation_check(omega, law):
        edge = law.b if omega > 0 else law.a
        raise NotSeparatedError(
            f"spike omega={omega} not separated for this law", edge
        )
    target = -(1.0 + omega) / omega
    span = max(law.b - law.a, law.b, 1.0)

    if omega > 0:
        lo = law.b + 1e-9 * span
        while law.h(lo) >= target:  # root closer to the edge than lo
            lo = law.b + (lo - law.b) / 16.0
        hi = law.b + max(10.0, 4.0 * law.b * (1.0 + omega) / omega)
        while law.h(hi) <= target:
            hi = law.b + 2.0 * (hi - law.b)
    else:
        hi = law.a - 1e-9 * span
        while law.h(hi) <= target:
            hi = law.a - (law.a - hi) / 16.0
        lo = min(law.a / 2.0, hi / 2.0)
        while law.h(lo) >= target:
            lo /= 2.0

    rho = brentq(lambda x: law.h(x) - target, lo, hi, xtol=1e-14, rtol=8.9e-16)
    # Newton polish drives the defining residual to ~1e-15
    for _ in range(3):
        resid = law.h(rho) - target
        if abs(resid) <= 1e-13:
            break
        step = resid / law.h_prime(rho)
        candidate = rho - step
        if omega > 0 and candidate <= law.b:
            break
        if omega < 0 and not 0.0 < candidate < law.a:
            break
        rho = candidate
    return float(rho)


def omega_hat_from_lambda(lambda_hat: float, c: float) -> float:
    """Invert the MP spike map: observed outlier -> amplitude estimate.

    Exact inverse of rho_of_omega_mp; '+' branch above the bulk, '-' branch
    below.  The edges themselves map to +-sqrt(c) (vanishing discriminant).
    """
    a, b = (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2
    if a < lambda_hat < b:
        raise InsideBulkError(
            f"lambda_hat={lambda_hat} inside the bulk [{a}, {b}], not invertible"
        )
    half = 0.5 * (lambda_hat - (1.0 + c))
    disc = half * half - c
    disc = max(disc, 0.0)  # clip rounding residue at the edges
    root = math.sqrt(disc)
    return half + root if lambda_hat >= b else half - root


def zeta_mp(omega: float, c: float) -> float:
    """MP closed-form projection limit (1 - c/w^2) / (1 + c/w)."""
    law = MarchenkoPastur(c)
    if not separation_check(omega, law):
        edge = law.b if omega > 0 else law.a
        raise NotSeparatedError(
            f"spike omega={omega} not separated at c={c}", edge
        )
    return (1.0 - c / omega**2) / (1.0 + c / omega)


def zeta_general(rho: float, law: SpectralLaw) -> float:
    """Projection limit m(rho)(1 + h(rho)) / h'(rho) at an outlier location."""
    law.check_off_support(rho)
    m = law.m(rho).real
    return float(m * (1.0 + law.h(rho)) / law.h_prime(rho))


def rho_for(omega: float, law: SpectralLaw) -> float:
    """Outlier location, closed form when available."""
    if isinstance(law, MarchenkoPastur):
        return rho_of_omega_mp(omega, law.c)
    return rho_of_omega_general(omega, law)


def zeta_for(omega: float, law: SpectralLaw) -> float:
    """Projection limit, closed form when available."""
    if isinstance(law, MarchenkoPastur):
        return zeta_mp(omega, law.c)
    return zeta_general(rho_of_omega_general(omega, law), law)


__all__ = [
    "SpikeDescriptor",
    "NotSeparatedError",
    "InsideBulkError",
    "OffSupportError",
    "spike_descriptors",
    "separation_check",
    "omega_at_edge",
    "rho_of_omega_mp",
    "rho_of_omega_general",
    "omega_hat_from_lambda",
    "zeta_mp",
    "zeta_general",
    "rho_for",
    "zeta_for",
]

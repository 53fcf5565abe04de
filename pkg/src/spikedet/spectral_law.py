"""Limiting spectral laws of the noise Gram matrix.

The detection and localization machinery only needs a handful of analytic
objects from the limiting eigenvalue distribution of the noise part: its
Stieltjes transform m(z) with three derivatives, the support edges [a, b],
the aspect ratio c, and the map h(x) = x*m(x) with two derivatives.
``SpectralLaw`` fixes that interface; ``MarchenkoPastur`` is the shipped
closed-form instance.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

# Absolute guard band around [a, b]; the square root in the MP transform
# loses half its digits right at the edges.
SUPPORT_TOL = 1e-9


class OffSupportError(ValueError):
    """Evaluation point lies on (or too close to) the support [a, b]."""


class SpectralLaw(ABC):
    """Limiting spectral law behind an abstract analytic interface.

    Concrete laws provide ``c``, the support edges ``a`` and ``b``, and the
    Stieltjes transform with derivatives up to third order.  Everything
    else (``h`` and its derivatives, edge limits, argument checking) is
    derived here, so a non-MP law plugs into the spike algebra unchanged.
    """

    c: float
    a: float
    b: float

    @abstractmethod
    def m(self, z: complex) -> complex:
        """Stieltjes transform at ``z``, analytic off [a, b]."""

    @abstractmethod
    def m_derivative(self, z: complex, order: int = 1) -> complex:
        """d^order/dz^order of the Stieltjes transform, order in {1, 2, 3}."""

    # -- derived real-line helpers -------------------------------------

    def _check_real_off_support(self, x: float) -> None:
        if x <= 0.0:
            raise OffSupportError(f"x={x} not in the positive reals off [a, b]")
        if self.a - SUPPORT_TOL <= x <= self.b + SUPPORT_TOL:
            raise OffSupportError(
                f"x={x} inside the support guard band [{self.a}, {self.b}]"
            )

    def check_off_support(self, z: complex) -> None:
        """Reject points where the transform is not safely analytic."""
        z = complex(z)
        if z == 0:
            raise OffSupportError("z=0 excluded")
        if abs(z.imag) <= SUPPORT_TOL and (
            self.a - SUPPORT_TOL <= z.real <= self.b + SUPPORT_TOL
        ):
            raise OffSupportError(
                f"z={z} inside the support guard band [{self.a}, {self.b}]"
            )

    def h(self, x: float) -> float:
        """h(x) = x*m(x) on the reals off [a, b]."""
        self._check_real_off_support(x)
        return float(x * self.m(x).real)

    def h_prime(self, x: float) -> float:
        self._check_real_off_support(x)
        return float((self.m(x) + x * self.m_derivative(x, 1)).real)

    def h_second(self, x: float) -> float:
        self._check_real_off_support(x)
        return float((2.0 * self.m_derivative(x, 1) + x * self.m_derivative(x, 2)).real)

    def h_edge_limits(self) -> tuple[float, float]:
        """One-sided limits (h(a-), h(b+)) used by the separation test.

        Default: Richardson extrapolation in sqrt(step), since h has a
        square-root branch point at each edge.  Closed-form laws override.
        """
        span = max(self.b - self.a, self.b, 1.0)

        def _extrapolate(edge: float, sign: float) -> float:
            d = 1e-6 * span
            h1 = self.h(edge + sign * d)
            h2 = self.h(edge + sign * d / 4.0)
            return 2.0 * h2 - h1

        h_a = _extrapolate(self.a, -1.0) if self.a > 0 else math.inf
        h_b = _extrapolate(self.b, +1.0)
        return h_a, h_b


class MarchenkoPastur(SpectralLaw):
    """Marchenko-Pastur law with ratio ``c`` in (0, 1), unit variance.

    The transform is the root of c*z*m^2 - (1-c-z)*m + 1 = 0 with
    m(C+) in C+ and m(x) -> 0- as x -> +infinity.  Derivatives come from
    implicit differentiation of that quadratic, so they are exact to
    rounding and cheap to evaluate.
    """

    def __init__(self, c: float) -> None:
        if not 0.0 < c < 1.0:
            raise ValueError(f"c must lie in (0, 1), got {c}")
        self.c = float(c)
        self.a = (1.0 - math.sqrt(c)) ** 2
        self.b = (1.0 + math.sqrt(c)) ** 2

    def _branch_sqrt(self, z: complex) -> complex:
        # sqrt((z-a)(z-b)) with cut on [a, b] and ~ +z at infinity; the
        # principal-branch product keeps both real components correct.
        return np.sqrt(complex(z - self.a)) * np.sqrt(complex(z - self.b))

    def m(self, z: complex) -> complex:
        self.check_off_support(z)
        z = complex(z)
        return (1.0 - self.c - z + self._branch_sqrt(z)) / (2.0 * z * self.c)

    def m_derivative(self, z: complex, order: int = 1) -> complex:
        if order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {order}")
        self.check_off_support(z)
        z = complex(z)
        c = self.c
        m = (1.0 - c - z + self._branch_sqrt(z)) / (2.0 * z * c)
        f = self._branch_sqrt(z)
        # Quadratic Q(m, z) = c z m^2 - (1-c-z) m + 1 = 0 gives
        # dQ/dm = f and dQ/dz = c m^2 + m, hence the chain below.
        u = c * m * m + m
        m1 = -u / f
        if order == 1:
            return m1
        fp = (z - (1.0 + c)) / f
        u1 = (2.0 * c * m + 1.0) * m1
        m2 = -u1 / f + u * fp / f**2
        if order == 2:
            return m2
        u2 = 2.0 * c * m1 * m1 + (2.0 * c * m + 1.0) * m2
        fpp = 1.0 / f - (z - (1.0 + c)) ** 2 / f**3
        return -u2 / f + (2.0 * u1 * fp + u * fpp) / f**2 - 2.0 * u * fp * fp / f**3

    def h_edge_limits(self) -> tuple[float, float]:
        s = math.sqrt(self.c)
        return (1.0 - s) / s, -(1.0 + s) / s


def mp_stieltjes(z: complex, c: float) -> complex:
    """Marchenko-Pastur Stieltjes transform m(z) for ratio ``c``."""
    return MarchenkoPastur(c).m(z)


def mp_edges(c: float) -> tuple[float, float]:
    """Support edges a = (1-sqrt(c))^2, b = (1+sqrt(c))^2; c in [0, 1]."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    s = math.sqrt(c)
    return (1.0 - s) ** 2, (1.0 + s) ** 2


def law_h(x: float, law: SpectralLaw) -> float:
    return law.h(x)


def law_h_prime(x: float, law: SpectralLaw) -> float:
    return law.h_prime(x)


def law_h_second(x: float, law: SpectralLaw) -> float:
    return law.h_second(x)


def law_m_derivatives(z: complex, law: SpectralLaw, order: int) -> complex:
    return law.m_derivative(z, order)

"""Failure-presence tests from the scaled extreme eigenvalues.

The largest (and, when meaningful, smallest) sample eigenvalue is centered
and scaled at the bulk edge and compared against complex Tracy-Widom
quantiles.  One-sided, fixed-split two-sided, and symmetric two-sided
variants are provided; the two-sided forms rely on the conjectured
asymptotic independence of the two edges (see README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .failure_models import FailureScenario
from .spectrum import SpikeSpectrum
from .tracy_widom import tw2_cdf, tw2_quantile

MODES = ("upper", "lower", "two_sided_fixed_b", "two_sided_symmetric")


class ConfigError(ValueError):
    """Detection configuration invalid for the data shape or thresholds."""


@dataclass(frozen=True)
class DetectionConfig:
    """False-alarm rate and which edge(s) the test watches."""

    eta: float
    mode: str = "upper"
    fixed_b: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.mode == "two_sided_fixed_b" and self.fixed_b is None:
            raise ConfigError("two_sided_fixed_b requires fixed_b")


@dataclass(frozen=True)
class DetectionReport:
    decision: str  # "H0" or "H0_bar"
    lambda1_scaled: float
    lambdaN_scaled: float | None
    thresholds: dict
    outlier_count_upper: int
    outlier_count_lower: int | None

    @property
    def rejected(self) -> bool:
        return self.decision == "H0_bar"


def scale_largest(lambda1: float, N: int, cN: float) -> float:
    """Edge-centered Tracy-Widom scaling of the largest eigenvalue."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if cN <= 0.0:
        raise ConfigError(f"cN must be positive, got {cN}")
    s = math.sqrt(cN)
    return N ** (2.0 / 3.0) * (lambda1 - (1.0 + s) ** 2) / ((1.0 + s) ** (4.0 / 3.0) * s)


def scale_smallest(lambdaN: float, N: int, cN: float) -> float:
    """Mirror scaling at the lower edge; grows as lambdaN drops below it."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 0.0 < cN < 1.0:
        raise ConfigError(f"lower-edge scaling requires cN in (0, 1), got {cN}")
    s = math.sqrt(cN)
    return N ** (2.0 / 3.0) * (lambdaN - (1.0 - s) ** 2) / (-((1.0 - s) ** (4.0 / 3.0)) * s)


def detect(spectrum: SpikeSpectrum, config: DetectionConfig) -> DetectionReport:
    """Decide H0 vs H0_bar from the scaled extreme eigenvalues."""
    N, cN = spectrum.N, spectrum.c_N
    eta = config.eta
    lam1p = scale_largest(float(spectrum.eigenvalues[0]), N, cN)

    needs_lower = config.mode in ("lower", "two_sided_fixed_b", "two_sided_symmetric")
    lamNp: float | None = None
    if cN < 1.0:
        lamNp = scale_smallest(float(spectrum.eigenvalues[-1]), N, cN)
    elif needs_lower:
        raise ConfigError(f"mode {config.mode!r} needs cN < 1, got cN={cN}")

    thresholds: dict = {}
    if config.mode == "upper":
        q = tw2_quantile(1.0 - eta)
        thresholds["upper"] = q
        rejected = lam1p > q
    elif config.mode == "lower":
        q = tw2_quantile(1.0 - eta)
        thresholds["lower"] = q
        rejected = lamNp > q
    elif config.mode == "two_sided_fixed_b":
        b = float(config.fixed_b)
        ratio = (1.0 - eta) / tw2_cdf(b)
        if ratio > 1.0 + 1e-12:
            raise ConfigError(
                f"fixed_b={b} spends more than the false-alarm budget eta={eta}"
            )
        # ratio == 1 is the boundary where the whole budget goes to the
        # lower edge: the test degenerates to the pure lower test.
        q_upper = math.inf if ratio >= 1.0 - 1e-12 else tw2_quantile(ratio)
        thresholds["upper"] = q_upper
        thresholds["lower"] = b
        rejected = min(b - lamNp, q_upper - lam1p) < 0.0
    else:  # two_sided_symmetric
        q = tw2_quantile(math.sqrt(1.0 - eta))
        thresholds["upper"] = q
        thresholds["lower"] = q
        rejected = max(lamNp, lam1p) > q

    # Outlier counting uses the one-sided quantile as the edge margin
    # regardless of mode, per the reporting convention.
    margin = tw2_quantile(1.0 - eta)
    s = math.sqrt(cN)
    upper_cut = (1.0 + s) ** 2 + margin * (1.0 + s) ** (4.0 / 3.0) * s / N ** (2.0 / 3.0)
    count_upper = int(np.sum(spectrum.eigenvalues > upper_cut))
    count_lower: int | None = None
    if cN < 1.0:
        lower_cut = (1.0 - s) ** 2 - margin * (1.0 - s) ** (4.0 / 3.0) * s / N ** (2.0 / 3.0)
        count_lower = int(np.sum(spectrum.eigenvalues < lower_cut))

    return DetectionReport(
        decision="H0_bar" if rejected else "H0",
        lambda1_scaled=lam1p,
        lambdaN_scaled=lamNp,
        thresholds=thresholds,
        outlier_count_upper=count_upper,
        outlier_count_lower=count_lower,
    )


@dataclass(frozen=True)
class ObservabilityReport:
    c_plus: float | None
    c_minus: float | None
    n_min_upper: int | None
    n_min_lower: int | None


def observability_thresholds(
    scenarios: list[FailureScenario], N: int
) -> ObservabilityReport:
    """Catalog-wide detectability thresholds c+ and c- and minimal n.

    c+ is the infimum over hypotheses of the squared strongest positive
    spike (c- likewise for the most negative); a hypothesis with no spike
    of the relevant sign simply does not constrain that threshold.
    """
    if not scenarios:
        raise ValueError("scenario list is empty")
    pos = []
    neg = []
    for sc in scenarios:
        omegas = [sp.omega for sp in sc.spikes]
        p = [w for w in omegas if w > 0]
        m = [w for w in omegas if w < 0]
        if p:
            pos.append(max(p) ** 2)
        if m:
            neg.append(min(m) ** 2)
    c_plus = min(pos) if pos else None
    c_minus = min(neg) if neg else None
    return ObservabilityReport(
        c_plus=c_plus,
        c_minus=c_minus,
        n_min_upper=math.ceil(N / c_plus) if c_plus else None,
        n_min_lower=math.ceil(N / c_minus) if c_minus else None,
    )

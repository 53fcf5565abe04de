"""Failure identification from eigenvalue blocks and eigenspace projections.

Each hypothesis contributes, per separated spike, a scaled projection
statistic V and eigenvalue-block statistic L whose joint limiting law is
known; the likelihood test scores hypotheses with the 2x2 Gaussian for
unit-multiplicity spikes and a projection-only quadratic otherwise.  An
amplitude-free variant matches the observed alignment against the value
implied by the observed outlier location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .failure_models import FailureScenario
from .fluctuations import FluctuationLaw, fluctuation_law, gaussian_logpdf
from .spectral_law import MarchenkoPastur
from .spike_algebra import (
    InsideBulkError,
    omega_hat_from_lambda,
    separation_check,
    spike_descriptors,
)
from .spectrum import SpikeSpectrum

LOG_2PI = math.log(2.0 * math.pi)


@lru_cache(maxsize=65536)
def _flaw_cached(omega: float, c: float) -> FluctuationLaw:
    # hypothesis catalogs re-evaluate the same (omega, c_N) pairs every trial
    return fluctuation_law(omega, MarchenkoPastur(c))


@dataclass(frozen=True)
class SpikeBlockStats:
    """Statistics of one separated spike against the sample spectrum."""

    omega: float
    multiplicity: int
    index_offset: int
    law: FluctuationLaw
    V: np.ndarray  # j x j Hermitian
    L: np.ndarray  # length j

    def v_bar(self) -> np.ndarray:
        """Stack V into the real vector (diag, sqrt2*Re upper, sqrt2*Im upper)."""
        j = self.multiplicity
        iu = np.triu_indices(j, k=1)
        upper = self.V[iu]
        return np.concatenate(
            [self.V.diagonal().real, math.sqrt(2.0) * upper.real, math.sqrt(2.0) * upper.imag]
        )


@dataclass(frozen=True)
class SpikeStatistics:
    scenario_id: int
    blocks: tuple[SpikeBlockStats, ...]


@dataclass(frozen=True)
class LocalizeOptions:
    """Knobs of the likelihood test.

    ``max_top``/``max_bottom`` restrict scoring to the strongest positive /
    most negative spikes; ``use_eigenvalue_terms=False`` scores projections
    only, which converges faster at moderate sizes.  ``guard`` tightens the
    separation requirement.
    """

    preselect_count: int | None = None
    max_top: int | None = None
    max_bottom: int | None = None
    use_eigenvalue_terms: bool = True
    guard: float = 1.0


@dataclass(frozen=True)
class LocalizationReport:
    chosen: int | None
    scores: dict
    subset: list
    method: str
    status: str  # "ok" or "inconclusive"


def spike_statistics(
    spectrum: SpikeSpectrum, scenario: FailureScenario, guard: float = 1.0
) -> SpikeStatistics:
    """V and L statistics for every separated spike of one hypothesis.

    Non-separated spikes are skipped; positive spikes read eigenvector
    columns from the top of the spectrum, negative ones from the bottom.
    """
    law = MarchenkoPastur(spectrum.c_N)
    retained = [
        sp for sp in scenario.spikes if separation_check(sp.omega, law, guard=guard)
    ]
    if sum(sp.multiplicity for sp in retained) > spectrum.N:
        raise ValueError("retained spike multiplicities exceed matrix dimension")
    descs = spike_descriptors(
        [sp.omega for sp in retained],
        [sp.multiplicity for sp in retained],
        spectrum.N,
    )
    sqrt_n_dim = math.sqrt(spectrum.N)
    blocks = []
    for sp, desc in zip(retained, descs):
        flaw = _flaw_cached(sp.omega, spectrum.c_N)
        j = sp.multiplicity
        uhat = spectrum.vector_block(desc.index_offset, j)
        W = sp.basis.conj().T @ uhat  # j x j
        V = sqrt_n_dim * (W @ W.conj().T - flaw.zeta * np.eye(j))
        lam = spectrum.value_block(desc.index_offset, j)
        L = sqrt_n_dim * (lam - flaw.rho)
        blocks.append(
            SpikeBlockStats(
                omega=sp.omega,
                multiplicity=j,
                index_offset=desc.index_offset,
                law=flaw,
                V=V,
                L=np.asarray(L, dtype=float),
            )
        )
    return SpikeStatistics(scenario_id=scenario.id, blocks=tuple(blocks))


def preselect(
    spectrum: SpikeSpectrum, scenarios: list[FailureScenario], count: int
) -> list[int]:
    """Indices of the ``count`` hypotheses whose top outlier location is
    closest to the observed largest eigenvalue (ties: lower index)."""
    if not scenarios:
        raise ValueError("scenario list is empty")
    if count > len(scenarios):
        raise ValueError(f"cannot preselect {count} of {len(scenarios)} hypotheses")
    law = MarchenkoPastur(spectrum.c_N)
    lam1 = float(spectrum.eigenvalues[0])
    dists = []
    for idx, sc in enumerate(scenarios):
        pos = [sp.omega for sp in sc.spikes if sp.omega > 0]
        top = max(pos) if pos else None
        if top is not None and separation_check(top, law):
            rho = _flaw_cached(top, spectrum.c_N).rho
            dists.append((abs(lam1 - rho), idx))
        else:
            dists.append((math.inf, idx))
    dists.sort()
    return sorted(idx for _, idx in dists[:count])


def _score_blocks(blocks: list[SpikeBlockStats], use_l: bool, sqrt_dim: float) -> float:
    total = 0.0
    for blk in blocks:
        C = blk.law.C
        if blk.multiplicity == 1:
            v_complex = complex(blk.V[0, 0])
            if abs(v_complex.imag) >= 1e-8 * sqrt_dim:
                raise ValueError(
                    f"rank-1 projection statistic has imaginary residue {v_complex.imag}"
                )
            v = v_complex.real
            if use_l:
                total += -2.0 * gaussian_logpdf(np.array([v, blk.L[0]]), C)
            else:
                total += v * v / C[0, 0] + math.log(C[0, 0]) + LOG_2PI
        else:
            vb = blk.v_bar()
            jsq = blk.multiplicity**2
            total += float(vb @ vb) / C[0, 0] + jsq * math.log(C[0, 0]) + jsq * LOG_2PI
    return total


def _restrict(blocks: tuple[SpikeBlockStats, ...], opts: LocalizeOptions) -> list[SpikeBlockStats]:
    pos = [b for b in blocks if b.omega > 0]
    neg = [b for b in blocks if b.omega < 0]
    if opts.max_top is not None:
        pos = pos[: opts.max_top]
    if opts.max_bottom is not None:
        # most negative spikes sit at the end of the (decreasing omega) list
        neg = neg[max(0, len(neg) - opts.max_bottom) :] if opts.max_bottom > 0 else []
    return pos + neg


def localize_known(
    spectrum: SpikeSpectrum,
    scenarios: list[FailureScenario],
    opts: LocalizeOptions | None = None,
) -> LocalizationReport:
    """Pick the hypothesis maximizing the asymptotic likelihood of (V, L).

    Hypotheses without any separated spike are excluded; if none survive
    the report carries status ``inconclusive`` instead of a choice.
    Scores are additive over spikes; ties break to the lower index.
    """
    if not scenarios:
        raise ValueError("scenario list is empty")
    opts = opts or LocalizeOptions()
    candidates = list(range(len(scenarios)))
    if opts.preselect_count is not None:
        candidates = preselect(spectrum, scenarios, opts.preselect_count)
    sqrt_dim = math.sqrt(spectrum.N)
    scores: dict[int, float] = {}
    subset = []
    for idx in candidates:
        stats = spike_statistics(spectrum, scenarios[idx], guard=opts.guard)
        blocks = _restrict(stats.blocks, opts)
        if not blocks:
            continue
        subset.append(idx)
        scores[idx] = _score_blocks(blocks, opts.use_eigenvalue_terms, sqrt_dim)
    if not subset:
        return LocalizationReport(
            chosen=None, scores={}, subset=[], method="likelihood", status="inconclusive"
        )
    chosen = min(subset, key=lambda idx: (scores[idx], idx))
    return LocalizationReport(
        chosen=chosen, scores=scores, subset=subset, method="likelihood", status="ok"
    )


def localize_unknown_amplitude(
    spectrum: SpikeSpectrum,
    basis_vectors: list[np.ndarray],
    side: str = "upper",
) -> LocalizationReport:
    """Amplitude-free identification via the estimated projection limit.

    The relevant extreme eigenvalue estimates the spike amplitude, hence
    the expected alignment zeta; the hypothesis whose direction matches
    that alignment best wins.  Requires the eigenvalue to sit outside the
    bulk on the chosen side.
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side}")
    if not basis_vectors:
        raise ValueError("no hypothesis directions supplied")
    cN = spectrum.c_N
    if side == "upper":
        lam = float(spectrum.eigenvalues[0])
        uhat = spectrum.vector_block(0, 1)[:, 0]
    else:
        lam = float(spectrum.eigenvalues[-1])
        uhat = spectrum.vector_block(spectrum.N - 1, 1)[:, 0]
    try:
        omega_hat = omega_hat_from_lambda(lam, cN)
    except InsideBulkError as exc:
        raise InsideBulkError(f"amplitude not estimable: {exc}") from exc
    if omega_hat == 0.0:
        raise InsideBulkError("amplitude estimate collapsed to zero")
    zeta_hat = (1.0 - cN / omega_hat**2) / (1.0 + cN / omega_hat)
    scores = {}
    for idx, u in enumerate(basis_vectors):
        u = np.asarray(u).reshape(-1)
        align = abs(np.vdot(u, uhat)) ** 2 / float(np.vdot(u, u).real)
        scores[idx] = abs(align - zeta_hat)
    chosen = min(scores, key=lambda idx: (scores[idx], idx))
    return LocalizationReport(
        chosen=chosen,
        scores=scores,
        subset=sorted(scores),
        method="unknown_amplitude",
        status="ok",
    )

"""Observation synthesis and seeded Monte Carlo experiments.

Observations follow Sigma = (I+P)^{1/2} X with X standard complex Gaussian
(entry variance 1/n), the low-rank square root applied as a rank-r update.
Sweeps run the detect-then-localize pipeline over an (n, eta) grid with
counter-based per-trial seeding, so results are bitwise reproducible under
any worker scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .detection import DetectionConfig, detect
from .failure_models import FailureScenario
from .localization import (
    LocalizeOptions,
    localize_known,
    localize_unknown_amplitude,
)
from .spectrum import SpikeSpectrum

_ENV_THREADS = "SPIKE_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment over an n-grid and false-alarm rates."""

    N: int
    n_grid: tuple[int, ...]
    etas: tuple[float, ...]
    trials: int
    base_seed: int
    scenarios: tuple[FailureScenario, ...]  # hypothesis catalog
    true_index: int | None  # None = sample under H0
    detection_mode: str = "upper"
    localize_opts: LocalizeOptions = field(default_factory=LocalizeOptions)
    unknown_amplitude: bool = False  # additionally score the amplitude-free test
    t_spectrum: tuple[float, ...] | None = None
    allow_c_ge_1: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.allow_c_ge_1 and any(n <= self.N for n in self.n_grid):
            raise ValueError(
                "n must exceed N (set allow_c_ge_1 to override for detection-only runs)"
            )
        if self.true_index is not None and not 0 <= self.true_index < len(self.scenarios):
            raise ValueError("true_index outside the scenario catalog")


@dataclass(frozen=True)
class McCell:
    n: int
    eta: float
    trials: int
    cdr: float
    clr: float | None
    clr2: float | None
    se: float


@dataclass(frozen=True)
class McResult:
    cells: tuple[McCell, ...]
    samples: dict | None = None
    meta: dict = field(default_factory=dict)


def trial_seed(base_seed: int, n: int, eta: float, trial: int) -> np.random.SeedSequence:
    """Counter-based seed: every (n, eta, trial) owns an independent stream."""
    eta_key = int(np.float64(eta).view(np.uint64))
    return np.random.SeedSequence(entropy=(int(base_seed), int(n), eta_key, int(trial)))


def sample_observation(
    scenario: FailureScenario | None,
    N: int,
    n: int,
    rng: np.random.Generator,
    t_spectrum: np.ndarray | None = None,
) -> np.ndarray:
    """Draw Sigma = (I+P)^{1/2} X, optionally right-scaled by T^{1/2}.

    The square root of I+P is applied as the rank-r update
    X + U ((I+Omega)^{1/2} - I) U* X; no dense N x N root is formed.
    """
    x = (rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))) / math.sqrt(2.0 * n)
    if t_spectrum is not None:
        t = np.asarray(t_spectrum, dtype=float)
        if t.shape != (n,):
            raise ValueError(f"t_spectrum must have length n={n}")
        if t.min() < 0:
            raise ValueError("time-correlation spectrum must be nonnegative")
        x *= np.sqrt(t)[None, :]
    if scenario is None or not scenario.spikes:
        return x
    for sp in scenario.spikes:
        if sp.omega <= -1.0:
            raise ValueError(f"omega={sp.omega} <= -1")
    for sp in scenario.spikes:
        factor = math.sqrt(1.0 + sp.omega) - 1.0
        x += (sp.basis * factor) @ (sp.basis.conj().T @ x)
    return x


def whiten(sigma: np.ndarray, t_spectrum: np.ndarray) -> np.ndarray:
    """Undo a known temporal correlation: Sigma' = Sigma T^{-1/2}."""
    t = np.asarray(t_spectrum, dtype=float)
    if t.shape != (sigma.shape[1],):
        raise ValueError("t_spectrum length must match the number of columns")
    if t.min() <= 1e-12:
        raise ValueError("T is numerically singular")
    return sigma / np.sqrt(t)[None, :]


# -- Figure-1 style histogram experiment --------------------------------


def _histogram_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    scenario, N, n, base_seed, eta_tag, t0, t1 = args
    sp = scenario.spikes[0]
    u = sp.basis[:, 0]
    vs = np.empty(t1 - t0)
    ls = np.empty(t1 - t0)
    from .fluctuations import fluctuation_law
    from .spectral_law import MarchenkoPastur

    flaw = fluctuation_law(sp.omega, MarchenkoPastur(N / n))
    for i, t in enumerate(range(t0, t1)):
        rng = np.random.default_rng(trial_seed(base_seed, n, eta_tag, t))
        sigma = sample_observation(scenario, N, n, rng)
        gram = sigma @ sigma.conj().T
        lam, vec = sla.eigh(gram, subset_by_index=[N - 1, N - 1])
        vs[i] = math.sqrt(N) * (abs(np.vdot(u, vec[:, 0])) ** 2 - flaw.zeta)
        ls[i] = math.sqrt(N) * (lam[0] - flaw.rho)
    return vs, ls


def run_histogram_experiment(config: ExperimentConfig, workers: int | None = None) -> McResult:
    """Collect the scaled projection and eigenvalue fluctuation samples of a
    rank-1 scenario (one histogram cell per run)."""
    if config.true_index is None:
        raise ValueError("histogram experiment needs a true scenario")
    scenario = config.scenarios[config.true_index]
    if len(scenario.spikes) != 1 or scenario.spikes[0].multiplicity != 1:
        raise ValueError("histogram experiment requires a rank-1 scenario")
    if len(config.n_grid) != 1:
        raise ValueError("histogram experiment uses a single n")
    n = config.n_grid[0]
    N = config.N
    from .fluctuations import fluctuation_law
    from .spectral_law import MarchenkoPastur

    flaw = fluctuation_law(scenario.spikes[0].omega, MarchenkoPastur(N / n))
    workers = _resolve_workers(workers)
    chunks = _chunk_ranges(config.trials, workers)
    args = [(scenario, N, n, config.base_seed, 0.0, t0, t1) for t0, t1 in chunks]
    if workers == 1:
        parts = [_histogram_chunk(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_histogram_chunk, args))
    vs = np.concatenate([p[0] for p in parts])
    ls = np.concatenate([p[1] for p in parts])
    meta = {
        "zeta": flaw.zeta,
        "c11": float(flaw.C[0, 0]),
        "rho": flaw.rho,
        "omega": scenario.spikes[0].omega,
        "N": N,
        "n": n,
    }
    cell = McCell(n=n, eta=0.0, trials=config.trials, cdr=math.nan, clr=None, clr2=None, se=math.nan)
    return McResult(cells=(cell,), samples={"v": vs, "l": ls}, meta=meta)


# -- detection + localization sweep --------------------------------------


def _sweep_cell_chunk(args) -> tuple[int, int, int]:
    (config, n, eta, t0, t1) = args
    N = config.N
    truth = None if config.true_index is None else config.scenarios[config.true_index]
    det_cfg = DetectionConfig(eta=eta, mode=config.detection_mode)
    basis = None
    if config.unknown_amplitude:
        basis = [sc.spikes[0].basis[:, 0] for sc in config.scenarios]
    t_spec = None if config.t_spectrum is None else np.asarray(config.t_spectrum)
    n_det = n_loc = n_loc2 = 0
    need_vectors = config.true_index is not None
    for t in range(t0, t1):
        rng = np.random.default_rng(trial_seed(config.base_seed, n, eta, t))
        sigma = sample_observation(truth, N, n, rng, t_spectrum=t_spec)
        spectrum = SpikeSpectrum.from_observations(sigma, compute_vectors=need_vectors)
        report = detect(spectrum, det_cfg)
        if not report.rejected:
            continue
        n_det += 1
        if truth is None:
            continue
        loc = localize_known(spectrum, list(config.scenarios), config.localize_opts)
        if loc.status == "ok" and loc.chosen == config.true_index:
            n_loc += 1
        if basis is not None:
            try:
                loc2 = localize_unknown_amplitude(spectrum, basis, side="upper")
            except ValueError:
                continue
            if loc2.chosen == config.true_index:
                n_loc2 += 1
    return n_det, n_loc, n_loc2


def run_detection_localization_sweep(
    config: ExperimentConfig, workers: int | None = None
) -> McResult:
    """CDR/CLR (and CLR2) over the (n, eta) grid of the experiment."""
    workers = _resolve_workers(workers)
    cells = []
    for n in config.n_grid:
        for eta in config.etas:
            chunks = _chunk_ranges(config.trials, workers)
            args = [(config, n, eta, t0, t1) for t0, t1 in chunks]
            if workers == 1:
                parts = [_sweep_cell_chunk(a) for a in args]
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    parts = list(pool.map(_sweep_cell_chunk, args))
            n_det = sum(p[0] for p in parts)
            n_loc = sum(p[1] for p in parts)
            n_loc2 = sum(p[2] for p in parts)
            cdr = n_det / config.trials
            under_h0 = config.true_index is None
            cells.append(
                McCell(
                    n=n,
                    eta=eta,
                    trials=config.trials,
                    cdr=cdr,
                    clr=None if under_h0 else n_loc / config.trials,
                    clr2=(n_loc2 / config.trials) if (config.unknown_amplitude and not under_h0) else None,
                    se=math.sqrt(max(cdr * (1.0 - cdr), 1e-12) / config.trials),
                )
            )
    return McResult(cells=tuple(cells), meta={"label": config.label})


def result_to_csv(result: McResult) -> str:
    """Deterministic CSV rendering (%.6f everywhere)."""
    lines = ["n,eta,trials,cdr,clr,clr2,se"]
    for c in result.cells:
        clr = "" if c.clr is None else f"{c.clr:.6f}"
        clr2 = "" if c.clr2 is None else f"{c.clr2:.6f}"
        lines.append(f"{c.n},{c.eta:g},{c.trials},{c.cdr:.6f},{clr},{clr2},{c.se:.6f}")
    return "\n".join(lines) + "\n"


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(_ENV_THREADS)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunk_ranges(trials: int, workers: int) -> list[tuple[int, int]]:
    n_chunks = min(max(workers * 4, 1), trials)
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

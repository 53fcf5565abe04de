"""Sensor-network models and the low-rank perturbations failures induce.

A network is reconstructed from a JSON spec carrying node variances and
link covariances; failures (dead sensor, sudden parameter change) become
Hermitian perturbations P of the identity after whitening, stored in
eigendecomposed form as ``FailureScenario`` values.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Eigenvalues of P below this relative size are rounding debris.
RANK_TOL = 1e-10
# Eigenvalues closer than this (relative) are treated as one multiple spike.
GROUP_TOL = 1e-8


@dataclass(frozen=True)
class NetworkModel:
    """Whitenable network: channel H (N x p), noise power, covariance R."""

    N: int
    p: int
    H: np.ndarray
    sigma2: float
    R: np.ndarray

    def r_inv_sqrt(self) -> np.ndarray:
        w, V = np.linalg.eigh(self.R)
        if w.min() <= 0:
            raise ValueError("covariance R is not positive definite")
        return (V * w**-0.5) @ V.conj().T

    def gram(self) -> np.ndarray:
        """H H*, the noise-free part of R."""
        return self.R - self.sigma2 * np.eye(self.N)


@dataclass(frozen=True)
class Spike:
    omega: float
    multiplicity: int
    basis: np.ndarray  # N x multiplicity, orthonormal columns

    def __post_init__(self) -> None:
        if self.omega <= -1.0:
            raise ValueError(
                f"omega={self.omega} <= -1 breaks positive definiteness of I+P"
            )


@dataclass(frozen=True)
class FailureScenario:
    """One failure hypothesis: eigendecomposed perturbation P."""

    id: int
    label: str
    spikes: tuple[Spike, ...]
    provenance: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return sum(sp.multiplicity for sp in self.spikes)

    def omegas(self) -> list[float]:
        return [sp.omega for sp in self.spikes]

    def perturbation(self, N: int) -> np.ndarray:
        P = np.zeros((N, N), dtype=complex)
        for sp in self.spikes:
            P += sp.omega * (sp.basis @ sp.basis.conj().T)
        return P

    @classmethod
    def from_perturbation(
        cls, P: np.ndarray, id: int, label: str, provenance: dict | None = None
    ) -> FailureScenario:
        """Eigendecompose P, drop numerical zeros, group multiplicities."""
        P = np.asarray(P)
        herm_gap = np.abs(P - P.conj().T).max()
        scale = max(np.abs(P).max(), 1e-300)
        if herm_gap > 1e-12 * scale:
            raise ValueError("perturbation is not Hermitian")
        w, V = np.linalg.eigh(0.5 * (P + P.conj().T))
        keep = np.abs(w) > RANK_TOL * max(np.abs(w).max(), 1e-300)
        w, V = w[keep], V[:, keep]
        order = np.argsort(-w)
        w, V = w[order], V[:, order]
        spikes: list[Spike] = []
        i = 0
        tol = GROUP_TOL * max(np.abs(w).max() if w.size else 0.0, 1.0)
        while i < len(w):
            k = i + 1
            while k < len(w) and abs(w[k] - w[i]) <= tol:
                k += 1
            omega = float(np.mean(w[i:k]))
            if omega <= -1.0:
                raise ValueError(
                    f"scenario spike omega={omega} <= -1 breaks positive definiteness"
                )
            spikes.append(Spike(omega, k - i, V[:, i:k].copy()))
            i = k
        return cls(id=id, label=label, spikes=tuple(spikes), provenance=provenance or {})


def _fixed_qr(a: np.ndarray) -> np.ndarray:
    """QR factor with positive-real diagonal of R, for reproducible gauges."""
    q, r = np.linalg.qr(a)
    d = np.diagonal(r).copy()
    d = np.where(np.abs(d) < 1e-300, 1.0, d / np.abs(d))
    return q * d.conj()


def _channel_from_gram(gram: np.ndarray, channel: dict | None) -> np.ndarray:
    """Square root of H H* in the requested gauge.

    ``psd`` (default): the symmetric PSD root, p = N.  ``haar``: a seeded
    co-isometry gauge H = (HH*)^{1/2} W with W W* = I and p >= N columns;
    node-failure scenarios are gauge-invariant, parameter-change scenarios
    are not, so reproducing a specific experiment may require a specific
    gauge.
    """
    w, V = np.linalg.eigh(gram)
    w = np.clip(w, 0.0, None)
    root = (V * np.sqrt(w)) @ V.conj().T
    if channel is None or channel.get("gauge", "psd") == "psd":
        return root
    if channel["gauge"] == "haar":
        p = int(channel["p"])
        N = gram.shape[0]
        if p < N:
            raise ValueError(f"haar gauge needs p >= N, got p={p} < N={N}")
        rng = np.random.default_rng(int(channel["seed"]))
        g = rng.standard_normal((p, N)) + 1j * rng.standard_normal((p, N))
        W = _fixed_qr(g).conj().T  # N x p, W W* = I_N
        return root @ W
    raise ValueError(f"unknown channel gauge {channel['gauge']!r}")


def network_from_spec(spec: dict | str | Path) -> NetworkModel:
    """Assemble a NetworkModel from a network spec document.

    The spec lists per-node variances E|y(i)|^2 and per-link covariances
    E[y(i)* y(j)]; unlisted pairs are taken as exactly zero.  Noise power
    comes as ``sigma2_db`` (dB) or ``sigma2`` (linear).  The noise-free
    part R - sigma2*I must be PSD; eigenvalues in [-1e-8*||R||, 0) are
    clipped with a warning, anything lower is an error.
    """
    if not isinstance(spec, dict):
        spec = json.loads(Path(spec).read_text())
    nodes = spec["nodes"]
    N = len(nodes)
    ids = {node["id"]: idx for idx, node in enumerate(nodes)}
    if len(ids) != N:
        raise ValueError("duplicate node ids in network spec")
    if "sigma2" in spec:
        sigma2 = float(spec["sigma2"])
    else:
        sigma2 = 10.0 ** (float(spec["sigma2_db"]) / 10.0)
    R = np.zeros((N, N))
    for node in nodes:
        R[ids[node["id"]], ids[node["id"]]] = float(node["variance"])
    for edge in spec.get("edges", ()):
        i, j = ids[edge["i"]], ids[edge["j"]]
        if i == j:
            raise ValueError(f"self-edge on node {edge['i']}")
        R[i, j] = R[j, i] = float(edge["cov"])
    gram = R - sigma2 * np.eye(N)
    w = np.linalg.eigvalsh(gram)
    floor = -1e-8 * np.linalg.norm(R, 2)
    if w.min() < floor:
        raise ValueError(
            f"spec not PSD: R - sigma2*I has eigenvalue {w.min()} < {floor}"
        )
    if w.min() < 0:
        warnings.warn("clipping slightly negative eigenvalues of R - sigma2*I")
        wc, V = np.linalg.eigh(gram)
        gram = (V * np.clip(wc, 0.0, None)) @ V.conj().T
    H = _channel_from_gram(gram, spec.get("channel"))
    return NetworkModel(N=N, p=H.shape[1], H=H, sigma2=sigma2, R=R)


def default_failure_variance(model: NetworkModel, node: int) -> float:
    """Default replacement-noise power for a failed node: its H H* row sum."""
    gram = model.gram()
    return float(gram[node - 1, :].sum().real)


def node_failure_scenario(
    model: NetworkModel,
    nodes: list[int],
    sigma_fail: list[float] | None = None,
    id: int | None = None,
    label: str | None = None,
) -> FailureScenario:
    """Perturbation for sensors that start returning independent noise.

    ``nodes`` uses 1-based ids.  ``sigma_fail`` holds the replacement-noise
    variances; by default each failed node keeps its nominal received power
    (row sum of H H*), which defeats plain per-node energy detection.
    Rank is at most 2 per failed node.
    """
    if len(set(nodes)) != len(nodes):
        raise ValueError("duplicate node indices")
    if any(not 1 <= k <= model.N for k in nodes):
        raise ValueError(f"node index out of range 1..{model.N}")
    if sigma_fail is None:
        sigma_fail = [default_failure_variance(model, k) for k in nodes]
    if len(sigma_fail) != len(nodes):
        raise ValueError("sigma_fail length must match nodes")
    if any(s < 0 for s in sigma_fail):
        raise ValueError("sigma_fail entries must be >= 0")
    gram = model.gram()
    rm12 = model.r_inv_sqrt()
    M = len(nodes)
    E = np.zeros((model.N, M))
    for col, k in enumerate(nodes):
        E[k - 1, col] = 1.0
    Lam2 = np.diag(sigma_fail)
    inner = (E.T @ gram @ E + Lam2) @ E.T - E.T @ gram
    P = rm12 @ E @ inner @ rm12 - rm12 @ gram @ E @ E.T @ rm12
    return FailureScenario.from_perturbation(
        P,
        id=id if id is not None else nodes[0],
        label=label or f"node_failure[{','.join(map(str, nodes))}]",
        provenance={"kind": "node_failure", "nodes": list(nodes), "sigma_fail": list(map(float, sigma_fail))},
    )


def param_change_scenario(
    model: NetworkModel,
    params: list[int],
    beta: list[float],
    id: int | None = None,
    label: str | None = None,
) -> FailureScenario:
    """Perturbation for sudden mean/variance changes of source parameters.

    ``params`` are 1-based column indices of H; ``beta`` the composite
    change amplitudes.  Rank is at most one per changed parameter, and for
    a single parameter the spike direction does not depend on the
    amplitude.
    """
    if len(params) != len(beta):
        raise ValueError("params and beta must have equal length")
    if len(set(params)) != len(params):
        raise ValueError("duplicate parameter indices")
    if any(not 1 <= k <= model.p for k in params):
        raise ValueError(f"parameter index out of range 1..{model.p}")
    if any(b <= -1.0 for b in beta):
        raise ValueError("beta entries must exceed -1")
    rm12 = model.r_inv_sqrt()
    cols = rm12 @ model.H[:, [k - 1 for k in params]]
    P = cols @ np.diag(beta) @ cols.conj().T
    return FailureScenario.from_perturbation(
        P,
        id=id if id is not None else params[0],
        label=label or f"param_change[{','.join(map(str, params))}]",
        provenance={"kind": "param_change", "params": list(params), "beta": list(map(float, beta))},
    )


def beta_from_mu_alpha(mu: float, alpha: float) -> float:
    """Composite amplitude of a mean shift mu and relative gain change alpha."""
    return mu * mu + (1.0 + alpha) ** 2 - 1.0


def banded_ring_network(
    N: int = 100,
    neighbors: int = 8,
    sigma2_db: float = -20.0,
    seed: int = 2061,
) -> NetworkModel:
    """Synthetic large network: ring lattice, each node coupled to its
    ``neighbors`` nearest nodes, correlation magnitudes like the 10-node
    demo network, variances jittered in the same range.

    The circulant band plus a nonnegative diagonal jitter keeps R positive
    definite by construction; the seed only drives the jitter.
    """
    if neighbors % 2 or neighbors < 2:
        raise ValueError("neighbors must be a positive even count")
    half = neighbors // 2
    covs = np.linspace(0.95, 0.78, half)
    # The circulant symbol base + 2*sum(cov_d cos(d theta)) stays positive
    # for base = 3.4 with these magnitudes; verified below after jitter.
    base = 3.4
    R = np.zeros((N, N))
    for d, cv in enumerate(covs, start=1):
        for i in range(N):
            R[i, (i + d) % N] = cv
            R[(i + d) % N, i] = cv
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(0.0, 1.1, size=N)
    diag = base + jitter
    R[np.diag_indices(N)] = diag
    sigma2 = 10.0 ** (sigma2_db / 10.0)
    gram = R - sigma2 * np.eye(N)
    if np.linalg.eigvalsh(gram).min() <= 0:
        raise ValueError("generated network is not PSD; adjust parameters")
    w, V = np.linalg.eigh(gram)
    H = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return NetworkModel(N=N, p=N, H=H, sigma2=sigma2, R=R)

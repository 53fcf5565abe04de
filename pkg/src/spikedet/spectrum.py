"""Sorted sample spectrum of an observation matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpikeSpectrum:
    """Descending eigenvalues of Sigma Sigma* with aligned eigenvectors.

    ``eigenvectors`` may be omitted for detection-only workloads; any
    consumer needing projections will raise if they are absent.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    N: int
    n: int

    @property
    def c_N(self) -> float:
        return self.N / self.n

    @classmethod
    def from_observations(cls, sigma: np.ndarray, compute_vectors: bool = True) -> SpikeSpectrum:
        """Eigendecompose Sigma Sigma* for an N x n observation matrix."""
        sigma = np.asarray(sigma)
        if sigma.ndim != 2:
            raise ValueError(f"expected a 2-D observation matrix, got shape {sigma.shape}")
        N, n = sigma.shape
        gram = sigma @ sigma.conj().T
        if compute_vectors:
            lam, vec = np.linalg.eigh(gram)
            return cls(lam[::-1].copy(), vec[:, ::-1].copy(), N, n)
        lam = np.linalg.eigvalsh(gram)
        return cls(lam[::-1].copy(), None, N, n)

    def vector_block(self, offset: int, size: int) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum was built without eigenvectors")
        return self.eigenvectors[:, offset : offset + size]

    def value_block(self, offset: int, size: int) -> np.ndarray:
        return self.eigenvalues[offset : offset + size]

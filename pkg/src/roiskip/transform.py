"""Integer DCT-II approximation and dead-zone quantization.

The transform matrices are orthonormal DCT-II bases scaled by 1024 and
rounded to integers, so the forward/inverse pair keeps coefficient energy
within a fraction of a percent of the residual energy while all basis
entries stay exact integers.  The inverse uses the exact matrix inverse of
the normalized basis so forward/inverse round-trips to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TRANSFORM_SIZES = (4, 8, 16, 32)
SCALE = 1024


@dataclass(frozen=True)
class QuantParams:
    qp: int

    @property
    def qstep(self) -> float:
        return 2.0 ** ((self.qp - 4) / 6.0)


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * j + 1) * k / (2 * n))
    m[0, :] *= np.sqrt(1.0 / n)
    m[1:, :] *= np.sqrt(2.0 / n)
    return np.rint(m * SCALE).astype(np.int64)


@lru_cache(maxsize=None)
def _normalized_matrix(n: int) -> np.ndarray:
    """Integer basis rescaled to exact unit row norms (rows stay integer
    multiples of a per-row constant, so the pairing is deterministic)."""
    m = dct_matrix(n).astype(np.float64)
    norms = np.sqrt(np.sum(m * m, axis=1))
    return m / norms[:, None]


def forward_dct(block: np.ndarray) -> np.ndarray:
    m = _normalized_matrix(block.shape[0])
    return m @ block.astype(np.float64) @ m.T


@lru_cache(maxsize=None)
def _inverse_matrix(n: int) -> np.ndarray:
    return np.linalg.inv(_normalized_matrix(n))


def inverse_dct(coeffs: np.ndarray) -> np.ndarray:
    mi = _inverse_matrix(coeffs.shape[0])
    return mi @ coeffs @ mi.T


def quantize(coeffs: np.ndarray, q: QuantParams) -> np.ndarray:
    """Uniform dead-zone quantization: sign(c) * floor(|c|/qstep + 1/3)."""
    return (np.sign(coeffs)
            * np.floor(np.abs(coeffs) / q.qstep + 1.0 / 3.0)).astype(np.int64)


def dequantize(levels: np.ndarray, q: QuantParams) -> np.ndarray:
    return levels.astype(np.float64) * q.qstep


def transform_quantize(residual: np.ndarray, q: QuantParams) -> np.ndarray:
    """Residual block -> quantized coefficient levels."""
    return quantize(forward_dct(residual), q)


def reconstruct_residual(levels: np.ndarray, q: QuantParams) -> np.ndarray:
    """Quantized levels -> integer residual (the decoder-exact inverse path)."""
    return np.rint(inverse_dct(dequantize(levels, q))).astype(np.int64)


@lru_cache(maxsize=None)
def zigzag_order(n: int) -> np.ndarray:
    """Diagonal scan indices (flattened) for an n x n block."""
    idx = []
    for s in range(2 * n - 1):
        rng = range(max(0, s - n + 1), min(s, n - 1) + 1)
        diag = [(i, s - i) for i in rng]
        if s % 2 == 0:
            diag.reverse()
        idx.extend(i * n + j for i, j in diag)
    return np.array(idx, dtype=np.int64)

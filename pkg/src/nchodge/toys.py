"""Small triples used as counterexamples and regression fixtures."""

from __future__ import annotations

import numpy as np

from .algebra import AntilinearMap
from .linalg import matrix_unit
from .triple import RealSpectralTriple, SignTriple


def _m2_basis() -> list[np.ndarray]:
    return [matrix_unit(i, j, 2) for i in (1, 2) for j in (1, 2)]


def transpose_permutation(n: int) -> np.ndarray:
    """Permutation ``vec(X) -> vec(X^t)`` for row-major vectorization of ``n x n`` matrices."""
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            p[j * n + i, i * n + j] = 1.0
    return p


def m2_triple(d=None, mode: str = "sum") -> RealSpectralTriple:
    """``A = H = M_2`` with left multiplication and ``J(x) = x^*``.

    ``d`` (default ``e_11``) enters as ``D = d + d°`` (mode "sum") or
    ``D = d d°`` (mode "product"), where ``d°`` is right multiplication by ``d``.
    """
    d = matrix_unit(1, 1, 2) if d is None else np.asarray(d, dtype=complex)
    if d.shape != (2, 2) or np.linalg.norm(d - d.conj().T) > 1e-12:
        raise ValueError("d must be a self-adjoint 2x2 matrix")
    left = np.kron(d, np.eye(2))
    right = np.kron(np.eye(2), d.T)
    if mode == "sum":
        dirac = left + right
    elif mode == "product":
        dirac = left @ right
    else:
        raise ValueError(f"mode must be 'sum' or 'product', got {mode!r}")
    gens = tuple(np.kron(a, np.eye(2)) for a in _m2_basis())
    return RealSpectralTriple(gens, dirac, AntilinearMap(transpose_permutation(2)), SignTriple(1, 1))


def scalar_c2_triple() -> RealSpectralTriple:
    """Scalars acting on ``C^2``, ``D = sigma_x`` and componentwise conjugation."""
    sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
    return RealSpectralTriple((np.eye(2, dtype=complex),), sigma_x, AntilinearMap(np.eye(2)), SignTriple(1, 1))

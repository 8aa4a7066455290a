"""Dense complex matrix helpers and tolerance-aware subspace primitives.

Operators on ``C^n`` are plain ``numpy`` arrays of shape ``(n, n)`` with a
complex dtype.  Spaces of operators are stored as a stack of matrices that is
orthonormal for the Hilbert-Schmidt inner product ``<X, Y> = tr(X^* Y)``.
Vectorization is row-major throughout (``X.reshape(-1)``), so that
``vec(a @ X @ b) = kron(a, b.T) @ vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerance:
    """Threshold policy for rank and zero decisions.

    A quantity attached to a matrix of scale ``s`` (usually its largest
    singular value) counts as zero when it is at most
    ``max(abs_floor, rel * s)``.
    """

    rel: float = 1e-10
    abs_floor: float = 1e-12

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError(f"rel must be positive, got {self.rel!r}")
        if self.abs_floor < 0:
            raise ValueError(f"abs_floor must be nonnegative, got {self.abs_floor!r}")

    def threshold(self, scale: float) -> float:
        return max(self.abs_floor, self.rel * float(scale))

    def is_zero(self, value: float, scale: float = 1.0) -> bool:
        return float(value) <= self.threshold(scale)


DEFAULT_TOL = Tolerance()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-d complex array with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or 0 in m.shape:
        raise ValueError(f"{name}: expected a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: entries must be finite")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {m.shape}")
    return m


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def conj(a) -> np.ndarray:
    return np.conj(np.asarray(a))


def transpose(a) -> np.ndarray:
    return np.asarray(a).T


def comm(a, b) -> np.ndarray:
    """Commutator ``ab - ba``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"comm: need equal square shapes, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def anticomm(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"anticomm: shape mismatch {a.shape} vs {b.shape}")
    return a @ b + b @ a


def matrix_unit(i: int, j: int, n: int) -> np.ndarray:
    """``e_ij`` in ``M_n(C)`` with 1-based indices."""
    m = np.zeros((n, n), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


def fro(a) -> float:
    return float(np.linalg.norm(a))


def opnorm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    # rotate so the first entry of (near) maximal modulus is real positive
    mags = np.abs(v)
    k = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
    if mags[k] == 0:
        return v
    return v * (np.conj(v[k]) / mags[k])


def nullspace(m, tol: Tolerance = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``m``, as columns.

    Right singular vectors whose singular value is at most
    ``tol.threshold(scale)`` span the kernel; ``scale`` defaults to the
    largest singular value of ``m``.  Columns come out in ascending singular
    value order, ties broken by the position of the dominant component, and
    each column is phase-normalized.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"nullspace: expected a 2-d array, got shape {m.shape}")
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    # a full V is needed only for wide matrices; U is never used
    _, s, vh = np.linalg.svd(m, full_matrices=rows < cols)
    sig = np.zeros(cols)
    sig[: s.size] = s
    smax = s[0] if s.size else 0.0
    thr = tol.threshold(smax if scale is None else scale)
    idx = [i for i in range(cols) if sig[i] <= thr]
    if not idx:
        return np.zeros((cols, 0), dtype=complex)
    vecs = [_phase_fix(vh[i].conj()) for i in idx]
    order = sorted(range(len(idx)), key=lambda t: (sig[idx[t]], int(np.argmax(np.abs(vecs[t])))))
    return np.stack([vecs[t] for t in order], axis=1)


def rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol.threshold(s[0])))


@dataclass(frozen=True, eq=False)
class MatrixSubspace:
    """A linear space of ``n x n`` operators with a Hilbert-Schmidt orthonormal basis.

    ``basis`` has shape ``(d, n, n)``.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        n = self.ambient_dim
        if b.size == 0:
            b = np.zeros((0, n, n), dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (n, n):
            raise ValueError(f"basis shape {b.shape} does not match ambient dimension {n}")
        if b.shape[0] > n * n:
            raise ValueError("more basis elements than the operator space dimension")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    @property
    def columns(self) -> np.ndarray:
        """Basis as columns of an ``(n*n, d)`` matrix."""
        return self.basis.reshape(self.dim, self.ambient_dim ** 2).T

    def gram(self) -> np.ndarray:
        q = self.columns
        return q.conj().T @ q

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        q = self.columns
        return (q @ (q.conj().T @ x.reshape(-1))).reshape(x.shape)

    def projector(self) -> np.ndarray:
        q = self.columns
        return q @ q.conj().T

    def coordinates(self, x) -> np.ndarray:
        return self.columns.conj().T @ np.asarray(x, dtype=complex).reshape(-1)

    def combine(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=(0, 0))

    @classmethod
    def zero(cls, n: int) -> "MatrixSubspace":
        return cls(n, np.zeros((0, n, n), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "MatrixSubspace":
        return cls(n, np.eye(n * n, dtype=complex).reshape(n * n, n, n))


def _check_family(mats: Sequence) -> tuple[int, np.ndarray]:
    arrs = [np.asarray(m, dtype=complex) for m in mats]
    if not arrs:
        raise ValueError("empty matrix family; pass ambient_dim")
    n = arrs[0].shape[0]
    for k, a in enumerate(arrs):
        if a.shape != (n, n):
            raise ValueError(f"matrix {k} has shape {a.shape}, expected {(n, n)}")
    return n, np.stack(arrs)


def orthonormalize(mats: Iterable, tol: Tolerance = DEFAULT_TOL,
                   ambient_dim: int | None = None) -> MatrixSubspace:
    """Rank-revealing orthonormal basis of the complex span of ``mats``.

    Left singular vectors of the stacked vectorizations whose singular value
    exceeds ``tol.threshold(sigma_max)`` are kept.
    """
    mats = list(mats)
    if not mats:
        if ambient_dim is None:
            raise ValueError("orthonormalize: empty input needs ambient_dim")
        return MatrixSubspace.zero(ambient_dim)
    n, stack = _check_family(mats)
    if ambient_dim is not None and ambient_dim != n:
        raise ValueError(f"matrices are {n}x{n}, ambient_dim is {ambient_dim}")
    cols = stack.reshape(len(mats), -1).T
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return MatrixSubspace.zero(n)
    keep = s > tol.threshold(s[0])
    return MatrixSubspace(n, u[:, keep].T.reshape(-1, n, n))


def _project_out(basis: np.ndarray, r: np.ndarray, passes: int = 2) -> np.ndarray:
    """Remove the span of the orthonormal columns ``basis`` from ``r``."""
    bh = basis.conj().T
    for _ in range(passes):
        r = r - basis @ (bh @ r)
    return r


def _by_relative_residual(idx, r, thr, rn, norms):
    # A direction taken from a nearly dependent candidate carries roundoff of
    # order eps * |c| / |r|; offering well-separated candidates first keeps
    # the basis accurate (block pivoting, cheaper than full column pivoting).
    order = np.argsort(-rn / norms[idx], kind="stable")
    return idx[order], r[:, order], thr[order]


def extend_basis(q: np.ndarray, candidates: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                 chunk: int = 64, scale: float | None = None):
    """Grow an orthonormal column basis ``q`` by the new directions in ``candidates``.

    Candidates are columns; a candidate contributes when its residual after
    projection exceeds ``tol.threshold(scale)``, where ``scale`` defaults to
    the largest candidate norm.  A batch-wide scale (rather than each
    candidate's own norm) keeps roundoff in nearly-cancelling products from
    being promoted to new directions.  Candidates are taken by decreasing
    relative residual, ``chunk`` at a time; after each chunk the remaining ones are projected in
    one block so dependent ones drop out cheaply.  Returns the new basis and
    the indices of the accepted candidates.
    """
    if candidates.shape[1] == 0:
        return q, []
    norms = np.linalg.norm(candidates, axis=0)
    if scale is None:
        scale = float(norms.max())
    thr = np.full(norms.shape, tol.threshold(scale))
    r = candidates.astype(np.result_type(q, candidates, complex))
    # one pass decides liveness; accepted vectors are re-orthogonalized below
    if q.shape[1]:
        r = _project_out(q, r, passes=1)
    room = q.shape[0] - q.shape[1]
    rn = np.linalg.norm(r, axis=0)
    keep = (norms > 0) & (rn > thr)
    idx, r, thr = _by_relative_residual(np.flatnonzero(keep), r[:, keep], thr[keep], rn[keep], norms)
    accepted = []
    cur = q
    while idx.size and room > 0:
        start = cur.shape[1]
        for c in range(min(chunk, idx.size)):
            if cur.shape[1] - start == room:
                break
            # r is already orthogonal to everything before this chunk
            v = r[:, c]
            if cur.shape[1] > start:
                v = _project_out(cur[:, start:], v, passes=1)
            if np.linalg.norm(v) <= thr[c]:
                continue
            # full re-orthogonalization before accepting
            v = _project_out(cur, v) if cur.shape[1] else v
            nv = np.linalg.norm(v)
            if nv > thr[c]:
                cur = np.concatenate([cur, (v / nv)[:, None]], axis=1)
                accepted.append(int(idx[c]))
        idx, r, thr = idx[chunk:], r[:, chunk:], thr[chunk:]
        added = cur.shape[1] - start
        if not added:
            continue
        room -= added
        if idx.size:
            r = _project_out(cur[:, start:], r, passes=1)
            rn = np.linalg.norm(r, axis=0)
            keep = rn > thr
            idx, r, thr = _by_relative_residual(idx[keep], r[:, keep], thr[keep], rn[keep], norms)
    return cur, accepted


def _residual(s: MatrixSubspace, x: np.ndarray) -> float:
    return fro(x - s.project(x))


def subspace_contains(s: MatrixSubspace, x, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether ``x`` lies in ``s`` up to a residual relative to ``||x||``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (s.ambient_dim, s.ambient_dim):
        raise ValueError(f"operator shape {x.shape} does not match ambient dimension {s.ambient_dim}")
    nx = fro(x)
    if nx == 0:
        return True
    return _residual(s, x) <= tol.threshold(nx)


def subspace_contains_all(s: MatrixSubspace, xs, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Vectorized ``subspace_contains`` over a stack of operators."""
    xs = np.asarray(xs, dtype=complex)
    if xs.size == 0:
        return True
    n = s.ambient_dim
    if xs.ndim != 3 or xs.shape[1:] != (n, n):
        raise ValueError(f"expected a stack of {n}x{n} operators, got shape {xs.shape}")
    v = xs.reshape(len(xs), -1)
    q = s.columns
    res = np.linalg.norm(v - (v @ q.conj()) @ q.T, axis=1) if s.dim else np.linalg.norm(v, axis=1)
    thr = np.array([tol.threshold(x) for x in np.linalg.norm(v, axis=1)])
    return bool(np.all(res <= thr))


def projector_distance(s1: MatrixSubspace, s2: MatrixSubspace) -> float:
    """Frobenius distance between the orthogonal projectors onto ``s1`` and ``s2``.

    Uses ``||P1 - P2||^2 = ||(1 - P2) Q1||^2 + ||(1 - P1) Q2||^2``, which
    avoids the cancellation in ``d1 + d2 - 2 ||Q1^* Q2||^2``.
    """
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError(f"ambient mismatch: {s1.ambient_dim} vs {s2.ambient_dim}")
    q1, q2 = s1.columns, s2.columns
    r1 = q1 - q2 @ (q2.conj().T @ q1) if q2.shape[1] else q1
    r2 = q2 - q1 @ (q1.conj().T @ q2) if q1.shape[1] else q2
    return float(np.sqrt(np.linalg.norm(r1) ** 2 + np.linalg.norm(r2) ** 2))


def subspace_equal(s1: MatrixSubspace, s2: MatrixSubspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError(f"ambient mismatch: {s1.ambient_dim} vs {s2.ambient_dim}")
    if s1.dim != s2.dim:
        return False
    return projector_distance(s1, s2) <= tol.threshold(1.0)


def subspace_intersection(s1: MatrixSubspace, s2: MatrixSubspace,
                          tol: Tolerance = DEFAULT_TOL) -> MatrixSubspace:
    """Intersection of two operator subspaces."""
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError(f"ambient mismatch: {s1.ambient_dim} vs {s2.ambient_dim}")
    if s1.dim == 0 or s2.dim == 0:
        return MatrixSubspace.zero(s1.ambient_dim)
    q1 = s1.columns
    # x = q1 c lies in s2 iff (1 - P2) q1 c = 0
    m = q1 - s2.columns @ (s2.columns.conj().T @ q1)
    c = nullspace(m, tol, scale=1.0)
    basis = (q1 @ c).T.reshape(-1, s1.ambient_dim, s1.ambient_dim)
    return orthonormalize(list(basis), tol, ambient_dim=s1.ambient_dim)

"""Finite-dimensional *-algebras of matrices.

Generated algebras by span closure, commutants, centers, the Wedderburn
block structure of a unital *-algebra, and the opposite action
``x -> J x^* J^{-1}`` induced by an antilinear isometry ``J``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    MatrixSubspace,
    Tolerance,
    as_square,
    extend_basis,
    fro,
    nullspace,
    orthonormalize,
    subspace_contains,
)


class AlgebraError(ValueError):
    """Input is not a closed *-algebra, or a decomposition could not be resolved."""


class WedderburnError(AlgebraError):
    pass


@dataclass(frozen=True, eq=False)
class AntilinearMap:
    """Antilinear operator ``v -> c @ conj(v)``, stored through its linear part ``c``.

    ``strict=False`` skips the unitarity check so that a non-isometric map read
    from a file can still be reported on by ``validate``.
    """

    c: np.ndarray
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = as_square(self.c, "antilinear map linear part")
        n = c.shape[0]
        if self.strict and np.linalg.norm(c.conj().T @ c - np.eye(n)) > 1e-8 * n:
            raise ValueError("antilinear map is not an isometry (linear part not unitary)")
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def apply(self, v) -> np.ndarray:
        return self.c @ np.conj(np.asarray(v, dtype=complex))

    def conjugate(self, x) -> np.ndarray:
        """``J x J^{-1}`` for a linear operator ``x``."""
        x = np.asarray(x, dtype=complex)
        if x.shape != self.c.shape:
            raise ValueError(f"operator shape {x.shape} does not match J of dimension {self.dim}")
        return self.c @ np.conj(x) @ self.c.conj().T

    def square(self) -> np.ndarray:
        """Linear operator ``J^2 = c conj(c)``."""
        return self.c @ np.conj(self.c)

    def sign(self, tol: Tolerance = DEFAULT_TOL) -> int | None:
        """``eps`` with ``J^2 = eps 1``, or None if ``J^2`` is not ``+-1``."""
        sq = self.square()
        n = self.dim
        for eps in (1, -1):
            if np.linalg.norm(sq - eps * np.eye(n)) <= tol.threshold(np.sqrt(n)):
                return eps
        return None


@dataclass(frozen=True, eq=False)
class WedderburnBlock:
    """One summand ``M_m(C)`` acting with multiplicity ``k`` on ``projection @ H``."""

    m: int
    k: int
    projection: np.ndarray


@dataclass(frozen=True, eq=False)
class StarAlgebra:
    space: MatrixSubspace
    unital: bool = True
    blocks: tuple[WedderburnBlock, ...] | None = None
    generators: tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def dim_h(self) -> int:
        return self.space.ambient_dim

    @property
    def basis(self) -> np.ndarray:
        return self.space.basis

    def block_table(self) -> list[tuple[int, int]]:
        if self.blocks is None:
            raise AlgebraError("Wedderburn structure not computed")
        return [(b.m, b.k) for b in self.blocks]


def _family(mats, name="generators") -> tuple[int, list[np.ndarray]]:
    arrs = [as_square(g, name) for g in mats]
    if arrs:
        n = arrs[0].shape[0]
        for a in arrs:
            if a.shape != (n, n):
                raise ValueError(f"{name}: dimension mismatch {a.shape} vs {(n, n)}")
        return n, arrs
    return 0, []


def _star_close(mats: Sequence[np.ndarray], tol: Tolerance) -> list[np.ndarray]:
    """Hermitian basis of the complex span of ``mats`` and their adjoints.

    The Hermitian parts span a real space whose real dimension is the complex
    dimension of the *-closed span, so a real orthonormal basis of it is the
    smallest Hermitian generating family.
    """
    if not mats:
        return []
    n = mats[0].shape[0]
    herm = np.stack(_hermitian_parts(mats))
    real = np.concatenate([herm.real.reshape(len(herm), -1), herm.imag.reshape(len(herm), -1)], axis=1)
    u, s, vh = np.linalg.svd(real.T, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return []
    keep = s > tol.threshold(s[0])
    vecs = u[:, keep].T
    return list((vecs[:, :n * n] + 1j * vecs[:, n * n:]).reshape(-1, n, n))


def _hermitian_parts(mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for g in mats:
        out.append((g + g.conj().T) / 2)
        out.append((g - g.conj().T) / 2j)
    return out


def _unit_columns(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=0) if m.shape[1] else m


def generated_algebra(generators: Sequence, unital: bool = True, tol: Tolerance = DEFAULT_TOL,
                      dim_h: int | None = None) -> StarAlgebra:
    """Smallest complex *-subalgebra containing ``generators`` (and 1 if unital).

    The generator list is first closed under adjoints; the span is then grown
    by right-multiplying every newly accepted product with every
    generator until no new direction appears.  For unital algebras the
    result is cross-checked against the bicommutant of the generators.
    """
    n, gens = _family(generators)
    if not gens:
        if not unital or dim_h is None:
            raise ValueError("generated_algebra: empty generator list needs unital=True and dim_h")
        n = dim_h
    elif dim_h is not None and dim_h != n:
        raise ValueError(f"generators are {n}x{n}, dim_h is {dim_h}")

    closed_gens = _star_close(gens, tol)
    seeds = ([np.eye(n, dtype=complex)] if unital else []) + closed_gens

    q = np.zeros((n * n, 0), dtype=complex)
    cands = np.stack([s.reshape(-1) for s in seeds], axis=1)
    q, acc = extend_basis(q, cands, tol)
    # The frontier holds the accepted products themselves, not the
    # orthonormalized residuals: normalizing a small residual magnifies its
    # roundoff, and feeding that back into further products compounds it
    # round after round until noise passes the rank threshold.
    frontier = _unit_columns(cands[:, acc])
    gstack = np.stack(closed_gens) if closed_gens else np.zeros((0, n, n), dtype=complex)
    while closed_gens and frontier.shape[1] and q.shape[1] < n * n:
        fr = frontier.T.reshape(-1, 1, n, n)
        cands = np.matmul(fr, gstack[None]).reshape(-1, n * n).T
        q, acc = extend_basis(q, cands, tol)
        frontier = _unit_columns(cands[:, acc])
    space = MatrixSubspace(n, q.T.reshape(-1, n, n))
    if unital and closed_gens:
        space = _bicommutant_check(space, closed_gens, tol)
    return StarAlgebra(space, unital=unital, generators=tuple(gens))


def _closure_defect(space: MatrixSubspace, gens: list[np.ndarray]) -> tuple[float, float]:
    """Largest residual of 1, the generators and ``basis @ generator`` off ``space``, and its scale."""
    n = space.ambient_dim
    q = space.columns
    gstack = np.stack(gens)
    prods = np.matmul(space.basis[:, None], gstack[None]).reshape(-1, n * n).T
    cands = np.concatenate([np.eye(n).reshape(-1, 1), gstack.reshape(len(gens), -1).T, prods], axis=1)
    r = cands - q @ (q.conj().T @ cands)
    return float(np.linalg.norm(r, axis=0).max()), float(np.linalg.norm(cands, axis=0).max())


def _bicommutant_check(space: MatrixSubspace, gens: list[np.ndarray], tol: Tolerance) -> MatrixSubspace:
    """Compare the closure basis with the bicommutant of ``gens`` and keep the better one.

    A unital *-algebra equals its bicommutant, so both routes describe the
    same space, with different roundoff.  A closure direction taken from a
    product with relative residual rho carries error of order eps / rho, and
    later products can lift that error over the rank threshold.  The
    bicommutant comes from two nullspaces and only inherits the conditioning
    of the commutator maps.  Whichever basis has the smaller closure defect
    is kept.  A bicommutant passing the closure test contains the generated
    algebra, so a larger closure dimension is roundoff and is overruled; a
    smaller one is a genuine conflict.
    """
    outer = commutant(commutant(gens, tol).basis, tol).space
    if space.dim < outer.dim:
        raise AlgebraError(f"span closure gives dimension {space.dim}, bicommutant gives {outer.dim}")
    d_outer, scale = _closure_defect(outer, gens)
    if space.dim > outer.dim:
        if d_outer > tol.threshold(scale):
            raise AlgebraError(f"span closure gives dimension {space.dim}, bicommutant gives {outer.dim} "
                               f"and is not closed (residual {d_outer:.2e})")
        return outer
    d_space, _ = _closure_defect(space, gens)
    return outer if d_outer < d_space else space


def _generic_commutant_seed(gens: list[np.ndarray], tol: Tolerance) -> np.ndarray:
    """Basis of the commutant of one generic Hermitian element of the generated algebra.

    That commutant contains the commutant of the whole algebra, so it is a
    valid (and much smaller) search space for the exact constraints.
    """
    n = gens[0].shape[0]
    herm = _hermitian_parts(gens)
    rng = np.random.default_rng(0x5EED)
    h = sum(r * x for r, x in zip(rng.uniform(0.5, 1.5, len(herm)), herm))
    w, v = np.linalg.eigh(h)
    scale = max(np.max(np.abs(w)), 1.0)
    # merging distinct eigenvalues only enlarges the search space; splitting a
    # true cluster would lose commutant elements, so merge generously
    cut = 1e-8 * scale
    clusters = [[0]]
    for i in range(1, n):
        if w[i] - w[i - 1] <= cut:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    mats = []
    for cl in clusters:
        vc = v[:, cl]
        for a in range(len(cl)):
            for b in range(len(cl)):
                mats.append(np.outer(vc[:, a], vc[:, b].conj()))
    return np.stack(mats)


def _restrict(phi: np.ndarray, gens: list[np.ndarray], tol: Tolerance) -> np.ndarray:
    """Elements of span(phi) that commute with every generator (phi orthonormal)."""
    for g in gens:
        if phi.shape[0] == 0:
            break
        m = (np.matmul(g, phi) - np.matmul(phi, g)).reshape(phi.shape[0], -1).T
        # Frobenius norm bounds the operator norm; cheaper than an SVD per generator
        scale = 2 * fro(g)
        if scale == 0 or np.linalg.norm(m) <= tol.threshold(scale):
            continue
        c = nullspace(m, tol, scale=scale)
        phi = np.tensordot(c.T, phi, axes=(1, 0))
    return phi


def _commutant_direct(gens: list[np.ndarray], n: int, tol: Tolerance) -> np.ndarray:
    eye = np.eye(n)
    rows = [np.kron(g, eye) - np.kron(eye, g.T) for g in gens]
    if not rows:
        return np.eye(n * n, dtype=complex).reshape(n * n, n, n)
    c = nullspace(np.concatenate(rows, axis=0), tol)
    return c.T.reshape(-1, n, n)


def _check_closed(space: MatrixSubspace, tol: Tolerance, seed: int = 0) -> float:
    """Largest residual of adjoint- and product-closure on random elements."""
    if space.dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(2):
        cx = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
        cy = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
        x = space.combine(cx / np.linalg.norm(cx))
        y = space.combine(cy / np.linalg.norm(cy))
        for z in (x.conj().T, x @ y):
            nz = np.linalg.norm(z)
            if nz:
                worst = max(worst, np.linalg.norm(z - space.project(z)) / nz)
    return worst


def is_star_closed(space: MatrixSubspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    return _check_closed(space, tol) <= tol.threshold(1.0) * 10


def commutant(generators, tol: Tolerance = DEFAULT_TOL, within: MatrixSubspace | None = None,
              method: str = "auto", dim_h: int | None = None) -> StarAlgebra:
    """Operators commuting with every generator and its adjoint.

    This is the commutant of the *-algebra the generators generate, hence
    itself a unital *-algebra.  ``generators`` is a sequence of matrices or a
    StarAlgebra.  For a StarAlgebra its orthonormal basis is used rather than
    its recorded generators: the commutator map of the whole basis has a gap
    set by the algebra alone, while generators of uneven size can shrink it
    and cost digits in the nullspace.  With ``within`` the search is
    restricted to that subspace.  ``method="direct"`` solves the stacked
    vectorized system ``x -> g x - x g`` in one SVD; ``"auto"`` first narrows
    the search to the commutant of a generic Hermitian element of the
    generated algebra and then imposes the generators one at a time.
    """
    if isinstance(generators, StarAlgebra):
        gens = list(generators.basis)
        n = generators.dim_h
    else:
        n, gens = _family(generators)
        if not gens:
            if within is not None:
                n = within.ambient_dim
            elif dim_h is not None:
                n = dim_h
            else:
                raise ValueError("commutant of an empty family needs dim_h")
    if within is not None and within.ambient_dim != n:
        raise ValueError(f"within has ambient dimension {within.ambient_dim}, expected {n}")
    gens = _star_close(gens, tol)

    if within is not None:
        phi = _restrict(within.basis, gens, tol)
    elif method == "direct":
        phi = _commutant_direct(gens, n, tol)
    elif method == "auto":
        if gens:
            phi = _restrict(_generic_commutant_seed(gens, tol), gens, tol)
        else:
            phi = MatrixSubspace.full(n).basis
    else:
        raise ValueError(f"unknown commutant method {method!r}")

    space = orthonormalize(list(phi), tol, ambient_dim=n) if len(phi) else MatrixSubspace.zero(n)
    if within is None:
        resid = _check_closed(space, tol)
        if resid > 1e-6:
            raise AlgebraError(f"commutant failed closure check (residual {resid:.2e})")
    return StarAlgebra(space, unital=within is None)


def center(b: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> MatrixSubspace:
    """``b`` intersected with its commutant."""
    return commutant(list(b.basis), tol, within=b.space).space


def _block_order_key(m: int, k: int, p: np.ndarray, tol: Tolerance):
    d = np.real(np.diag(p))
    support = np.nonzero(d > 0.5)[0]
    first = int(support[0]) if support.size else int(np.argmax(d))
    return (m, k, first)


def wedderburn(b: StarAlgebra, tol: Tolerance = DEFAULT_TOL, seed: int = 0,
               max_retries: int = 8) -> StarAlgebra:
    """Fill in the block structure ``[(m_i, k_i, P_i)]`` of a unital *-algebra.

    The minimal central projections are the spectral projections of a random
    self-adjoint element of the center.  Blocks are ordered by ``(m, k)`` and
    then by the first basis vector in the range of ``P_i``.
    """
    n = b.dim_h
    resid = _check_closed(b.space, tol)
    if resid > 1e-6:
        raise AlgebraError(f"input is not closed under product/adjoint (residual {resid:.2e})")
    ident = np.eye(n, dtype=complex)
    if not subspace_contains(b.space, ident, Tolerance(1e-8, tol.abs_floor)):
        raise AlgebraError("wedderburn needs a unital algebra (identity not in span)")

    z = center(b, tol)
    nz = z.dim
    herm = _hermitian_parts(list(z.basis))
    last_reason = "no attempt"
    for attempt in range(max_retries + 1):
        rng = np.random.default_rng([seed, attempt])
        h = sum(r * x for r, x in zip(rng.standard_normal(len(herm)), herm))
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        spread = w[-1] - w[0]
        if spread <= tol.threshold(1.0):
            clusters = [list(range(n))]
        else:
            clusters = [[0]]
            for i in range(1, n):
                if w[i] - w[i - 1] <= 1e-6 * spread:
                    clusters[-1].append(i)
                else:
                    clusters.append([i])
        if len(clusters) != nz:
            last_reason = f"{len(clusters)} eigenvalue clusters for a {nz}-dimensional center"
            continue
        blocks = []
        ok = True
        for cl in clusters:
            vc = v[:, cl]
            p = vc @ vc.conj().T
            if not subspace_contains(z, p, Tolerance(1e-7, tol.abs_floor)):
                ok, last_reason = False, "spectral projection is not central"
                break
            # x -> p x is an orthogonal projection on b; its trace is dim(p b)
            dim_pb = float(np.real(np.einsum("kji,jl,kli->", b.basis.conj(), p, b.basis)))
            m = int(round(np.sqrt(max(dim_pb, 0.0))))
            rk = len(cl)
            if m < 1 or abs(dim_pb - m * m) > 1e-6 or rk % m:
                ok, last_reason = False, f"non-integral block data (dim {dim_pb:.6f}, rank {rk})"
                break
            blocks.append(WedderburnBlock(m, rk // m, p))
        if not ok:
            continue
        if sum(bl.m * bl.k for bl in blocks) != n or sum(bl.m ** 2 for bl in blocks) != b.dim:
            last_reason = "block dimensions inconsistent with the algebra"
            continue
        blocks.sort(key=lambda bl: _block_order_key(bl.m, bl.k, bl.projection, tol))
        return StarAlgebra(b.space, unital=True, blocks=tuple(blocks), generators=b.generators)
    raise WedderburnError(f"could not resolve central projections after {max_retries + 1} attempts: {last_reason}")


def circle(xi, j: AntilinearMap) -> np.ndarray:
    """Opposite action ``J xi^* J^{-1} = c xi^T c^{-1}``."""
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != j.c.shape:
        raise ValueError(f"operator shape {xi.shape} does not match J of dimension {j.dim}")
    return j.c @ xi.T @ j.c.conj().T


def circle_algebra(b: StarAlgebra, j: AntilinearMap, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """Image ``{x° : x in b}``; again a *-algebra since ° is an anti-automorphism."""
    if b.dim_h != j.dim:
        raise ValueError(f"algebra acts on C^{b.dim_h}, J on C^{j.dim}")
    imgs = np.matmul(np.matmul(j.c, np.swapaxes(b.basis, 1, 2)), j.c.conj().T)
    space = orthonormalize(list(imgs), tol, ambient_dim=b.dim_h) if b.dim else MatrixSubspace.zero(b.dim_h)
    gens = tuple(circle(g, j) for g in b.generators)
    return StarAlgebra(space, unital=b.unital, generators=gens)

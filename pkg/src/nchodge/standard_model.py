"""The finite spectral triple of the Standard Model (one or more generations).

Basis convention: ``H = C^4 (x) C^2 (x) C^4 (x) C^n``.  A pair of 4x4
matrices ``(v, w)`` (particles, antiparticles) is the vector
``sum v_ij e_i(x)f_1(x)e_j + w_ij e_i(x)f_2(x)e_j``; in this basis the action
``(v, w) -> (alpha v beta^t, alpha w beta^t)`` composed with the 2x2 mixing of
``v`` and ``w`` is the plain Kronecker product ``kron(alpha, s, beta)``, and
``J (v, w) = (w^*, v^*)`` has a real permutation matrix as linear part.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .algebra import AntilinearMap, StarAlgebra, circle_algebra, commutant, wedderburn
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    fro,
    kron,
    matrix_unit,
    orthonormalize,
    subspace_equal,
)
from .triple import ConsistencyError, RealSpectralTriple, SignTriple

ALPHA_KEYS = ("alpha13", "alpha14", "alpha23", "alpha24")
BETA_KEYS = ("beta13", "beta14", "beta23", "beta24")
DELTA_KEYS = ("delta12", "delta13", "delta14", "delta21", "delta22", "delta23", "delta24")
PARAM_KEYS = ALPHA_KEYS + BETA_KEYS + DELTA_KEYS + ("upsilon_r",)

KO6_SIGNS = SignTriple(epsilon=1, epsilon_prime=1, epsilon_double_prime=-1)

# entries that must vanish in each case of the 2nd-order classification
CASE_PATTERNS = {
    1: DELTA_KEYS,
    2: ("alpha13", "alpha14", "delta12", "delta13", "delta14", "delta22", "delta23", "delta24"),
    3: ("delta21", "beta13", "beta14"),
    4: ("delta12", "delta13", "delta14", "beta13", "beta14", "alpha13", "alpha14"),
}

_I2 = np.eye(2)
_I4 = np.eye(4)


def e(i: int, j: int, n: int) -> np.ndarray:
    return matrix_unit(i, j, n)


def _idx(key: str) -> tuple[int, int]:
    return int(key[-2]), int(key[-1])


@dataclass(frozen=True, eq=False)
class SMDiracParams:
    """The free parameters of the SM internal Dirac operator.

    ``entries`` maps each name in ``PARAM_KEYS`` to an ``n x n`` complex
    matrix (``1 x 1`` for one generation).  Missing names are zero.
    """

    generations: int = 1
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.generations
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"generations must be a positive integer, got {n!r}")
        unknown = set(self.entries) - set(PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown parameter names: {sorted(unknown)}")
        full = {}
        for key in PARAM_KEYS:
            val = _coerce_entry(self.entries.get(key, 0.0), n)
            if val.shape != (n, n):
                raise ValueError(f"{key}: expected shape {(n, n)}, got {val.shape}")
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{key}: entries must be finite")
            full[key] = val.astype(complex)
        object.__setattr__(self, "entries", full)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.entries[key]

    def scalar(self, key: str) -> complex:
        if self.generations != 1:
            raise ValueError("scalar access needs one generation")
        return complex(self.entries[key][0, 0])

    def replace(self, **changes) -> "SMDiracParams":
        new = dict(self.entries)
        new.update(changes)
        return SMDiracParams(self.generations, new)

    @property
    def alpha(self) -> np.ndarray:
        """The 2x2 matrix ``[[alpha13, alpha14], [alpha23, alpha24]]`` (one generation)."""
        return np.array([[self.scalar("alpha13"), self.scalar("alpha14")],
                         [self.scalar("alpha23"), self.scalar("alpha24")]])

    @property
    def beta(self) -> np.ndarray:
        return np.array([[self.scalar("beta13"), self.scalar("beta14")],
                         [self.scalar("beta23"), self.scalar("beta24")]])

    @classmethod
    def zeros(cls, generations: int = 1) -> "SMDiracParams":
        return cls(generations, {})

    @classmethod
    def from_scalars(cls, alpha=None, beta=None, delta=None, upsilon_r=0.0) -> "SMDiracParams":
        """One-generation parameters from 2x2 ``alpha``/``beta`` and a ``delta`` dict keyed '12', '21', ..."""
        ent = {}
        for name, mat in (("alpha", alpha), ("beta", beta)):
            if mat is not None:
                m = np.asarray(mat, dtype=complex)
                if m.shape != (2, 2):
                    raise ValueError(f"{name} must be 2x2, got {m.shape}")
                for r in range(2):
                    for c in range(2):
                        ent[f"{name}{r + 1}{c + 3}"] = m[r, c]
        for k, v in (delta or {}).items():
            ent[f"delta{k}"] = v
        ent["upsilon_r"] = upsilon_r
        return cls(1, ent)


def _coerce_entry(val, n: int) -> np.ndarray:
    val = np.asarray(val, dtype=complex)
    if val.ndim == 0:
        if not np.isfinite(val):
            raise ValueError("parameter entries must be finite")
        return val * np.eye(n, dtype=complex)
    return val


def sm_params(generations: int = 1, **entries) -> SMDiracParams:
    """Build parameters by name; scalars are promoted to multiples of the identity."""
    return SMDiracParams(generations, {k: _coerce_entry(v, generations) for k, v in entries.items()})


# ---------------------------------------------------------------------------
# representation, grading, real structure

def sm_rep(a, s, b, generation=None) -> np.ndarray:
    """``pi(a (x) s (x) b)`` as a Kronecker product, optionally times a generation factor."""
    a = np.asarray(a, dtype=complex)
    s = np.asarray(s, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (4, 4) or s.shape != (2, 2) or b.shape != (4, 4):
        raise ValueError(f"sm_rep expects shapes (4,4), (2,2), (4,4); got {a.shape}, {s.shape}, {b.shape}")
    if generation is None:
        return kron(a, s, b)
    return kron(a, s, b, generation)


def _gen(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def j_linear_part(generations: int = 1) -> np.ndarray:
    """Permutation ``e_i(x)f_s(x)e_j(x)g -> e_j(x)f_{3-s}(x)e_i(x)g``."""
    n = generations
    dim = 32 * n
    c = np.zeros((dim, dim))
    for i in range(4):
        for s in range(2):
            for j in range(4):
                for g in range(n):
                    src = ((i * 2 + s) * 4 + j) * n + g
                    dst = ((j * 2 + (1 - s)) * 4 + i) * n + g
                    c[dst, src] = 1.0
    return c


def sm_real_structure(generations: int = 1) -> AntilinearMap:
    return AntilinearMap(j_linear_part(generations))


def sm_grading(generations: int = 1) -> np.ndarray:
    chir = np.diag([1.0, 1.0, -1.0, -1.0])
    g = _gen(generations)
    return kron(chir, e(1, 1, 2), _I4, g) - kron(_I4, e(2, 2, 2), chir, g)


def u_matrix(generations: int = 1) -> np.ndarray:
    """Permutation exchanging ``nu_R`` and ``J(nu_R)``."""
    g = _gen(generations)
    return kron(_I4, _I2, _I4, g) + kron(e(1, 1, 4), e(1, 2, 2) + e(2, 1, 2) - _I2, e(1, 1, 4), g)


def _is_quaternion(q: np.ndarray, tol: Tolerance) -> bool:
    ref = np.array([[q[0, 0], q[0, 1]], [-np.conj(q[0, 1]), np.conj(q[0, 0])]])
    return fro(q - ref) <= tol.threshold(max(fro(q), 1.0))


def sm_algebra_element(lam, q, m, generations: int = 1, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Represent ``(lambda, q, m)`` in ``C + H + M_3(C)``."""
    q = np.asarray(q, dtype=complex)
    m = np.asarray(m, dtype=complex)
    if q.shape != (2, 2) or m.shape != (3, 3):
        raise ValueError(f"expected q 2x2 and m 3x3, got {q.shape} and {m.shape}")
    if not _is_quaternion(q, tol):
        raise ValueError("q is not of quaternion form [[q1, q2], [-conj(q2), conj(q1)]]")
    lam = complex(lam)
    top = np.zeros((4, 4), dtype=complex)
    top[0, 0] = lam
    top[1, 1] = np.conj(lam)
    top[2:, 2:] = q
    bottom = np.zeros((4, 4), dtype=complex)
    bottom[0, 0] = lam
    bottom[1:, 1:] = m
    g = _gen(generations)
    return kron(top, e(1, 1, 2), _I4, g) + kron(bottom, e(2, 2, 2), _I4, g)


def sm_algebra_generators(generations: int = 1) -> list[np.ndarray]:
    """Six elements whose generated complex *-algebra is ``A_C``."""
    z2 = np.zeros((2, 2))
    z3 = np.zeros((3, 3))
    n = generations
    return [
        sm_algebra_element(1, _I2, np.eye(3), n),
        sm_algebra_element(1j, z2, z3, n),
        sm_algebra_element(0, np.array([[1j, 0], [0, -1j]]), z3, n),
        sm_algebra_element(0, np.array([[0, 1], [-1, 0]]), z3, n),
        sm_algebra_element(0, z2, e(1, 2, 3), n),
        sm_algebra_element(0, z2, e(2, 3, 3), n),
    ]


# ---------------------------------------------------------------------------
# Dirac operator

def _d0_upper(p: SMDiracParams) -> np.ndarray:
    third_rest = _I4 - e(1, 1, 4)
    x = 0
    for key in ALPHA_KEYS:
        i, j = _idx(key)
        x = x + kron(e(i, j, 4), e(1, 1, 2), e(1, 1, 4), p[key])
    for key in BETA_KEYS:
        i, j = _idx(key)
        x = x + kron(e(i, j, 4), e(1, 1, 2), third_rest, p[key])
    for key in DELTA_KEYS:
        i, j = _idx(key)
        x = x + kron(e(i, j, 4), e(1, 2, 2), e(1, 1, 4), p[key])
    return x


def sm_d0(p: SMDiracParams) -> np.ndarray:
    x = _d0_upper(p)
    return x + x.conj().T


def sm_dr(p: SMDiracParams) -> np.ndarray:
    y = p["upsilon_r"]
    lower = kron(e(1, 1, 4), e(2, 1, 2), e(1, 1, 4), y)
    return lower + lower.conj().T


@dataclass(frozen=True, eq=False)
class SMTriple:
    triple: RealSpectralTriple
    u: np.ndarray
    params: SMDiracParams
    conjugated: bool = False

    @property
    def generations(self) -> int:
        return self.params.generations


def sm_build(params: SMDiracParams) -> SMTriple:
    """Assemble ``(A, H, D, gamma, J)`` with ``D = D0 + J D0 J^-1 + DR``."""
    n = params.generations
    y = params["upsilon_r"]
    if fro(y - y.T) > 1e-12 * max(fro(y), 1.0):
        raise ValueError("upsilon_r must be a symmetric matrix (J D_R J^-1 = D_R)")
    base = _base_triple(n)
    d0 = sm_d0(params)
    d = d0 + base.j.conjugate(d0) + sm_dr(params)
    return SMTriple(base.with_dirac(d), u_matrix(n), params)


@functools.lru_cache(maxsize=None)
def _base_triple(n: int) -> RealSpectralTriple:
    """The SM triple with D = 0; shared so that D-independent results are computed once."""
    dim = 32 * n
    t = RealSpectralTriple(tuple(sm_algebra_generators(n)), np.zeros((dim, dim), dtype=complex),
                           sm_real_structure(n), KO6_SIGNS, sm_grading(n))
    t.structure()
    return t


def cc_params(yn, ye, yu, yd, yr=0.0) -> SMDiracParams:
    """Diagonal-Yukawa parameters: ``alpha^* = diag(yn, ye)``, ``beta^* = diag(yu, yd)``.

    Scalars give one generation; ``n x n`` matrices give ``n`` generations.
    """
    mats = [np.asarray(x, dtype=complex) for x in (yn, ye, yu, yd, yr)]
    shapes = {m.shape for m in mats if m.ndim}
    if len(shapes) > 1:
        raise ValueError(f"inconsistent Yukawa shapes {shapes}")
    if shapes:
        n = shapes.pop()[0]
        mats = [m if m.ndim else m * np.eye(n) for m in mats]
    else:
        n = 1
        mats = [m.reshape(1, 1) for m in mats]
    yn, ye, yu, yd, yr = mats
    return SMDiracParams(n, {
        "alpha13": yn.conj().T, "alpha24": ye.conj().T,
        "beta13": yu.conj().T, "beta24": yd.conj().T,
        "upsilon_r": yr,
    })


# ---------------------------------------------------------------------------
# closed forms

def _param_scale(p: SMDiracParams) -> float:
    s = max(float(np.max(np.abs(v))) for v in p.entries.values())
    return s if s > 0 else 1.0


def _zero(p: SMDiracParams, keys, tol: Tolerance) -> bool:
    thr = tol.threshold(_param_scale(p))
    return all(float(np.max(np.abs(p[k]))) <= thr for k in keys)


def classify_cases(p: SMDiracParams, tol: Tolerance = DEFAULT_TOL) -> frozenset:
    """Which of the four zero-patterns of the 2nd-order classification hold."""
    return frozenset(c for c, keys in CASE_PATTERNS.items() if _zero(p, keys, tol))


def second_order_products(p: SMDiracParams) -> dict:
    """Generation-space products that must all vanish for the 2nd-order condition."""
    out = {}
    d21 = p["delta21"]
    for key in ("alpha13", "alpha14"):
        out[f"delta21*conj({key})"] = d21 @ np.conj(p[key])
    for key in ("delta12", "delta13", "delta14"):
        out[f"delta21*conj({key})"] = d21 @ np.conj(p[key])
    for key in ("delta12", "delta13", "delta14", "delta22", "delta23", "delta24"):
        for b in ("beta13", "beta14"):
            out[f"{key}*conj({b})"] = p[key] @ np.conj(p[b])
    return out


def second_order_closed(p: SMDiracParams, tol: Tolerance = DEFAULT_TOL) -> bool:
    if p.generations == 1:
        return bool(classify_cases(p, tol))
    scale = _param_scale(p) ** 2
    return all(float(np.max(np.abs(v))) <= tol.threshold(scale) for v in second_order_products(p).values())


def _unimodular_multiple(a: np.ndarray, b: np.ndarray, thr: float) -> bool:
    """Whether ``a = c b`` for some ``|c| = 1`` (``b`` nonzero)."""
    c = np.vdot(b, a) / np.vdot(b, b)
    return np.linalg.norm(a - c * b) <= thr and abs(abs(c) - 1.0) <= thr


def case_verdicts(p: SMDiracParams, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Closed-form Hodge verdict of every case whose zero-pattern holds, keyed by case."""
    if p.generations != 1:
        raise ValueError("closed-form Hodge criteria are only known for one generation")
    cases = classify_cases(p, tol)
    scale = _param_scale(p)
    thr = tol.threshold(scale)

    def nz(*keys):
        return not _zero(p, keys, tol)

    a, b = p.alpha, p.beta
    out = {}
    if 1 in cases:
        no_zero_rows = nz("alpha13", "alpha14") and nz("alpha23", "alpha24") and \
            nz("beta13", "beta14") and nz("beta23", "beta24")
        phase_related = no_zero_rows and all(_unimodular_multiple(a[r], b[r], thr * 10) for r in range(2))
        out[1] = bool(no_zero_rows and not phase_related)
    if 2 in cases:
        out[2] = bool(nz("delta21") and nz("alpha23", "alpha24")
                      and nz("beta13", "beta14") and nz("beta23", "beta24"))
    if 3 in cases:
        vectors = [("alpha13", "alpha14"), ("alpha23", "alpha24"),
                   ("delta12", "delta13", "delta14"), ("delta22", "delta23", "delta24")]
        out[3] = bool(nz("beta23", "beta24") and sum(nz(*v) for v in vectors) >= 3)
    if 4 in cases:
        out[4] = bool(nz("delta21") and nz("alpha23", "alpha24") and nz("beta23", "beta24")
                      and nz("delta22", "delta23", "delta24"))
    return out


class CaseVerdictConflict(ConsistencyError):
    pass


def hodge_closed(p: SMDiracParams, tol: Tolerance = DEFAULT_TOL) -> bool | None:
    """Closed-form Hodge verdict; None outside the four 2nd-order cases."""
    verdicts = case_verdicts(p, tol)
    if not verdicts:
        return None
    vals = set(verdicts.values())
    if len(vals) > 1:
        raise CaseVerdictConflict(f"closed-form Hodge criteria disagree on overlapping cases: {verdicts}")
    return vals.pop()


# ---------------------------------------------------------------------------
# comparison algebras

def _big_algebra_elements(case: int) -> list[np.ndarray]:
    mats = []
    rest = _I4 - e(1, 1, 4)
    if case in (1, 2):
        mats.append(kron(e(1, 1, 4), e(2, 2, 2), _I4))
        for k in range(2, 5):
            for l in range(2, 5):
                mats.append(kron(e(k, l, 4), e(2, 2, 2), _I4))
        for k in range(1, 5):
            for l in range(1, 5):
                mats.append(kron(e(k, l, 4), e(1, 1, 2), e(1, 1, 4)))
                mats.append(kron(e(k, l, 4), e(1, 1, 2), rest))
    elif case in (3, 4):
        mats.append(kron(e(1, 1, 4), np.eye(8) - kron(e(1, 1, 2), e(1, 1, 4))))
        for i in (1, 2):
            for k in range(2, 5):
                for l in range(2, 5):
                    mats.append(kron(e(k, l, 4), e(i, i, 2), rest))
        # the 7-dimensional block: e_1..e_4 (x) f_1 (x) e_1 and e_2..e_4 (x) f_2 (x) e_1
        vecs = [kron(np.eye(4)[:, [r]], np.eye(2)[:, [0]], np.eye(4)[:, [0]]) for r in range(4)]
        vecs += [kron(np.eye(4)[:, [r]], np.eye(2)[:, [1]], np.eye(4)[:, [0]]) for r in range(1, 4)]
        for x in vecs:
            for y in vecs:
                mats.append(x @ y.T)
    else:
        raise ValueError(f"case must be 1, 2, 3 or 4, got {case!r}")
    return mats


@functools.lru_cache(maxsize=None)
def _big_algebra(kind: int, tol: Tolerance) -> StarAlgebra:
    mats = _big_algebra_elements(kind)
    space = orthonormalize(mats, tol, ambient_dim=32)
    b = wedderburn(StarAlgebra(space, unital=True, generators=tuple(mats)), tol)
    j = sm_real_structure(1)
    b_comm = commutant(b, tol)
    b_opp = circle_algebra(b, j, tol)
    if not subspace_equal(b_comm.space, b_opp.space, tol):
        raise ConsistencyError(
            f"B' != B° for the comparison algebra of case {kind} "
            f"(dims {b_comm.dim} vs {b_opp.dim})")
    return b


def big_algebra(case: int, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """The D-independent algebra containing the Clifford algebra in ``case`` (one generation)."""
    if case not in (1, 2, 3, 4):
        raise ValueError(f"case must be 1, 2, 3 or 4, got {case!r}")
    return _big_algebra(1 if case in (1, 2) else 3, tol)


def displayed_ud0u(p: SMDiracParams) -> np.ndarray:
    """``U D0 U`` in the form used for cases 2 and 4: ``delta21`` moved into the particle block."""
    d = p["delta21"]
    moved = kron(e(2, 1, 4), e(1, 1, 2), e(1, 1, 4), d)
    return sm_d0(p.replace(delta21=np.zeros_like(d))) + moved + moved.conj().T


def conjugate_by_u(sm: SMTriple, tol: Tolerance = DEFAULT_TOL) -> SMTriple:
    """The unitarily equivalent triple with ``D -> U D U`` (algebra and J are unchanged)."""
    u = sm.u
    t = sm.triple
    for k, a in enumerate(t.algebra_generators):
        if fro(u @ a - a @ u) > tol.threshold(1.0):
            raise ConsistencyError(f"U does not commute with algebra generator {k}")
    if fro(t.j.conjugate(u) - u) > tol.threshold(1.0):
        raise ConsistencyError("U does not commute with J")
    new = t.with_dirac(u @ t.dirac @ u)
    if not sm.conjugated and sm.params.generations == 1:
        cases = classify_cases(sm.params, tol)
        if cases & {2, 4}:
            d0 = sm_d0(sm.params)
            dist = fro(u @ d0 @ u - displayed_ud0u(sm.params))
            if dist > tol.threshold(max(fro(d0), 1.0)):
                raise ConsistencyError(f"U D0 U differs from its closed form by {dist:.3e}")
    return SMTriple(new, u, sm.params, not sm.conjugated)


def clifford_reference(sm: SMTriple, case: int, tol: Tolerance = DEFAULT_TOL) -> tuple[StarAlgebra, RealSpectralTriple]:
    """Comparison algebra for ``case`` and the triple it should be compared with.

    Cases 2 and 4 contain the Clifford algebra only after conjugating by U.
    """
    b = big_algebra(case, tol)
    if case in (2, 4) and not sm.conjugated:
        return b, conjugate_by_u(sm, tol).triple
    return b, sm.triple


def commutant_span_reference() -> list[np.ndarray]:
    """Spanning set of the commutant of A, read off the explicit description."""
    out = []
    for left in (kron(e(2, 2, 4), e(1, 1, 2)),
                 kron(e(3, 3, 4) + e(4, 4, 4), e(1, 1, 2)),
                 kron(_I4 - e(1, 1, 4), e(2, 2, 2))):
        for k in range(1, 5):
            for l in range(1, 5):
                out.append(np.kron(left, e(k, l, 4)))
    for s1 in range(1, 3):
        for s2 in range(1, 3):
            for k in range(1, 5):
                for l in range(1, 5):
                    out.append(kron(e(1, 1, 4), e(s1, s2, 2), e(k, l, 4)))
    return out

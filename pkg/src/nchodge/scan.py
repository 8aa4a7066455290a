"""Monte Carlo cross-check of the closed-form SM predicates against the engine.

Each sample draws complex Gaussian parameters, zeroes the entries required by
the chosen case and, with probability ``degenerate_fraction``, forces one of
the degeneracies under which the closed-form Hodge criterion is false.  The
engine verdicts (Hodge, 2nd order, decomposition, Clifford algebra) are then
compared with the closed forms.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, MatrixSubspace, Tolerance, fro, kron, matrix_unit, subspace_contains_all, subspace_equal
from .standard_model import (
    CASE_PATTERNS,
    PARAM_KEYS,
    SMDiracParams,
    big_algebra,
    classify_cases,
    hodge_closed,
    second_order_closed,
    sm_build,
)
from .triple import ConsistencyError, clifford, commutes_with_algebra, decompose, hodge, omega1, second_order

REPORT_SCHEMA = "1"
DECOMPOSITION_REL_TOL = 1e-9

# row vectors that the closed-form criteria inspect
ROWS = {
    "alpha1": ("alpha13", "alpha14"),
    "alpha2": ("alpha23", "alpha24"),
    "beta1": ("beta13", "beta14"),
    "beta2": ("beta23", "beta24"),
    "delta1": ("delta12", "delta13", "delta14"),
    "delta2": ("delta22", "delta23", "delta24"),
}

# degeneracies that make the closed-form Hodge criterion false in each case
DEGENERACIES = {
    1: ("zero alpha1", "zero alpha2", "zero beta1", "zero beta2", "unimodular rows"),
    2: ("zero delta21", "zero alpha2", "zero beta1", "zero beta2"),
    3: ("zero beta2", "two of four vectors zero", "three of four vectors zero"),
    4: ("zero delta21", "zero alpha2", "zero beta2", "zero delta2"),
}
_CASE3_VECTORS = ("alpha1", "alpha2", "delta1", "delta2")


def sample_seed(seed: int, case: int, index: int) -> np.random.SeedSequence:
    """Independent stream per (seed, case, sample index)."""
    return np.random.SeedSequence(seed, spawn_key=(case, index))


def _gauss(rng: np.random.Generator) -> complex:
    re, im = rng.standard_normal(2)
    return complex(re, im)


def _force(entries: dict, kind: str, rng: np.random.Generator) -> None:
    if kind.startswith("zero "):
        name = kind[5:]
        for key in ROWS.get(name, (name,)):
            entries[key] = 0.0
    elif kind == "unimodular rows":
        for r in "12":
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
            for c in "34":
                entries[f"alpha{r}{c}"] = phase * entries[f"beta{r}{c}"]
    elif kind.endswith("of four vectors zero"):
        count = 2 if kind.startswith("two") else 3
        for name in rng.choice(_CASE3_VECTORS, size=count, replace=False):
            for key in ROWS[str(name)]:
                entries[key] = 0.0
    else:
        raise ValueError(f"unknown degeneracy {kind!r}")


def draw_params(case: int, rng: np.random.Generator, degenerate_fraction: float) -> tuple[SMDiracParams, str | None]:
    """One-generation parameters inside ``case``; optionally degenerate."""
    entries = {key: _gauss(rng) for key in PARAM_KEYS}
    for key in CASE_PATTERNS[case]:
        entries[key] = 0.0
    kind = None
    if rng.uniform() < degenerate_fraction:
        options = DEGENERACIES[case]
        kind = options[int(rng.integers(len(options)))]
        _force(entries, kind, rng)
    return SMDiracParams(1, entries), kind


def _nu_r_projector(n: int) -> np.ndarray:
    """Projector onto the span of ``nu_R`` and ``J nu_R``."""
    return kron(matrix_unit(1, 1, 4), np.eye(2), matrix_unit(1, 1, 4), np.eye(n))


def decomposition_residuals(sm, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Residuals of the structural identities of ``D``, relative to ``||D||``."""
    t = sm.triple
    d = t.dirac
    nd = fro(d)
    scale = nd if nd > 0 else 1.0
    dec = decompose(t, tol)
    om = omega1(t, tol)
    x = dec.d0 + dec.d2
    _, dr_comm = commutes_with_algebra(t, dec.dr, tol)
    pr = _nu_r_projector(sm.generations)
    res = {
        "d2": fro(dec.d2),
        "sum": fro(dec.d0 + dec.d1 + dec.d2 + dec.dr - d),
        "j_d0_d1": fro(t.j.conjugate(dec.d0) - dec.d1),
        "d0_d2_in_omega1": fro(x - om.project(x)) if om.dim else fro(x),
        "dr_in_commutant": dr_comm,
        "dr_support": fro(dec.dr - pr @ dec.dr @ pr),
    }
    return {k: float(v / scale) for k, v in res.items()}


def clifford_check(sm, case: int, closed: bool | None, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Compare the Clifford algebra with the comparison algebra of ``case``.

    In cases 2 and 4 the comparison is made after conjugating by U, which maps
    the Clifford algebra to ``U Cl U``.
    """
    cl = clifford(sm.triple, tol)
    b = big_algebra(case, tol)
    space = cl.space
    if case in (2, 4):
        u = sm.u
        space = MatrixSubspace(space.ambient_dim, np.matmul(np.matmul(u, space.basis), u))
    out = {"clifford_dim": cl.dim, "big_dim": b.dim}
    if closed:
        out["equal"] = bool(subspace_equal(space, b.space, tol))
        out["ok"] = out["equal"]
    else:
        out["contained"] = subspace_contains_all(b.space, space.basis, tol)
        out["ok"] = bool(cl.dim < b.dim)
    return out


@dataclass
class SampleResult:
    index: int
    case: int
    degeneracy: str | None
    params: dict
    cases: list
    engine_hodge: bool | None = None
    closed_hodge: bool | None = None
    second_order: dict = field(default_factory=dict)
    decomposition: dict = field(default_factory=dict)
    clifford: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        return not self.failures


def _params_json(p: SMDiracParams) -> dict:
    return {k: [float(v[0, 0].real), float(v[0, 0].imag)] for k, v in p.entries.items()}


def evaluate(p: SMDiracParams, case: int, index: int = 0, degeneracy: str | None = None,
             tol: Tolerance = DEFAULT_TOL) -> SampleResult:
    """Run every engine/closed-form comparison on one sample."""
    out = SampleResult(index, case, degeneracy, _params_json(p), sorted(classify_cases(p, tol)))
    try:
        sm = sm_build(p)
        closed = hodge_closed(p, tol)
        h = hodge(sm.triple, tol)
        out.engine_hodge, out.closed_hodge = h.holds, closed
        if closed is None or h.holds != closed:
            out.failures.append("hodge")

        so = second_order(sm.triple, tol)
        so_closed = second_order_closed(p, tol)
        out.second_order = {
            "engine": so.holds, "closed": so_closed, "commutator_d0_d1": so.via_d0_d1,
            "residual": so.residual, "d0_d1_norm": so.d0_d1_commutator,
        }
        if not (so.holds == so_closed == so.via_d0_d1):
            out.failures.append("second_order")

        out.decomposition = decomposition_residuals(sm, tol)
        if max(out.decomposition.values()) >= DECOMPOSITION_REL_TOL:
            out.failures.append("decomposition")

        out.clifford = clifford_check(sm, case, closed, tol)
        if not out.clifford["ok"]:
            out.failures.append("clifford")
    except ConsistencyError as exc:
        out.failures.append(f"consistency: {exc}")
    return out


def _run_one(args) -> SampleResult:
    seed, case, index, frac, tol = args
    rng = np.random.default_rng(sample_seed(seed, case, index))
    p, kind = draw_params(case, rng, frac)
    return evaluate(p, case, index, kind, tol)


@dataclass
class ScanReport:
    seed: int
    case: str
    samples: int
    degenerate_fraction: float
    tolerance: dict
    agreements: int
    disagreements: list
    checks: dict
    verdicts: dict
    timing: float
    schema_version: str = REPORT_SCHEMA

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self, include_timing: bool = True) -> str:
        d = asdict(self)
        if not include_timing:
            d.pop("timing")
        return json.dumps(d, sort_keys=True, indent=2)

    def summary_lines(self) -> list[str]:
        lines = [f"scan case={self.case} seed={self.seed} samples={self.samples} "
                 f"degenerate_fraction={self.degenerate_fraction} "
                 f"tol(rel={self.tolerance['rel']}, abs={self.tolerance['abs_floor']})"]
        for name, count in self.checks.items():
            lines.append(f"  {name:<14} {count}/{self.samples}")
        lines.append(f"  hodge verdicts: {self.verdicts['true']} true, {self.verdicts['false']} false "
                     f"({self.verdicts['forced_degenerate']} forced degenerate)")
        lines.append(f"  agreement {self.agreements}/{self.samples}, {len(self.disagreements)} disagreements, "
                     f"{self.timing:.1f} s")
        return lines


def scan(case, samples: int, seed: int = 0, degenerate_fraction: float = 0.25,
         tol: Tolerance = DEFAULT_TOL, workers: int = 1) -> ScanReport:
    """Evaluate ``samples`` random parameter sets; ``case`` is 1-4 or "all" (cycled by index)."""
    if isinstance(samples, bool) or not isinstance(samples, (int, np.integer)) or samples < 1:
        raise ValueError(f"samples must be a positive integer, got {samples!r}")
    if not 0.0 <= degenerate_fraction <= 1.0:
        raise ValueError(f"degenerate_fraction must be in [0, 1], got {degenerate_fraction!r}")
    if case == "all":
        cases = [1 + i % 4 for i in range(samples)]
    elif case in (1, 2, 3, 4):
        cases = [case] * samples
    else:
        raise ValueError(f"case must be 1, 2, 3, 4 or 'all', got {case!r}")
    jobs = [(seed, c, i, degenerate_fraction, tol) for i, c in enumerate(cases)]

    start = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=4))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r.index)
    elapsed = time.perf_counter() - start

    checks = {"hodge": 0, "second_order": 0, "decomposition": 0, "clifford": 0}
    for r in results:
        for name in checks:
            if not any(f == name or f.startswith("consistency") for f in r.failures):
                checks[name] += 1
    disagreements = [
        {"index": r.index, "case": r.case, "params": r.params, "engine_verdict": r.engine_hodge,
         "closed_form_verdict": r.closed_hodge, "failures": r.failures,
         "residuals": {"second_order": r.second_order, "decomposition": r.decomposition,
                       "clifford": r.clifford}}
        for r in results if not r.agrees
    ]
    verdicts = {
        "true": sum(r.engine_hodge is True for r in results),
        "false": sum(r.engine_hodge is False for r in results),
        "forced_degenerate": sum(r.degeneracy is not None for r in results),
    }
    return ScanReport(seed, str(case), samples, degenerate_fraction,
                      {"rel": tol.rel, "abs_floor": tol.abs_floor},
                      samples - len(disagreements), disagreements, checks, verdicts, elapsed)

"""JSON files for triples and SM parameters.

Complex numbers are ``[re, im]`` pairs and every matrix row sits on its own
line, so files diff cleanly.  Writing is canonical: ``write(read(write(x)))``
reproduces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import AntilinearMap
from .standard_model import DELTA_KEYS, SMDiracParams
from .triple import RealSpectralTriple, SignTriple

SCHEMA_VERSION = "1"
TRIPLE_KEYS = ("schema_version", "dim_h", "signs", "algebra_generators", "dirac", "gamma", "j_linear_part")


class FormatError(ValueError):
    """A file does not match the expected layout; the message names the field and position."""


# ---------------------------------------------------------------------------
# writing

def _num(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return json.dumps(float(x) + 0.0)


def _pair(z: complex) -> str:
    return f"[{_num(z.real)}, {_num(z.imag)}]"


def _matrix_lines(m: np.ndarray, indent: str) -> str:
    m = np.asarray(m, dtype=complex)
    rows = [indent + "  [" + ", ".join(_pair(z) for z in row) + "]" for row in m]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def dumps_triple(t: RealSpectralTriple) -> str:
    s = t.signs
    gens = ",\n".join("    " + _matrix_lines(g, "    ") for g in t.algebra_generators)
    parts = [
        f'  "schema_version": "{SCHEMA_VERSION}"',
        f'  "dim_h": {t.dim_h}',
        '  "signs": {"epsilon": %d, "epsilon_prime": %d, "epsilon_double_prime": %s}'
        % (s.epsilon, s.epsilon_prime, json.dumps(s.epsilon_double_prime)),
        '  "algebra_generators": [\n' + gens + "\n  ]" if gens else '  "algebra_generators": []',
        '  "dirac": ' + _matrix_lines(t.dirac, "  "),
        '  "gamma": ' + ("null" if t.gamma is None else _matrix_lines(t.gamma, "  ")),
        '  "j_linear_part": ' + _matrix_lines(t.j.c, "  "),
    ]
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_triple(t: RealSpectralTriple, path) -> None:
    Path(path).write_text(dumps_triple(t))


def _entry_text(m: np.ndarray, n: int, indent: str) -> str:
    if n == 1:
        return _pair(complex(m[0, 0]))
    return _matrix_lines(m, indent)


def dumps_params(p: SMDiracParams) -> str:
    n = p.generations
    ind = "    "

    def block(name):
        rows = []
        for r in (1, 2):
            if n == 1:
                cells = [_entry_text(p[f"{name}{r}{c}"], n, "") for c in (3, 4)]
                rows.append(ind + "[" + ", ".join(cells) + "]")
            else:
                cells = [ind + "  " + _matrix_lines(p[f"{name}{r}{c}"], ind + "  ") for c in (3, 4)]
                rows.append(ind + "[\n" + ",\n".join(cells) + "\n" + ind + "]")
        return "[\n" + ",\n".join(rows) + "\n  ]"

    delta = ",\n".join(f'{ind}"{k[5:]}": {_entry_text(p[k], n, ind)}' for k in DELTA_KEYS)
    parts = [
        f'  "schema_version": "{SCHEMA_VERSION}"',
        f'  "generations": {n}',
        '  "alpha": ' + block("alpha"),
        '  "beta": ' + block("beta"),
        '  "delta": {\n' + delta + "\n  }",
        '  "upsilon_r": ' + _entry_text(p["upsilon_r"], n, "  "),
    ]
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_params(p: SMDiracParams, path) -> None:
    Path(path).write_text(dumps_params(p))


# ---------------------------------------------------------------------------
# reading

def _load_json(text: str, what: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{what}: top level must be an object")
    return data


def _require(data: dict, key: str, what: str):
    if key not in data:
        raise FormatError(f"{what}: missing field '{key}'")
    return data[key]


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _complex(x, where: str) -> complex:
    if isinstance(x, list) and len(x) == 2 and all(_is_real(v) for v in x):
        z = complex(float(x[0]), float(x[1]))
        if not np.isfinite(z):
            raise FormatError(f"{where}: entry is not finite")
        return z
    raise FormatError(f"{where}: expected an [re, im] pair of numbers, got {json.dumps(x)[:40]}")


def _matrix(x, field: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise FormatError(f"{field}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(x):
        if not isinstance(row, list):
            raise FormatError(f"{field}: row {i} is not a list")
        rows.append([_complex(z, f"{field}: row {i}, column {j}") for j, z in enumerate(row)])
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{field}: row {i} has {len(row)} entries, row 0 has {width}")
    m = np.array(rows, dtype=complex)
    if shape is not None and m.shape != shape:
        raise FormatError(f"{field}: expected shape {shape}, got {m.shape}")
    return m


def _check_version(data: dict, what: str) -> None:
    v = _require(data, "schema_version", what)
    if v != SCHEMA_VERSION:
        raise FormatError(f"{what}: unsupported schema_version {v!r} (expected {SCHEMA_VERSION!r})")


def _sign(x, field: str, allow_none: bool = False):
    if allow_none and x is None:
        return None
    if x in (1, -1) and not isinstance(x, bool):
        return int(x)
    raise FormatError(f"{field}: expected +1 or -1, got {json.dumps(x)}")


def loads_triple(text: str) -> RealSpectralTriple:
    what = "triple file"
    data = _load_json(text, what)
    _check_version(data, what)
    unknown = set(data) - set(TRIPLE_KEYS)
    if unknown:
        raise FormatError(f"{what}: unknown fields {sorted(unknown)}")
    n = _require(data, "dim_h", what)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError(f"dim_h: expected a positive integer, got {json.dumps(n)}")
    shape = (n, n)
    signs = _require(data, "signs", what)
    if not isinstance(signs, dict):
        raise FormatError("signs: expected an object")
    sg = SignTriple(
        _sign(_require(signs, "epsilon", "signs"), "signs.epsilon"),
        _sign(_require(signs, "epsilon_prime", "signs"), "signs.epsilon_prime"),
        _sign(signs.get("epsilon_double_prime"), "signs.epsilon_double_prime", allow_none=True),
    )
    gens_raw = _require(data, "algebra_generators", what)
    if not isinstance(gens_raw, list):
        raise FormatError("algebra_generators: expected a list of matrices")
    gens = tuple(_matrix(g, f"algebra_generators[{k}]", shape) for k, g in enumerate(gens_raw))
    dirac = _matrix(_require(data, "dirac", what), "dirac", shape)
    gamma_raw = data.get("gamma")
    gamma = None if gamma_raw is None else _matrix(gamma_raw, "gamma", shape)
    if gamma is not None and sg.epsilon_double_prime is None:
        raise FormatError("signs.epsilon_double_prime: required when gamma is present")
    c = _matrix(_require(data, "j_linear_part", what), "j_linear_part", shape)
    return RealSpectralTriple(gens, dirac, AntilinearMap(c, strict=False), sg, gamma)


def read_triple(path) -> RealSpectralTriple:
    return loads_triple(Path(path).read_text())


def _param_entry(x, n: int, field: str) -> np.ndarray:
    if n == 1 and not (isinstance(x, list) and x and isinstance(x[0], list) and x[0] and isinstance(x[0][0], list)):
        if _is_real(x):
            return np.array([[complex(x)]])
        return np.array([[_complex(x, field)]])
    return _matrix(x, field, (n, n))


def loads_params(text: str) -> SMDiracParams:
    what = "parameter file"
    data = _load_json(text, what)
    _check_version(data, what)
    n = _require(data, "generations", what)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError(f"generations: expected a positive integer, got {json.dumps(n)}")
    entries = {}
    for name in ("alpha", "beta"):
        blk = _require(data, name, what)
        if not (isinstance(blk, list) and len(blk) == 2 and all(isinstance(r, list) and len(r) == 2 for r in blk)):
            raise FormatError(f"{name}: expected a 2x2 array of entries")
        for r in range(2):
            for c in range(2):
                entries[f"{name}{r + 1}{c + 3}"] = _param_entry(blk[r][c], n, f"{name}[{r}][{c}]")
    delta = _require(data, "delta", what)
    if not isinstance(delta, dict):
        raise FormatError("delta: expected an object keyed by index pairs")
    allowed = {k[5:] for k in DELTA_KEYS}
    bad = set(delta) - allowed
    if bad:
        raise FormatError(f"delta: unknown entries {sorted(bad)} (allowed: {sorted(allowed)})")
    for k, v in delta.items():
        entries[f"delta{k}"] = _param_entry(v, n, f"delta.{k}")
    entries["upsilon_r"] = _param_entry(data.get("upsilon_r", [0.0, 0.0]), n, "upsilon_r")
    try:
        return SMDiracParams(n, entries)
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from None


def read_params(path) -> SMDiracParams:
    return loads_params(Path(path).read_text())

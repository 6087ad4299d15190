"""Problem container and trigonometric-polynomial primitives.

A problem is the linear system

    dx/dt = (A0 + B0/omega) x + sum_{1<=|l|<=m} (B_l x + d_l) e^{i l omega t}
            + d_0

described by a JSON-style document.  Everything downstream (spectral data,
expansions, bounds, averaging, the reference integrator) consumes the
``ProblemSpec`` built here.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field

import numpy as np

from .errors import ConjugacyError, SchemaError

# Absolute tolerance for the real-mode conjugate-symmetry checks.
CONJ_TOL = 1e-12

_DOC_FIELDS = ("n", "m", "real_mode", "A0", "B0", "B", "d")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _clean_coeffs(coeffs, shape):
    """Coerce a harmonic->array map to complex, drop exact zeros, freeze."""
    clean = {}
    for l, c in coeffs.items():
        arr = np.asarray(c, dtype=complex)
        if arr.shape != shape:
            raise ValueError(f"harmonic {l}: expected shape {shape}, got {arr.shape}")
        if np.any(arr):
            clean[int(l)] = _freeze(arr)
    return clean


@dataclass(frozen=True, eq=False)
class TrigVectorPoly:
    """Vector-valued trigonometric polynomial sum_l c_l e^{i l tau}."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean_coeffs(self.coeffs, (self.n,)))

    def __call__(self, tau):
        """Evaluate at phase tau (scalar or array); trailing axis is the vector."""
        tau = np.asarray(tau, dtype=float)
        out = np.zeros(tau.shape + (self.n,), dtype=complex)
        for l, c in self.coeffs.items():
            out += np.exp(1j * l * tau)[..., None] * c
        return out

    def mean(self) -> np.ndarray:
        return self.coeffs.get(0, np.zeros(self.n, dtype=complex))

    def support(self) -> tuple:
        return tuple(sorted(self.coeffs))

    def derivative(self) -> "TrigVectorPoly":
        return TrigVectorPoly(self.n, {l: 1j * l * c for l, c in self.coeffs.items()})

    def antiderivative(self) -> "TrigVectorPoly":
        """Zero-mean antiderivative; defined only for zero-mean polynomials."""
        if 0 in self.coeffs:
            raise ValueError("antiderivative needs a zero-mean polynomial")
        return TrigVectorPoly(self.n, {l: c / (1j * l) for l, c in self.coeffs.items()})

    def __add__(self, other: "TrigVectorPoly") -> "TrigVectorPoly":
        merged = {l: np.array(c) for l, c in self.coeffs.items()}
        for l, c in other.coeffs.items():
            merged[l] = merged.get(l, 0) + c
        return TrigVectorPoly(self.n, merged)

    def __eq__(self, other):
        if not isinstance(other, TrigVectorPoly):
            return NotImplemented
        return (
            self.n == other.n
            and self.coeffs.keys() == other.coeffs.keys()
            and all(np.array_equal(c, other.coeffs[l]) for l, c in self.coeffs.items())
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TrigMatrixPoly:
    """Matrix-valued trigonometric polynomial sum_l M_l e^{i l tau}."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean_coeffs(self.coeffs, (self.n, self.n)))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros(tau.shape + (self.n, self.n), dtype=complex)
        for l, c in self.coeffs.items():
            out += np.exp(1j * l * tau)[..., None, None] * c
        return out

    def mean(self) -> np.ndarray:
        return self.coeffs.get(0, np.zeros((self.n, self.n), dtype=complex))

    def support(self) -> tuple:
        return tuple(sorted(self.coeffs))

    def derivative(self) -> "TrigMatrixPoly":
        return TrigMatrixPoly(self.n, {l: 1j * l * c for l, c in self.coeffs.items()})

    def antiderivative(self) -> "TrigMatrixPoly":
        if 0 in self.coeffs:
            raise ValueError("antiderivative needs a zero-mean polynomial")
        return TrigMatrixPoly(self.n, {l: c / (1j * l) for l, c in self.coeffs.items()})

    def __add__(self, other: "TrigMatrixPoly") -> "TrigMatrixPoly":
        merged = {l: np.array(c) for l, c in self.coeffs.items()}
        for l, c in other.coeffs.items():
            merged[l] = merged.get(l, 0) + c
        return TrigMatrixPoly(self.n, merged)

    def __sub__(self, other: "TrigMatrixPoly") -> "TrigMatrixPoly":
        return self + other.scaled(-1.0)

    def scaled(self, factor) -> "TrigMatrixPoly":
        return TrigMatrixPoly(self.n, {l: factor * c for l, c in self.coeffs.items()})

    def __matmul__(self, other: "TrigMatrixPoly") -> "TrigMatrixPoly":
        """Pointwise product; harmonic indices convolve."""
        prod = {}
        for l1, c1 in self.coeffs.items():
            for l2, c2 in other.coeffs.items():
                l = l1 + l2
                prod[l] = prod.get(l, 0) + c1 @ c2
        return TrigMatrixPoly(self.n, prod)

    def apply(self, vec: TrigVectorPoly) -> TrigVectorPoly:
        prod = {}
        for l1, c1 in self.coeffs.items():
            for l2, c2 in vec.coeffs.items():
                l = l1 + l2
                prod[l] = prod.get(l, 0) + c1 @ c2
        return TrigVectorPoly(self.n, prod)

    def __eq__(self, other):
        if not isinstance(other, TrigMatrixPoly):
            return NotImplemented
        return (
            self.n == other.n
            and self.coeffs.keys() == other.coeffs.keys()
            and all(np.array_equal(c, other.coeffs[l]) for l, c in self.coeffs.items())
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Validated coefficient data for one oscillating system.

    ``B`` maps nonzero harmonic indices l (1 <= |l| <= m) to n x n matrices,
    ``d`` maps harmonic indices (0 allowed) to forcing vectors.  Exact-zero
    coefficients are dropped on construction, so two specs describing the
    same system compare equal.
    """

    n: int
    m: int
    A0: np.ndarray
    B0: np.ndarray
    B: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)
    real_mode: bool = True

    def __post_init__(self):
        try:
            n = operator.index(self.n)
            m = operator.index(self.m)
        except TypeError:
            raise SchemaError("n and m must be integers") from None
        if n < 1:
            raise SchemaError(f"n must be a positive integer, got {n!r}")
        if m < 0:
            raise SchemaError(f"m must be a nonnegative integer, got {m!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        A0 = np.asarray(self.A0, dtype=complex)
        B0 = np.asarray(self.B0, dtype=complex)
        for name, mat in (("A0", A0), ("B0", B0)):
            if mat.shape != (n, n):
                raise SchemaError(f"{name} must be {n}x{n}, got shape {mat.shape}")
        object.__setattr__(self, "A0", _freeze(A0))
        object.__setattr__(self, "B0", _freeze(B0))
        try:
            B = _clean_coeffs(self.B, (n, n))
            d = _clean_coeffs(self.d, (n,))
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
        for l in B:
            if l == 0 or abs(l) > m:
                raise SchemaError(f"B harmonic {l} outside 1 <= |l| <= {m}")
        for l in d:
            if abs(l) > m:
                raise SchemaError(f"d harmonic {l} outside |l| <= {m}")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "d", d)
        if self.real_mode:
            _check_real_symmetry(A0, B0, B, d)

    # -- convenience views ------------------------------------------------

    @property
    def d0(self) -> np.ndarray:
        return self.d.get(0, np.zeros(self.n, dtype=complex))

    def osc_matrix(self) -> TrigMatrixPoly:
        """The oscillating part sum_{l != 0} B_l e^{i l tau}."""
        return TrigMatrixPoly(self.n, dict(self.B))

    def forcing_poly(self) -> TrigVectorPoly:
        """The full forcing d_0 + sum_{l != 0} d_l e^{i l tau}."""
        return TrigVectorPoly(self.n, dict(self.d))

    def system_matrix(self, tau, omega) -> np.ndarray:
        """A0 + B0/omega + sum B_l e^{i l tau} at a single phase tau."""
        M = self.A0 + self.B0 / omega
        for l, c in self.B.items():
            M = M + np.exp(1j * l * tau) * c
        return M

    def forcing(self, tau) -> np.ndarray:
        f = self.d0.astype(complex)
        for l, c in self.d.items():
            if l != 0:
                f = f + np.exp(1j * l * tau) * c
        return f

    def __eq__(self, other):
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and self.real_mode == other.real_mode
            and np.array_equal(self.A0, other.A0)
            and np.array_equal(self.B0, other.B0)
            and self.B.keys() == other.B.keys()
            and all(np.array_equal(c, other.B[l]) for l, c in self.B.items())
            and self.d.keys() == other.d.keys()
            and all(np.array_equal(c, other.d[l]) for l, c in self.d.items())
        )

    __hash__ = None


def _check_real_symmetry(A0, B0, B, d):
    """real_mode demands real A0, B0, d_0 and conjugate-paired B_l, d_l."""
    for name, mat in (("A0", A0), ("B0", B0)):
        if np.max(np.abs(mat.imag)) > CONJ_TOL:
            raise ConjugacyError(f"real_mode: {name} has imaginary entries")
    for label, coeffs in (("B", B), ("d", d)):
        for l in sorted({abs(k) for k in coeffs if k != 0}):
            plus = coeffs.get(l, 0)
            minus = coeffs.get(-l, 0)
            if np.max(np.abs(minus - np.conj(plus))) > CONJ_TOL:
                raise ConjugacyError(
                    f"real_mode: {label}[{-l}] is not the conjugate of {label}[{l}]"
                )
    if 0 in d and np.max(np.abs(d[0].imag)) > CONJ_TOL:
        raise ConjugacyError("real_mode: d[0] has imaginary entries")


# -- document parsing ------------------------------------------------------


def _parse_entry(value, real_mode, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if not real_mode:
            raise SchemaError(f"{where}: bare number requires real_mode")
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise SchemaError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _parse_matrix(rows, n, real_mode, where):
    if not isinstance(rows, list) or len(rows) != n:
        raise SchemaError(f"{where}: expected {n} rows")
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{where}[{i}]: expected {n} entries")
        for j, v in enumerate(row):
            out[i, j] = _parse_entry(v, real_mode, f"{where}[{i}][{j}]")
    return out

def _parse_vector(entries, n, real_mode, where):
    if not isinstance(entries, list) or len(entries) != n:
        raise SchemaError(f"{where}: expected {n} entries")
    return np.array(
        [_parse_entry(v, real_mode, f"{where}[{j}]") for j, v in enumerate(entries)]
    )


def _parse_indexed(block, n, real_mode, where, parse_value, allow_zero):
    if not isinstance(block, dict):
        raise SchemaError(f"{where}: expected an object with harmonic-index keys")
    out = {}
    for key, value in block.items():
        try:
            l = int(key)
        except (TypeError, ValueError):
            raise SchemaError(f"{where}: key {key!r} is not an integer") from None
        if not isinstance(key, str) or str(l) != key:
            raise SchemaError(f"{where}: key {key!r} is not a canonical integer string")
        if l == 0 and not allow_zero:
            raise SchemaError(f"{where}: harmonic 0 is not allowed here")
        out[l] = parse_value(value, n, real_mode, f"{where}[{key!r}]")
    return out


def parse_problem(doc) -> ProblemSpec:
    """Build a validated ProblemSpec from a decoded JSON document.

    Raises SchemaError for structural problems and ConjugacyError when a
    real_mode document breaks conjugate symmetry.  An optional "meta" field
    is tolerated and ignored; any other unknown field is rejected.
    """
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be a JSON object")
    unknown = set(doc) - set(_DOC_FIELDS) - {"meta"}
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}")
    missing = [f for f in _DOC_FIELDS if f not in doc]
    if missing:
        raise SchemaError(f"missing fields: {missing}")
    n, m, real_mode = doc["n"], doc["m"], doc["real_mode"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError(f"n must be a positive integer, got {n!r}")
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise SchemaError(f"m must be a nonnegative integer, got {m!r}")
    if not isinstance(real_mode, bool):
        raise SchemaError(f"real_mode must be a boolean, got {real_mode!r}")
    A0 = _parse_matrix(doc["A0"], n, real_mode, "A0")
    B0 = _parse_matrix(doc["B0"], n, real_mode, "B0")
    B = _parse_indexed(doc["B"], n, real_mode, "B", _parse_matrix, allow_zero=False)
    d = _parse_indexed(doc["d"], n, real_mode, "d", _parse_vector, allow_zero=True)
    return ProblemSpec(n=n, m=m, A0=A0, B0=B0, B=B, d=d, real_mode=real_mode)


def _emit_entry(z: complex):
    return [z.real, z.imag]


def _emit_matrix(mat):
    return [[_emit_entry(complex(v)) for v in row] for row in np.asarray(mat)]


def serialize_problem(spec: ProblemSpec) -> dict:
    """Canonical document for a spec: every entry an [re, im] pair, harmonic
    keys sorted numerically.  parse_problem inverts this bit-exactly."""
    return {
        "n": spec.n,
        "m": spec.m,
        "real_mode": spec.real_mode,
        "A0": _emit_matrix(spec.A0),
        "B0": _emit_matrix(spec.B0),
        "B": {str(l): _emit_matrix(spec.B[l]) for l in sorted(spec.B)},
        "d": {
            str(l): [_emit_entry(complex(v)) for v in spec.d[l]] for l in sorted(spec.d)
        },
    }


def load_problem(path) -> ProblemSpec:
    """Read and validate a problem document from a JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None
    return parse_problem(doc)

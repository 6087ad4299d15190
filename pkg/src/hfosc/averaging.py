"""Formal averaging in powers of 1/omega and the series stability test.

For the homogeneous system x' = (A0 + B0/omega + B_osc(omega t)) x there is
a formal change of variables x = (I + sum_{k>=1} omega^{-k} U_k(omega t)) y
with zero-mean trig-polynomial U_k that removes the fast time entirely:
y' = (sum_{k>=0} omega^{-k} A_k) y.  Matching powers of omega gives

    U_{k+1}' = (A0 + B_osc) U_k + B0 U_{k-1} - sum_{j<=k} U_j A_{k-j},
    A_k      = the mean of the right side (which makes it integrable),

with U_0 = I.  The A_k feed truncated power series in 1/omega: the
characteristic polynomial of the averaged matrix, then the leading
principal minors of its Hurwitz matrix, each a scalar series.  The sign of
the first nonvanishing coefficient of every minor decides stability for
large omega; a minor that vanishes through the computed truncation leaves
the test inconclusive (and genuinely so: systems agreeing in every
computed order can differ in stability).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotRealError
from .model import ProblemSpec, TrigMatrixPoly

# Relative floor below which a series coefficient counts as zero.
ZERO_TOL = 1e-9

# Default truncation depth (power of 1/omega) for the stability series.
DEFAULT_TRUNC = 6


@dataclass(frozen=True, eq=False)
class ScalarSeries:
    """Truncated power series in 1/omega: coeffs[q] multiplies omega^{-q}.

    Arithmetic truncates to the shorter operand and never reads beyond it,
    so truncating operands first and truncating the result agree.
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("series needs at least the constant coefficient")

    @classmethod
    def constant(cls, value, trunc: int) -> "ScalarSeries":
        return cls((complex(value),) + (0j,) * trunc)

    @property
    def trunc(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, q: int) -> complex:
        return self.coeffs[q]

    def truncated(self, trunc: int) -> "ScalarSeries":
        if trunc >= self.trunc:
            return self
        return ScalarSeries(self.coeffs[: trunc + 1])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other: "ScalarSeries") -> "ScalarSeries":
        k = min(self.trunc, other.trunc)
        return ScalarSeries(
            tuple(a + b for a, b in zip(self.coeffs[: k + 1], other.coeffs[: k + 1]))
        )

    def __sub__(self, other: "ScalarSeries") -> "ScalarSeries":
        return self + (-other)

    def __neg__(self) -> "ScalarSeries":
        return ScalarSeries(tuple(-c for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, ScalarSeries):
            k = min(self.trunc, other.trunc)
            out = [0j] * (k + 1)
            for q in range(k + 1):
                out[q] = sum(self.coeffs[i] * other.coeffs[q - i] for i in range(q + 1))
            return ScalarSeries(tuple(out))
        return ScalarSeries(tuple(complex(other) * c for c in self.coeffs))

    __rmul__ = __mul__

    def __call__(self, omega: float) -> complex:
        return sum(c * float(omega) ** (-q) for q, c in enumerate(self.coeffs))


@dataclass(frozen=True, eq=False)
class MatrixSeries:
    """Matrix-valued truncated power series in 1/omega."""

    coeffs: tuple  # of (n, n) complex arrays

    def __post_init__(self):
        mats = tuple(np.array(c, dtype=complex) for c in self.coeffs)
        if not mats:
            raise ValueError("series needs at least the constant coefficient")
        n = mats[0].shape[0]
        for M in mats:
            if M.shape != (n, n):
                raise ValueError("all coefficients must be square of one size")
            M.setflags(write=False)
        object.__setattr__(self, "coeffs", mats)

    @classmethod
    def identity(cls, n: int, trunc: int) -> "MatrixSeries":
        return cls((np.eye(n),) + tuple(np.zeros((n, n)) for _ in range(trunc)))

    @classmethod
    def from_scalar(cls, s: ScalarSeries, n: int) -> "MatrixSeries":
        return cls(tuple(c * np.eye(n) for c in s.coeffs))

    @property
    def n(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def trunc(self) -> int:
        return len(self.coeffs) - 1

    def matrix(self, q: int) -> np.ndarray:
        return self.coeffs[q]

    def truncated(self, trunc: int) -> "MatrixSeries":
        if trunc >= self.trunc:
            return self
        return MatrixSeries(self.coeffs[: trunc + 1])

    def __add__(self, other: "MatrixSeries") -> "MatrixSeries":
        k = min(self.trunc, other.trunc)
        return MatrixSeries(
            tuple(a + b for a, b in zip(self.coeffs[: k + 1], other.coeffs[: k + 1]))
        )

    def __sub__(self, other: "MatrixSeries") -> "MatrixSeries":
        return self + other.scaled(-1.0)

    def scaled(self, factor) -> "MatrixSeries":
        return MatrixSeries(tuple(factor * c for c in self.coeffs))

    def __matmul__(self, other: "MatrixSeries") -> "MatrixSeries":
        k = min(self.trunc, other.trunc)
        out = []
        for q in range(k + 1):
            acc = np.zeros((self.n, self.n), dtype=complex)
            for i in range(q + 1):
                acc += self.coeffs[i] @ other.coeffs[q - i]
            out.append(acc)
        return MatrixSeries(tuple(out))

    def trace(self) -> ScalarSeries:
        return ScalarSeries(tuple(np.trace(c) for c in self.coeffs))

    def __call__(self, omega: float) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for q, c in enumerate(self.coeffs):
            out += float(omega) ** (-q) * c
        return out


def kb_transform(spec: ProblemSpec, trunc: int):
    """Averaged-matrix series and the transformation terms U_1..U_trunc."""
    if trunc < 1:
        raise ValueError(f"trunc must be >= 1, got {trunc}")
    n = spec.n
    stationary = TrigMatrixPoly(n, {0: spec.A0}) + spec.osc_matrix()
    B0_poly = TrigMatrixPoly(n, {0: spec.B0})
    U = [TrigMatrixPoly(n, {0: np.eye(n)})]
    A_list = []
    for k in range(trunc + 1):
        G = stationary @ U[k]
        if k >= 1:
            G = G + B0_poly @ U[k - 1]
        for j in range(1, k + 1):
            G = G + U[j] @ TrigMatrixPoly(n, {0: -A_list[k - j]})
        Ak = G.mean()
        A_list.append(Ak)
        if k < trunc:
            U.append((G + TrigMatrixPoly(n, {0: -Ak})).antiderivative())
    return MatrixSeries(tuple(A_list)), U[1:]


def formal_average(spec: ProblemSpec, trunc: int = DEFAULT_TRUNC) -> MatrixSeries:
    """Series A0 + A1/omega + ... + A_trunc/omega^trunc of the averaged system."""
    series, _ = kb_transform(spec, trunc)
    return series


def transform_residual(spec: ProblemSpec, omega, trunc: int, samples: int = 128):
    """Defect of the truncated change of variables at a concrete omega.

    Evaluates M(tau) P(tau) - omega P'(tau) - P(tau) A(omega) on a phase
    grid; a correct construction leaves only the unmatched orders, so the
    result scales like omega^{-trunc}.
    """
    series, U = kb_transform(spec, trunc)
    n = spec.n
    P = TrigMatrixPoly(n, {0: np.eye(n)})
    dP = TrigMatrixPoly(n, {})
    for k, Uk in enumerate(U, start=1):
        P = P + Uk.scaled(float(omega) ** (-k))
        dP = dP + Uk.derivative().scaled(float(omega) ** (-k))
    A_omega = series(omega)
    worst = 0.0
    for tau in np.linspace(0.0, 2 * np.pi, samples, endpoint=False):
        M = spec.system_matrix(tau, omega)
        R = M @ P(tau) - omega * dP(tau) - P(tau) @ A_omega
        worst = max(worst, float(np.linalg.norm(R, 2)))
    return worst


def char_poly_series(ms: MatrixSeries) -> list:
    """Coefficients alpha_1..alpha_n (as series) of det(lambda I - A(omega)).

    Faddeev-LeVerrier in series arithmetic: M_1 = I, c_k = -tr(A M_k)/k,
    M_{k+1} = A M_k + c_k I.  Works over any commutative ring, so the
    truncated-series coefficients are exact up to rounding.
    """
    n = ms.n
    trunc = ms.trunc
    alphas = []
    M = MatrixSeries.identity(n, trunc)
    for k in range(1, n + 1):
        AM = ms @ M
        ck = (-1.0 / k) * AM.trace()
        alphas.append(ck)
        if k < n:
            M = AM + MatrixSeries.from_scalar(ck, n)
    return alphas


def hurwitz_series(alphas: list, trunc: int | None = None) -> list:
    """Leading principal minors D_1..D_n of the Hurwitz matrix, as series.

    Row i, column j of the Hurwitz matrix holds alpha_{2i-j} (1-indexed),
    with alpha_0 = 1 and alpha out of range zero.  Minors are expanded
    recursively along rows with structural-zero pruning and memoization on
    the surviving column set.
    """
    n = len(alphas)
    if trunc is None:
        trunc = min(a.trunc for a in alphas)
    one = ScalarSeries.constant(1.0, trunc)
    zero = ScalarSeries.constant(0.0, trunc)
    table = {0: one}
    for idx, a in enumerate(alphas, start=1):
        table[idx] = a.truncated(trunc)

    def entry(i: int, j: int) -> ScalarSeries:  # 1-indexed
        return table.get(2 * i - j, zero)

    minors = []
    for size in range(1, n + 1):
        memo = {}

        def det(cols: tuple) -> ScalarSeries:
            if not cols:
                return one
            if cols in memo:
                return memo[cols]
            row = size - len(cols) + 1
            acc = zero
            sign = 1.0
            for pos, c in enumerate(cols):
                e = entry(row, c)
                if not e.is_zero():
                    rest = cols[:pos] + cols[pos + 1 :]
                    acc = acc + sign * (e * det(rest))
                sign = -sign
            memo[cols] = acc
            return acc

        minors.append(det(tuple(range(1, size + 1))))
    return minors


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    """Outcome of the series test.

    ``leaders`` has one entry per minor: (order, value) for the first
    coefficient that clears the zero threshold, or None when the whole
    series vanishes through the truncation.  ``kind`` is "Stable" when all
    leaders exist and are positive, "Unstable" when any leader is negative,
    and "Inconclusive" when a minor vanished identically (no finite
    truncation can settle it).
    """

    kind: str
    leaders: tuple
    trunc: int
    zero_tol: float
    detail: str


def classify(minors: list, zero_tol: float = ZERO_TOL) -> StabilityVerdict:
    """Sign-of-leading-coefficient test on the Hurwitz minor series."""
    trunc = min(mnr.trunc for mnr in minors)
    leaders = []
    notes = []
    worst_imag = 0.0
    for mnr in minors:
        coeffs = mnr.coeffs[: trunc + 1]
        scale = max((abs(c) for c in coeffs), default=0.0)
        worst_imag = max(worst_imag, max((abs(c.imag) for c in coeffs), default=0.0))
        threshold = zero_tol * max(scale, 1.0)
        leader = None
        for q, c in enumerate(coeffs):
            if abs(c) > threshold:
                leader = (q, c.real)
                break
        leaders.append(leader)
    if worst_imag > 1e-6:
        raise NotRealError(
            f"Hurwitz minors have imaginary parts up to {worst_imag:.3e}; "
            f"the sign test needs a real system"
        )
    kind = "Stable"
    for j, leader in enumerate(leaders, start=1):
        if leader is not None and leader[1] < 0:
            kind = "Unstable"
            notes.append(f"D_{j} leads with {leader[1]:.6g} at order {leader[0]}")
    if kind != "Unstable":
        for j, leader in enumerate(leaders, start=1):
            if leader is None:
                kind = "Inconclusive"
                notes.append(f"D_{j} vanishes through order {trunc}")
    if kind == "Stable":
        notes.append("all minors lead with positive coefficients")
    return StabilityVerdict(
        kind=kind,
        leaders=tuple(leaders),
        trunc=trunc,
        zero_tol=zero_tol,
        detail="; ".join(notes),
    )


def analyze_stability(
    spec: ProblemSpec,
    trunc: int = DEFAULT_TRUNC,
    zero_tol: float = ZERO_TOL,
) -> StabilityVerdict:
    """Full pipeline: averaged series, characteristic series, minors, signs.

    Only real systems qualify (the sign test reads real leading
    coefficients).  The critical case is assumed but not required here;
    systems without a zero eigenvalue classify fine too.
    """
    if not spec.real_mode:
        raise NotRealError("stability series test requires real_mode")
    series = formal_average(spec, trunc)
    minors = hurwitz_series(char_poly_series(series))
    return classify(minors, zero_tol=zero_tol)
